"""Entanglement diagnostics of the qubit-field state.

The qubit-Fock state is reduced to two qubits by keeping two Fock levels;
logical ordering is ``field (x) qubit`` with the lower kept Fock level as
field ``|0>`` and ``g`` as qubit ``|0>``. For photon number ``n`` the
published pair is ``|n, g> -> |1,0>`` and ``|n-1, e> -> |0,1>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from cpb_cavity.errors import DomainError, InvariantViolation
from cpb_cavity.model import QUBIT_LABELS, SIGMA_Y, DensityOperator

SELECTIONS = ("paper_pair", "top_two_fock")
SEPARABLE_TOL = 1e-10
UNFAITHFUL_RESIDUAL = 0.2

_YY = np.kron(SIGMA_Y, SIGMA_Y)


def partial_transpose_qubit(rho: DensityOperator | np.ndarray) -> np.ndarray:
    """Transpose over the qubit index only (ordering ``2 * fock + qubit``)."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    d = m.shape[0]
    f = d // 2
    return m.reshape(f, 2, f, 2).transpose(0, 3, 2, 1).reshape(d, d)


def pt_spectrum(rho: DensityOperator | np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the partial transpose."""
    return np.linalg.eigvalsh(partial_transpose_qubit(rho))


def negativity(eigenvalues_or_matrix: np.ndarray) -> float:
    """Sum of ``|negative eigenvalues|``; accepts a spectrum or a density matrix.

    A matrix argument is partially transposed over its second factor
    (which for a ``2 x 2`` split is either factor, up to spectrum).
    """
    x = np.asarray(eigenvalues_or_matrix)
    if x.ndim == 2:
        x = pt_spectrum(x)
    return float(np.sum(np.maximum(0.0, -x)))


def is_separable(eigenvalues: np.ndarray, tol: float = SEPARABLE_TOL) -> bool:
    return bool(np.min(eigenvalues) >= -tol)


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Two-qubit reduction of the qubit-Fock state.

    ``basis_map[i]`` is the ``(qubit, fock)`` label feeding logical basis
    state ``i = 2 * field_bit + qubit_bit``. ``residual_weight`` is the trace
    discarded before renormalizing.
    """

    matrix: np.ndarray
    basis_map: tuple[tuple[str, int], ...]
    residual_weight: float
    kept_block: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise DomainError(f"two-qubit state must be 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise InvariantViolation("two-qubit state not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise InvariantViolation("two-qubit state trace != 1")
        low = np.linalg.eigvalsh(m)[0]
        if low < -1e-10:
            raise InvariantViolation(f"two-qubit state not positive (eigenvalue {low:.3e})")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> TwoQubitState:
        labels = tuple((QUBIT_LABELS[q], f) for f in (0, 1) for q in (0, 1))
        return cls(np.asarray(matrix, dtype=complex), labels, 0.0)

    @classmethod
    def from_ket(cls, ket: Sequence[complex]) -> TwoQubitState:
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls.from_matrix(np.outer(v, v.conj()))

    @property
    def unfaithful(self) -> bool:
        return self.residual_weight > UNFAITHFUL_RESIDUAL

    @property
    def field_levels(self) -> tuple[int, int]:
        return self.basis_map[0][1], self.basis_map[2][1]


def _paper_levels(n: int | None) -> tuple[int, int]:
    if n is None or n < 1:
        raise DomainError(f"paper_pair selection needs photon number n >= 1, got {n}")
    return n - 1, n


def selected_levels(rho: DensityOperator, selection: str, n: int | None = None) -> tuple[int, int]:
    if selection == "paper_pair":
        return _paper_levels(n)
    if selection == "top_two_fock":
        marg = rho.fock_marginals()
        # stable ordering: heavier first, ties to the lower level
        order = sorted(range(len(marg)), key=lambda f: (-round(marg[f], 12), f))
        lo, hi = sorted(order[:2])
        return lo, hi
    raise DomainError(f"unknown selection {selection!r}; expected one of {SELECTIONS}")


def project_two_qubit(
    rho: DensityOperator, selection: str = "paper_pair", n: int | None = None
) -> TwoQubitState:
    """Keep two Fock levels, map them to a field qubit and renormalize."""
    lo, hi = selected_levels(rho, selection, n)
    space = rho.space
    labels = tuple((QUBIT_LABELS[q], f) for f in (lo, hi) for q in (0, 1))
    idx = [space.index(*lab) for lab in labels]
    block = rho.matrix[np.ix_(idx, idx)]
    kept = float(np.trace(block).real)
    if kept <= 1e-14:
        raise DomainError(f"selected Fock levels {lo},{hi} carry no weight")
    residual = max(0.0, 1.0 - kept)
    state = TwoQubitState(block / kept, labels, residual, kept_block=block)
    if state.unfaithful:
        warnings.warn(
            f"two-qubit projection discards weight {residual:.3f}", RuntimeWarning, stacklevel=2
        )
    return state


def concurrence(state: TwoQubitState | np.ndarray) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    ``l_i`` are the square roots of the eigenvalues of
    ``rho (sy x sy) rho* (sy x sy)``. They are obtained as the singular
    values of ``V^T (sy x sy) V`` with ``rho = V V^dagger``, which avoids
    taking square roots of eigenvalues that sit at rounding level.
    """
    rho = state.matrix if isinstance(state, TwoQubitState) else np.asarray(state, dtype=complex)
    p, vecs = np.linalg.eigh(rho)
    if p[0] < -1e-10:
        raise InvariantViolation(f"state has eigenvalue {p[0]:.3e} < 0")
    v = vecs * np.sqrt(np.clip(p, 0.0, None))
    roots = np.linalg.svd(v.T @ _YY @ v, compute_uv=False)
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


@dataclass(frozen=True)
class EntanglementReport:
    """Diagnostics of rho at one time point.

    ``pt_eigenvalues`` is the full ascending partial-transpose spectrum;
    ``pt_support`` the four eigenvalues on the kept two-level support
    (unnormalized, so they coincide with the nonzero part of the full
    spectrum when nothing leaks out of the support).
    """

    tau: float
    pt_eigenvalues: np.ndarray
    pt_support: np.ndarray
    negativity: float
    concurrence: float
    populations: dict[str, float]
    coherence_gn_en1: complex
    separable_verdict: bool
    residual_weight: float
    n: int

    def population(self, qubit: str, fock: int) -> float:
        return self.populations.get(f"{qubit},{fock}", 0.0)

    @property
    def pop_g_n(self) -> float:
        return self.population("g", self.n)

    @property
    def pop_e_nm1(self) -> float:
        return self.population("e", self.n - 1)

    @property
    def pop_g_np1(self) -> float:
        return self.population("g", self.n + 1)

    @property
    def pop_e_n(self) -> float:
        return self.population("e", self.n)


def analyze(
    rho: DensityOperator, selection: str = "paper_pair", n: int = 1, tau: float = float("nan")
) -> EntanglementReport:
    eigs = pt_spectrum(rho)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        two = project_two_qubit(rho, selection, n)
    support = np.linalg.eigvalsh(partial_transpose_qubit(two.kept_block))
    return EntanglementReport(
        tau=float(tau),
        pt_eigenvalues=eigs,
        pt_support=support,
        negativity=negativity(eigs),
        concurrence=concurrence(two),
        populations=rho.populations(),
        coherence_gn_en1=rho.element(("g", n), ("e", n - 1)),
        separable_verdict=is_separable(eigs),
        residual_weight=two.residual_weight,
        n=n,
    )


# --------------------------------------------------------------------------- #
# crossings and extrema along a time axis
# --------------------------------------------------------------------------- #


def refine_max(f: Callable[[float], float], taus: np.ndarray, values: np.ndarray, i: int) -> tuple[float, float]:
    """Refine a grid maximum at index ``i`` by bounded Brent search."""
    lo = taus[max(i - 1, 0)]
    hi = taus[min(i + 1, len(taus) - 1)]
    if hi <= lo:
        return float(taus[i]), float(values[i])
    res = minimize_scalar(lambda t: -f(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    if -res.fun >= values[i]:
        return float(res.x), float(-res.fun)
    return float(taus[i]), float(values[i])


def first_local_max(values: np.ndarray, start: int = 1) -> int | None:
    """Index of the first strict interior local maximum at or after ``start``."""
    v = np.asarray(values)
    for i in range(max(start, 1), len(v) - 1):
        if v[i] > v[i - 1] and v[i] >= v[i + 1]:
            return i
    return None


def separable_times(
    f: Callable[[float], float],
    taus: np.ndarray,
    tol: float = 1e-6,
    xtol: float = 1e-5,
) -> list[float]:
    """Times where a non-negative entanglement witness ``f`` reaches zero.

    Handles both sign changes of a signed quantity (bisection) and
    touch-downs of a non-negative one (bounded minimization between the
    neighbours of each grid minimum). A touch-down counts when the refined
    minimum is below ``tol``; the default matches the concurrence level
    treated as zero elsewhere.
    """
    vals = np.array([f(t) for t in taus])
    found: list[float] = []
    for i in range(1, len(taus)):
        a, b = vals[i - 1], vals[i]
        if a * b < 0:
            found.append(brentq(f, taus[i - 1], taus[i], xtol=xtol))
    for i in range(1, len(taus) - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]:
            # a touch-down is often a kink (|sin|), so f only reaches ~slope * xatol;
            # refine far below xtol before judging the value
            res = minimize_scalar(f, bounds=(taus[i - 1], taus[i + 1]), method="bounded",
                                  options={"xatol": min(xtol, 1e-10)})
            if abs(res.fun) < tol:
                found.append(float(res.x))
    found.sort()
    merged: list[float] = []
    for t in found:
        if not merged or t - merged[-1] > 10 * xtol:
            merged.append(t)
    return merged


def zero_runs(values: Sequence[float], tol: float = 1e-6) -> list[tuple[int, int]]:
    """Maximal runs ``[start, stop)`` of consecutive entries with ``|v| <= tol``."""
    runs = []
    start = None
    for i, v in enumerate(values):
        if abs(v) <= tol:
            if start is None:
                start = i
        elif start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(values)))
    return runs


def tau_of_half_transfer(gamma: float, n: int) -> float:
    """Resonant time at which ``|g,n>`` and ``|e,n-1>`` are equally populated."""
    return math.pi / (4.0 * gamma * math.sqrt(n))
