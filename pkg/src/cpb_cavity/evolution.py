"""Time evolution of the qubit-cavity state.

Two independent routes:

* :func:`closed_form_rho` assembles rho(tau) from the two-level sector
  solutions of the rotating-wave model (cosine/sine coefficients with a
  generalized Rabi frequency per excitation sector);
* :func:`oracle_propagate` diagonalizes the truncated RWA Hamiltonian
  built from ladder-operator matrices and applies ``exp(-i H tau)``.

``mu_mode`` selects the Rabi-frequency convention of the closed form:

``"standard"``
    ``mu_k = sqrt(delta^2/4 + gamma^2 k)``, trigonometric argument
    ``mu_k * tau``. Agrees with the oracle.
``"paper_literal"``
    ``mu_k = sqrt(delta^2/4 + gamma k)``, argument ``gamma * mu_k * tau``,
    transfer amplitude scaled by ``sqrt(gamma)`` so the state stays
    normalized. Reproduces the published time axes but not the oracle.

The oracle always uses the physical coupling ``lambda_c``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from cpb_cavity.errors import ClosedFormInconsistency, DomainError, InvariantViolation, SweepError
from cpb_cavity.model import (
    DensityOperator,
    HilbertSpace,
    ModelParams,
    StateVector,
    build_rwa_hamiltonian,
)

MU_MODES = ("standard", "paper_literal")
MODES = ("closed_form", "oracle")


# --------------------------------------------------------------------------- #
# initial states
# --------------------------------------------------------------------------- #


class InitialState:
    """Product of a qubit superposition and the Fock state ``|n>``."""

    n: int

    def qubit_amplitudes(self) -> tuple[complex, complex]:
        raise NotImplementedError

    def state_vector(self, space: HilbertSpace) -> StateVector:
        space.require(self.n)
        alpha, beta = self.qubit_amplitudes()
        amps = np.zeros(space.dim, dtype=complex)
        amps[space.index("g", self.n)] = alpha
        amps[space.index("e", self.n)] = beta
        return StateVector(amps, space)

    def describe(self) -> str:
        raise NotImplementedError


def _check_n(n: int) -> None:
    if int(n) != n or n < 0:
        raise DomainError(f"photon number must be a non-negative integer, got {n}")


@dataclass(frozen=True)
class GroundFock(InitialState):
    n: int

    def __post_init__(self):
        _check_n(self.n)

    def qubit_amplitudes(self):
        return 1.0 + 0j, 0j

    def describe(self):
        return f"ground_fock(n={self.n})"


@dataclass(frozen=True)
class ExcitedFock(InitialState):
    n: int

    def __post_init__(self):
        _check_n(self.n)

    def qubit_amplitudes(self):
        return 0j, 1.0 + 0j

    def describe(self):
        return f"excited_fock(n={self.n})"


@dataclass(frozen=True)
class SuperposedQubitFock(InitialState):
    """``(alpha|g> + beta|e>) x |n>``; amplitudes are normalized on construction."""

    alpha: complex
    beta: complex
    n: int

    def __post_init__(self):
        _check_n(self.n)
        norm = math.sqrt(abs(self.alpha) ** 2 + abs(self.beta) ** 2)
        if norm == 0:
            raise DomainError("qubit amplitudes cannot both vanish")
        object.__setattr__(self, "alpha", complex(self.alpha) / norm)
        object.__setattr__(self, "beta", complex(self.beta) / norm)

    def qubit_amplitudes(self):
        return self.alpha, self.beta

    def describe(self):
        return f"superposed(alpha={self.alpha}, beta={self.beta}, n={self.n})"


@dataclass(frozen=True)
class FigureThree(InitialState):
    """``a|g,n> + (1 - a)|e,n>``, normalized.

    ``raw_weights`` keeps the unnormalized pair; for ``a = 0.5`` its squared
    norm is 0.5.
    """

    a: float
    n: int
    raw_weights: tuple[float, float] = field(init=False)

    def __post_init__(self):
        _check_n(self.n)
        raw = (float(self.a), float(1.0 - self.a))
        if raw == (0.0, 0.0):
            raise DomainError("a and 1 - a cannot both vanish")
        object.__setattr__(self, "raw_weights", raw)

    def qubit_amplitudes(self):
        w = self.raw_weights
        norm = math.hypot(*w)
        return complex(w[0] / norm), complex(w[1] / norm)

    def describe(self):
        return f"figure_three(a={self.a}, n={self.n})"


# --------------------------------------------------------------------------- #
# closed form
# --------------------------------------------------------------------------- #


def _rabi(delta: float, gamma: float, k: int, mu_mode: str) -> tuple[float, float, float]:
    """Return ``(mu_k, time_scale, coupling_sq)`` for excitation sector ``k``."""
    if mu_mode == "standard":
        kappa, scale = gamma**2, 1.0
    elif mu_mode == "paper_literal":
        kappa, scale = gamma, gamma
    else:
        raise DomainError(f"unknown mu_mode {mu_mode!r}; expected one of {MU_MODES}")
    return math.sqrt(delta**2 / 4.0 + kappa * k), scale, kappa


def _cos_sin(mu: float, scale: float, tau: float) -> tuple[float, float]:
    # sin(x)/mu written through sinc so mu = 0 (resonant empty sector) is finite
    x = scale * mu * tau
    return math.cos(x), scale * tau * float(np.sinc(x / math.pi))


@dataclass(frozen=True)
class ClosedFormCoeffs:
    """Coefficients of the closed-form solution for photon number ``n``.

    ``c_*`` are cosines, ``s_*`` sines divided by the Rabi frequency,
    ``a_coef`` is the survival probability of ``|e,n>``, ``b_coef`` the
    square of its survival amplitude and ``c_coef`` the cross coefficient
    ``i S_n (C_{n+1} + i delta/2 S_{n+1})``.
    """

    n: int
    tau: float
    delta: float
    coupling: float
    c_n: float
    c_np1: float
    s_n: float
    s_np1: float
    mu_n: float
    mu_np1: float
    a_coef: float
    b_coef: complex
    c_coef: complex

    # sector amplitudes, without the sector energy phase
    def stay_ground(self) -> complex:
        """Amplitude ``<g,n|U|g,n>``."""
        return self.c_n + 0.5j * self.delta * self.s_n

    def transfer_ground(self) -> complex:
        """Amplitude ``<e,n-1|U|g,n>``."""
        return 1j * self.coupling * math.sqrt(self.n) * self.s_n

    def stay_excited(self) -> complex:
        """Amplitude ``<e,n|U|e,n>``."""
        return self.c_np1 - 0.5j * self.delta * self.s_np1

    def transfer_excited(self) -> complex:
        """Amplitude ``<g,n+1|U|e,n>``."""
        return 1j * self.coupling * math.sqrt(self.n + 1) * self.s_np1


def closed_form_coeffs(
    params: ModelParams, n: int, tau: float, mu_mode: str = "standard"
) -> ClosedFormCoeffs:
    delta = params.delta
    mu_n, scale, kappa = _rabi(delta, params.gamma, n, mu_mode)
    mu_np1, _, _ = _rabi(delta, params.gamma, n + 1, mu_mode)
    c_n, s_n = _cos_sin(mu_n, scale, tau)
    c_np1, s_np1 = _cos_sin(mu_np1, scale, tau)
    quarter = delta**2 / 4.0
    return ClosedFormCoeffs(
        n=n,
        tau=tau,
        delta=delta,
        coupling=math.sqrt(kappa),
        c_n=c_n,
        c_np1=c_np1,
        s_n=s_n,
        s_np1=s_np1,
        mu_n=mu_n,
        mu_np1=mu_np1,
        a_coef=c_np1**2 + quarter * s_np1**2,
        b_coef=complex(c_np1**2 - quarter * s_np1**2, -delta * s_np1 * c_np1),
        c_coef=1j * s_n * complex(c_np1, 0.5 * delta * s_np1),
    )


Label = tuple[str, int]


def closed_form_amplitudes(
    params: ModelParams, init: InitialState, tau: float, mu_mode: str = "standard"
) -> dict[Label, complex]:
    """Nonzero amplitudes of psi(tau) keyed by ``(qubit, fock)`` labels."""
    n = init.n
    alpha, beta = init.qubit_amplitudes()
    k = closed_form_coeffs(params, n, tau, mu_mode)
    # mean energy of sector {|g,m>, |e,m-1>} is omega (m - 1/2)
    phase_n = np.exp(-1j * params.omega * (n - 0.5) * tau)
    phase_np1 = np.exp(-1j * params.omega * (n + 0.5) * tau)
    amps: dict[Label, complex] = {}
    if alpha != 0:
        amps[("g", n)] = alpha * phase_n * k.stay_ground()
        if n >= 1:
            amps[("e", n - 1)] = alpha * phase_n * k.transfer_ground()
    if beta != 0:
        amps[("e", n)] = beta * phase_np1 * k.stay_excited()
        amps[("g", n + 1)] = beta * phase_np1 * k.transfer_excited()
    return amps


def closed_form_terms(
    params: ModelParams, init: InitialState, tau: float, mu_mode: str = "standard"
) -> dict[tuple[Label, Label], complex]:
    """Every ``|ket><bra|`` term of rho(tau) with its coefficient."""
    amps = closed_form_amplitudes(params, init, tau, mu_mode)
    return {(ket, bra): a * np.conj(b) for ket, a in amps.items() for bra, b in amps.items()}


def closed_form_rho(
    params: ModelParams,
    init: InitialState,
    tau: float,
    mu_mode: str = "standard",
    space: HilbertSpace | None = None,
) -> DensityOperator:
    """rho(tau) assembled term by term from the closed-form coefficients.

    Raises :class:`ClosedFormInconsistency` if the assembled trace is off by
    1e-6 or more; smaller deviations are renormalized away.
    """
    if tau < 0:
        raise DomainError(f"tau must be non-negative, got {tau}")
    space = space or HilbertSpace.for_photons(max(params.n_photon, init.n))
    space.require(init.n)
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    for (ket, bra), coef in closed_form_terms(params, init, tau, mu_mode).items():
        rho[space.index(*ket), space.index(*bra)] += coef
    tr = np.trace(rho).real
    if abs(tr - 1.0) >= 1e-6:
        raise ClosedFormInconsistency(abs(tr - 1.0), tau)
    rho /= tr
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(rho, space, tolerance=1e-10)


def printed_terms(
    coeffs: ClosedFormCoeffs, alpha: complex, beta: complex, eta: float = 1.0
) -> dict[tuple[Label, Label], complex]:
    """The published term list for rho(tau), taken at face value.

    Used only for the term-level comparison report; the stray ``eta`` is
    set to one.
    """
    n = coeffs.n
    A, B, C, S = coeffs.a_coef, coeffs.b_coef, coeffs.c_coef, coeffs.s_n
    a2, b2 = abs(alpha) ** 2, abs(beta) ** 2
    ab, ba = alpha * np.conj(beta), beta * np.conj(alpha)
    r1, rn = math.sqrt(n + 1), math.sqrt(n)
    g, e = "g", "e"
    raw = [
        ((g, n), (g, n), A * a2),
        ((e, n), (e, n), A * b2),
        ((g, n), (e, n), B * ab),
        ((e, n), (g, n), np.conj(B) * np.conj(alpha) * beta),
        ((g, n), (g, n + 1), 1j * C * r1 * ab),
        ((g, n + 1), (g, n), 1j * C * r1 * ba),
        ((e, n), (g, n - 1), -1j * C * r1 * b2),
        ((e, n), (e, n - 1), -1j * C * rn * ba),
        ((g, n + 1), (e, n), 1j * eta * np.conj(C) * r1 * b2),
        ((g, n), (e, n - 1), -1j * eta * np.conj(C) * rn * a2),
        ((g, n + 1), (e, n - 1), eta**2 * S**2 * rn * r1 * ba),
        ((e, n - 1), (g, n + 1), eta**2 * S**2 * rn * r1 * ab),
        ((e, n - 1), (e, n - 1), S**2 * n * a2),
        ((g, n + 1), (g, n + 1), S**2 * (n + 1) * b2),
        ((e, n - 1), (g, n), 1j * rn * S * a2 * C),
        ((e, n - 1), (e, n), 1j * rn * S * ab * np.conj(C)),
    ]
    terms: dict[tuple[Label, Label], complex] = {}
    for ket, bra, coef in raw:
        if ket[1] < 0 or bra[1] < 0:
            continue
        terms[(ket, bra)] = terms.get((ket, bra), 0j) + complex(coef)
    return terms


# --------------------------------------------------------------------------- #
# exact-diagonalization oracle
# --------------------------------------------------------------------------- #


class RwaPropagator:
    """``exp(-i H tau)`` for the truncated RWA Hamiltonian via one eigensolve."""

    def __init__(self, params: ModelParams, space: HilbertSpace):
        self.params = params
        self.space = space
        h = build_rwa_hamiltonian(params, space)
        if np.max(np.abs(h - h.conj().T)) >= 1e-14:
            raise InvariantViolation("RWA Hamiltonian is not Hermitian")
        self.energies, self.vectors = np.linalg.eigh(h)

    def evolve(self, psi0: np.ndarray, tau: float) -> np.ndarray:
        coeffs = self.vectors.conj().T @ psi0
        return self.vectors @ (np.exp(-1j * self.energies * tau) * coeffs)

    def rho(self, psi0: StateVector, tau: float) -> DensityOperator:
        psi = self.evolve(psi0.amplitudes, tau)
        # renormalize rounding only; unitarity is checked by the tests
        psi = psi / np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        return DensityOperator(rho, self.space)


def oracle_propagate(
    params: ModelParams, space: HilbertSpace, psi0: StateVector, tau: float
) -> DensityOperator:
    """``|psi(tau)><psi(tau)|`` by exact diagonalization of the RWA Hamiltonian."""
    return RwaPropagator(params, space).rho(psi0, tau)


# --------------------------------------------------------------------------- #
# sweeps
# --------------------------------------------------------------------------- #


def check_grid(tau_grid: Sequence[float]) -> np.ndarray:
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise DomainError("tau grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(taus)):
        raise DomainError("tau grid contains non-finite values")
    if np.any(np.diff(taus) <= 0):
        raise DomainError("tau grid must be strictly increasing")
    if taus[0] < 0:
        raise DomainError("tau grid must be non-negative")
    return taus


def parallel_map(fn: Callable, items: Sequence, workers: int | None = 1) -> list:
    """Ordered map; ``workers=None`` uses every available core."""
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sweep(
    params: ModelParams,
    init: InitialState,
    tau_grid: Sequence[float],
    mode: str = "oracle",
    mu_mode: str = "standard",
    space: HilbertSpace | None = None,
    workers: int | None = 1,
) -> list[DensityOperator]:
    """One density operator per grid point, in grid order."""
    taus = check_grid(tau_grid)
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {MODES}")
    space = space or HilbertSpace.for_photons(max(params.n_photon, init.n))
    space.require(init.n)

    if mode == "oracle":
        prop = RwaPropagator(params, space)
        psi0 = init.state_vector(space)

        def point(tau):
            return prop.rho(psi0, tau)
    else:

        def point(tau):
            return closed_form_rho(params, init, tau, mu_mode, space)

    def guarded(tau):
        try:
            return point(float(tau))
        except Exception as exc:
            raise SweepError(float(tau), exc) from exc

    return parallel_map(guarded, list(taus), workers)
