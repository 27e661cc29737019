"""Teleportation of one qubit over the generated qubit-field channel.

Alice holds the field qubit and the unknown input, Bob holds the charge
qubit (``swap_roles=True`` exchanges the two). Bell states are

    phi+- = (|00> +- |11>)/sqrt(2),   psi+- = (|01> +- |10>)/sqrt(2)

and Bob's Pauli corrections are chosen so that a ``psi+`` channel
teleports perfectly: ``phi+: X, phi-: ZX, psi+: I, psi-: Z``.

The channel generated by the cavity is ``psi+`` only up to a relative
phase on Bob's side. With ``align=True`` (default) Bob first undoes that
phase, read off the channel coherence ``<10|rho|01>``; it is a local unitary
and cannot raise the fidelity of a separable channel above 2/3.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from cpb_cavity.entanglement import TwoQubitState, concurrence, project_two_qubit
from cpb_cavity.errors import DomainError, SweepError
from cpb_cavity.evolution import (
    GroundFock,
    InitialState,
    _cos_sin,
    _rabi,
    check_grid,
    parallel_map,
    sweep,
)
from cpb_cavity.model import DensityOperator, HilbertSpace, ModelParams

OUTCOMES = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")

_S = 1 / math.sqrt(2)
BELL = {
    "phi_plus": np.array([_S, 0, 0, _S], dtype=complex),
    "phi_minus": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi_plus": np.array([0, _S, _S, 0], dtype=complex),
    "psi_minus": np.array([0, _S, -_S, 0], dtype=complex),
}

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
CORRECTIONS = {
    "phi_plus": _X,
    "phi_minus": _Z @ _X,
    "psi_plus": _I,
    "psi_minus": _Z,
}

MIN_OUTCOME_PROB = 1e-14
FIBONACCI_POINTS = 200


@dataclass(frozen=True)
class UnknownQubit:
    """``lambda1 |0> + lambda2 |1>`` with ``|lambda1|^2 + |lambda2|^2 = 1``."""

    lambda1: complex
    lambda2: complex

    def __post_init__(self):
        norm2 = abs(self.lambda1) ** 2 + abs(self.lambda2) ** 2
        if abs(norm2 - 1.0) > 1e-12:
            raise DomainError(f"input qubit not normalized (|l1|^2 + |l2|^2 = {norm2!r})")
        object.__setattr__(self, "lambda1", complex(self.lambda1))
        object.__setattr__(self, "lambda2", complex(self.lambda2))

    @classmethod
    def from_bloch(cls, theta: float, phi: float = 0.0) -> UnknownQubit:
        return cls(math.cos(theta / 2), complex(math.sin(theta / 2)) * np.exp(1j * phi))

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2], dtype=complex)

    @property
    def density(self) -> np.ndarray:
        k = self.ket
        return np.outer(k, k.conj())

    def with_phase(self, chi: float) -> UnknownQubit:
        ph = np.exp(1j * chi)
        return UnknownQubit(self.lambda1 * ph, self.lambda2 * ph)


# default input for fidelity sweeps: real, generic, |lambda1| > |lambda2|
DEFAULT_INPUT = UnknownQubit(math.cos(math.pi / 8), math.sin(math.pi / 8))


def fibonacci_inputs(points: int = FIBONACCI_POINTS) -> list[UnknownQubit]:
    """Deterministic, near-uniform inputs on the Bloch sphere."""
    k = np.arange(points) + 0.5
    z = 1.0 - 2.0 * k / points
    phi = math.pi * (1.0 + math.sqrt(5.0)) * k
    return [UnknownQubit.from_bloch(math.acos(zz), pp) for zz, pp in zip(z, phi)]


@dataclass(frozen=True, eq=False)
class TeleportResult:
    """Outcome-resolved teleportation record at one time point.

    Branches with probability below 1e-14 have ``None`` Bob state and NaN
    fidelity and carry zero weight in ``mean_fidelity``.
    """

    tau: float
    outcome_probs: np.ndarray
    bob_states: tuple[np.ndarray | None, ...]
    fidelities: np.ndarray
    mean_fidelity: float
    avg_over_inputs: float
    paper_fidelity: float = float("nan")
    paper_avg_fidelity: float = float("nan")
    concurrence: float = field(default=float("nan"))

    @property
    def f_psi_plus_cond(self) -> float:
        return float(self.fidelities[OUTCOMES.index("psi_plus")])

    def prob(self, outcome: str) -> float:
        return float(self.outcome_probs[OUTCOMES.index(outcome)])


def channel_from_rho(
    rho: DensityOperator,
    selection: str = "paper_pair",
    n: int | None = None,
    swap_roles: bool = False,
) -> TwoQubitState:
    """Two-qubit channel ``(Alice, Bob)`` read from the cavity state."""
    ch = project_two_qubit(rho, selection, n)
    if not swap_roles:
        return ch
    perm = [0, 2, 1, 3]
    m = ch.matrix[np.ix_(perm, perm)]
    labels = tuple(ch.basis_map[i] for i in perm)
    block = None if ch.kept_block is None else ch.kept_block[np.ix_(perm, perm)]
    return TwoQubitState(m, labels, ch.residual_weight, kept_block=block)


def alignment_unitary(channel: np.ndarray) -> np.ndarray:
    """Bob-side phase gate turning ``a|10> + b|01>`` into a ``psi+``-like pair."""
    coh = channel[2, 1]
    if abs(coh) < MIN_OUTCOME_PROB:
        return _I
    return np.diag([1.0, coh / abs(coh)]).astype(complex)


_BELL_TENSOR = np.array([BELL[k].reshape(2, 2) for k in OUTCOMES])  # [outcome, input, alice]


def teleport_map(channel: np.ndarray, align: bool = True) -> np.ndarray:
    """Corrected teleportation map as a tensor ``T[k, a, b, x, y]``.

    Bob's unnormalized, corrected state for outcome ``k`` is
    ``sum_xy T[k, :, :, x, y] * rho_in[x, y]``.
    """
    ch = np.asarray(channel, dtype=complex).reshape(2, 2, 2, 2)  # [alice, bob, alice', bob']
    raw = np.einsum("kxp,kyq,paqb->kabxy", _BELL_TENSOR.conj(), _BELL_TENSOR, ch)
    v = alignment_unitary(channel) if align else _I
    w = np.array([CORRECTIONS[k] @ v for k in OUTCOMES])
    return np.einsum("kac,kcdxy,kbd->kabxy", w, raw, w.conj())


def entanglement_fidelity(channel: np.ndarray, align: bool = True) -> float:
    """Entanglement fidelity of the outcome-averaged teleportation map."""
    return _map_entanglement_fidelity(teleport_map(channel, align))


def _map_entanglement_fidelity(tmap: np.ndarray) -> float:
    return float(np.einsum("kijij->", tmap).real) / 4.0


def average_fidelity(channel: np.ndarray, align: bool = True) -> float:
    """Input-averaged fidelity ``(2 F_e + 1) / 3`` of the teleportation map."""
    return (2.0 * entanglement_fidelity(channel, align) + 1.0) / 3.0


def teleport_protocol(
    channel: TwoQubitState | np.ndarray,
    input_state: UnknownQubit,
    align: bool = True,
    tau: float = float("nan"),
) -> TeleportResult:
    ch = channel.matrix if isinstance(channel, TwoQubitState) else np.asarray(channel, dtype=complex)
    psi = input_state.ket
    tmap = teleport_map(ch, align)
    probs, states, fids = [], [], []
    for sigma in np.einsum("kabxy,xy->kab", tmap, input_state.density):
        p = float(np.trace(sigma).real)
        probs.append(p)
        if p < MIN_OUTCOME_PROB:
            states.append(None)
            fids.append(float("nan"))
            continue
        rho_b = sigma / p
        states.append(rho_b)
        fids.append(float(np.real(psi.conj() @ rho_b @ psi)))
    probs_a = np.array(probs)
    fids_a = np.array(fids)
    ok = probs_a >= MIN_OUTCOME_PROB
    mean = float(np.sum(probs_a[ok] * fids_a[ok]))
    return TeleportResult(
        tau=float(tau),
        outcome_probs=probs_a,
        bob_states=tuple(states),
        fidelities=fids_a,
        mean_fidelity=mean,
        avg_over_inputs=(2.0 * _map_entanglement_fidelity(tmap) + 1.0) / 3.0,
    )


def fibonacci_average_fidelity(channel: np.ndarray, align: bool = True,
                               points: int = FIBONACCI_POINTS) -> float:
    """Grid average of the outcome-averaged fidelity over input states."""
    return float(np.mean([teleport_protocol(channel, q, align).mean_fidelity
                          for q in fibonacci_inputs(points)]))


# --------------------------------------------------------------------------- #
# published Bob state for a ground-state preparation
# --------------------------------------------------------------------------- #


def paper_amplitudes(params: ModelParams, n: int, tau: float,
                     mu_mode: str = "standard") -> tuple[complex, complex]:
    """``(A_n, B_n)`` with the same trigonometric argument as the closed form."""
    mu, scale, _ = _rabi(params.delta, params.gamma, n, mu_mode)
    c, s = _cos_sin(mu, scale, tau)
    # s = sin(arg)/mu with arg = scale * mu * tau
    a_n = complex(c, -params.delta * s)
    b_n = 1j * params.lambda_c * math.sqrt(n) * s
    return a_n, b_n


def _paper_matrix(a_n: complex, b_n: complex, l1: complex, l2: complex) -> np.ndarray:
    off = l1 * np.conj(l2) * b_n * np.conj(a_n)
    return 0.5 * np.array(
        [[abs(l1) ** 2 * abs(b_n) ** 2, off],
         [np.conj(off), abs(l2) ** 2 * abs(a_n) ** 2]],
        dtype=complex,
    )


def bob_state_paper(params: ModelParams, n: int, tau: float, input_state: UnknownQubit,
                    mu_mode: str = "standard") -> np.ndarray:
    """Bob's state after a ``psi+`` outcome in the published closed form.

    The printed ``|1><0|`` term is completed as the conjugate of the
    ``|0><1|`` term, then the matrix is renormalized by its trace.
    """
    a_n, b_n = paper_amplitudes(params, n, tau, mu_mode)
    m = _paper_matrix(a_n, b_n, input_state.lambda1, input_state.lambda2)
    tr = np.trace(m).real
    if tr <= 0:
        raise DomainError(f"published Bob state has zero trace at tau={tau}")
    return m / tr


def paper_fidelity(params: ModelParams, n: int, tau: float, input_state: UnknownQubit,
                   mu_mode: str = "standard") -> float:
    rho = bob_state_paper(params, n, tau, input_state, mu_mode)
    psi = input_state.ket
    return float(np.real(psi.conj() @ rho @ psi))


def paper_average_fidelity(params: ModelParams, n: int, tau: float,
                           mu_mode: str = "standard", points: int = FIBONACCI_POINTS) -> float:
    """Published fidelity averaged over the Fibonacci input grid.

    Inputs for which the published state degenerates (zero trace) are skipped.
    """
    a_n, b_n = paper_amplitudes(params, n, tau, mu_mode)
    l1, l2 = _fibonacci_arrays(points)
    w1, w2 = np.abs(l1) ** 2, np.abs(l2) ** 2
    m00 = w1 * abs(b_n) ** 2
    m11 = w2 * abs(a_n) ** 2
    m01 = l1 * np.conj(l2) * b_n * np.conj(a_n)
    tr = m00 + m11
    num = w1 * m00 + w2 * m11 + 2.0 * np.real(np.conj(l1) * l2 * m01)
    ok = tr > 0
    return float(np.mean(num[ok] / tr[ok])) if ok.any() else float("nan")


@lru_cache(maxsize=4)
def _fibonacci_arrays(points: int) -> tuple[np.ndarray, np.ndarray]:
    qs = fibonacci_inputs(points)
    return np.array([q.lambda1 for q in qs]), np.array([q.lambda2 for q in qs])


def fidelity_sweep(
    params: ModelParams,
    init: InitialState,
    tau_grid: Sequence[float],
    input_state: UnknownQubit = DEFAULT_INPUT,
    mode: str = "oracle",
    mu_mode: str = "standard",
    selection: str = "paper_pair",
    space: HilbertSpace | None = None,
    align: bool = True,
    swap_roles: bool = False,
    workers: int | None = 1,
) -> list[TeleportResult]:
    """Evolution, channel extraction and teleportation at every grid point.

    The published-formula columns are filled only for ground-state
    preparations, the case the formula is written for.
    """
    taus = check_grid(tau_grid)
    rhos = sweep(params, init, taus, mode, mu_mode, space, workers)
    paper = isinstance(init, GroundFock) and init.n >= 1

    def point(args):
        tau, rho = args
        try:
            ch = channel_from_rho(rho, selection, init.n, swap_roles)
            res = teleport_protocol(ch, input_state, align, tau=tau)
            extra = {"concurrence": concurrence(ch)}
            if paper:
                try:
                    extra["paper_fidelity"] = paper_fidelity(params, init.n, tau, input_state, mu_mode)
                except DomainError:
                    extra["paper_fidelity"] = float("nan")
                extra["paper_avg_fidelity"] = paper_average_fidelity(params, init.n, tau, mu_mode)
            return replace(res, **extra)
        except SweepError:
            raise
        except Exception as exc:
            raise SweepError(float(tau), exc) from exc

    return parallel_map(point, list(zip(taus.tolist(), rhos)), workers)

