"""Physical parameters, qubit-Fock bookkeeping and Hamiltonians.

Units: hbar = e = 1 and the gate capacitance is the capacitance unit
(``c_g = 1`` in every preset). Time is always the scaled time ``tau``; in
those units the qubit-cavity coupling equals the capacitance prefactor
``gamma = sqrt(c_j) / (c_g + c_j)``.

Note that ``gamma`` is symmetric under ``c_j/c_g -> c_g/c_j``: the ratios
5/2 and 2/5 produce the same coupling.

Basis ordering is ``index = 2 * fock + qubit`` with qubit 0 = g, 1 = e,
i.e. operators are ``kron(field_op, qubit_op)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cpb_cavity.errors import DomainError, InvariantViolation

QUBIT_LABELS = ("g", "e")

# single-qubit operators in the (g, e) basis; sigma_z |e> = +|e>
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T.copy()


@dataclass(frozen=True)
class ModelParams:
    """All physical and derived parameters of one qubit-cavity configuration.

    Use :func:`derive_params` rather than constructing this directly so the
    derived fields stay consistent with the inputs.
    """

    c_j: float
    c_g: float
    n_g: float
    e_j: float
    e_c: float
    omega: float
    n_photon: int
    delta: float
    gamma: float
    lambda_c: float
    theta: float
    mu_gate: float
    omega_c: float

    @property
    def capacitance_ratio(self) -> float:
        return self.c_j / self.c_g

    def as_dict(self) -> dict[str, float]:
        return {
            "c_j": self.c_j,
            "c_g": self.c_g,
            "n_g": self.n_g,
            "e_j": self.e_j,
            "e_c": self.e_c,
            "omega": self.omega,
            "n_photon": self.n_photon,
            "delta": self.delta,
            "gamma": self.gamma,
            "lambda_c": self.lambda_c,
            "theta": self.theta,
            "mu_gate": self.mu_gate,
            "omega_c": self.omega_c,
        }


def charging_energy(c_g: float, c_j: float) -> float:
    """E_c = e^2 / 2(C_g + C_j) with e = 1."""
    return 1.0 / (2.0 * (c_g + c_j))


def derive_params(
    c_j: float,
    c_g: float,
    n_g: float,
    e_j: float,
    e_c: float | None,
    omega: float,
    n_photon: int = 1,
) -> ModelParams:
    """Build a :class:`ModelParams` from the primary circuit quantities.

    ``e_c=None`` derives the charging energy from the capacitances. The
    coupling ``lambda_c`` equals ``gamma`` because the field-amplitude
    factor is absorbed into the scaled time.
    """
    if not c_j > 0 or not c_g > 0:
        raise DomainError(f"capacitances must be positive, got c_j={c_j}, c_g={c_g}")
    if not 0.0 <= n_g <= 1.0:
        raise DomainError(f"gate charge n_g must lie in [0, 1], got {n_g}")
    if not e_j >= 0:
        raise DomainError(f"Josephson energy must be non-negative, got e_j={e_j}")
    if int(n_photon) != n_photon or n_photon < 0:
        raise DomainError(f"photon number must be a non-negative integer, got {n_photon}")
    if e_c is None:
        e_c = charging_energy(c_g, c_j)

    gamma = math.sqrt(c_j) / (c_g + c_j)
    bias = e_c * (1.0 - 2.0 * n_g)
    # arctan(x / 0+) limit at the degeneracy point
    theta = math.pi / 2 if bias == 0.0 else math.atan(e_j / bias)
    omega_c = math.sqrt(e_j**2 + (4.0 * bias) ** 2)
    return ModelParams(
        c_j=float(c_j),
        c_g=float(c_g),
        n_g=float(n_g),
        e_j=float(e_j),
        e_c=float(e_c),
        omega=float(omega),
        n_photon=int(n_photon),
        delta=e_j - omega,
        gamma=gamma,
        lambda_c=gamma,
        theta=theta,
        mu_gate=1.0 - n_g,
        omega_c=omega_c,
    )


def figure_params(c_jg: float, delta: float, n_photon: int = 1) -> ModelParams:
    """Parameters at the charge degeneracy point with ``omega = 1``.

    ``c_g = 1``, ``c_j = c_jg`` and ``e_j = 1 + delta`` so that the
    detuning is exactly ``delta`` and ``omega_c = e_j``.
    """
    return derive_params(
        c_j=c_jg, c_g=1.0, n_g=0.5, e_j=1.0 + delta, e_c=1.0, omega=1.0,
        n_photon=n_photon,
    )


def derive_two_level_fields(e_cl: float, n_j: float, e_j: float) -> tuple[float, float]:
    """Effective fields ``(B_z, B_x)`` of the two-state charge qubit."""
    return e_cl * (1.0 - 2.0 * n_j), e_j


@dataclass(frozen=True)
class HilbertSpace:
    """Qubit tensor a Fock space truncated at ``fock_cutoff`` photons."""

    fock_cutoff: int

    def __post_init__(self):
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise DomainError(f"fock_cutoff must be a positive integer, got {self.fock_cutoff}")

    @classmethod
    def for_photons(cls, n_photon: int, margin: int = 4) -> HilbertSpace:
        return cls(n_photon + margin)

    @property
    def dim(self) -> int:
        return 2 * (self.fock_cutoff + 1)

    @property
    def labels(self) -> list[tuple[str, int]]:
        return [(QUBIT_LABELS[q], f) for f in range(self.fock_cutoff + 1) for q in (0, 1)]

    def index(self, qubit: str | int, fock: int) -> int:
        q = QUBIT_LABELS.index(qubit) if isinstance(qubit, str) else int(qubit)
        if not 0 <= fock <= self.fock_cutoff:
            raise DomainError(f"fock level {fock} outside 0..{self.fock_cutoff}")
        return 2 * fock + q

    def label(self, index: int) -> str:
        q, f = self.labels[index]
        return f"{q},{f}"

    def require(self, n_photon: int) -> None:
        if self.fock_cutoff < n_photon + 2:
            raise DomainError(
                f"fock_cutoff={self.fock_cutoff} too small for n={n_photon}; need >= {n_photon + 2}"
            )

    # operators in the documented ordering
    def annihilation(self) -> np.ndarray:
        a = np.diag(np.sqrt(np.arange(1, self.fock_cutoff + 1, dtype=float)), 1)
        return np.kron(a, np.eye(2)).astype(complex)

    def qubit_op(self, op: np.ndarray) -> np.ndarray:
        return np.kron(np.eye(self.fock_cutoff + 1), op)

    def number(self) -> np.ndarray:
        a = self.annihilation()
        return a.conj().T @ a

    def excitation_number(self) -> np.ndarray:
        """``a^dag a + sigma_+ sigma_-``, conserved by the RWA Hamiltonian."""
        return self.number() + self.qubit_op(SIGMA_PLUS @ SIGMA_MINUS)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dim,):
            raise DomainError(f"state of shape {amps.shape} does not fit dim {self.space.dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"state vector not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, space: HilbertSpace, qubit: str, fock: int) -> StateVector:
        amps = np.zeros(space.dim, dtype=complex)
        amps[space.index(qubit, fock)] = 1.0
        return cls(amps, space)

    def density(self) -> DensityOperator:
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()), self.space)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace operator on ``space``.

    Hermiticity and trace are checked at construction; positivity is
    checked on demand by :meth:`check_positive` since it needs a solve.
    """

    matrix: np.ndarray
    space: HilbertSpace
    tolerance: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise DomainError(f"matrix of shape {m.shape} does not fit dim {self.space.dim}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > self.tolerance:
            raise InvariantViolation(f"density operator not Hermitian (max dev {herm:.2e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > self.tolerance:
            raise InvariantViolation(f"density operator trace {tr!r} != 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def check_positive(self, tol: float = 1e-10) -> None:
        low = self.eigenvalues()[0]
        if low < -tol:
            raise InvariantViolation(f"density operator has eigenvalue {low:.3e} < -{tol}")

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))

    def element(self, ket: tuple[str, int], bra: tuple[str, int]) -> complex:
        """``<ket| rho |bra>``; zero when a label falls outside the space."""
        try:
            i = self.space.index(*ket)
            j = self.space.index(*bra)
        except DomainError:
            return 0.0j
        return complex(self.matrix[i, j])

    def populations(self) -> dict[str, float]:
        diag = np.real(np.diag(self.matrix))
        return {self.space.label(i): float(p) for i, p in enumerate(diag)}

    def fock_marginals(self) -> np.ndarray:
        diag = np.real(np.diag(self.matrix))
        return diag.reshape(self.space.fock_cutoff + 1, 2).sum(axis=1)


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    dev = np.max(np.abs(h - h.conj().T))
    if dev >= 1e-14:
        raise InvariantViolation(f"Hamiltonian not Hermitian (max dev {dev:.2e})")
    return h


def build_rwa_hamiltonian(params: ModelParams, space: HilbertSpace) -> np.ndarray:
    """Rotating-wave Hamiltonian
    ``omega a^dag a + (omega_c/2) sigma_z - lambda (a^dag sigma_- + sigma_+ a)``.

    Block-diagonal in the excitation sectors ``{|g,0>}`` and
    ``{|g,n+1>, |e,n>}``.
    """
    space.require(params.n_photon)
    a = space.annihilation()
    ad = a.conj().T
    h = (
        params.omega * ad @ a
        + 0.5 * params.omega_c * space.qubit_op(SIGMA_Z)
        - params.lambda_c * (ad @ space.qubit_op(SIGMA_MINUS) + space.qubit_op(SIGMA_PLUS) @ a)
    )
    return _check_hermitian(h)


def build_full_hamiltonian(params: ModelParams, space: HilbertSpace) -> np.ndarray:
    """Qubit-resonator Hamiltonian before the rotating-wave approximation.

    ``omega a^dag a + omega_c sigma_z
    - lambda (mu - cos(theta) sigma_z + sin(theta) sigma_x)(a^dag + a)``,
    kept literally, including the ``mu (a^dag + a)`` drive that survives at
    the degeneracy point.
    """
    space.require(params.n_photon)
    a = space.annihilation()
    ad = a.conj().T
    eye = np.eye(space.dim)
    drive = (
        params.mu_gate * eye
        - math.cos(params.theta) * space.qubit_op(SIGMA_Z)
        + math.sin(params.theta) * space.qubit_op(SIGMA_X)
    )
    h = (
        params.omega * ad @ a
        + params.omega_c * space.qubit_op(SIGMA_Z)
        - params.lambda_c * drive @ (ad + a)
    )
    # drive commutes with (a^dag + a); symmetrize away rounding only
    h = 0.5 * (h + h.conj().T)
    return _check_hermitian(h)
