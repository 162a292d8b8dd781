"""Kraus-represented CPTP channels, stationary states and covariance classes."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import tolerances
from .errors import (
    CompletenessViolation,
    DimensionMismatch,
    NoFixedPoint,
    NonFullRankStationary,
    NonUniqueFixedPoint,
    NotPositive,
    ParameterOutOfRange,
)
from .matcore import (
    SpectralDecomposition,
    as_matrix,
    hermitian_eig,
    hermitize,
    identity,
    matrix_power_hermitian,
    random_unitary,
)


@dataclass(frozen=True)
class KrausChannel:
    """A CPTP map ``rho -> sum_x K_x rho K_x^dagger``.

    Completeness ``sum_x K_x^dagger K_x = 1`` is checked at construction.
    """

    kraus: tuple
    label: str = ""
    dim: int = field(init=False)

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise DimensionMismatch("all Kraus operators must share one square shape")
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "dim", d)
        defect = np.max(np.abs(sum(k.conj().T @ k for k in ops) - np.eye(d)))
        if defect > tolerances.current().completeness:
            raise CompletenessViolation(f"sum K^dag K deviates from identity by {defect:.3e}")

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def __len__(self) -> int:
        return len(self.kraus)


@dataclass(frozen=True)
class StationaryState:
    gamma: np.ndarray
    spectral: SpectralDecomposition
    full_rank: bool

    @property
    def populations(self) -> np.ndarray:
        """The eigenvalues ``r_i`` of gamma, descending."""
        return self.spectral.eigenvalues

    @property
    def projectors(self) -> tuple:
        return self.spectral.projectors

    @property
    def basis(self) -> np.ndarray:
        return self.spectral.eigenvectors

    def require_full_rank(self) -> None:
        if not self.full_rank:
            raise NonFullRankStationary(
                f"stationary state has eigenvalue {self.populations.min():.3e}; logs are undefined"
            )


class ChannelClass(enum.Enum):
    CLASSICAL = "Classical"
    COVARIANT = "Covariant"
    INCOVARIANT = "Incovariant"


@dataclass(frozen=True)
class Classification:
    kind: ChannelClass
    witness: tuple | None = None


def apply(ch: KrausChannel, rho) -> np.ndarray:
    rho = as_matrix(rho, ch.dim)
    return sum(k @ rho @ k.conj().T for k in ch.kraus)


def superoperator(ch: KrausChannel) -> np.ndarray:
    """``sum_x K_x (x) conj(K_x)``, acting on row-major (C-order) vectorized operators.

    With ``vec = rho.reshape(-1)``, ``apply(ch, rho) == (S @ vec).reshape(d, d)``.
    """
    return sum(np.kron(k, k.conj()) for k in ch.kraus)


def superoperator_distance(a: KrausChannel, b: KrausChannel) -> float:
    """Max-abs entry difference of the two superoperators."""
    if a.dim != b.dim:
        raise DimensionMismatch("channels act on different dimensions")
    return float(np.max(np.abs(superoperator(a) - superoperator(b))))


def channels_equal(a: KrausChannel, b: KrausChannel, atol: float | None = None) -> bool:
    atol = tolerances.current().channel_equality if atol is None else atol
    return superoperator_distance(a, b) <= atol


def state_from_matrix(gamma) -> StationaryState:
    gamma = hermitize(as_matrix(gamma))
    sd = hermitian_eig(gamma)
    return StationaryState(gamma, sd, bool(sd.eigenvalues.min() > tolerances.current().rank))


def stationary_state(ch: KrausChannel) -> StationaryState:
    """Unique fixed point of the channel from the superoperator eigenproblem.

    Raises:
        NoFixedPoint: no eigenvalue within ``fixed_point_eig`` of 1.
        NonUniqueFixedPoint: more than one such eigenvalue.
        NotPositive: the normalized eigenvector is not a positive operator.
    """
    tol = tolerances.current()
    w, v = np.linalg.eig(superoperator(ch))
    near = np.flatnonzero(np.abs(w - 1) < tol.fixed_point_eig)
    if near.size == 0:
        raise NoFixedPoint(f"closest eigenvalue to 1 is {w[np.argmin(np.abs(w - 1))]:.6g}")
    if near.size > 1:
        raise NonUniqueFixedPoint(int(near.size))
    g = v[:, near[0]].reshape(ch.dim, ch.dim)
    g = hermitize(g / np.trace(g))
    g = g / np.trace(g).real
    st = state_from_matrix(g)
    if st.populations.min() < -tol.positivity:
        raise NotPositive(f"fixed point has eigenvalue {st.populations.min():.3e}")
    return st


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ParameterOutOfRange(f"{name}={value} is outside [0, 1]")
    return value


# Basis convention: index 0 is the majority population of the stationary state,
# so the damping part D sends every input to |0><0|.

def build_incovariant(p: float, s: float) -> KrausChannel:
    """``p rho + (1-p)[(1-s) R(rho) + s |0><0|]`` with R the mixture of +-pi/2 y-rotations."""
    p, s = _check_unit("p", p), _check_unit("s", s)
    a = np.sqrt(1 - p) * np.sqrt(1 - s) / 2
    b = np.sqrt(1 - p) * np.sqrt(s)
    kraus = [
        np.sqrt(p) * np.eye(2),
        a * np.array([[1, 1], [-1, 1]]),
        a * np.array([[1, -1], [1, 1]]),
        b * np.array([[0, 1], [0, 0]]),
        b * np.array([[1, 0], [0, 0]]),
    ]
    return KrausChannel(tuple(kraus), label=f"incovariant(p={p}, s={s})")


def build_covariant(p: float, s: float) -> KrausChannel:
    """``p rho + (1-p) gamma`` with ``gamma = diag((1+s)/2, (1-s)/2)``."""
    p, s = _check_unit("p", p), _check_unit("s", s)
    lo = np.sqrt((1 - p) * (1 - s) / 2)
    hi = np.sqrt((1 - p) * (1 + s) / 2)
    kraus = [
        np.sqrt(p) * np.eye(2),
        lo * np.array([[0, 0], [0, 1]]),
        hi * np.array([[0, 1], [0, 0]]),
        lo * np.array([[0, 0], [1, 0]]),
        hi * np.array([[1, 0], [0, 0]]),
    ]
    return KrausChannel(tuple(kraus), label=f"covariant(p={p}, s={s})")


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((identity(dim),), label=f"identity({dim})")


def unitary_channel(u) -> KrausChannel:
    return KrausChannel((as_matrix(u),), label="unitary")


def conjugate_channel(ch: KrausChannel, u) -> KrausChannel:
    """``rho -> U N(U^dag rho U) U^dag``."""
    u = as_matrix(u, ch.dim)
    return KrausChannel(tuple(u @ k @ u.conj().T for k in ch.kraus), label=f"conj[{ch.label}]")


def random_channel(dim: int, n_kraus: int, rng: np.random.Generator) -> KrausChannel:
    """Kraus operators cut from a Haar-ish random isometry ``C^d -> C^(d n)``."""
    v = random_unitary(dim * n_kraus, rng)[:, :dim]
    return KrausChannel(tuple(v[x * dim:(x + 1) * dim, :] for x in range(n_kraus)), label="random")


def basis_amplitudes(ch: KrausChannel, basis: np.ndarray) -> np.ndarray:
    """``T[i, j, k, l] = <k| N(|i><j|) |l>`` in the orthonormal basis given by columns."""
    d = ch.dim
    T = np.empty((d, d, d, d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            out = apply(ch, np.outer(basis[:, i], basis[:, j].conj()))
            T[i, j] = basis.conj().T @ out @ basis
    return T


def check_covariance(ch: KrausChannel, gamma: StationaryState) -> Classification:
    """Classify the channel from its transition amplitudes in the eigenbasis of gamma.

    A transition ``|i><j| -> |k><l|`` is allowed for a covariant channel only if
    ``ln r_i - ln r_j == ln r_k - ln r_l``. The first violating tuple in
    lexicographic order is returned as the witness.
    """
    gamma.require_full_rank()
    tol = tolerances.current()
    T = basis_amplitudes(ch, gamma.basis)
    lr = np.log(gamma.populations)
    d = ch.dim
    for idx in np.ndindex(d, d, d, d):
        i, j, k, l = idx
        if abs(T[idx]) > tol.amplitude and abs(lr[i] - lr[j] - lr[k] + lr[l]) > tol.log_gap:
            return Classification(ChannelClass.INCOVARIANT, tuple(int(x) for x in idx))
    coherent = [idx for idx in np.ndindex(d, d, d, d) if idx[0] != idx[1] or idx[2] != idx[3]]
    if all(abs(T[idx]) <= tol.amplitude for idx in coherent):
        return Classification(ChannelClass.CLASSICAL)
    return Classification(ChannelClass.COVARIANT)


def covariance_defect(ch: KrausChannel, gamma: StationaryState, theta: float) -> float:
    """Superoperator distance between ``U N(U^dag . U) U^dag`` and ``N`` with ``U = gamma^(-i theta)``."""
    u = matrix_power_hermitian(gamma.gamma, -1j * theta, gamma.spectral)
    return superoperator_distance(conjugate_channel(ch, u), ch)
