"""Petz time reversal and the theta-rotated family of reverse channels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .channels import (
    KrausChannel,
    StationaryState,
    apply,
    basis_amplitudes,
    stationary_state,
    superoperator_distance,
)
from .errors import NotStationary
from .matcore import matrix_power_hermitian


def _check_reference(ch: KrausChannel, gamma: StationaryState) -> None:
    gamma.require_full_rank()
    drift = np.max(np.abs(apply(ch, gamma.gamma) - gamma.gamma))
    if drift > tolerances.current().stationarity:
        raise NotStationary(f"N(gamma) differs from gamma by {drift:.3e}")


def rotated_reverse(ch: KrausChannel, gamma: StationaryState, theta: float) -> KrausChannel:
    """Reverse channel with Kraus operators ``gamma^(1/2+i theta) K_x^dag gamma^(-1/2-i theta)``.

    Kraus index ``x`` of the result corresponds to index ``x`` of ``ch``.
    """
    _check_reference(ch, gamma)
    left = matrix_power_hermitian(gamma.gamma, 0.5 + 1j * theta, gamma.spectral)
    right = matrix_power_hermitian(gamma.gamma, -0.5 - 1j * theta, gamma.spectral)
    kraus = tuple(left @ k.conj().T @ right for k in ch.kraus)
    return KrausChannel(kraus, label=f"reverse[{ch.label}](theta={theta!r})")


def petz_reverse(ch: KrausChannel, gamma: StationaryState) -> KrausChannel:
    return rotated_reverse(ch, gamma, 0.0)


@dataclass(frozen=True)
class ReversalFamily:
    forward: KrausChannel
    gamma: StationaryState

    @classmethod
    def of(cls, forward: KrausChannel) -> "ReversalFamily":
        return cls(forward, stationary_state(forward))

    def member(self, theta: float) -> KrausChannel:
        return rotated_reverse(self.forward, self.gamma, theta)

    def distance_to_forward(self, theta: float) -> float:
        return superoperator_distance(self.member(theta), self.forward)


@dataclass(frozen=True)
class SymmetryReport:
    symmetric: bool
    max_amplitude_deviation: float
    superoperator_distance: float


def check_time_reversal_symmetry(ch: KrausChannel, gamma: StationaryState) -> SymmetryReport:
    """Test whether the Petz reverse of ``ch`` is ``ch`` itself.

    The amplitude condition ``sqrt(r_i r_j) T[i,j,k,l] == sqrt(r_k r_l) T[l,k,j,i]``
    is evaluated in the eigenbasis of gamma and cross-checked against the
    superoperator distance between the channel and its reverse.
    """
    gamma.require_full_rank()
    tol = tolerances.current()
    T = basis_amplitudes(ch, gamma.basis)
    sq = np.sqrt(gamma.populations)
    lhs = np.einsum("i,j,ijkl->ijkl", sq, sq, T)
    rhs = np.einsum("k,l,lkji->ijkl", sq, sq, T)
    dev = float(np.max(np.abs(lhs - rhs)))
    dist = superoperator_distance(petz_reverse(ch, gamma), ch)
    return SymmetryReport(dev <= tol.channel_equality and dist <= tol.channel_equality, dev, dist)


def trajectory_probability(kraus_ops, sequence, rho) -> float:
    """``Tr[K_{x_n}...K_{x_1} rho K_{x_1}^dag...K_{x_n}^dag]`` for ``sequence = (x_1, ..., x_n)``."""
    a = np.eye(rho.shape[0], dtype=np.complex128)
    for x in sequence:
        a = kraus_ops[x] @ a
    return float(np.trace(a @ rho @ a.conj().T).real)
