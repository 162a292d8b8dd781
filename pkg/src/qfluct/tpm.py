"""Two-point generalized measurement protocol for qubits.

Outcome ``m = (mu, r)`` is linearized as ``4 * mu + (r - 1)`` with ``r = 1..4``;
the same layout is used for ``m' = (nu, s)``. The protocol reconstructs the
quasi-probability distribution as a fixed linear transform of the 8x8 joint
outcome table.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .channels import KrausChannel, StationaryState, apply
from .errors import CompletenessViolation, DimensionMismatch, InconsistentContext, UnsupportedDimension
from .fluctuation import ProcessContext, QuasiProbDistribution, _omega_tensor, cluster_atoms, reverse_omegas
from .reversal import rotated_reverse

N_R = 4

# c[i][j][r]:  Pi_i A Pi_j = sum_r c[i][j][r] L_r A L_r^dag
#              Pi_i A Pi_j = sum_r c[j][i][r] L_r^dag A L_r
COEFFICIENTS = np.array(
    [
        [[2, 0, 0, 0], [-1 - 1j, -1 - 1j, 2, 2j]],
        [[-1 + 1j, -1 + 1j, 2, -2j], [0, 2, 0, 0]],
    ],
    dtype=np.complex128,
)


def l_operators(gamma: StationaryState) -> tuple:
    """``L_1 = Pi_0/sqrt2, L_2 = Pi_1/sqrt2, L_3 = 1/2, L_4 = S/2`` with ``S = Pi_0 + i Pi_1``."""
    p0, p1 = gamma.projectors
    return (p0 / np.sqrt(2), p1 / np.sqrt(2), 0.5 * (p0 + p1), 0.5 * (p0 + 1j * p1))


def outcome_index(eig: int, r: int) -> int:
    """Linear index of outcome ``(eig, r)`` with ``r`` counted from 1."""
    return N_R * eig + (r - 1)


@dataclass(frozen=True)
class MeasurementProtocol:
    first: tuple   # M_(mu, r) = L_r Phi_mu
    second: tuple  # M'_(nu, s) = Phi'_nu L_s
    direction: str = "forward"
    theta: float = 0.0


@dataclass(frozen=True)
class JointDistribution:
    probs: np.ndarray  # 8 x 8, rows m, columns m'
    shots: int | None = None
    direction: str = "forward"
    theta: float = 0.0

    @property
    def exact(self) -> bool:
        return self.shots is None


def _require_qubit(ctx: ProcessContext) -> None:
    if ctx.dim != 2:
        raise UnsupportedDimension(f"the measurement set is defined for qubits only, got d={ctx.dim}")


def build_protocol(ctx: ProcessContext, direction: str = "forward", theta: float = 0.0) -> MeasurementProtocol:
    """Measurement sets for the forward protocol, or the reverse one with the
    eigenprojectors of the initial and final states exchanged."""
    _require_qubit(ctx)
    L = l_operators(ctx.gamma)
    if direction == "forward":
        before, after = ctx.spec_i.projectors, ctx.spec_f.projectors
    elif direction == "reverse":
        before, after = ctx.spec_f.projectors, ctx.spec_i.projectors
    else:
        raise ValueError(f"direction must be 'forward' or 'reverse', not {direction!r}")
    first = tuple(L[r] @ phi for phi in before for r in range(N_R))
    second = tuple(phi @ L[r] for phi in after for r in range(N_R))
    eye = np.eye(2)
    for name, ops in (("first", first), ("second", second)):
        defect = np.max(np.abs(sum(m.conj().T @ m for m in ops) - eye))
        if defect > tolerances.current().tpm_exact:
            raise CompletenessViolation(f"{name} measurement set misses completeness by {defect:.3e}")
    return MeasurementProtocol(first, second, direction, float(theta))


def joint_distribution(proto: MeasurementProtocol, ctx: ProcessContext, channel: KrausChannel | None = None) -> JointDistribution:
    """``P(m, m') = Tr[M'_m' N(M_m rho M_m^dag) M'_m'^dag]``.

    The input state is ``rho_i`` for the forward protocol and ``rho_f`` for the
    reverse one; ``channel`` defaults to the forward channel or to the reverse
    family member at ``proto.theta``.
    """
    if channel is None:
        channel = ctx.channel if proto.direction == "forward" else rotated_reverse(ctx.channel, ctx.gamma, proto.theta)
    if channel.dim != 2:
        raise DimensionMismatch("channel dimension does not match the qubit protocol")
    rho = ctx.rho_i if proto.direction == "forward" else ctx.rho_f
    probs = np.empty((len(proto.first), len(proto.second)))
    for m, M in enumerate(proto.first):
        out = apply(channel, M @ rho @ M.conj().T)
        for mp, Mp in enumerate(proto.second):
            probs[m, mp] = np.trace(Mp @ out @ Mp.conj().T).real
    return JointDistribution(probs, None, proto.direction, proto.theta)


def tuple_weights(joint: JointDistribution) -> np.ndarray:
    """``W[a, b, i, j, k, l] = sum_{r,s} c^{ij}_r c^{lk}_s P((a, r), (b, s))``.

    ``a``/``b`` index the eigenstates used by the first/second measurement.
    """
    P = joint.probs.reshape(2, N_R, 2, N_R)
    c = COEFFICIENTS
    return np.einsum("ijr,lks,arbs->abijkl", c, c, P)


def reconstruct(joint: JointDistribution, ctx: ProcessContext) -> QuasiProbDistribution:
    """Quasi-probability distribution from the joint outcome table.

    Raises:
        InconsistentContext: in exact mode, when the reconstructed weights do
            not sum to one within the leakage tolerance.
    """
    _require_qubit(ctx)
    if joint.probs.shape != (2 * N_R, 2 * N_R):
        raise DimensionMismatch(f"joint table must be 8x8, got {joint.probs.shape}")
    ctx.require_full_rank()
    W = tuple_weights(joint)
    if joint.direction == "forward":
        omegas = _omega_tensor(ctx)
    else:
        # first measurement ran over (nu; k, l), second over (mu; i, j)
        W = W.transpose(1, 0, 4, 5, 2, 3)
        omegas = reverse_omegas(ctx)
    leak = abs(W.sum() - 1)
    if joint.exact and leak > tolerances.current().leakage:
        raise InconsistentContext(f"reconstructed mass deviates from 1 by {leak:.3e}")
    theta = None if joint.direction == "forward" else joint.theta
    return cluster_atoms(omegas, W, direction=joint.direction, theta=theta)


def sample(joint: JointDistribution, shots: int, seed: int) -> JointDistribution:
    """Empirical frequencies from one multinomial draw over all 64 outcomes.

    The generator is numpy's counter-based Philox keyed by ``seed``, so a given
    ``(seed, shots)`` yields the same table on every platform.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    p = joint.probs.ravel().copy()
    if p.min() < -tolerances.current().negligible:
        raise ValueError(f"joint distribution has a negative entry {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    rng = np.random.Generator(np.random.Philox(int(seed) % 2**64))
    counts = rng.multinomial(int(shots), p)
    return JointDistribution((counts / shots).reshape(joint.probs.shape), int(shots), joint.direction, joint.theta)
