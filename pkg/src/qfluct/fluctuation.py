"""Complex entropy production, quasi-probability distributions and the
fluctuation-theorem verifiers built on them.

Index conventions: ``mu``/``nu`` label eigenstates of the initial/final state,
``i, j, k, l`` label eigenstates of the stationary state. Entropies are in nats.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tolerances
from .channels import KrausChannel, StationaryState, apply, stationary_state, state_from_matrix
from .errors import NonRealMarginal, RankDeficientState, UnmatchedAtom
from .matcore import SpectralDecomposition, as_matrix, hermitian_eig, hermitize, log_hermitian
from .reversal import rotated_reverse

PHOTONIC_P = 0.2864
PHOTONIC_S = 0.1316


def photonic_initial_state() -> np.ndarray:
    """``4/5 |phi_0><phi_0| + 1/5 |phi_1><phi_1|`` with the two states tilted by pi/6."""
    c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
    phi0 = np.array([s, -1j * c])
    phi1 = np.array([c, 1j * s])
    return 0.8 * np.outer(phi0, phi0.conj()) + 0.2 * np.outer(phi1, phi1.conj())


def state_from_eigen(eigenvalues, eigenvectors) -> np.ndarray:
    """Density matrix ``sum p_mu |v_mu><v_mu|``; ``eigenvectors`` are rows."""
    vecs = np.asarray(eigenvectors, dtype=np.complex128)
    vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    return sum(p * np.outer(v, v.conj()) for p, v in zip(eigenvalues, vecs))


@dataclass(frozen=True)
class ProcessContext:
    channel: KrausChannel
    gamma: StationaryState
    rho_i: np.ndarray
    spec_i: SpectralDecomposition
    rho_f: np.ndarray
    spec_f: SpectralDecomposition

    @property
    def dim(self) -> int:
        return self.channel.dim

    @classmethod
    def build(cls, channel: KrausChannel, rho_i, gamma=None) -> "ProcessContext":
        """Context for ``rho_i -> channel(rho_i)``.

        ``gamma`` may be a density matrix or a StationaryState; when omitted it
        is computed from the channel (which must then have a unique fixed point).
        """
        if gamma is None:
            st = stationary_state(channel)
        elif isinstance(gamma, StationaryState):
            st = gamma
        else:
            st = state_from_matrix(gamma)
        st.require_full_rank()
        rho_i = hermitize(as_matrix(rho_i, channel.dim))
        rho_f = hermitize(apply(channel, rho_i))
        return cls(channel, st, rho_i, hermitian_eig(rho_i), rho_f, hermitian_eig(rho_f))

    def require_full_rank(self) -> None:
        self.gamma.require_full_rank()
        floor = tolerances.current().rank
        for name, sd in (("initial", self.spec_i), ("final", self.spec_f)):
            if sd.eigenvalues.min() <= floor:
                raise RankDeficientState(f"{name} state has eigenvalue {sd.eigenvalues.min():.3e}")

    @property
    def degenerate(self) -> bool:
        return self.spec_i.degenerate or self.spec_f.degenerate


@dataclass(frozen=True)
class TransitionRecord:
    indices: tuple  # (mu, nu, i, j, k, l)
    amplitude: complex
    omega: complex
    weight: complex


def _sandwiches(spec: SpectralDecomposition, gamma: StationaryState) -> np.ndarray:
    """``O[mu, i, j] = Pi_i Phi_mu Pi_j`` stacked as an array of matrices."""
    d = spec.dim
    out = np.empty((d, d, d, d, d), dtype=np.complex128)
    for mu, phi in enumerate(spec.projectors):
        for i, pi_i in enumerate(gamma.projectors):
            for j, pi_j in enumerate(gamma.projectors):
                out[mu, i, j] = pi_i @ phi @ pi_j
    return out


def _amplitude_tensor(channel: KrausChannel, o_in: np.ndarray, o_out: np.ndarray) -> np.ndarray:
    """``A[a, b, i, j, k, l] = Tr[channel(o_in[a, i, j]) o_out[b, k, l]]``."""
    d = channel.dim
    mapped = np.empty_like(o_in)
    for a, i, j in np.ndindex(d, d, d):
        mapped[a, i, j] = apply(channel, o_in[a, i, j])
    return np.einsum("aijxy,bklyx->abijkl", mapped, o_out)


def _omega_tensor(ctx: ProcessContext) -> np.ndarray:
    """``W[mu, nu, i, j, k, l]``, the complex entropy production of each transition."""
    lp_i = np.log(ctx.spec_i.eigenvalues)
    lp_f = np.log(ctx.spec_f.eigenvalues)
    lr = np.log(ctx.gamma.populations)
    real = (
        lp_i[:, None, None, None, None, None]
        - lp_f[None, :, None, None, None, None]
        + 0.5 * (lr[None, None, None, None, :, None] + lr[None, None, None, None, None, :])
        - 0.5 * (lr[None, None, :, None, None, None] + lr[None, None, None, :, None, None])
    )
    imag = 0.5 * (
        lr[None, None, None, :, None, None]
        + lr[None, None, None, None, None, :]
        - lr[None, None, :, None, None, None]
        - lr[None, None, None, None, :, None]
    )
    return real + 1j * imag


def entropy_production(indices, ctx: ProcessContext) -> complex:
    """Complex entropy production of the transition ``mu -> nu, |i><j| -> |k><l|``."""
    mu, nu, i, j, k, l = indices
    ctx.require_full_rank()
    p_i = ctx.spec_i.eigenvalues[mu]
    p_f = ctx.spec_f.eigenvalues[nu]
    r = ctx.gamma.populations
    real = np.log(p_i) - np.log(p_f) + 0.5 * (np.log(r[k]) + np.log(r[l]) - np.log(r[i]) - np.log(r[j]))
    imag = 0.5 * (np.log(r[j]) + np.log(r[l]) - np.log(r[i]) - np.log(r[k]))
    return complex(real, imag)


def amplitude_tensor(ctx: ProcessContext) -> np.ndarray:
    """Forward amplitudes ``T[mu, nu, i, j, k, l]``."""
    return _amplitude_tensor(ctx.channel, _sandwiches(ctx.spec_i, ctx.gamma), _sandwiches(ctx.spec_f, ctx.gamma))


def transition_amplitudes(ctx: ProcessContext) -> list:
    ctx.require_full_rank()
    T = amplitude_tensor(ctx)
    W = _omega_tensor(ctx)
    p = ctx.spec_i.eigenvalues
    return [
        TransitionRecord(tuple(int(x) for x in idx), complex(T[idx]), complex(W[idx]), complex(p[idx[0]] * T[idx]))
        for idx in np.ndindex(T.shape)
    ]


@dataclass(frozen=True)
class QuasiProbDistribution:
    """Atoms ``(omega, q)`` sorted by ``(Re omega, Im omega)``."""

    omegas: np.ndarray
    q: np.ndarray
    direction: str = "forward"
    theta: float | None = None
    cluster_tol: float = 1e-9
    sizes: np.ndarray = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.omegas)

    @property
    def total(self) -> complex:
        return complex(self.q.sum())

    @property
    def negligible(self) -> np.ndarray:
        return np.abs(self.q) < tolerances.current().negligible

    def significant(self) -> "QuasiProbDistribution":
        keep = ~self.negligible
        return QuasiProbDistribution(
            self.omegas[keep], self.q[keep], self.direction, self.theta, self.cluster_tol,
            None if self.sizes is None else self.sizes[keep],
        )

    def find(self, omega: complex) -> int | None:
        if not len(self.omegas):
            return None
        dist = np.maximum(np.abs(self.omegas.real - omega.real), np.abs(self.omegas.imag - omega.imag))
        k = int(np.argmin(dist))
        return k if dist[k] <= self.cluster_tol else None

    def at(self, omega: complex) -> complex:
        k = self.find(omega)
        return 0j if k is None else complex(self.q[k])

    def records(self) -> list:
        return [
            {"omega_re": float(w.real), "omega_im": float(w.imag), "q_re": float(v.real), "q_im": float(v.imag)}
            for w, v in zip(self.omegas, self.q)
        ]


def cluster_atoms(omegas, weights, tol: float | None = None, direction="forward", theta=None) -> QuasiProbDistribution:
    """Realize the delta functions: greedily merge values within ``tol`` (max-norm)
    of a cluster's first member, in input order, and sum weights per cluster."""
    tol = tolerances.current().cluster if tol is None else tol
    reps: list = []
    sums: list = []
    counts: list = []
    for w, q in zip(np.ravel(omegas), np.ravel(weights)):
        for c, r in enumerate(reps):
            if abs(w.real - r.real) <= tol and abs(w.imag - r.imag) <= tol:
                sums[c] += q
                counts[c] += 1
                break
        else:
            reps.append(complex(w))
            sums.append(complex(q))
            counts.append(1)
    reps_a = np.array(reps, dtype=np.complex128)
    order = np.lexsort((reps_a.imag, reps_a.real))
    return QuasiProbDistribution(
        reps_a[order], np.array(sums, dtype=np.complex128)[order], direction, theta, tol,
        np.array(counts)[order],
    )


def forward_distribution(ctx: ProcessContext) -> QuasiProbDistribution:
    ctx.require_full_rank()
    T = amplitude_tensor(ctx)
    weights = ctx.spec_i.eigenvalues[:, None, None, None, None, None] * T
    return cluster_atoms(_omega_tensor(ctx), weights, direction="forward")


def reverse_amplitude_tensor(ctx: ProcessContext, theta: float) -> np.ndarray:
    """``Tr[N^theta(Pi_k Phi^F_nu Pi_l) Pi_i Phi^I_mu Pi_j]`` reindexed as ``[mu, nu, i, j, k, l]``."""
    rev = rotated_reverse(ctx.channel, ctx.gamma, theta)
    A = _amplitude_tensor(rev, _sandwiches(ctx.spec_f, ctx.gamma), _sandwiches(ctx.spec_i, ctx.gamma))
    # A is [nu, mu, k, l, i, j]
    return A.transpose(1, 0, 4, 5, 2, 3)


def reverse_omegas(ctx: ProcessContext) -> np.ndarray:
    """Entropy production of each reversed transition ``nu -> mu, |k><l| -> |i><j|``.

    Evaluating the forward formula on the reversed indices flips the real part
    and keeps the imaginary part, i.e. gives ``-conj(omega)``.
    """
    return -np.conj(_omega_tensor(ctx))


def reverse_distribution(ctx: ProcessContext, theta: float) -> QuasiProbDistribution:
    ctx.require_full_rank()
    T_rev = reverse_amplitude_tensor(ctx, theta)
    weights = ctx.spec_f.eigenvalues[None, :, None, None, None, None] * T_rev
    return cluster_atoms(reverse_omegas(ctx), weights, direction="reverse", theta=float(theta))


def _wrap(phase):
    """Map angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(phase), 2 * np.pi)


def _slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.size < 2 or np.ptp(x) < 1e-9:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class CrooksReport:
    theta: float
    omegas: np.ndarray
    ratios: np.ndarray
    log_residuals: np.ndarray
    phase_residuals: np.ndarray
    unmatched: list

    @property
    def max_log_residual(self) -> float:
        return float(np.max(np.abs(self.log_residuals))) if self.log_residuals.size else 0.0

    @property
    def max_phase_residual(self) -> float:
        return float(np.max(np.abs(self.phase_residuals))) if self.phase_residuals.size else 0.0

    @property
    def log_slope(self) -> float:
        """Slope of ``ln|ratio|`` against ``omega_R``; theory is 1."""
        return _slope(self.omegas.real, np.log(np.abs(self.ratios)))

    @property
    def phase_slope(self) -> float:
        """Slope of ``arg(ratio)`` against ``omega_I``; theory is ``-2 theta``."""
        return _slope(self.omegas.imag, np.angle(self.ratios))

    def passed(self, tol: float | None = None) -> bool:
        tol = tolerances.current().crooks if tol is None else tol
        return not self.unmatched and self.max_log_residual < tol and self.max_phase_residual < tol


def crooks_check(fwd: QuasiProbDistribution, rev: QuasiProbDistribution, theta: float, exact: bool = True) -> CrooksReport:
    """Pair each forward atom at ``omega`` with the reverse atom at ``-conj(omega)``
    and measure ``ln|ratio| - omega_R`` and ``arg(ratio) + 2 theta omega_I``.

    Raises:
        UnmatchedAtom: in exact mode, when a non-negligible atom on either side
            has no non-negligible partner.
    """
    floor = tolerances.current().negligible
    omegas, ratios, unmatched = [], [], []
    for w, qf in zip(fwd.omegas, fwd.q):
        if abs(qf) <= floor:
            continue
        qr = rev.at(complex(-w.real, w.imag))
        if abs(qr) <= floor:
            unmatched.append(("forward", complex(w)))
            continue
        omegas.append(complex(w))
        ratios.append(qf / qr)
    for w, qr in zip(rev.omegas, rev.q):
        if abs(qr) > floor and abs(fwd.at(complex(-w.real, w.imag))) <= floor:
            unmatched.append(("reverse", complex(w)))
    if exact and unmatched:
        raise UnmatchedAtom(f"{len(unmatched)} unmatched atoms, first: {unmatched[0]}")
    omegas = np.array(omegas, dtype=np.complex128)
    ratios = np.array(ratios, dtype=np.complex128)
    log_res = np.log(np.abs(ratios)) - omegas.real
    phase_res = _wrap(np.angle(ratios) + 2 * theta * omegas.imag)
    return CrooksReport(float(theta), omegas, ratios, log_res, phase_res, unmatched)


def integral_ft(fwd: QuasiProbDistribution, theta: float) -> complex:
    return complex(np.sum(fwd.q * np.exp(-fwd.omegas.real + 2j * theta * fwd.omegas.imag)))


def average_entropy_production(fwd: QuasiProbDistribution) -> complex:
    return complex(np.sum(fwd.q * fwd.omegas))


def von_neumann_entropy(rho) -> float:
    p = hermitian_eig(hermitize(as_matrix(rho))).eigenvalues
    p = p[p > tolerances.current().rank]
    return float(-np.sum(p * np.log(p)))


def relative_entropy(rho, gamma) -> float:
    """``Tr[rho (ln rho - ln gamma)]`` with the ``0 ln 0 = 0`` convention for rho."""
    st = gamma if isinstance(gamma, StationaryState) else state_from_matrix(gamma)
    st.require_full_rank()
    rho = hermitize(as_matrix(rho))
    cross = float(np.trace(rho @ log_hermitian(st.gamma, st.spectral)).real)
    return -von_neumann_entropy(rho) - cross


def marginalize_real(dist: QuasiProbDistribution) -> QuasiProbDistribution:
    """Sum atoms sharing ``omega_R`` over all ``omega_I``; the sums must be real."""
    tol = dist.cluster_tol
    merged = cluster_atoms(dist.omegas.real + 0j, dist.q, tol, dist.direction, dist.theta)
    worst = float(np.max(np.abs(merged.q.imag))) if len(merged) else 0.0
    if worst > tolerances.current().nonreal_marginal:
        raise NonRealMarginal(f"marginal has imaginary part {worst:.3e}")
    return QuasiProbDistribution(
        merged.omegas.real + 0j, merged.q.real + 0j, dist.direction, dist.theta, tol, merged.sizes
    )


def real_marginal_crooks_residual(fwd_marginal: QuasiProbDistribution, rev_marginal: QuasiProbDistribution) -> float:
    """Max over significant atoms of ``|Pbar_fwd(w) - e^w Pbar_rev(-w)|``.

    Written multiplicatively so that negative atoms are compared directly.
    """
    floor = tolerances.current().negligible
    worst = 0.0
    for w, q in zip(fwd_marginal.omegas.real, fwd_marginal.q.real):
        if abs(q) <= floor:
            continue
        qr = rev_marginal.at(complex(-w, 0.0)).real
        worst = max(worst, abs(q - np.exp(w) * qr) / abs(q))
    return worst


def marginal_identity_residuals(ctx: ProcessContext) -> tuple:
    """Deviation of the two amplitude marginals from proper transition probabilities.

    Returns ``(entropy_change_residual, information_exchange_residual)``:
    ``sum_{ijkl} T = Tr[N(Phi_mu) Phi_nu]`` and ``sum_{mu nu j l} T = Tr[N(Pi_i) Pi_k]``.
    """
    T = amplitude_tensor(ctx)
    direct_mn = np.array(
        [[np.trace(apply(ctx.channel, a) @ b) for b in ctx.spec_f.projectors] for a in ctx.spec_i.projectors]
    )
    direct_ik = np.array(
        [[np.trace(apply(ctx.channel, a) @ b) for b in ctx.gamma.projectors] for a in ctx.gamma.projectors]
    )
    r1 = np.max(np.abs(T.sum(axis=(2, 3, 4, 5)) - direct_mn))
    r2 = np.max(np.abs(np.einsum("mnijkl->ik", T) - direct_ik))
    return float(r1), float(r2)


def total_deviation(a: QuasiProbDistribution, b: QuasiProbDistribution) -> float:
    """``sum_omega |q_a(omega) - q_b(omega)|`` over the union of both atom sets."""
    dev = sum(abs(q - b.at(complex(w))) for w, q in zip(a.omegas, a.q))
    dev += sum(abs(q) for w, q in zip(b.omegas, b.q) if a.find(complex(w)) is None)
    return float(dev)
