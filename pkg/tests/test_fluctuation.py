import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import logm

from qfluct.channels import KrausChannel, apply, identity_channel, random_channel
from qfluct.errors import NonRealMarginal, RankDeficientState, UnmatchedAtom
from qfluct.fluctuation import (
    PHOTONIC_S,
    ProcessContext,
    QuasiProbDistribution,
    amplitude_tensor,
    average_entropy_production,
    crooks_check,
    entropy_production,
    forward_distribution,
    integral_ft,
    marginal_identity_residuals,
    marginalize_real,
    photonic_initial_state,
    real_marginal_crooks_residual,
    relative_entropy,
    reverse_distribution,
    transition_amplitudes,
    von_neumann_entropy,
)
from qfluct.matcore import random_density_matrix

seeds = st.integers(min_value=0, max_value=2**32 - 1)
OMEGA_I = np.log((1 + PHOTONIC_S) / (1 - PHOTONIC_S))
CROOKS_THETAS = (0.0, -np.pi / 8, -np.pi / 4, 0.37, 2.1)


def random_context(seed, dim=2, n_kraus=3):
    rng = np.random.default_rng(seed)
    return ProcessContext.build(random_channel(dim, n_kraus, rng), random_density_matrix(dim, rng, min_eig=0.02))


def identity_context():
    return ProcessContext.build(identity_channel(2), np.diag([0.8, 0.2]), np.diag([0.6, 0.4]))


def test_identity_amplitudes_index_matched():
    T = amplitude_tensor(identity_context())
    for idx in np.ndindex(T.shape):
        mu, nu, i, j, k, l = idx
        if not (mu == nu and i == k and j == l):
            assert abs(T[idx]) < 1e-14


def test_coherence_transfer_tuples_carry_weight(incov_ctx):
    recs = [r for r in transition_amplitudes(incov_ctx) if r.indices[2:] == (0, 1, 1, 0)]
    assert len(recs) == 4
    assert max(abs(r.weight) for r in recs) > 1e-3


def test_photonic_context_has_64_records(incov_ctx):
    recs = transition_amplitudes(incov_ctx)
    assert len(recs) == 64
    for r in recs:
        assert abs(r.omega - entropy_production(r.indices, incov_ctx)) < 1e-12
        assert abs(r.weight - incov_ctx.spec_i.eigenvalues[r.indices[0]] * r.amplitude) < 1e-15


def test_entropy_production_zero_for_trivial_transition():
    ctx = identity_context()
    assert entropy_production((0, 0, 1, 1, 1, 1), ctx) == 0


def test_coherence_transfer_imaginary_entropy(incov_ctx):
    w1 = entropy_production((0, 0, 0, 1, 0, 1), incov_ctx)
    w2 = entropy_production((0, 0, 1, 0, 1, 0), incov_ctx)
    assert abs(w1.imag - OMEGA_I) < 5e-5 or abs(w1.imag + OMEGA_I) < 5e-5
    assert w1.imag == pytest.approx(-w2.imag, abs=1e-14)
    assert abs(abs(w1.imag) - 0.2647) < 5e-5


def test_entropy_production_against_scalar_script(incov_ctx):
    # independent evaluation straight from populations
    c = incov_ctx
    pI, pF, r = c.spec_i.eigenvalues, c.spec_f.eigenvalues, c.gamma.populations
    for mu, nu, i, j, k, l in np.ndindex(2, 2, 2, 2, 2, 2):
        re = np.log(pI[mu] * np.sqrt(r[k] * r[l]) / (pF[nu] * np.sqrt(r[i] * r[j])))
        im = np.log(np.sqrt(r[j] * r[l]) / np.sqrt(r[i] * r[k]))
        assert abs(entropy_production((mu, nu, i, j, k, l), c) - complex(re, im)) < 1e-12


def test_rank_deficient_state_rejected(incov):
    with pytest.raises(RankDeficientState):
        ProcessContext.build(incov, np.diag([1.0, 0.0]).astype(complex))
        transition_amplitudes(ProcessContext.build(incov, np.diag([1.0, 0.0])))
    ctx = ProcessContext.build(identity_channel(2), np.diag([1.0, 0.0]), np.diag([0.6, 0.4]))
    with pytest.raises(RankDeficientState):
        forward_distribution(ctx)


def test_covariant_distribution_is_real(cov_ctx):
    d = forward_distribution(cov_ctx).significant()
    assert np.max(np.abs(d.q.imag)) < 1e-12
    assert np.max(np.abs(d.omegas.imag)) < 1e-10
    assert abs(d.total - 1) < 1e-9


def test_incovariant_distribution_has_imaginary_atoms(incov_ctx):
    d = forward_distribution(incov_ctx).significant()
    for sign in (1, -1):
        hits = [q for w, q in zip(d.omegas, d.q) if abs(w.imag - sign * OMEGA_I) < 5e-5]
        assert hits and max(abs(q) for q in hits) > 1e-6


def test_identity_distribution_single_atom():
    d = forward_distribution(identity_context()).significant()
    assert len(d) == 1
    assert abs(d.omegas[0]) < 1e-12 and abs(d.q[0] - 1) < 1e-12
    r = reverse_distribution(identity_context(), 0.0).significant()
    assert len(r) == 1 and abs(r.q[0] - 1) < 1e-12


def test_clusters_are_separated(incov_ctx):
    d = forward_distribution(incov_ctx)
    for a in range(len(d)):
        for b in range(a + 1, len(d)):
            gap = max(abs(d.omegas[a].real - d.omegas[b].real), abs(d.omegas[a].imag - d.omegas[b].imag))
            assert gap > d.cluster_tol
    assert d.sizes.sum() == 64


@pytest.mark.parametrize("theta", CROOKS_THETAS)
def test_crooks_photonic_channel(incov_ctx, theta):
    fwd = forward_distribution(incov_ctx)
    rep = crooks_check(fwd, reverse_distribution(incov_ctx, theta), theta)
    assert rep.max_log_residual < 1e-9
    assert rep.max_phase_residual < 1e-9
    assert rep.log_slope == pytest.approx(1, abs=1e-9)
    if theta != 0:
        assert rep.phase_slope == pytest.approx(-2 * theta, abs=1e-9)


def test_crooks_covariant_is_classical(cov_ctx):
    fwd = forward_distribution(cov_ctx)
    for theta in (0.0, -np.pi / 4):
        rep = crooks_check(fwd, reverse_distribution(cov_ctx, theta), theta)
        assert np.all(rep.omegas.imag == 0) or np.max(np.abs(rep.omegas.imag)) < 1e-12
        # classical form P(w) / P(-w) = e^w
        assert np.max(np.abs(np.log(rep.ratios.real) - rep.omegas.real)) < 1e-9


def test_crooks_reports_unmatched():
    fwd = QuasiProbDistribution(np.array([0.5 + 0j]), np.array([1 + 0j]))
    rev = QuasiProbDistribution(np.array([0.2 + 0j]), np.array([1 + 0j]))
    with pytest.raises(UnmatchedAtom):
        crooks_check(fwd, rev, 0.0)
    rep = crooks_check(fwd, rev, 0.0, exact=False)
    assert len(rep.unmatched) == 2 and not rep.passed()


def test_integral_ft_identity():
    d = forward_distribution(identity_context())
    for theta in (0.0, 1.3):
        assert abs(integral_ft(d, theta) - 1) < 1e-12


@pytest.mark.parametrize("which", ["incov_ctx", "cov_ctx"])
def test_integral_ft_grid(which, request):
    d = forward_distribution(request.getfixturevalue(which))
    for theta in np.linspace(-np.pi, np.pi, 101):
        assert abs(integral_ft(d, theta) - 1) < 1e-10


def test_average_entropy_production_table(incov_ctx, cov_ctx):
    for ctx, expected in ((incov_ctx, 0.1182), (cov_ctx, 0.2224)):
        avg = average_entropy_production(forward_distribution(ctx))
        assert abs(avg.real - expected) < 1e-3
        drop = relative_entropy(ctx.rho_i, ctx.gamma) - relative_entropy(ctx.rho_f, ctx.gamma)
        assert abs(avg - drop) < 1e-9


def test_stationary_input_produces_nothing(incov):
    g = np.diag([0.5658, 0.4342])
    ctx = ProcessContext.build(incov, g)
    assert abs(average_entropy_production(forward_distribution(ctx))) < 1e-4


def test_relative_entropy_values():
    g = np.diag([0.5658, 0.4342])
    assert abs(relative_entropy(g, g)) < 1e-14
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(np.log(2), abs=1e-14)
    expected = 0.8 * np.log(0.8 / 0.5658) + 0.2 * np.log(0.2 / 0.4342)
    assert relative_entropy(np.diag([0.8, 0.2]), g) == pytest.approx(expected, abs=1e-14)
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_relative_entropy_against_logm(seed):
    rng = np.random.default_rng(seed)
    rho, g = random_density_matrix(3, rng, 0.01), random_density_matrix(3, rng, 0.01)
    oracle = np.trace(rho @ (logm(rho) - logm(g))).real
    assert relative_entropy(rho, g) == pytest.approx(oracle, abs=1e-9)
    assert relative_entropy(rho, g) >= -1e-12


def test_marginal_of_real_distribution_is_unchanged(cov_ctx):
    d = forward_distribution(cov_ctx).significant()
    m = marginalize_real(d)
    assert np.allclose(m.omegas, d.omegas.real) and np.allclose(m.q, d.q)


def test_incovariant_marginal_has_negative_atoms(incov_ctx):
    fwd = marginalize_real(forward_distribution(incov_ctx))
    rev = marginalize_real(reverse_distribution(incov_ctx, 0.0))
    assert fwd.q.real.min() < -1e-6
    assert real_marginal_crooks_residual(fwd, rev) < 1e-9


def test_covariant_marginal_matches_real_axis(cov_ctx):
    d = forward_distribution(cov_ctx)
    m = marginalize_real(d).significant()
    axis = d.significant()
    assert np.max(np.abs(axis.omegas.imag)) < 1e-12
    assert np.allclose(m.q.real, axis.q.real, atol=1e-12)


def test_nonreal_marginal_raises():
    d = QuasiProbDistribution(np.array([0.1 + 0.2j, 0.1 - 0.3j]), np.array([0.5 + 0.1j, 0.5 + 0.1j]))
    with pytest.raises(NonRealMarginal):
        marginalize_real(d)


def test_degenerate_initial_state_is_flagged(incov):
    assert ProcessContext.build(incov, np.eye(2) / 2).degenerate


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=st.integers(2, 3))
def test_marginal_identities(seed, dim):
    r1, r2 = marginal_identity_residuals(random_context(seed, dim))
    assert r1 < 1e-10 and r2 < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_normalization_and_crooks_random(seed):
    ctx = random_context(seed)
    fwd = forward_distribution(ctx)
    assert abs(fwd.total - 1) < 1e-9
    for theta in CROOKS_THETAS:
        rev = reverse_distribution(ctx, theta)
        assert abs(rev.total - 1) < 1e-9
        rep = crooks_check(fwd, rev, theta)
        assert rep.max_log_residual < 1e-9 and rep.max_phase_residual < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_integral_and_second_law_random(seed):
    ctx = random_context(seed)
    fwd = forward_distribution(ctx)
    assert max(abs(integral_ft(fwd, t) - 1) for t in np.linspace(-np.pi, np.pi, 101)) < 1e-10
    avg = average_entropy_production(fwd)
    assert avg.real >= -1e-10 and abs(avg.imag) < 1e-10
    drop = relative_entropy(ctx.rho_i, ctx.gamma) - relative_entropy(ctx.rho_f, ctx.gamma)
    assert abs(avg - drop) < 1e-9


def test_classical_reduction():
    P = np.array([[0.7, 0.4], [0.3, 0.6]])
    kraus = [np.sqrt(P[b, a]) * np.outer(np.eye(2)[b], np.eye(2)[a]) for a in range(2) for b in range(2)]
    ctx = ProcessContext.build(KrausChannel(tuple(kraus)), np.diag([0.9, 0.1]))
    fwd = forward_distribution(ctx).significant()
    assert np.max(np.abs(fwd.q.imag)) < 1e-12 and fwd.q.real.min() >= -1e-12
    assert np.max(np.abs(fwd.omegas.imag)) < 1e-12
    rev = reverse_distribution(ctx, 0.0)
    for w, q in zip(fwd.omegas, fwd.q):
        if abs(q) > 1e-12:
            assert q.real / rev.at(-w).real == pytest.approx(np.exp(w.real), rel=1e-9)


def test_final_state_matches_channel(incov_ctx):
    assert np.max(np.abs(incov_ctx.rho_f - apply(incov_ctx.channel, photonic_initial_state()))) < 1e-12
