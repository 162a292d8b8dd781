"""Exact numbers for the two photonic channels: stationary state, channel class,
atoms with imaginary entropy production, averages and Crooks slopes.

    python3 scripts/photonic_scenario.py
"""
import numpy as np

from qfluct.channels import build_covariant, build_incovariant, check_covariance
from qfluct.fluctuation import (
    PHOTONIC_P,
    PHOTONIC_S,
    ProcessContext,
    average_entropy_production,
    crooks_check,
    forward_distribution,
    integral_ft,
    photonic_initial_state,
    relative_entropy,
    reverse_distribution,
)
from qfluct.reversal import ReversalFamily

THETAS = (0.0, -np.pi / 8, -np.pi / 4)


def describe(name, ch):
    ctx = ProcessContext.build(ch, photonic_initial_state())
    verdict = check_covariance(ch, ctx.gamma)
    fwd = forward_distribution(ctx)
    sig = fwd.significant()
    avg = average_entropy_production(fwd)
    drop = relative_entropy(ctx.rho_i, ctx.gamma) - relative_entropy(ctx.rho_f, ctx.gamma)
    print(f"== {name}")
    print(f"gamma populations   {np.round(ctx.gamma.populations, 4)}")
    print(f"class               {verdict.kind.value}  witness={verdict.witness}")
    print(f"atoms (significant) {len(sig)}  max|omega_I| = {np.max(np.abs(sig.omegas.imag)):.5f}")
    print(f"<omega>             {avg.real:.4f}{avg.imag:+.1e}j   relative entropy drop {drop:.4f}")
    grid = np.linspace(-np.pi, np.pi, 101)
    print(f"integral FT         max residual {max(abs(integral_ft(fwd, t) - 1) for t in grid):.2e}")
    family = ReversalFamily(ch, ctx.gamma)
    for theta in THETAS:
        rep = crooks_check(fwd, reverse_distribution(ctx, theta), theta)
        print(f"theta={theta:+.4f}  log slope {rep.log_slope:.6f}  phase slope {rep.phase_slope:+.6f}"
              f"  (expected {-2 * theta:+.6f})  |N~ - N| = {family.distance_to_forward(theta):.4f}")
    print()


def main():
    describe("incovariant", build_incovariant(PHOTONIC_P, PHOTONIC_S))
    describe("covariant", build_covariant(PHOTONIC_P, PHOTONIC_S))


if __name__ == "__main__":
    main()
