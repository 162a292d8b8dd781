"""Stress the identities on random channels and states: normalization, Crooks,
integral theorem, second law and marginal identities. Prints worst residuals.

    python3 scripts/random_contexts.py --n 500 --dim 3
"""
import argparse

import numpy as np

from qfluct.channels import random_channel
from qfluct.fluctuation import (
    ProcessContext,
    average_entropy_production,
    crooks_check,
    forward_distribution,
    integral_ft,
    marginal_identity_residuals,
    reverse_distribution,
)
from qfluct.matcore import random_density_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    grid = np.linspace(-np.pi, np.pi, 25)
    worst = dict(norm=0.0, crooks=0.0, integral=0.0, second_law=0.0, marginal=0.0)
    for _ in range(args.n):
        ch = random_channel(args.dim, int(rng.integers(2, 5)), rng)
        ctx = ProcessContext.build(ch, random_density_matrix(args.dim, rng, min_eig=0.01))
        fwd = forward_distribution(ctx)
        worst["norm"] = max(worst["norm"], abs(fwd.total - 1))
        theta = float(rng.uniform(-np.pi, np.pi))
        rep = crooks_check(fwd, reverse_distribution(ctx, theta), theta)
        worst["crooks"] = max(worst["crooks"], rep.max_log_residual, rep.max_phase_residual)
        worst["integral"] = max(worst["integral"], max(abs(integral_ft(fwd, t) - 1) for t in grid))
        avg = average_entropy_production(fwd)
        worst["second_law"] = max(worst["second_law"], max(0.0, -avg.real), abs(avg.imag))
        worst["marginal"] = max(worst["marginal"], *marginal_identity_residuals(ctx))
    for k, v in worst.items():
        print(f"{k:<11} {v:.2e}")


if __name__ == "__main__":
    main()
