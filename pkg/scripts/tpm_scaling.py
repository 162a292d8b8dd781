"""Finite-shot two-point measurement: mean total deviation versus shot count.

Also reports the deviation restricted to atoms with nonzero exact weight, which
separates reconstruction noise on empty atoms from noise on the support.

    python3 scripts/tpm_scaling.py --seeds 20 --shots 10000 100000 1000000
"""
import argparse
from dataclasses import dataclass

import numpy as np

from qfluct.channels import build_covariant, build_incovariant
from qfluct.fluctuation import PHOTONIC_P, PHOTONIC_S, ProcessContext, photonic_initial_state, total_deviation
from qfluct.tpm import build_protocol, joint_distribution, reconstruct, sample


@dataclass
class ScalingRun:
    shots: tuple = (10**4, 10**5, 10**6)
    seeds: int = 20
    p: float = PHOTONIC_P
    s: float = PHOTONIC_S


def support_deviation(est, exact, floor=1e-12):
    return float(sum(abs(est.at(complex(w)) - q) for w, q in zip(exact.omegas, exact.q) if abs(q) > floor))


def run(cfg: ScalingRun):
    for name, ch in (("incovariant", build_incovariant(cfg.p, cfg.s)), ("covariant", build_covariant(cfg.p, cfg.s))):
        ctx = ProcessContext.build(ch, photonic_initial_state())
        joint = joint_distribution(build_protocol(ctx), ctx)
        exact = reconstruct(joint, ctx)
        print(f"== {name}")
        print("shots,mean_total_deviation,std,mean_support_deviation")
        means = []
        for shots in cfg.shots:
            ests = [reconstruct(sample(joint, shots, seed), ctx) for seed in range(cfg.seeds)]
            dev = np.array([total_deviation(e, exact) for e in ests])
            sup = np.mean([support_deviation(e, exact) for e in ests])
            means.append(dev.mean())
            print(f"{shots},{dev.mean():.5f},{dev.std():.5f},{sup:.5f}")
        if len(means) > 1:
            ratio = means[0] / means[-1]
            print(f"ratio {cfg.shots[0]}/{cfg.shots[-1]}: {ratio:.2f} (shot noise predicts {np.sqrt(cfg.shots[-1] / cfg.shots[0]):.2f})")
        print()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, nargs="+", default=list(ScalingRun.shots))
    ap.add_argument("--seeds", type=int, default=ScalingRun.seeds)
    args = ap.parse_args()
    run(ScalingRun(tuple(args.shots), args.seeds))


if __name__ == "__main__":
    main()
