"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 mathematical failure
(a verifier residual above tolerance or a pathological channel).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, tolerances
from .channels import stationary_state, superoperator_distance
from .config import ExperimentConfig
from .errors import ConfigError, NonRealMarginal, QFluctError
from .fluctuation import (
    average_entropy_production,
    crooks_check,
    forward_distribution,
    integral_ft,
    marginal_identity_residuals,
    marginalize_real,
    real_marginal_crooks_residual,
    relative_entropy,
    reverse_distribution,
    total_deviation,
)
from .reversal import rotated_reverse
from .tpm import build_protocol, joint_distribution, reconstruct, sample

EXIT_OK, EXIT_USAGE, EXIT_MATH = 0, 1, 2
DEFAULT_CROOKS_THETAS = (0.0, -np.pi / 8, -np.pi / 4)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


class Emitter:
    """Writes CSV/JSON files stamped with the tool version and config hash."""

    def __init__(self, cfg: ExperimentConfig, out: str | None):
        self.cfg = cfg
        self.out = Path(out) if out else None
        self.stamp = f"qfluct {__version__} config_sha256={cfg.sha256}"

    def meta(self) -> dict:
        return {"tool": "qfluct", "version": __version__, "config_sha256": self.cfg.sha256}

    def csv(self, name: str, header: list, rows) -> None:
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        lines = [f"# {self.stamp}", ",".join(header)]
        for row in rows:
            lines.append(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v)) for v in row))
        with open(self.out / name, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def report(self, name: str, doc: dict) -> str:
        doc = {"_meta": self.meta(), **doc}
        text = json.dumps(_jsonable(doc), indent=2, sort_keys=True)
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)
            with open(self.out / name, "w", newline="\n") as fh:
                fh.write(text + "\n")
        return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if np.isnan(obj) else float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _atom_rows(dist):
    return [(w.real, w.imag, q.real, q.imag) for w, q in zip(dist.omegas, dist.q)]


ATOM_HEADER = ["omega_re", "omega_im", "q_re", "q_im"]


def cmd_stationary(cfg, args, em) -> int:
    ch = cfg.channel()
    st = stationary_state(ch)
    doc = {
        "channel": ch.label,
        "gamma": [[complex(v) for v in row] for row in st.gamma],
        "populations": list(st.populations),
        "full_rank": st.full_rank,
    }
    print(em.report("stationary.json", doc))
    return EXIT_OK


def cmd_distribution(cfg, args, em) -> int:
    ctx = cfg.context()
    if args.direction == "forward":
        dist = forward_distribution(ctx)
        stem = "forward"
    else:
        theta = 0.0 if args.theta is None else args.theta
        dist = reverse_distribution(ctx, theta)
        stem = f"reverse_theta{fmt(theta)}"
    sig = dist.significant()
    em.csv(f"distribution_{stem}.csv", ATOM_HEADER, _atom_rows(sig))
    doc = {"direction": dist.direction, "theta": dist.theta, "atoms": sig.records(), "degenerate_spectrum": ctx.degenerate}
    try:
        marg = marginalize_real(dist).significant()
        em.csv(f"marginal_{stem}.csv", ["omega_re", "q"], [(w.real, q.real) for w, q in zip(marg.omegas, marg.q)])
        doc["real_marginal"] = [{"omega_re": float(w.real), "q": float(q.real)} for w, q in zip(marg.omegas, marg.q)]
    except NonRealMarginal as exc:
        doc["real_marginal"] = None
        doc["real_marginal_error"] = str(exc)
    print(em.report(f"distribution_{stem}.json", doc))
    return EXIT_OK


def _verify_crooks(cfg, args, ctx, fwd):
    tol = tolerances.current().crooks
    thetas = DEFAULT_CROOKS_THETAS if args.theta is None else (args.theta,)
    out = []
    for theta in thetas:
        rep = crooks_check(fwd, reverse_distribution(ctx, theta), theta, exact=False)
        ok = rep.passed(tol) and abs(rep.log_slope - 1) < tol
        if not np.isnan(rep.phase_slope):
            ok = ok and abs(rep.phase_slope + 2 * theta) < tol
        out.append({
            "theta": theta,
            "max_log_residual": rep.max_log_residual,
            "max_phase_residual": rep.max_phase_residual,
            "log_slope": rep.log_slope,
            "phase_slope": rep.phase_slope,
            "expected_phase_slope": -2 * theta,
            "unmatched": len(rep.unmatched),
            "passed": ok,
        })
    return all(r["passed"] for r in out), {"points": out}


def _verify_integral(cfg, args, ctx, fwd):
    thetas = cfg.thetas() if args.theta is None else np.array([args.theta])
    res = np.array([abs(integral_ft(fwd, t) - 1) for t in thetas])
    worst = float(res.max())
    return worst < tolerances.current().integral, {"n_theta": len(thetas), "max_residual": worst}


def _verify_secondlaw(cfg, args, ctx, fwd):
    tol = tolerances.current()
    avg = average_entropy_production(fwd)
    drop = relative_entropy(ctx.rho_i, ctx.gamma) - relative_entropy(ctx.rho_f, ctx.gamma)
    ok = avg.real >= -tol.integral and abs(avg.imag) < tol.integral and abs(avg - drop) < tol.normalization
    return ok, {"average": avg, "relative_entropy_drop": drop, "residual": abs(avg - drop)}


def _verify_marginals(cfg, args, ctx, fwd):
    tol = tolerances.current()
    r1, r2 = marginal_identity_residuals(ctx)
    doc = {"entropy_change_residual": r1, "information_exchange_residual": r2}
    ok = r1 < tol.marginal and r2 < tol.marginal
    try:
        res = real_marginal_crooks_residual(marginalize_real(fwd), marginalize_real(reverse_distribution(ctx, 0.0)))
        doc["real_marginal_crooks_residual"] = res
        ok = ok and res < tol.crooks
    except NonRealMarginal as exc:
        doc["real_marginal_error"] = str(exc)
        ok = False
    return ok, doc


def _verify_tpm(cfg, args, ctx, fwd):
    tol = tolerances.current()
    shots = args.shots if args.shots is not None else (cfg.shots or 0)
    seed = args.seed if args.seed is not None else cfg.seed
    theta = 0.0 if args.theta is None else args.theta
    joint_f = joint_distribution(build_protocol(ctx), ctx)
    joint_r = joint_distribution(build_protocol(ctx, "reverse", theta), ctx)
    rev = reverse_distribution(ctx, theta)
    if shots == 0:
        res_f = float(np.max(np.abs(reconstruct(joint_f, ctx).q - fwd.q)))
        res_r = float(np.max(np.abs(reconstruct(joint_r, ctx).q - rev.q)))
        ok = res_f < tol.tpm_exact and res_r < tol.tpm_exact
        return ok, {"mode": "exact", "theta": theta, "forward_residual": res_f, "reverse_residual": res_r}
    dev_f = total_deviation(reconstruct(sample(joint_f, shots, seed), ctx), fwd)
    dev_r = total_deviation(reconstruct(sample(joint_r, shots, seed + 1), ctx), rev)
    ok = dev_f < tol.sampled_deviation and dev_r < tol.sampled_deviation
    return ok, {"mode": "sampled", "shots": shots, "seed": seed, "theta": theta,
                "forward_total_deviation": dev_f, "reverse_total_deviation": dev_r}


VERIFIERS = {
    "crooks": _verify_crooks,
    "integral": _verify_integral,
    "secondlaw": _verify_secondlaw,
    "marginals": _verify_marginals,
    "tpm": _verify_tpm,
}


def cmd_verify(cfg, args, em) -> int:
    ctx = cfg.context()
    fwd = forward_distribution(ctx)
    names = list(VERIFIERS) if args.which == "all" else [args.which]
    results = {}
    for name in names:
        ok, doc = VERIFIERS[name](cfg, args, ctx, fwd)
        results[name] = {"passed": ok, **doc}
    passed = all(r["passed"] for r in results.values())
    print(em.report(f"verify_{args.which}.json", {"passed": passed, "results": results}))
    return EXIT_OK if passed else EXIT_MATH


def cmd_sweep_theta(cfg, args, em) -> int:
    ctx = cfg.context()
    fwd = forward_distribution(ctx)
    rows = []
    for theta in cfg.thetas():
        val = integral_ft(fwd, theta)
        dist = superoperator_distance(rotated_reverse(ctx.channel, ctx.gamma, theta), ctx.channel)
        rows.append((theta, val.real, val.imag, dist))
    em.csv("sweep_theta.csv", ["theta", "re_integral", "im_integral", "reversal_distance"], rows)
    worst = max(abs(complex(r[1], r[2]) - 1) for r in rows)
    doc = {
        "max_integral_residual": worst,
        "rows": [dict(zip(["theta", "re_integral", "im_integral", "reversal_distance"], r)) for r in rows],
    }
    print(em.report("sweep_theta.json", doc))
    return EXIT_OK if worst < tolerances.current().integral else EXIT_MATH


def cmd_sample_tpm(cfg, args, em) -> int:
    ctx = cfg.context()
    shots = args.shots if args.shots is not None else (cfg.shots or 10**6)
    seed = args.seed if args.seed is not None else cfg.seed
    theta = 0.0 if args.theta is None else args.theta
    proto = build_protocol(ctx, args.direction, theta)
    exact = joint_distribution(proto, ctx)
    exact_dist = reconstruct(exact, ctx)
    header = ["m", "mprime", "p"]
    em.csv(f"joint_{args.direction}_exact.csv", header,
           [(m, mp, exact.probs[m, mp]) for m in range(8) for mp in range(8)])
    doc = {"direction": args.direction, "theta": theta, "shots": shots, "seed": seed}
    if shots > 0:
        drawn = sample(exact, shots, seed)
        em.csv(f"joint_{args.direction}_sampled.csv", header,
               [(m, mp, drawn.probs[m, mp]) for m in range(8) for mp in range(8)])
        est = reconstruct(drawn, ctx)
        em.csv(f"reconstructed_{args.direction}.csv", ATOM_HEADER, _atom_rows(est))
        doc["total_deviation"] = total_deviation(est, exact_dist)
        doc["atoms"] = est.records()
    else:
        doc["atoms"] = exact_dist.significant().records()
    print(em.report(f"sample_tpm_{args.direction}.json", doc))
    return EXIT_OK


COMMANDS = {
    "stationary": cmd_stationary,
    "distribution": cmd_distribution,
    "verify": cmd_verify,
    "sweep-theta": cmd_sweep_theta,
    "sample-tpm": cmd_sample_tpm,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--theta", type=float, help="rotation angle of the reverse channel")
    common.add_argument("--shots", type=int, help="number of sampled events (0 = exact)")
    common.add_argument("--seed", type=int, help="sampler seed")
    common.add_argument("--out", help="directory for CSV/JSON outputs")

    parser = argparse.ArgumentParser(prog="qfluct", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qfluct {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("stationary", parents=[common], help="stationary state of the channel")
    p = sub.add_parser("distribution", parents=[common], help="quasi-probability distribution")
    p.add_argument("--direction", choices=["forward", "reverse"], default="forward")
    p = sub.add_parser("verify", parents=[common], help="run fluctuation-theorem verifiers")
    p.add_argument("which", choices=[*VERIFIERS, "all"])
    sub.add_parser("sweep-theta", parents=[common], help="integral theorem and reversal distance over theta")
    p = sub.add_parser("sample-tpm", parents=[common], help="finite-shot two-point measurement")
    p.add_argument("--direction", choices=["forward", "reverse"], default="forward")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = ExperimentConfig.load(args.config)
        overrides = cfg.tolerances
        with tolerances.override(**overrides):
            em = Emitter(cfg, args.out or cfg.output_dir)
            return COMMANDS[args.command](cfg, args, em)
    except (ConfigError, KeyError) as exc:
        print(f"qfluct: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QFluctError as exc:
        print(f"qfluct: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH
