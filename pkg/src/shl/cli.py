"""Command-line surface tying the pipeline together.

Exit codes (total function of verdict / error class):

    0  success; for `audit`, verdict HOMOGENEOUS
    1  `audit` verdict INHOMOGENEOUS
    2  usage, configuration, or I/O error (malformed CSV, bad flags, ...)
    3  `audit` verdict INCONCLUSIVE

Angles are degrees on the command line and radians internally.  The
``--threads`` flag (fallback: env var SHL_THREADS) only changes how work
is scheduled, never the output bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import breakdown, eberhard, io
from .errors import ShlError
from .homogeneity import (
    RunSample,
    RunSet,
    audit,
    cusum_changepoint,
    ks_two_sample,
    lag1_autocorr_test,
    runs_test,
)
from .optimize import optimize_settings
from .rng import MasterSeed, make_stream
from .stats import TestResult

AUDIT_STREAM_ID = 2**40  # keeps audit permutations off simulation streams
REJECT_K = -3.0  # H0: J >= 0 rejected when k_sigma <= REJECT_K


def _default_threads() -> int:
    return int(os.environ.get("SHL_THREADS", "1"))


def _add_threads(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=_default_threads())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shl",
        description="Sample-homogeneity test battery and Monte-Carlo lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-device", help="six-outcome breakdown device")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--items", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON overriding f/contexts/schedule")
    _add_threads(p)

    p = sub.add_parser("audit", help="homogeneity audit of a CSV dataset")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--perm", type=int, default=99)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate-eberhard", help="entangled-photon experiment")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--angles", required=True,
                   help="a1,a2,b1,b2 in degrees")
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_threads(p)

    p = sub.add_parser("significance", help="J significance from a counts CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--audit", action="store_true")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--perm", type=int, default=99)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("optimize", help="optimal settings for a given eta")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--multistart", type=int, default=20)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="SVG/TSV from a significance report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--svg", required=True)
    p.add_argument("--tsv", required=True)

    return parser


def _load_breakdown_config(args) -> breakdown.BreakdownConfig:
    base = breakdown.default_config()
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        contexts = tuple(
            breakdown.ContextSpec(c["label"], tuple(c["probs"]))
            for c in raw.get(
                "contexts",
                [{"label": c.label, "probs": list(c.probs)} for c in base.contexts],
            )
        )
        schedule = tuple(raw.get("schedule", base.schedule[: args.runs]))
        f = tuple(raw.get("f", base.f))
    else:
        contexts = base.contexts
        f = base.f
        schedule = tuple(
            base.schedule[i % len(base.schedule)] for i in range(args.runs)
        )
    return breakdown.BreakdownConfig(f, contexts, schedule, args.runs, args.items)


def _cmd_simulate_device(args) -> int:
    cfg = _load_breakdown_config(args)
    result = breakdown.run_experiment(cfg, MasterSeed(args.seed), args.threads)
    io.write_outcomes_csv(args.out, result.runset)
    print(f"{'run':>4}  {'context':>7}  {'1-B':>12}  {'k_sigma':>12}")
    for pr in result.per_run:
        label = cfg.schedule[pr.run_id - 1]
        print(f"{pr.run_id:>4}  {label:>7}  {pr.one_minus_b:>12.6f}  "
              f"{pr.k_sigma:>12.2f}")
    print(f"pooled  1-B = {result.pooled.mean:.8f}  "
          f"k_sigma = {result.pooled.k_sigma:.4f}")
    return 0


def _cmd_audit(args) -> int:
    with open(args.infile) as fh:
        header = fh.readline().rstrip("\r\n")
    if header == io.VALUES_HEADER:
        rs = io.read_values_csv(args.infile)
    else:
        rs = io.read_outcomes_csv(args.infile)
    stream = make_stream(MasterSeed(args.seed), AUDIT_STREAM_ID)
    report = audit(rs, args.alpha, stream, n_perm=args.perm)
    pooled = rs.concatenated()
    from .stats import summarize

    significance = summarize(pooled)
    document = {
        "command": "audit",
        "config": {"alpha": args.alpha, "perm": args.perm, "seed": args.seed},
        "significance": io.summary_dict(significance),
        "chebyshev_conf": None,
        "cantelli_conf": None,
        "homogeneity": io.homogeneity_dict(report),
        "verdict_text": f"audit: {report.verdict}",
    }
    io.write_report(args.out, document)
    print(document["verdict_text"])
    return {"HOMOGENEOUS": 0, "INHOMOGENEOUS": 1, "INCONCLUSIVE": 3}[report.verdict]


def _parse_angles_deg(raw: str):
    parts = [float(p) for p in raw.split(",")]
    if len(parts) != 4:
        raise ValueError("need exactly four angles a1,a2,b1,b2")
    return [math.radians(p) for p in parts]


def _cmd_simulate_eberhard(args) -> int:
    a1, a2, b1, b2 = _parse_angles_deg(args.angles)
    cfg = eberhard.EberhardConfig(
        r=args.r, alpha1=a1, alpha2=a2, beta1=b1, beta2=b2,
        eta=args.eta, pairs_per_setting=args.pairs, bins=args.bins,
    )
    counts = eberhard.simulate(cfg, MasterSeed(args.seed), args.threads)
    io.write_counts_csv(args.out, counts)
    est = eberhard.estimate(counts, cfg.bins)
    s = est.summary
    print(f"bins = {s.n}  mean J = {s.mean:.4f}  SEM = {s.sem:.4f}  "
          f"k_sigma = {s.k_sigma:.3f}")
    print(f"Chebyshev conf = {est.chebyshev_conf:.6f}  "
          f"Cantelli conf = {est.cantelli_conf:.6f}")
    return 0


def _significance_audit(per_bin_j, alpha, n_perm, stream):
    """Homogeneity battery on the per-bin J sequence: first-half vs
    second-half KS, runs test, lag-1 autocorrelation, and (when the
    sequence is long enough) the CUSUM change-point scan."""
    n = len(per_bin_j)
    half = n // 2
    jobs = [
        ("ks_halves", lambda: ks_two_sample(per_bin_j[:half], per_bin_j[half:])),
        ("runs_test", lambda: runs_test(per_bin_j)),
        ("lag1_autocorr", lambda: lag1_autocorr_test(per_bin_j)),
    ]
    skipped = []
    if n >= 50:
        jobs.append(
            ("cusum_changepoint",
             lambda: cusum_changepoint(per_bin_j, n_perm, stream))
        )
    else:
        skipped.append("cusum_changepoint")
    results, errors = [], {}
    for name, job in jobs:
        try:
            res = job()
            res.name = name
            results.append(res)
        except ShlError as exc:
            errors[name] = str(exc)
    corrected = alpha / len(jobs)
    if any(r.p_value < corrected for r in results):
        verdict = "INHOMOGENEOUS"
    elif errors:
        verdict = "INCONCLUSIVE"
    else:
        verdict = "HOMOGENEOUS"
    from .homogeneity import HomogeneityReport

    report = HomogeneityReport(results, alpha, corrected, verdict, errors)
    return report, skipped


def _cmd_significance(args) -> int:
    counts = io.read_counts_csv(args.infile)
    bins = max(c.bin for c in counts) + 1 if counts else 0
    est = eberhard.estimate(counts, bins, rescale_unequal=True)
    s = est.summary
    if s.degenerate:
        verdict_text = "H0 not rejected (degenerate sample: s = 0)"
    elif s.k_sigma <= REJECT_K:
        verdict_text = (f"H0 rejected (k_sigma = {s.k_sigma:.3f}, "
                        f"Cantelli conf = {est.cantelli_conf:.6f})")
    else:
        verdict_text = f"H0 not rejected (k_sigma = {s.k_sigma:.3f})"
    document = {
        "command": "significance",
        "config": {"in": str(args.infile), "bins": bins},
        "significance": io.summary_dict(s),
        "chebyshev_conf": est.chebyshev_conf,
        "cantelli_conf": est.cantelli_conf,
        "per_bin_j": est.per_bin_j,
        "homogeneity": None,
        "verdict_text": verdict_text,
    }
    if args.audit:
        stream = make_stream(MasterSeed(args.seed), AUDIT_STREAM_ID)
        report, skipped = _significance_audit(
            est.per_bin_j, args.alpha, args.perm, stream
        )
        document["homogeneity"] = io.homogeneity_dict(report)
        if skipped:
            document["homogeneity"]["skipped"] = skipped
        document["verdict_text"] = f"{verdict_text}; audit: {report.verdict}"
    io.write_report(args.out, document)
    print(document["verdict_text"])
    return 0


def _cmd_optimize(args) -> int:
    if not 0.0 < args.eta <= 1.0:
        raise ValueError("eta must be in (0, 1]")
    result = optimize_settings(args.eta, args.multistart, MasterSeed(args.seed))
    a1, a2, b1, b2, r = result.x
    document = {
        "command": "optimize",
        "eta": args.eta,
        "angles_rad": [a1, a2, b1, b2],
        "angles_deg": [math.degrees(v) for v in (a1, a2, b1, b2)],
        "r": r,
        "j_per_pair": result.f,
        "iterations": result.iterations,
        "converged": result.converged,
    }
    io.write_report(args.out, document)
    print(f"eta = {args.eta}  J_pp = {result.f:.8f}  r = {r:.4f}")
    return 0


def _cmd_report(args) -> int:
    document = io.read_report(args.infile)
    per_bin = document.get("per_bin_j")
    if not per_bin:
        raise ValueError("report has no per-bin J values; "
                         "generate it with `shl significance`")
    sig = document["significance"]
    svg = io.render_svg(per_bin, sig["mean"], sig["sem"])
    Path(args.svg).write_text(svg, encoding="utf-8")
    with open(args.tsv, "w", encoding="utf-8") as fh:
        fh.write("bin\tj\n")
        for i, v in enumerate(per_bin):
            fh.write(f"{i}\t{v!r}\n")
    return 0


_COMMANDS = {
    "simulate-device": _cmd_simulate_device,
    "audit": _cmd_audit,
    "simulate-eberhard": _cmd_simulate_eberhard,
    "significance": _cmd_significance,
    "optimize": _cmd_optimize,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ShlError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
