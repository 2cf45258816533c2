"""
Command-line harness: ``gcytools {check, scenario, reduce, dh}``.

Exit codes: 0 everything passed, 1 a property or domain check failed,
2 usage or parse error. Machine output is JSON (or CSV for tables); it is
fully determined by the run manifest, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dh, scenarios
from .errors import ContractError, DomainError, ParseError
from .reduction import check_moment_condition, lemma33_dimensions, moment_residual, reduce
from .serialize import load_instance
from .spinor import RTOL, is_gcy, type_of
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

THRESHOLDS = {
    "fd_residual": 1e-6,
    "relation_residual": 1e-12,
    "orbit_derivative": 1e-8,
    "moment_residual_fd": 1e-6,
}


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    tolerance: float = RTOL
    output: str | None = None
    format: str = "json"

    def to_dict(self) -> dict:
        return asdict(self)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _to_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def _to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _csv_cell(v) for k, v in r.items()})
    return buf.getvalue()


def _csv_cell(v):
    v = _clean(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return "" if v is None else v


def _emit(args, report: dict, rows: list[dict], summary: str) -> None:
    text = _to_csv(rows) if args.format == "csv" else _to_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args, manifest: RunManifest) -> int:
    stats = run_suite(args.suite, args.trials, args.seed, args.tol)
    props = {k: v.to_dict() for k, v in stats.items()}
    ok = all(v.ok for v in stats.values())
    report = {"manifest": manifest.to_dict(), "suite": args.suite, "properties": props, "pass": ok}
    rows = [{"property": k, **{f: v[f] for f in ("trials", "passed", "worst_residual", "ok")}} for k, v in props.items()]
    lines = [f"suite {args.suite}: {'PASS' if ok else 'FAIL'}"]
    for k, v in props.items():
        lines.append(f"  {k:24s} {v['passed']}/{v['trials']}  worst {v['worst_residual']:.3e}")
    _emit(args, report, rows, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def _parse_point(text: str, size: int) -> tuple:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"--point column {e.colno}") from None
    if not isinstance(raw, list) or len(raw) != size:
        raise ParseError(f"expected a list of {size} coordinates", "--point")
    out = []
    for i, c in enumerate(raw):
        if isinstance(c, list) and len(c) == 2 and all(isinstance(x, (int, float)) for x in c):
            out.append(complex(c[0], c[1]))
        elif isinstance(c, (int, float)) and not isinstance(c, bool):
            out.append(complex(c))
        else:
            raise ParseError("coordinate must be a number or [re, im]", f"--point[{i}]")
    return tuple(out)


def _scenario_row(dom: scenarios.ScenarioDomain, h: float, rtol: float) -> dict:
    relation = "additive" if dom.kind == "polydisc" else "multiplicative"
    kern = scenarios.kernel_eval(dom)
    phi = scenarios.fiber_spinor(dom, kern)
    d_fd = scenarios.moment_point_data(dom, fd_step=h)
    gcy = is_gcy(phi, rtol)
    return {
        "point": [[c.real, c.imag] for c in dom.point],
        "K": kern.K,
        "mu": scenarios.moment_value(dom),
        "mu_general": scenarios.moment_general(dom),
        "fd_residual": scenarios.verify_hamiltonian(dom, h),
        "relation_residual": scenarios.relation_check(relation, dom),
        "orbit_derivative": abs(scenarios.orbit_derivative(dom, 1e-4)),
        "moment_residual_fd": moment_residual(d_fd),
        "gcy": gcy,
        "type": type_of(phi, rtol) if gcy else None,
    }


def cmd_scenario(args, manifest: RunManifest) -> int:
    kind = args.kind or args.scenario
    if kind is None:
        raise UsageError("scenario kind required (polydisc or ball)")
    if kind not in scenarios.KINDS:
        raise UsageError(f"unknown scenario {kind!r}")
    if args.point is not None:
        doms = [scenarios.ScenarioDomain(kind, args.m, args.n, _parse_point(args.point, args.m + args.n))]
    else:
        rng = np.random.default_rng(args.seed)
        doms = scenarios.sample_points(kind, args.m, args.n, args.samples, rng)
    rows = [_scenario_row(d, args.h, args.tol) for d in doms]
    worst = {k: max(r[k] for r in rows) for k in THRESHOLDS}
    checks = {k: worst[k] <= t for k, t in THRESHOLDS.items()}
    checks["gcy"] = all(r["gcy"] for r in rows)
    checks["type"] = all(r["type"] == args.m for r in rows)
    ok = all(checks.values())
    report = {
        "manifest": manifest.to_dict(),
        "scenario": {"kind": kind, "m": args.m, "n": args.n},
        "moment_offset": scenarios.moment_offset(kind, args.n),
        "thresholds": THRESHOLDS,
        "worst": worst,
        "checks": checks,
        "points": rows,
        "pass": ok,
    }
    lines = [f"scenario {kind} m={args.m} n={args.n}, {len(rows)} points: {'PASS' if ok else 'FAIL'}"]
    for k, t in THRESHOLDS.items():
        lines.append(f"  {k:20s} worst {worst[k]:.3e}  (<= {t:.0e})")
    lines.append(f"  gcy of type {args.m}: {checks['gcy'] and checks['type']}")
    _emit(args, report, rows, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_reduce(args, manifest: RunManifest) -> int:
    try:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(e.strerror or str(e), args.input) from None
    d = load_instance(text, args.input)
    res = reduce(d, args.tol)
    l33 = lemma33_dimensions(d, args.tol)
    out = res.to_dict()
    report = {
        "manifest": manifest.to_dict(),
        "moment_residual": moment_residual(d),
        "moment_condition": check_moment_condition(d),
        "lemma33_equal": l33[0] == l33[1],
        **out,
    }
    rows = [{"field": k, "value": v} for k, v in out.items()]
    summary = (f"reduced to dimension {res.quotient_dim}: type {res.original_type} -> {res.reduced_type}, "
               f"phi~ = {res.reduced_phi}")
    _emit(args, report, rows, summary)
    return EXIT_OK


def _parse_window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise ParseError("window must look like LO:HI", "--window") from None
    if not lo < hi:
        raise ParseError("window needs LO < HI", "--window")
    return lo, hi


def cmd_dh(args, manifest: RunManifest) -> int:
    lo, hi = _parse_window(args.window)
    sc = dh.DHScenario(args.n, args.scenario)
    cfg = dh.DHConfig.uniform(
        lo, hi, args.bins, samples=args.samples, seed=args.seed, level_thickness=args.level_thickness,
        partitions=args.partitions, reduced_samples=args.reduced_samples, workers=args.workers,
        sigmas=args.sigmas, slack=args.slack,
    )
    rep = dh.dh_compare(sc, cfg)
    body = rep.to_dict()
    timings = body.pop("timings")
    report = {"manifest": manifest.to_dict(), **body}
    keys = ("bin_centers", "f_hat", "vol_hat", "stderr", "rel_error", "flags")
    rows = [dict(zip(keys, vals)) for vals in zip(*(body[k] for k in keys))]
    lines = [f"dh {args.scenario} n={args.n}: {'PASS' if rep.passed else 'FAIL'}"]
    lines.append(f"  {'a':>8s} {'f_hat':>8s} {'vol_hat':>8s} {'stderr':>8s} flag")
    for r in rows:
        lines.append(f"  {r['bin_centers']:8.3f} {r['f_hat']:8.4f} {r['vol_hat']:8.4f} {r['stderr']:8.4f} {r['flags']}")
    lines.append("  time: " + ", ".join(f"{k} {v:.1f}s" for k, v in timings.items()))
    _emit(args, report, rows, "\n".join(lines))
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _count(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != int(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


GLOBAL_DEFAULTS = {"seed": 0, "tol": RTOL, "out": None, "format": "json"}


def _add_globals(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (default 0)")
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="rank tolerance tau (default 1e-9)")
    p.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcytools", description=__doc__.strip().splitlines()[0])
    _add_globals(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run a randomized property suite")
    _add_globals(p)
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--trials", type=_count, default=100)

    p = sub.add_parser("scenario", help="verify a Bergman-kernel scenario at sampled points")
    _add_globals(p)
    p.add_argument("kind", nargs="?", choices=scenarios.KINDS)
    p.add_argument("--scenario", choices=scenarios.KINDS)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--samples", type=_count, default=100)
    p.add_argument("--point", help="JSON list of coordinates (numbers or [re, im])")
    p.add_argument("--h", type=float, default=1e-4, help="finite-difference step")

    p = sub.add_parser("reduce", help="reduce a MomentPointData instance file")
    _add_globals(p)
    p.add_argument("--in", dest="input", required=True)

    p = sub.add_parser("dh", help="Duistermaat-Heckman comparison on the polydisc")
    _add_globals(p)
    p.add_argument("--scenario", default="polydisc", choices=("polydisc",))
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--samples", type=_count, default=10**6)
    p.add_argument("--reduced-samples", type=_count, default=50_000)
    p.add_argument("--bins", type=_count, default=20)
    p.add_argument("--window", default="-3:-0.2", help="LO:HI range of moment values")
    p.add_argument("--level-thickness", type=float, default=None)
    p.add_argument("--partitions", type=_count, default=4)
    p.add_argument("--workers", type=_count, default=1)
    p.add_argument("--sigmas", type=float, default=3.0, help="pass band in combined standard errors")
    p.add_argument("--slack", type=float, default=0.0, help="extra pass band as a fraction of max f_hat")
    return parser


def _join_window(argv: list[str]) -> list[str]:
    # "--window -3:-0.2" would otherwise be read as an option
    out = []
    it = iter(range(len(argv)))
    for i in it:
        if argv[i] == "--window" and i + 1 < len(argv):
            out.append(f"--window={argv[i + 1]}")
            next(it, None)
        else:
            out.append(argv[i])
    return out


COMMANDS = {"check": cmd_check, "scenario": cmd_scenario, "reduce": cmd_reduce, "dh": cmd_dh}


def main(argv: list[str] | None = None) -> int:
    argv = _join_window(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", *GLOBAL_DEFAULTS)}
    manifest = RunManifest(args.command, params, args.seed, args.tol, args.out, args.format)
    try:
        return COMMANDS[args.command](args, manifest)
    except (ParseError, UsageError, ContractError) as e:
        print(f"gcytools {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as e:
        print(f"gcytools {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
