"""Command-line interface.

Exit status: 0 on success (or "d-separated" / "valid"), 1 on a negative domain
verdict, 2 on usage, I/O or validation errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dag as dagmod
from .data import Dataset
from .errors import CausalError
from .estimators import (
    bootstrap_ci,
    fit_msm,
    fit_ols,
    g_formula,
    g_formula_msm,
    iptw_weights,
    its_segmented,
    rd_estimate,
    standardize,
)
from .scenarios import catalog, get_scenario, render_rows, reproduce, reproduction_ok, rows_to_json
from .scm import load_scm, saturated_terms, simulate, term_name

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return value


def _level(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return value


def _names(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _times(text: str | None, count: int) -> list[list[str]]:
    """'L1;L2;L3' -> [['L1'], ['L2'], ['L3']]; empty segments mean no confounders at that time."""
    if text is None:
        return [[] for _ in range(count)]
    parts = [_names(p) for p in text.split(";")]
    if len(parts) != count:
        raise UsageError(f"--confounders lists {len(parts)} times but there are {count} treatments")
    return parts


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _require(args, *flags: str) -> None:
    missing = [f"--{f.replace('_', '-')}" for f in flags if getattr(args, f) is None]
    if missing:
        raise UsageError(f"method {args.method} requires {', '.join(missing)}")


# ---------------------------------------------------------------------------
# graph commands


def cmd_dsep(args) -> int:
    g = dagmod.load_dag(args.dag)
    separated = dagmod.d_separated(g, args.x, args.y, args.given)
    lines = ["d-separated" if separated else "d-connected"]
    if args.verbose or not separated:
        for p in dagmod.open_paths(g, args.x, args.y, args.given):
            lines.append(f"  open: {p}")
    print("\n".join(lines))
    return EXIT_OK if separated else EXIT_NEGATIVE


def cmd_paths(args) -> int:
    g = dagmod.load_dag(args.dag)
    paths = dagmod.backdoor_paths(g, args.x, args.y) if args.backdoor else dagmod.all_paths(g, args.x, args.y)
    for p in paths:
        state = "open" if dagmod.path_is_open(g, p, args.given) else "blocked"
        kinds = ",".join(p.kinds) or "-"
        print(f"{p}\t{state}\t{kinds}")
    return EXIT_OK


def cmd_adjust_check(args) -> int:
    g = dagmod.load_dag(args.dag)
    valid = dagmod.is_valid_adjustment_set(g, args.treatment, args.outcome, args.z)
    print("valid" if valid else "invalid")
    if not valid:
        bad = sorted(set(args.z) & g.descendants(args.treatment))
        if bad:
            print(f"  descendants of {args.treatment}: {', '.join(bad)}")
        for p in dagmod.backdoor_paths(g, args.treatment, args.outcome):
            if dagmod.path_is_open(g, p, args.z):
                print(f"  open backdoor: {p}")
    return EXIT_OK if valid else EXIT_NEGATIVE


def cmd_intervene(args) -> int:
    g = dagmod.intervene(dagmod.load_dag(args.dag), args.targets)
    _emit(json.dumps(g.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    g = dagmod.load_dag(args.dag)
    highlight = tuple(args.backdoor) if args.backdoor else None
    _emit(dagmod.to_dot(g, highlight), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulation and estimation


def cmd_simulate(args) -> int:
    model = load_scm(args.scm, warn=False)
    data = simulate(model, args.n, args.seed)
    _emit(data.to_csv(), args.out)
    return EXIT_OK


def _report_text(report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json() + "\n"
    if fmt == "csv":
        cols = ["term", "estimate", "se", "t", "p", "ci_low", "ci_high"]
        lines = [",".join(cols)]
        for t in report.terms:
            vals = [t.estimate, t.se, t.t, t.p, t.ci_low, t.ci_high]
            lines.append(",".join([t.name] + ["" if v is None else repr(v) for v in vals]))
        return "\n".join(lines) + "\n"
    return report.to_text()


def _means_text(means: dict, label: str, fmt: str, extra: dict | None = None) -> str:
    payload = {"regime_means": {k: v for k, v in means.items()}}
    payload.update(extra or {})
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        return "regime,mean\n" + "".join(f"{k},{v!r}\n" for k, v in means.items())
    lines = [f"E[{label} | do({k})] = {v:.4f}" for k, v in means.items()]
    for key, value in (extra or {}).items():
        if isinstance(value, dict):
            lines += [f"{name} = {coef:.4f}" for name, coef in value.items()]
        else:
            lines.append(f"{key} = {value:.4f}")
    return "\n".join(lines) + "\n"


def _with_bootstrap(args, data, estimator):
    if args.B:
        if args.seed is None:
            raise UsageError("--seed is required when --B > 0")
        return bootstrap_ci(data, estimator, B=args.B, level=args.level, seed=args.seed)
    return estimator(data)


def cmd_estimate(args) -> int:
    data = Dataset.from_csv(args.data)
    m = args.method
    if m == "ols":
        _require(args, "outcome", "terms")
        terms = _names(args.terms)
        report = _with_bootstrap(args, data, lambda d: fit_ols(d, args.outcome, terms))
        text = _report_text(report, args.format)
    elif m == "standardize":
        _require(args, "treatment", "outcome")
        res = standardize(data, args.treatment, args.outcome, _names(args.adjust))
        means = {f"{args.treatment}={k}": v for k, v in res.means.items()}
        text = _means_text(means, args.outcome, args.format, {"ate": res.ate})
    elif m == "iptw-msm":
        _require(args, "treatments", "outcome")
        treatments = _names(args.treatments)
        conf = _times(args.confounders, len(treatments))
        terms = _names(args.terms) or [term_name(t) for t in saturated_terms(treatments)]

        def estimator(d):
            w = iptw_weights(d, treatments, conf, stabilized=not args.unstabilized, numerator=args.numerator)
            return fit_msm(d, w, args.outcome, terms)

        if args.weights_out:
            iptw_weights(data, treatments, conf, numerator=args.numerator).to_csv(args.weights_out)
        text = _report_text(_with_bootstrap(args, data, estimator), args.format)
    elif m == "g-formula":
        _require(args, "treatments", "outcome")
        treatments = _names(args.treatments)
        conf = _times(args.confounders, len(treatments))
        kwargs = {}
        if args.dag:
            kwargs["dag"] = dagmod.load_dag(args.dag)
        if args.outcome_terms:
            kwargs["outcome_terms"] = _names(args.outcome_terms)
        if args.regime:
            regime = [int(v) for v in _names(args.regime)]
            value = g_formula(data, treatments, conf, args.outcome, regime, **kwargs)
            label = ",".join(f"{t}={r}" for t, r in zip(treatments, regime))
            text = _means_text({label: value}, args.outcome, args.format)
        else:
            res = g_formula_msm(data, treatments, conf, args.outcome, **kwargs)
            means = {",".join(f"{t}={r}" for t, r in zip(treatments, k)): v for k, v in res.regime_means.items()}
            text = _means_text(means, args.outcome, args.format, {"coefficients": res.coefficients})
    elif m == "its":
        _require(args, "time", "outcome", "interruption")
        series = list(zip(data[args.time], data[args.outcome]))
        text = _report_text(its_segmented(series, args.interruption), args.format)
    elif m == "rd":
        _require(args, "running", "outcome", "cutoff", "bandwidth")
        report = rd_estimate(data, args.running, args.outcome, args.cutoff, args.bandwidth)
        text = _report_text(report, args.format)
    else:  # argparse restricts choices
        raise UsageError(f"unknown method {m}")
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# scenarios


def cmd_reproduce(args) -> int:
    spec = get_scenario(args.scenario)
    rows = reproduce(spec.id, _names(args.methods) or None, n=args.n, seed=args.seed, B=args.B,
                     level=args.level, tolerance=args.tolerance)
    if args.format == "json":
        text = rows_to_json(rows) + "\n"
    else:
        text = f"{spec.id}: {spec.anchor}\n" + f"n = {args.n}, seed = {args.seed}, B = {args.B}\n" + render_rows(rows)
    _emit(text, args.out)
    return EXIT_OK if reproduction_ok(rows) else EXIT_NEGATIVE


def cmd_catalog(args) -> int:
    specs = catalog()
    if args.export_dir:
        out = Path(args.export_dir)
        out.mkdir(parents=True, exist_ok=True)
        for s in specs:
            (out / f"{s.id}.json").write_text(json.dumps(s.to_scm_dict(), indent=2) + "\n")
    if args.format == "json":
        print(json.dumps([{"id": s.id, "anchor": s.anchor, "treatments": list(s.treatments),
                           "outcome": s.outcome, "observed": list(s.observed), "truth": s.truth,
                           "methods": sorted(s.methods)} for s in specs], indent=2))
    else:
        for s in specs:
            print(f"{s.id}\t{s.anchor}\tmethods: {', '.join(sorted(s.methods))}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edcausal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dsep", help="test d-separation of two nodes")
    p.add_argument("dag")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--given", nargs="*", default=[])
    p.add_argument("-v", "--verbose", action="store_true", help="list open paths")
    p.set_defaults(func=cmd_dsep)

    p = sub.add_parser("paths", help="list paths between two nodes with their status")
    p.add_argument("dag")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--given", nargs="*", default=[])
    p.add_argument("--backdoor", action="store_true", help="backdoor paths only")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("adjust-check", help="check the backdoor criterion for an adjustment set")
    p.add_argument("dag")
    p.add_argument("treatment")
    p.add_argument("outcome")
    p.add_argument("--z", nargs="*", default=[])
    p.set_defaults(func=cmd_adjust_check)

    p = sub.add_parser("intervene", help="post-intervention DAG as JSON")
    p.add_argument("dag")
    p.add_argument("--targets", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_intervene)

    p = sub.add_parser("export-dot", help="Graphviz export")
    p.add_argument("dag")
    p.add_argument("--backdoor", nargs=2, metavar=("TREATMENT", "OUTCOME"), help="highlight backdoor paths")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("simulate", help="draw a dataset from an SCM file")
    p.add_argument("scm")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="run an estimator on a CSV dataset")
    p.add_argument("data")
    p.add_argument("--method", required=True, choices=["ols", "standardize", "iptw-msm", "g-formula", "its", "rd"])
    p.add_argument("--outcome")
    p.add_argument("--terms", help="comma-separated, interactions as X1*X2")
    p.add_argument("--treatment")
    p.add_argument("--adjust", help="comma-separated adjustment set")
    p.add_argument("--treatments", help="comma-separated treatment sequence")
    p.add_argument("--confounders", help="per-time confounders, e.g. 'L1;L2;L3' (empty segment = none)")
    p.add_argument("--numerator", choices=["history", "marginal"], default="history")
    p.add_argument("--unstabilized", action="store_true")
    p.add_argument("--weights-out", help="write per-unit W and SW to this CSV")
    p.add_argument("--regime", help="comma-separated 0/1 per treatment; omit for all regimes")
    p.add_argument("--outcome-terms", help="g-formula outcome regression terms")
    p.add_argument("--dag", help="DAG file; g-formula conditions each confounder on its parents")
    p.add_argument("--time")
    p.add_argument("--interruption", type=float)
    p.add_argument("--running")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--B", type=int, default=0)
    p.add_argument("--level", type=_level, default=0.95)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("reproduce", help="rerun a catalog scenario and compare with the truth")
    p.add_argument("scenario")
    p.add_argument("--methods", help="comma-separated; default is the scenario's standard set")
    p.add_argument("--n", type=_positive_int, default=500)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--level", type=_level, default=0.95)
    p.add_argument("--tolerance", type=float, default=0.3, help="closeness used when --B 0")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("catalog", help="list scenarios")
    p.add_argument("--export-dir", help="write each scenario as an SCM JSON file")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (CausalError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
