"""Command-line front end: ``heisenqk <command> [options]``.

Commands
--------
catalog   list the families with their parameter constraints
verify    run the residual suite; exit 0 iff every check passes
evolve    integrate the ODE system and compare with the closed form
geodesic  run the incompleteness probe
sample    tabulate metric components on a grid
report    summarize or convert a saved JSON report

Exit codes: 0 success, 1 a check failed, 2 bad command line or config
file, 3 an inadmissible parameter combination.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import campaign as cp
from .evolution import crosscheck
from .geodesics import incompleteness_probe
from .solutions import ParameterError, SolutionSpec

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONSTRAINT = 0, 1, 2, 3

# config keys and how to parse them (lists are comma separated in files)
_KEYS = {
    "family": ("list", str),
    "k": ("list", float),
    "lambda": ("list", float),
    "epslambda": ("list", float),
    "eps": ("list", int),
    "branch": ("list", int),
    "samples": ("one", int),
    "tol-algebraic": ("one", float),
    "tol-ode": ("one", float),
    "seed": ("one", int),
    "format": ("one", str),
    "out": ("one", str),
    "span": ("one", float),
    "grid": ("one", int),
}


class UsageError(Exception):
    pass


def _parse_value(key: str, raw):
    kind, conv = _KEYS[key]
    try:
        if kind == "list":
            items = raw if isinstance(raw, list) else [v for v in str(raw).replace(",", " ").split()]
            return [conv(v) for v in items]
        return conv(raw)
    except (TypeError, ValueError):
        raise UsageError(f"config key {key!r}: cannot parse {raw!r}") from None


def load_config_file(path: str) -> dict:
    """Read a flat JSON object or ``key = value`` lines (``#`` comments)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path}: {exc}") from None
    else:
        raw = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config file {path}, line {n}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            raw[key] = val
    out = {}
    for key, val in raw.items():
        key = key.replace("_", "-")
        if key not in _KEYS:
            raise UsageError(f"config file {path}: unknown key {key!r}")
        out[key] = _parse_value(key, val)
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value or JSON file; command-line flags override it")
    p.add_argument("--family", nargs="+")
    p.add_argument("--k", nargs="+", type=float)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lambda", dest="lambda_", nargs="+", type=float, metavar="LAMBDA")
    g.add_argument("--epslambda", nargs="+", type=float)
    p.add_argument("--eps", nargs="+", type=int, choices=(1, -1))
    p.add_argument("--branch", nargs="+", type=int, choices=(1, 2, 3))
    p.add_argument("--samples", type=int)
    p.add_argument("--tol-algebraic", type=float)
    p.add_argument("--tol-ode", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--span", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heisenqk", description="Heisenberg-symmetric Einstein metrics: catalog and verifier")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("catalog", help="list families and constraints")
    p.add_argument("--family")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--out")
    for name, text in (
        ("verify", "run the residual suite"),
        ("evolve", "ODE versus closed form"),
        ("geodesic", "incompleteness probe"),
        ("sample", "metric components on a grid"),
    ):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "verify":
            p.add_argument("--no-probe", action="store_true", help="skip the geodesic probes")
            p.add_argument("--timing", action="store_true", help="add wall times (reports are then not reproducible)")
        if name == "sample":
            p.add_argument("--grid", type=int)
    p = sub.add_parser("report", help="summarize or convert a JSON report")
    p.add_argument("path")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--out")
    return parser


def merged_options(args: argparse.Namespace) -> dict:
    """File config overlaid with the explicit command-line flags."""
    opts = load_config_file(args.config) if getattr(args, "config", None) else {}
    if "lambda" in opts and "epslambda" in opts:
        raise UsageError("give either lambda or epslambda, not both")
    cli = {
        "family": args.family,
        "k": args.k,
        "lambda": args.lambda_,
        "epslambda": args.epslambda,
        "eps": args.eps,
        "branch": args.branch,
        "samples": args.samples,
        "tol-algebraic": args.tol_algebraic,
        "tol-ode": args.tol_ode,
        "seed": args.seed,
        "format": args.format,
        "out": args.out,
        "span": args.span,
        "grid": getattr(args, "grid", None),
    }
    for key, val in cli.items():
        if val is not None:
            if key in ("lambda", "epslambda"):
                opts.pop("lambda", None)
                opts.pop("epslambda", None)
            opts[key] = val
    return opts


def config_from_options(opts: dict, probes: bool = True) -> cp.CampaignConfig:
    kw = {}
    if "family" in opts:
        kw["families"] = opts["family"]
    for key, field in (("k", "k"), ("lambda", "lam"), ("epslambda", "epslambda"), ("eps", "eps"), ("branch", "branch")):
        if key in opts:
            kw[field] = opts[key]
    for key, field in (("samples", "samples"), ("tol-algebraic", "tol_algebraic"), ("tol-ode", "tol_ode"), ("seed", "seed"), ("span", "span")):
        if key in opts:
            kw[field] = opts[key]
    return cp.CampaignConfig(probes=probes, **kw)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_catalog(args) -> int:
    rows = cp.catalog(args.family)
    if args.format == "json":
        text = cp.to_json({"families": rows})
    elif args.format == "csv":
        text = _table_csv(["family", "constraints", "domain"], [[r["family"], json.dumps(r["constraints"]), json.dumps(r["domain"])] for r in rows])
    else:
        text = "".join(f"{r['family']}\n  constraints: {r['constraints']}\n  domain: {r['domain']}\n" for r in rows)
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    opts = merged_options(args)
    config = config_from_options(opts, probes=not args.no_probe)
    specs = cp.build_specs(config)
    records = []
    for spec in specs:
        start = time.perf_counter()
        rec = cp.verify_spec(spec, config)
        if args.timing:
            rec.info["wall_time_s"] = time.perf_counter() - start
        records.append(rec)
    result = cp.Campaign(config=config, records=records)
    fmt = opts.get("format", "json")
    _emit(cp.to_csv(result) if fmt == "csv" else cp.to_json(result.as_dict()), opts.get("out"))
    return EXIT_OK if result.passed else EXIT_FAIL


def _specs_for(opts) -> list:
    return cp.build_specs(config_from_options(opts, probes=False))


def cmd_evolve(args) -> int:
    opts = merged_options(args)
    span = opts.get("span", 2.0)
    tol = opts.get("tol-ode", 1e-7)
    rows = []
    ok = True
    for spec in _specs_for(opts):
        rep = crosscheck(spec, span=span)
        passed = rep.max_relative_deviation < tol
        ok &= passed
        rows.append({"spec": spec.label, "params": spec.params(), "span": span, "tolerance": tol, "passed": passed, **rep.as_dict()})
    if opts.get("format") == "csv":
        keys = ["spec", "span", "max_deviation", "max_relative_deviation", "constraint_drift", "t_end", "termination", "passed"]
        text = _table_csv(keys, [[r[k] for k in keys] for r in rows])
    else:
        text = cp.to_json({"crosschecks": rows})
    _emit(text, opts.get("out"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_geodesic(args) -> int:
    opts = merged_options(args)
    rows = [incompleteness_probe(spec).as_dict() | {"spec": spec.label} for spec in _specs_for(opts)]
    if opts.get("format") == "csv":
        keys = ["spec", "verdict", "length", "boundary_reached", "curvature_blowup", "degeneration", "conjecture"]
        text = _table_csv(keys, [[r.get(k) for k in keys] for r in rows])
    else:
        text = cp.to_json({"probes": rows})
    _emit(text, opts.get("out"))
    return EXIT_OK


_SYM = [(i, j) for i in range(4) for j in range(i, 4)]
_COORD = "txyz"


def sample_table(spec: SolutionSpec, grid: int, margin: float = 0.05, box: float = 2.0) -> tuple[list, np.ndarray]:
    """Metric components on a ``grid^4`` tensor grid; returns (header, rows)."""
    if grid < 1:
        raise ParameterError("grid must be at least 1")
    lo, hi = spec.domain
    t_lo = lo if np.isfinite(lo) else min(spec.t0, hi) - spec.time_scale
    t_hi = hi if np.isfinite(hi) else max(spec.t0, lo) + spec.time_scale
    w = t_hi - t_lo
    ts = np.linspace(t_lo + margin * w, t_hi - margin * w, grid)
    xs = np.linspace(-box, box, grid) if grid > 1 else np.zeros(1)
    pts = np.array(np.meshgrid(ts, xs, xs, xs, indexing="ij")).reshape(4, -1).T
    g = spec.metric()(pts)
    header = list(_COORD) + [f"g_{_COORD[i]}{_COORD[j]}" for i, j in _SYM]
    data = np.column_stack([pts] + [g[:, i, j] for i, j in _SYM])
    return header, data


def cmd_sample(args) -> int:
    opts = merged_options(args)
    grid = opts.get("grid", 5)
    specs = _specs_for(opts)
    if opts.get("format") == "csv":
        parts = []
        for spec in specs:
            header, data = sample_table(spec, grid)
            parts.append(_table_csv(["spec"] + header, [[spec.label] + list(r) for r in data]))
        text = "".join(parts)
    else:
        out = []
        for spec in specs:
            header, data = sample_table(spec, grid)
            out.append({"spec": spec.label, "params": spec.params(), "columns": header, "rows": data.tolist()})
        text = cp.to_json({"tables": out})
    _emit(text, opts.get("out"))
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        doc = json.loads(Path(args.path).read_text())
        records = doc["records"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"not a verify report: {args.path}: {exc}") from None
    if args.format == "json":
        text = cp.to_json(doc)
    elif args.format == "csv":
        text = cp.records_csv(records)
    else:
        lines = []
        for r in records:
            failed = [n for n, c in r["checks"].items() if not c["passed"]]
            status = "PASS" if not failed else "FAIL " + ",".join(failed)
            verdict = r["probe"]["verdict"] if r.get("probe") else "-"
            lines.append(f"{r['family']:<22} {json.dumps(r['params'], sort_keys=True)}  orientation {r['orientation']:+d}  probe {verdict}  {status}")
        n_fail = sum(not r["passed"] for r in records)
        lines.append(f"{len(records)} records, {n_fail} failing")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if all(r["passed"] for r in records) else EXIT_FAIL


COMMANDS = {
    "catalog": cmd_catalog,
    "verify": cmd_verify,
    "evolve": cmd_evolve,
    "geodesic": cmd_geodesic,
    "sample": cmd_sample,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"heisenqk: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, ValueError) as exc:
        print(f"heisenqk: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except BrokenPipeError:
        # output piped into a pager or head; nothing left to report
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
