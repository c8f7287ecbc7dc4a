"""Batch front end: list families, sample fields, verify residuals, probe blow-up.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 family
constraint violation, 4 empty report (every point skipped).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .catalog import (
    ConstraintError,
    REGISTRY_IDS,
    STATUS_LABELS,
    ValidityError,
    family_defaults,
    make_family,
    registry_entries,
)
from .conditions import (
    AnsatzConfig,
    bilinear_rank2_condition,
    config_from_family,
    trace_condition_higher,
    trace_condition_initial,
)
from .verify import EmptyReportError, GridSpec, catastrophe_probe, residual_exact, residual_fd

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_CONSTRAINT = 3
EXIT_EMPTY = 4

_GRID_AXES = ("t", "x1", "x2", "x3")


class UsageError(ValueError):
    pass


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def parse_grid(text: str) -> dict:
    """Parse "t=a:b:n,x1=a:b:n,..."; unknown axis names are rejected."""
    axes = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"bad grid component {part!r} (expected axis=start:stop:count)")
        name, rng = part.split("=", 1)
        name = name.strip()
        if name not in _GRID_AXES:
            raise UsageError(f"unknown grid axis {name!r} (use {', '.join(_GRID_AXES)})")
        pieces = rng.split(":")
        if len(pieces) != 3:
            raise UsageError(f"bad grid range {rng!r} (expected start:stop:count)")
        try:
            lo, hi, n = float(pieces[0]), float(pieces[1]), int(pieces[2])
        except ValueError as exc:
            raise UsageError(f"bad grid range {rng!r}: {exc}") from None
        if n < 1:
            raise UsageError(f"grid axis {name} needs count >= 1")
        axes[name] = (lo, hi, n)
    return axes


def parse_value(text: str):
    """Scalar, comma-separated vector, or string parameter value."""
    if "," in text:
        try:
            return tuple(float(p) for p in text.split(","))
        except ValueError:
            raise UsageError(f"bad vector value {text!r}") from None
    for cast in (int, float):
        try:
            v = cast(text)
            if cast is int and ("." in text or "e" in text.lower()):
                continue
            return v
        except ValueError:
            continue
    return text


def load_config_file(path: str) -> dict:
    """Flat key-value document: JSON object or 'key = value' lines."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
        if not isinstance(data, dict):
            raise UsageError("config file must hold a flat object")
        return data
    except json.JSONDecodeError:
        pass
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line {line!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = parse_value(val.strip())
    return out


def gather_params(args) -> dict:
    params = {}
    if getattr(args, "config", None):
        params.update(load_config_file(args.config))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise UsageError(f"bad --set {item!r} (expected key=value)")
        key, val = item.split("=", 1)
        params[key.strip()] = parse_value(val.strip())
    return params


def build_grid(args, spec, counts=(5, 11, 11, 11)) -> GridSpec:
    window = spec.default_grid_window()
    axes = {name: (*window[name], counts[i]) for i, name in enumerate(_GRID_AXES)}
    if getattr(args, "grid", None):
        axes.update(parse_grid(args.grid))
    return GridSpec(**axes)


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_params(spec) -> dict:
    out = {}
    for key, val in spec.params.items():
        if key.startswith("_"):
            continue
        if isinstance(val, (tuple, list, np.ndarray)):
            out[key] = [float(v) for v in val]
        elif isinstance(val, (np.floating, np.integer)):
            out[key] = float(val)
        else:
            out[key] = val
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_list(args) -> int:
    entries = registry_entries()
    if args.format == "json":
        _emit(json.dumps(entries, indent=2, default=float) + "\n", args.out)
        return EXIT_OK
    lines = [f"{'id':<16s} {'rank':>4s} {'waves':>5s}  description"]
    for e in entries:
        lines.append(f"{e['id']:<16s} {e['rank']:>4d} {e['waves']:>5d}  {e['description']}")
        ts = ", ".join(f"{v:g}" for v in e["singular_times"]) or "none"
        lines.append(f"{'':<27s}  singular times: {ts}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = make_family(args.family, gather_params(args))
    grid = build_grid(args, spec, counts=(3, 5, 5, 5))
    tv, xv = grid.points()
    res = spec.evaluate_batch(tv, xv, branch=args.branch)
    k = spec.n_waves

    if args.format == "json":
        rows = []
        for i in range(len(tv)):
            rows.append({
                "t": tv[i], "x1": xv[i, 0], "x2": xv[i, 1], "x3": xv[i, 2],
                "r": [None if not np.isfinite(v) else v for v in res.r[i]],
                "a": None if not np.isfinite(res.state[i, 0]) else res.state[i, 0],
                "u": [None if not np.isfinite(v) else v for v in res.state[i, 1:]],
                "cond_det": None if not np.isfinite(res.cond_det[i]) else res.cond_det[i],
                "status": STATUS_LABELS[int(res.status[i])],
            })
        _emit(json.dumps({"family": spec.id, "params": _json_params(spec),
                          "grid": grid.as_dict(), "rows": rows}, indent=2, default=float) + "\n",
              args.out)
        return EXIT_OK

    header = ["t", "x1", "x2", "x3"] + [f"r{j+1}" for j in range(k)] + \
             ["a", "u1", "u2", "u3", "cond_det", "status"]
    lines = [",".join(header)]
    for i in range(len(tv)):
        vals = [tv[i], xv[i, 0], xv[i, 1], xv[i, 2], *res.r[i], *res.state[i], res.cond_det[i]]
        cells = [(_fmt(v) if np.isfinite(v) else "nan") for v in vals]
        cells.append(STATUS_LABELS[int(res.status[i])])
        lines.append(",".join(cells))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = make_family(args.family, gather_params(args))
    grid = build_grid(args, spec)
    if args.method == "exact":
        report = residual_exact(spec, grid=grid, branch=args.branch)
        threshold = args.threshold if args.threshold is not None else 1e-8
    else:
        report = residual_fd(spec, grid=grid, h=args.h, branch=args.branch)
        threshold = args.threshold if args.threshold is not None else 1e-5
    doc = report.as_dict()
    doc["family"] = spec.id
    doc["params"] = _json_params(spec)
    doc["threshold"] = threshold
    doc["pass"] = report.passed(threshold)
    if args.format == "csv":
        lines = ["equation,max,mean"]
        for i in range(4):
            lines.append(f"eq{i+1},{_fmt(report.eq_max[i])},{_fmt(report.eq_mean[i])}")
        lines.append(f"# pass={doc['pass']} max_normalized={_fmt(report.max_normalized)}")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(json.dumps(doc, indent=2, default=float) + "\n", args.out)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def _pair_config(pair_text: str, gamma: float) -> AnsatzConfig:
    """Raw acoustic-pair configuration 'e1x,e1y,e1z;e2x,e2y,e2z' (no validation)."""
    from .catalog.base import PotentialWave, stack_waves
    from .fluid import GasParams
    parts = pair_text.split(";")
    if len(parts) != 2:
        raise UsageError("--pair expects 'e1x,e1y,e1z;e2x,e2y,e2z'")
    evecs = []
    for part in parts:
        v = np.array([float(p) for p in part.split(",")])
        if v.shape != (3,):
            raise UsageError("--pair directions must be 3-vectors")
        evecs.append(v / np.linalg.norm(v))
    gas = GasParams(gamma=gamma)
    kappa = gas.kappa
    waves, waves_jac = stack_waves([PotentialWave(e=e) for e in evecs])
    gammas = np.stack([np.concatenate([[1.0], kappa * e]) for e in evecs], axis=1)
    gammas /= np.linalg.norm(gammas, axis=0)

    def profile_jac(r, t):
        return np.broadcast_to(gammas, (len(r), 4, 2)).copy()

    return AnsatzConfig(k=2, waves=waves, waves_jac=waves_jac,
                        profile_jac=profile_jac, gas=gas)


def cmd_conditions(args) -> int:
    rng = np.random.default_rng(args.seed)
    tol_scale = 1e-10
    rows = []

    if args.pair:
        params = gather_params(args)
        gamma = float(params.get("gamma", 5.0 / 3.0))
        cfg = _pair_config(args.pair, gamma)
        fam_label = f"pair({args.pair})"
        for i in range(args.samples):
            u = np.concatenate([[rng.uniform(0.5, 2.0)], rng.normal(0, 0.5, 3)])
            r = rng.uniform(-0.8, 0.8, 2)
            scale = 1.0 + float(np.max(np.abs(u)))
            res_i = trace_condition_initial(cfg, u, r)
            res_h, _ = trace_condition_higher(cfg, u, r, 1)
            res_b = bilinear_rank2_condition(cfg, u)
            rows.append({
                "sample": i,
                "initial_max": float(np.max(np.abs(res_i))),
                "higher_max": float(np.max(np.abs(res_h))) if res_h.size else 0.0,
                "bilinear_max": float(np.max(np.abs(res_b))),
                "pass": bool(max(np.max(np.abs(res_i)),
                                 np.max(np.abs(res_h)) if res_h.size else 0.0,
                                 np.max(np.abs(res_b))) <= tol_scale * scale),
            })
        higher_note = None
    else:
        spec = make_family(args.family, gather_params(args))
        cfg = config_from_family(spec)
        fam_label = spec.id
        k = spec.n_waves
        higher_note = "identically satisfied" if k == 1 else None
        for i in range(args.samples):
            r = rng.uniform(-0.8, 0.8, k)
            u = spec.profile(r[None, :], np.zeros(1))[0]
            if not u[0] > 0:
                continue
            scale = 1.0 + float(np.max(np.abs(u)))
            res_i = trace_condition_initial(cfg, u, r)
            hmax = 0.0
            for s in range(1, k):
                res_h, _ = trace_condition_higher(cfg, u, r, s)
                if res_h.size:
                    hmax = max(hmax, float(np.max(np.abs(res_h))))
            row = {"sample": i,
                   "initial_max": float(np.max(np.abs(res_i))),
                   "higher_max": hmax,
                   "pass": bool(max(np.max(np.abs(res_i)), hmax) <= tol_scale * scale)}
            rows.append(row)

    doc = {"family": fam_label, "samples": len(rows),
           "tolerance_rule": "1e-10 * (1 + max field magnitude)",
           "higher_order": higher_note, "rows": rows,
           "pass": bool(rows) and all(r["pass"] for r in rows)}
    _emit(json.dumps(doc, indent=2, default=float) + "\n", args.out)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_catastrophe(args) -> int:
    spec = make_family(args.family, gather_params(args))
    report = catastrophe_probe(spec, branch=args.branch)
    times = []
    for tv in report.formula_times:
        entry = {"formula": tv}
        if tv <= 0:
            entry["note"] = "outside default window (nonpositive time)"
        elif report.applicable and abs(tv - report.probe_time) < 1e-12:
            entry["empirical"] = report.empirical_time
            entry["rel_gap"] = report.rel_gap
        times.append(entry)
    doc = {"family": spec.id, "applicable": report.applicable, "times": times}
    if report.applicable:
        doc["ray"] = [float(v) for v in report.ray]
        doc["jac_norm_schedule"] = {
            "t": [float(v) for v in report.schedule],
            "norm": [None if not np.isfinite(v) else float(v) for v in report.jac_norms],
        }
    else:
        doc["note"] = "no positive singular time; bounded family"
    _emit(json.dumps(doc, indent=2, default=float) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="riemannwaves",
        description="construct, evaluate and verify rank-k wave solutions of the "
                    "isentropic fluid equations")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, family_required=True):
        if family_required:
            p.add_argument("--family", required=True, choices=REGISTRY_IDS)
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="parameter override (repeatable)")
        p.add_argument("--config", help="flat key=value or JSON parameter file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--branch", choices=("plus", "minus", "auto"), default=None)
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("list", help="list registry families")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_list)

    p = sub.add_parser("sample", help="evaluate fields on a grid and write rows")
    common(p)
    p.add_argument("--grid", help='axis ranges, e.g. "t=0:0.4:3,x1=-1:1:5"')
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("verify", help="residual verification on a grid")
    common(p)
    p.add_argument("--grid")
    p.add_argument("--method", choices=("exact", "fd"), default="exact")
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("conditions", help="trace/involutivity condition residuals")
    common(p, family_required=False)
    p.add_argument("--family", choices=REGISTRY_IDS)
    p.add_argument("--pair", help="raw acoustic pair 'e1x,e1y,e1z;e2x,e2y,e2z'")
    p.add_argument("--samples", type=int, default=25)
    p.set_defaults(fn=cmd_conditions)

    p = sub.add_parser("catastrophe", help="predicted vs empirical blow-up times")
    common(p)
    p.set_defaults(fn=cmd_catastrophe)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        if args.command == "conditions" and not (args.family or args.pair):
            raise UsageError("conditions requires --family or --pair")
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConstraintError, ValidityError) as exc:
        print(f"constraint error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (KeyError,) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EmptyReportError as exc:
        print(f"empty report: {exc}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())
