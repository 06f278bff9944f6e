"""Command line interface.

Exit codes: 0 success, 2 invalid input, 3 budget refusal.  Every JSON report
carries the tool version, the resolved configuration and the seed; the
timestamp can be dropped with ``--no-timestamp`` for byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .covariance import DegenerateDistributionError, asymptotic_constant
from .distribution import DistributionSpec, DistributionSpecError
from .linegraph import eigen_structure, verify_spectrum
from .oracle import (
    DEFAULT_SHARD,
    BudgetExceeded,
    convergence_table,
    exact_p_d,
    mc_estimate,
)
from .overlap import direct_volume_lat_V, num_pairs, product_lattices, volume_ratio_z2

log = logging.getLogger("equidistance")

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3
SCHEMA_VERSION = 1

DEFAULTS = {
    "dist": None,
    "n": 3,
    "d": None,
    "d_list": None,
    "d_max": 100,
    "points": 10,
    "mode": "exact",
    "method": "auto",
    "samples": 100_000,
    "seed": 0,
    "workers": 1,
    "shard_size": DEFAULT_SHARD,
    "budget": None,
    "direct": False,
    "format": "json",
    "timestamp": True,
}


class InputError(ValueError):
    pass


def _fmt(x):
    if isinstance(x, Fraction):
        return str(x)
    return x


def load_dist(value) -> DistributionSpec:
    if value is None:
        raise InputError("--dist is required (a JSON file or an inline JSON object)")
    if isinstance(value, dict):
        return DistributionSpec.from_json(value)
    text = str(value).strip()
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DistributionSpecError(f"invalid JSON ({exc})") from None
        return DistributionSpec.from_json(obj)
    if text == "bernoulli":
        return DistributionSpec.bernoulli()
    if not Path(text).exists():
        raise InputError(f"distribution file {text!r} not found")
    return DistributionSpec.load(text)


def _d_grid(cfg) -> list[int]:
    if cfg["d_list"]:
        return sorted({int(x) for x in str(cfg["d_list"]).split(",")})
    d_max, k = int(cfg["d_max"]), max(1, int(cfg["points"]))
    if d_max < 1:
        raise InputError("--d-max must be >= 1")
    grid = {max(1, round(d_max ** (i / (k - 1)))) for i in range(k)} if k > 1 else set()
    return sorted(grid | {d_max})


def _check_n(cfg):
    if int(cfg["n"]) < 3:
        raise InputError("n must be >= 3")


# ---------------------------------------------------------------------------
# Commands; each returns (result, tabular rows or None)


def cmd_constant(cfg):
    _check_n(cfg)
    pred = asymptotic_constant(load_dist(cfg["dist"]), int(cfg["n"]), cfg["method"])
    return pred.to_json(), None


def cmd_exact(cfg):
    _check_n(cfg)
    if cfg["d"] is None or int(cfg["d"]) < 0:
        raise InputError("--d must be given and >= 0")
    d = int(cfg["d"])
    p = exact_p_d(load_dist(cfg["dist"]), int(cfg["n"]), d, mode=cfg["mode"], budget=cfg["budget"])
    res = {"n": int(cfg["n"]), "d": d, "mode": cfg["mode"], "p_d": _fmt(p), "p_d_float": float(p)}
    return res, None


def cmd_mc(cfg):
    _check_n(cfg)
    if cfg["d"] is None or int(cfg["d"]) < 0:
        raise InputError("--d must be given and >= 0")
    if int(cfg["samples"]) < 1:
        raise InputError("--samples must be >= 1")
    r = mc_estimate(
        load_dist(cfg["dist"]),
        int(cfg["n"]),
        int(cfg["d"]),
        int(cfg["samples"]),
        int(cfg["seed"]),
        workers=int(cfg["workers"]),
        shard_size=int(cfg["shard_size"]),
    )
    return {"n": int(cfg["n"]), "d": int(cfg["d"]), **r.to_json()}, None


def cmd_table(cfg):
    _check_n(cfg)
    dist = load_dist(cfg["dist"])
    budgets = {}
    if cfg["budget"] is not None:
        budgets = {"exact_budget": int(cfg["budget"]), "float_budget": int(cfg["budget"])}
    rows = convergence_table(
        dist,
        int(cfg["n"]),
        _d_grid(cfg),
        samples=int(cfg["samples"]),
        seed=int(cfg["seed"]),
        workers=int(cfg["workers"]),
        **budgets,
    )
    pred = asymptotic_constant(dist, int(cfg["n"]))
    table = [
        {
            "d": r.d,
            "p": _fmt(r.p),
            "method": r.method,
            "scaled": r.scaled,
            "ratio": r.ratio,
            "standard_error": r.standard_error,
            "note": r.note,
        }
        for r in rows
    ]
    res = {"exponent": str(pred.exponent), "constant": pred.constant.to_json(), "rows": table}
    return res, table


def cmd_volume(cfg):
    _check_n(cfg)
    n = int(cfg["n"])
    dist = load_dist(cfg["dist"]).trimmed()
    if len(dist.support) < 2:
        raise InputError("a single-point support spans no lattice")
    pl = product_lattices(dist.support)
    m = num_pairs(n)
    v1, v2 = pl.lat_x1.fundamental_volume, pl.lat_x2.fundamental_volume
    z2 = volume_ratio_z2(dist.support)
    res = {
        "n": n,
        "m": m,
        "ell": pl.ell,
        "volume": str(v1 ** (m - n) * v2 ** (n - 1)),
        "volume_x1": str(v1),
        "volume_x2": str(v2),
        "ratio": str(v1 / v2),
        "z2": {"hypothesis_met": z2.hypothesis_met, "r": z2.r, "ratio": z2.ratio},
    }
    if cfg["direct"]:
        res["direct_volume"] = str(direct_volume_lat_V(dist.support, n))
    return res, None


def cmd_spectra(cfg):
    _check_n(cfg)
    n = int(cfg["n"])
    check = verify_spectrum(n)
    comps = [{"eigenvalue": c.eigenvalue, "multiplicity": c.multiplicity} for c in eigen_structure(n)]
    res = {
        "n": n,
        "m": num_pairs(n),
        "components": comps,
        "eigen_equations": check.eigen_equations,
        "independent": check.independent,
        "multiplicity_sum": check.multiplicity_sum,
        "incidence_identities": check.incidence_identities,
        "ok": check.ok,
    }
    return res, comps


COMMANDS = {
    "constant": cmd_constant,
    "exact": cmd_exact,
    "mc": cmd_mc,
    "table": cmd_table,
    "volume": cmd_volume,
    "spectra": cmd_spectra,
}


# ---------------------------------------------------------------------------
# Parsing and output


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults (flags override it)")
    common.add_argument("--dist", help="distribution: JSON file, inline JSON object, or 'bernoulli'")
    common.add_argument("-n", type=int, help="number of vectors (>= 3)")
    common.add_argument("--format", choices=["json", "csv", "pretty"])
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--no-timestamp", dest="timestamp", action="store_false", default=None)
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="equidistance", description="Equidistance probabilities of random vectors.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constant", parents=[common], help="asymptotic exponent and constant")
    c.add_argument("--method", choices=["auto", "lattice", "general"])

    e = sub.add_parser("exact", parents=[common], help="p_d by sparse DP convolution")
    e.add_argument("--d", type=int)
    e.add_argument("--mode", choices=["exact", "float"])
    e.add_argument("--budget", type=int, help="maximum stored DP states")

    mc = sub.add_parser("mc", parents=[common], help="seeded Monte Carlo estimate of p_d")
    mc.add_argument("--d", type=int)
    mc.add_argument("--samples", type=int)
    mc.add_argument("--seed", type=int)
    mc.add_argument("--workers", type=int)
    mc.add_argument("--shard-size", dest="shard_size", type=int)

    t = sub.add_parser("table", parents=[common], help="convergence of p_d toward the prediction")
    t.add_argument("--d-list", dest="d_list", help="comma separated d values")
    t.add_argument("--d-max", dest="d_max", type=int)
    t.add_argument("--points", type=int, help="grid size up to --d-max")
    t.add_argument("--samples", type=int, help="Monte Carlo samples for d out of DP reach (0: none)")
    t.add_argument("--seed", type=int)
    t.add_argument("--workers", type=int)
    t.add_argument("--budget", type=int)

    v = sub.add_parser("volume", parents=[common], help="fundamental volume of the lattice of V")
    v.add_argument("--direct", action="store_true", default=None, help="also compute it by SNF of the image")

    sub.add_parser("spectra", parents=[common], help="eigenstructure of the line graph of K_n")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"config: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise InputError("config: expected a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise InputError(f"config: unknown keys {sorted(unknown)}")
        cfg.update(file_cfg)
    for key, val in vars(args).items():
        if key in DEFAULTS and val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    return cfg


def _echo(cfg: dict) -> dict:
    out = dict(cfg)
    if isinstance(out["dist"], str) and out["dist"].strip().startswith("{"):
        out["dist"] = json.loads(out["dist"])
    return out


def _to_csv(rows) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _flat_rows(result: dict, prefix: str = "") -> list[dict]:
    rows = []
    for k, v in result.items():
        if isinstance(v, dict):
            rows += _flat_rows(v, f"{prefix}{k}.")
        elif isinstance(v, list):
            rows.append({"key": prefix + k, "value": json.dumps(v)})
        else:
            rows.append({"key": prefix + k, "value": v})
    return rows


def _pretty(result: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for k, v in result.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_pretty(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}:")
            for item in v:
                lines.append(pad + "  - " + ", ".join(f"{a}={b}" for a, b in item.items()))
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines)


def render(cfg: dict, result: dict, rows) -> str:
    fmt = cfg["format"]
    if fmt == "csv":
        return _to_csv(rows if rows is not None else _flat_rows(result))
    if fmt == "pretty":
        return _pretty(result) + "\n"
    report = {
        "tool": "equidistance",
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "command": cfg["command"],
        "config": _echo(cfg),
        "seed": cfg["seed"],
    }
    if cfg["timestamp"]:
        report["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    report["result"] = result
    return json.dumps(report, indent=2) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        log.info("running %s with n=%s", cfg["command"], cfg["n"])
        result, rows = COMMANDS[args.command](cfg)
    except BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DegenerateDistributionError as exc:
        # tables make no sense for a point mass; report the verdict
        result, rows = {"degenerate": True, "p_d": 1, "message": str(exc)}, None
    except (DistributionSpecError, InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = render(cfg, result, rows)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
