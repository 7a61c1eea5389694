"""Command-line driver.

    python -m mottcdw landau --ul 0.7
    python -m mottcdw spectrum --ul 0.4 --alpha 0.5 --k 10
    python -m mottcdw wkb --ul 0.6 --alpha 0.3 --k 2000
    python -m mottcdw sweep --grid 0.3:0.7:41,0:1:5 --k 200 --out pd.csv
    python -m mottcdw oracle --geometry ring --k 8
    python -m mottcdw hysteresis --ul-from 0.2 --ul-to 0.7

Couplings are given in units of ``U_s``: ``--ul`` is ``U_l/U_s`` and
``--alpha`` is ``alpha/U_s``.  Results go to stdout as JSON unless ``--out``
is given.  Failures exit nonzero with a JSON error object on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import oracles
from .errors import DomainError, MottCDWError, NumericError
from .model import ModelParams, classify_landscape
from .qspace import solve
from .sweep import OBSERVABLES, Range, SweepConfig, hysteresis_protocol, run_sweep, write_table
from .wkb import barrier_analysis, tunneling_action

# keys a --config file may set; command-line flags win over the file
DEFAULTS = {
    "ul": 0.4, "alpha": 0.0, "k": 200, "rho": 1.0, "z": 4, "grid": None,
    "out": None, "format": "csv", "workers": 1, "m": 3,
    "observables": ",".join(OBSERVABLES),
    "geometry": "ring", "width": None, "periodic": False, "kind": "aq",
    "cap": None, "j": 0.0,
    "ul_from": None, "ul_to": None,
}

EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_OTHER = 2, 3, 4, 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _clean(obj):
    """Make results JSON-safe: arrays to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _emit(payload, out: str | None):
    text = json.dumps(_clean(payload), indent=2, sort_keys=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _params(opts, alpha=None) -> ModelParams:
    a = opts["alpha"] if alpha is None else alpha
    return ModelParams.from_ratios(opts["ul"], a, int(opts["k"]), z=int(opts["z"]),
                                   rho=float(opts["rho"]))


# ---------------------------------------------------------------- commands

def cmd_landau(opts):
    params = _params(opts)
    n_grid = int(opts["grid"]) if opts["grid"] is not None else 401
    curve = classify_landscape(params, n_grid)
    payload = {
        "u_l": params.u_l, "rho": params.rho, "phase": curve.phase,
        "extrema": [asdict(e) for e in curve.extrema],
        "theta": curve.theta_grid, "f": curve.f_values,
    }
    _emit(payload, opts["out"])


def cmd_spectrum(opts):
    params = _params(opts)
    res = solve(params, m=int(opts["m"]))
    payload = {
        "u_l": params.u_l, "alpha": params.alpha, "k_sites": params.k_sites,
        "energies": res.energies, "degenerate": res.degenerate,
        "observables": asdict(res.observables),
    }
    _emit(payload, opts["out"])


def cmd_wkb(opts):
    params = _params(opts)
    prof = barrier_analysis(params)
    tun = tunneling_action(params) if params.alpha > 0 else None
    payload = {
        "u_l": params.u_l, "alpha": params.alpha, "k_sites": params.k_sites,
        "phase": prof.phase, "q_star": prof.q_star, "barrier": asdict(prof.barrier),
        "barrier_per_site": prof.barrier.height / (params.k_sites * params.u_s),
        "grid_height": prof.grid_height, "turning_points": prof.turning_points,
        "action": prof.action,
        "log_tunneling": (tun.log_probability if tun else
                          (-math.inf if prof.barrier.exists else 0.0)),
        "log10_lifetime": tun.log10_lifetime if tun else None,
        "lifetime_prefactor_known": False,
    }
    _emit(payload, opts["out"])


def _parse_grid(text):
    if isinstance(text, dict):
        return Range.parse(text["u_l"]), Range.parse(text["alpha"])
    if not isinstance(text, str) or "," not in text:
        raise DomainError("--grid must look like UL_MIN:UL_MAX:N,A_MIN:A_MAX:N")
    ul, al = text.split(",", 1)
    return Range.parse(ul), Range.parse(al)


def cmd_sweep(opts):
    if opts["grid"] is None:
        raise DomainError("sweep needs --grid UL_MIN:UL_MAX:N,A_MIN:A_MAX:N")
    ul, al = _parse_grid(opts["grid"])
    obs = opts["observables"]
    if isinstance(obs, str):
        obs = tuple(o for o in obs.split(",") if o)
    cfg = SweepConfig(ul, al, k_sites=int(opts["k"]), observables=tuple(obs),
                      out=opts["out"], fmt=opts["format"], workers=int(opts["workers"]),
                      z=int(opts["z"]))
    points = run_sweep(cfg)
    if cfg.out:
        write_table(points, cfg.out, cfg.fmt)
    else:
        from .sweep import to_csv, to_json
        sys.stdout.write(to_csv(points) if cfg.fmt == "csv" else to_json(points))


def cmd_oracle(opts):
    graph = oracles.lattice.from_name(opts["geometry"], int(opts["k"]), opts["width"],
                                      bool(opts["periodic"]))
    rows = []
    kind = opts["kind"]
    if kind == "aq":
        tables = [oracles.aq_by_matching(graph)]
        if graph.n_sites <= oracles.normalization.MAX_OPERATOR_SITES:
            tables.append(oracles.aq_by_operator(graph))
            tables.append(oracles.aq_by_operator(graph, direction="odd"))
        for t in tables:
            for q, v in sorted(t.values.items()):
                rows.append({"geometry": t.geometry, "K": t.n_sites, "Q": q,
                             "method": t.method, "A": v, "support": t.support.get(q)})
        if opts["geometry"] == "kbip":
            for q in range(0, graph.n_sites + 1, 2):
                rows.append({"geometry": graph.geometry, "K": graph.n_sites, "Q": q,
                             "method": "distorted-formula",
                             "A": oracles.aq_distorted(graph.n_sites, q)})
    elif kind == "ed":
        params = ModelParams.from_ratios(opts["ul"], opts["alpha"], graph.n_sites,
                                         z=4, rho=float(opts["rho"]))
        if opts["j"]:
            params = params.replace(j=float(opts["j"]))
        cap = opts["cap"]
        res = oracles.exact_diagonalize(graph, params, None if cap is None else int(cap))
        rows.append({"geometry": graph.geometry, "K": graph.n_sites, "j": params.j,
                     "u_l": params.u_l, "occupation_cap": res.occupation_cap,
                     "dimension": res.basis.dim, "energy": res.energy})
    elif kind == "elements":
        rep = oracles.matrix_element_check(graph.n_sites)
        for q, v in sorted(rep.elements.items()):
            rows.append({"geometry": f"kbip{graph.n_sites}", "K": graph.n_sites, "Q": q,
                         "element": v,
                         "expected": math.sqrt(2) * (graph.n_sites - q) * (q + 2)
                         / graph.n_sites**2})
    else:
        raise DomainError(f"unknown oracle kind {kind!r}")
    _emit(rows, opts["out"])


def cmd_hysteresis(opts):
    a = float(opts["alpha"])
    u_from = opts["ul_from"] if opts["ul_from"] is not None else opts["ul"]
    if opts["ul_to"] is None:
        raise DomainError("hysteresis needs --ul-to")
    p_from = ModelParams.from_ratios(float(u_from), a, int(opts["k"]), z=int(opts["z"]))
    p_to = ModelParams.from_ratios(float(opts["ul_to"]), a, int(opts["k"]), z=int(opts["z"]))
    rep = hysteresis_protocol(p_from, p_to)
    _emit({"forward": asdict(rep.forward), "backward": asdict(rep.backward),
           "asymmetric": rep.asymmetric}, opts["out"])


COMMANDS = {
    "landau": cmd_landau, "spectrum": cmd_spectrum, "wkb": cmd_wkb,
    "sweep": cmd_sweep, "oracle": cmd_oracle, "hysteresis": cmd_hysteresis,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with default option values")
    common.add_argument("--ul", type=float, help="U_l / U_s")
    common.add_argument("--alpha", type=float, help="alpha / U_s, alpha = 2 sqrt(2) z J")
    common.add_argument("--k", type=int, help="number of lattice sites K (even)")
    common.add_argument("--rho", type=float, help="filling N/K")
    common.add_argument("--z", type=int, help="coordination number")
    common.add_argument("--grid", help="landau: number of theta points; "
                        "sweep: UL_MIN:UL_MAX:N,A_MIN:A_MAX:N")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], help="sweep table format")
    common.add_argument("--workers", type=int, help="sweep worker processes")

    parser = _Parser(prog="mottcdw", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("landau", parents=[common], help="zero-hopping free energy and extrema")
    p = sub.add_parser("spectrum", parents=[common], help="imbalance-space ground state")
    p.add_argument("--m", type=int, help="number of eigenvalues")
    sub.add_parser("wkb", parents=[common], help="barrier and tunnelling action")
    p = sub.add_parser("sweep", parents=[common], help="phase-diagram grid")
    p.add_argument("--observables", help="comma list, subset of " + ",".join(OBSERVABLES))
    p = sub.add_parser("oracle", parents=[common], help="brute-force reference values")
    p.add_argument("--kind", choices=["aq", "ed", "elements"])
    p.add_argument("--geometry", choices=["dimer", "ring", "rect", "kbip"])
    p.add_argument("--width", type=int, help="rect: sites along the second axis")
    p.add_argument("--periodic", action="store_true", default=None)
    p.add_argument("--cap", type=int, help="ed: maximum occupation per site")
    p.add_argument("--j", type=float, help="ed: hopping J/U_s (overrides --alpha)")
    p = sub.add_parser("hysteresis", parents=[common], help="quench there and back")
    p.add_argument("--ul-from", dest="ul_from", type=float)
    p.add_argument("--ul-to", dest="ul_to", type=float)
    return parser


def resolve_options(ns: argparse.Namespace) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    opts = dict(DEFAULTS)
    if ns.config:
        with open(ns.config, encoding="utf-8") as fh:
            conf = json.load(fh)
        if not isinstance(conf, dict):
            raise DomainError("config file must hold a JSON object")
        unknown = set(conf) - set(DEFAULTS)
        if unknown:
            raise DomainError(f"unknown config keys {sorted(unknown)}")
        opts.update(conf)
    for key, value in vars(ns).items():
        if key in ("command", "config") or value is None:
            continue
        opts[key] = value
    return opts


def _fail(kind: str, message: str, code: int, **extra) -> int:
    err = {"error": kind, "message": message}
    err.update(extra)
    sys.stderr.write(json.dumps(_clean(err)) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        opts = resolve_options(ns)
        COMMANDS[ns.command](opts)
    except UsageError as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)
    except NumericError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERIC,
                     diagnostics={k: repr(v) for k, v in exc.diagnostics.items()})
    except MottCDWError as exc:
        extra = {}
        if hasattr(exc, "u_l"):
            extra = {"u_l": exc.u_l, "alpha": exc.alpha, "cause": exc.cause_type}
        return _fail(type(exc).__name__, str(exc), EXIT_DOMAIN, **extra)
    except (OSError, json.JSONDecodeError, ValueError, TypeError, KeyError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_OTHER)
    return 0


if __name__ == "__main__":
    sys.exit(main())
