"""
Command line front end and deterministic CSV/JSON writers.

    fanno-periodic <subcommand> --config FILE [--out CSV] [--report JSON] [--tfinal T] [--refine K]

Subcommands: steady, lmax, build-periodic, simulate, stability, xvalidate.
Floats are written with 17 significant digits and timing information is
kept out of the artifacts, so identical inputs give byte-identical files.
Any solver error exits nonzero after printing an error object as JSON.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import stability_harness as harness
from .config import DEFAULTS, SimConfig, default_config, fmt_float, load_config, loads, make_config
from .errors import SolverError, UsageError
from .gas_model import density_from_sound_speed
from .ibvp_solver import InitialData, simulate
from .steady_fanno import NO_CHOKING, max_duct_length

__all__ = [
    "DEFAULTS", "SimConfig", "default_config", "load_config", "loads", "make_config",
    "to_json", "write_csv", "run_subcommand", "main",
]

log = logging.getLogger("fanno_periodic")

SUBCOMMANDS = ("steady", "lmax", "build-periodic", "simulate", "stability", "xvalidate")
LMAX_SENTINEL = "LMAX=inf"


# -- serialization -----------------------------------------------------------


def _clean(obj):
    """Plain JSON-able structure with wall-clock fields removed."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items() if k != "wall_time"}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        # JSON has no inf/nan; they become null
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + _encode(k, indent, level + 1) + ": " + _encode(v, indent, level + 1)
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj, indent=2):
    """Deterministic JSON text (insertion key order, 17 significant digits, trailing LF)."""
    return _encode(_clean(obj), indent, 0) + "\n"


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def csv_text(header, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    for row in zip(*cols):
        w.writerow([fmt_float(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, columns):
    write_text(path, csv_text(header, columns))


# -- subcommands ---------------------------------------------------------------


def _steady(cfg: SimConfig, args):
    prof = cfg.profile(args.refine)
    if args.out:
        write_csv(args.out, ["x", "u_tilde", "c_tilde", "r1_tilde", "r3_tilde"],
                  [prof.x, prof.u, prof.c, prof.r1, prof.r3])
    return {"config": cfg.echo(), "L": prof.L, "n_x": prof.n_x,
            "u_end": float(prof.u[-1]), "c_end": float(prof.c[-1]),
            "min_subsonic_gap": float(np.min(prof.c - prof.u))}


def _lmax(cfg: SimConfig, args):
    L_M = max_duct_length(cfg.gas(), cfg.damping(), cfg.inflow())
    chokes = L_M != NO_CHOKING
    print(f"LMAX={fmt_float(L_M)}" if chokes else LMAX_SENTINEL)
    return {"config": cfg.echo(), "chokes": chokes, "L_M": L_M if chokes else None,
            "sentinel": None if chokes else LMAX_SENTINEL}


def _build(cfg: SimConfig, args):
    s = harness.prepare(cfg, args.refine)
    field, report = harness.build(cfg, s)
    if args.out:
        g = field.grid
        tt, xx = np.meshgrid(g.t, g.x, indexing="ij")
        write_csv(args.out, ["t", "x", "phi1", "phi2", "phi3"], [tt, xx, *field.components])
    return {"config": cfg.echo(), "grid": {"P": s.grid.P, "n_t": s.grid.n_t, "L": s.grid.L, "n_x": s.grid.n_x},
            "report": report.to_dict()}


def _simulate(cfg: SimConfig, args):
    s = harness.prepare(cfg, args.refine)
    field, report = harness.build(cfg, s)
    if cfg["harness.bump_amplitude"] > 0:
        init = harness.bump_initial(cfg, field)
    else:
        init = InitialData.from_periodic(field)
    t_final = args.tfinal if args.tfinal is not None else s.T0
    save = s.T0 / cfg["harness.slices_per_window"]
    traj, cert = simulate(init, s.bc, s.profile, s.gas, t_final, cfl=s.cfl, save_every=save)
    if args.out:
        n, x = len(traj.t), traj.x
        tt = np.repeat(traj.t, traj.n_x)
        xx = np.tile(x, n)
        gas = s.gas
        r1 = traj.data[:, 0, :] + s.profile.r1[None, :]
        r3 = traj.data[:, 2, :] + s.profile.r3[None, :]
        S = traj.data[:, 1, :] + s.profile.S
        u = 0.5 * (r1 + r3)
        c = (r3 - r1) * (gas.gamma - 1.0) / 4.0
        rho = density_from_sound_speed(c, S, gas)
        write_csv(args.out, ["t", "x", "phi1", "phi2", "phi3", "rho", "u", "S"],
                  [tt, xx, traj.data[:, 0, :], traj.data[:, 1, :], traj.data[:, 2, :], rho, u, S])
    return {"config": cfg.echo(), "provenance": init.provenance, "corner_checked": init.corner_checked,
            "t_final": t_final, "n_saved": len(traj.t), "certificate": cert.to_dict(),
            "builder": {"iterations": report.iterations, "residual": report.residual}}


def _stability(cfg: SimConfig, args):
    rep, _ = harness.stability(cfg, args.refine)
    return rep


def _xvalidate(cfg: SimConfig, args):
    return harness.cross_validate(cfg, args.refine)


HANDLERS = {
    "steady": _steady,
    "lmax": _lmax,
    "build-periodic": _build,
    "simulate": _simulate,
    "stability": _stability,
    "xvalidate": _xvalidate,
}


def run_subcommand(name, config: SimConfig, out=None, report=None, tfinal=None, refine=1):
    """Run one subcommand; returns the report dict (also written to ``report`` if given)."""
    if name not in HANDLERS:
        raise UsageError(f"unknown subcommand {name!r}; expected one of {SUBCOMMANDS}")
    if refine < 1:
        raise UsageError("refine must be a positive integer")
    if tfinal is not None and not tfinal > 0:
        raise UsageError("tfinal must be positive")
    args = argparse.Namespace(out=out, report=report, tfinal=tfinal, refine=refine)
    result = HANDLERS[name](config, args)
    if report:
        write_text(report, to_json(result))
    return result


def build_parser():
    p = argparse.ArgumentParser(prog="fanno-periodic", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="flat key = value config file")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--tfinal", type=float, help="simulation horizon (simulate only; default T0)")
    p.add_argument("--refine", type=int, default=1, help="joint grid refinement factor")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        run_subcommand(args.subcommand, cfg, args.out, args.report, args.tfinal, args.refine)
    except SolverError as exc:
        text = to_json(exc.to_dict())
        sys.stdout.write(text)
        if args.report:
            write_text(args.report, text)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
