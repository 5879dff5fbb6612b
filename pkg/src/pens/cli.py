"""Command line entry point ``pens``.

::

    pens run <config|preset> [--override key=value ...] [--out DIR]
    pens fit <csv> --field E --window t0,t1
    pens check <preset> [--override key=value ...]
    pens dump <snapshot>
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .config import ConfigError, override, parse
from .presets import PRESETS


def load_config(source, overrides=()):
    """A preset name or a config file path, with overrides applied."""
    if source in PRESETS:
        text = PRESETS[source]
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError([f"{source!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a file"])
        text = path.read_text()
    config = parse(text)
    return override(config, overrides) if overrides else config


def _cmd_run(args):
    from .runner import kinetic_sweep, run

    config = load_config(args.config, args.override)
    out = Path(args.out) if args.out else None
    if config.run.phase == "kinetic":
        for res in kinetic_sweep(config, out):
            print(f"eps={res.eps:g} deviation={res.deviation[-1]:.6e} err_rho={res.err_rho[-1]:.6e} "
                  f"err_u={res.err_u[-1]:.6e} steps={res.steps}")
        return 0
    result = run(config, out)
    if out is None:
        sys.stdout.write(result.csv_text())
    else:
        print(f"{result.steps} steps to t={result.final_state.t!r}; output in {out}")
    if result.error is not None:
        print(f"run aborted: {result.error['message']}", file=sys.stderr)
        return 1
    return 0


def _cmd_fit(args):
    from .diagnostics import fit_decay

    data = fileio.read_timeseries(args.csv)
    if args.field not in data:
        print(f"no column {args.field!r} in {args.csv}; columns: {', '.join(data)}", file=sys.stderr)
        return 2
    window = None
    if args.window:
        t0, t1 = (float(x) for x in args.window.split(","))
        window = (t0, t1)
    fit = fit_decay(data["t"], data[args.field], window, args.field)
    print(f"field={fit.field} window={fit.window[0]:g},{fit.window[1]:g} alpha={fit.alpha:.6f} "
          f"C={fit.constant:.6e} residual={fit.residual:.3e} points={fit.npoints}")
    return 0


def _cmd_check(args):
    from .acceptance import check_preset

    if args.preset not in PRESETS:
        print(f"unknown preset {args.preset!r}; choose from {', '.join(sorted(PRESETS))}", file=sys.stderr)
        return 2
    config = load_config(args.preset, args.override)
    checks = check_preset(args.preset, config)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


def _cmd_dump(args):
    raw = Path(args.snapshot).read_bytes()
    if raw[:6] == fileio.KINETIC_MAGIC:
        snap = fileio.read_kinetic_snapshot(args.snapshot)
        f = snap["f"]
        print(f"kinetic snapshot nx={snap['nx']} nxi={snap['nxi']} L={snap['length']!r} "
              f"xi_max={snap['xi_max']!r} eps={snap['eps']!r} t={snap['t']!r}")
        print(f"f: min={f.min():.6e} max={f.max():.6e} sum={f.sum():.6e}")
        return 0
    snap = fileio.parse_snapshot(raw)
    print(f"snapshot d={snap.dim} N={list(snap.n)} L={list(snap.length)} t={snap.t!r}")
    for name, arr in (("rho", snap.rho), *((f"m[{i}]", c) for i, c in enumerate(snap.m)),
                      *((f"v[{i}]", c) for i, c in enumerate(snap.v))):
        print(f"{name}: min={np.min(arr):.6e} max={np.max(arr):.6e} mean={np.mean(arr):.6e}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="pens", description="Pressureless Euler / Navier-Stokes two-phase solver")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a config file or preset")
    r.add_argument("config", help="config path or preset name")
    r.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--out", help="output directory (CSV goes to stdout when omitted)")
    r.set_defaults(func=_cmd_run)

    f = sub.add_parser("fit", help="fit a power-law decay to a CSV column")
    f.add_argument("csv")
    f.add_argument("--field", default="E")
    f.add_argument("--window", help="t0,t1")
    f.set_defaults(func=_cmd_fit)

    c = sub.add_parser("check", help="run a preset and assert its acceptance thresholds")
    c.add_argument("preset")
    c.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    c.set_defaults(func=_cmd_check)

    d = sub.add_parser("dump", help="summarize a binary snapshot")
    d.add_argument("snapshot")
    d.set_defaults(func=_cmd_dump)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
