"""Command-line interface.

Exit codes: 0 success, 1 configuration/usage/IO error, 2 numerical
failure, 3 verification failure (``verify`` only).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalError, OmitChainError, UnknownPreset
from .model import FIG5_V_VALUES, PRESET_NAMES, model_to_dict, preset
from .serialize import config_from_dict, csv_text, dumps, load_config, write_atomic
from .spectra import (
    DDI_GRID,
    WINDOW_GRID,
    compare_methods,
    fano_fit,
    find_windows,
    fit_extra_resonance,
    sweep,
    track_resonances,
)
from .steady_state import solve_steady
from .verification import run_oracle_trials

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3

_ATOM_PRESETS = ("fig5", "fig6", "fig7", "fig8")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _v_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad V list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="omit-chain", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, default_preset=None):
        src = sp.add_mutually_exclusive_group(required=default_preset is None)
        src.add_argument("--config", metavar="PATH")
        src.add_argument("--preset", metavar="NAME", default=default_preset,
                         help=f"one of {', '.join(PRESET_NAMES)}")
        sp.add_argument("--v", type=float, default=None, help="DDI strength for fig5..fig8")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--manifest", metavar="PATH", help="default: OUT.manifest.json")

    def grid(sp, x_min, x_max, points):
        sp.add_argument("--x-min", type=float, default=x_min)
        sp.add_argument("--x-max", type=float, default=x_max)
        sp.add_argument("--points", type=int, default=points)
        sp.add_argument("--units", choices=("kappa_N", "g_m"), default="kappa_N")

    def variant(sp):
        sp.add_argument("--atom-variant", choices=("full", "reduced", "none"), default=None)

    sp = sub.add_parser("spectrum", help="probe response on a detuning grid")
    common(sp)
    grid(sp, *WINDOW_GRID)
    sp.add_argument("--method", choices=("cf", "direct", "both"), default="cf")
    variant(sp)

    sp = sub.add_parser("windows", help="transparency dips of a spectrum")
    common(sp)
    grid(sp, *WINDOW_GRID)
    sp.add_argument("--method", choices=("cf", "direct"), default="cf")
    variant(sp)

    sp = sub.add_parser("sweep-ddi", help="track extra dips against the atom-free twin over V")
    common(sp)
    grid(sp, *DDI_GRID)
    sp.add_argument("--v-list", type=_v_list, default=list(FIG5_V_VALUES))
    variant(sp)

    sp = sub.add_parser("fano", help="Fano fit of an extra resonance or a spectrum slice")
    common(sp, default_preset="fig5")
    sp.add_argument("--side", choices=("left", "right"), default="right")
    sp.add_argument("--x-min", type=float, default=None, help="fit this slice instead of a tracked dip")
    sp.add_argument("--x-max", type=float, default=None)
    sp.add_argument("--points", type=int, default=2001)
    sp.add_argument("--units", choices=("kappa_N", "g_m"), default="kappa_N")

    sp = sub.add_parser("steady", help="control-field steady state")
    common(sp)
    sp.add_argument("--delta-cavity", type=float, default=None,
                    help="cavity-control detuning for every cavity (default: omega_m)")

    sp = sub.add_parser("verify", help="randomised continued-fraction vs direct-solve check")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--points", type=int, default=64)
    sp.add_argument("--atom-trials", type=int, default=0)
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--format", choices=("csv", "json"), default=None)
    sp.add_argument("--manifest", metavar="PATH")

    sp = sub.add_parser("replay", help="re-run a manifest")
    sp.add_argument("manifest_path", metavar="MANIFEST")
    sp.add_argument("--out", metavar="PATH", help="override the recorded output path")
    return p


# --------------------------------------------------------------------------
# model resolution
# --------------------------------------------------------------------------

def _resolve_model(args):
    if getattr(args, "config_dict", None) is not None:
        return config_from_dict(args.config_dict)
    if args.config:
        try:
            model = load_config(args.config)
        except (json.JSONDecodeError, TypeError, AttributeError) as exc:
            raise ConfigError([("config", f"unreadable: {exc}")])
        if args.v is not None:
            if model.atom is None:
                raise ConfigError([("v", "config has no atom")])
            model = model.with_atom(V=args.v)
        return model
    name = args.preset.lower()
    if args.v is not None and name not in _ATOM_PRESETS:
        raise ConfigError([("v", f"preset {args.preset} has no atom")])
    return preset(name, V=0.0 if args.v is None else args.v)


# --------------------------------------------------------------------------
# commands: each returns (text, exit_code)
# --------------------------------------------------------------------------

def _cmd_spectrum(args, model, fmt_):
    s = sweep(model, args.x_min, args.x_max, args.points, args.method, args.atom_variant, args.units)
    cols = {"x": s.grid}
    if s.method == "direct":
        cols["re_direct"], cols["im_direct"] = s.values.real, s.values.imag
    else:
        cols["re_cf"], cols["im_cf"] = s.values.real, s.values.imag
        if s.direct is not None:
            cols["re_direct"], cols["im_direct"] = s.direct.real, s.direct.imag
    if fmt_ == "csv":
        return csv_text(list(cols), zip(*cols.values())), EXIT_OK
    meta = {"units": s.units, "method": s.method,
            "variant": None if s.variant is None else s.variant.value}
    meta.update({k: list(v) for k, v in cols.items()})
    return dumps(meta) + "\n", EXIT_OK


def _dips_payload(report):
    return [{"x0": d.x0, "depth": d.depth, "prominence": d.prominence, "width": d.width}
            for d in report.dips]


def _cmd_windows(args, model, fmt_):
    s = sweep(model, args.x_min, args.x_max, args.points, args.method, args.atom_variant, args.units)
    rep = find_windows(s)
    if fmt_ == "csv":
        rows = [(d.x0, d.depth, d.prominence, d.width) for d in rep.dips]
        return csv_text(["x0", "depth", "prominence", "width"], rows), EXIT_OK
    return dumps({"units": rep.units, "count": len(rep), "dips": _dips_payload(rep)}) + "\n", EXIT_OK


def _cmd_sweep_ddi(args, model, fmt_):
    if model.atom is None:
        raise ConfigError([("atom", "sweep-ddi needs a model with an atom")])
    tr = track_resonances(model, args.v_list, None, args.x_min, args.x_max, args.points,
                          args.atom_variant, args.units)
    if fmt_ == "csv":
        rows = []
        for p in tr.points:
            for x0 in p.extra:
                side = "left" if x0 == p.left else "right" if x0 == p.right else "other"
                rows.append((p.V, x0, side))
        return csv_text(["V", "x0", "side"], rows), EXIT_OK
    payload = {
        "units": tr.units,
        "baseline": list(tr.baseline.positions),
        "points": [
            {"V": p.V, "n_extra": p.n_extra, "extra": list(p.extra), "left": p.left, "right": p.right,
             "dips": _dips_payload(p.report)}
            for p in tr.points
        ],
    }
    return dumps(payload) + "\n", EXIT_OK


def _cmd_fano(args, model, fmt_):
    if args.x_min is not None or args.x_max is not None:
        if args.x_min is None or args.x_max is None:
            raise ConfigError([("x-min/x-max", "give both ends of the slice")])
        s = sweep(model, args.x_min, args.x_max, args.points, "cf", None, args.units)
        fit = fano_fit(s.grid, s.values.real)
    else:
        if model.atom is None:
            raise ConfigError([("atom", "tracked Fano fit needs a model with an atom")])
        V = model.atom.V
        fit = fit_extra_resonance(model, V, args.side, n_points=args.points, units=args.units)
    fields_ = ("x0", "gamma_w", "q", "amplitude", "offset", "rms_residual")
    if fmt_ == "csv":
        return csv_text(list(fields_), [[getattr(fit, f) for f in fields_]]), EXIT_OK
    return dumps({f: getattr(fit, f) for f in fields_}) + "\n", EXIT_OK


def _cmd_steady(args, model, fmt_):
    st = solve_steady(model, args.delta_cavity)
    if fmt_ == "csv":
        rows = [(j + 1, c.real, c.imag, lam, dt)
                for j, (c, lam, dt) in enumerate(zip(st.c_bar, st.lambda_bar, st.delta_tilde))]
        return csv_text(["cavity", "re_c_bar", "im_c_bar", "lambda_bar", "delta_tilde"], rows), EXIT_OK
    payload = {
        "re_c_bar": list(st.c_bar.real),
        "im_c_bar": list(st.c_bar.imag),
        "lambda_bar": list(st.lambda_bar),
        "delta_tilde": list(st.delta_tilde),
        "residual": st.residual,
        "iterations": st.iterations,
    }
    return dumps(payload) + "\n", EXIT_OK


def _cmd_verify(args, model, fmt_):
    rep = run_oracle_trials(args.trials, args.seed, args.tol, args.points, args.atom_trials)
    code = EXIT_OK if rep.passed else EXIT_VERIFY
    if fmt_ == "csv":
        rows = [(t.trial, t.n, int(t.atom), t.max_rel, t.max_reflection) for t in rep.trials]
        return csv_text(["trial", "n", "atom", "max_rel", "max_reflection"], rows), code
    payload = {
        "trials": len(rep.trials),
        "seed": rep.seed,
        "tol": rep.tol,
        "max_rel": rep.max_rel,
        "max_reflection": rep.max_reflection,
        "failures": list(rep.failures),
        "passed": rep.passed,
    }
    return dumps(payload) + "\n", code


_COMMANDS = {
    "spectrum": (_cmd_spectrum, "csv"),
    "windows": (_cmd_windows, "json"),
    "sweep-ddi": (_cmd_sweep_ddi, "json"),
    "fano": (_cmd_fano, "json"),
    "steady": (_cmd_steady, "json"),
    "verify": (_cmd_verify, "json"),
}

_NOT_OPTIONS = {"command", "config", "preset", "v", "out", "manifest", "config_dict", "manifest_path"}


def _manifest(args, model, out):
    options = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_OPTIONS}
    return {
        "tool": "omit-chain",
        "version": __version__,
        "command": args.command,
        "options": options,
        "preset": getattr(args, "preset", None),
        "config": None if model is None else model_to_dict(model),
        "seed": getattr(args, "seed", None),
        "outputs": [out],
    }


def _run(args, stdout) -> int:
    func, default_fmt = _COMMANDS[args.command]
    fmt_ = args.format or default_fmt
    model = None if args.command == "verify" else _resolve_model(args)
    text, code = func(args, model, fmt_)
    if args.out:
        write_atomic(args.out, text)
        manifest_path = args.manifest or f"{args.out}.manifest.json"
        if not getattr(args, "no_manifest", False):
            write_atomic(manifest_path, dumps(_manifest(args, model, args.out)) + "\n")
    else:
        stdout.write(text)
    return code


def _replay(args, stdout) -> int:
    try:
        with open(args.manifest_path, encoding="utf-8") as fh:
            m = json.load(fh)
        command = m["command"]
        options = dict(m["options"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError([("manifest", f"unreadable: {exc}")])
    if command not in _COMMANDS:
        raise ConfigError([("manifest.command", f"unknown command {command!r}")])
    ns = argparse.Namespace(**options)
    ns.command = command
    ns.config = None
    ns.preset = None
    ns.v = None
    ns.config_dict = m.get("config")
    outputs = m.get("outputs") or [None]
    ns.out = args.out or outputs[0]
    ns.manifest = None
    ns.no_manifest = True
    return _run(ns, stdout)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_CONFIG
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        if args.command == "replay":
            return _replay(args, stdout)
        return _run(args, stdout)
    except (ConfigError, UnknownPreset) as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        stderr.write(f"io error: {exc}\n")
        return EXIT_CONFIG
    except NumericalError as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except OmitChainError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
