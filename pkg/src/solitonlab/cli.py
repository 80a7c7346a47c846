"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import io
from .effective import (EffectiveState, integrate_effective, oscillation_period,
                        turning_point)
from .errors import ConfigError, NumericalError
from .experiments import (PRESETS, RunSpec, _classical_energy, _effective_rhs,
                          preset_specs, run_comparison, run_scaling, run_specs)
from .grid import h1_norm
from .solver import evolve
from .spectral import constant_table

log = logging.getLogger("solitonlab")

# flag name -> RunSpec field
FLAG_FIELDS = {"dt": "dt", "grid_n": "grid_n", "grid_l": "grid_l", "t_final": "t_final",
               "q": "q", "v0": "v0", "a0": "a0", "potential": "potential", "h": "h"}
SPEC_FIELDS = {f.name for f in fields(RunSpec)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file overriding any run field")
    p.add_argument("--out-dir", type=Path, default=Path("out"))
    p.add_argument("--formats", default="csv,json,svg",
                   help="comma separated subset of csv,json,svg")
    p.add_argument("--dt", type=float)
    p.add_argument("--grid-n", type=int)
    p.add_argument("--grid-l", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--v0", type=float)
    p.add_argument("--a0", type=float)
    p.add_argument("--potential", choices=["delta", "sech2slow"])
    p.add_argument("--h", type=float)
    p.add_argument("--precision", choices=["double", "extended"],
                   help="floating point format of the PDE state (default extended)")
    p.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="solitonlab",
                     description="Soliton / impurity simulations and effective dynamics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in (("simulate", "run the PDE and record mass/energy"),
                           ("effective", "integrate the effective ODE only"),
                           ("compare", "PDE versus effective dynamics"),
                           ("spectral", "linearized-operator constants"),
                           ("period", "closed-form period or turning point"),
                           ("scaling", "error size against |q|")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        if name == "scaling":
            p.add_argument("--q-list", default="-0.01,-0.0025")
            p.add_argument("--delta", type=float, default=1.0)
            p.add_argument("--budget", type=float, default=200.0)
    p = sub.add_parser("preset", help="run a named experiment")
    p.add_argument("name", choices=PRESETS)
    _common(p)
    return parser


def _load_overrides(args) -> dict:
    over = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - SPEC_FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        over.update(data)
    if getattr(args, "precision", None) is not None:
        over["extended_precision"] = args.precision == "extended"
    for flag, name in FLAG_FIELDS.items():
        val = getattr(args, flag, None)
        if val is not None:
            over[name] = val
    return over


def _apply(spec: RunSpec, over: dict) -> RunSpec:
    try:
        return spec.with_(**over).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _formats(args) -> list:
    fm = [f.strip() for f in args.formats.split(",") if f.strip()]
    bad = [f for f in fm if f not in io.FORMATS]
    if bad:
        raise ConfigError(f"unknown formats {bad}")
    return fm


def _report_line(label: str, summary: dict) -> str:
    keys = ("sup_h1_err", "sup_w_h1", "sup_abs_a_diff", "measured_period_pde",
            "turning_measured", "turning_predicted", "first_cycle_dev_effective",
            "first_cycle_dev_newton")
    parts = [f"{k}={summary[k]:.6g}" for k in keys
             if isinstance(summary.get(k), float)]
    return f"{label}: " + " ".join(parts)


def cmd_simulate(args, over) -> None:
    spec = _apply(RunSpec(label="simulate"), over)
    cfg = spec.sim_config()
    snaps = evolve(cfg)
    x = cfg.grid.x
    cols = {
        "t": np.array([s.t for s in snaps]),
        "mass": np.array([s.mass for s in snaps]),
        "H_q": np.array([s.energy for s in snaps]),
        "centroid": np.array([float(np.sum(x * np.abs(s.field.samples) ** 2)
                                    / np.sum(np.abs(s.field.samples) ** 2)) for s in snaps]),
        "peak": np.array([float(np.max(np.abs(s.field.samples))) for s in snaps]),
        "h1_norm": np.array([h1_norm(s.field) for s in snaps]),
    }
    fm = _formats(args)
    if "csv" in fm:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        io.write_csv(Path(args.out_dir) / f"{spec.label}.csv", cols)
    if "json" in fm:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        io.write_json(Path(args.out_dir) / f"{spec.label}.json",
                      {"meta": {"spec": asdict(spec), "version": io.package_version()}})
    print(f"{spec.label}: steps={cfg.num_steps} mass_drift_rel="
          f"{abs(cols['mass'][-1] - cols['mass'][0]) / cols['mass'][0]:.3g}")


def cmd_effective(args, over) -> None:
    spec = _apply(RunSpec(label="effective"), over)
    V = spec.potential_spec()
    s0 = EffectiveState(spec.a0, spec.v0, spec.a0 * spec.v0, 1.0)
    tr = integrate_effective(s0, _effective_rhs(V), spec.t_final, spec.eff_dt,
                             label=spec.label, stride=max(1, int(round(1.0 / spec.eff_dt))))
    cols = {"t": tr.t, "a": tr.a, "v": tr.v, "gamma": tr.gamma, "mu": tr.mu,
            "classical_energy": _classical_energy(tr.a, tr.v, V)}
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    if "csv" in _formats(args):
        io.write_csv(Path(args.out_dir) / f"{spec.label}.csv", cols)
    if "json" in _formats(args):
        io.write_json(Path(args.out_dir) / f"{spec.label}.json",
                      {"meta": {"spec": asdict(spec), "version": io.package_version()}})
    print(f"{spec.label}: a(T)={tr.a[-1]:.10g} v(T)={tr.v[-1]:.10g}")


def cmd_compare(args, over) -> None:
    spec = _apply(RunSpec(label="compare"), over)
    report = run_comparison(spec)
    io.emit(report, args.out_dir, _formats(args))
    print(_report_line(spec.label, report.summary))


def cmd_spectral(args, over) -> None:
    rows = constant_table()
    io.emit_table(rows, args.out_dir, "spectral_constants", _formats(args))
    for r in rows:
        print(f"{r['quantity']:>24s}  closed={r['closed_form']:.12g}  computed={r['computed']:.12g}")


def cmd_period(args, over) -> None:
    spec = RunSpec().with_(**over)
    q, a0, v0 = spec.q, spec.a0, spec.v0
    try:
        if q < 0:
            print(f"period(a0={a0:g}, q={q:g}) = {oscillation_period(a0, q):.12g}")
        else:
            turn = turning_point(v0, q)
            print("pass-over (v >= sqrt(q))" if turn is None
                  else f"turning point |a| = {turn:.12g}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_scaling(args, over) -> None:
    try:
        q_list = [float(s) for s in args.q_list.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --q-list: {exc}") from exc
    base = _apply(preset_specs("fig1")[0], {k: v for k, v in over.items() if k != "q"})
    summary, reports = run_scaling(q_list, args.delta, args.budget, base, args.workers)
    fm = _formats(args)
    for r in reports:
        io.emit(r, args.out_dir, fm)
    io.write_json(Path(args.out_dir) / "scaling_summary.json", summary.as_dict())
    print(json.dumps(summary.as_dict()))


def cmd_preset(args, over) -> None:
    if args.name == "spectral-table":
        cmd_spectral(args, over)
        return
    if args.name == "scaling":
        args.q_list = ",".join(str(s.q) for s in preset_specs("scaling"))
        args.delta, args.budget = 1.0, 200.0
        cmd_scaling(args, over)
        return
    specs = [_apply(s, over) for s in preset_specs(args.name)]
    reports = run_specs(specs, args.workers)
    for spec, report in zip(specs, reports):
        io.emit(report, args.out_dir, _formats(args), extra_meta={"preset": args.name})
        print(_report_line(spec.label, report.summary))


COMMANDS = {"simulate": cmd_simulate, "effective": cmd_effective, "compare": cmd_compare,
            "spectral": cmd_spectral, "period": cmd_period, "scaling": cmd_scaling,
            "preset": cmd_preset}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        over = _load_overrides(args)
        COMMANDS[args.command](args, over)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        # unwritable output directory and the like are configuration problems
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
