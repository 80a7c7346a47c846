"""Experiment pipeline: evolve the PDE, decompose every snapshot, integrate
the effective dynamics from the same initial data, and tabulate both.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .effective import (EffectiveState, integrate_effective, measured_period,
                        rhs_bare_newton, rhs_delta, rhs_general, turning_point)
from .errors import ConfigError
from .grid import GridSpec, h1_norm
from .hamiltonians import PotentialSpec, sech2_slow, smoothed_potential
from .modulation import h1_error_to_soliton, mu_from_residual, track
from .solver import SimConfig, evolve, paper_initial

log = logging.getLogger(__name__)

COLUMNS = ("t", "a_pde", "v_pde", "gamma_pde", "gamma_pde_mod2pi", "mu_pde",
           "a_eff", "v_eff", "gamma_eff", "h1_err", "w_h1", "mass", "H_q",
           "classical_energy")

POTENTIALS = ("delta", "sech2slow", "none")


@dataclass(frozen=True)
class RunSpec:
    """Flat, JSON-friendly description of one PDE-versus-effective comparison."""

    label: str = "run"
    potential: str = "delta"
    q: float = -0.01
    h: float = 0.2
    a0: float = -3.0
    v0: float = 0.0
    t_final: float = 10.0
    dt: float = 1e-3
    grid_n: int = 2048
    grid_l: float = 30.0
    snapshot_stride: int = 1000
    eff_dt: float = 0.01
    # first-cycle window length for slowly varying runs; 0 means "measure it"
    window: float = 0.0
    # long double state for long runs: keeps the mass drift below 1e-10
    extended_precision: bool = True

    def validate(self) -> "RunSpec":
        if self.potential not in POTENTIALS:
            raise ConfigError(f"potential must be one of {POTENTIALS}, got {self.potential!r}")
        if self.potential == "sech2slow" and not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if not self.eff_dt > 0:
            raise ConfigError(f"eff_dt must be positive, got {self.eff_dt}")
        if self.grid_n < 16 or self.grid_n % 2:
            raise ConfigError(f"grid_n must be an even integer >= 16, got {self.grid_n}")
        try:
            cfg = self.sim_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if cfg.num_steps % self.snapshot_stride:
            raise ConfigError(
                f"t_final/dt = {cfg.num_steps} steps is not a multiple of "
                f"snapshot_stride = {self.snapshot_stride}")
        return self

    @property
    def grid(self) -> GridSpec:
        return GridSpec(float(self.grid_l), int(self.grid_n))

    def potential_spec(self, grid: Optional[GridSpec] = None) -> PotentialSpec:
        grid = grid or self.grid
        if self.potential == "delta":
            return PotentialSpec.delta(self.q)
        if self.potential == "sech2slow":
            return sech2_slow(self.h, grid)
        return PotentialSpec.none()

    def sim_config(self) -> SimConfig:
        grid = self.grid
        return SimConfig(grid=grid, potential=self.potential_spec(grid), dt=float(self.dt),
                         t_final=float(self.t_final),
                         snapshot_stride=int(self.snapshot_stride),
                         initial=paper_initial(self.a0, self.v0),
                         extended_precision=bool(self.extended_precision))

    @property
    def snapshot_interval(self) -> float:
        return self.snapshot_stride * self.dt

    def with_(self, **changes) -> "RunSpec":
        return replace(self, **changes)


@dataclass
class ComparisonReport:
    columns: dict
    summary: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"column lengths differ: {lengths}")
        t = np.asarray(self.columns.get("t", []))
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("t must be strictly increasing")

    @property
    def names(self) -> list:
        return list(self.columns)

    def __len__(self):
        return len(self.columns["t"])

    def __getitem__(self, name) -> np.ndarray:
        return self.columns[name]


def _effective_rhs(V: PotentialSpec):
    if V.kind == "sampled":
        return lambda y: rhs_general(y, V)
    q = V.q if V.kind == "delta" else 0.0
    return lambda y: rhs_delta(y, q)


def _classical_energy(a, v, V: PotentialSpec) -> np.ndarray:
    """``v²/2 + C(a)/2`` with ``C`` the potential smoothed against ``sech²``."""
    c = np.array([smoothed_potential(V, float(ai), 1.0)[0] for ai in a])
    return 0.5 * np.asarray(v) ** 2 + 0.5 * c


def _newton_trajectory(spec: RunSpec, eff_dt: float, stride: int):
    h = spec.h

    def W(y):
        return -1.0 / math.cosh(y) ** 2

    def dW(y):
        return 2.0 * math.tanh(y) / math.cosh(y) ** 2

    s0 = EffectiveState(spec.a0, spec.v0, spec.a0 * spec.v0, 1.0)
    return integrate_effective(s0, lambda y: rhs_bare_newton(y, W, dW, h), spec.t_final,
                               eff_dt, label="newton", stride=stride)


def run_comparison(spec: RunSpec) -> ComparisonReport:
    """Full pipeline for one parameter point."""
    spec.validate()
    cfg = spec.sim_config()
    V = cfg.potential
    snaps = evolve(cfg)
    times = np.array([s.t for s in snaps])
    decs = track([s.field for s in snaps], times, cfg.initial)

    interval = spec.snapshot_interval
    m = max(1, int(math.ceil(interval / spec.eff_dt - 1e-9)))
    eff_dt = interval / m
    s0 = EffectiveState.from_group(cfg.initial)
    eff = integrate_effective(s0, _effective_rhs(V), spec.t_final, eff_dt,
                              label=spec.label, stride=m)
    if len(eff) != len(times) or np.max(np.abs(eff.t - times)) > 1e-9 * max(1.0, times[-1]):
        raise RuntimeError("effective and PDE output times are misaligned")

    P = np.array([d.g.as_array() for d in decs])
    a, v, gamma, mu = P.T
    gamma = np.unwrap(gamma)
    h1_err = np.array([h1_error_to_soliton(s.field, eff.state(i).group_element())
                       for i, s in enumerate(snaps)])
    w_h1 = np.array([h1_norm(d.w) for d in decs])
    mass = np.array([s.mass for s in snaps])
    cols = {
        "t": times,
        "a_pde": a, "v_pde": v, "gamma_pde": gamma,
        "gamma_pde_mod2pi": np.mod(gamma, 2 * np.pi), "mu_pde": mu,
        "a_eff": eff.a, "v_eff": eff.v, "gamma_eff": eff.gamma,
        "h1_err": h1_err, "w_h1": w_h1, "mass": mass,
        "H_q": np.array([s.energy for s in snaps]),
        "classical_energy": _classical_energy(a, v, V),
    }
    if V.kind == "sampled" and spec.potential == "sech2slow":
        newton = _newton_trajectory(spec, eff_dt, m)
        cols["a_newton"] = newton.a

    summary = {
        "sup_h1_err": float(h1_err.max()),
        "sup_w_h1": float(w_h1.max()),
        "sup_abs_a_diff": float(np.max(np.abs(a - eff.a))),
        "max_orthogonality_defect": float(max(d.orthogonality_defect for d in decs)),
        "max_newton_iters": int(max(d.newton_iters for d in decs)),
        "mass_drift_rel": float(np.max(np.abs(mass - mass[0])) / mass[0]),
        "max_mu_residual_gap": float(max(abs(mu_from_residual(d.w) - d.g.mu) for d in decs)),
        "a_pde_min": float(a.min()),
        "a_pde_max": float(a.max()),
    }
    summary.update(_oscillation_summary(times, a, eff.a))
    if V.kind == "delta" and V.q > 0:
        summary.update(_turning_summary(spec, times, a))
    if "a_newton" in cols:
        summary.update(_first_cycle_summary(spec, times, a, eff.a, cols["a_newton"]))

    meta = {
        "label": spec.label,
        "spec": asdict(spec),
        "grid": {"half_length": cfg.grid.half_length, "num_points": cfg.grid.num_points,
                 "spacing": cfg.grid.spacing},
        "dt": cfg.dt,
        "t_final": cfg.t_final,
        "snapshot_stride": cfg.snapshot_stride,
        "initial": asdict(cfg.initial),
        "potential": V.describe(),
        "effective": {"method": eff.method, "dt": eff_dt},
        "seed": None,
    }
    return ComparisonReport(cols, summary, meta)


def _oscillation_summary(t, a_pde, a_eff) -> dict:
    out = {}
    for name, a in (("pde", a_pde), ("eff", a_eff)):
        try:
            out[f"measured_period_{name}"] = measured_period(t, a)
        except ValueError:
            out[f"measured_period_{name}"] = None
    return out


def _turning_summary(spec: RunSpec, t, a) -> dict:
    """Closest approach to the origin versus the closed-form turning point."""
    q = spec.q
    v_in = math.sqrt(max(0.0, spec.v0 ** 2 + q / math.cosh(spec.a0) ** 2))
    predicted = turning_point(v_in, q) if v_in > 0 else None
    side = -1.0 if spec.a0 < 0 else 1.0
    passed_over = bool(np.any(side * a < 0))
    out = {"incoming_speed": v_in, "turning_predicted": predicted, "passed_over": passed_over}
    if passed_over:
        out["turning_measured"] = None
        return out
    i = int(np.argmin(np.abs(a)))
    measured = abs(float(a[i]))
    if 0 < i < len(a) - 1:
        # vertex of the parabola through the three samples around the extremum
        y0, y1, y2 = np.abs(a[i - 1:i + 2])
        denom = y0 - 2 * y1 + y2
        if denom > 0:
            measured = float(y1 - 0.125 * (y2 - y0) ** 2 / denom)
    else:
        # never turned inside the run
        out["turning_measured"] = None
        out["turned"] = False
        return out
    out["turning_measured"] = measured
    out["turned"] = True
    return out


def _first_cycle_summary(spec: RunSpec, t, a_pde, a_eff, a_newton) -> dict:
    window = spec.window
    if window <= 0:
        window = measured_period(t, a_eff)
    keep = t <= window + 1e-12
    return {
        "first_cycle_window": float(window),
        "first_cycle_dev_effective": float(np.max(np.abs(a_eff[keep] - a_pde[keep]))),
        "first_cycle_dev_newton": float(np.max(np.abs(a_newton[keep] - a_pde[keep]))),
    }


# ---------------------------------------------------------------- presets

FIG1 = RunSpec(label="fig1", potential="delta", q=-0.01, a0=-3.0, v0=0.0, t_final=1000.0)


def fig3_initial_speed(v_incoming: float, q: float, a0: float) -> float:
    """Speed at ``a0`` on the energy level with speed ``v_incoming`` far away."""
    v2 = v_incoming ** 2 - q / math.cosh(a0) ** 2
    if v2 <= 0:
        raise ConfigError(f"incoming speed {v_incoming} does not reach a0={a0} for q={q}")
    return math.sqrt(v2)


def _fig3(q: float, v_in: float, t_final: float) -> RunSpec:
    return RunSpec(label=f"fig3_q{q:g}_v{v_in:g}", potential="delta", q=q, a0=-10.0,
                   v0=fig3_initial_speed(v_in, q, -10.0), t_final=t_final,
                   snapshot_stride=250)


def preset_specs(name: str) -> list:
    if name == "fig1":
        return [FIG1]
    if name == "fig2":
        return [RunSpec(label=f"fig2_h{h:g}", potential="sech2slow", h=h, a0=-3.0, v0=0.0,
                        t_final=40.0, snapshot_stride=100)
                for h in (1 / 5, 1 / 4)]
    if name == "fig3":
        return [_fig3(0.04, 0.1, 250.0), _fig3(0.09, 0.1, 250.0), _fig3(0.04, 0.3, 80.0)]
    if name == "scaling":
        return [scaling_spec(q) for q in SCALING_Q]
    raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")


PRESETS = ("fig1", "fig2", "fig3", "scaling", "spectral-table")


def run_specs(specs: list, workers: int = 1) -> list:
    """Run independent comparisons, optionally in worker processes."""
    if workers <= 1 or len(specs) <= 1:
        return [run_comparison(s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_comparison, specs))


# ---------------------------------------------------------------- scaling

SCALING_Q = (-0.01, -0.0025)
SCALING_BUDGET = 200.0


def scaling_horizon(q: float, v0: float = 0.0, delta: float = 1.0,
                    budget: float = SCALING_BUDGET) -> float:
    if q == 0:
        return budget
    return min(budget, delta * (v0 * v0 + abs(q)) ** -0.5 * math.log(1.0 / abs(q)))


def scaling_spec(q: float, delta: float = 1.0, budget: float = SCALING_BUDGET,
                 base: RunSpec = FIG1) -> RunSpec:
    T = scaling_horizon(q, base.v0, delta, budget)
    interval = base.snapshot_interval
    T = interval * math.ceil(T / interval - 1e-9)
    return base.with_(label=f"scaling_q{q:g}", q=q, t_final=T)


@dataclass
class ScalingSummary:
    q: list
    horizon: list
    sup_w_h1: list
    sup_a_diff: list
    slope_w: Optional[float]
    slope_a: Optional[float]

    def as_dict(self) -> dict:
        return asdict(self)


def run_scaling(q_list=SCALING_Q, delta: float = 1.0, budget: float = SCALING_BUDGET,
                base: RunSpec = FIG1, workers: int = 1,
                reports: Optional[list] = None) -> tuple:
    """Sup-norm error sizes against ``|q|`` and their log-log slopes."""
    q_list = [float(q) for q in q_list]
    nonzero = [abs(q) for q in q_list if q != 0]
    if len(nonzero) < 2 or max(nonzero) / min(nonzero) < 4 - 1e-12:
        raise ConfigError("scaling needs at least two nonzero |q| spanning a factor of 4")
    specs = [scaling_spec(q, delta, budget, base) for q in q_list]
    if reports is None:
        reports = run_specs(specs, workers)
    sup_w = [r.summary["sup_w_h1"] for r in reports]
    sup_a = [r.summary["sup_abs_a_diff"] for r in reports]
    pts = [(math.log(abs(q)), w, d) for q, w, d in zip(q_list, sup_w, sup_a) if q != 0]
    lq = np.array([p[0] for p in pts])

    def slope(vals):
        vals = np.array(vals)
        if np.any(vals <= 0):
            return None
        return float(np.polyfit(lq, np.log(vals), 1)[0])

    summary = ScalingSummary(q_list, [s.t_final for s in specs], sup_w, sup_a,
                             slope([p[1] for p in pts]), slope([p[2] for p in pts]))
    return summary, reports

