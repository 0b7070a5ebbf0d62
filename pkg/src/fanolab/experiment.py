"""Experiment orchestration: configs, reproducible runs, file emission.

A run directory contains run.csv (time series), bergman.csv (density of
states scan), summary.json (verdicts and fitted quantities) and
MANIFEST.json (code version, conventions hash, config hash, and the
module operation behind every summary field).  Identical configs
produce byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bergman import bergman_scan, comparison_function, gram, transition
from .conventions import sheet_hash
from .criteria import tamed_verdict
from .errors import ConfigError, InsufficientData
from .flow import FlowConfig, FlowState, run_flow
from .functionals import (CONSTANT_INVARIANT, EQUIVALENCE_QUANTITIES,
                          equivalence_suite, gradient_energy_gap,
                          inequality_monitor, report)
from .geometry import Grid, MetricProfile, fs_density
from .lct import lct_newton, lct_resolution, parse_germ, table_germs

MIN_GRID = 64

PERTURBATION_FAMILIES = {
    "none": lambda s: np.zeros_like(s),
    "sech": lambda s: 1.0 / np.cosh(s),
    "sech2": lambda s: 1.0 / np.cosh(s) ** 2,
    "gauss": lambda s: np.exp(-s * s),
}

_CONFIG_SCHEMA = {
    "version": int,
    "model": str,
    "grid": {"L": float, "N": int},
    "perturbation": {"family": str, "amplitude": float},
    "integrator": {"scheme": str, "dt": (float, type(None)),
                   "T": float, "snapshot_dt": float, "safety": float},
    "gauge": str,
    "bergman_nus": list,
    "defect_nu": int,
    "monitors": {"functionals": bool, "bergman": bool},
    "seed": int,
}


@dataclass
class ExperimentConfig:
    version: int = 1
    model: str = "sphere"
    L: float = 20.0
    N: int = 1024
    family: str = "sech2"
    amplitude: float = 0.3
    scheme: str = "imex"
    dt: float | None = None
    T: float = 20.0
    snapshot_dt: float = 0.5
    safety: float = 0.5
    gauge: str = "density-only"
    bergman_nus: tuple = (1, 2, 3)
    defect_nu: int = 2
    monitors: dict = field(default_factory=lambda: {"functionals": True,
                                                    "bergman": True})
    seed: int = 0

    def validate(self):
        if self.version != 1:
            raise ConfigError("unsupported config version", "version")
        if self.model not in ("sphere",):
            raise ConfigError(f"unknown model {self.model!r}", "model")
        if self.N < MIN_GRID:
            raise ConfigError(f"N = {self.N} below minimum {MIN_GRID}",
                              "grid.N")
        if self.L <= 0:
            raise ConfigError("L must be positive", "grid.L")
        if self.family not in PERTURBATION_FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}",
                              "perturbation.family")
        if self.scheme not in ("imex", "rk4", "euler"):
            raise ConfigError(f"unknown scheme {self.scheme!r}",
                              "integrator.scheme")
        if self.T <= 0 or self.snapshot_dt <= 0:
            raise ConfigError("horizon and cadence must be positive",
                              "integrator.T")
        if self.gauge not in ("density-only", "raw", "shoot"):
            raise ConfigError(f"unknown gauge {self.gauge!r}", "gauge")
        if not self.bergman_nus or any(int(nu) < 1
                                       for nu in self.bergman_nus):
            raise ConfigError("tensor powers must be >= 1", "bergman_nus")
        if self.defect_nu < 1:
            raise ConfigError("defect power must be >= 1", "defect_nu")
        return self

    # -- json wire format ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "version": self.version,
            "model": self.model,
            "grid": {"L": self.L, "N": self.N},
            "perturbation": {"family": self.family,
                             "amplitude": self.amplitude},
            "integrator": {"scheme": self.scheme, "dt": self.dt,
                           "T": self.T, "snapshot_dt": self.snapshot_dt,
                           "safety": self.safety},
            "gauge": self.gauge,
            "bergman_nus": list(self.bergman_nus),
            "defect_nu": self.defect_nu,
            "monitors": dict(self.monitors),
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentConfig":
        _reject_unknown(data, _CONFIG_SCHEMA, path="")
        grid = data.get("grid", {})
        pert = data.get("perturbation", {})
        integ = data.get("integrator", {})
        cfg = cls(
            version=int(data.get("version", 1)),
            model=data.get("model", "sphere"),
            L=float(grid.get("L", 20.0)),
            N=int(grid.get("N", 1024)),
            family=pert.get("family", "sech2"),
            amplitude=float(pert.get("amplitude", 0.3)),
            scheme=integ.get("scheme", "imex"),
            dt=None if integ.get("dt") is None else float(integ["dt"]),
            T=float(integ.get("T", 20.0)),
            snapshot_dt=float(integ.get("snapshot_dt", 0.5)),
            safety=float(integ.get("safety", 0.5)),
            gauge=data.get("gauge", "density-only"),
            bergman_nus=tuple(int(v) for v in
                              data.get("bergman_nus", (1, 2, 3))),
            defect_nu=int(data.get("defect_nu", 2)),
            monitors=dict(data.get("monitors", {"functionals": True,
                                                "bergman": True})),
            seed=int(data.get("seed", 0)),
        )
        return cfg.validate()

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_json_dict(data)


def _reject_unknown(data, schema, path):
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError("unknown key", where)
        if isinstance(schema[key], dict):
            if not isinstance(value, dict):
                raise ConfigError("expected an object", where)
            _reject_unknown(value, schema[key], where)


# -- run products ------------------------------------------------------------

def initial_state(cfg: ExperimentConfig) -> FlowState:
    grid = Grid(cfg.L, cfg.N)
    s = grid.s
    shape = PERTURBATION_FAMILIES[cfg.family](s)
    w = fs_density(s) * (1.0 + cfg.amplitude * shape)
    profile = MetricProfile(grid, w, check_class=False)
    if cfg.gauge == "density-only":
        return FlowState(0.0, profile, gauge="density-only")
    from .flow import reconstruct_potential, state_from_potential
    return state_from_potential(grid, reconstruct_potential(profile),
                                gauge=cfg.gauge)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n")


RUN_COLUMNS = ("t", "min_w", "max_dev", "osc_phi", "sup_phi", "volume",
               "diam", "sup_R", "sup_u", "gauge_const", "I_energy",
               "neg_mean", "perelman_sum", "c0_defect", "energy_gap")
SCAN_COLUMNS = ("t", "nu", "inf_F", "sup_F", "defect", "max_sup_S",
                "max_sup_gradS")

FIELD_OPERATIONS = {
    "decay_rate": "flow.RunRecord.decay_rate",
    "termination": "flow.run_flow",
    "tamed": "criteria.tamed_verdict",
    "defect_bound": "bergman.partial_c0_defect",
    "inequalities": "functionals.inequality_monitor",
    "equivalence": "functionals.equivalence_suite",
    "shoot_constant": "flow.run_flow",
}


def run_experiment(cfg: ExperimentConfig, outdir) -> Path:
    """Execute the configured run and write the run directory."""
    cfg.validate()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    flow_cfg = FlowConfig(L=cfg.L, n=cfg.N, T=cfg.T, scheme=cfg.scheme,
                          gauge=cfg.gauge, dt=cfg.dt,
                          snapshot_dt=cfg.snapshot_dt, safety=cfg.safety)
    record = run_flow(flow_cfg, initial_state(cfg))

    scan_rows = []
    defect_series = {}
    gap_series = {}
    if cfg.monitors.get("bergman", True):
        scan_rows = bergman_scan(record.snapshots, nus=cfg.bergman_nus)
        defect_series = {row["t"]: row["defect"] for row in scan_rows
                         if row["nu"] == cfg.defect_nu}
        gap_series = _energy_gaps(record, cfg.defect_nu)

    run_rows = []
    func_reports = {}
    if cfg.monitors.get("functionals", True):
        func_reports = {s.t: report(s) for s in record.snapshots
                        if s.phi is not None}
    for idx, t in enumerate(record.times):
        row = {c: record.series.get(c, np.full(len(record.times),
                                               np.nan))[idx]
               for c in ("min_w", "max_dev", "osc_phi", "sup_phi",
                         "volume", "diam", "sup_R", "sup_u",
                         "gauge_const", "perelman_sum")}
        row["t"] = float(t)
        rep = func_reports.get(float(t))
        row["I_energy"] = rep.i_energy if rep else float("nan")
        row["neg_mean"] = rep.neg_mean_phi_evolved if rep else float("nan")
        row["c0_defect"] = defect_series.get(float(t), float("nan"))
        row["energy_gap"] = gap_series.get(float(t), float("nan"))
        row = {k: (float(v) if not isinstance(v, float) else v)
               for k, v in row.items()}
        run_rows.append(row)

    _write_csv(outdir / "run.csv", RUN_COLUMNS, run_rows)
    if scan_rows:
        _write_csv(outdir / "bergman.csv", SCAN_COLUMNS,
                   [{k: float(v) for k, v in r.items()} for r in scan_rows])

    summary = {
        "schema": "fanolab-summary-v1",
        "config": cfg.to_json_dict(),
        "termination": record.termination,
        "shoot_constant": record.shoot_constant,
    }
    try:
        summary["decay_rate"] = record.decay_rate(
            min(5.0, 0.25 * cfg.T), cfg.T)
    except Exception:
        summary["decay_rate"] = None
    if scan_rows:
        try:
            tamed = tamed_verdict(scan_rows, nus=cfg.bergman_nus)
            summary["tamed"] = tamed.as_dict()
        except InsufficientData as exc:
            summary["tamed"] = {"error": str(exc)}
        summary["defect_bound"] = max(defect_series.values(), default=None)
    if func_reports and len(record.times) >= 4:
        ineq = inequality_monitor(record)
        summary["inequalities"] = {
            name: {"constant": v.empirical_constant, "bounded": v.bounded}
            for name, v in ineq.items()}
        eq = equivalence_suite(record)
        summary["equivalence"] = {name: v.bounded for name, v in eq.items()}

    (outdir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True, default=_fmt) + "\n")

    manifest = {
        "code_version": __version__,
        "conventions_sha256": sheet_hash(),
        "config_sha256": hashlib.sha256(
            json.dumps(cfg.to_json_dict(), sort_keys=True).encode()
        ).hexdigest(),
        "field_operations": FIELD_OPERATIONS,
    }
    (outdir / "MANIFEST.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return outdir


def _energy_gaps(record, nu: int) -> dict:
    base_profile = record.snapshots[0].profile
    base = gram(MetricProfile(base_profile.grid, base_profile.w), nu)
    out = {}
    for snap in record.snapshots:
        if snap.phi is None:
            continue
        system = gram(MetricProfile(snap.profile.grid, snap.profile.w), nu)
        x = comparison_function(transition(base, system), base)
        out[snap.t] = gradient_energy_gap(snap, x)
    return out


# -- exact table reproduction ---------------------------------------------------

@dataclass
class Table2Row:
    name: str
    equation: str
    expected: Fraction
    newton: Fraction | None
    resolution: Fraction
    match: bool


@dataclass
class Table2Report:
    rows: list

    @property
    def all_match(self) -> bool:
        return all(r.match for r in self.rows)


def reproduce_table2() -> Table2Report:
    """Recompute the nine table thresholds with both exact engines."""
    from .errors import DegenerateNewton
    from .lct.families import TABLE_ROWS

    rows = []
    for name, text, expected in TABLE_ROWS:
        germ = parse_germ(text)
        try:
            newton_value = lct_newton(germ).value
        except DegenerateNewton:
            newton_value = None
        res_value = lct_resolution(germ).value
        match = (res_value == expected
                 and (newton_value is None or newton_value == expected))
        rows.append(Table2Row(name=name, equation=text, expected=expected,
                              newton=newton_value, resolution=res_value,
                              match=match))
    return Table2Report(rows=rows)
