"""Named experiments reproducing each figure as tables plus a summary.

A configuration is a flat mapping of parameter overrides on top of the
per-experiment defaults. Every table carries the fully resolved
configuration in its ``#``-prefixed header, so a table can be
regenerated from its own metadata.
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .analytic import theta_vector
from .chain import EXPONENT_CAP, ChainSpec, GaugeRamp
from .crow import CrowSpec, effective_params, rwa_discrepancy
from .disorder import Normal, UniformSymmetric, disorder_sweep_T, ensemble_transfer, realization_seed, sample_disorder
from .dynamics import evolve_gauge_frame, evolve_lab_frame, make_problem, transfer_probability

EXPERIMENTS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "crow-rwa", "custom")
FORMATS = ("csv", "summary", "both")


class ConfigError(ValueError):
    """Raised with every violation found in a configuration."""

    def __init__(self, issues: list["Issue"]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


@dataclass(frozen=True)
class Issue:
    key: str
    message: str
    severity: str = "error"

    def __str__(self):
        return f"{self.key}: {self.message}"


# name -> (type, rule, description of rule)
_PARAMS: dict[str, tuple[type, Callable[[Any], bool] | None, str]] = {
    "N": (int, lambda v: v >= 0, "must be >= 0"),
    "kappa": (float, lambda v: v > 0, "must be > 0"),
    "T": (float, lambda v: v > 0, "must be > 0"),
    "h_max": (float, math.isfinite, "must be finite"),
    "delta": (float, math.isfinite, "must be finite"),
    "samples": (int, lambda v: v >= 2, "must be >= 2"),
    "initial": (str, lambda v: v in ("delta", "eigen"), "must be 'delta' or 'eigen'"),
    "l": (int, None, ""),
    "cancel": (bool, None, ""),
    "frame": (str, lambda v: v in ("gauge", "lab"), "must be 'gauge' or 'lab'"),
    "rtol": (float, lambda v: 0 < v < 1, "must be in (0, 1)"),
    "kT_min": (float, lambda v: v > 0, "must be > 0"),
    "kT_max": (float, lambda v: v > 0, "must be > 0"),
    "kT_points": (int, lambda v: v >= 1, "must be >= 1"),
    "delta_min": (float, math.isfinite, "must be finite"),
    "delta_max": (float, math.isfinite, "must be finite"),
    "delta_points": (int, lambda v: v >= 1, "must be >= 1"),
    "disorder": (str, lambda v: v in ("none", "uniform", "normal", "both"), "must be none|uniform|normal|both"),
    "width": (float, lambda v: v > 0, "must be > 0"),
    "sigma": (float, lambda v: v > 0, "must be > 0"),
    "hopping_disorder": (bool, None, ""),
    "energy_disorder": (bool, None, ""),
    "count": (int, lambda v: v >= 1, "must be >= 1"),
    "seed": (int, lambda v: 0 <= v < 2**64, "must be an unsigned 64-bit integer"),
    "bins": (int, lambda v: v >= 1, "must be >= 1"),
    "rho": (float, lambda v: v > 0, "must be > 0"),
    "depth": (float, lambda v: v >= 0, "must be >= 0"),
    "phi": (float, math.isfinite, "must be finite"),
    "alpha": (float, math.isfinite, "must be finite"),
    "omega_ratios": (list, lambda v: len(v) > 0 and all(x > 0 for x in v), "must be a non-empty list of positive numbers"),
    "kappa_t_max": (float, lambda v: v > 0, "must be > 0"),
}

_TRAJ = {"N": 5, "kappa": 1.0, "T": 3.0, "h_max": 3.0, "delta": 0.0, "samples": 401,
         "initial": "eigen", "l": None, "cancel": True, "frame": "gauge", "rtol": 1e-10}
_SWEEP = {"N": 5, "kappa": 1.0, "h_max": 4.0, "delta": 0.0, "kT_min": 0.25, "kT_max": 8.0, "kT_points": 200}
_DISORDERED_SWEEP = {**_SWEEP, "disorder": "uniform", "width": 1.0, "sigma": 1.0,
                     "hopping_disorder": True, "energy_disorder": True, "seed": 1}

DEFAULTS: dict[str, dict[str, Any]] = {
    "fig2": dict(_TRAJ),
    "fig3": {**_TRAJ, "cancel": False},
    "fig4": dict(_SWEEP),
    "fig5": {"N": 5, "kappa": 1.0, "T": 3.0, "h_max": 3.0, "initial": "eigen", "l": None,
             "delta_min": -0.5, "delta_max": 0.5, "delta_points": 101},
    "fig6": dict(_DISORDERED_SWEEP),
    "fig7": {**_DISORDERED_SWEEP, "N": 10},
    "fig8": {"N": 5, "kappa": 1.0, "T": 3.33, "h_max": 2.0, "disorder": "both", "width": 0.5, "sigma": 0.5,
             "hopping_disorder": True, "energy_disorder": False, "count": 10000, "seed": 1, "bins": 50},
    "crow-rwa": {"N": 5, "rho": 1.0, "depth": 1.0, "phi": 0.5, "alpha": 0.0,
                 "omega_ratios": [20.0, 40.0, 80.0], "kappa_t_max": 3.0, "rtol": 1e-10},
    "custom": {**_TRAJ, "initial": "delta", "disorder": "none", "width": 0.5, "sigma": 0.5,
               "hopping_disorder": True, "energy_disorder": False, "seed": 1},
}


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict[str, Any] = field(default_factory=dict)
    output: Path | None = None
    fmt: str = "both"
    threads: int = 1


def _coerce(key: str, value: Any) -> Any:
    kind = _PARAMS[key][0]
    if value is None:
        return None
    if kind is bool:
        if isinstance(value, str):
            low = value.strip().lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if isinstance(value, (bool, int)) and value in (0, 1):
            return bool(value)
        raise ValueError(f"not a boolean: {value!r}")
    if kind is int:
        if isinstance(value, bool):
            raise ValueError(f"not an integer: {value!r}")
        if isinstance(value, float):
            if not value.is_integer():
                raise ValueError(f"not an integer: {value!r}")
            return int(value)
        return int(value)
    if kind is float:
        if isinstance(value, bool):
            raise ValueError(f"not a number: {value!r}")
        return float(value)
    if kind is list:
        if isinstance(value, str):
            value = json.loads(value)
        if not isinstance(value, (list, tuple)):
            raise ValueError(f"not a list: {value!r}")
        return [float(v) for v in value]
    return str(value)


def resolve(config: ExperimentConfig) -> tuple[dict[str, Any], list[Issue]]:
    """Merge overrides onto defaults; returns the resolved mapping and all issues found."""
    issues: list[Issue] = []
    if config.experiment not in DEFAULTS:
        return {}, [Issue("experiment", f"unknown experiment {config.experiment!r}; choose from {', '.join(EXPERIMENTS)}")]
    resolved = dict(DEFAULTS[config.experiment])
    for key, value in config.parameters.items():
        if key not in resolved:
            issues.append(Issue(key, f"unknown parameter for {config.experiment}"))
            continue
        try:
            resolved[key] = _coerce(key, value)
        except (TypeError, ValueError) as exc:
            issues.append(Issue(key, str(exc)))
    for key, value in resolved.items():
        rule = _PARAMS[key][1]
        if value is None or rule is None or any(i.key == key for i in issues):
            continue
        if not rule(value):
            issues.append(Issue(key, f"{_PARAMS[key][2]} (got {value!r})"))
    if not any(i.key in ("N", "l") for i in issues) and resolved.get("l") is not None:
        if not 1 <= resolved["l"] <= 2 * resolved["N"] + 1:
            issues.append(Issue("l", f"must be in 1..{2 * resolved['N'] + 1} (got {resolved['l']})"))
    if "kT_min" in resolved and resolved["kT_min"] > resolved["kT_max"]:
        issues.append(Issue("kT_max", "must be >= kT_min"))
    if "delta_min" in resolved and resolved["delta_min"] > resolved["delta_max"]:
        issues.append(Issue("delta_max", "must be >= delta_min"))
    if resolved.get("frame") == "lab" and not issues:
        if abs(resolved["h_max"]) * resolved["N"] > EXPONENT_CAP:
            issues.append(Issue(
                "frame",
                f"|h_max*N| = {abs(resolved['h_max']) * resolved['N']:g} exceeds the exponent cap "
                f"{EXPONENT_CAP:g}; lab-frame amplitudes would overflow, use frame=gauge",
                "warning",
            ))
    if config.fmt not in FORMATS:
        issues.append(Issue("format", f"must be one of {', '.join(FORMATS)}"))
    if config.threads < 1:
        issues.append(Issue("threads", "must be >= 1"))
    return resolved, issues


def validate_config(config: ExperimentConfig) -> list[Issue]:
    """Every violation (and warning) in ``config``; an empty list means it is valid."""
    return resolve(config)[1]


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Flat ``key = value`` file; values are read as JSON where possible."""
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=", ":"), comment_prefixes=("#", ";"))
    parser.optionxform = str
    text = Path(path).read_text()
    parser.read_string("[config]\n" + text)
    out: dict[str, Any] = {}
    for key, raw in parser["config"].items():
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw.strip().strip('"').strip("'")
    return out


@dataclass
class ResultTable:
    name: str
    columns: list[str]
    rows: list[tuple]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        width = len(self.columns)
        for k, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"table {self.name}: row {k} has {len(row)} values, expected {width}")

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows])

    def to_csv(self) -> str:
        lines = [f"# {key}: {json.dumps(value, sort_keys=True)}" for key, value in self.metadata.items()]
        lines.append(",".join(self.columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def read_table(path: str | Path) -> ResultTable:
    """Parse a table written by :meth:`ResultTable.to_csv`."""
    metadata: dict[str, Any] = {}
    columns: list[str] | None = None
    rows: list[tuple] = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            metadata[key] = json.loads(value)
        elif columns is None:
            columns = line.split(",")
        elif line:
            rows.append(tuple(int(x) if x.lstrip("-").isdigit() else float(x) for x in line.split(",")))
    return ResultTable(Path(path).stem, columns or [], rows, metadata)


# --- experiment bodies -----------------------------------------------------


def _chain(p) -> ChainSpec:
    return ChainSpec(p["N"], p["kappa"])


def _initial(p):
    if p["initial"] == "delta":
        return "delta"
    return p["l"] if p["l"] is not None else p["N"] + 1


def _trajectory_tables(traj, p) -> tuple[list[ResultTable], dict]:
    n = traj.chain.indices
    pn_rows = [(float(t), int(site), float(pk)) for t, row in zip(traj.times, traj.pn_series) for site, pk in zip(n, row)]
    norm = traj.norm_series
    norm_rows = [(float(t), float(P), float(lp)) for t, P, lp in zip(traj.times, norm, traj.log_norm_series)]
    tables = [
        ResultTable("pn", ["t", "n", "p_n"], pn_rows),
        ResultTable("norm", ["t", "P", "log_P"], norm_rows),
    ]
    summary = {
        "p_N_final": transfer_probability(traj),
        "p_minus_N_final": float(traj.pn_series[-1, 0]),
        "P_initial": float(norm[0]),
        "P_final": float(norm[-1]),
        "P_min": float(norm.min()),
    }
    return tables, summary


def _run_trajectory(p, cancel: bool, disorder=None):
    chain = _chain(p)
    ramp = GaugeRamp(p["h_max"], p["T"], p["delta"])
    problem = make_problem(chain, ramp, initial=_initial(p), cancel=cancel, disorder=disorder, samples=p["samples"])
    if p["frame"] == "lab":
        return evolve_lab_frame(problem, rtol=p["rtol"])
    return evolve_gauge_frame(problem)


def _fig2(p, threads):
    traj = _run_trajectory(p, cancel=p["cancel"])
    return _trajectory_tables(traj, p)


def _kT_grid(p) -> np.ndarray:
    return np.linspace(p["kT_min"], p["kT_max"], p["kT_points"])


def _sweep_table(result, chain, ramp_T) -> ResultTable:
    rows = []
    for kT, pt, ph, P in zip(result.kappa_T, result.p_transfer, result.p_hermitian, result.final_norm):
        rows.append((float(kT), float(pt), float(ph), float(P)))
    return ResultTable("sweep", ["kappa_T", "p_N", "p_N_herm", "P_final"], rows)


def _sweep_summary(table: ResultTable) -> dict:
    p = table.column("p_N")
    ph = table.column("p_N_herm")
    return {
        "points": len(table.rows),
        "fraction_p_N_above_0.99": float(np.mean(p > 0.99)),
        "min_p_N": float(p.min()),
        "mean_p_N": float(p.mean()),
        "mean_p_N_herm": float(ph.mean()),
    }


def _fig4(p, threads):
    chain = _chain(p)
    T_grid = _kT_grid(p) / chain.kappa
    result = disorder_sweep_T(chain, GaugeRamp(p["h_max"], 1.0, p["delta"]), None, T_grid)
    table = _sweep_table(result, chain, T_grid)
    return [table], _sweep_summary(table)


def _fig5(p, threads):
    chain = _chain(p)
    deltas = np.linspace(p["delta_min"], p["delta_max"], p["delta_points"])
    rows = []
    for d in deltas:
        problem = make_problem(chain, GaugeRamp(p["h_max"], p["T"], float(d)), initial=_initial(p), samples=2)
        traj = evolve_gauge_frame(problem)
        rows.append((float(d), transfer_probability(traj), float(traj.norm_series[-1])))
    table = ResultTable("mismatch", ["delta", "p_N", "P_final"], rows)
    pN = table.column("p_N")
    k = int(np.argmax(pN))
    summary = {"argmax_delta": float(deltas[k]), "max_p_N": float(pN[k]),
               "min_p_N_within_0.2": float(pN[np.abs(deltas) <= 0.2 + 1e-12].min()) if np.any(np.abs(deltas) <= 0.2 + 1e-12) else None}
    return [table], summary


def _kind(p, which: str):
    return UniformSymmetric(p["width"]) if which == "uniform" else Normal(p["sigma"])


def _disordered_sweep(p, threads):
    chain = _chain(p)
    realization = None
    tables = []
    if p["disorder"] != "none":
        which = "uniform" if p["disorder"] == "both" else p["disorder"]
        realization = sample_disorder(chain, _kind(p, which), realization_seed(p["seed"], 0),
                                      hopping=p["hopping_disorder"], site_energies=p["energy_disorder"])
        rows = []
        for k, n in enumerate(chain.indices):
            bond = float(realization.delta_n[k]) if k < chain.size - 1 else float("nan")
            rows.append((int(n), bond, float(realization.e_n[k])))
        tables.append(ResultTable("disorder", ["n", "delta_n", "E_n"], rows))
    T_grid = _kT_grid(p) / chain.kappa
    result = disorder_sweep_T(chain, GaugeRamp(p["h_max"], 1.0, p["delta"]), realization, T_grid)
    sweep = _sweep_table(result, chain, T_grid)
    tables.insert(0, sweep)
    summary = _sweep_summary(sweep)
    if realization is not None:
        summary["realization_seed"] = int(realization.seed)
    return tables, summary


def _fig8(p, threads):
    chain = _chain(p)
    ramp = GaugeRamp(p["h_max"], p["T"])
    kinds = ["uniform", "normal"] if p["disorder"] == "both" else [p["disorder"]]
    if kinds == ["none"]:
        kinds = []
    tables, summary = [], {}
    for which in kinds:
        result = ensemble_transfer(chain, ramp, _kind(p, which), p["count"], p["seed"],
                                   hopping=p["hopping_disorder"], site_energies=p["energy_disorder"], threads=threads)
        rows = [(r, int(s), float(a), float(b), float(P)) for r, (s, a, b, P) in
                enumerate(zip(result.seeds, result.p_transfer, result.p_hermitian, result.final_norm))]
        tables.append(ResultTable(f"{which}_realizations", ["realization", "seed", "p_N", "p_N_herm", "P_final"], rows))
        counts_t, edges = result.histogram("transfer", p["bins"])
        counts_h, _ = result.histogram("hermitian", p["bins"])
        hist = [(float(lo), float(hi), int(a), int(b)) for lo, hi, a, b in zip(edges[:-1], edges[1:], counts_t, counts_h)]
        tables.append(ResultTable(f"{which}_histogram", ["bin_lo", "bin_hi", "count_p_N", "count_p_N_herm"], hist))
        s = result.summary(p["bins"])
        for part in ("transfer", "hermitian"):
            s[part].pop("histogram")
        summary[which] = s
    return tables, summary


def _crow_rwa(p, threads):
    chain = ChainSpec(p["N"])
    rows = []
    for ratio in p["omega_ratios"]:
        Omega = ratio * p["rho"]
        spec = CrowSpec(rho=p["rho"], Omega=Omega, Gamma=p["depth"] * Omega, phi=p["phi"], alpha=p["alpha"])
        eff = effective_params(spec)
        d = rwa_discrepancy(spec, chain, p["kappa_t_max"], rtol=p["rtol"])
        rows.append((float(ratio), d, eff.kappa_eff, eff.h_eff))
    table = ResultTable("rwa", ["omega_over_rho", "max_abs_dp", "kappa_eff", "h_eff"], rows)
    d = table.column("max_abs_dp")
    return [table], {"discrepancy": d.tolist(), "decreasing": bool(np.all(np.diff(d) < 0))}


def _custom(p, threads):
    chain = _chain(p)
    disorder = None
    if p["disorder"] != "none":
        which = "uniform" if p["disorder"] == "both" else p["disorder"]
        disorder = sample_disorder(chain, _kind(p, which), realization_seed(p["seed"], 0),
                                   hopping=p["hopping_disorder"], site_energies=p["energy_disorder"])
    traj = _run_trajectory(p, cancel=p["cancel"], disorder=disorder)
    tables, summary = _trajectory_tables(traj, p)
    amps = traj.amplitudes[-1]
    tables.append(ResultTable(f"final_{traj.frame.value}_amplitudes", ["n", "re", "im"],
                              [(int(n), float(a.real), float(a.imag)) for n, a in zip(chain.indices, amps)]))
    if disorder is None and p["initial"] == "delta" and p["delta"] == 0 and p["cancel"]:
        summary["theta_N_sq"] = float(abs(theta_vector(chain, p["T"])[-1]) ** 2)
    return tables, summary


_RUNNERS = {
    "fig2": _fig2,
    "fig3": _fig2,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _disordered_sweep,
    "fig7": _disordered_sweep,
    "fig8": _fig8,
    "crow-rwa": _crow_rwa,
    "custom": _custom,
}


@dataclass
class ExperimentResult:
    experiment: str
    config: dict[str, Any]
    tables: list[ResultTable]
    summary: dict[str, Any]
    warnings: list[Issue]


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Validate, run and (if ``config.output`` is set) write an experiment.

    Raises :class:`ConfigError` on invalid configuration; numerical
    failures propagate as :class:`~gaugetransfer.errors.GaugeTransferError`.
    """
    resolved, issues = resolve(config)
    errors = [i for i in issues if i.severity == "error"]
    if errors:
        raise ConfigError(errors)
    tables, summary = _RUNNERS[config.experiment](resolved, config.threads)
    meta = {"experiment": config.experiment, "config": resolved, "version": __version__}
    for t in tables:
        t.metadata = dict(meta, table=t.name)
    result = ExperimentResult(config.experiment, resolved, tables, summary, [i for i in issues if i.severity == "warning"])
    if config.output is not None:
        write_result(result, Path(config.output), config.fmt)
    return result


def write_result(result: ExperimentResult, out_dir: Path, fmt: str = "both") -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    prefix = result.experiment.replace("-", "_")
    if fmt in ("csv", "both"):
        for t in result.tables:
            path = out_dir / f"{prefix}_{t.name}.csv"
            path.write_text(t.to_csv())
            written.append(path)
    if fmt in ("summary", "both"):
        doc = {
            "experiment": result.experiment,
            "version": __version__,
            "config": result.config,
            "results": result.summary,
            "tables": [f"{prefix}_{t.name}.csv" for t in result.tables] if fmt == "both" else [],
            "warnings": [str(w) for w in result.warnings],
            "run_info": {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")},
        }
        path = out_dir / f"{prefix}_summary.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written


def config_from_metadata(metadata: dict[str, Any]) -> ExperimentConfig:
    """Rebuild the configuration recorded in a table header."""
    return ExperimentConfig(metadata["experiment"], dict(metadata["config"]))
