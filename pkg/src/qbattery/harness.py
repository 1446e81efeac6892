"""Experiment runner: configuration parsing, CSV output, sweeps and comparisons.

Each run writes a CSV time series plus a ``.meta.json`` sidecar holding the
configuration, which :func:`compare_examples` uses to check that two files
belong to the same scenario and coupling.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import dynamics, thermo
from .errors import ConfigurationError, IntegratorError, NumericalContractError
from .model import Example, Scenario, ScenarioConfig, build_model, check_config, reference_couplings

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PHYSICS = 2
EXIT_INTEGRATOR = 3

COLUMNS = (
    "t", "E_B_norm", "ergotropy_norm", "ergo_pop_norm", "ergo_coh_norm", "power_norm",
    "C_S12", "C_C", "C_B", "C_S", "I_S", "I_S_deph", "delta_C", "W_B",
    "bound_lo_norm", "bound_hi_norm", "trace_err", "min_eig",
)
_NORMALIZED = {"E_B_norm": "E_B", "ergotropy_norm": "ergotropy", "ergo_pop_norm": "ergo_pop",
               "ergo_coh_norm": "ergo_coh", "power_norm": "power",
               "bound_lo_norm": "bound_lo", "bound_hi_norm": "bound_hi"}

CONFIG_FIELDS = ("scenario", "example", "g", "k", "omega_S1", "omega_S2", "omega_C", "omega_B",
                 "gamma1", "gamma2", "T")
RUN_FIELDS = ("t_max", "sample_dt", "tol", "out")
SWEEP_FIELDS = ("g_values",)
KNOWN_KEYS = CONFIG_FIELDS + RUN_FIELDS + SWEEP_FIELDS


class UsageError(ConfigurationError):
    """Bad command-line or config-file input."""


@dataclass(frozen=True)
class RunSpec:
    config: ScenarioConfig
    t_max: float = dynamics.DEFAULT_T_MAX
    sample_dt: float = dynamics.DEFAULT_SAMPLE_DT
    tol: float = dynamics.DEFAULT_TOL
    output_path: str = "run.csv"


@dataclass(frozen=True)
class SweepSpec:
    base: RunSpec
    g_values: tuple
    output_dir: str = "sweep"

    def runs(self) -> list:
        out = Path(self.output_dir)
        cfg = self.base.config
        return [
            replace(self.base, config=cfg.with_(g=g),
                    output_path=str(out / f"{cfg.scenario.value}{cfg.initial_example.value}_g{g:g}.csv"))
            for g in self.g_values
        ]


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def _float(key, value):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"{key}: expected a number, got {value!r}") from None


def _float_list(key, value):
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    return tuple(_float(key, v) for v in value)


def parse_config(path=None, **flags):
    """Build a RunSpec, or a SweepSpec when ``g_values`` is given.

    Values come from the config file at ``path`` overridden by ``flags``
    (``None`` flags are ignored); anything unset takes the reference defaults.
    """
    values = read_config_file(path) if path else {}
    values.update({k: v for k, v in flags.items() if v is not None})
    unknown = sorted(set(values) - set(KNOWN_KEYS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")

    try:
        scenario = Scenario(str(values.get("scenario", "I")))
    except ValueError:
        raise UsageError(f"scenario: expected I, II or III, got {values['scenario']!r}") from None
    try:
        example = Example(str(values.get("example", "a")))
    except ValueError:
        raise UsageError(f"example: expected a or b, got {values['example']!r}") from None

    overrides = {k: _float(k, values[k]) for k in CONFIG_FIELDS[3:] if k in values}
    g = _float("g", values["g"]) if "g" in values else None
    try:
        cfg = ScenarioConfig.reference_defaults(scenario, example, g=g, **overrides)
        check_config(cfg)
    except UsageError:
        raise
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from exc

    t_max = _float("t_max", values.get("t_max", dynamics.DEFAULT_T_MAX))
    sample_dt = _float("sample_dt", values.get("sample_dt", dynamics.DEFAULT_SAMPLE_DT))
    tol = _float("tol", values.get("tol", dynamics.DEFAULT_TOL))
    if not t_max > 0:
        raise UsageError(f"t_max must be positive, got {t_max}")
    if not 0 < sample_dt <= t_max:
        raise UsageError(f"sample_dt must lie in (0, t_max], got {sample_dt}")
    if not 1e-12 <= tol <= 1e-6:
        raise UsageError(f"tol must lie in [1e-12, 1e-6], got {tol}")

    if "g_values" in values:
        g_values = _float_list("g_values", values["g_values"])
        if not g_values:
            raise UsageError("g_values must not be empty")
        for gv in g_values:
            if not 0 < gv <= 0.1 * cfg.omega_S2:
                raise UsageError(f"g_values: {gv} outside (0, 0.1*omega_S2]")
        out = str(values.get("out", "sweep"))
        base = RunSpec(cfg, t_max, sample_dt, tol, str(Path(out) / "base.csv"))
        return SweepSpec(base, g_values, out)
    return RunSpec(cfg, t_max, sample_dt, tol, str(values.get("out", "run.csv")))


def reference_sweep(scenario, example="a", output_dir="sweep", **run_kw) -> SweepSpec:
    """Sweep over the four reference couplings ``(0.03 ... 0.09) * omega_S2``."""
    cfg = ScenarioConfig.reference_defaults(scenario, example)
    g_values = reference_couplings(cfg.omega_S2)
    return SweepSpec(RunSpec(cfg, **run_kw), g_values, output_dir)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def record_row(rec: thermo.ThermoRecord) -> list:
    row = []
    for col in COLUMNS:
        if col in _NORMALIZED:
            row.append(rec.normalized(_NORMALIZED[col]))
        else:
            row.append(getattr(rec, col))
    return row


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def _config_dict(cfg: ScenarioConfig) -> dict:
    d = asdict(cfg)
    d["scenario"] = cfg.scenario.value
    d["initial_example"] = cfg.initial_example.value
    return d


@dataclass
class RunResult:
    status: int
    output_path: str
    n_rows: int
    first_failure_time: float | None = None
    message: str = ""
    records: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == EXIT_OK


def write_csv(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for rec in records:
            w.writerow([_fmt(v) for v in record_row(rec)])


def run(spec: RunSpec) -> RunResult:
    """Integrate, evaluate and write one CSV.

    The status is nonzero when the integrator fails (partial CSV kept) or when
    any record carries an invariant or bound violation.
    """
    model = build_model(spec.config)
    status, message, fail_t = EXIT_OK, "", None
    try:
        traj = dynamics.integrate(model, spec.t_max, spec.sample_dt, spec.tol)
    except IntegratorError as exc:
        traj = exc.partial
        status, message, fail_t = EXIT_INTEGRATOR, str(exc), exc.time

    records = []
    if traj is not None:
        for t, rho in zip(traj.times, traj.states):
            try:
                rec = thermo.evaluate_state(rho, t, spec.config.omega_B, spec.config.T,
                                            spec.config.scenario)
            except NumericalContractError as exc:
                if status == EXIT_OK:
                    status, message, fail_t = EXIT_PHYSICS, f"t={t:g}: {exc}", float(t)
                break
            records.append(rec)
            if rec.violations and status == EXIT_OK:
                status, message, fail_t = EXIT_PHYSICS, f"t={t:g}: {'; '.join(rec.violations)}", float(t)

    write_csv(spec.output_path, records)
    meta = {"config": _config_dict(spec.config), "t_max": spec.t_max,
            "sample_dt": spec.sample_dt, "tol": spec.tol, "status": status}
    meta_path(spec.output_path).write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    if status != EXIT_OK:
        log.warning("run %s failed: %s", spec.output_path, message)
    return RunResult(status, spec.output_path, len(records), fail_t, message, records)


def read_csv(path) -> dict:
    """Load a run CSV into a dict of column name -> float array."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise UsageError(f"{path}: header does not match the run CSV layout")
    data = np.array([[float(x) for x in r] for r in rows[1:]]).reshape(-1, len(COLUMNS))
    return {c: data[:, i] for i, c in enumerate(COLUMNS)}


def time_average(t, y) -> float:
    t = np.asarray(t)
    if t.size < 2 or t[-1] == t[0]:
        return float(y[0]) if len(y) else 0.0
    return float(np.trapezoid(y, t) / (t[-1] - t[0]))


def ordering(values) -> str:
    d = np.diff(np.asarray(values, dtype=float))
    if d.size == 0:
        return "degenerate"
    if np.all(d > 0):
        return "increasing"
    if np.all(d < 0):
        return "decreasing"
    return "non-monotonic"


EXPECTED_ORDERING = {Scenario.I: "increasing", Scenario.II: "increasing", Scenario.III: "decreasing"}


@dataclass
class TrendReport:
    scenario: Scenario
    example: Example
    g_values: tuple
    mean_ergotropy: tuple
    peak_ergotropy: tuple
    mean_energy: tuple
    ordering: str
    energy_ordering: str
    expected: str
    results: list = field(default_factory=list, repr=False)

    @property
    def matches(self) -> bool:
        return self.ordering == self.expected

    def lines(self) -> list:
        out = [f"scenario {self.scenario.value}_{self.example.value}, time-averaged ergotropy/omega_B:"]
        for g, m, p in zip(self.g_values, self.mean_ergotropy, self.peak_ergotropy):
            out.append(f"  g={g:g}: mean={m:.6g} peak={p:.6g}")
        if self.ordering == "degenerate":
            out.append("  single coupling value, no ordering claim")
        else:
            out.append(f"  ordering in g: {self.ordering} (expected {self.expected})"
                       f" -> {'MATCH' if self.matches else 'MISMATCH'}")
            out.append(f"  stored-energy ordering in g: {self.energy_ordering}")
        return out


def sweep(spec: SweepSpec, workers: int | None = None) -> TrendReport:
    """Run every coupling of ``spec`` and compare their time-averaged ergotropy.

    Runs go to a process pool when ``workers`` (default: CPU count) exceeds 1.
    """
    runs = spec.runs()
    workers = min(len(runs), workers or os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, runs))
    else:
        results = [run(r) for r in runs]

    means, peaks, energies = [], [], []
    for res in results:
        data = read_csv(res.output_path)
        means.append(time_average(data["t"], data["ergotropy_norm"]))
        peaks.append(float(np.max(data["ergotropy_norm"])) if len(data["t"]) else 0.0)
        energies.append(time_average(data["t"], data["E_B_norm"]))
    order = sorted(range(len(runs)), key=lambda i: spec.g_values[i])
    g_sorted = tuple(spec.g_values[i] for i in order)
    cfg = spec.base.config
    return TrendReport(
        scenario=cfg.scenario, example=cfg.initial_example, g_values=g_sorted,
        mean_ergotropy=tuple(means[i] for i in order),
        peak_ergotropy=tuple(peaks[i] for i in order),
        mean_energy=tuple(energies[i] for i in order),
        ordering=ordering([means[i] for i in order]),
        energy_ordering=ordering([energies[i] for i in order]),
        expected=EXPECTED_ORDERING[cfg.scenario],
        results=[results[i] for i in order],
    )


@dataclass(frozen=True)
class ComparisonReport:
    scenario: str
    g: float
    example_a: str
    example_b: str
    mean_a: float
    mean_b: float
    peak_a: float
    peak_b: float
    identical: bool

    @property
    def a_ge_b(self) -> bool:
        return self.peak_a >= self.peak_b

    def lines(self) -> list:
        head = f"scenario {self.scenario}, g={self.g:g}: {self.example_a} vs {self.example_b}"
        if self.identical:
            return [head, "  inputs are identical: equal ergotropy curves"]
        return [
            head,
            f"  mean ergotropy/omega_B: {self.mean_a:.6g} vs {self.mean_b:.6g}",
            f"  peak ergotropy/omega_B: {self.peak_a:.6g} vs {self.peak_b:.6g}",
            f"  peak({self.example_a}) >= peak({self.example_b}): {'yes' if self.a_ge_b else 'no'}",
        ]


def _load_meta(csv_path) -> dict:
    p = meta_path(csv_path)
    if not p.exists():
        raise UsageError(f"missing metadata sidecar {p}")
    return json.loads(p.read_text(encoding="utf-8"))["config"]


def compare_examples(run_a, run_b) -> ComparisonReport:
    meta_a, meta_b = _load_meta(run_a), _load_meta(run_b)
    if meta_a["scenario"] != meta_b["scenario"]:
        raise UsageError(f"scenario mismatch: {meta_a['scenario']} vs {meta_b['scenario']}")
    if not math.isclose(meta_a["g"], meta_b["g"], rel_tol=1e-12, abs_tol=0.0):
        raise UsageError(f"coupling mismatch: g={meta_a['g']} vs g={meta_b['g']}")
    a, b = read_csv(run_a), read_csv(run_b)
    identical = Path(run_a).read_bytes() == Path(run_b).read_bytes()
    return ComparisonReport(
        scenario=meta_a["scenario"], g=meta_a["g"],
        example_a=meta_a["initial_example"], example_b=meta_b["initial_example"],
        mean_a=time_average(a["t"], a["ergotropy_norm"]),
        mean_b=time_average(b["t"], b["ergotropy_norm"]),
        peak_a=float(np.max(a["ergotropy_norm"])), peak_b=float(np.max(b["ergotropy_norm"])),
        identical=identical,
    )
