"""Named scenarios, sweeps and their on-disk outputs.

Every run writes ``trajectory.csv`` (one row per sample) and ``manifest.txt``
(flat ``key = value`` text).  Unprefixed manifest keys are the resolved
configuration; ``derived.``, ``diag.`` and ``meta.`` keys are informational.
"""

from __future__ import annotations

import csv
import logging
import math
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .entanglement import ESD_THRESHOLD, detect_esd, parity_populations
from .fock import TruncatedSpace, coherent_state, product_density
from .integrate import IntegrationError, IntegratorConfig
from .lindblad import Trajectory, evolve
from .model import FRAMES, SystemParams, build_rwa_generator, rate_gamma, upsilons
from .redfield import build_redfield, evolve_redfield

log = logging.getLogger(__name__)

SCENARIOS = ("custom", "fig1", "fig2a", "fig2c", "fig3", "sweep_temperature", "convergence")
SOLVERS = ("rwa", "redfield")
CSV_COLUMNS = (
    "t", "t_lambda", "t_upsilon", "p00", "p10", "p01", "s", "u", "v", "w",
    "negativity", "p_even", "p_odd", "trace_dev", "min_eig",
)
DEFAULT_TEMPERATURES = (0.0, 1e-3, 1e-2, 5e-2, 1e-1)
DEFAULT_TRUNCATIONS = (6, 8, 10)
OMEGA_ASSUMPTION = "temperatures are k_B T in units of omega0 (Omega = omega0)"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Run description; ``None`` means unset, to be filled by presets then defaults."""

    omega0: float | None = None
    mu1: float | None = None
    mu2: float | None = None
    lam: float | None = None
    gamma0: float | None = None
    temperature: float | None = None
    gamma2: float | None = None
    alpha1: complex | None = None
    alpha2: complex | None = None
    truncation: int | None = None
    solver: str | None = None
    frame: str | None = None
    t_final: float | None = None
    sample_count: int | None = None
    output_path: str | None = None
    scenario: str | None = None
    method: str | None = None
    sampling: str | None = None
    rel_tol: float | None = None
    abs_tol: float | None = None
    temperatures: tuple[float, ...] | None = None
    truncations: tuple[int, ...] | None = None

    def params(self) -> SystemParams:
        return SystemParams(
            omega0=self.omega0, mu1=self.mu1, mu2=self.mu2, lam=self.lam,
            gamma0=self.gamma0, temperature=self.temperature, gamma2=self.gamma2,
        )

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            t_final=self.t_final, sample_count=self.sample_count, rel_tol=self.rel_tol,
            abs_tol=self.abs_tol, method=self.method, sampling=self.sampling,
        )

    def upsilon(self) -> float:
        """Dephasing scale kappa0(lam) = Upsilon_- used for the t_upsilon column."""
        return dephasing_scale(self.gamma0, self.omega0, self.lam)


def dephasing_scale(gamma0: float, omega0: float, lam: float) -> float:
    return gamma0 * lam / (2 * omega0)


_BASE = dict(
    omega0=1.0, mu1=1e-3, mu2=1e-3, lam=5e-4, gamma0=1e-3, temperature=0.0,
    alpha1=1 + 0j, alpha2=0j, solver="rwa", frame="rotating", sample_count=2001,
    scenario="custom", sampling="linear", rel_tol=1e-8, abs_tol=1e-10,
)

_PRESETS = {
    "custom": {},
    "fig1": dict(alpha1=1 + 0j, alpha2=0j),
    "fig2a": dict(alpha1=1 + 0j, alpha2=0j),
    "fig2c": dict(alpha1=1 + 0j, alpha2=1 + 0j, sampling="log", method="propagator"),
    "fig3": dict(
        alpha1=1 + 0j, alpha2=1 + 0j, sampling="log", method="propagator",
        sample_count=4001, temperatures=DEFAULT_TEMPERATURES,
    ),
    "convergence": dict(alpha1=1 + 0j, alpha2=0j, truncations=DEFAULT_TRUNCATIONS),
}
_PRESETS["sweep_temperature"] = _PRESETS["fig3"]
_LONG_RUNS = ("fig2c", "fig3", "sweep_temperature")


def resolve(cfg: RunConfig) -> RunConfig:
    """Fill unset fields: scenario presets first, then global defaults.

    Explicitly set fields are never overridden.
    """
    scenario = cfg.scenario or "custom"
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    fill = dict(_BASE)
    fill.update(_PRESETS[scenario])
    fill["scenario"] = scenario
    out = replace(cfg, **{k: v for k, v in fill.items() if getattr(cfg, k) is None})

    solver = out.solver
    late = {}
    if out.truncation is None:
        late["truncation"] = 6 if solver == "redfield" else 10
    if out.method is None:
        late["method"] = "propagator" if solver == "redfield" else "rk"
    if out.t_final is None:
        if scenario in _LONG_RUNS:
            ups = dephasing_scale(out.gamma0, out.omega0, out.lam)
            late["t_final"] = 6 / ups if ups > 0 else 1 / max(out.gamma0, 1e-12)
        else:
            late["t_final"] = 8 * math.pi / out.lam if out.lam > 0 else 1 / max(out.gamma0, 1e-12)
    out = replace(out, **late)
    _validate(out)
    return out


def _validate(cfg: RunConfig) -> None:
    if cfg.solver not in SOLVERS:
        raise ConfigError(f"solver must be one of {SOLVERS}, got {cfg.solver!r}")
    if cfg.frame not in FRAMES:
        raise ConfigError(f"frame must be one of {FRAMES}, got {cfg.frame!r}")
    if cfg.truncation < 2:
        raise ConfigError(f"truncation must be >= 2, got {cfg.truncation}")
    try:
        cfg.params()
        cfg.integrator()
    except (ValueError, NotImplementedError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.temperatures is not None and len(cfg.temperatures) == 0:
        raise ConfigError("temperatures must be non-empty")
    if cfg.truncations is not None:
        ms = list(cfg.truncations)
        if any(m < 4 for m in ms) or ms != sorted(set(ms)):
            raise ConfigError(f"truncations must be strictly ascending and >= 4, got {ms}")


# ---------------------------------------------------------------------------
# key = value text


_INT_KEYS = {"truncation", "sample_count"}
_COMPLEX_KEYS = {"alpha1", "alpha2"}
_STR_KEYS = {"solver", "frame", "output_path", "scenario", "method", "sampling"}
_FIELD_NAMES = [f.name for f in fields(RunConfig)]
_ALIASES = {"lambda": "lam"}


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, complex):
        return repr(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(key: str, text: str):
    text = text.strip()
    if text.lower() == "none":
        return None
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _COMPLEX_KEYS:
            return complex(text.replace(" ", ""))
        if key in _STR_KEYS:
            return text
        if key == "temperatures":
            return tuple(float(x) for x in text.split(",") if x.strip())
        if key == "truncations":
            return tuple(int(x) for x in text.split(",") if x.strip())
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def read_key_values(path) -> list[tuple[str, str]]:
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            pairs.append((key.strip(), value.strip()))
    return pairs


def config_from_pairs(pairs, ignore_prefixed: bool = False) -> RunConfig:
    values = {}
    for key, text in pairs:
        if ignore_prefixed and "." in key:
            continue
        key = _ALIASES.get(key, key)
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _parse_value(key, text)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    return config_from_pairs(read_key_values(path))


def load_manifest(path) -> RunConfig:
    """The resolved configuration recorded in a manifest."""
    return config_from_pairs(read_key_values(path), ignore_prefixed=True)


def write_manifest(path, cfg: RunConfig, extra: dict) -> None:
    lines = [f"{k} = {_format(v)}" for k, v in asdict(cfg).items()]
    lines += [f"{k} = {_format(v)}" for k, v in extra.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def write_trajectory_csv(path, traj: Trajectory, lam: float, upsilon: float) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in traj.records:
            t = rec.time
            row = (
                t, t * lam / (2 * math.pi), t * upsilon, rec.p00, rec.p10, rec.p01,
                rec.s, rec.u, rec.v, rec.w, rec.negativity, rec.p_even, rec.p_odd,
                rec.trace_dev, rec.min_eig,
            )
            w.writerow([f"{x:.17g}" for x in row])


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


# ---------------------------------------------------------------------------
# runs


def initial_state(cfg: RunConfig):
    M = cfg.truncation
    return product_density(coherent_state(cfg.alpha1, M), coherent_state(cfg.alpha2, M))


def simulate(cfg: RunConfig, keep_states: bool = False) -> Trajectory:
    """Run the solver for a resolved config without touching the disk."""
    params = cfg.params()
    space = TruncatedSpace(cfg.truncation)
    rho0 = initial_state(cfg)
    icfg = cfg.integrator()
    if cfg.solver == "rwa":
        gen = build_rwa_generator(params, space, frame=cfg.frame)
        return evolve(gen, rho0, icfg, keep_states=keep_states)
    return evolve_redfield(build_redfield(params, space), rho0, icfg, keep_states=keep_states)


def derived_constants(cfg: RunConfig) -> dict:
    params = cfg.params()
    spec = params.spectrum(1)
    ups_p, ups_m = upsilons(spec, params.lam)
    p_odd = parity_populations(initial_state(cfg))[1]
    two = 2 * params.omega0
    return {
        "derived.upsilon_plus": ups_p,
        "derived.upsilon_minus": ups_m,
        "derived.gamma_plus_2omega0": rate_gamma(spec, two),
        "derived.gamma_minus_2omega0": rate_gamma(spec, -two),
        "derived.p_odd_initial": p_odd,
    }


def run_scenario(cfg: RunConfig, write: bool = True) -> tuple[Trajectory, dict]:
    """Resolve, run and (if ``output_path`` is set) write CSV plus manifest.

    On integration failure the manifest is still written, with
    ``meta.status = failed``, and the error is re-raised.
    """
    cfg = resolve(cfg)
    out_dir = Path(cfg.output_path) if (write and cfg.output_path) else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    extra = {"meta.code_version": __version__}
    extra.update(derived_constants(cfg))
    wall = _time.perf_counter()
    try:
        traj = simulate(cfg)
    except IntegrationError as exc:
        extra.update({"meta.status": "failed", "meta.error": str(exc).replace("\n", " ")})
        if out_dir is not None:
            write_manifest(out_dir / "manifest.txt", cfg, extra)
        raise
    extra["meta.status"] = "ok"
    extra["meta.wall_time"] = _time.perf_counter() - wall
    extra["diag.max_trace_drift"] = traj.max_trace_drift
    extra["diag.min_eigenvalue"] = traj.min_eigenvalue
    extra["diag.p_even_drift"] = traj.p_even_drift
    extra["diag.max_hermiticity_error"] = float(np.max(traj.diagnostics["hermiticity"]))
    if cfg.scenario in _LONG_RUNS:
        extra["meta.temperature_units"] = OMEGA_ASSUMPTION
    if out_dir is not None:
        write_trajectory_csv(out_dir / "trajectory.csv", traj, cfg.lam, cfg.upsilon())
        write_manifest(out_dir / "manifest.txt", cfg, extra)
    return traj, extra


@dataclass(frozen=True)
class SweepRow:
    temperature: float
    esd_time: float | None
    rebirth_time: float | None
    negativity_at_t_final: float


def _sweep_one(cfg: RunConfig) -> SweepRow:
    traj, _ = run_scenario(cfg)
    esd, rebirth = detect_esd(traj.times, traj.column("negativity"), ESD_THRESHOLD)
    return SweepRow(cfg.temperature, esd, rebirth, traj.records[-1].negativity)


def _temperature_dir(T: float) -> str:
    return f"T_{T:.6g}"


def sweep_temperature(cfg: RunConfig, temperatures=None, workers: int = 1) -> list[SweepRow]:
    """fig2c-style runs at each temperature plus ``summary.csv``."""
    base = cfg if cfg.scenario not in (None, "custom") else replace(cfg, scenario="sweep_temperature")
    base = resolve(base)
    temps = tuple(temperatures if temperatures is not None else base.temperatures)
    if not temps:
        raise ConfigError("temperatures must be non-empty")
    root = Path(base.output_path) if base.output_path else None
    runs = [
        replace(
            base,
            temperature=float(T),
            temperatures=temps,
            output_path=str(root / _temperature_dir(T)) if root else None,
        )
        for T in temps
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, runs))
    else:
        rows = [_sweep_one(r) for r in runs]
    if root is not None:
        root.mkdir(parents=True, exist_ok=True)
        with open(root / "summary.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("T", "esd_time", "rebirth_time", "negativity_at_t_final"))
            for r in rows:
                w.writerow((
                    f"{r.temperature:.17g}",
                    "none" if r.esd_time is None else f"{r.esd_time:.17g}",
                    "none" if r.rebirth_time is None else f"{r.rebirth_time:.17g}",
                    f"{r.negativity_at_t_final:.17g}",
                ))
    return rows


@dataclass(frozen=True)
class ConvergenceRow:
    m_from: int
    m_to: int
    sup_diff_negativity: float
    sup_diff_p00: float


def convergence_report(cfg: RunConfig, truncations=None) -> list[ConvergenceRow]:
    """Sup-norm differences of negativity and P00 between consecutive truncations."""
    base = cfg if cfg.scenario not in (None, "custom") else replace(cfg, scenario="convergence")
    ms = tuple(truncations if truncations is not None else (base.truncations or DEFAULT_TRUNCATIONS))
    base = resolve(replace(base, truncations=ms, truncation=ms[0]))
    root = Path(base.output_path) if base.output_path else None
    series = []
    for M in ms:
        run = replace(base, truncation=M, output_path=str(root / f"M_{M}") if root else None)
        traj, _ = run_scenario(run)
        series.append((traj.column("negativity"), traj.column("p00")))
    rows = [
        ConvergenceRow(
            ms[k], ms[k + 1],
            float(np.max(np.abs(series[k + 1][0] - series[k][0]))),
            float(np.max(np.abs(series[k + 1][1] - series[k][1]))),
        )
        for k in range(len(ms) - 1)
    ]
    if root is not None:
        root.mkdir(parents=True, exist_ok=True)
        with open(root / "convergence.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("m_from", "m_to", "sup_diff_negativity", "sup_diff_p00"))
            for r in rows:
                w.writerow((r.m_from, r.m_to, f"{r.sup_diff_negativity:.17g}", f"{r.sup_diff_p00:.17g}"))
    return rows
