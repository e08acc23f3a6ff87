"""Command-line driver: YAML scenario configs in, CSV tables and a JSON report out.

Usage::

    usc-raman run config.yaml [--out DIR] [--n-max N] [--threads K]
    usc-raman preset 4          # print the built-in config for figure 4

Exit status is 0 on success, 1 on invalid input and 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import dynamics, effective, hilbert, lindblad, rabi
from .errors import NumericalError, ValidationError
from .lindblad import DampingRates
from .rabi import SystemParams

SCENARIOS = (
    "coefficient_sweep", "p2_offresonant", "p2_resonant", "p2_strong_drive",
    "flux_trajectory", "flux_vs_eta", "g2_vs_omega_p", "steady_state_check",
)
DISSIPATIVE = ("flux_trajectory", "flux_vs_eta", "g2_vs_omega_p", "steady_state_check")

PARAM_KEYS = ("omega_c", "omega_b", "omega_e", "omega_g", "lam", "omega_p", "omega_s",
              "Omega_p", "Omega_s", "eta", "detuning")
PARAM_ALIASES = {"lambda": "lam"}
RATE_KEYS = ("gamma", "gamma1", "gamma2", "gamma3")
NUMERIC_KEYS = ("n_max", "m_cutoff", "dt_max", "t_final", "window", "samples", "t_max", "numeric")
SCAN_KEYS = {
    "coefficient_sweep": ("lam",),
    "p2_offresonant": ("detuning_ratio",),
    "p2_resonant": ("eta",),
    "p2_strong_drive": ("Omega_p",),
    "flux_trajectory": ("eta",),
    "flux_vs_eta": ("eta", "Omega_p"),
    "g2_vs_omega_p": ("Omega_p",),
    "steady_state_check": (),
}
TOP_KEYS = ("scenario", "params", "rates", "numerics", "scan", "output_path")


class ConfigError(ValidationError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    rates: DampingRates = field(default_factory=DampingRates)
    numerics: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    output_path: str = "out"

    def n_max(self) -> int:
        default = lindblad.DEFAULT_N_MAX if self.scenario in DISSIPATIVE else rabi.DEFAULT_N_MAX
        return int(self.numerics.get("n_max") or default)

    def space(self) -> hilbert.TruncatedSpace:
        return hilbert.build_space(self.n_max())

    def m_cutoff(self) -> int:
        return int(self.numerics.get("m_cutoff") or effective.DEFAULT_M_CUTOFF)


# ---------------------------------------------------------------------------
# configuration

_ETA_RE = re.compile(r"^(?:(?P<scale>[0-9.]+(?:e[+-]?\d+)?)\s*\*?\s*)?eta_c"
                     r"(?:\s*(?P<sign>[+-])\s*(?P<shift>[0-9.]+(?:e[+-]?\d+)?))?$", re.IGNORECASE)


def resolve_eta(value, eta_c: float) -> float:
    """Numeric Stokes ratio from a number or an expression like ``eta_c+2`` or ``0.5*eta_c``."""
    if isinstance(value, bool):
        raise ConfigError(f"eta must be a number or an eta_c expression, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, (int, float)):
        eta = float(value)
    else:
        m = _ETA_RE.match(str(value).strip().replace(" ", ""))
        if m is None:
            raise ConfigError(f"cannot parse eta expression {value!r}")
        eta = float(m["scale"] or 1.0) * eta_c
        if m["sign"]:
            eta += float(m["shift"]) if m["sign"] == "+" else -float(m["shift"])
    if not math.isfinite(eta) or eta < 0:
        raise ConfigError(f"eta must be finite and non-negative, got {value!r}")
    return eta


def _number(section, key, value):
    # YAML 1.1 reads exponent literals without a dot (``2e-3``) as strings
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    return float(value)


def _range(key, spec):
    """List from ``[a, b, ...]`` or ``{start, stop, step}`` / ``{start, stop, num, log}``."""
    if isinstance(spec, list):
        if key == "eta":
            return spec
        return [_number("scan", key, v) for v in spec]
    if isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "step", "num", "log"}
        if unknown:
            raise ConfigError(f"scan.{key}: unknown key(s) {sorted(unknown)}")
        start, stop = _number(f"scan.{key}", "start", spec.get("start")), _number(f"scan.{key}", "stop", spec.get("stop"))
        if "step" in spec:
            step = _number(f"scan.{key}", "step", spec["step"])
            if step <= 0:
                raise ConfigError(f"scan.{key}.step must be positive")
            n = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        num = int(spec.get("num", 0))
        if num < 1:
            raise ConfigError(f"scan.{key} needs 'step' or a positive 'num'")
        if spec.get("log"):
            return [float(x) for x in np.geomspace(start, stop, num)]
        return [float(x) for x in np.linspace(start, stop, num)]
    raise ConfigError(f"scan.{key} must be a list or a range mapping")


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a config mapping.  Parameter, rate and numerics keys may be nested or flat."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    scenario = data.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}; got {scenario!r}")
    params, rates, numerics, scan = {}, {}, {}, {}

    def put(section, key, value):
        key = PARAM_ALIASES.get(key, key)
        if section in ("params", None) and key in PARAM_KEYS:
            if key != "eta":
                value = _number("params", key, value)
            elif isinstance(value, str):
                resolve_eta(value, 1.0)
            params[key] = value
        elif section in ("rates", None) and key in RATE_KEYS:
            rates[key] = _number("rates", key, value)
        elif section in ("numerics", None) and key in NUMERIC_KEYS:
            numerics[key] = value if key == "numeric" else _number("numerics", key, value)
        else:
            where = f"{section}." if section else ""
            raise ConfigError(f"unknown key {where}{key!r}")

    for key, value in data.items():
        if key in ("params", "rates", "numerics"):
            if not isinstance(value, dict):
                raise ConfigError(f"{key} must be a mapping")
            for k, v in value.items():
                put(key, k, v)
        elif key == "scan":
            if not isinstance(value, dict):
                raise ConfigError("scan must be a mapping")
            allowed = SCAN_KEYS[scenario]
            for k, v in value.items():
                k = PARAM_ALIASES.get(k, k)
                if k not in allowed:
                    raise ConfigError(f"unknown key scan.{k!r} for scenario {scenario}")
                scan[k] = _range(k, v)
        elif key in ("scenario", "output_path"):
            continue
        else:
            put(None, key, value)

    if "gamma" in rates:
        g = rates.pop("gamma")
        for k in ("gamma1", "gamma2", "gamma3"):
            rates.setdefault(k, g)
    try:
        damping = DampingRates(**rates)
        SystemParams(**{k: v for k, v in params.items() if k not in ("eta", "detuning")})
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    for key in ("n_max", "m_cutoff", "samples"):
        if key in numerics and (numerics[key] != int(numerics[key]) or numerics[key] < 1):
            raise ConfigError(f"numerics.{key} must be a positive integer")
    for key in ("dt_max", "t_final", "window", "t_max"):
        if key in numerics and numerics[key] <= 0:
            raise ConfigError(f"numerics.{key} must be positive")
    return ScenarioConfig(scenario=scenario, params=params, rates=damping, numerics=numerics,
                          scan=scan, output_path=str(data.get("output_path", "out")))


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"cannot parse {path}{where}: {getattr(exc, 'problem', exc)}") from None
    return parse_config(data)


# ---------------------------------------------------------------------------
# presets

_FIG6_COMMON = {"lam": 0.6, "Omega_p": 8e-3}

PRESETS = {
    "2": {"scenario": "coefficient_sweep", "scan": {"lam": {"start": 0.0, "stop": 1.5, "step": 0.01}},
          "output_path": "fig2"},
    "3": {"scenario": "p2_offresonant", "params": {"lam": 0.5, "Omega_p": 2e-3},
          "scan": {"detuning_ratio": [5, 7.5, 10]}, "output_path": "fig3"},
    "4": {"scenario": "p2_resonant", "params": {"lam": 0.5, "Omega_p": 0.8e-3},
          "scan": {"eta": [3, "eta_c", "eta_c+2"]}, "numerics": {"samples": 1500}, "output_path": "fig4"},
    "5": {"scenario": "p2_strong_drive", "params": {"lam": 0.5, "eta": "eta_c"},
          "scan": {"Omega_p": [4e-3, 2e-3, 0.8e-3]}, "output_path": "fig5"},
    "6a": {"scenario": "flux_trajectory", "params": dict(_FIG6_COMMON), "rates": {"gamma": 2e-2},
           "scan": {"eta": [0, "eta_c", "2*eta_c"]}, "numerics": {"t_final": 1000}, "output_path": "fig6a"},
    "6b": {"scenario": "flux_trajectory", "params": dict(_FIG6_COMMON), "rates": {"gamma": 2e-3},
           "scan": {"eta": [0, "eta_c", "2*eta_c"]}, "numerics": {"t_final": 4000}, "output_path": "fig6b"},
    "6c": {"scenario": "flux_trajectory", "params": dict(_FIG6_COMMON, omega_p=4.85), "rates": {"gamma": 2e-3},
           "scan": {"eta": [0, "eta_c", "2*eta_c"]}, "numerics": {"t_final": 4000}, "output_path": "fig6c"},
    "7": {"scenario": "flux_vs_eta", "params": {"lam": 0.6}, "rates": {"gamma": 2e-3},
          "scan": {"Omega_p": [1e-3, 4e-3, 8e-3], "eta": [0, "0.5*eta_c", "eta_c", "1.5*eta_c", "2*eta_c", "3*eta_c"]},
          "output_path": "fig7"},
    "8": {"scenario": "g2_vs_omega_p", "params": {"lam": 0.5, "eta": "eta_c"}, "rates": {"gamma": 2e-3},
          "scan": {"Omega_p": [2.5e-4, 5e-4, 1e-3, 2e-3, 3e-3]}, "output_path": "fig8"},
}
PRESET_ALIASES = {"6": "6b"}


def preset(figure_id: str) -> dict:
    key = PRESET_ALIASES.get(str(figure_id), str(figure_id))
    if key not in PRESETS:
        raise ConfigError(f"no preset for figure {figure_id!r}; available: {', '.join(PRESETS)}")
    return json.loads(json.dumps(PRESETS[key]))


# ---------------------------------------------------------------------------
# parameter resolution

def base_params(cfg: ScenarioConfig) -> SystemParams:
    keys = ("omega_c", "omega_b", "omega_e", "omega_g", "lam")
    return SystemParams(**{k: cfg.params[k] for k in keys if k in cfg.params})


def drive_params(cfg: ScenarioConfig, spectrum: rabi.RabiSpectrum, Omega_p: float | None = None,
                 eta=None) -> SystemParams:
    """Drive frequencies and strengths for one scenario point.

    Without an explicit ``omega_p`` the pump is tuned to ``E_0 - omega_b`` and
    the Stokes field two cavity quanta below; ``eta`` defaults to ``eta_c``.
    """
    p = base_params(cfg)
    Omega_p = cfg.params.get("Omega_p", 0.0) if Omega_p is None else Omega_p
    eta = cfg.params.get("eta") if eta is None else eta
    if "omega_p" in cfg.params:
        omega_p = cfg.params["omega_p"]
    else:
        omega_p = spectrum.ground_energy - p.omega_b - cfg.params.get("detuning", 0.0)
    omega_s = cfg.params.get("omega_s", omega_p - 2 * p.omega_c)
    if eta is not None:
        Omega_s = resolve_eta(eta, spectrum.eta_c) * Omega_p
    elif "Omega_s" in cfg.params:
        Omega_s = cfg.params["Omega_s"]
    else:
        Omega_s = spectrum.eta_c * Omega_p
    return p.with_(omega_p=omega_p, omega_s=omega_s, Omega_p=Omega_p, Omega_s=Omega_s)


def _require_pump(Omega_p):
    if not Omega_p or Omega_p <= 0:
        raise ConfigError("params.Omega_p must be positive for driven scenarios")


def describe(params: SystemParams, spectrum: rabi.RabiSpectrum, m_cutoff: int) -> dict:
    out = asdict(params)
    out.update(E0=spectrum.ground_energy, eta_c=spectrum.eta_c, eta=params.eta if params.Omega_p else None,
               validity=effective.validity_monitors(params, spectrum, m_cutoff) if params.Omega_p else None)
    return _jsonable(out)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ---------------------------------------------------------------------------
# scenarios

def _pool_map(fn, items, threads):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return v


def _coefficient_sweep(cfg, out, threads):
    lams = cfg.scan.get("lam") or _range("lam", {"start": 0.0, "stop": 1.5, "step": 0.01})
    if any(lam < 0 for lam in lams):
        raise ConfigError("scan.lam values must be non-negative")
    rows = rabi.coefficient_sweep(lams, cfg.space(), base_params(cfg), workers=threads)
    path = out / "coefficients.csv"
    _write_csv(path, ["lambda", "c00", "c02", "c04"], rows)
    crossing = [r[0] for r in rows if r[2] > r[1]]
    return [path], {"lambda_c02_exceeds_c00": crossing[0] if crossing else None}, []


def _p2_point(job):
    params, n_max, mode, numerics = job
    space = hilbert.build_space(n_max)
    traj = dynamics.p2_comparison(params, space, mode, t_final=numerics.get("t_final"),
                                  dt_max=numerics.get("dt_max"), samples=int(numerics.get("samples", 2000)),
                                  m_cutoff=int(numerics.get("m_cutoff") or effective.DEFAULT_M_CUTOFF))
    return traj.t, traj["P2_exact"], traj["P2_effective"], traj["norm"]


def _p2_scenario(cfg, out, threads, label, mode, points):
    results = _pool_map(_p2_point, [(p, cfg.n_max(), mode, cfg.numerics) for _, p in points], threads)
    rows, summary = [], []
    for (value, _), (t, exact, eff, norm) in zip(points, results):
        rows.extend((value, ti, a, b, nm) for ti, a, b, nm in zip(t, exact, eff, norm))
        summary.append({label: value, "max_P2_exact": float(exact.max()), "max_P2_effective": float(eff.max()),
                        "sup_mismatch": float(np.max(np.abs(exact - eff))),
                        "max_norm_drift": float(np.max(np.abs(norm - 1)))})
    path = out / f"{cfg.scenario}.csv"
    _write_csv(path, [label, "t", "P2_exact", "P2_effective", "norm"], rows)
    return [path], {"curves": summary}


def _p2_offresonant(cfg, out, threads):
    spectrum = rabi.rabi_spectrum(base_params(cfg), cfg.space())
    Omega_p = cfg.params.get("Omega_p")
    _require_pump(Omega_p)
    ratios = cfg.scan.get("detuning_ratio") or [cfg.params.get("detuning", 10 * Omega_p) / Omega_p]
    points = []
    for k in ratios:
        base = base_params(cfg)
        ratio = None
        if "eta" in cfg.params:
            ratio = resolve_eta(cfg.params["eta"], spectrum.eta_c)
        p = effective.offresonant_drive(base, spectrum, Omega_p, float(k) * Omega_p, ratio=ratio, m_cutoff=cfg.m_cutoff())
        points.append((float(k), p))
    paths, summary = _p2_scenario(cfg, out, threads, "detuning_ratio", "off_resonant", points)
    return paths, summary, [describe(p, spectrum, cfg.m_cutoff()) for _, p in points]


def _p2_resonant(cfg, out, threads):
    spectrum = rabi.rabi_spectrum(base_params(cfg), cfg.space())
    _require_pump(cfg.params.get("Omega_p"))
    etas = cfg.scan.get("eta") or [cfg.params.get("eta", "eta_c")]
    points = [(resolve_eta(e, spectrum.eta_c), drive_params(cfg, spectrum, eta=e)) for e in etas]
    paths, summary = _p2_scenario(cfg, out, threads, "eta", "resonant", points)
    return paths, summary, [describe(p, spectrum, cfg.m_cutoff()) for _, p in points]


def _p2_strong_drive(cfg, out, threads):
    spectrum = rabi.rabi_spectrum(base_params(cfg), cfg.space())
    pumps = cfg.scan.get("Omega_p") or [cfg.params.get("Omega_p")]
    for v in pumps:
        _require_pump(v)
    points = [(float(v), drive_params(cfg, spectrum, Omega_p=float(v))) for v in pumps]
    paths, summary = _p2_scenario(cfg, out, threads, "Omega_p", "resonant", points)
    return paths, summary, [describe(p, spectrum, cfg.m_cutoff()) for _, p in points]


def _flux_point(job):
    params, rates, n_max, numerics = job
    space = hilbert.build_space(n_max)
    rho0 = hilbert.projector(hilbert.basis_state(space, "b", 0))
    t_final = numerics.get("t_final") or 5.0 / min(g for g in rates.as_tuple() if g > 0)
    traj = lindblad.master_evolve(rho0, params, space, rates, t_final, dt_max=numerics.get("dt_max"),
                                  samples=int(numerics.get("samples", 1000)))
    return traj.t, traj["phi_out"], traj["trace"], traj["min_eig"]


def _flux_trajectory(cfg, out, threads):
    if not any(cfg.rates.as_tuple()):
        raise ConfigError("flux_trajectory needs at least one nonzero damping rate")
    spectrum = rabi.rabi_spectrum(base_params(cfg), cfg.space())
    _require_pump(cfg.params.get("Omega_p"))
    etas = cfg.scan.get("eta") or [cfg.params.get("eta", "eta_c")]
    points = [(resolve_eta(e, spectrum.eta_c), drive_params(cfg, spectrum, eta=e)) for e in etas]
    results = _pool_map(_flux_point, [(p, cfg.rates, cfg.n_max(), cfg.numerics) for _, p in points], threads)
    rows, summary = [], []
    for (eta, _), (t, phi, tr, mn) in zip(points, results):
        rows.extend(zip([eta] * len(t), t, phi, tr, mn))
        summary.append({"eta": eta, "phi_out_final": float(phi[-1]), "phi_out_max": float(phi.max()),
                        "max_trace_drift": float(np.max(np.abs(tr - 1))), "min_eig": float(mn.min())})
    path = out / "flux_trajectory.csv"
    _write_csv(path, ["eta", "t", "phi_out", "trace", "min_eig"], rows)
    return [path], {"curves": summary}, [describe(p, spectrum, cfg.m_cutoff()) for _, p in points]


def _steady_point(job):
    params, rates, n_max, numerics, numeric = job
    space = hilbert.build_space(n_max)
    jumps = lindblad.build_jumps(params, space, rates)
    try:
        rho4 = lindblad.lambda_liouvillian_steady(params, space, rates, jumps)
        phi_a, g2_a = lindblad.flux_ss_analytic(rho4, rates.gamma3), _safe_g2(rho4)
    except ValidationError:
        phi_a, g2_a = float("nan"), float("nan")
    if not numeric:
        return phi_a, g2_a, float("nan"), float("nan"), None
    ss = lindblad.steady_state_numeric(params, space, rates, window=numerics.get("window"),
                                       t_max=numerics.get("t_max", 1e5), dt_max=numerics.get("dt_max"),
                                       jumps=jumps)
    return phi_a, g2_a, ss.phi_out, ss.g2, ss.t_end


def _safe_g2(rho4):
    try:
        return lindblad.g2_ss_analytic(rho4)
    except NumericalError:
        return float("nan")


def _steady_jobs(cfg, points):
    numeric = bool(cfg.numerics.get("numeric", True))
    return [(p, cfg.rates, cfg.n_max(), cfg.numerics, numeric) for p in points]


def _flux_vs_eta(cfg, out, threads):
    spectrum = rabi.rabi_spectrum(base_params(cfg), cfg.space())
    pumps = cfg.scan.get("Omega_p") or [cfg.params.get("Omega_p")]
    etas = cfg.scan.get("eta") or [cfg.params.get("eta", "eta_c")]
    for v in pumps:
        _require_pump(v)
    grid = [(float(op), resolve_eta(e, spectrum.eta_c), drive_params(cfg, spectrum, Omega_p=float(op), eta=e))
            for op in pumps for e in etas]
    results = _pool_map(_steady_point, _steady_jobs(cfg, [g[2] for g in grid]), threads)
    rows = [(op, eta, r[2], r[0]) for (op, eta, _), r in zip(grid, results)]
    path = out / "flux_vs_eta.csv"
    _write_csv(path, ["Omega_p", "eta", "phi_ss_numeric", "phi_ss_analytic"], rows)
    return [path], {"points": len(rows)}, [describe(g[2], spectrum, cfg.m_cutoff()) for g in grid]


def _g2_vs_omega_p(cfg, out, threads):
    spectrum = rabi.rabi_spectrum(base_params(cfg), cfg.space())
    pumps = cfg.scan.get("Omega_p") or [cfg.params.get("Omega_p")]
    for v in pumps:
        _require_pump(v)
    points = [(float(op), drive_params(cfg, spectrum, Omega_p=float(op))) for op in pumps]
    results = _pool_map(_steady_point, _steady_jobs(cfg, [p for _, p in points]), threads)
    rows = [(op, r[3], r[1]) for (op, _), r in zip(points, results)]
    path = out / "g2_vs_omega_p.csv"
    _write_csv(path, ["omega_p", "g2_numeric", "g2_analytic"], rows)
    return [path], {"points": len(rows)}, [describe(p, spectrum, cfg.m_cutoff()) for _, p in points]


def _steady_state_check(cfg, out, threads):
    spectrum = rabi.rabi_spectrum(base_params(cfg), cfg.space())
    _require_pump(cfg.params.get("Omega_p"))
    params = drive_params(cfg, spectrum)
    phi_a, g2_a, phi_n, g2_n, t_end = _steady_point(_steady_jobs(cfg, [params])[0])
    rows = [("phi_out", phi_n, phi_a, phi_n / phi_a - 1 if phi_a else float("nan")),
            ("g2", g2_n, g2_a, g2_n / g2_a - 1 if g2_a else float("nan"))]
    path = out / "steady_state.csv"
    _write_csv(path, ["quantity", "numeric", "analytic", "relative_difference"], rows)
    return [path], {"t_end": t_end, "phi_rel_diff": rows[0][3], "g2_rel_diff": rows[1][3]}, \
        [describe(params, spectrum, cfg.m_cutoff())]


RUNNERS = {
    "coefficient_sweep": _coefficient_sweep,
    "p2_offresonant": _p2_offresonant,
    "p2_resonant": _p2_resonant,
    "p2_strong_drive": _p2_strong_drive,
    "flux_trajectory": _flux_trajectory,
    "flux_vs_eta": _flux_vs_eta,
    "g2_vs_omega_p": _g2_vs_omega_p,
    "steady_state_check": _steady_state_check,
}


def run_scenario(cfg: ScenarioConfig, out_dir=None, threads: int = 1) -> dict:
    """Execute ``cfg`` and write its CSV files plus ``report.json``; returns the report."""
    out = Path(out_dir or cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    paths, summary, points = RUNNERS[cfg.scenario](cfg, out, max(1, int(threads)))
    spectrum = rabi.rabi_spectrum(base_params(cfg), cfg.space())
    report = {
        "scenario": cfg.scenario,
        "config": {"params": cfg.params, "rates": asdict(cfg.rates), "numerics": cfg.numerics,
                   "scan": cfg.scan, "n_max": cfg.n_max()},
        "E0": spectrum.ground_energy,
        "eta_c": spectrum.eta_c,
        "points": points,
        "summary": summary,
        "outputs": [str(p) for p in paths],
        "wall_time_s": time.perf_counter() - start,
    }
    report = _jsonable(report)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usc-raman", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config", help="YAML scenario file")
    run.add_argument("--out", help="output directory (overrides output_path)")
    run.add_argument("--n-max", type=int, help="Fock cutoff (overrides numerics.n_max)")
    run.add_argument("--threads", type=int, default=1, help="worker processes for scans")
    pre = sub.add_parser("preset", help="print the built-in config for a figure")
    pre.add_argument("figure_id", help=f"one of {', '.join(PRESETS)}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            sys.stdout.write(yaml.safe_dump(preset(args.figure_id), sort_keys=False))
            return 0
        cfg = load_config(args.config)
        if args.n_max is not None:
            cfg.numerics["n_max"] = args.n_max
            cfg.space()
        report = run_scenario(cfg, args.out, args.threads)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    for path in report["outputs"]:
        print(path)
    print(f"done in {report['wall_time_s']:.1f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
