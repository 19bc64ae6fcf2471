"""Orchestration: detuning sweeps, resonance detection, config files, CLI.

A sweep steps a log-spaced detuning grid, runs the configured quench at
every point, and writes one CSV row per grid point plus a JSON summary.
The pipeline is deterministic (no stochastic components), so identical
configs produce bit-identical CSV files, and sweep points are independent,
so a worker pool changes nothing but wall time.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:                       # python < 3.11
    import tomli as tomllib

from . import __version__
from .analytic_dimer import entropy_time_avg, variance_time_avg
from .dynamics import (GaussianPulse, InitProtocol, LindbladRates, QuenchConfig,
                       initialize_with_ancilla, quench)
from .effective import dimer_effective
from .lattice import LatticeGraph, chain
from .observables import (linear_entropy_time_avg, two_point_correlation,
                          variance_time_avg_numeric)
from .polariton import JCParams, rwa_report

log = logging.getLogger("jchsim")

_PAIR_SUFFIX = {1: "ij", 2: "ik", 3: "il"}


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    """Everything needed to run one sweep (or one quench point)."""

    graph: LatticeGraph
    mode: str = "closed"                  # closed | open
    omega: float = 1.0
    g: float = 0.01
    j_final: float = 1e-4
    n_max: int = 5
    representation: str = "auto"          # auto | full_fock | effective
    n_time_samples: int = 2000
    delta_over_g_min: float = 0.1
    delta_over_g_max: float = 100.0
    points: int = 60
    spacing: str = "log"                  # log | linear
    workers: int = 1
    rates: LindbladRates = field(default_factory=LindbladRates)
    init: str = "protocol"                # protocol | ideal   (open mode)
    g_a: float = 50.0
    park_offset: float | None = None
    pulse: str = "gaussian"               # gaussian | ideal
    pulse_sigma: float = 0.01
    ancilla_dissipation: bool = True
    excitation_cap: int | None = None
    csv_path: str = "sweep.csv"
    json_path: str = "summary.json"
    log_path: str = "run.log"

    def resolved_representation(self) -> str:
        if self.representation != "auto":
            return self.representation
        if self.mode == "open":
            return "full_fock"
        return "full_fock" if self.graph.num_sites <= 3 else "effective"

    def grid(self) -> np.ndarray:
        lo, hi, n = self.delta_over_g_min, self.delta_over_g_max, self.points
        if not (lo > 0 and hi > lo and n >= 2):
            raise ConfigError("sweep.min/max/points define an empty grid")
        if self.spacing == "log":
            return np.logspace(math.log10(lo), math.log10(hi), n)
        if self.spacing == "linear":
            return np.linspace(lo, hi, n)
        raise ConfigError(f"sweep.spacing: unknown value {self.spacing!r}")

    def protocol(self) -> InitProtocol:
        pulse = None if self.pulse == "ideal" else GaussianPulse(sigma=self.pulse_sigma)
        return InitProtocol(g_a=self.g_a, park_offset=self.park_offset,
                            pulse=pulse,
                            ancilla_dissipation=self.ancilla_dissipation)


OPEN_DEFAULTS = dict(omega=5000.0, g=200.0, j_final=2.0, n_max=4,
                     n_time_samples=800, delta_over_g_min=1.0,
                     delta_over_g_max=10.0, points=60)

_LATTICE_NAMES = {"dimer": 2, "trimer": 3, "tetramer": 4}

_SCHEMA = {
    "lattice": {"topology": str, "sites": int, "edges": list},
    "physics": {"omega": float, "g": float, "delta_over_g": float},
    "quench": {"j_final": float, "t_end": float, "n_time_samples": int,
               "representation": str, "n_max": int},
    "dissipation": {"gamma": float, "gamma_phi": float, "kappa": float},
    "init_protocol": {"g_a": float, "park_offset": float, "pulse": str,
                      "sigma": float, "ancilla_dissipation": bool,
                      "init": str},
    "sweep": {"min": float, "max": float, "points": int, "spacing": str,
              "workers": int},
    "output": {"csv": str, "json": str, "log": str},
}


def _coerce(section: str, key: str, value, want):
    if want is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if want is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, want):
        return value
    raise ConfigError(f"config key {section}.{key}: expected {want.__name__}, "
                      f"got {type(value).__name__}")


def validate_config(raw: dict) -> dict:
    """Check sections and key types; returns a flat {section: {key: value}}."""
    out = {}
    for section, body in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(f"config section [{section}] is not recognized")
        if not isinstance(body, dict):
            raise ConfigError(f"config section [{section}] must be a table")
        out[section] = {}
        for key, value in body.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"config key {section}.{key} is not recognized")
            out[section][key] = _coerce(section, key, value, _SCHEMA[section][key])
    return out


def lattice_from_config(body: dict) -> LatticeGraph:
    if "edges" in body:
        edges = tuple(tuple(e) for e in body["edges"])
        sites = body.get("sites", 1 + max(max(e) for e in edges))
        return LatticeGraph(sites, edges)
    topology = body.get("topology", "chain")
    if topology in _LATTICE_NAMES:
        return chain(_LATTICE_NAMES[topology])
    if topology == "chain":
        if "sites" not in body:
            raise ConfigError("config key lattice.sites is required for a chain")
        return chain(body["sites"])
    raise ConfigError(f"config key lattice.topology: unknown value {topology!r}")


def load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
    return validate_config(raw)


def sweep_config_from_dict(cfg: dict, mode: str | None = None) -> SweepConfig:
    """Assemble a SweepConfig from a validated config dict."""
    mode = mode or ("open" if cfg.get("dissipation") else "closed")
    base = dict(OPEN_DEFAULTS) if mode == "open" else {}
    kw = dict(graph=lattice_from_config(cfg.get("lattice", {"topology": "trimer"})),
              mode=mode, **base)
    phys = cfg.get("physics", {})
    for src, dst in (("omega", "omega"), ("g", "g")):
        if src in phys:
            kw[dst] = phys[src]
    q = cfg.get("quench", {})
    for src, dst in (("j_final", "j_final"), ("n_time_samples", "n_time_samples"),
                     ("representation", "representation"), ("n_max", "n_max")):
        if src in q:
            kw[dst] = q[src]
    dis = cfg.get("dissipation", {})
    if dis:
        kw["rates"] = LindbladRates(gamma=dis.get("gamma", 0.0),
                                    gamma_phi=dis.get("gamma_phi", 0.0),
                                    kappa=dis.get("kappa", 0.0))
    elif mode == "open":
        kw["rates"] = LindbladRates(gamma=0.035, gamma_phi=0.045, kappa=0.225)
    ini = cfg.get("init_protocol", {})
    for src, dst in (("g_a", "g_a"), ("park_offset", "park_offset"),
                     ("pulse", "pulse"), ("sigma", "pulse_sigma"),
                     ("ancilla_dissipation", "ancilla_dissipation"),
                     ("init", "init")):
        if src in ini:
            kw[dst] = ini[src]
    sw = cfg.get("sweep", {})
    for src, dst in (("min", "delta_over_g_min"), ("max", "delta_over_g_max"),
                     ("points", "points"), ("spacing", "spacing"),
                     ("workers", "workers")):
        if src in sw:
            kw[dst] = sw[src]
    out = cfg.get("output", {})
    for src, dst in (("csv", "csv_path"), ("json", "json_path"), ("log", "log_path")):
        if src in out:
            kw[dst] = out[src]
    return SweepConfig(**kw)


# ---------------------------------------------------------------------------
# sweep execution
# ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    grid: np.ndarray
    columns: list
    records: list                        # one dict per grid point

    def curve(self, name: str) -> np.ndarray:
        return np.array([r.get(name, math.nan) for r in self.records], dtype=float)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for rec in self.records:
                writer.writerow([_fmt(rec.get(c)) for c in self.columns])

    @classmethod
    def from_csv(cls, path: str) -> "SweepResult":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            columns = next(reader)
            records = []
            for row in reader:
                rec = {}
                for c, v in zip(columns, row):
                    try:
                        rec[c] = float(v)
                    except ValueError:
                        rec[c] = v
                records.append(rec)
        grid = np.array([r["delta_over_g"] for r in records], dtype=float)
        return cls(grid, columns, records)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _point_params(cfg: SweepConfig, x: float) -> JCParams:
    return JCParams.from_delta_over_g(x, cfg.g, cfg.omega)


def _pair_columns(num_sites: int) -> list:
    return [_PAIR_SUFFIX.get(m, f"i{m}") for m in range(1, num_sites)]


def _closed_point(cfg: SweepConfig, x: float) -> dict:
    p = _point_params(cfg, x)
    h = dimer_effective(p, cfg.j_final)
    rec = {"delta_over_g": x,
           "var_dimer_analytic": variance_time_avg(h, cfg.j_final)}
    report = rwa_report(p, cfg.j_final)
    qcfg = QuenchConfig(cfg.graph, p, cfg.j_final,
                        n_time_samples=cfg.n_time_samples, n_max=cfg.n_max,
                        representation=cfg.resolved_representation())
    res = quench(qcfg)
    traj = res.trajectory
    if cfg.graph.num_sites == 2:
        rec["entropy_dimer_analytic"] = entropy_time_avg(h, cfg.j_final)
        rec["var_numeric"] = variance_time_avg_numeric(traj, 0)
        rec["entropy_numeric"] = linear_entropy_time_avg(traj, 0)
        rec["var_rel_err"] = abs(rec["var_numeric"] - rec["var_dimer_analytic"]) \
            / rec["var_dimer_analytic"]
        rec["entropy_rel_err"] = abs(rec["entropy_numeric"] - rec["entropy_dimer_analytic"]) \
            / rec["entropy_dimer_analytic"]
    else:
        for m, suffix in enumerate(_pair_columns(cfg.graph.num_sites), start=1):
            c = two_point_correlation(traj, 0, m)
            rec[f"c_{suffix}"] = c
            rec[f"ratio_{suffix}"] = abs(c) / rec["var_dimer_analytic"]
    rec["rwa_ok"] = int(report.ok)
    rec["lower_gap_over_j"] = report.lower_gap_ratio
    rec["truncation_leak"] = res.truncation_leak if res.truncation_leak is not None else 0.0
    return rec


def _open_point(cfg: SweepConfig, x: float) -> dict:
    p = _point_params(cfg, x)
    h = dimer_effective(p, cfg.j_final)
    rec = {"delta_over_g": x,
           "var_dimer_analytic": variance_time_avg(h, cfg.j_final)}
    report = rwa_report(p, cfg.j_final)

    def prepared(graph):
        if cfg.init == "ideal":
            return None, None
        return initialize_with_ancilla(graph, p, cfg.protocol(), cfg.rates,
                                       n_max=cfg.n_max)

    def run(graph):
        rho0, prep = prepared(graph)
        qcfg = QuenchConfig(graph, p, cfg.j_final,
                            n_time_samples=cfg.n_time_samples, n_max=cfg.n_max,
                            representation="full_fock")
        res = quench(qcfg, rates=cfg.rates, rho0=rho0,
                     excitation_cap=cfg.excitation_cap)
        return res, prep

    res, prep = run(cfg.graph)
    traj = res.trajectory
    dimer_res, _ = run(chain(2))
    var_open = variance_time_avg_numeric(dimer_res.trajectory, 0)
    rec["var_dimer_open"] = var_open
    for m, suffix in enumerate(_pair_columns(cfg.graph.num_sites), start=1):
        c = two_point_correlation(traj, 0, m)
        rec[f"c_{suffix}"] = c
        rec[f"ratio_{suffix}"] = abs(c) / var_open
        rec[f"ratio_{suffix}_analytic"] = abs(c) / rec["var_dimer_analytic"]
    if prep is not None:
        rec["prep_fidelity"] = prep.fidelity
    rec["trace_drift"] = traj.trace_drift
    rec["discarded_weight"] = traj.discarded_weight
    rec["rwa_ok"] = int(report.ok)
    rec["lower_gap_over_j"] = report.lower_gap_ratio
    rec["truncation_leak"] = res.truncation_leak if res.truncation_leak is not None else 0.0
    return rec


def _sweep_point(args) -> dict:
    cfg, x = args
    try:
        point = _open_point if cfg.mode == "open" else _closed_point
        rec = point(cfg, x)
        rec["status"] = "ok"
    except Exception as exc:           # per-point failures must not kill the sweep
        rec = {"delta_over_g": x, "status": f"failed: {exc}"}
    return rec


def _columns_for(cfg: SweepConfig) -> list:
    cols = ["delta_over_g", "var_dimer_analytic"]
    pairs = _pair_columns(cfg.graph.num_sites)
    if cfg.mode == "closed":
        if cfg.graph.num_sites == 2:
            cols += ["entropy_dimer_analytic", "var_numeric", "entropy_numeric",
                     "var_rel_err", "entropy_rel_err"]
        else:
            cols += [f"c_{s}" for s in pairs] + [f"ratio_{s}" for s in pairs]
    else:
        cols += ["var_dimer_open"]
        cols += [f"c_{s}" for s in pairs] + [f"ratio_{s}" for s in pairs]
        cols += [f"ratio_{s}_analytic" for s in pairs]
        if cfg.init != "ideal":
            cols += ["prep_fidelity"]
        cols += ["trace_drift", "discarded_weight"]
    cols += ["rwa_ok", "lower_gap_over_j", "truncation_leak", "status"]
    return cols


def sweep(cfg: SweepConfig) -> SweepResult:
    """Run the quench on every grid point; failures are recorded, not raised."""
    grid = cfg.grid()
    jobs = [(cfg, float(x)) for x in grid]
    log.info("sweep: %d points over delta/g in [%g, %g], mode=%s, lattice L=%d",
             len(grid), grid[0], grid[-1], cfg.mode, cfg.graph.num_sites)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_sweep_point, jobs))
    else:
        records = [_sweep_point(j) for j in jobs]
    for rec in records:
        if rec["status"] != "ok":
            log.warning("point delta/g=%g %s", rec["delta_over_g"], rec["status"])
    return SweepResult(grid, _columns_for(cfg), records)


# ---------------------------------------------------------------------------
# resonance detection
# ---------------------------------------------------------------------------

@dataclass
class ResonanceReport:
    resonances: dict                     # curve name -> list of peak dicts
    anti_resonances: list                # shared minima across all curves

    def to_dict(self) -> dict:
        return {"resonances": self.resonances,
                "anti_resonances": self.anti_resonances}

    def strongest(self, curve: str) -> float | None:
        peaks = self.resonances.get(curve) or []
        if not peaks:
            return None
        return max(peaks, key=lambda d: d["height"])["position"]


def _refine_parabolic(x: np.ndarray, y: np.ndarray, k: int, log_axis: bool) -> float:
    if k == 0 or k == len(x) - 1:
        return float(x[k])
    ax = np.log(x[k - 1:k + 2]) if log_axis else x[k - 1:k + 2]
    yy = y[k - 1:k + 2]
    denom = yy[0] - 2 * yy[1] + yy[2]
    if denom == 0:
        return float(x[k])
    shift = 0.5 * (yy[0] - yy[2]) / denom
    shift = float(np.clip(shift, -1.0, 1.0))
    pos = ax[1] + shift * (ax[1] - ax[0])
    return float(np.exp(pos)) if log_axis else float(pos)


def _local_extrema(y: np.ndarray, minima: bool) -> list:
    sig = -y if minima else y
    return [k for k in range(1, len(y) - 1)
            if sig[k] > sig[k - 1] and sig[k] > sig[k + 1]]


def _prominence(y: np.ndarray, k: int) -> float:
    left = y[:k + 1]
    right = y[k:]
    lmin = left[np.argmax(left[::-1] > y[k]):].min() if np.any(left > y[k]) else left.min()
    rmin = right[:np.argmax(right > y[k])].min() if np.any(right > y[k]) else right.min()
    return float(y[k] - max(lmin, rmin))


def detect_resonances(result: SweepResult, curves: list | None = None,
                      prominence_fraction: float = 0.10,
                      window: tuple = (1.0, 10.0),
                      cluster_steps: int = 2) -> ResonanceReport:
    """Locate ratio-curve maxima and shared minima on the detuning grid.

    Peaks must rise by at least ``prominence_fraction`` of the curve's range
    inside the window; anti-resonances are local minima that appear in every
    curve within ``cluster_steps`` grid points of each other. Positions are
    refined by a parabola through the extremum and its neighbors.
    """
    if curves is None:
        curves = [c for c in result.columns
                  if c.startswith("ratio_") and not c.endswith("_analytic")]
    x = result.grid
    in_window = (x >= window[0]) & (x <= window[1])
    if in_window.sum() < 20:
        log.warning("detection window [%g, %g] holds only %d grid points",
                    window[0], window[1], int(in_window.sum()))
    log_axis = not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-6) if len(x) > 2 else True
    resonances = {}
    minima_by_curve = {}
    for name in curves:
        y = result.curve(name)
        ok = np.isfinite(y) & in_window
        xs, ys = x[ok], y[ok]
        if len(xs) < 3:
            resonances[name] = []
            minima_by_curve[name] = []
            continue
        span = float(ys.max() - ys.min()) or 1.0
        peaks = []
        for k in _local_extrema(ys, minima=False):
            prom = _prominence(ys, k)
            if prom >= prominence_fraction * span:
                peaks.append({"position": _refine_parabolic(xs, ys, k, log_axis),
                              "grid_position": float(xs[k]),
                              "height": float(ys[k]),
                              "prominence": prom})
        peaks.sort(key=lambda d: -d["height"])
        resonances[name] = peaks
        dips = []
        for k in _local_extrema(ys, minima=True):
            prom = _prominence(-ys, k)
            if prom >= prominence_fraction * span:
                dips.append({"position": _refine_parabolic(xs, ys, k, log_axis),
                             "grid_index": k, "depth": float(ys[k])})
        minima_by_curve[name] = dips
    anti = []
    if curves and all(minima_by_curve.get(c) for c in curves):
        first = curves[0]
        for dip in minima_by_curve[first]:
            members = [dip]
            for other in curves[1:]:
                match = [d for d in minima_by_curve[other]
                         if abs(d["grid_index"] - dip["grid_index"]) <= cluster_steps]
                if not match:
                    members = None
                    break
                members.append(min(match, key=lambda d: abs(d["grid_index"]
                                                            - dip["grid_index"])))
            if members:
                anti.append({"position": float(np.mean([m["position"] for m in members])),
                             "positions": [m["position"] for m in members],
                             "curves": list(curves)})
    return ResonanceReport(resonances=resonances, anti_resonances=anti)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _setup_logging(path: str | None, verbose: bool) -> None:
    handlers = [logging.StreamHandler(sys.stderr)]
    if path:
        handlers.append(logging.FileHandler(path, mode="w"))
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s",
                        handlers=handlers, force=True)
    if path:
        handlers[-1].setLevel(logging.INFO)
        log.setLevel(logging.INFO)


def _summary(cfg: SweepConfig, report: ResonanceReport | None) -> dict:
    import scipy

    echo = asdict(cfg)
    echo["graph"] = {"num_sites": cfg.graph.num_sites,
                     "edges": [list(e) for e in cfg.graph.edges]}
    body = {"parameters": echo,
            "versions": {"jchsim": __version__,
                         "numpy": np.__version__, "scipy": scipy.__version__}}
    if report is not None:
        body["resonance_report"] = report.to_dict()
    return body


def _apply_overrides(cfg: SweepConfig, args) -> SweepConfig:
    updates = {}
    mapping = {
        "omega": "omega", "g": "g", "j": "j_final", "n_max": "n_max",
        "points": "points", "min": "delta_over_g_min", "max": "delta_over_g_max",
        "workers": "workers", "samples": "n_time_samples",
        "representation": "representation", "g_a": "g_a", "init": "init",
        "csv": "csv_path", "json": "json_path", "log": "log_path",
    }
    for arg_name, field_name in mapping.items():
        value = getattr(args, arg_name.replace("-", "_"), None)
        if value is not None:
            updates[field_name] = value
    if getattr(args, "lattice", None):
        updates["graph"] = _lattice_from_name(args.lattice)
    if updates:
        cfg = replace(cfg, **updates)
    return cfg


def _lattice_from_name(name: str) -> LatticeGraph:
    if name in _LATTICE_NAMES:
        return chain(_LATTICE_NAMES[name])
    if name.startswith("chain:"):
        return chain(int(name.split(":", 1)[1]))
    raise ConfigError(f"unknown lattice {name!r} (use dimer|trimer|tetramer|chain:N)")


def _add_sweep_flags(sub, open_mode: bool):
    sub.add_argument("--config", help="TOML config file")
    sub.add_argument("--lattice", help="dimer|trimer|tetramer|chain:N")
    sub.add_argument("--mode", choices=["closed", "open"],
                     default="open" if open_mode else None)
    sub.add_argument("--omega", type=float)
    sub.add_argument("--g", type=float)
    sub.add_argument("--j", type=float)
    sub.add_argument("--n-max", type=int, dest="n_max")
    sub.add_argument("--min", type=float)
    sub.add_argument("--max", type=float)
    sub.add_argument("--points", type=int)
    sub.add_argument("--samples", type=int)
    sub.add_argument("--workers", type=int)
    sub.add_argument("--representation", choices=["auto", "full_fock", "effective"])
    sub.add_argument("--g-a", type=float, dest="g_a")
    sub.add_argument("--init", choices=["protocol", "ideal"])
    sub.add_argument("--csv")
    sub.add_argument("--json")
    sub.add_argument("--log")
    sub.add_argument("--detect", action="store_true",
                     help="append a resonance report to the JSON summary")
    sub.add_argument("-v", "--verbose", action="store_true")


def _build_sweep_config(args, open_mode: bool) -> SweepConfig:
    mode = args.mode or ("open" if open_mode else "closed")
    if args.config:
        cfg = sweep_config_from_dict(load_config(args.config), mode=mode)
    else:
        base = dict(OPEN_DEFAULTS) if mode == "open" else {}
        if mode == "open":
            base["rates"] = LindbladRates(gamma=0.035, gamma_phi=0.045, kappa=0.225)
        cfg = SweepConfig(graph=chain(3), mode=mode, **base)
    return _apply_overrides(cfg, args)


def _cmd_dimer_analytic(args) -> int:
    p = JCParams.from_delta_over_g(args.delta_over_g, args.g, args.omega)
    h = dimer_effective(p, args.j)
    var = variance_time_avg(h, args.j)
    ent = entropy_time_avg(h, args.j)
    if args.json:
        print(json.dumps({"delta_over_g": args.delta_over_g, "var": var,
                          "entropy": ent, "a": h.a, "b": h.b, "c": h.c}))
    else:
        print(f"Var(n_i) = {var:.6f}")
        print(f"E        = {ent:.6f}")
    return 0


def _cmd_sweep(args, open_mode: bool = False) -> int:
    cfg = _build_sweep_config(args, open_mode)
    _setup_logging(cfg.log_path, args.verbose)
    result = sweep(cfg)
    result.to_csv(cfg.csv_path)
    report = detect_resonances(result) if args.detect else None
    with open(cfg.json_path, "w") as fh:
        json.dump(_summary(cfg, report), fh, indent=2, default=str)
    log.info("wrote %s and %s", cfg.csv_path, cfg.json_path)
    failures = [r for r in result.records if r["status"] != "ok"]
    return 1 if len(failures) == len(result.records) else 0


def _cmd_quench(args) -> int:
    cfg = _build_sweep_config(args, open_mode=False)
    _setup_logging(cfg.log_path, args.verbose)
    p = JCParams.from_delta_over_g(args.delta_over_g, cfg.g, cfg.omega)
    qcfg = QuenchConfig(cfg.graph, p, cfg.j_final, n_max=cfg.n_max,
                        n_time_samples=cfg.n_time_samples,
                        representation=cfg.resolved_representation())
    if cfg.mode == "open" or (args.mode == "open"):
        rho0 = None
        if cfg.init != "ideal":
            rho0, _ = initialize_with_ancilla(cfg.graph, p, cfg.protocol(),
                                              cfg.rates, n_max=cfg.n_max)
        res = quench(qcfg, rates=cfg.rates, rho0=rho0)
    else:
        res = quench(qcfg)
    traj = res.trajectory
    from .observables import polariton_number_series, variance_series
    columns = ["t"] + [f"n_{i}" for i in range(cfg.graph.num_sites)] + ["var_0"]
    series = [polariton_number_series(traj, i).values
              for i in range(cfg.graph.num_sites)]
    var0 = variance_series(traj, 0).values
    with open(args.csv or "quench.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for k, t in enumerate(traj.times):
            writer.writerow([_fmt(float(t))] + [_fmt(float(s[k])) for s in series]
                            + [_fmt(float(var0[k]))])
    print(f"wrote {args.csv or 'quench.csv'} ({len(traj.times)} samples)")
    return 0


def _cmd_init_protocol(args) -> int:
    p = JCParams.from_delta_over_g(args.delta_over_g, args.g, args.omega)
    rates = LindbladRates(gamma=args.gamma, gamma_phi=args.gamma_phi,
                          kappa=args.kappa)
    pulse = None if args.pulse == "ideal" else GaussianPulse(sigma=args.sigma)
    protocol = InitProtocol(g_a=args.g_a, park_offset=args.park_offset,
                            pulse=pulse)
    _, report = initialize_with_ancilla(chain(args.sites), p, protocol, rates,
                                        n_max=args.n_max)
    print(json.dumps({"fidelity": report.fidelity,
                      "site_fidelity": report.site_fidelity,
                      "ancilla_residual": report.ancilla_residual,
                      "upper_branch_population": report.upper_branch_population,
                      "swap_time": report.swap_time,
                      "total_time": report.total_time}, indent=2))
    return 0


def _cmd_detect(args) -> int:
    result = SweepResult.from_csv(args.input)
    curves = args.curves.split(",") if args.curves else None
    report = detect_resonances(result, curves=curves,
                               prominence_fraction=args.prominence,
                               window=(args.window_min, args.window_max))
    payload = json.dumps(report.to_dict(), indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(payload + "\n")
    print(payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jchsim",
        description="Quench dynamics of finite Jaynes-Cummings-Hubbard lattices")
    subs = parser.add_subparsers(dest="command", required=True)

    da = subs.add_parser("dimer-analytic",
                         help="closed-form dimer order parameters at one detuning")
    da.add_argument("--delta-over-g", type=float, required=True)
    da.add_argument("--g", type=float, default=0.01)
    da.add_argument("--j", type=float, default=1e-4)
    da.add_argument("--omega", type=float, default=1.0)
    da.add_argument("--json", action="store_true")
    da.set_defaults(func=_cmd_dimer_analytic)

    sw = subs.add_parser("sweep", help="detuning sweep (closed system by default)")
    _add_sweep_flags(sw, open_mode=False)
    sw.set_defaults(func=lambda a: _cmd_sweep(a, open_mode=False))

    osw = subs.add_parser("open-sweep", help="detuning sweep with loss channels")
    _add_sweep_flags(osw, open_mode=True)
    osw.set_defaults(func=lambda a: _cmd_sweep(a, open_mode=True))

    qu = subs.add_parser("quench", help="single quench run, trajectory CSV")
    _add_sweep_flags(qu, open_mode=False)
    qu.add_argument("--delta-over-g", type=float, required=True)
    qu.set_defaults(func=_cmd_quench)

    ip = subs.add_parser("init-protocol",
                         help="simulate the ancilla preparation of one site")
    ip.add_argument("--delta-over-g", type=float, default=2.5)
    ip.add_argument("--g", type=float, default=200.0)
    ip.add_argument("--omega", type=float, default=5000.0)
    ip.add_argument("--g-a", type=float, default=50.0, dest="g_a")
    ip.add_argument("--park-offset", type=float, default=None)
    ip.add_argument("--pulse", choices=["gaussian", "ideal"], default="gaussian")
    ip.add_argument("--sigma", type=float, default=0.01)
    ip.add_argument("--gamma", type=float, default=0.035)
    ip.add_argument("--gamma-phi", type=float, default=0.045)
    ip.add_argument("--kappa", type=float, default=0.225)
    ip.add_argument("--n-max", type=int, default=4, dest="n_max")
    ip.add_argument("--sites", type=int, default=1)
    ip.set_defaults(func=_cmd_init_protocol)

    de = subs.add_parser("detect", help="resonance report from a sweep CSV")
    de.add_argument("--input", required=True)
    de.add_argument("--output")
    de.add_argument("--curves", help="comma-separated ratio column names")
    de.add_argument("--prominence", type=float, default=0.10)
    de.add_argument("--window-min", type=float, default=1.0)
    de.add_argument("--window-max", type=float, default=10.0)
    de.set_defaults(func=_cmd_detect)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
