"""Config-driven experiment runner and the ``inviscid-damping`` command line.

Subcommands: phi1, wronskian, kernels, evolve, verify, decay, compare.  Without a
subcommand the suites listed under ``[run] suites`` are executed in order.
Every command writes CSV tables plus a ``manifest.json`` into ``--out``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import platform
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy
from scipy import stats
from scipy.interpolate import CubicSpline

from . import data as families
from . import direct_oracle as do
from . import flow_profile as fp
from . import kernel_operators as ko
from . import rayleigh_homogeneous as rh
from . import spectral_evolution as se
from . import wronskian as wr

__all__ = [
    "ConfigError",
    "RunConfig",
    "DecayFit",
    "CheckResult",
    "load_config",
    "parse_config",
    "decay_fit",
    "compare",
    "oracle_field",
    "run_config",
    "main",
    "SUITES",
]

SCHEMA_VERSION = 1

# section -> key -> (kind, default)
SCHEMA = {
    "run": {
        "alpha_list": ("int_list", "2"),
        "family": ("str", "gaussian"),
        "data_file": ("str", ""),
        "times": ("float_list", "1, 5, 10"),
        "suites": ("str_list", "wronskian, compare"),
        "seed": ("int", "0"),
    },
    "domain": {
        "half_width": ("float", "20"),
        "spacing": ("float", "0.01"),
        "dt": ("float", "0.02"),
    },
    "cgrid": {
        "c_max": ("float", repr(wr.C_MAX)),
        "eta_panel": ("float", repr(ko.TABLE_PANEL)),
        "order": ("int", "16"),
        "c_values": ("float_list", "-0.9, -0.5, -0.1, 0, 0.1, 0.5, 0.9"),
    },
    "parameters": {
        "eps0": ("float", repr(fp.DEFAULT_EPS0)),
        "C_o": ("float", repr(fp.DEFAULT_CO)),
        "c_switch": ("float", repr(wr.C_SWITCH)),
    },
    "tolerances": {
        "phi1": ("float", "1e-10"),
        "phi_closed_form": ("float", "1e-8"),
        "steady_drift": ("float", "1e-6"),
        "wronskian_limit": ("float", "1e-2"),
        "A_zero": ("float", "1e-6"),
        "dA_zero": ("float", "1e-5"),
        "T_zero": ("float", "1e-6"),
        "dual_wronskian": ("float", "1e-6"),
        "oracle_rel_l2": ("float", "1e-3"),
        "lap": ("float", "1e-2"),
        "lap_average": ("float", "2e-2"),
        "s_ratio": ("float", "2"),
        "conservation": ("float", "1e-6"),
        "mode1_projection": ("float", "5e-2"),
        "mode1_gap": ("float", "0.3"),
    },
    "decay": {
        "t_min": ("float", "10"),
        "t_max": ("float", "100"),
        "samples": ("int", "12"),
        "l2_range": ("float_list", "-2.2, -1.8"),
        "h1_range": ("float_list", "-1.2, -0.8"),
        "mode1_t_min": ("float", "20"),
        "mode1_t_max": ("float", "200"),
        "mode1_h1_range": ("float_list", "-1.25, -0.75"),
    },
}

SUITES = ("phi1", "wronskian", "kernels", "evolve", "verify", "decay", "compare")


class ConfigError(ValueError):
    def __init__(self, path, line, section, key, message):
        self.path, self.line, self.section, self.key = path, line, section, key
        where = f"{path}:{line}" if line else str(path)
        name = f"[{section}] {key}" if key else f"[{section}]" if section else ""
        super().__init__(f"{where}: {name}: {message}" if name else f"{where}: {message}")


@dataclass
class RunConfig:
    alpha_list: tuple
    family: str
    data_file: str
    times: tuple
    suites: tuple
    seed: int
    half_width: float
    spacing: float
    dt: float
    c_max: float
    eta_panel: float
    order: int
    c_values: tuple
    eps0: float
    C_o: float
    c_switch: float
    tolerances: dict
    decay: dict
    path: str = "<defaults>"
    lines: dict = field(default_factory=dict, repr=False)

    def tolerance(self, key: str) -> float:
        return self.tolerances[key]

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("lines", None)
        return d


def _line_map(text: str) -> dict:
    """(section, key) -> 1-based line number; (section, None) for headers."""
    out = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            out.setdefault((section, None), n)
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", line)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip().lower()), n)
    return out


def _convert(kind, text):
    text = text.strip()
    if kind == "float":
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v
    if kind == "int":
        return int(text)
    if kind == "str":
        return text
    items = [s.strip() for s in text.split(",") if s.strip()]
    if kind == "float_list":
        vals = tuple(float(s) for s in items)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("entries must be finite")
        return vals
    if kind == "int_list":
        return tuple(int(s) for s in items)
    if kind == "str_list":
        return tuple(items)
    raise AssertionError(kind)


def parse_config(text: str = "", path: str = "<string>") -> RunConfig:
    lines = _line_map(text)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str.lower
    try:
        cp.read_string(text, source=str(path))
    except configparser.DuplicateOptionError as e:
        raise ConfigError(path, e.lineno, e.section, e.option, "duplicate key") from None
    except configparser.DuplicateSectionError as e:
        raise ConfigError(path, e.lineno, e.section, None, "duplicate section") from None
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError(path, e.lineno, None, None, "key outside any [section]") from None
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if getattr(e, "errors", None) else None
        raise ConfigError(path, lineno, None, None, "unparseable line") from None

    schema_lc = {s: {k.lower(): (k, spec) for k, spec in keys.items()} for s, keys in SCHEMA.items()}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(path, lines.get((sec, None)), sec, None,
                              f"unknown section (expected one of {', '.join(SCHEMA)})")
        for key in cp[sec]:
            if key not in schema_lc[sec]:
                raise ConfigError(path, lines.get((sec, key)), sec, key, "unknown key")

    values = {}
    for sec, keys in SCHEMA.items():
        for key, (kind, default) in keys.items():
            raw = cp.get(sec, key.lower(), fallback=None) if cp.has_section(sec) else None
            text_v = default if raw is None else raw
            try:
                values[(sec, key)] = _convert(kind, text_v)
            except ValueError as e:
                raise ConfigError(path, lines.get((sec, key.lower())), sec, key,
                                  f"cannot read {text_v!r} as {kind.replace('_', ' ')}: {e}") from None

    def err(sec, key, msg):
        return ConfigError(path, lines.get((sec, key.lower())), sec, key, msg)

    v = values
    if not v[("run", "alpha_list")] or any(a < 1 for a in v[("run", "alpha_list")]):
        raise err("run", "alpha_list", "need one or more positive integers")
    if any(t < 0 for t in v[("run", "times")]) or not v[("run", "times")]:
        raise err("run", "times", "need one or more non-negative times")
    for s in v[("run", "suites")]:
        if s not in SUITES:
            raise err("run", "suites", f"unknown suite {s!r} (expected {', '.join(SUITES)})")
    if not v[("run", "data_file")] and v[("run", "family")] not in families.FAMILIES:
        raise err("run", "family", f"unknown family (expected {', '.join(families.FAMILIES)})")
    if v[("run", "data_file")]:
        df = v[("run", "data_file")]
        if not os.path.isabs(df) and path not in ("<string>", "<defaults>"):
            df = os.path.join(os.path.dirname(os.path.abspath(path)), df)
        if not os.path.exists(df):
            raise err("run", "data_file", f"file {df!r} does not exist")
        v[("run", "data_file")] = df
    for key in ("half_width", "spacing", "dt"):
        if v[("domain", key)] <= 0:
            raise err("domain", key, "must be positive")
    if abs(round(v[("domain", "half_width")] / v[("domain", "spacing")]) * v[("domain", "spacing")]
           - v[("domain", "half_width")]) > 1e-9 * v[("domain", "half_width")]:
        raise err("domain", "spacing", "half_width must be an integer multiple of spacing")
    cmax = v[("cgrid", "c_max")]
    if not (0 < cmax <= wr.C_MAX):
        raise err("cgrid", "c_max", f"must lie in (0, {wr.C_MAX}]")
    bad = [c for c in v[("cgrid", "c_values")] if abs(c) > cmax]
    if bad:
        raise err("cgrid", "c_values", f"|c| = {abs(bad[0])} exceeds c_max = {cmax}")
    if v[("cgrid", "eta_panel")] <= 0:
        raise err("cgrid", "eta_panel", "must be positive")
    if not (2 <= v[("cgrid", "order")] <= 64):
        raise err("cgrid", "order", "must lie in [2, 64]")
    for key in ("eps0", "C_o", "c_switch"):
        if v[("parameters", key)] <= 0:
            raise err("parameters", key, "must be positive")
    for key in SCHEMA["tolerances"]:
        if v[("tolerances", key)] <= 0:
            raise err("tolerances", key, "must be positive")
    d = {k: v[("decay", k)] for k in SCHEMA["decay"]}
    for key in ("l2_range", "h1_range", "mode1_h1_range"):
        if len(d[key]) != 2 or d[key][0] >= d[key][1]:
            raise err("decay", key, "need two increasing numbers lo, hi")
    if not (0 < d["t_min"] < d["t_max"]):
        raise err("decay", "t_max", "need 0 < t_min < t_max")
    if not (0 < d["mode1_t_min"] < d["mode1_t_max"]):
        raise err("decay", "mode1_t_max", "need 0 < mode1_t_min < mode1_t_max")
    if d["samples"] < 5:
        raise err("decay", "samples", "a decay fit needs at least 5 samples")

    return RunConfig(
        alpha_list=tuple(sorted(set(v[("run", "alpha_list")]))),
        family=v[("run", "family")], data_file=v[("run", "data_file")],
        times=tuple(sorted(set(v[("run", "times")]))), suites=v[("run", "suites")], seed=v[("run", "seed")],
        half_width=v[("domain", "half_width")], spacing=v[("domain", "spacing")], dt=v[("domain", "dt")],
        c_max=cmax, eta_panel=v[("cgrid", "eta_panel")], order=v[("cgrid", "order")],
        c_values=v[("cgrid", "c_values")],
        eps0=v[("parameters", "eps0")], C_o=v[("parameters", "C_o")], c_switch=v[("parameters", "c_switch")],
        tolerances={k: v[("tolerances", k)] for k in SCHEMA["tolerances"]}, decay=d,
        path=str(path), lines={f"{s}.{k}": n for (s, k), n in lines.items() if k},
    )


def load_config(path=None) -> RunConfig:
    if path is None:
        return parse_config("", "<defaults>")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(path, None, None, None, f"cannot read config: {e.strerror}") from None
    return parse_config(text, str(path))


# -- initial data ------------------------------------------------------------------------


class SampledData:
    """Cubic-spline interpolant of sampled vorticity (columns y, re[, im]); zero outside the samples."""

    def __init__(self, path):
        arr = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, skiprows=_header_rows(path))
        if arr.shape[1] not in (2, 3):
            raise ValueError(f"{path}: expected columns y, re[, im]")
        y = arr[:, 0]
        if np.any(np.diff(y) <= 0):
            raise ValueError(f"{path}: y must be strictly increasing")
        vals = arr[:, 1] + (1j * arr[:, 2] if arr.shape[1] == 3 else 0.0)
        self.lo, self.hi = y[0], y[-1]
        self.spline = CubicSpline(y, vals)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y >= self.lo) & (y <= self.hi)
        return np.where(inside, self.spline(np.clip(y, self.lo, self.hi)), 0.0)


def _header_rows(path) -> int:
    with open(path) as fh:
        first = fh.readline()
    try:
        [float(s) for s in first.split(",")]
        return 0
    except ValueError:
        return 1


def initial_function(cfg: RunConfig):
    if cfg.data_file:
        return os.path.basename(cfg.data_file), SampledData(cfg.data_file)
    return cfg.family, families.family(cfg.family)


# -- fits and comparisons --------------------------------------------------------------


@dataclass
class DecayFit:
    quantity: str
    window: tuple
    exponent: float
    residual: float
    half_width: float
    constant: float
    n_samples: int


def decay_fit(series, window=None, quantity: str = "value") -> DecayFit:
    """Least-squares slope of log(value) against log(t) over ``window``; 95% half-width from the t law."""
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be (t, value) pairs")
    t, v = arr[:, 0], arr[:, 1]
    if window is None:
        window = (float(t.min()), float(t.max()))
    lo, hi = window
    if lo >= hi or lo < t.min() - 1e-12 or hi > t.max() + 1e-12:
        raise ValueError(f"window {window} is not inside the series range [{t.min()}, {t.max()}]")
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if np.count_nonzero(sel) < 5:
        raise ValueError("a decay fit needs at least 5 samples in the window")
    if np.any(v[sel] <= 0) or np.any(t[sel] <= 0):
        raise ValueError("decay fit needs positive times and values")
    x, yv = np.log(t[sel]), np.log(v[sel])
    fit = stats.linregress(x, yv)
    res = yv - (fit.intercept + fit.slope * x)
    n = x.size
    half = float(stats.t.ppf(0.975, n - 2) * fit.stderr) if n > 2 else math.inf
    slope = float(fit.slope)
    if not math.isfinite(slope):
        raise ValueError("fitted exponent is not finite")
    return DecayFit(quantity, (float(lo), float(hi)), slope, float(np.sqrt(np.mean(res ** 2))), half,
                    float(math.exp(fit.intercept)), int(n))


def oracle_field(state: do.VorticityState, y_out, weights=None) -> se.ModeField:
    """Direct-solver stream function on another grid (cubic spline, spline derivative)."""
    sp = CubicSpline(state.y_grid, state.psi)
    y_out = np.asarray(y_out, dtype=float)
    return se.ModeField(state.alpha, state.t, y_out, sp(y_out), sp(y_out, 1), weights)


def compare(fields_a, fields_b) -> list:
    """Relative L2, Linf and H1 discrepancies per time (``b`` is the reference)."""
    fields_a, fields_b = list(fields_a), list(fields_b)
    if len(fields_a) != len(fields_b):
        raise ValueError("field lists differ in length")
    rows = []
    for a, b in zip(fields_a, fields_b):
        if a.y_grid.shape != b.y_grid.shape or not np.array_equal(a.y_grid, b.y_grid):
            raise ValueError("grid mismatch")
        if not math.isclose(a.t, b.t, rel_tol=0, abs_tol=1e-12) or a.alpha != b.alpha:
            raise ValueError("time or wavenumber mismatch")
        d = a.psi - b.psi
        dd = a.deriv() - b.deriv()
        nb, hb = b.l2(), b.h1()
        mx = float(np.max(np.abs(b.psi)))
        rows.append({
            "t": float(a.t), "alpha": int(a.alpha),
            "rel_L2": b.l2(d) / nb if nb else b.l2(d),
            "rel_Linf": float(np.max(np.abs(d))) / mx if mx else float(np.max(np.abs(d))),
            "rel_H1": b.h1(d, dd) / hb if hb else b.h1(d, dd),
        })
    return rows


# -- checks ------------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    tolerance_key: str
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)
    error: str = ""


def _check_phi_closed_form(cfg):
    y = np.linspace(-5, 5, 200)
    fld = rh.solve_phi1(fp.spectral_point(0.0, 1), tol=cfg.tolerance("phi1"))
    ref = 0.5 * (np.sinh(y) + y / np.cosh(y))
    val = float(np.max(np.abs(rh.phi_hom(fld, y)[0] - ref) / np.abs(ref)))
    return val, "phi_closed_form", {}


def _check_steady(cfg):
    y = do.uniform_grid(cfg.half_width, cfg.spacing)
    w0 = families.sech_cubed(y)
    tr = do.evolve(families.sech_cubed, 1, 10.0, dt=cfg.dt, out_times=np.arange(1, 11), y_grid=y)
    val = max(float(np.linalg.norm(s.omega - w0) / np.linalg.norm(w0)) for s in tr.states)
    return val, "steady_drift", {}


def _check_wronskian_limit(cfg):
    eps = np.array([1e-1, 1e-2, 1e-3])
    ratios = [wr.wronskian_via_W1(fp.spectral_point(1j * e, 1, cfg.eps0, cfg.C_o)) / (1j * e) for e in eps]
    ext = wr.richardson(np.array(ratios), eps, order=1)
    return float(abs(ext - 2j * math.pi) / (2 * math.pi)), "wronskian_limit", {"extrapolated": [ext.real, ext.imag]}


def _check_A_zero(cfg):
    return abs(wr.a_of(0.0, 1)), "A_zero", {}


def _check_dA_zero(cfg):
    return abs(wr.dA(0.0, 1)), "dA_zero", {}


def _check_T_zero(cfg):
    T = ko.real_solution(0.0, 1).calT(families.odd_gaussian)[0]
    return abs(complex(T) - math.sqrt(math.pi)), "T_zero", {"T": complex(T).real}


def random_domain_points(rng, n: int, eps0: float, C_o: float, x_max: float = 0.9):
    """n points of the thin complex domain: Re c uniform, |Im c| log-uniform in [0.01, 0.9] x bound."""
    pts = []
    for _ in range(n):
        x = rng.uniform(-x_max, x_max)
        bound = min((1 - x * x) / C_o, eps0)
        im = bound * math.exp(rng.uniform(math.log(0.01), math.log(0.9)))
        pts.append(complex(x, im if rng.random() < 0.5 else -im))
    return pts


def _check_dual_wronskian(cfg):
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for alpha in (1, 2, 3):
        for c in random_domain_points(rng, 20, cfg.eps0, cfg.C_o):
            pt = fp.spectral_point(c, alpha, cfg.eps0, cfg.C_o)
            fld = rh.solve_phi1(pt, tol=cfg.tolerance("phi1"))
            Wd = wr.wronskian_direct(pt, fld)
            Wv = wr.wronskian_via_W1(pt, fld)
            worst = max(worst, abs(Wd - Wv) / abs(Wd))
    return worst, "dual_wronskian", {"points_per_alpha": 20, "seed": cfg.seed}


def _check_lap(cfg):
    y = np.array([-2.0, -1.0, 1.0, 2.0])
    f = families.bump
    v = ko.embedding_lap(f, 1e-3, math.pi / 2, y)
    ref = ko.embedding_lap_limit(f, y)
    return float(np.max(np.abs(v - ref) / np.abs(ref))), "lap", {"delta": 1e-3, "theta": math.pi / 2}


def _check_lap_average(cfg):
    y = np.array([-2.0, -1.0, 1.0, 2.0])
    f = families.bump
    av = ko.angular_average(f, 1e-3, y)
    ref = 0.5 * f(0.0) / np.cosh(y)
    return float(np.max(np.abs(av - ref) / np.abs(ref))), "lap_average", {"delta": 1e-3}


def _check_s(cfg):
    ts = np.geomspace(10, 1000, 200)
    vals = np.array([abs(se.s_of(t) + 1j * math.pi) * t * t for t in ts])
    return float(vals.max() / vals[0]), "s_ratio", {"value_at_10": float(vals[0]), "sup": float(vals.max())}


def _check_conservation(cfg):
    y = do.uniform_grid(cfg.half_width, cfg.spacing)
    tr = do.evolve(families.bump, 1, 20.0, dt=cfg.dt, out_times=np.arange(0, 21, 2.0), y_grid=y)
    ab = np.array(do.conserved_ab(tr))
    da = float(np.max(np.abs(ab[:, 0] - ab[0, 0])) / abs(ab[0, 0]))
    db = float(np.max(np.abs(ab[:, 1] - ab[0, 1])) / abs(ab[0, 1]))
    return max(da, db), "conservation", {"a_drift": da, "b_drift": db}


VERIFY_CHECKS = {
    "phi_closed_form": _check_phi_closed_form,
    "steady_embedding": _check_steady,
    "wronskian_limit": _check_wronskian_limit,
    "A_zero": _check_A_zero,
    "dA_zero": _check_dA_zero,
    "T_zero": _check_T_zero,
    "dual_wronskian": _check_dual_wronskian,
    "embedding_lap": _check_lap,
    "embedding_lap_average": _check_lap_average,
    "S_asymptotics": _check_s,
    "conservation": _check_conservation,
}


def run_check(name: str, cfg: RunConfig) -> CheckResult:
    t0 = time.perf_counter()
    try:
        val, key, detail = VERIFY_CHECKS[name](cfg)
        tol = cfg.tolerance(key)
        return CheckResult(name, float(val), tol, f"tolerances.{key}", bool(val < tol),
                           time.perf_counter() - t0, detail)
    except Exception as e:  # recorded per check; the run continues
        return CheckResult(name, math.nan, math.nan, "", False, time.perf_counter() - t0, {},
                           f"{type(e).__name__}: {e}")


# -- suites ------------------------------------------------------------------------------


class Context:
    def __init__(self, cfg: RunConfig, out: str, threads: int = 1):
        self.cfg = cfg
        self.out = out
        self.threads = max(1, int(threads))
        self.timings = {}
        self.files = []
        self.checks: list[CheckResult] = []
        self.fits: list[DecayFit] = []
        self._pool = None
        self._tables = {}
        os.makedirs(out, exist_ok=True)

    @property
    def executor(self):
        if self.threads > 1 and self._pool is None:
            self._pool = ProcessPoolExecutor(max_workers=self.threads)
        return self._pool

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def path(self, name):
        p = os.path.join(self.out, name)
        self.files.append(name)
        return p

    def record(self, result: CheckResult):
        self.checks.append(result)

    def table(self, alpha, funcs, t_max):
        key = (alpha, tuple(n for n, _ in funcs), float(max(t_max, 1.0)))
        if key not in self._tables:
            self._tables[key] = self._build_table(alpha, funcs, t_max)
        return self._tables[key]

    def _build_table(self, alpha, funcs, t_max):
        cfg = self.cfg
        g = se.output_grid(alpha, max(t_max, 1.0), L=cfg.half_width, order=cfg.order)
        edges = ko.eta_edges(math.atanh(cfg.c_max), cfg.eta_panel)
        tilde = ko.TildeData([f for _, f in funcs], 1, cfg.c_switch) if alpha == 1 else None
        tab = ko.build_kernel_table(alpha, funcs, g.y, order=cfg.order, edges=edges, executor=self.executor,
                                    tilde=tilde)
        return g, tab


def _series_rows(fields, alpha):
    rows = []
    for m in fields:
        if alpha == 1:
            res = m.l2(m.psi - m.parts["projection"] - m.parts["rank_one"])
        else:
            res = m.l2()
        rows.append((m.t, alpha, m.l2(), m.h1(), res))
    return rows


def suite_phi1(ctx: Context):
    cfg = ctx.cfg
    path = ctx.path("phi1_summary.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "c", "iterations", "residual", "phi1_at_0"])
        for alpha in cfg.alpha_list:
            for c in cfg.c_values:
                fld = rh.solve_phi1(fp.spectral_point(c, alpha, cfg.eps0, cfg.C_o), tol=cfg.tolerance("phi1"))
                rh.field_to_csv(fld, ctx.path(f"phi1_a{alpha}_c{c:+.4f}.csv"))
                p0 = fld.grid.interpolate(fld.phi1, np.array([0.0]))[0]
                w.writerow([alpha, repr(float(c)), fld.iterations, repr(float(fld.residual)), repr(float(np.real(p0)))])


def suite_wronskian(ctx: Context):
    cfg = ctx.cfg
    rows = []
    for alpha in cfg.alpha_list:
        rows += wr.table_rows(cfg.c_values, alpha)
    wr.write_table_csv(rows, ctx.path("wronskian_table.csv"))
    if 1 in cfg.alpha_list:
        eps = np.array([1e-1, 1e-2, 1e-3])
        ratios = [wr.wronskian_via_W1(fp.spectral_point(1j * e, 1, cfg.eps0, cfg.C_o)) / (1j * e) for e in eps]
        ext = wr.richardson(np.array(ratios), eps, order=1)
        wr.write_limit_json(eps, ratios, ext, ctx.path("wronskian_limit.json"))


def suite_kernels(ctx: Context):
    cfg = ctx.cfg
    name, f = initial_function(cfg)
    for alpha in cfg.alpha_list:
        _, tab = ctx.table(alpha, [(name, f)], max(cfg.times))
        tab.to_csv(ctx.path(f"kernels_a{alpha}.csv"))
    if 1 in cfg.alpha_list:
        y = np.array([-2.0, -1.0, 1.0, 2.0])
        report = {"delta": 1e-3, "theta": math.pi / 2, "y": y,
                  "c_Phi": ko.embedding_lap(f, 1e-3, math.pi / 2, y),
                  "limit_plus": ko.embedding_lap_limit(f, y, 1),
                  "angular_average": ko.angular_average(f, 1e-3, y),
                  "half_omega0_sech": 0.5 * f(np.array([0.0]))[0] / np.cosh(y)}
        ko.write_lap_json(report, ctx.path("lap.json"))


def _spectral_and_direct(ctx: Context, alpha, direct=True):
    cfg = ctx.cfg
    name, f = initial_function(cfg)
    times = cfg.times
    g, tab = ctx.table(alpha, [(name, f)], max(times))
    fields = [se.psi_mode(t, tab, 0, weights=g.w) for t in times]
    traj = None
    if direct:
        y = do.uniform_grid(cfg.half_width, cfg.spacing)
        traj = do.evolve(f, alpha, max(times), dt=cfg.dt, out_times=times, y_grid=y)
    return g, fields, traj


def suite_evolve(ctx: Context):
    for alpha in ctx.cfg.alpha_list:
        _, fields, traj = _spectral_and_direct(ctx, alpha)
        se.write_series_csv(_series_rows(fields, alpha), ctx.path(f"spectral_a{alpha}.csv"))
        traj.to_csv(ctx.path(f"direct_a{alpha}.csv"))


def suite_compare(ctx: Context):
    cfg = ctx.cfg
    tol = cfg.tolerance("oracle_rel_l2")
    rows = []
    for alpha in cfg.alpha_list:
        t0 = time.perf_counter()
        g, fields, traj = _spectral_and_direct(ctx, alpha)
        ref = [oracle_field(s, g.y, g.w) for s in traj.states]
        rep = compare(fields, ref)
        rows += rep
        for r in rep:
            ctx.record(CheckResult(f"compare_a{alpha}_t{r['t']:g}", r["rel_L2"], tol, "tolerances.oracle_rel_l2",
                                   bool(r["rel_L2"] < tol), time.perf_counter() - t0,
                                   {"rel_Linf": r["rel_Linf"], "rel_H1": r["rel_H1"],
                                    "boundary_mass": do.boundary_mass(traj.states[0].omega)}))
    with open(ctx.path("compare.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "alpha", "rel_L2", "rel_Linf", "rel_H1"])
        for r in rows:
            w.writerow([repr(r["t"]), r["alpha"], repr(r["rel_L2"]), repr(r["rel_Linf"]), repr(r["rel_H1"])])


def mode1_decay(fields):
    """Fits for alpha = 1: H1 of psi - projection - a0 f1 and of psi - projection."""
    sub = [(m.t, m.h1(m.psi - m.parts["projection"] - m.parts["rank_one"],
                      m.dpsi - m.parts["d_projection"] - m.parts["d_rank_one"])) for m in fields]
    raw = [(m.t, m.h1(m.psi - m.parts["projection"], m.dpsi - m.parts["d_projection"])) for m in fields]
    return decay_fit(sub, quantity="H1_after_subtraction"), decay_fit(raw, quantity="H1_without_f1")


def suite_decay(ctx: Context):
    cfg = ctx.cfg
    d = cfg.decay
    name, f = initial_function(cfg)
    rows = []
    for alpha in cfg.alpha_list:
        t0 = time.perf_counter()
        lo, hi = (d["mode1_t_min"], d["mode1_t_max"]) if alpha == 1 else (d["t_min"], d["t_max"])
        ts = np.geomspace(lo, hi, d["samples"])
        g, tab = ctx.table(alpha, [(name, f)], hi)
        fields = [se.psi_mode(t, tab, 0, weights=g.w) for t in ts]
        rows += _series_rows(fields, alpha)
        if alpha == 1:
            fsub, fraw = mode1_decay(fields)
            ctx.fits += [fsub, fraw]
            rng = d["mode1_h1_range"]
            last = fields[-1]
            proj = last.parts["projection"]
            ratio = last.l2(last.psi - proj) / last.l2(proj) if last.l2(proj) else math.inf
            dt = time.perf_counter() - t0
            ctx.record(CheckResult("mode1_h1_exponent", fsub.exponent, math.nan, "decay.mode1_h1_range",
                                   rng[0] <= fsub.exponent <= rng[1], dt, {"range": list(rng)}))
            # omitting a0 f1 should slow the fitted rate by at least mode1_gap
            loss = fraw.exponent - fsub.exponent
            ctx.record(CheckResult("mode1_f1_necessity", loss, cfg.tolerance("mode1_gap"), "tolerances.mode1_gap",
                                   loss >= cfg.tolerance("mode1_gap"), dt,
                                   {"with_f1": fsub.exponent, "without_f1": fraw.exponent, "bound": "minimum"}))
            ctx.record(CheckResult("mode1_projection", ratio, cfg.tolerance("mode1_projection"),
                                   "tolerances.mode1_projection", ratio < cfg.tolerance("mode1_projection"), dt,
                                   {"t": float(last.t)}))
        else:
            fl = decay_fit([(m.t, m.l2()) for m in fields], quantity=f"L2_psi_a{alpha}")
            fh = decay_fit([(m.t, m.h1()) for m in fields], quantity=f"H1_psi_a{alpha}")
            ctx.fits += [fl, fh]
            dt = time.perf_counter() - t0
            for fit, key in ((fl, "l2_range"), (fh, "h1_range")):
                rng = d[key]
                ctx.record(CheckResult(f"{fit.quantity}_exponent", fit.exponent, math.nan, f"decay.{key}",
                                       rng[0] <= fit.exponent <= rng[1], dt, {"range": list(rng)}))
    se.write_series_csv(rows, ctx.path("decay_series.csv"))
    with open(ctx.path("decay_fits.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "t_min", "t_max", "exponent", "residual", "half_width", "constant", "n"])
        for fit in ctx.fits:
            w.writerow([fit.quantity, repr(fit.window[0]), repr(fit.window[1]), repr(fit.exponent),
                        repr(fit.residual), repr(fit.half_width), repr(fit.constant), fit.n_samples])


def suite_verify(ctx: Context):
    names = list(VERIFY_CHECKS)
    if ctx.executor is not None:
        results = list(ctx.executor.map(run_check, names, [ctx.cfg] * len(names)))
    else:
        results = [run_check(n, ctx.cfg) for n in names]
    for r in results:
        ctx.record(r)
    with open(ctx.path("verify.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["check", "value", "tolerance", "tolerance_key", "passed", "error"])
        for r in results:
            w.writerow([r.name, repr(r.value), repr(r.tolerance), r.tolerance_key, int(r.passed), r.error])


SUITE_FUNCS = {
    "phi1": suite_phi1, "wronskian": suite_wronskian, "kernels": suite_kernels, "evolve": suite_evolve,
    "verify": suite_verify, "decay": suite_decay, "compare": suite_compare,
}


def _versions():
    try:
        from importlib.metadata import version

        pkg = version("artifact")
    except Exception:
        pkg = "unknown"
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "package": pkg}


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def run_config(cfg, out: str = "out", suites=None, threads: int = 1) -> dict:
    """Run ``suites`` (default: the config's) and write ``manifest.json``; returns the manifest."""
    if not isinstance(cfg, RunConfig):
        cfg = load_config(cfg)
    suites = tuple(suites or cfg.suites)
    ctx = Context(cfg, out, threads)
    failures = {}
    try:
        for s in suites:
            t0 = time.perf_counter()
            try:
                SUITE_FUNCS[s](ctx)
            except Exception as e:  # recorded; remaining suites still run
                failures[s] = f"{type(e).__name__}: {e}"
            ctx.timings[s] = time.perf_counter() - t0
    finally:
        ctx.close()
    ok = not failures and all(c.passed for c in ctx.checks)
    manifest = {
        "schema": SCHEMA_VERSION,
        "suites": list(suites),
        "passed": ok,
        "config": cfg.echo(),
        "config_lines": cfg.lines,
        "versions": _versions(),
        "timings": ctx.timings,
        "files": sorted(set(ctx.files)),
        "checks": [asdict(c) for c in ctx.checks],
        "fits": [asdict(f) for f in ctx.fits],
        "suite_errors": failures,
        "grids": {"y_half_width": cfg.half_width, "y_spacing": cfg.spacing, "dt": cfg.dt, "c_max": cfg.c_max,
                  "eta_panel": cfg.eta_panel, "order": cfg.order},
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
    return manifest


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="inviscid-damping",
                                description="Linear inviscid damping for the hyperbolic tangent shear flow.")
    p.add_argument("--config", help="INI run configuration (defaults are used when omitted)")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--seed", type=int, default=None, help="random seed overriding [run] seed")
    p.add_argument("command", nargs="?", choices=SUITES,
                   help="suite to run; omitted: the suites listed in the config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    if args.seed is not None and not (0 <= args.seed < 2 ** 64):
        print("error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    suites = (args.command,) if args.command else None
    manifest = run_config(cfg, args.out, suites, args.threads)
    for c in manifest["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: {c['value']:.3e} ({c['tolerance_key']})" if not c["error"]
              else f"FAIL {c['name']}: {c['error']}")
    for s, e in manifest["suite_errors"].items():
        print(f"ERROR in suite {s}: {e}", file=sys.stderr)
    print(f"wrote {len(manifest['files'])} files to {args.out}")
    return 0 if manifest["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
