"""Stream function of each Fourier mode from the explicit spectral representation.

alpha >= 2:  psi(t, y) = int_{-1}^{1} e^{-i alpha c t} mu(c) Gamma(y, c) dc.
alpha  = 1:  psi = regular integrals + a_0 f_1(t, y) + ((a_0 + i pi b_0)/(2 pi i)) sech y,
             f_1 = (Psi + (S(t) + i pi) sech y)/(2 pi^2),
             Psi = -int e^{-ict} chi_0 (1 - c^2)^2 (Gamma(y, c) - Gamma(y, 0))/c dc.

The c-integrals run in eta = atanh(c) over |c| <= c_max.  Gamma(y, .) has a
(c - u(y)) ln|c - u(y)| kink, so for each output point the table panels next
to eta = y are integrated on a mesh graded towards y, with the analytic parts
interpolated from the table and the logarithm evaluated exactly.  All other
panels use product weights  int e^{-i alpha t tanh(eta)} sech^2(eta) l_j(eta) d eta
against the table's Lagrange basis l_j.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import flow_profile as fp
from ._panels import lagrange_matrix
from .kernel_operators import KernelTable, chi0

__all__ = [
    "InitialData",
    "ModeField",
    "a0_b0",
    "initial_data",
    "s_of",
    "f1_eval",
    "eigen_projection",
    "psi_mode",
    "velocity_norms",
    "output_grid",
    "check_resolution",
    "write_series_csv",
    "write_manifest",
]

LOCAL_ORDER = 10
GRADE_MIN = 1e-10
PHASE_PER_PANEL = 8.0


# -- initial data ---------------------------------------------------------------------


def _fd6_first(f, i, h):
    c = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
    return float(np.dot(c, f[i - 3:i + 4]) / h) if np.isrealobj(f) else complex(np.dot(c, f[i - 3:i + 4]) / h)


def a0_b0(omega0, y_grid):
    """a_0 = p.v. int omega_0/sinh y, b_0 = omega_0(0) on a uniform grid symmetric about 0.

    The principal value is taken as int_0^inf (omega_0(y) - omega_0(-y))/sinh y dy,
    written as half the integral of an even function and summed by the trapezoid rule.
    """
    y = np.asarray(y_grid, dtype=float)
    w = np.asarray(omega0)
    n = y.size
    h = y[1] - y[0]
    if n % 2 == 0 or not np.allclose(y, -y[::-1], atol=1e-12 * max(1.0, abs(y[-1]))):
        raise ValueError("a0_b0 needs a grid symmetric about y = 0 containing 0")
    if not np.allclose(np.diff(y), h, rtol=1e-9):
        raise ValueError("a0_b0 needs a uniform grid")
    mid = n // 2
    odd = w - w[::-1]
    g = np.empty_like(odd)
    nz = np.arange(n) != mid
    g[nz] = odd[nz] / np.sinh(y[nz])
    g[mid] = 2.0 * _fd6_first(w, mid, h)
    a0 = 0.5 * h * (np.sum(g) - 0.5 * (g[0] + g[-1]))
    return a0, w[mid]


@dataclass
class InitialData:
    alpha: int
    omega0: np.ndarray
    a0: complex
    b0: complex
    y_grid: np.ndarray = field(repr=False, default=None)
    func: object = field(repr=False, default=None)
    name: str = ""


def initial_data(func, alpha: int = 1, L: float = 20.0, h: float = 0.01, name: str = "") -> InitialData:
    n = int(round(L / h))
    y = np.linspace(-n * h, n * h, 2 * n + 1)
    w = func(y)
    a0, b0 = a0_b0(w, y)
    return InitialData(alpha, w, a0, b0, y, func, name)


# -- S(t), projection --------------------------------------------------------------------


def s_of(t: float) -> complex:
    """S(t) = -2i int_0^{1/2} sin(ct) chi_0(c)(1 - c^2)^2/c dc."""
    t = float(t)
    if t == 0.0:
        return 0.0j

    def g(c):
        return chi0(c) * (1 - c * c) ** 2 * (np.sinc(c * t / math.pi) * t)

    total = 0.0
    for a, b in ((0.0, 0.25), (0.25, 0.5)):
        n = max(1, int(math.ceil(abs(t) * (b - a) / 4.0)))
        e = np.linspace(a, b, n + 1)
        x, w = np.polynomial.legendre.leggauss(20)
        for lo, hi in zip(e[:-1], e[1:]):
            cc = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
            total += 0.5 * (hi - lo) * np.dot(w, g(cc))
    return -2j * total


def s_of_quad(t: float) -> complex:
    """Independent evaluation of S(t) with QUADPACK's sine-weighted rule (test oracle)."""
    f = lambda c: chi0(c) * (1 - c * c) ** 2 / c if c > 0 else 1.0
    val = 0.0
    for a, b in ((0.0, 0.25), (0.25, 0.5)):
        val += quad(f, a, b, weight="sin", wvar=t, limit=400)[0]
    return -2j * val


def eigen_projection(data: InitialData, y_grid):
    if data.alpha != 1:
        raise ValueError("the eigen projection exists for alpha = 1 only")
    return (data.a0 + 1j * math.pi * data.b0) / (2j * math.pi) / np.cosh(np.asarray(y_grid, dtype=float))


# -- mode fields -----------------------------------------------------------------------


@dataclass
class ModeField:
    alpha: int
    t: float
    y_grid: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray | None = None
    weights: np.ndarray | None = None
    parts: dict = field(default_factory=dict)

    def _w(self):
        if self.weights is not None:
            return self.weights
        return np.gradient(self.y_grid) if self.y_grid.size > 1 else np.ones(1)

    def l2(self, g=None) -> float:
        g = self.psi if g is None else g
        return float(math.sqrt(np.sum(self._w() * np.abs(g) ** 2)))

    def deriv(self, g=None):
        if g is None and self.dpsi is not None:
            return self.dpsi
        g = self.psi if g is None else g
        return np.gradient(g, self.y_grid)

    def h1(self, g=None, dg=None) -> float:
        if g is None:
            g, dg = self.psi, self.deriv()
        elif dg is None:
            dg = np.gradient(g, self.y_grid)
        return float(math.sqrt(self.l2(g) ** 2 + self.l2(dg) ** 2))


def output_grid(alpha: int, t_max: float, L: float = 20.0, order: int = 16, max_width: float = 1.0,
                phase: float = 9.0):
    """Panel grid on [-L, L] whose panel widths follow the local wavelength of e^{-i alpha t u(y)}."""
    from ._panels import PanelGrid

    edges = [0.0]
    while edges[-1] < L:
        y = edges[-1]
        w = min(max_width, phase / max(alpha * t_max * fp.du(y), 1e-300))
        edges.append(min(L, y + w))
    e = np.array(edges)
    return PanelGrid(np.r_[-e[:0:-1], e], order)


class _Evaluator:
    """Time-independent geometry for one table: local meshes and panel bookkeeping."""

    def __init__(self, table: KernelTable):
        self.t = table
        self.p = table.order
        ed = table.eta_edges
        self.mid = 0.5 * (ed[1:] + ed[:-1])
        self.half = 0.5 * np.diff(ed)
        y = table.y_out
        # local panels: any table panel within one nominal width of y
        width = np.max(np.diff(ed))
        dist = np.maximum(0.0, np.maximum(ed[None, :-1] - y[:, None], y[:, None] - ed[None, 1:]))
        self.local = dist < width
        self.local_nodes = np.repeat(self.local, self.p, axis=1)

    def far_weights(self, t: float):
        tab = self.t
        xs, ws = np.polynomial.legendre.leggauss(16)
        alpha = tab.alpha
        V = np.zeros(tab.c_grid.size, dtype=complex)
        for k in range(tab.n_panels):
            a, b = tab.eta_edges[k], tab.eta_edges[k + 1]
            n = max(1, int(math.ceil(alpha * abs(t) * (math.tanh(b) - math.tanh(a)) / PHASE_PER_PANEL)))
            e = np.linspace(a, b, n + 1)
            nodes = (0.5 * (e[1:] + e[:-1])[:, None] + 0.5 * np.diff(e)[:, None] * xs).ravel()
            wts = (0.5 * np.diff(e)[:, None] * ws).ravel()
            xl = (nodes - self.mid[k]) / self.half[k]
            B = lagrange_matrix(xl, self.p)
            kern = wts * np.exp(-1j * alpha * t * np.tanh(nodes)) / np.cosh(nodes) ** 2
            V[k * self.p:(k + 1) * self.p] = kern @ B
        return V

    def local_mesh(self, i: int, cap: float):
        tab = self.t
        yi = tab.y_out[i]
        pans = np.nonzero(self.local[i])[0]
        if pans.size == 0:
            return None
        lo, hi = tab.eta_edges[pans[0]], tab.eta_edges[pans[-1] + 1]
        cand = [lo, hi] + list(tab.eta_edges[pans[0]:pans[-1] + 2])
        d = GRADE_MIN
        while d < cap:
            cand += [yi - d, yi + d]
            d *= 2.0
        step = cap
        k = 1
        while d + (k - 1) * step < hi - lo + cap:
            cand += [yi - d - k * step, yi + d + k * step]
            k += 1
        cand.append(yi)
        e = np.unique(np.clip(cand, lo, hi))
        e = e[np.r_[True, np.diff(e) > 1e-15]]
        xs, ws = np.polynomial.legendre.leggauss(LOCAL_ORDER)
        nodes = (0.5 * (e[1:] + e[:-1])[:, None] + 0.5 * np.diff(e)[:, None] * xs).ravel()
        wts = (0.5 * np.diff(e)[:, None] * ws).ravel()
        pan = np.clip(np.searchsorted(tab.eta_edges, nodes, side="right") - 1, 0, tab.n_panels - 1)
        xl = (nodes - self.mid[pan]) / self.half[pan]
        B = lagrange_matrix(xl, self.p)
        return nodes, wts, pan, B

    def interp(self, mesh, values_row):
        """Interpolate table-node values (last axis n_c) at the mesh nodes."""
        nodes, wts, pan, B = mesh
        idx = pan[:, None] * self.p + np.arange(self.p)[None, :]
        return np.einsum("sk,...sk->...s", B, values_row[..., idx])


def _lam_terms(y, eta, phi1, dphi1, tilde: bool):
    """Lam(y, c) and d_y Lam (divided by c when ``tilde``) at scalar y and c = tanh(eta)."""
    c = np.tanh(eta)
    v = np.sinh(y - eta) / (math.cosh(y) * np.cosh(eta))
    av = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(np.where(av > 0, av, 1.0))
        vlg = np.where(av > 0, v * lg, 0.0)
        X = (1 - c * c) ** 2
        k = 2.0 / X if tilde else 2.0 * c / X
        L = k * phi1 * vlg
        dL = k * (dphi1 * vlg + phi1 * fp.du(y) * np.where(av > 0, lg + 1.0, 0.0))
    return L, dL


def _channel_integrals(ev: _Evaluator, t: float, mults, tilde: bool, exact_mult=None):
    """int e^{-i alpha c t} m(c) Gamma(y, c) dc (or Gamma tilde) and its y-derivative, per datum.

    ``mults``: (n_d, n_c) multipliers at the table nodes; ``exact_mult``: callable m(c)
    replacing interpolation of the multiplier on the local meshes.
    """
    tab = ev.t
    alpha = tab.alpha
    if tilde:
        G, dG = tab.tilde["gamma"], tab.tilde["dgamma"]
        Gp, Gm, dGp, dGm = (tab.tilde[k] for k in ("Gp", "Gm", "dGp", "dGm"))
    else:
        G, dG = tab.gamma, tab.dgamma
        Gp, Gm, dGp, dGm = (tab.near[k] for k in ("Gp", "Gm", "dGp", "dGm"))
    ph1, dph1 = tab.near["phi1"], tab.near["dphi1"]
    V = ev.far_weights(t)
    mV = mults * V[None, :]  # (n_d, n_c)
    far = (mV @ G.T)  # (n_d, n_y)
    dfar = (mV @ dG.T)
    # remove local panels from the product-rule sum
    loc = ev.local_nodes
    far -= np.einsum("dc,yc->dy", mV, np.where(loc, G, 0.0))
    dfar -= np.einsum("dc,yc->dy", mV, np.where(loc, dG, 0.0))
    cap = min(0.0625, PHASE_PER_PANEL / max(alpha * abs(t), 1e-12) / 2.0)
    cap = 2.0 ** math.floor(math.log2(cap))
    n_d = mults.shape[0]
    out = far.astype(complex)
    dout = dfar.astype(complex)
    for i in np.nonzero(loc.any(axis=1))[0]:
        mesh = ev.local_mesh(i, cap)
        nodes, wts, pan, B = mesh
        yi = tab.y_out[i]
        c = np.tanh(nodes)
        stack = np.stack([Gp[i], Gm[i], dGp[i], dGm[i], ph1[i], dph1[i]])
        vals = ev.interp(mesh, stack)
        right = nodes <= yi  # y >= y_c
        Gs = np.where(right, vals[0], vals[1])
        dGs = np.where(right, vals[2], vals[3])
        L, dL = _lam_terms(yi, nodes, vals[4], vals[5], tilde)
        Gs = Gs + L
        dGs = dGs + dL
        if exact_mult is not None:
            m = np.broadcast_to(exact_mult(c), (n_d, c.size))
        else:
            m = ev.interp(mesh, mults)
        kern = wts * np.exp(-1j * alpha * t * c) / np.cosh(nodes) ** 2
        out[:, i] += (m * kern) @ Gs
        dout[:, i] += (m * kern) @ dGs
    return out, dout


_EVALUATORS: dict = {}


def _evaluator(table: KernelTable) -> _Evaluator:
    ev = _EVALUATORS.get(id(table))
    if ev is None or ev.t is not table:
        ev = _Evaluator(table)
        _EVALUATORS.clear()
        _EVALUATORS[id(table)] = ev
    return ev


def f1_eval(t: float, table: KernelTable, with_derivative: bool = False):
    """Rank-one field f_1(t, .) on the table's output points (needs an alpha = 1 table)."""
    if table.alpha != 1:
        raise ValueError("f_1 is defined for alpha = 1")
    ev = _evaluator(table)
    m = -(chi0(table.c_grid) * (1 - table.c_grid ** 2) ** 2)[None, :]
    Psi, dPsi = _channel_integrals(ev, t, m, tilde=True,
                                   exact_mult=lambda c: -chi0(c) * (1 - c * c) ** 2)
    y = table.y_out
    sech = 1.0 / np.cosh(y)
    S = s_of(t)
    f1 = (Psi[0] + (S + 1j * math.pi) * sech) / (2 * math.pi ** 2)
    df1 = (dPsi[0] - (S + 1j * math.pi) * sech * np.tanh(y)) / (2 * math.pi ** 2)
    return (f1, df1) if with_derivative else f1


MIN_POINTS_PER_WAVE = 10.0


def check_resolution(y, alpha: int, t: float, order: int = 16) -> float:
    """Smallest local number of y-points per wavelength of e^{-i alpha t u(y)}; raises below 10."""
    y = np.asarray(y, dtype=float)
    if y.size < 2 or alpha * abs(t) == 0.0:
        return math.inf
    k = min(order, y.size)
    spacing = np.convolve(np.gradient(y), np.ones(k) / k, mode="same")
    ppw = float(np.min(2 * math.pi / (alpha * abs(t) * fp.du(y) * spacing)))
    if ppw < MIN_POINTS_PER_WAVE:
        raise ValueError(f"y-grid too coarse for alpha*t = {alpha * t:g}: {ppw:.2f} points per "
                         f"oscillation (need {MIN_POINTS_PER_WAVE:g}); rebuild on output_grid(alpha, t)")
    return ppw


def psi_mode(t: float, table: KernelTable, datum: int = 0, weights=None, check: bool = True) -> ModeField:
    """psi_hat(t, alpha, .) for datum ``datum`` of the table, with d_y psi_hat and (alpha = 1) its parts."""
    ev = _evaluator(table)
    y = table.y_out
    if check:
        check_resolution(y, table.alpha, t, table.order)
    reg, dreg = _channel_integrals(ev, t, table.mult[datum:datum + 1], tilde=False)
    reg, dreg = reg[0], dreg[0]
    if table.alpha >= 2:
        return ModeField(table.alpha, t, y, reg, dreg, weights, {"regular": reg})
    a0 = table.a0[datum]
    b0 = table.b0[datum]
    f1, df1 = f1_eval(t, table, with_derivative=True)
    sech = 1.0 / np.cosh(y)
    coef = (a0 + 1j * math.pi * b0) / (2j * math.pi)
    proj = coef * sech
    dproj = -coef * sech * np.tanh(y)
    psi = reg + a0 * f1 + proj
    dpsi = dreg + a0 * df1 + dproj
    parts = {"regular": reg, "rank_one": a0 * f1, "projection": proj,
             "d_regular": dreg, "d_rank_one": a0 * df1, "d_projection": dproj}
    return ModeField(1, t, y, psi, dpsi, weights, parts)


def velocity_norms(fields) -> tuple[float, float]:
    """(||V||^2, ||V^2||^2) = (2 sum (alpha^2 ||psi||^2 + ||psi'||^2), 2 sum alpha^2 ||psi||^2)."""
    fields = list(fields)
    if not fields:
        return 0.0, 0.0
    y0 = fields[0].y_grid
    for f in fields[1:]:
        if f.y_grid.shape != y0.shape or not np.allclose(f.y_grid, y0):
            raise ValueError("mode fields live on different grids")
    v2 = 0.0
    v1 = 0.0
    for f in fields:
        l2 = f.l2() ** 2
        d = f.l2(f.deriv()) ** 2
        v1 += 2.0 * (f.alpha ** 2 * l2 + d)
        v2 += 2.0 * f.alpha ** 2 * l2
    return v1, v2


def write_series_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "alpha", "L2_psi", "H1_psi", "L2_residual_after_subtraction"])
        for r in rows:
            w.writerow([repr(float(r[0])), int(r[1])] + [repr(float(x)) for x in r[2:]])


def write_manifest(doc: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump({"schema": 1, **doc}, fh, indent=2, sort_keys=True, default=str)
