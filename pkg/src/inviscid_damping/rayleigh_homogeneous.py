"""Homogeneous Rayleigh solution phi = (u - c) phi_1 for u = tanh y.

phi_1 solves phi_1'' - alpha^2 phi_1 + 2u'/(u - c) phi_1' = 0 with
phi_1(y_c) = 1, phi_1'(y_c) = 0.  It is obtained by Picard iteration on the
Volterra form phi_1 = 1 + alpha^2 T phi_1, where

    T f(y) = int_{y_c}^y (u(z) - c)^{-2} int_{y_c}^z f(w) (u(w) - c)^2 dw dz.

The grid is a union of Gauss-Legendre panels with y_c on an edge.  On the two
panels touching y_c the inner integral is evaluated in the regularised form

    int_{y_c}^z f(w) rho(w, z)^2 dw,   rho = (u(w) - c)/(u(z) - c),  |rho| <= 1,

so nothing is ever divided by the vanishing factor (u - c)^2 there.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import flow_profile as fp
from ._panels import PanelGrid, geometric_edges, lagrange_matrix, reference_rule

__all__ = [
    "Phi1Field",
    "ConvergenceError",
    "build_grid",
    "apply_T",
    "apply_T_regularized",
    "solve_phi1",
    "phi_hom",
    "ode_residual",
    "field_to_csv",
    "field_from_csv",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
RESIDUAL_BAND = 1e-3


class ConvergenceError(RuntimeError):
    """Picard iteration did not reach the requested tolerance."""


def default_half_width(alpha: int) -> float:
    return max(25.0 / alpha, 20.0)


def default_panel_width(alpha: int) -> float:
    # 16 nodes per panel keep the mean spacing h with alpha*h <= 0.05
    return min(0.5, 0.8 / alpha)


def build_grid(point: fp.SpectralPoint, half_width: float | None = None, panel: float | None = None,
               order: int = 16) -> tuple[PanelGrid, int]:
    """Panel grid adapted to ``point``; returns the grid and the edge index of y_c.

    The grid covers [y_c - L, y_c + L] and [-L, L].  For complex c the panels
    next to y_c are refined geometrically down to a quarter of the width
    |Im c|/u'(y_c) of the near-singular layer.
    """
    alpha = point.alpha
    L = default_half_width(alpha) if half_width is None else float(half_width)
    h = default_panel_width(alpha) if panel is None else float(panel)
    yc = point.y_c
    lo = min(yc - L, -L)
    hi = max(yc + L, L)
    n_right = int(math.ceil((hi - yc) / h))
    n_left = int(math.ceil((yc - lo) / h))
    edges = [yc + k * h for k in range(-n_left, n_right + 1)]
    if not point.is_real:
        width = abs(point.c.imag) / (1.0 - point.c.real ** 2)
        first = min(h, width) / 4.0
        fine = []
        for direction in (1, -1):
            fine += geometric_edges(yc, first, h, direction)
        edges = edges + fine
    edges = np.unique(np.asarray(edges))
    grid = PanelGrid(edges, order)
    return grid, grid.edge_index(yc)


@lru_cache(maxsize=8)
def _regular_stencils(order: int, n_t: int):
    """Reference interpolation tensors for the two panels adjacent to y_c."""
    x = reference_rule(order)[0]
    t, wt = np.polynomial.legendre.leggauss(n_t)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    # right panel: node z_j = y_c + half*(1 + x_j); sample y_c + t_q (z_j - y_c)
    xr = -1.0 + t[None, :] * (1.0 + x[:, None])
    xl = 1.0 - t[None, :] * (1.0 - x[:, None])
    Br = lagrange_matrix(xr, order)
    Bl = lagrange_matrix(xl, order)
    return t, wt, Br, Bl


class _TOperator:
    """Precomputed pieces of T and T_{2,2} for one spectral point on one grid."""

    def __init__(self, point: fp.SpectralPoint, grid: PanelGrid, anchor: int, n_t: int = 16):
        self.point = point
        self.grid = grid
        self.anchor = anchor
        c = point.c
        self.v = fp.u_minus_c(grid.y, c)
        self.v2 = self.v * self.v
        t, wt, Br, Bl = _regular_stencils(grid.order, n_t)
        yc = point.y_c
        p = grid.order
        self.near = {}
        for pan, B in ((anchor, Br), (anchor - 1, Bl)):
            if pan < 0 or pan >= grid.n_panels:
                continue
            z = grid.nodes2d[pan]
            delta = z - yc
            pts = yc + t[None, :] * delta[:, None]
            rho = fp.u_minus_c(pts, c) / fp.u_minus_c(z, c)[:, None]
            # K[j, k] = delta_j sum_q w_q rho_jq^2 B[j, q, k]
            K = delta[:, None] * np.einsum("q,jq,jqk->jk", wt, rho * rho, B)
            self.near[pan] = K
        self.slices = {pan: slice(pan * p, (pan + 1) * p) for pan in self.near}

    def apply(self, f):
        """Return (T f, T_{2,2} f) on the grid nodes."""
        f = np.asarray(f)
        G = self.grid.cumulative(f * self.v2, self.anchor)
        P = G / self.v2
        for pan, K in self.near.items():
            sl = self.slices[pan]
            P[sl] = K @ f[sl]
        return self.grid.cumulative(P, self.anchor), P


def apply_T(f, point: fp.SpectralPoint, grid: PanelGrid | None = None, anchor: int | None = None,
            with_derivative: bool = False):
    """Apply T to samples (or a callable) ``f`` on the grid nodes.

    Returns ``T f`` (and ``T_{2,2} f = d/dy T f`` when ``with_derivative``).
    """
    if grid is None:
        grid, anchor = build_grid(point)
    elif anchor is None:
        anchor = grid.edge_index(point.y_c)
    vals = f(grid.y) if callable(f) else np.asarray(f)
    if vals.shape != grid.y.shape:
        raise ValueError("f must be sampled on the grid nodes")
    if not np.all(np.isfinite(vals)):
        raise ValueError("f contains non-finite samples")
    op = _TOperator(point, grid, anchor)
    Tf, P = op.apply(vals)
    return (Tf, P) if with_derivative else Tf


def apply_T_regularized(f, point: fp.SpectralPoint, y, order: int = 16, panels: int | None = None):
    """Reference evaluation of T f(y) by the double-parameter kernel form.

    T f(y) = (y - y_c)^2 int_0^1 int_0^1 s rho(ts, s)^2 f(y_c + ts (y - y_c)) dt ds

    with composite Gauss-Legendre rules in both parameters; ``f`` is a callable.
    """
    yc = point.y_c
    c = point.c
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.zeros(y.shape, dtype=complex)
    x, w = np.polynomial.legendre.leggauss(order)
    for i, yy in enumerate(y):
        delta = yy - yc
        if delta == 0.0:
            continue
        n = panels or max(1, int(math.ceil(abs(delta) * point.alpha / 0.5)))
        e = np.linspace(0.0, 1.0, n + 1)
        if panels is None and c.imag != 0.0:
            # u - c has a near-zero of width |Im c|/u'(y_c) at s = 0; grade toward it
            eps = abs(c.imag) / (fp.du(yc) * abs(delta))
            if eps < e[1]:
                e = np.unique(np.r_[0.0, e[1] * 0.25 ** np.arange(int(math.log(e[1] / eps, 4)) + 3)[::-1], e[1:]])
        s = (0.5 * (e[1:] + e[:-1])[:, None] + 0.5 * np.diff(e)[:, None] * x).ravel()
        ws = (0.5 * np.diff(e)[:, None] * w).ravel()
        S, Tt = np.meshgrid(s, s, indexing="ij")
        W = np.outer(ws, ws)
        inner = yc + Tt * S * delta
        rho = fp.u_minus_c(inner, c) / fp.u_minus_c(yc + S * delta, c)
        out[i] = delta * delta * np.sum(W * S * rho * rho * f(inner))
    return out if not point.is_real else out.real


@dataclass
class Phi1Field:
    """Converged phi_1 and its derivative on a panel grid."""

    point: fp.SpectralPoint
    y_grid: np.ndarray
    phi1: np.ndarray
    dphi1: np.ndarray
    iterations: int
    residual: float
    grid: PanelGrid = field(repr=False)
    anchor: int = 0
    phi1m1: np.ndarray = field(default=None, repr=False)
    updates: list = field(default_factory=list, repr=False)

    @property
    def v(self):
        return fp.u_minus_c(self.y_grid, self.point.c)

    @property
    def phi(self):
        return self.v * self.phi1

    @property
    def dphi(self):
        return fp.du(self.y_grid) * self.phi1 + self.v * self.dphi1


def solve_phi1(point: fp.SpectralPoint, grid: PanelGrid | None = None, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER, anchor: int | None = None,
               residual_band: float = RESIDUAL_BAND) -> Phi1Field:
    """Picard iteration phi_1 <- 1 + alpha^2 T phi_1 started from phi_1 = 1."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if grid is None:
        grid, anchor = build_grid(point)
    elif anchor is None:
        anchor = grid.edge_index(point.y_c)
    if point.alpha * max(abs(grid.edges[0] - point.y_c), abs(grid.edges[-1] - point.y_c)) > 600:
        raise ValueError("grid too wide: phi_1 would overflow double precision")
    op = _TOperator(point, grid, anchor)
    a2 = point.alpha ** 2
    dtype = float if point.is_real else complex
    phi = np.ones(grid.size, dtype=dtype)
    updates = []
    for it in range(1, max_iter + 1):
        Tphi, P = op.apply(phi)
        new = 1.0 + a2 * Tphi
        upd = np.max(np.abs(new - phi)) / np.max(np.abs(new))
        updates.append(float(upd))
        phi_prev, phi = phi, new
        if upd < tol:
            break
    else:
        raise ConvergenceError(
            f"Picard iteration stalled at update {updates[-1]:.3e} after {max_iter} sweeps "
            f"(c = {point.c}, alpha = {point.alpha})")
    out = Phi1Field(point=point, y_grid=grid.y, phi1=phi, dphi1=a2 * P, iterations=it,
                    residual=np.nan, grid=grid, anchor=anchor, phi1m1=a2 * Tphi, updates=updates)
    if point.is_real:
        out.residual = ode_residual(out, band=residual_band)
    return out


def phi_hom(fld: Phi1Field, y):
    """(phi, phi') at ``y`` from the panel interpolant of the converged field."""
    y = np.asarray(y, dtype=float)
    p1 = fld.grid.interpolate(fld.phi1, y)
    dp1 = fld.grid.interpolate(fld.dphi1, y)
    v = fp.u_minus_c(y, fld.point.c)
    return v * p1, fp.du(y) * p1 + v * dp1


def ode_residual(fld: Phi1Field, band: float = RESIDUAL_BAND) -> float:
    """Largest relative defect |phi_1'' - alpha^2 phi_1 + 2u'/(u - c) phi_1'| / |phi_1|.

    phi_1'' is obtained by differentiating the stored phi_1' panel by panel;
    nodes with |y - y_c| < ``band`` are skipped.
    """
    y = fld.y_grid
    d2 = fld.grid.derivative(fld.dphi1)
    v = fp.u_minus_c(y, fld.point.c)
    defect = d2 - fld.point.alpha ** 2 * fld.phi1 + 2.0 * fp.du(y) / v * fld.dphi1
    mask = np.abs(y - fld.point.y_c) >= band
    return float(np.max(np.abs(defect[mask]) / np.abs(fld.phi1[mask])))


def field_to_csv(fld: Phi1Field, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["y", "re_phi1", "im_phi1", "re_dphi1", "im_dphi1"])
        for row in zip(fld.y_grid, np.real(fld.phi1), np.imag(fld.phi1),
                       np.real(fld.dphi1), np.imag(fld.dphi1)):
            wr.writerow([repr(float(v)) for v in row])


def field_from_csv(path) -> dict:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {
        "y": data["y"],
        "phi1": data["re_phi1"] + 1j * data["im_phi1"],
        "dphi1": data["re_dphi1"] + 1j * data["im_dphi1"],
    }
