"""Singular operators built on the homogeneous Rayleigh solution.

For real c the class :class:`RealSolution` wraps one phi_1 solve and offers

* the principal-value operator  T(f)(c) = p.v. int (int_{y_c}^y phi_1 f)/phi^2 dy
  and its one-sided limits, via the split I_1 + I_2 + I_3 with I_3 in closed form;
* the Green-type solution Gamma(y, c) and its y-derivative;
* the particular solution used by the boundary values Phi_{+-}.

Gamma near y_c.  With X = (1 - c^2)^2 and v = u - c the exact identity

    X/v^2 = (1 - c^2) u'/v^2 + 2c u'/v + (u + c)^2 + u'

splits phi^{-2} into  sing = X^{-1}[(1 - c^2)u'/v^2 + 2c u'/v]  (antiderivative
F = X^{-1}[-(1 - c^2)/v + 2c ln|v|]) and a remainder R analytic at y_c.  Then

    Gamma = G_+ + Lam  (y >= y_c),   Gamma = G_- + Lam  (y <= y_c),
    Lam   = 2c phi_1 v ln|v| / X,

with G_+ and G_- analytic in (y, c) across y = y_c.  Far from y_c the plain
formulas  -phi int_y^inf phi^{-2}  and  phi int_{-inf}^y phi^{-2}  are used.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import flow_profile as fp
from . import wronskian as wr
from .rayleigh_homogeneous import Phi1Field, build_grid, solve_phi1

__all__ = [
    "RealSolution",
    "real_solution",
    "chi0",
    "chi1",
    "calT",
    "calT_tilde",
    "calT_excision",
    "gamma_fn",
    "mu",
    "mu_from_parts",
    "lambda1",
    "lambda2",
    "lambda1_tilde",
    "lambda2_tilde",
    "kernel_K",
    "InhomogeneousSolution",
    "solve_inhomogeneous",
    "phi_plus_minus",
    "TildeData",
    "write_lap_json",
    "write_kernel_csv",
    "embedding_lap",
    "embedding_lap_limit",
    "angular_average",
    "KernelTable",
    "build_kernel_table",
    "eta_edges",
]

NEAR_BAND = 1.0


def chi0(c):
    """Even C^2 cut-off: 1 on |c| <= 1/4, 0 on |c| >= 1/2, quintic smoothstep between."""
    s = np.clip((0.5 - np.abs(np.asarray(c, dtype=float))) / 0.25, 0.0, 1.0)
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


def chi1(c):
    return 1.0 - chi0(c)


def _as_callable(f):
    if callable(f):
        return f
    raise TypeError("f must be a vectorised callable of y")


class RealSolution:
    """Everything derived from phi_1(., c) at one real c and wavenumber alpha."""

    def __init__(self, c: float, alpha: int, near_band: float = NEAR_BAND, half_width=None, panel=None,
                 tol: float = 1e-12):
        c = float(c)
        if abs(c) > wr.C_MAX:
            raise ValueError(f"|c| = {abs(c)} exceeds c_max = {wr.C_MAX}")
        self.c = c
        self.alpha = alpha
        self.point = fp.spectral_point(c, alpha)
        self.y_c = self.point.y_c
        grid, anchor = build_grid(self.point, half_width=half_width, panel=panel)
        self.fld: Phi1Field = solve_phi1(self.point, grid=grid, anchor=anchor, tol=tol)
        self.grid = grid
        self.anchor = anchor
        y = grid.y
        self.y = y
        self.u = fp.u(y)
        self.up = fp.du(y)
        self.v = fp.u_minus_c(y, c)
        self.phi1 = self.fld.phi1
        self.dphi1 = self.fld.dphi1
        self.q = wr.phi1_inv2_minus1(self.fld)
        self.phi = self.v * self.phi1
        self.dphi = self.up * self.phi1 + self.v * self.dphi1
        self.one_m_c2 = 1.0 - c * c
        self.X = self.one_m_c2 ** 2
        self.W1 = float(wr.w1_from_field(self.fld))
        self.A = self.W1 + 2.0 * c * math.log((1.0 - c) / (1.0 + c))
        self._build_gamma(near_band)

    # -- Gamma ---------------------------------------------------------------
    def _F(self, yy):
        v = float(fp.u_minus_c(yy, self.c))
        return (-self.one_m_c2 / v + 2.0 * self.c * math.log(abs(v))) / self.X

    def _build_gamma(self, near_band):
        g = self.grid
        h = g.edges[self.anchor + 1] - g.edges[self.anchor]
        k = max(1, int(round(near_band / h)))
        kb = min(self.anchor + k, g.n_panels)
        ka = max(self.anchor - k, 0)
        self.a_edge, self.b_edge = g.edges[ka], g.edges[kb]
        inv2 = 1.0 / (self.phi * self.phi)
        R = ((self.u + self.c) ** 2 + self.up) / self.X + self.q / (self.v * self.v)
        self.R = R
        pan = g.panel_integrals(inv2)
        tail_b = float(np.sum(pan[kb:]))
        tail_a = float(np.sum(pan[:ka]))
        Fb = self._F(self.b_edge)
        Fa = self._F(self.a_edge)
        IR = -g.cumulative(R, kb)  # int_y^b R
        IL = g.cumulative(R, ka)  # int_a^y R
        br = IR + tail_b + Fb
        bl = IL + tail_a - Fa
        s = self.one_m_c2
        self.Gp = -self.phi * br - self.phi1 / s
        self.Gm = self.phi * bl - self.phi1 / s
        self.dGp = -self.dphi * br + self.phi * R - self.dphi1 / s
        self.dGm = self.dphi * bl + self.phi * R - self.dphi1 / s
        # far fields; only meaningful outside [a, b]
        tail = -g.cumulative(inv2, g.n_panels)  # int_y^end
        tailL = g.cumulative(inv2, 0)  # int_start^y
        self.Gam_right = -self.phi * tail
        self.dGam_right = -self.dphi * tail + 1.0 / self.phi
        self.Gam_left = self.phi * tailL
        self.dGam_left = self.dphi * tailL + 1.0 / self.phi
        self._pan_a, self._pan_b = ka, kb

    def lam(self, y, phi1, dphi1):
        """Logarithmic part Lam and its y-derivative at points y given phi_1 there."""
        y = np.asarray(y, dtype=float)
        v = fp.u_minus_c(y, self.c)
        av = np.abs(v)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.where(av > 0, np.log(np.where(av > 0, av, 1.0)), -np.inf)
            vlg = np.where(av > 0, v * lg, 0.0)
            k = 2.0 * self.c / self.X
            L = k * phi1 * vlg
            dL = k * (dphi1 * vlg + phi1 * fp.du(y) * (lg + 1.0))
        if self.c == 0.0:
            dL = np.zeros_like(L)
        return L, dL

    def near_parts(self, y):
        """G_+, G_-, their derivatives and phi_1, phi_1' interpolated at y (inside the near band)."""
        y = np.asarray(y, dtype=float)
        if np.any(y < self.a_edge - 1e-12) or np.any(y > self.b_edge + 1e-12):
            raise ValueError("near_parts requested outside the near band")
        stack = np.stack([self.Gp, self.Gm, self.dGp, self.dGm, self.phi1, self.dphi1], axis=-1)
        vals = self.grid.interpolate(stack, y)
        return {k: vals[..., i] for i, k in enumerate(("Gp", "Gm", "dGp", "dGm", "phi1", "dphi1"))}

    def gamma(self, y, side: int | None = None):
        """(Gamma, d_y Gamma) at points y.  ``side`` picks the branch at y = y_c exactly."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        G = np.empty(y.shape)
        dG = np.empty(y.shape)
        near = (y >= self.a_edge) & (y <= self.b_edge)
        right = y > self.y_c if side is None else (y > self.y_c) | ((y == self.y_c) & (side > 0))
        if np.any(near):
            yn = y[near]
            p = self.near_parts(yn)
            L, dL = self.lam(yn, p["phi1"], p["dphi1"])
            r = right[near]
            G[near] = np.where(r, p["Gp"], p["Gm"]) + L
            dG[near] = np.where(r, p["dGp"], p["dGm"]) + dL
        far_r = ~near & right
        far_l = ~near & ~right
        if np.any(far_r):
            vals = self.grid.interpolate(np.stack([self.Gam_right, self.dGam_right], -1), y[far_r])
            G[far_r], dG[far_r] = vals[:, 0], vals[:, 1]
        if np.any(far_l):
            vals = self.grid.interpolate(np.stack([self.Gam_left, self.dGam_left], -1), y[far_l])
            G[far_l], dG[far_l] = vals[:, 0], vals[:, 1]
        return G, dG

    # -- T ---------------------------------------------------------------------
    def calT(self, f):
        """(p.v., + limit, - limit) of T(f)(c)."""
        f = _as_callable(f)
        fv = np.asarray(f(self.y), dtype=complex if np.iscomplexobj(f(self.y)) else float)
        fc = complex(f(np.array([self.y_c]))[0])
        g = self.grid
        m = self.anchor
        c = self.c
        s = self.one_m_c2
        Ff = g.cumulative(fv, m)
        Fm = g.cumulative(fv * self.fld.phi1m1, m)
        v2 = self.v * self.v
        h = Fm / self.phi1 ** 2 + Ff * (self.q + self.v * (self.u + c) / s)
        I1 = g.integrate(h / v2)
        gg = Ff - self.v * fc / s
        I2 = g.integrate(self.up * gg / v2) / s
        I3 = fc * math.log((1.0 - c) / (1.0 + c)) / self.X
        pv = complex(I1 + I2 + I3)
        jump = 1j * math.pi * fc / self.X
        if not np.iscomplexobj(fv) and fc.imag == 0.0:
            pv = pv.real
        return pv, pv + jump, pv - jump

    def particular(self, f, y):
        """Particular part of Phi_{+-}: phi int_{-inf}^y N/phi^2 (y < y_c) or phi int_{+inf}^y N/phi^2.

        N = int_{y_c}^z phi_1 f.  Only points at least one panel away from y_c are accurate.
        """
        f = _as_callable(f)
        g = self.grid
        N = g.cumulative(self.phi1 * f(self.y), self.anchor)
        integrand = N / (self.phi * self.phi)
        left = self.phi * g.cumulative(integrand, 0)
        right = self.phi * g.cumulative(integrand, g.n_panels)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.where(y < self.y_c, g.interpolate(left, y), g.interpolate(right, y))
        return out

    def phi1_at(self, y):
        return self.grid.interpolate(self.phi1, np.asarray(y, dtype=float))


_CACHE: dict = {}


def real_solution(c: float, alpha: int) -> RealSolution:
    """Memoised :class:`RealSolution` (small LRU keyed by (c, alpha))."""
    key = (float(c), int(alpha))
    sol = _CACHE.get(key)
    if sol is None:
        sol = RealSolution(c, alpha)
        if len(_CACHE) > 64:
            _CACHE.pop(next(iter(_CACHE)))
        _CACHE[key] = sol
    return sol


def calT(f, c: float, alpha: int):
    return real_solution(c, alpha).calT(f)


def gamma_fn(y, c: float, alpha: int, side: int | None = None):
    """Gamma(y, c) (values only); use RealSolution.gamma for the derivative too."""
    return real_solution(c, alpha).gamma(y, side)[0]


def calT_excision(f, c: float, alpha: int, widths=(1e-3, 1e-4, 1e-5)):
    """Brute-force principal value: drop |u(y) - c| < h and extrapolate h -> 0."""
    sol = real_solution(c, alpha)
    g = sol.grid
    N = g.cumulative(sol.phi1 * f(sol.y), sol.anchor)
    vals = []
    from ._panels import PanelGrid, geometric_edges

    for h in widths:
        lo = fp.critical_point(c - h)
        hi = fp.critical_point(c + h)
        left = np.unique(np.r_[g.edges[g.edges < lo], geometric_edges(lo, h, 1.0, -1), lo])
        right = np.unique(np.r_[hi, geometric_edges(hi, h, 1.0, 1), g.edges[g.edges > hi]])
        total = 0.0
        for edges in (left, right):
            sub = PanelGrid(edges, g.order)
            Nq = g.interpolate(N, sub.y)
            p1 = g.interpolate(sol.phi1, sub.y)
            vq = fp.u_minus_c(sub.y, c)
            total = total + sub.integrate(Nq / (vq * p1) ** 2)
        vals.append(total)
    return wr.richardson(np.array(vals), np.array(widths), order=1).real


# -- small-c tilde quantities -----------------------------------------------------


class TildeData:
    """Small-|c| interpolants of A and T(f) for the alpha = 1 quotients."""

    def __init__(self, fs=(), alpha: int = 1, c_switch: float = wr.C_SWITCH):
        self.alpha = alpha
        self.c_switch = c_switch
        self.fs = list(fs)
        cache = {}

        def solve(c):
            if c not in cache:
                cache[c] = RealSolution(c, alpha)
            return cache[c]

        self.A = wr.SmallCInterpolant(lambda c: solve(c).A)
        self.T = [wr.SmallCInterpolant(lambda c, f=f: complex(solve(c).calT(f)[0])) for f in self.fs]
        self.T0 = [complex(RealSolution(0.0, alpha).calT(f)[0]) for f in self.fs]

    def a_tilde(self, c, A=None):
        if abs(c) >= self.c_switch:
            return (A if A is not None else RealSolution(c, self.alpha).A) / c
        if c == 0.0:
            return 0.0
        return float(wr.derivative_average(self.A, c))

    def a_ttilde(self, c, A=None):
        if abs(c) >= self.c_switch:
            return (A if A is not None else RealSolution(c, self.alpha).A) / (c * c)
        return float(wr.second_derivative_average(self.A, c))

    def t_tilde(self, k, c, T=None):
        if abs(c) >= self.c_switch:
            val = T if T is not None else RealSolution(c, self.alpha).calT(self.fs[k])[0]
            return (val - self.T0[k]) / c
        return complex(wr.derivative_average(self.T[k], c))


def calT_tilde(f, c: float, alpha: int = 1, c_switch: float = wr.C_SWITCH, data: TildeData | None = None):
    """(T(f)(c) - T(f)(0))/c, with the derivative average for |c| < c_switch."""
    if abs(c) >= 0.5:
        raise ValueError("the tilde operator is only used on |c| < 1/2")
    if abs(c) >= c_switch:
        return (calT(f, c, alpha)[0] - calT(f, 0.0, alpha)[0]) / c
    data = data or TildeData([f], alpha, c_switch)
    return data.t_tilde(0, c)


# -- mu, Lambda, K ------------------------------------------------------------------


def mu_from_parts(c, A, T, fc, alpha=1, At=None, Att=None, c_switch: float = wr.C_SWITCH):
    """mu = -(2c X T - A f(y_c))/(A^2 + 4 pi^2 c^2); divided through by c^2 when alpha = 1, |c| < c_switch."""
    X = (1.0 - c * c) ** 2
    if alpha == 1 and abs(c) < c_switch:
        if c == 0.0:
            raise ZeroDivisionError("mu has a simple pole at c = 0 when alpha = 1")
        return -(2.0 * X * T / c - Att * fc) / (At * At + 4.0 * math.pi ** 2)
    return -(2.0 * c * X * T - A * fc) / (A * A + 4.0 * math.pi ** 2 * c * c)


def mu(c: float, alpha: int, omega0, data: TildeData | None = None):
    sol = real_solution(c, alpha)
    T = sol.calT(omega0)[0]
    fc = complex(omega0(np.array([sol.y_c]))[0])
    if alpha == 1 and abs(c) < wr.C_SWITCH:
        data = data or TildeData([], alpha)
        return mu_from_parts(c, sol.A, T, fc, alpha, data.a_tilde(c, sol.A), data.a_ttilde(c, sol.A))
    return mu_from_parts(c, sol.A, T, fc, alpha)


def _fc(f, y_c):
    return complex(f(np.array([y_c]))[0])


def lambda1(f, c: float, alpha: int):
    sol = real_solution(c, alpha)
    return 2.0 * c * sol.calT(f)[0] - sol.A * _fc(f, sol.y_c) / sol.X


def _upp_times(g):
    return lambda y: fp.d2u(y) * g(y)


def lambda2(g, c: float, alpha: int):
    sol = real_solution(c, alpha)
    return sol.calT(_upp_times(g))[0] + sol.A * _fc(g, sol.y_c) / sol.one_m_c2


def lambda1_tilde(f, c: float, data: TildeData | None = None):
    if abs(c) >= 0.5:
        raise ValueError("the tilde functionals live on |c| < 1/2")
    sol = real_solution(c, 1)
    data = data or TildeData([f])
    Att = data.a_ttilde(c, sol.A)
    Tt = data.t_tilde(0, c, sol.calT(f)[0] if abs(c) >= data.c_switch else None)
    return 2.0 * Tt - Att * _fc(f, sol.y_c) / sol.X


def lambda2_tilde(g, c: float, data: TildeData | None = None):
    if abs(c) >= 0.5:
        raise ValueError("the tilde functionals live on |c| < 1/2")
    sol = real_solution(c, 1)
    ug = _upp_times(g)
    data = data or TildeData([ug])
    At = data.a_tilde(c, sol.A)
    Tt = data.t_tilde(0, c, sol.calT(ug)[0] if abs(c) >= data.c_switch else None)
    return Tt + At * _fc(g, sol.y_c) / sol.one_m_c2


def kernel_K(f, g, c: float, alpha: int, variant: str = "full", tilde_f: TildeData | None = None):
    """Bilinear kernels built from Lambda_1(f), Lambda_2(g) and the A-quotients."""
    X = (1.0 - c * c) ** 2
    if variant == "full":
        sol = real_solution(c, alpha)
        D = sol.A ** 2 + 4 * math.pi ** 2 * c * c
        return X * lambda1(f, c, alpha) * lambda2(g, c, alpha) / D
    if variant == "K1":
        if abs(c) <= 0.25:
            return 0.0
        sol = real_solution(c, alpha)
        D = sol.A ** 2 + 4 * math.pi ** 2 * c * c
        return float(chi1(c)) * X * lambda1(f, c, alpha) * lambda2(g, c, alpha) / D
    if variant in ("K0", "K0_tilde"):
        if alpha != 1:
            raise ValueError("K0 kernels are defined for alpha = 1")
        if abs(c) >= 0.5:
            return 0.0
        sol = real_solution(c, 1)
        data = TildeData([], 1)
        At = data.a_tilde(c, sol.A)
        den = At * At + 4 * math.pi ** 2
        L2 = lambda2(g, c, 1)
        if variant == "K0":
            return float(chi0(c)) * X * lambda1_tilde(f, c, tilde_f) * L2 / den
        Att = data.a_ttilde(c, sol.A)
        return float(chi0(c)) * X * c * Att * Att * L2 / den
    raise ValueError(f"unknown kernel variant {variant!r}")


# -- inhomogeneous solution at complex c --------------------------------------


@dataclass
class InhomogeneousSolution:
    point: fp.SpectralPoint
    y_grid: np.ndarray
    Phi: np.ndarray
    mu_coeff: complex
    W: complex
    defect: float
    grid: object = field(repr=False, default=None)

    def at(self, y):
        return self.grid.interpolate(self.Phi, np.asarray(y, dtype=float))


def solve_inhomogeneous(point: fp.SpectralPoint, f, min_abs_W: float = 1e-300) -> InhomogeneousSolution:
    """Phi solving (u - c)(Phi'' - alpha^2 Phi) - u'' Phi = f for Im c != 0.

    The left expression is used for y <= y_c and the right one for y >= y_c; the
    two are compared at y_c + 1 and the relative difference is stored as ``defect``.
    """
    if point.is_real:
        raise ValueError("solve_inhomogeneous needs Im c != 0")
    f = _as_callable(f)
    fld = solve_phi1(point)
    g = fld.grid
    m = fld.anchor
    phi = fld.phi
    inv2 = 1.0 / (phi * phi)
    W = complex(g.integrate(inv2))
    if abs(W) < min_abs_W:
        raise ZeroDivisionError("Wronskian vanishes")
    N = g.cumulative(fld.phi1 * f(fld.y_grid), m)
    Tf = complex(g.integrate(N * inv2))
    mu_c = -Tf / W
    left = phi * (g.cumulative(N * inv2, 0) + mu_c * g.cumulative(inv2, 0))
    right = phi * (g.cumulative(N * inv2, g.n_panels) + mu_c * g.cumulative(inv2, g.n_panels))
    y = fld.y_grid
    Phi = np.where(y <= point.y_c, left, right)
    probe = np.array([point.y_c + 1.0])
    lv = g.interpolate(left, probe)[0]
    rv = g.interpolate(right, probe)[0]
    defect = abs(lv - rv) / max(abs(rv), 1e-300)
    return InhomogeneousSolution(point, y, Phi, mu_c, W, float(defect), g)


def embedding_lap(f, delta: float, theta: float, y, alpha: int = 1):
    """c Phi(alpha, y, c) at c = delta e^{i theta} (theta off the real axis)."""
    c = delta * complex(math.cos(theta), math.sin(theta))
    sol = solve_inhomogeneous(fp.spectral_point(c, alpha), f)
    return c * sol.at(y)


def embedding_lap_limit(f, y, side: int = 1, alpha: int = 1):
    """(T(f)(0) +- i pi f(0))/(+-2 pi i) sech y, the one-sided limit of c Phi at c = 0."""
    f = _as_callable(f)
    T0 = complex(real_solution(0.0, alpha).calT(f)[0])
    return (T0 + side * 1j * math.pi * _fc(f, 0.0)) / (side * 2j * math.pi) / np.cosh(np.asarray(y, dtype=float))


def angular_average(f, delta: float, y, n: int = 16, alpha: int = 1):
    """(2 pi)^{-1} int_0^{2 pi} c Phi(y, delta e^{i theta}) d theta by Gauss-Legendre on each half circle."""
    x, w = np.polynomial.legendre.leggauss(n)
    total = 0.0
    for lo in (0.0, math.pi):
        for xi, wi in zip(x, w):
            th = lo + 0.5 * math.pi * (xi + 1.0)
            total = total + 0.5 * math.pi * wi * embedding_lap(f, delta, th, y, alpha)
    return total / (2 * math.pi)


def phi_plus_minus(f, c: float, alpha: int, y, side: int):
    """Boundary value Phi_{+-}(y) = particular + mu_{+-} Gamma, valid off the critical layer."""
    sol = real_solution(c, alpha)
    T = sol.calT(f)[0]
    fc = _fc(f, sol.y_c)
    mu_pm = -(sol.X * T + side * 1j * math.pi * fc) / (sol.A + side * 2j * math.pi * c)
    return sol.particular(f, y) + mu_pm * sol.gamma(y)[0]


def write_lap_json(report: dict, path) -> None:
    def conv(x):
        if isinstance(x, complex):
            return [x.real, x.imag]
        if isinstance(x, np.ndarray):
            return [conv(v) for v in x.tolist()]
        if isinstance(x, (list, tuple)):
            return [conv(v) for v in x]
        if isinstance(x, dict):
            return {k: conv(v) for k, v in x.items()}
        if isinstance(x, np.generic):
            return conv(x.item())
        return x

    with open(path, "w") as fh:
        json.dump({"schema": 1, **conv(report)}, fh, indent=2, sort_keys=True)


def write_kernel_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["c", "alpha", "A", "re_T", "im_T", "re_mu", "im_mu", "chi0"])
        for r in rows:
            w.writerow([repr(float(x)) if not isinstance(x, int) else x for x in r])


# -- tabulation on a c-grid ---------------------------------------------------------

ETA_MAX = math.atanh(wr.C_MAX)
TABLE_PANEL = 0.25
NEAR_FIELDS = ("Gp", "Gm", "dGp", "dGm", "phi1", "dphi1")


def eta_edges(eta_max: float = ETA_MAX, width: float = TABLE_PANEL) -> np.ndarray:
    """Panel edges in eta = atanh(c); the cut-off joins c = +-1/4, +-1/2 and c = 0 are edges."""
    fixed = [0.0, math.atanh(0.25), math.atanh(0.5), eta_max]
    fixed = sorted(set([-x for x in fixed] + fixed))
    out = [fixed[0]]
    for a, b in zip(fixed[:-1], fixed[1:]):
        n = max(1, int(math.ceil((b - a) / width - 1e-9)))
        out += list(np.linspace(a, b, n + 1)[1:])
    return np.array(out)


@dataclass
class KernelTable:
    """Per-c quantities on a Gauss-Legendre grid in eta = atanh(c), plus Gamma on output points.

    ``mult[k]`` is the multiplier of Gamma in the c-integral for datum k: mu for
    alpha >= 2, and the regular part chi_1 mu + (near-zero terms) for alpha = 1.
    """

    alpha: int
    eta_edges: np.ndarray
    eta: np.ndarray
    c_grid: np.ndarray
    weights: np.ndarray
    order: int
    y_out: np.ndarray
    A_vals: np.ndarray
    W1_vals: np.ndarray
    T_vals: np.ndarray
    fc_vals: np.ndarray
    mu_vals: np.ndarray
    mult: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    near: dict
    band: np.ndarray
    chi0_vals: np.ndarray
    a0: np.ndarray
    b0: np.ndarray
    data_names: list
    tilde: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def chi1_vals(self):
        return 1.0 - self.chi0_vals

    @property
    def n_panels(self) -> int:
        return self.eta_edges.size - 1

    def to_csv(self, path, datum: int = 0) -> None:
        rows = [(float(c), self.alpha, float(A), complex(T).real, complex(T).imag, complex(m).real,
                 complex(m).imag, float(x))
                for c, A, T, m, x in zip(self.c_grid, self.A_vals, self.T_vals[datum], self.mu_vals[datum],
                                         self.chi0_vals)]
        write_kernel_csv(rows, path)


def _table_node(c, alpha, y_out, funcs):
    sol = RealSolution(c, alpha)
    G, dG = sol.gamma(y_out)
    band = (y_out >= sol.a_edge) & (y_out <= sol.b_edge)
    parts = sol.near_parts(y_out[band])
    T = [sol.calT(f)[0] for f in funcs]
    fc = [_fc(f, sol.y_c) for f in funcs]
    return dict(A=sol.A, W1=sol.W1, G=G, dG=dG, band=band, parts=parts, T=T, fc=fc)


def build_kernel_table(alpha: int, data, y_out, order: int = 16, edges=None, executor=None,
                       tilde: TildeData | None = None) -> KernelTable:
    """Tabulate everything the c-integrals need.

    ``data`` is a sequence of (name, callable) pairs; ``executor`` (optional)
    maps the per-node work over worker processes.
    """
    y_out = np.asarray(y_out, dtype=float)
    edges = eta_edges() if edges is None else np.asarray(edges, dtype=float)
    from ._panels import PanelGrid

    pg = PanelGrid(edges, order)
    eta = pg.y
    c_grid = np.tanh(eta)
    names = [n for n, _ in data]
    funcs = [f for _, f in data]
    args = [(float(c), alpha, y_out, funcs) for c in c_grid]
    if executor is None:
        results = [_table_node(*a) for a in args]
    else:
        results = list(executor.map(_table_node, *zip(*args)))
    n_c, n_y, n_d = c_grid.size, y_out.size, len(funcs)
    gam = np.empty((n_y, n_c))
    dgam = np.empty((n_y, n_c))
    band = np.zeros((n_y, n_c), dtype=bool)
    near = {k: np.full((n_y, n_c), np.nan) for k in NEAR_FIELDS}
    A = np.empty(n_c)
    W1 = np.empty(n_c)
    T = np.empty((n_d, n_c), dtype=complex)
    fc = np.empty((n_d, n_c), dtype=complex)
    for j, r in enumerate(results):
        gam[:, j], dgam[:, j] = r["G"], r["dG"]
        band[:, j] = r["band"]
        for k in NEAR_FIELDS:
            near[k][r["band"], j] = r["parts"][k]
        A[j], W1[j] = r["A"], r["W1"]
        T[:, j] = r["T"]
        fc[:, j] = r["fc"]
    X = (1.0 - c_grid ** 2) ** 2
    D = A ** 2 + 4 * math.pi ** 2 * c_grid ** 2
    ch0 = chi0(c_grid)
    a0 = np.zeros(n_d, dtype=complex)
    b0 = np.array([_fc(f, 0.0) for f in funcs])
    extra = {}
    if alpha == 1:
        tilde = tilde or TildeData(funcs, 1)
        a0 = np.array(tilde.T0)
        At = np.array([tilde.a_tilde(c, a) for c, a in zip(c_grid, A)])
        Att = np.array([tilde.a_ttilde(c, a) for c, a in zip(c_grid, A)])
        mu_vals = np.empty((n_d, n_c), dtype=complex)
        mult = np.empty((n_d, n_c), dtype=complex)
        for k in range(n_d):
            Tt = np.array([tilde.t_tilde(k, c, T[k, j]) for j, c in enumerate(c_grid)])
            mu_vals[k] = [mu_from_parts(c, A[j], T[k, j], fc[k, j], 1, At[j], Att[j]) for j, c in enumerate(c_grid)]
            L1t = 2.0 * Tt - Att * fc[k] / X
            m2 = -ch0 * X * L1t / (At ** 2 + 4 * math.pi ** 2)
            m3 = a0[k] / (2 * math.pi ** 2) * ch0 * X * c_grid * Att ** 2 / (At ** 2 + 4 * math.pi ** 2)
            m1 = np.where(ch0 < 1.0, (1.0 - ch0) * mu_vals[k], 0.0)
            mult[k] = m1 + m2 + m3
        sech = 1.0 / np.cosh(y_out)
        st = sech * np.tanh(y_out)
        extra = dict(
            A_tilde=At, A_ttilde=Att,
            gamma=(gam + sech[:, None]) / c_grid, dgamma=(dgam - st[:, None]) / c_grid,
            Gp=(near["Gp"] + sech[:, None]) / c_grid, Gm=(near["Gm"] + sech[:, None]) / c_grid,
            dGp=(near["dGp"] - st[:, None]) / c_grid, dGm=(near["dGm"] - st[:, None]) / c_grid,
        )
    else:
        mu_vals = -(2 * c_grid * X * T - A * fc) / D
        mult = mu_vals.copy()
    return KernelTable(alpha=alpha, eta_edges=edges, eta=eta, c_grid=c_grid, weights=pg.w, order=order,
                       y_out=y_out, A_vals=A, W1_vals=W1, T_vals=T, fc_vals=fc, mu_vals=mu_vals, mult=mult,
                       gamma=gam, dgamma=dgam, near=near, band=band, chi0_vals=ch0, a0=a0, b0=b0,
                       data_names=names, tilde=extra,
                       meta={"eta_max": float(edges[-1]), "n_c": int(n_c), "n_y": int(n_y)})
