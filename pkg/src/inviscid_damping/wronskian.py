"""Wronskian W, its regular part W_1, the continuous extension A and the quotients A/c, A/c^2.

For complex c:  W = int phi^{-2} dy = (1 - c^2)^{-2} (W_1 + 2c Log((c - 1)/(c + 1))).
For real c:     A = W_1 + 2c ln((1 - c)/(1 + c)),  W^{+-} = (1 - c^2)^{-2} (A +- 2 pi c i).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev

from . import flow_profile as fp
from .rayleigh_homogeneous import Phi1Field, solve_phi1

__all__ = [
    "WronskianValue",
    "C_SWITCH",
    "FD_STEP",
    "C_MAX",
    "phi1_inv2_minus1",
    "w1",
    "w1_from_field",
    "a_from_field_split",
    "wronskian_direct",
    "wronskian_via_W1",
    "wronskian_limit",
    "log_ratio",
    "a_of",
    "dA",
    "d2A",
    "a_tilde",
    "a_ttilde",
    "SmallCInterpolant",
    "small_c_A",
    "fd5",
    "fd5_second",
    "derivative_average",
    "second_derivative_average",
    "richardson",
    "table_rows",
    "write_table_csv",
    "write_limit_json",
]

C_SWITCH = 0.05
FD_STEP = 1e-2
C_MAX = 0.999
SMALL_C_RADIUS = 0.075
SMALL_C_DEGREE = 23


@dataclass(frozen=True)
class WronskianValue:
    point: fp.SpectralPoint
    W: complex
    W1: complex
    A: complex
    method: str


def _check_real(c) -> float:
    c = complex(c)
    if c.imag != 0.0:
        raise ValueError("real spectral parameter expected")
    c = c.real
    if abs(c) > C_MAX:
        raise ValueError(f"|c| = {abs(c)} exceeds c_max = {C_MAX}")
    return c


def phi1_inv2_minus1(fld: Phi1Field):
    """phi_1^{-2} - 1 without cancellation: -(phi_1 - 1)(phi_1 + 1)/phi_1^2."""
    p = fld.phi1
    return -fld.phi1m1 * (p + 1.0) / (p * p)


def w1_from_field(fld: Phi1Field) -> complex:
    y = fld.y_grid
    c = fld.point.c
    u = fp.u(y)
    v = fp.u_minus_c(y, c)
    q = phi1_inv2_minus1(fld)
    integrand = (u + c) ** 2 / fld.phi1 ** 2 + (1.0 + u * u - 2.0 * c * c) * fp.du(y) * q / (v * v)
    val = complex(fld.grid.integrate(integrand))
    return val.real if fld.point.is_real else val


def a_from_field_split(fld: Phi1Field) -> float:
    """A through the A_1 + A_2 grouping with the principal value done in closed form.

    A_1 = int (u+c)^2/phi_1^2 + 2c int u'(phi_1^{-2} - 1)/(u - c) + 2c p.v. int u'/(u - c),
    the last integral being ln((1 - c)/(1 + c)); A_2 carries the (1 - c^2 + (u - c)^2) weight.
    """
    y = fld.y_grid
    c = fld.point.c.real
    u = fp.u(y)
    up = fp.du(y)
    v = fp.u_minus_c(y, c)
    q = phi1_inv2_minus1(fld)
    a1 = fld.grid.integrate((u + c) ** 2 / fld.phi1 ** 2 + 2.0 * c * up * q / v)
    a1 += 2.0 * c * math.log((1.0 - c) / (1.0 + c))
    a2 = fld.grid.integrate((1.0 - c * c + v * v) * up * q / (v * v))
    return float(a1 + a2)


def w1(point: fp.SpectralPoint, **solve_kw) -> complex:
    return w1_from_field(solve_phi1(point, **solve_kw))


def log_ratio(c: complex) -> complex:
    """Principal Log((c - 1)/(c + 1)); undefined on the cut [-1, 1]."""
    c = complex(c)
    if c.imag == 0.0 and abs(c.real) <= 1.0:
        raise ValueError("Log((c-1)/(c+1)) is cut along [-1, 1]; pass a side to wronskian_limit")
    return complex(np.log((c - 1.0) / (c + 1.0)))


def wronskian_direct(point: fp.SpectralPoint, fld: Phi1Field | None = None, **solve_kw) -> complex:
    """W = int phi^{-2} over the truncated grid (complex c only)."""
    if point.is_real:
        raise ValueError("direct Wronskian needs Im c != 0; use wronskian_limit on the real axis")
    fld = fld or solve_phi1(point, **solve_kw)
    v = fp.u_minus_c(fld.y_grid, point.c)
    return complex(fld.grid.integrate(1.0 / (v * fld.phi1) ** 2))


def wronskian_via_W1(point: fp.SpectralPoint, fld: Phi1Field | None = None, **solve_kw) -> complex:
    if point.is_real:
        raise ValueError("Log((c-1)/(c+1)) is cut on the real segment; use wronskian_limit")
    fld = fld or solve_phi1(point, **solve_kw)
    c = point.c
    return (w1_from_field(fld) + 2.0 * c * log_ratio(c)) / (1.0 - c * c) ** 2


def wronskian_limit(c: float, alpha: int, side: int) -> complex:
    """One-sided boundary value W^{+-}(c) = (1 - c^2)^{-2}(A +- 2 pi c i)."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    c = _check_real(c)
    return (a_of(c, alpha) + side * 2j * math.pi * c) / (1.0 - c * c) ** 2


def a_of(c: float, alpha: int, method: str = "split", **solve_kw) -> float:
    """A(c, alpha) for real |c| <= c_max.

    ``method='split'`` uses the A_1 + A_2 grouping, ``method='w1'`` uses W_1 + 2c ln((1-c)/(1+c)).
    """
    c = _check_real(c)
    fld = solve_phi1(fp.spectral_point(c, alpha), **solve_kw)
    if method == "split":
        return a_from_field_split(fld)
    if method == "w1":
        return float(w1_from_field(fld) + 2.0 * c * math.log((1.0 - c) / (1.0 + c)))
    raise ValueError(f"unknown method {method!r}")


def fd5(g, c: float, h: float = FD_STEP):
    return (-g(c + 2 * h) + 8 * g(c + h) - 8 * g(c - h) + g(c - 2 * h)) / (12 * h)


def fd5_second(g, c: float, h: float = FD_STEP):
    return (-g(c + 2 * h) + 16 * g(c + h) - 30 * g(c) + 16 * g(c - h) - g(c - 2 * h)) / (12 * h * h)


def dA(c: float, alpha: int, h: float = FD_STEP) -> float:
    """5-point centred difference of A."""
    return fd5(lambda x: a_of(x, alpha), c, h)


def d2A(c: float, alpha: int, h: float = FD_STEP) -> float:
    return fd5_second(lambda x: a_of(x, alpha), c, h)


_S_NODES, _S_WEIGHTS = np.polynomial.legendre.leggauss(16)
_S_NODES = 0.5 * (_S_NODES + 1.0)
_S_WEIGHTS = 0.5 * _S_WEIGHTS


def derivative_average(g, c: float, h: float = FD_STEP):
    """int_0^1 g'(s c) ds with g' from the 5-point stencil."""
    return sum(w * fd5(g, s * c, h) for s, w in zip(_S_NODES, _S_WEIGHTS))


def second_derivative_average(g, c: float, h: float = FD_STEP):
    """int_0^1 (1 - r) g''(r c) dr, which equals int_0^1 int_0^1 s g''(s t c) ds dt."""
    return sum(w * (1.0 - r) * fd5_second(g, r * c, h) for r, w in zip(_S_NODES, _S_WEIGHTS))


class SmallCInterpolant:
    """Chebyshev interpolant of c -> g(c) on |c| <= radius.

    Finite differences with step 1e-2 around |c| < c_switch need values on a
    slightly wider interval; every such value comes from this interpolant so
    that a handful of solves serves all stencils.
    """

    def __init__(self, func, radius: float = SMALL_C_RADIUS, degree: int = SMALL_C_DEGREE):
        self.radius = radius
        xs = Chebyshev.basis(degree + 1, domain=[-radius, radius]).roots()
        vals = np.array([func(float(x)) for x in xs])
        self.nodes = xs
        self.values = vals
        self.re = Chebyshev.fit(xs, vals.real, degree, domain=[-radius, radius])
        self.im = Chebyshev.fit(xs, vals.imag, degree, domain=[-radius, radius]) if np.iscomplexobj(vals) else None

    def __call__(self, c):
        if np.any(np.abs(np.asarray(c)) > self.radius * (1 + 1e-12)):
            raise ValueError("small-c interpolant evaluated outside its interval")
        out = self.re(c)
        return out + 1j * self.im(c) if self.im is not None else out


@lru_cache(maxsize=16)
def small_c_A(alpha: int) -> SmallCInterpolant:
    return SmallCInterpolant(lambda c: a_of(c, alpha))


def a_tilde(c: float, alpha: int = 1, c_switch: float = C_SWITCH) -> float:
    """A(c)/c, through int_0^1 dA(sc) ds when |c| < c_switch (and 0 at c = 0)."""
    c = _check_real(c)
    if c == 0.0:
        return 0.0 if alpha == 1 else math.copysign(math.inf, 1.0)
    if abs(c) >= c_switch:
        return a_of(c, alpha) / c
    return float(derivative_average(small_c_A(alpha), c))


def a_ttilde(c: float, alpha: int = 1, c_switch: float = C_SWITCH) -> float:
    """A(c)/c^2, through the second-derivative average when |c| < c_switch."""
    c = _check_real(c)
    if abs(c) >= c_switch:
        return a_of(c, alpha) / (c * c)
    return float(second_derivative_average(small_c_A(alpha), c))


def richardson(values, steps, order: int = 1) -> float:
    """Richardson extrapolation to step 0 assuming error ~ step**order (polynomial fit)."""
    values = np.asarray(values)
    steps = np.asarray(steps, dtype=float)
    V = np.vander(steps ** order, len(steps), increasing=True)
    coef = np.linalg.solve(V, values.astype(complex))
    return coef[0]


def table_rows(c_grid, alpha: int):
    """Rows (c, alpha, W1, A, A_tilde, A_ttilde) on a real c-grid."""
    rows = []
    for c in c_grid:
        c = float(c)
        fld = solve_phi1(fp.spectral_point(c, alpha))
        W1 = float(w1_from_field(fld))
        A = W1 + 2.0 * c * math.log((1.0 - c) / (1.0 + c))
        if alpha == 1:
            At = a_tilde(c, alpha)
            Att = a_ttilde(c, alpha)
        else:
            At = A / c if c != 0 else math.nan
            Att = A / (c * c) if c != 0 else math.nan
        rows.append((c, alpha, W1, A, At, Att))
    return rows


def write_table_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["c", "alpha", "W1", "A", "A_tilde", "A_ttilde"])
        for r in rows:
            wr.writerow([repr(float(r[0])), int(r[1])] + [repr(float(x)) for x in r[2:]])


def write_limit_json(eps, ratios, extrapolated, path) -> None:
    doc = {
        "schema": 1,
        "quantity": "W(i eps, 1)/(i eps)",
        "eps": [float(e) for e in eps],
        "re": [float(np.real(r)) for r in ratios],
        "im": [float(np.imag(r)) for r in ratios],
        "extrapolated": [float(np.real(extrapolated)), float(np.imag(extrapolated))],
        "target": [0.0, 2 * math.pi],
        "error": float(abs(extrapolated - 2j * math.pi) / (2 * math.pi)),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
