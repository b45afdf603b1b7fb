"""The hyperbolic-tangent shear flow u(y) = tanh y and its spectral domains."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FlowSample",
    "SpectralPoint",
    "eval_flow",
    "u",
    "du",
    "d2u",
    "d3u",
    "critical_point",
    "in_domain_O",
    "u_minus_c",
    "spectral_point",
    "DEFAULT_EPS0",
    "DEFAULT_CO",
]

DEFAULT_EPS0 = 0.25
DEFAULT_CO = 8.0


@dataclass(frozen=True)
class FlowSample:
    y: float
    u: float
    du: float
    d2u: float
    d3u: float


def u(y):
    return np.tanh(y)


def du(y):
    # 1 - tanh^2 loses digits for large |y|; sech^2 does not
    return 1.0 / np.cosh(y) ** 2


def d2u(y):
    return -2.0 * np.tanh(y) * du(y)


def d3u(y):
    t = np.tanh(y)
    p = du(y)
    return -2.0 * (p * p + t * (-2.0 * t * p))


def eval_flow(y: float) -> FlowSample:
    """Values (u, u', u'', u''') at a finite real ``y``."""
    y = float(y)
    if not math.isfinite(y):
        raise ValueError("eval_flow needs a finite position")
    return FlowSample(y, float(u(y)), float(du(y)), float(d2u(y)), float(d3u(y)))


def critical_point(c: float) -> float:
    """y_c with tanh(y_c) = c, for real |c| < 1."""
    c = float(c)
    if not math.isfinite(c) or abs(c) >= 1.0:
        raise ValueError(f"critical point needs |c| < 1, got {c}")
    val = 0.5 * math.log1p(2.0 * c / (1.0 - c))
    if not math.isfinite(val):
        raise ValueError(f"critical point overflow for c = {c}")
    return val


def in_domain_O(c: complex, alpha: int = 1, eps0: float = DEFAULT_EPS0, C_o: float = DEFAULT_CO,
                inclusive: bool = False) -> bool:
    """Membership in the thin complex neighbourhood of (-1, 1).

    The strict domain requires 0 < |Im c| < min((1 - Re(c)^2)/C_o, eps0).
    With ``inclusive`` the real segment (-1, 1) is admitted too.
    ``alpha`` is accepted for signature symmetry; the domain does not depend on it.
    """
    c = complex(c)
    cr, ci = c.real, c.imag
    if not (math.isfinite(cr) and math.isfinite(ci)) or abs(cr) >= 1.0:
        return False
    if ci == 0.0:
        return bool(inclusive)
    return abs(ci) < min((1.0 - cr * cr) / C_o, eps0)


@dataclass(frozen=True)
class SpectralPoint:
    c: complex
    alpha: int
    y_c: float
    eps0: float = DEFAULT_EPS0
    C_o: float = DEFAULT_CO

    @property
    def is_real(self) -> bool:
        return self.c.imag == 0.0

    @property
    def in_domain(self) -> bool:
        return in_domain_O(self.c, self.alpha, self.eps0, self.C_o, inclusive=False)

    @property
    def in_closure(self) -> bool:
        return in_domain_O(self.c, self.alpha, self.eps0, self.C_o, inclusive=True)


def spectral_point(c: complex, alpha: int, eps0: float = DEFAULT_EPS0, C_o: float = DEFAULT_CO,
                   check: bool = True) -> SpectralPoint:
    """Build a validated :class:`SpectralPoint` (real c or c inside the domain)."""
    c = complex(c)
    if int(alpha) != alpha or alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if check and not in_domain_O(c, alpha, eps0, C_o, inclusive=True):
        raise ValueError(f"c = {c} lies outside the closed spectral domain")
    return SpectralPoint(c, int(alpha), critical_point(c.real), eps0, C_o)


def u_minus_c(y, c: complex):
    """u(y) - c evaluated without cancellation near the critical point."""
    c = complex(c)
    yc = critical_point(c.real)
    y = np.asarray(y, dtype=float)
    real = np.sinh(y - yc) / (np.cosh(y) * math.cosh(yc))
    if c.imag == 0.0:
        return real
    return real - 1j * c.imag
