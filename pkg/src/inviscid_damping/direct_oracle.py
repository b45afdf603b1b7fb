"""Brute-force time integration of d_t w + i alpha (u w + u'' psi) = 0, psi = (alpha^2 - d_y^2)^{-1} w.

The elliptic inverse is the exponential-kernel convolution
psi(y) = (2 alpha)^{-1} int e^{-alpha |y - z|} w(z) dz, evaluated on a uniform grid
by two first-order recursions (one per direction) and endpoint-corrected
trapezoid weights.  Time stepping is classical fourth-order Runge-Kutta.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from . import flow_profile as fp

__all__ = [
    "VorticityState",
    "Trajectory",
    "uniform_grid",
    "greens_inverse",
    "rhs",
    "evolve",
    "conserved_ab",
    "BlowUpError",
    "boundary_mass",
]


class BlowUpError(RuntimeError):
    """Norm growth beyond the configured factor (the flow is spectrally stable)."""


def uniform_grid(L: float = 20.0, h: float = 0.01) -> np.ndarray:
    n = int(round(L / h))
    if abs(n * h - L) > 1e-9 * L:
        raise ValueError("L must be an integer multiple of h")
    return np.linspace(-L, L, 2 * n + 1)


@dataclass
class VorticityState:
    alpha: int
    t: float
    y_grid: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)


def greens_inverse(omega, alpha: int, y_grid, boundary_tol: float | None = None):
    """psi = (2 alpha)^{-1} int e^{-alpha|y - z|} omega(z) dz on a uniform grid, O(N)."""
    y = np.asarray(y_grid, dtype=float)
    w = np.asarray(omega)
    h = y[1] - y[0]
    if boundary_tol is not None:
        scale = np.max(np.abs(w)) or 1.0
        if max(abs(w[0]), abs(w[-1])) > boundary_tol * scale:
            raise ValueError("vorticity is not negligible at the truncation boundary")
    q = math.exp(-alpha * h)
    left = lfilter([1.0], [1.0, -q], w)
    right = lfilter([1.0], [1.0, -q], w[::-1])[::-1]
    trap = h * (left + right - w)
    d2 = np.zeros_like(w)
    d2[1:-1] = (w[2:] - 2 * w[1:-1] + w[:-2]) / (h * h)
    corr = -(h * h / 6.0) * alpha * w + (h ** 4 / 360.0) * (alpha ** 3 * w + 3 * alpha * d2)
    return (trap + corr) / (2 * alpha)


def rhs(omega, alpha: int, y_grid, _cache={}):
    """d_t omega = -i alpha (u omega + u'' psi)."""
    y = np.asarray(y_grid, dtype=float)
    key = (id(y_grid), y.size, float(y[0]), float(y[-1]))
    coeff = _cache.get(key)
    if coeff is None:
        coeff = (fp.u(y), fp.d2u(y))
        _cache.clear()
        _cache[key] = coeff
    u, upp = coeff
    psi = greens_inverse(omega, alpha, y)
    return -1j * alpha * (u * omega + upp * psi)


@dataclass
class Trajectory:
    alpha: int
    y_grid: np.ndarray = field(repr=False)
    states: list = field(default_factory=list)

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    def to_csv(self, path) -> None:
        h = self.y_grid[1] - self.y_grid[0]
        ab = conserved_ab(self) if self.alpha == 1 else [(np.nan, np.nan)] * len(self.states)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "L2_omega", "L2_psi", "H1_psi", "re_a", "im_a", "re_b", "im_b"])
            for s, (a, b) in zip(self.states, ab):
                l2w = math.sqrt(h * np.sum(np.abs(s.omega) ** 2))
                l2p = math.sqrt(h * np.sum(np.abs(s.psi) ** 2))
                dp = np.gradient(s.psi, h)
                h1 = math.sqrt(l2p ** 2 + h * np.sum(np.abs(dp) ** 2))
                wr.writerow([repr(float(x)) for x in (s.t, l2w, l2p, h1, np.real(a), np.imag(a),
                                                      np.real(b), np.imag(b))])


BOUNDARY_TOL = 1e-6


def boundary_mass(omega) -> float:
    """max(|omega| at the two ends)/max|omega|, the truncation diagnostic."""
    w = np.abs(np.asarray(omega))
    top = float(np.max(w)) if w.size else 0.0
    return 0.0 if top == 0.0 else float(max(w[0], w[-1]) / top)


def evolve(omega0, alpha: int, t_end: float, dt: float | None = None, out_times=None, y_grid=None,
           blowup: float = 10.0) -> Trajectory:
    """RK4 from t = 0 to t_end, storing states at ``out_times`` (default: only t_end)."""
    y = uniform_grid() if y_grid is None else np.asarray(y_grid, dtype=float)
    w = np.asarray(omega0(y) if callable(omega0) else omega0, dtype=complex).copy()
    if boundary_mass(w) > BOUNDARY_TOL:
        raise ValueError(f"initial vorticity is not negligible at y = +-{y[-1]:g} "
                         f"(boundary mass {boundary_mass(w):.2e}); enlarge L")
    if dt is None:
        dt = 0.5 / alpha
    if dt <= 0 or t_end < 0:
        raise ValueError("need dt > 0 and t_end >= 0")
    outs = sorted(set([float(t_end)] if out_times is None else [float(t) for t in out_times]))
    if outs and (outs[0] < 0 or outs[-1] > t_end + 1e-12):
        raise ValueError("output times must lie in [0, t_end]")
    traj = Trajectory(alpha, y)
    n0 = float(np.linalg.norm(w)) or 1.0
    t = 0.0
    k = 0
    f = lambda z: rhs(z, alpha, y)
    while k < len(outs) and outs[k] <= 0.0:
        traj.states.append(VorticityState(alpha, 0.0, y, w.copy(), greens_inverse(w, alpha, y)))
        k += 1
    while k < len(outs):
        target = outs[k]
        nsteps = max(1, int(math.ceil((target - t) / dt - 1e-9)))
        step = (target - t) / nsteps
        for _ in range(nsteps):
            k1 = f(w)
            k2 = f(w + 0.5 * step * k1)
            k3 = f(w + 0.5 * step * k2)
            k4 = f(w + step * k3)
            w = w + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = target
        nrm = float(np.linalg.norm(w))
        if not math.isfinite(nrm) or nrm > blowup * n0:
            raise BlowUpError(f"vorticity norm grew by {nrm / n0:.3g} by t = {t}")
        traj.states.append(VorticityState(alpha, t, y, w.copy(), greens_inverse(w, alpha, y)))
        k += 1
    return traj


def _fd6(w, i, h):
    c = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
    return np.dot(c, w[i - 3:i + 4]) / h


def conserved_ab(traj: Trajectory):
    """[(a(t), b(t))]: a = p.v. int omega/sinh y, b = omega(t, 0)."""
    if traj.alpha != 1:
        raise ValueError("a(t), b(t) are conserved for alpha = 1")
    y = traj.y_grid
    h = y[1] - y[0]
    mid = y.size // 2
    if abs(y[mid]) > 1e-12 or not np.allclose(y, -y[::-1]):
        raise ValueError("conserved_ab needs a symmetric grid through 0")
    out = []
    sh = np.sinh(y)
    sh[mid] = 1.0
    for s in traj.states:
        w = s.omega
        g = (w - w[::-1]) / sh
        g[mid] = 2.0 * _fd6(w, mid, h)
        a = 0.5 * h * (np.sum(g) - 0.5 * (g[0] + g[-1]))
        out.append((a, w[mid]))
    return out
