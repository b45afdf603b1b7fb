"""Composite Gauss-Legendre panels: quadrature, cumulative integrals, interpolation.

Every y-grid in the package is a union of panels carrying ``order``
Gauss-Legendre nodes each.  Functions that are analytic on every panel are
integrated, interpolated and differentiated to near machine precision, and
the critical point is always placed on a panel edge so that no node ever
sits on a singularity.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["PanelGrid", "reference_rule", "geometric_edges", "lagrange_matrix"]


@lru_cache(maxsize=16)
def reference_rule(order: int):
    """Nodes, weights, barycentric weights, cumulative and derivative matrices on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    bary /= np.max(np.abs(bary))
    # monomial-free construction of the integration matrix through Legendre series
    vander = np.polynomial.legendre.legvander(x, order - 1)
    coeffs = np.linalg.inv(vander)  # values -> Legendre coefficients
    cum = np.zeros((order, order))
    for k in range(order):
        c = np.zeros(order)
        c[k] = 1.0
        ic = np.polynomial.legendre.legint(c, lbnd=-1.0)
        cum[:, k] = np.polynomial.legendre.legval(x, ic)
    S = cum @ coeffs
    dmat = np.zeros((order, order))
    for k in range(order):
        c = np.zeros(order)
        c[k] = 1.0
        dmat[:, k] = np.polynomial.legendre.legval(x, np.polynomial.legendre.legder(c))
    D = dmat @ coeffs
    for arr in (x, w, bary, S, D):
        arr.setflags(write=False)
    return x, w, bary, S, D


def lagrange_matrix(xq: np.ndarray, order: int) -> np.ndarray:
    """Values of the reference Lagrange basis at local coordinates ``xq`` (shape (m, order))."""
    x, _, bary, _, _ = reference_rule(order)
    xq = np.asarray(xq, dtype=float)
    diff = xq[..., None] - x
    exact = diff == 0.0
    diff = np.where(exact, 1.0, diff)
    terms = bary / diff
    mat = terms / np.sum(terms, axis=-1, keepdims=True)
    hit = np.any(exact, axis=-1)
    if np.any(hit):
        mat[hit] = exact[hit].astype(float)
    return mat


def geometric_edges(anchor: float, first: float, stop: float, direction: int) -> list[float]:
    """Edges ``anchor + direction*first*2**k`` strictly before ``anchor + direction*stop``."""
    out = []
    d = first
    while d < stop * (1.0 - 1e-12):
        out.append(anchor + direction * d)
        d *= 2.0
    return out


class PanelGrid:
    """A sorted set of panels with ``order`` Gauss-Legendre nodes per panel.

    Parameters
    ----------
    edges : array_like
        Strictly increasing panel edges.
    order : int
        Nodes per panel.
    """

    def __init__(self, edges, order: int = 16):
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("panel edges must be strictly increasing with at least two entries")
        self.edges = edges
        self.order = int(order)
        x, w, _, S, D = reference_rule(self.order)
        self.half = 0.5 * np.diff(edges)
        self.mid = 0.5 * (edges[1:] + edges[:-1])
        self.nodes2d = self.mid[:, None] + self.half[:, None] * x[None, :]
        self.weights2d = self.half[:, None] * w[None, :]
        self.y = self.nodes2d.ravel()
        self.w = self.weights2d.ravel()
        self._S = S
        self._D = D
        self._wref = w

    @property
    def n_panels(self) -> int:
        return self.edges.size - 1

    @property
    def size(self) -> int:
        return self.y.size

    def edge_index(self, value: float) -> int:
        """Index of the edge equal (to rounding) to ``value``."""
        k = int(np.argmin(np.abs(self.edges - value)))
        if abs(self.edges[k] - value) > 1e-12 * max(1.0, abs(value)):
            raise ValueError(f"{value} is not a panel edge")
        return k

    def _panels(self, g):
        g = np.asarray(g)
        return g.reshape(self.n_panels, self.order, *g.shape[1:])

    def integrate(self, g) -> complex:
        return np.tensordot(self.w, np.asarray(g), axes=(0, 0))

    def panel_integrals(self, g):
        gp = self._panels(g)
        return np.einsum("pk,pk...->p...", self.weights2d, gp)

    def cumulative(self, g, anchor_edge: int):
        """``int_{edges[anchor_edge]}^{y} g`` at every node (signed)."""
        gp = self._panels(g)
        half = self.half.reshape(-1, 1, *([1] * (gp.ndim - 2)))
        left_part = half * np.einsum("jk,pk...->pj...", self._S, gp)
        totals = self.panel_integrals(g)
        right_part = totals[:, None] - left_part
        out = np.empty_like(left_part)
        m = anchor_edge
        if m < self.n_panels:
            acc = np.cumsum(totals[m:], axis=0)
            before = np.concatenate([np.zeros_like(acc[:1]), acc[:-1]], axis=0)
            out[m:] = before[:, None] + left_part[m:]
        if m > 0:
            acc = np.cumsum(totals[:m][::-1], axis=0)[::-1]
            after = np.concatenate([acc[1:], np.zeros_like(acc[:1])], axis=0)
            out[:m] = -(after[:, None] + right_part[:m])
        return out.reshape(np.asarray(g).shape)

    def derivative(self, g):
        gp = self._panels(g)
        half = self.half.reshape(-1, 1, *([1] * (gp.ndim - 2)))
        return (np.einsum("jk,pk...->pj...", self._D, gp) / half).reshape(np.asarray(g).shape)

    def locate(self, yq) -> tuple[np.ndarray, np.ndarray]:
        """Panel index and local coordinate of query points (clipped to the grid)."""
        yq = np.asarray(yq, dtype=float)
        if np.any(yq < self.edges[0] - 1e-12) or np.any(yq > self.edges[-1] + 1e-12):
            raise ValueError("interpolation point outside the grid span")
        k = np.clip(np.searchsorted(self.edges, yq, side="right") - 1, 0, self.n_panels - 1)
        xloc = (yq - self.mid[k]) / self.half[k]
        return k, xloc

    def interpolate(self, g, yq, panel=None):
        """Evaluate the panel-wise polynomial interpolant of ``g`` at ``yq``.

        ``panel`` forces the panel used for each point, which lets callers
        evaluate a one-sided branch exactly at a shared edge.
        """
        yq = np.asarray(yq, dtype=float)
        flat = yq.ravel()
        if panel is None:
            k, xloc = self.locate(flat)
        else:
            k = np.broadcast_to(np.asarray(panel), flat.shape).astype(int)
            xloc = (flat - self.mid[k]) / self.half[k]
        basis = lagrange_matrix(xloc, self.order)
        gp = self._panels(g)
        vals = np.einsum("mk,mk...->m...", basis, gp[k])
        return vals.reshape(yq.shape + gp.shape[2:])
