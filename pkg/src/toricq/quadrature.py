"""Deterministic adaptive quadrature over polytopes and their slices.

Polytopes are fan-triangulated from the barycenter; each simplex carries an
open (interior-node) Gauss rule of degree 5, so integrands that are only
continuous up to the boundary are never sampled on it.  Refinement bisects
the cell with the largest two-level error estimate; accumulation is done in
fixed cell-insertion order with compensated summation, which makes repeated
runs bit-identical.
"""

from __future__ import annotations

import heapq
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .polytope import PolytopeError, axis_slice

DEFAULT_CELL_BUDGET = 200_000
_BUDGET_ENV = "TORICQ_CELL_BUDGET"


def cell_budget():
    value = os.environ.get(_BUDGET_ENV)
    return int(value) if value else DEFAULT_CELL_BUDGET


# ---------------------------------------------------------------------------
# degree-5 rules with strictly interior nodes, in barycentric coordinates


def _rule_1d():
    t, w = np.polynomial.legendre.leggauss(3)
    t = 0.5 * (t + 1.0)
    bary = np.stack([1.0 - t, t], axis=1)
    return bary, 0.5 * w  # weights normalized to sum 1


def _rule_triangle():
    s15 = math.sqrt(15.0)
    a = (6.0 - s15) / 21.0
    b = (6.0 + s15) / 21.0
    wa = (155.0 - s15) / 1200.0
    wb = (155.0 + s15) / 1200.0
    pts = [(1 / 3, 1 / 3, 1 / 3, 9.0 / 40.0)]
    for u, w in ((a, wa), (b, wb)):
        pts += [(u, u, 1 - 2 * u, w), (u, 1 - 2 * u, u, w), (1 - 2 * u, u, u, w)]
    arr = np.array(pts)
    return arr[:, :3], arr[:, 3]


def _rule_grundmann_moller(dim, s=2):
    """Grundmann-Moller rule of degree 2s+1; all nodes strictly interior."""
    import itertools

    d = dim
    pts = []
    wts = []
    for i in range(s + 1):
        denom = d + 1 + 2 * (s - i)
        w = ((-1) ** i / 2 ** (2 * s)
             * denom ** (2 * s + 1)
             / (math.factorial(i) * math.factorial(d + 2 * s + 1 - i)))
        # compositions of s - i into d + 1 nonnegative parts
        for comp in itertools.combinations_with_replacement(range(d + 1), s - i):
            beta = [0] * (d + 1)
            for j in comp:
                beta[j] += 1
            pts.append([(2 * bj + 1) / denom for bj in beta])
            wts.append(w)
    bary = np.array(pts)
    # raw weights integrate over the unit simplex (volume 1/d!); the cell
    # loop multiplies by the simplex volume, so normalize to sum 1
    w = np.array(wts) / math.fsum(wts)
    return bary, w


_RULES = {1: _rule_1d(), 2: _rule_triangle(),
          3: _rule_grundmann_moller(3, s=2)}

# embedded degree-3 companions used only for error estimation; comparing
# two different-degree rules on the same cell catches boundary-singular
# cells whose two-level difference is accidentally tiny
_LOW_RULES = {d: _rule_grundmann_moller(d, s=1) for d in (1, 2, 3)}


def _simplex_volume(verts):
    verts = np.asarray(verts, dtype=float)
    k = verts.shape[0] - 1
    if k == 0:
        return 0.0
    M = verts[1:] - verts[0]
    return abs(np.linalg.det(M)) / math.factorial(k)


def _exact_simplex_volume(verts):
    from .polytope import _det

    k = len(verts) - 1
    rows = [tuple(a - b for a, b in zip(v, verts[0])) for v in verts[1:]]
    return abs(_det(rows)) / Fraction(math.factorial(k))


# ---------------------------------------------------------------------------
# triangulation


@dataclass
class IntegrationRegion:
    """Simplicial cover of a polytope or slice with the quadrature rule."""

    dim: int
    simplices: list                       # list of exact vertex tuples
    exact_volume: Fraction
    rule_order: int = 5

    @property
    def float_simplices(self):
        return [np.array([[float(c) for c in v] for v in s])
                for s in self.simplices]


def _order_polygon(verts_exact):
    """Order coplanar 3D points cyclically around their centroid."""
    V = np.array([[float(c) for c in v] for v in verts_exact])
    centroid = V.mean(axis=0)
    # basis of the facet plane from the two largest spread directions
    U, _, _ = np.linalg.svd((V - centroid).T, full_matrices=False)
    u, w = U[:, 0], U[:, 1]
    ang = np.arctan2((V - centroid) @ w, (V - centroid) @ u)
    order = np.argsort(ang, kind="stable")
    return [verts_exact[i] for i in order]


def triangulate(poly) -> IntegrationRegion:
    """Barycenter-fan triangulation; deterministic in the input facet order."""
    if getattr(poly, "empty", False) or not poly.vertices:
        raise PolytopeError("cannot triangulate an empty region")
    n = poly.dim
    verts = poly.vertices
    if n == 1:
        lo = min(verts)
        hi = max(verts)
        if lo == hi:
            raise PolytopeError("degenerate segment")
        simplices = [(lo, hi)]
    elif n in (2, 3):
        bary = poly.barycenter
        simplices = []
        for r in range(len(poly.facets)):
            on_facet = [v for v in verts if poly.facet_value(r, v) == 0]
            if len(on_facet) < n:
                continue
            if n == 2:
                face_simplices = [tuple(sorted(on_facet))]
            else:
                ring = _order_polygon(sorted(on_facet))
                face_simplices = [(ring[0], ring[i], ring[i + 1])
                                  for i in range(1, len(ring) - 1)]
            for fs in face_simplices:
                simp = fs + (bary,)
                if _exact_simplex_volume(simp) > 0:
                    simplices.append(simp)
    else:
        raise PolytopeError(f"triangulation not implemented for dim {n}")
    total = sum((_exact_simplex_volume(s) for s in simplices), Fraction(0))
    return IntegrationRegion(dim=n, simplices=simplices, exact_volume=total)


# ---------------------------------------------------------------------------
# adaptive integration


@dataclass
class IntegralResult:
    value: float
    error_estimate: float
    cells_used: int
    converged: bool


@dataclass
class _Cell:
    verts: np.ndarray
    fine: float
    err: float
    idx: int


def _apply_rule(f, verts, bary, weights):
    nodes = bary @ verts
    vol = _simplex_volume(verts)
    if vol == 0.0:
        return 0.0
    vals = np.asarray(f(nodes), dtype=float)
    return vol * float(weights @ vals)


def _bisect(verts):
    """Split along the longest edge; deterministic tie-breaking."""
    k = verts.shape[0]
    best = None
    for i in range(k):
        for j in range(i + 1, k):
            d = float(np.linalg.norm(verts[i] - verts[j]))
            if best is None or d > best[0] + 1e-15:
                best = (d, i, j)
    _, i, j = best
    mid = 0.5 * (verts[i] + verts[j])
    c1 = verts.copy()
    c1[i] = mid
    c2 = verts.copy()
    c2[j] = mid
    return c1, c2


def integrate(f, region: IntegrationRegion, tol: float,
              budget: int | None = None) -> IntegralResult:
    """Adaptively integrate the vectorized evaluator f over the region.

    f maps an (N, dim) array of strictly interior points to (N,) values.
    """
    if budget is None:
        budget = cell_budget()
    bary, weights = _RULES[region.dim]
    bary_low, weights_low = _LOW_RULES[region.dim]

    def make_cell(verts, idx):
        coarse = _apply_rule(f, verts, bary, weights)
        low = _apply_rule(f, verts, bary_low, weights_low)
        halves = _bisect(verts)
        fine = sum(_apply_rule(f, h, bary, weights) for h in halves)
        err = abs(coarse - fine) + 0.05 * abs(coarse - low)
        return _Cell(verts=verts, fine=fine, err=err, idx=idx)

    cells = {}
    heap = []
    counter = 0
    for verts in region.float_simplices:
        cell = make_cell(verts, counter)
        cells[counter] = cell
        heapq.heappush(heap, (-cell.err, counter))
        counter += 1

    err = math.fsum(c.err for c in cells.values())
    while err > tol and len(cells) < budget and heap:
        neg_err, idx = heapq.heappop(heap)
        cell = cells.get(idx)
        if cell is None:
            continue
        del cells[idx]
        err -= cell.err
        for half in _bisect(cell.verts):
            child = make_cell(half, counter)
            cells[counter] = child
            heapq.heappush(heap, (-child.err, counter))
            counter += 1
            err += child.err

    err = math.fsum(c.err for c in cells.values())
    value = math.fsum(cells[i].fine for i in sorted(cells))
    return IntegralResult(value=value, error_estimate=err,
                          cells_used=len(cells), converged=err <= tol)


def integrate_slice(f, poly, p: int, c, tol: float,
                    budget: int | None = None) -> IntegralResult:
    """Integrate f over the axis slice x_{1..p} = c with Lebesgue measure on
    the trailing coordinates.  f receives the (N, n-p) trailing coordinates;
    for p = n the slice is a point and f is evaluated once."""
    n = poly.dim
    if p == n:
        val = float(np.asarray(f(np.zeros((1, 0))))[0])
        return IntegralResult(value=val, error_estimate=0.0, cells_used=0,
                              converged=True)
    sl = axis_slice(poly, p, c)
    if sl.is_empty:
        return IntegralResult(value=0.0, error_estimate=0.0, cells_used=0,
                              converged=True)
    region = triangulate(sl)
    return integrate(f, region, tol, budget=budget)
