"""Symplectic reduction of the torus action on the leading coordinates.

Fixing the first p moment coordinates to a level c produces a slice
polytope in the trailing coordinates.  The reduced potential is the plain
restriction of the ambient potential, including facets whose trailing
normal vanishes (they contribute affine terms and keep the restriction
identity g_red(y) = g(c, y) exact).  The slice is classified by the exact
vertex structure of its facet normals: smooth, finite-quotient, or worse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .polytope import HPolytope, PolytopeError, SlicePolytope, _det, axis_slice
from .potential import SymplecticPotential, abreu_scalar_curvature
from .quantization import quantum_basis

CLASS_DELZANT = "delzant"
CLASS_ORBIFOLD = "orbifold"
CLASS_WORSE = "worse"


def _primitive(vec):
    """Scale a rational vector to a primitive integer vector."""
    fracs = [Fraction(v) for v in vec]
    if all(f == 0 for f in fracs):
        raise PolytopeError("zero normal has no primitive form")
    scale = math.lcm(*(f.denominator for f in fracs))
    ints = [int(f * scale) for f in fracs]
    g = math.gcd(*(abs(i) for i in ints))
    return tuple(i // g for i in ints)


def classify_polytope(poly: HPolytope) -> str:
    """Vertex-by-vertex smoothness class of a rational polytope.

    A vertex with more active facets than the dimension makes the polytope
    "worse"; otherwise every vertex whose primitive active normals have
    determinant +-1 is smooth and any other determinant gives "orbifold".
    """
    d = poly.dim
    worst = CLASS_DELZANT
    for v in poly.vertices:
        active = [r for r in range(len(poly.facets))
                  if poly.facet_value(r, v) == 0]
        normals = {_primitive(poly.facets[r].normal) for r in active}
        if len(normals) > d:
            return CLASS_WORSE
        det = abs(_det(sorted(normals)))
        if det != 1:
            worst = CLASS_ORBIFOLD
    return worst


@dataclass(frozen=True)
class ReducedStructure:
    """Slice polytope, restricted potential, and smoothness class."""

    slice: SlicePolytope
    potential: SymplecticPotential
    classification: str
    level: tuple
    p: int


def reduced_potential(poly, p: int, c) -> SymplecticPotential:
    """Restriction of the ambient potential to x_{1..p} = c, as a potential
    in the trailing coordinates; affine facets are kept."""
    c = [Fraction(v) for v in c]
    normals = []
    offsets = []
    for f in poly.facets:
        a, b = f.normal[:p], f.normal[p:]
        lam = sum(ci * ai for ci, ai in zip(c, a)) + f.offset
        if all(e == 0 for e in b) and lam <= 0:
            raise PolytopeError("level outside the moment polytope projection")
        normals.append([float(e) for e in b])
        offsets.append(float(lam))
    sl = axis_slice(poly, p, c)
    bary = None
    if not sl.is_empty and sl.vertices:
        bary = [float(v) for v in sl.barycenter]
    return SymplecticPotential(normals, offsets, barycenter=bary)


def reduce(poly, p: int, c) -> ReducedStructure:
    sl = axis_slice(poly, p, c)
    if sl.is_empty:
        raise PolytopeError(f"slice at level {tuple(c)} is empty")
    return ReducedStructure(slice=sl,
                            potential=reduced_potential(poly, p, c),
                            classification=classify_polytope(sl),
                            level=tuple(Fraction(v) for v in c), p=p)


def reduced_scalar_curvature(structure: ReducedStructure, y) -> float:
    return abreu_scalar_curvature(structure.potential, np.asarray(y, float))


# ---------------------------------------------------------------------------
# the weighted-C^3 family


def c3_reduction(alpha1: int, alpha2: int, c=0) -> ReducedStructure:
    """Reduction of flat C^3 by the circle of weights (-alpha1, -alpha2, 1)
    at level c: the quadrant with the extra facet alpha1 x1 + alpha2 x2 + c.

    For c = 0 three facets meet at the origin, so the reduced space is
    never a manifold or orbifold there.
    """
    if alpha1 <= 0 or alpha2 <= 0:
        raise ValueError("weights must be positive integers")
    c = Fraction(c)
    if c < 0:
        raise ValueError("level must be nonnegative")
    quadrant = HPolytope.from_data(
        2, [((1, 0), 0), ((0, 1), 0), ((alpha1, alpha2), c)])
    potential = SymplecticPotential(
        [(1.0, 0.0), (0.0, 1.0), (float(alpha1), float(alpha2))],
        [0.0, 0.0, float(c)], barycenter=[1.0, 1.0])
    sl = SlicePolytope(dim=2, facets=quadrant.facets, fixed_values=(c,))
    return ReducedStructure(slice=sl, potential=potential,
                            classification=classify_polytope(quadrant),
                            level=(c,), p=1)


# ---------------------------------------------------------------------------
# dimension bookkeeping


def reduction_level_report(poly, p: int):
    """Per-integral-level rows {c, dim, class}; levels span the integer
    range of the projected bounding box, so empty fibers appear with
    dimension 0 and class "trivial"."""
    groups = {}
    for el in quantum_basis(poly, p):
        groups.setdefault(el.m[:p], []).append(el)
    lo, hi = poly.bounding_box()
    import itertools
    ranges = [range(math.ceil(a), math.floor(b) + 1)
              for a, b in zip(lo[:p], hi[:p])]
    rows = []
    for c in itertools.product(*ranges):
        dim = len(groups.get(c, []))
        if dim == 0:
            cls = "trivial"
        elif p == poly.dim:
            cls = CLASS_DELZANT
        else:
            sl = axis_slice(poly, p, c)
            if sl.is_empty or not sl.vertices:
                cls = "trivial"
            elif not sl.is_full_dimensional:
                cls = "degenerate"
            else:
                cls = classify_polytope(sl)
        rows.append({"c": list(c), "dim": dim, "class": cls})
    total = sum(r["dim"] for r in rows)
    return rows, total, total == len(quantum_basis(poly, p))


def reduction_dimension_audit(poly, p: int):
    """Sizes of the lattice-point fibers over the projected leading levels.

    Returns (levels, dims) with levels sorted lexicographically; the dims
    add up to the total number of lattice points.
    """
    groups = {}
    for el in quantum_basis(poly, p):
        groups.setdefault(el.m[:p], []).append(el)
    levels = sorted(groups)
    dims = [len(groups[lv]) for lv in levels]
    assert sum(dims) == len(quantum_basis(poly, p))
    return levels, dims
