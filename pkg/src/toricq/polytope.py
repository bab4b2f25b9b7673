"""Exact half-space geometry for Delzant polytopes.

Polytopes are kept in H-description l_r(x) = <x, nu_r> + lambda_r >= 0 with
integer normals and rational offsets.  Every combinatorial predicate
(vertex enumeration, boundedness, redundancy, the Delzant determinant
condition) is evaluated in exact rational arithmetic; floats only appear
downstream in the analytic modules.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property


class PolytopeError(ValueError):
    """Invalid polytope data or operation."""


# ---------------------------------------------------------------------------
# exact linear algebra over Fraction (dimensions are tiny, <= ~4)

def _solve_square(rows, rhs):
    """Solve the square system rows * x = rhs exactly; None if singular."""
    n = len(rows)
    M = [[Fraction(e) for e in row] + [Fraction(v)] for row, v in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col]
        M[col] = [e / inv for e in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def _det(rows):
    """Exact determinant by fraction Gaussian elimination."""
    n = len(rows)
    M = [[Fraction(e) for e in row] for row in rows]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        inv = M[col][col]
        for r in range(col + 1, n):
            if M[r][col] != 0:
                f = M[r][col] / inv
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return det


def _inv(rows):
    """Exact inverse of a square matrix; None if singular."""
    n = len(rows)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        x = _solve_square(rows, e)
        if x is None:
            return None
        cols.append(x)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _rank(rows, ncols):
    M = [[Fraction(e) for e in row] for row in rows]
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][col] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = M[rank][col]
        M[rank] = [e / inv for e in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def _kernel_direction(rows, ncols):
    """One nonzero exact kernel vector of the given rows, or None."""
    M = [[Fraction(e) for e in row] for row in rows]
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][col] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = M[rank][col]
        M[rank] = [e / inv for e in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        return None
    j = free[0]
    v = [Fraction(0)] * ncols
    v[j] = Fraction(1)
    for r, pc in enumerate(pivots):
        v[pc] = -M[r][j]
    return v


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Facet:
    """Affine facet function l(x) = <x, normal> + offset."""

    normal: tuple
    offset: Fraction

    def value(self, x):
        return _dot(self.normal, x) + self.offset


@dataclass(frozen=True)
class HPolytope:
    """Bounded-or-not intersection of half spaces with rational data."""

    dim: int
    facets: tuple

    def __post_init__(self):
        for f in self.facets:
            if len(f.normal) != self.dim:
                raise PolytopeError("normal dimension mismatch")

    @classmethod
    def from_data(cls, dim, facet_data):
        facets = tuple(
            Facet(tuple(Fraction(c) for c in normal), Fraction(offset))
            for normal, offset in facet_data
        )
        return cls(dim=dim, facets=facets)

    def facet_value(self, r, x):
        return self.facets[r].value(x)

    def contains(self, x, strict=False):
        if strict:
            return all(f.value(x) > 0 for f in self.facets)
        return all(f.value(x) >= 0 for f in self.facets)

    @cached_property
    def vertices(self):
        """All vertices, lexicographically sorted, as tuples of Fractions."""
        n = self.dim
        seen = set()
        out = []
        for idxs in itertools.combinations(range(len(self.facets)), n):
            rows = [self.facets[r].normal for r in idxs]
            rhs = [-self.facets[r].offset for r in idxs]
            x = _solve_square(rows, rhs)
            if x is None:
                continue
            x = tuple(x)
            if x in seen:
                continue
            if self.contains(x):
                seen.add(x)
                out.append(x)
        out.sort()
        return tuple(out)

    def active_facets(self, x):
        return tuple(r for r, f in enumerate(self.facets) if f.value(x) == 0)

    @cached_property
    def is_bounded(self):
        """Exact recession-cone test: bounded iff {d : N d >= 0} = {0}."""
        n = self.dim
        normals = [f.normal for f in self.facets]
        if _rank(normals, n) < n:
            return False
        candidates = []
        for i in range(n):
            e = tuple(Fraction(int(j == i)) for j in range(n))
            candidates.append(e)
        if n >= 2:
            for idxs in itertools.combinations(range(len(normals)), n - 1):
                d = _kernel_direction([normals[r] for r in idxs], n)
                if d is not None and any(c != 0 for c in d):
                    candidates.append(tuple(d))
        for d in candidates:
            for sign in (1, -1):
                ds = tuple(sign * c for c in d)
                if all(_dot(f.normal, ds) >= 0 for f in self.facets):
                    return False
        return True

    @cached_property
    def is_empty(self):
        if not self.is_bounded:
            raise PolytopeError("emptiness test implemented for bounded sets only")
        return len(self.vertices) == 0

    @cached_property
    def is_full_dimensional(self):
        verts = self.vertices
        if not verts:
            return False
        v0 = verts[0]
        rows = [tuple(a - b for a, b in zip(v, v0)) for v in verts[1:]]
        return _rank(rows, self.dim) == self.dim

    @cached_property
    def barycenter(self):
        verts = self.vertices
        if not verts:
            raise PolytopeError("empty polytope has no barycenter")
        k = Fraction(len(verts))
        return tuple(sum(v[i] for v in verts) / k for i in range(self.dim))

    def bounding_box(self):
        verts = self.vertices
        lo = tuple(min(v[i] for v in verts) for i in range(self.dim))
        hi = tuple(max(v[i] for v in verts) for i in range(self.dim))
        return lo, hi

    def lattice_points(self):
        """Integer points l_r(m) >= 0 for all r, in lexicographic order."""
        if not self.is_bounded:
            raise PolytopeError("lattice enumeration needs a bounded polytope")
        if not self.vertices:
            return []
        lo, hi = self.bounding_box()
        ranges = [range(math.ceil(a), math.floor(b) + 1) for a, b in zip(lo, hi)]
        return [m for m in itertools.product(*ranges) if self.contains(m)]

    def float_normals_offsets(self):
        import numpy as np

        A = np.array([[float(c) for c in f.normal] for f in self.facets])
        b = np.array([float(f.offset) for f in self.facets])
        return A, b


@dataclass(frozen=True)
class DelzantPolytope(HPolytope):
    """H-polytope with integer primitive normals (candidate Delzant data)."""

    name: str = ""

    def __post_init__(self):
        super().__post_init__()
        for f in self.facets:
            if any(c.denominator != 1 for c in f.normal):
                raise PolytopeError("Delzant normals must be integer vectors")
            if all(c == 0 for c in f.normal):
                raise PolytopeError("zero normal vector")

    @classmethod
    def from_data(cls, dim, facet_data, name=""):
        facets = tuple(
            Facet(tuple(Fraction(int(c)) for c in normal), Fraction(offset))
            for normal, offset in facet_data
        )
        return cls(dim=dim, facets=facets, name=name)

    def normal_int(self, r):
        return tuple(int(c) for c in self.facets[r].normal)


@dataclass(frozen=True)
class VertexChart:
    """Affine chart x_v = A_v x + lambda_v sending a vertex to the origin."""

    vertex: tuple
    A_v: tuple        # rows = active primitive normals, input facet order
    lambda_v: tuple   # offsets of the active facets

    def apply(self, x):
        return tuple(_dot(row, x) + lam for row, lam in zip(self.A_v, self.lambda_v))


@dataclass(frozen=True)
class FrameChange:
    """Element B of SL(n, Z) whose first p rows pick the subtorus directions."""

    B: tuple
    p: int

    def __post_init__(self):
        n = len(self.B)
        if any(len(row) != n for row in self.B):
            raise PolytopeError("frame change matrix must be square")
        if any(int(e) != e for row in self.B for e in row):
            raise PolytopeError("frame change matrix must be integer")
        if _det(self.B) != 1:
            raise PolytopeError("frame change must have determinant 1")
        if not 1 <= self.p <= n:
            raise PolytopeError("p out of range")


@dataclass(frozen=True)
class SlicePolytope(HPolytope):
    """Axis-aligned slice {y : <y, b_j> + lam_j >= 0} at fixed leading values."""

    fixed_values: tuple = ()
    empty: bool = False

    @cached_property
    def is_empty(self):
        if self.empty:
            return True
        return super().is_empty


@dataclass
class ValidationReport:
    ok: bool
    verdict: str                 # "ok" | "unbounded" | "empty" | "not delzant" | "redundant" | "bad normals"
    vertex_determinants: list = field(default_factory=list)  # (vertex, det or None)
    violations: list = field(default_factory=list)           # (vertex, det or None)
    redundant_facets: list = field(default_factory=list)
    messages: list = field(default_factory=list)


def validate_delzant(poly: DelzantPolytope) -> ValidationReport:
    """Check boundedness, full dimension, facet essentiality and the
    unimodular vertex condition; returns a report instead of raising."""
    report = ValidationReport(ok=True, verdict="ok")
    for r in range(len(poly.facets)):
        nu = poly.normal_int(r)
        if math.gcd(*(abs(c) for c in nu)) != 1:
            report.ok = False
            report.verdict = "bad normals"
            report.messages.append(f"facet {r}: normal {nu} is not primitive")
    if not report.ok:
        return report

    if not poly.is_bounded:
        return ValidationReport(ok=False, verdict="unbounded",
                                messages=["recession cone is nontrivial"])
    if poly.is_empty or not poly.is_full_dimensional:
        return ValidationReport(ok=False, verdict="empty",
                                messages=["interior is empty"])

    verts = poly.vertices
    for r in range(len(poly.facets)):
        on_facet = [v for v in verts if poly.facet_value(r, v) == 0]
        if not on_facet:
            report.redundant_facets.append(r)
            continue
        v0 = on_facet[0]
        rows = [tuple(a - b for a, b in zip(v, v0)) for v in on_facet[1:]]
        if _rank(rows, poly.dim) < poly.dim - 1:
            report.redundant_facets.append(r)
    if report.redundant_facets:
        report.ok = False
        report.verdict = "redundant"
        report.messages.append(f"redundant facets: {report.redundant_facets}")

    for v in verts:
        active = poly.active_facets(v)
        if len(active) != poly.dim:
            det = None
        else:
            det = _det([poly.facets[r].normal for r in active])
        report.vertex_determinants.append((v, det))
        if det is None or abs(det) != 1:
            report.violations.append((v, det))
    if report.violations:
        report.ok = False
        if report.verdict == "ok":
            report.verdict = "not delzant"
        report.messages.append(
            "non-unimodular vertices: "
            + ", ".join(f"{v} det={d}" for v, d in report.violations)
        )
    return report


def lattice_points(poly: HPolytope):
    """Lattice points of a bounded polytope, lexicographically ordered."""
    return poly.lattice_points()


def corrected_polytope(poly_L: DelzantPolytope) -> DelzantPolytope:
    """Shift every offset by 1/2 (half-form correction of the line-bundle
    polytope).  The lattice points are unchanged."""
    report = validate_delzant(poly_L)
    if not report.ok:
        raise PolytopeError(f"input polytope is not Delzant: {report.verdict}")
    for v in poly_L.vertices:
        if any(c.denominator != 1 for c in v):
            raise PolytopeError("line-bundle polytope must have integral vertices")
    facets = tuple(
        Facet(f.normal, f.offset + Fraction(1, 2)) for f in poly_L.facets
    )
    return DelzantPolytope(dim=poly_L.dim, facets=facets,
                           name=poly_L.name + "+1/2" if poly_L.name else "")


def apply_frame_change(poly: DelzantPolytope, fc: FrameChange) -> DelzantPolytope:
    """Transform to the coordinates x~ = B x: normals become (B^T)^-1 nu."""
    n = poly.dim
    if len(fc.B) != n:
        raise PolytopeError("frame change dimension mismatch")
    Bt = [[Fraction(int(fc.B[j][i])) for j in range(n)] for i in range(n)]
    Bt_inv = _inv(Bt)
    facets = []
    for f in poly.facets:
        nu = [_dot(Bt_inv[i], f.normal) for i in range(n)]
        if any(c.denominator != 1 for c in nu):
            raise PolytopeError("frame change produced non-integer normal")
        facets.append(Facet(tuple(nu), f.offset))
    return DelzantPolytope(dim=n, facets=tuple(facets), name=poly.name)


def vertex_chart(poly: DelzantPolytope, vertex_index: int) -> VertexChart:
    """Chart at the given vertex (vertices in lexicographic order)."""
    verts = poly.vertices
    v = verts[vertex_index]
    active = poly.active_facets(v)
    if len(active) != poly.dim:
        raise PolytopeError(
            f"vertex {v} has {len(active)} active facets, expected {poly.dim}")
    rows = tuple(poly.facets[r].normal for r in active)
    det = _det(rows)
    if abs(det) != 1:
        raise PolytopeError(f"vertex {v} is not Delzant: determinant {det}")
    lam = tuple(poly.facets[r].offset for r in active)
    return VertexChart(vertex=v, A_v=rows, lambda_v=lam)


def axis_slice(poly: HPolytope, p: int, c) -> SlicePolytope:
    """Fix the first p coordinates to c and keep the trailing n-p ones.

    Facets with vanishing trailing normal are dropped if satisfied and make
    the slice empty otherwise.
    """
    n = poly.dim
    if not 1 <= p < n:
        raise PolytopeError("need 1 <= p < n for a proper slice")
    c = tuple(Fraction(v) for v in c)
    if len(c) != p:
        raise PolytopeError("fixed-value vector has wrong length")
    facets = []
    for f in poly.facets:
        a, b = f.normal[:p], f.normal[p:]
        lam = _dot(c, a) + f.offset
        if all(e == 0 for e in b):
            if lam < 0:
                return SlicePolytope(dim=n - p, facets=(), fixed_values=c,
                                     empty=True)
            continue
        facets.append(Facet(b, lam))
    return SlicePolytope(dim=n - p, facets=tuple(facets), fixed_values=c)


# ---------------------------------------------------------------------------
# JSON interface


def _parse_offset(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (int, float)):
        return Fraction(v).limit_denominator(10**9)
    raise PolytopeError(f"cannot parse offset {v!r}")


def polytope_from_json(data) -> DelzantPolytope:
    """Build a polytope from {"dim": n, "facets": [{"normal": [...],
    "offset": "p/q" | number}], "name": optional}."""
    if isinstance(data, str):
        data = json.loads(data)
    for key in ("dim", "facets"):
        if key not in data:
            raise PolytopeError(f"missing key {key!r} in polytope JSON")
    facet_data = []
    for i, f in enumerate(data["facets"]):
        if "normal" not in f or "offset" not in f:
            raise PolytopeError(f"facet {i}: missing 'normal' or 'offset'")
        facet_data.append((f["normal"], _parse_offset(f["offset"])))
    return DelzantPolytope.from_data(int(data["dim"]), facet_data,
                                     name=data.get("name", ""))


def load_polytope(path) -> DelzantPolytope:
    with open(path) as fh:
        return polytope_from_json(json.load(fh))


def polytope_to_json(poly: HPolytope) -> dict:
    out = {
        "dim": poly.dim,
        "facets": [
            {"normal": [int(c) if c.denominator == 1 else str(c)
                        for c in f.normal],
             "offset": str(f.offset)}
            for f in poly.facets
        ],
    }
    name = getattr(poly, "name", "")
    if name:
        out["name"] = name
    return out
