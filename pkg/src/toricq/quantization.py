"""Quantum basis, norms along the ray, and their infinite-time limits.

The basis is indexed by the lattice points m of the (already half-integrally
shifted) polytope.  All integrals use the boundary-safe density

    prod_r l_r(x)^{l_r(m)} * exp(l_r(m) - l_r(x)),

which equals exp(-2((x - m).y - g(x))) on the interior and stays bounded up
to the boundary because every exponent l_r(m) is at least 1/2.  Together
with the sqrt(det G_s) half-form factor the integrand behaves like
prod_r l_r^{l_r(m) - 1/2}, so open quadrature rules converge without any
boundary regularization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import SymplecticPotential, guillemin_potential
from .quadrature import IntegralResult, cell_budget, integrate, integrate_slice, triangulate


@dataclass(frozen=True)
class QuantumBasisElement:
    """Monomial section label: lattice point m and its ray energy H(m)."""

    m: tuple
    hamiltonian_value: float
    index: int


def quantum_basis(poly, p: int):
    """Basis elements for the lattice points of poly, lexicographic order."""
    if not 1 <= p <= poly.dim:
        raise ValueError("p out of range")
    out = []
    for i, m in enumerate(poly.lattice_points()):
        H = 0.5 * sum(float(c) ** 2 for c in m[:p])
        out.append(QuantumBasisElement(m=tuple(int(c) for c in m),
                                       hamiltonian_value=H, index=i))
    return out


def _facet_powers(pot: SymplecticPotential, m):
    lm = pot.facet_values(np.asarray(m, dtype=float))
    if np.any(lm < 0.5 - 1e-12):
        raise ValueError(f"lattice point {m} has a facet value below 1/2")
    return lm


def stable_density(pot: SymplecticPotential, m):
    """Vectorized x -> prod_r l_r(x)^{l_r(m)} e^{l_r(m) - l_r(x)}."""
    lm = _facet_powers(pot, m)

    def density(x):
        l = pot.facet_values(x)
        return np.exp(np.sum(lm * np.log(l) + (lm - l), axis=-1))

    return density


def _halfform_factor(pot: SymplecticPotential, p: int, s: float):
    idx = np.arange(p)

    def factor(x):
        G = pot.hess(x)
        G[..., idx, idx] += s
        return np.sqrt(np.linalg.det(G))

    return factor


def tilde_norm_squared(poly, p: int, m, s: float, tol: float = 1e-9,
                       budget=None) -> IntegralResult:
    """Rescaled squared norm: the x-integral of
    e^{-s sum_{j<=p}(x_j - m_j)^2} * stable density * sqrt(det G_s)."""
    pot = guillemin_potential(poly)
    density = stable_density(pot, m)
    halfform = _halfform_factor(pot, p, s)
    mm = np.asarray(m, dtype=float)[:p]

    def f(x):
        gauss = np.exp(-s * np.sum((x[..., :p] - mm) ** 2, axis=-1))
        return gauss * density(x) * halfform(x)

    region = triangulate(poly)
    return integrate(f, region, tol, budget=budget)


def norm_squared(poly, p: int, m, s: float, tol: float = 1e-9,
                 budget=None) -> IntegralResult:
    """Squared norm of the monomial section at time s; differs from the
    rescaled norm by the factor e^{2 s H(m)}."""
    H = 0.5 * sum(float(c) ** 2 for c in tuple(m)[:p])
    scale = math.exp(2.0 * s * H)
    res = tilde_norm_squared(poly, p, m, s, tol=tol, budget=budget)
    return IntegralResult(value=scale * res.value,
                          error_estimate=scale * res.error_estimate,
                          cells_used=res.cells_used, converged=res.converged)


def limit_constant(poly, p: int, m, tol: float = 1e-10) -> float:
    """c_m: the stable density integrated over the slice x_{1..p} = m_{1..p}
    against the sqrt(det D) half-form factor of the trailing block.

    For p = n the slice is the point m and c_m = prod_r l_r(m)^{l_r(m)}.
    """
    n = poly.dim
    pot = guillemin_potential(poly)
    lm = _facet_powers(pot, m)
    if p == n:
        return float(np.exp(np.sum(lm * np.log(lm))))
    c = tuple(m)[:p]
    cf = np.asarray([float(v) for v in c], dtype=float)

    def f(y):
        x = np.concatenate(
            [np.broadcast_to(cf, y.shape[:-1] + (p,)), y], axis=-1)
        l = pot.facet_values(x)
        density = np.exp(np.sum(lm * np.log(l) + (lm - l), axis=-1))
        D = pot.hess(x)[..., p:, p:]
        return density * np.sqrt(np.linalg.det(D))

    res = integrate_slice(f, poly, p, c, tol)
    return res.value


def norm_limit(poly, p: int, m, tol: float = 1e-10) -> float:
    """lim_{s->oo} of the rescaled squared norm: pi^{p/2} c_m."""
    return math.pi ** (p / 2.0) * limit_constant(poly, p, m, tol=tol)


# ---------------------------------------------------------------------------
# coherent-state-transform factors


@dataclass(frozen=True)
class GcstMap:
    """Diagonal map on the basis: sigma_m -> e^{-s H(m)} sigma_m."""

    p: int
    s: float

    def factor(self, m) -> float:
        H = 0.5 * sum(float(c) ** 2 for c in tuple(m)[:self.p])
        return math.exp(-self.s * H)

    def compose(self, other: "GcstMap") -> "GcstMap":
        if self.p != other.p:
            raise ValueError("cannot compose maps with different p")
        return GcstMap(p=self.p, s=self.s + other.s)


def gcst_factor(p: int, m, s: float) -> float:
    return GcstMap(p=p, s=s).factor(m)


# ---------------------------------------------------------------------------
# limit verification and decomposition


@dataclass(frozen=True)
class ConvergenceReport:
    m: tuple
    s_values: tuple
    norm_values: tuple
    extrapolated: float
    target: float
    passed: bool

    @property
    def relative_error(self):
        return abs(self.extrapolated - self.target) / abs(self.target)


def richardson_extrapolate(s_values, values) -> float:
    """Fit values(s) = a0 + a1/s + ... and return the constant term a0."""
    s = np.asarray(s_values, dtype=float)
    if len(s) != len(set(s_values)) or np.any(s <= 0):
        raise ValueError("s values must be positive and distinct")
    eps = 1.0 / s
    V = np.vander(eps, N=len(eps), increasing=True)
    coeffs = np.linalg.solve(V, np.asarray(values, dtype=float))
    return float(coeffs[0])


def verify_norm_limit(poly, p: int, m, s_values, tol: float = 1e-9,
                      rel_tol: float = 0.02, budget=None) -> ConvergenceReport:
    """Extrapolate the rescaled norms along s_values and compare with the
    slice-integral limit pi^{p/2} c_m."""
    values = tuple(tilde_norm_squared(poly, p, m, s, tol=tol,
                                      budget=budget).value
                   for s in s_values)
    extrap = richardson_extrapolate(s_values, values)
    target = norm_limit(poly, p, m, tol=tol)
    passed = abs(extrap - target) <= max(tol, rel_tol * abs(target))
    return ConvergenceReport(m=tuple(m), s_values=tuple(s_values),
                             norm_values=values, extrapolated=extrap,
                             target=target, passed=passed)


def hermitian_limit_table(poly, p: int, tol: float = 1e-9):
    """(element, c_m, limit) for every basis element."""
    out = []
    for el in quantum_basis(poly, p):
        c = limit_constant(poly, p, el.m, tol=tol)
        out.append((el, c, math.pi ** (p / 2.0) * c))
    return out


def decomposition(poly, p: int):
    """Group the basis by the leading p coordinates of m; each group is a
    weight space of the limit torus action, ordered lexicographically."""
    groups = {}
    for el in quantum_basis(poly, p):
        groups.setdefault(el.m[:p], []).append(el)
    return sorted(groups.items())
