"""Symplectic potentials and the Kahler data they induce.

The Guillemin potential of a polytope with facet functions l_r is
g(x) = 1/2 sum_r l_r(x) log l_r(x), optionally plus a quadratic correction.
Value, gradient, Hessian and third derivatives are closed-form; boundary
behaviour is only ever probed through the dedicated limit paths of the
quadrature and quantization modules.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np


class DomainError(ValueError):
    """Evaluation requested outside the open polytope interior."""


@dataclass(frozen=True)
class QuadraticCorrection:
    """h(x) = 1/2 sum_j coeffs[j] x_j^2."""

    coeffs: tuple

    def value(self, x):
        c = np.asarray(self.coeffs)
        return 0.5 * np.sum(c * np.asarray(x) ** 2, axis=-1)

    def grad(self, x):
        return np.asarray(self.coeffs) * np.asarray(x)

    def hess(self, x):
        x = np.asarray(x)
        n = x.shape[-1]
        H = np.zeros(x.shape[:-1] + (n, n))
        idx = np.arange(n)
        H[..., idx, idx] = np.asarray(self.coeffs)
        return H

    def third(self, x):
        x = np.asarray(x)
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n))


def parse_correction(spec: str, dim: int):
    """Parse "none" or "quadratic:c1,c2,..." into a correction object."""
    if spec in (None, "", "none"):
        return None
    if spec.startswith("quadratic:"):
        coeffs = tuple(float(v) for v in spec.split(":", 1)[1].split(","))
        if len(coeffs) != dim:
            raise ValueError("quadratic correction needs one coefficient per axis")
        return QuadraticCorrection(coeffs)
    raise ValueError(f"unknown correction {spec!r}")


class SymplecticPotential:
    """Evaluator bundle (g, grad g, Hess g, third derivatives) on the open
    interior of a polytope given by float facet data A x + b >= 0."""

    def __init__(self, normals, offsets, correction=None, barycenter=None,
                 polytope=None):
        self.A = np.atleast_2d(np.asarray(normals, dtype=float))
        self.b = np.asarray(offsets, dtype=float)
        self.dim = self.A.shape[1]
        self.correction = correction
        self.polytope = polytope
        if barycenter is None and polytope is not None:
            barycenter = [float(c) for c in polytope.barycenter]
        self._barycenter = None if barycenter is None else np.asarray(
            barycenter, dtype=float)

    @classmethod
    def from_polytope(cls, poly, correction=None):
        A, b = poly.float_normals_offsets()
        return cls(A, b, correction=correction, polytope=poly)

    @property
    def barycenter(self):
        if self._barycenter is None:
            raise DomainError("potential has no interior reference point")
        return self._barycenter

    # -- facet helpers ------------------------------------------------------

    def facet_values(self, x):
        """l_r(x) for every facet; x is (..., n)."""
        return np.asarray(x) @ self.A.T + self.b

    def is_interior(self, x, margin=0.0):
        return bool(np.all(self.facet_values(x) > margin))

    def boundary_distance(self, x):
        """min_r l_r(x)/|nu_r|, a lower bound on the Euclidean distance;
        facets with zero normal are constants and do not bound distance."""
        norms = np.linalg.norm(self.A, axis=1)
        mask = norms > 0
        vals = self.facet_values(x)[..., mask] / norms[mask]
        return float(np.min(vals))

    def _require_interior(self, x):
        if not np.all(self.facet_values(x) > 0):
            raise DomainError(f"point {np.asarray(x)} is not interior")

    # -- evaluators (broadcast over leading axes) ---------------------------

    def value(self, x):
        l = self.facet_values(x)
        g = 0.5 * np.sum(l * np.log(l), axis=-1)
        if self.correction is not None:
            g = g + self.correction.value(x)
        return g

    def grad(self, x):
        l = self.facet_values(x)
        y = 0.5 * (np.log(l) + 1.0) @ self.A
        if self.correction is not None:
            y = y + self.correction.grad(x)
        return y

    def hess(self, x):
        l = self.facet_values(x)
        G = 0.5 * np.einsum('...r,rj,rk->...jk', 1.0 / l, self.A, self.A)
        if self.correction is not None:
            G = G + self.correction.hess(x)
        return G

    def third(self, x):
        """T[j,k,l] = d^3 g / dx_j dx_k dx_l."""
        l = self.facet_values(x)
        T = -0.5 * np.einsum('...r,rj,rk,rl->...jkl',
                             1.0 / l ** 2, self.A, self.A, self.A)
        if self.correction is not None:
            T = T + self.correction.third(x)
        return T


def guillemin_potential(poly, correction=None) -> SymplecticPotential:
    """Guillemin potential g_P = 1/2 sum l_r log l_r plus optional h."""
    return SymplecticPotential.from_polytope(poly, correction=correction)


def legendre_forward(pot: SymplecticPotential, x):
    """y = grad g(x) for strictly interior x."""
    pot._require_interior(x)
    return pot.grad(x)


def legendre_inverse(pot: SymplecticPotential, y, tol=1e-10, max_iter=200):
    """Solve grad g(x) = y by damped Newton, iterates kept interior.

    Starts from the polytope barycenter; step halving continues until the
    iterate is interior and the residual decreases.
    """
    y = np.asarray(y, dtype=float)
    x = pot.barycenter.copy()
    res = np.linalg.norm(pot.grad(x) - y)
    for _ in range(max_iter):
        if res <= tol:
            return x
        step = np.linalg.solve(pot.hess(x), y - pot.grad(x))
        t = 1.0
        while t > 1e-16:
            cand = x + t * step
            if pot.is_interior(cand):
                cand_res = np.linalg.norm(pot.grad(cand) - y)
                if cand_res < res:
                    x, res = cand, cand_res
                    break
            t *= 0.5
        else:
            break
    if res <= tol:
        return x
    raise DomainError(
        f"Legendre inversion did not converge: last residual {res:.3e}")


def kahler_potential_value(pot: SymplecticPotential, x):
    """k(x) = x . grad g(x) - g(x)."""
    pot._require_interior(x)
    return float(np.dot(x, pot.grad(x)) - pot.value(x))


def regularity_delta(pot: SymplecticPotential, x):
    """delta(x) = (det Hess g * prod_r l_r)^(-1), strictly positive inside."""
    pot._require_interior(x)
    l = pot.facet_values(x)
    return float(1.0 / (np.linalg.det(pot.hess(x)) * np.prod(l)))


def complex_structure(pot: SymplecticPotential, x):
    """J = [[0, -G^-1], [G, 0]]; warns if G is badly conditioned."""
    pot._require_interior(x)
    G = pot.hess(x)
    if np.linalg.cond(G) > 1e12:
        warnings.warn("Hessian condition number exceeds 1e12; complex "
                      "structure may be inaccurate", RuntimeWarning)
    n = pot.dim
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.linalg.inv(G)
    J[n:, :n] = G
    return J


def abreu_scalar_curvature(pot: SymplecticPotential, x, step: Optional[float] = None):
    """Scalar curvature S = -1/2 sum_{jk} d^2 (G^-1)_{jk} / dx_j dx_k.

    The -1/2 normalization is calibrated so that the reduced potential
    1/2 (x1 log x1 + x2 log x2 + a(x1+x2) log(a(x1+x2))) yields
    S = 2a/((a+1)(x1+x2)); the round-segment [0, lam] value is 2/lam.
    Second derivatives of the analytic inverse Hessian are taken by central
    differences with one Richardson step.
    """
    x = np.asarray(x, dtype=float)
    pot._require_interior(x)
    dist = pot.boundary_distance(x)
    if step is None:
        step = min(1e-2, dist / 8.0)
    if step < 1e-10 or dist <= 2 * step:
        raise DomainError("point too close to the boundary for the "
                          "finite-difference stencil")

    def ginv(z):
        return np.linalg.inv(pot.hess(z))

    def trace_sum(h):
        n = pot.dim
        total = 0.0
        F0 = ginv(x)
        for j in range(n):
            ej = np.zeros(n)
            ej[j] = h
            total += (ginv(x + ej)[j, j] - 2 * F0[j, j] + ginv(x - ej)[j, j]) / h ** 2
            for k in range(j + 1, n):
                ek = np.zeros(n)
                ek[k] = h
                mixed = (ginv(x + ej + ek)[j, k] - ginv(x + ej - ek)[j, k]
                         - ginv(x - ej + ek)[j, k] + ginv(x - ej - ek)[j, k]) \
                    / (4 * h ** 2)
                total += 2 * mixed
        return total

    coarse = trace_sum(step)
    fine = trace_sum(step / 2.0)
    # central differences are O(h^2); one Richardson level removes it
    return -0.5 * (4.0 * fine - coarse) / 3.0
