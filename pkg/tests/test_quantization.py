import math

import numpy as np
import pytest

from toricq import library
from toricq.potential import guillemin_potential
from toricq.quantization import (
    GcstMap,
    decomposition,
    gcst_factor,
    hermitian_limit_table,
    limit_constant,
    norm_limit,
    norm_squared,
    quantum_basis,
    richardson_extrapolate,
    stable_density,
    tilde_norm_squared,
    verify_norm_limit,
)

# rescaled-norm references for the shifted segment [-1/2, 3/2], m = 0,
# frozen from adaptive Gauss-Kronrod quadrature at tolerance 1e-13
SEG_TILDE = {1.0: 2.1055202811274891,
             10.0: 2.2809165731229255,
             40.0: 2.301625146611479}
SEG_CM = 1.299038105676658
SEG_LIMIT = 2.302485092879599


class TestBasis:
    def test_segment_basis(self):
        basis = quantum_basis(library.corrected_segment(), 1)
        assert [el.m for el in basis] == [(0,), (1,)]
        assert basis[0].hamiltonian_value == 0.0
        assert basis[1].hamiltonian_value == 0.5

    def test_square_basis(self):
        basis = quantum_basis(library.corrected_square(), 1)
        assert [el.m for el in basis] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert [el.index for el in basis] == [0, 1, 2, 3]
        # p=1 energy ignores the second coordinate
        assert basis[1].hamiltonian_value == 0.0
        assert basis[2].hamiltonian_value == 0.5

    def test_p_validation(self):
        with pytest.raises(ValueError):
            quantum_basis(library.corrected_segment(), 2)


class TestStableDensity:
    def test_matches_unstable_form(self):
        # interior identity: density = e^{-2((x-m).grad g - g)}
        poly = library.corrected_square()
        pot = guillemin_potential(poly)
        rng = np.random.default_rng(5)
        for m in ((0, 0), (1, 0), (1, 1)):
            density = stable_density(pot, m)
            count = 0
            while count < 20:
                x = -0.5 + 2.0 * rng.random(2)
                if not pot.is_interior(x, margin=0.05):
                    continue
                count += 1
                y = pot.grad(x)
                direct = math.exp(-2.0 * (float((x - np.asarray(m)) @ y)
                                          - pot.value(x)))
                assert density(x[None, :])[0] == pytest.approx(direct,
                                                               rel=1e-12)

    def test_bounded_at_boundary(self):
        pot = guillemin_potential(library.corrected_segment())
        density = stable_density(pot, (0,))
        vals = density(np.array([[-0.5 + 1e-12], [1.5 - 1e-12]]))
        assert np.all(np.isfinite(vals))

    def test_rejects_shallow_point(self):
        pot = guillemin_potential(library.segment(0, 1))
        with pytest.raises(ValueError):
            stable_density(pot, (0,))


class TestNorms:
    def test_segment_oracle(self):
        poly = library.corrected_segment()
        for s, ref in SEG_TILDE.items():
            res = tilde_norm_squared(poly, 1, (0,), s, tol=1e-10)
            assert res.converged
            assert res.value == pytest.approx(ref, abs=1e-8)

    def test_segment_symmetry(self):
        # m = 1 is the mirror image of m = 0 under x -> 1 - x
        poly = library.corrected_segment()
        a = tilde_norm_squared(poly, 1, (0,), 10.0, tol=1e-10).value
        b = tilde_norm_squared(poly, 1, (1,), 10.0, tol=1e-10).value
        assert a == pytest.approx(b, rel=1e-9)

    def test_norm_rescaling(self):
        poly = library.corrected_segment()
        s = 3.0
        tilde = tilde_norm_squared(poly, 1, (1,), s, tol=1e-10)
        full = norm_squared(poly, 1, (1,), s, tol=1e-10)
        assert full.value == pytest.approx(math.exp(2 * s * 0.5) * tilde.value,
                                           rel=1e-12)

    def test_limit_constant_closed_form(self):
        poly = library.corrected_segment()
        for m in ((0,), (1,)):
            assert limit_constant(poly, 1, m) == pytest.approx(SEG_CM,
                                                               rel=1e-12)
        assert norm_limit(poly, 1, (0,)) == pytest.approx(SEG_LIMIT, rel=1e-12)

    def test_square_product_identity(self):
        # P = I x I, p = 1: the rescaled norm factors through the trailing
        # segment, so tilde_sq(s) * c_seg = tilde_seg(s) * c_sq
        sq = library.corrected_square()
        seg = library.corrected_segment()
        c_sq = limit_constant(sq, 1, (0, 0), tol=1e-11)
        for s in (1.0, 10.0):
            t2 = tilde_norm_squared(sq, 1, (0, 0), s, tol=1e-6).value
            t1 = tilde_norm_squared(seg, 1, (0,), s, tol=1e-10).value
            assert t2 * SEG_CM == pytest.approx(t1 * c_sq, rel=1e-5)

    def test_square_p2_point_limit(self):
        # p = n: c_m is the closed-form product over the facets
        sq = library.corrected_square()
        assert limit_constant(sq, 2, (0, 0)) == pytest.approx(SEG_CM ** 2,
                                                              rel=1e-12)


class TestGcst:
    def test_factor(self):
        assert gcst_factor(1, (2, 5), 3.0) == pytest.approx(math.exp(-6.0))
        assert gcst_factor(2, (2, 5), 0.1) == pytest.approx(
            math.exp(-0.1 * 14.5))

    def test_composition(self):
        a = GcstMap(p=1, s=2.0)
        b = GcstMap(p=1, s=5.0)
        m = (3, 1)
        assert a.compose(b).factor(m) == pytest.approx(a.factor(m)
                                                       * b.factor(m))
        with pytest.raises(ValueError):
            a.compose(GcstMap(p=2, s=1.0))


class TestConvergence:
    def test_richardson_exact_on_polynomial(self):
        s = (2.0, 4.0, 8.0)
        vals = [5.0 + 3.0 / t - 7.0 / t ** 2 for t in s]
        assert richardson_extrapolate(s, vals) == pytest.approx(5.0,
                                                                abs=1e-10)

    def test_segment_limit_verified(self):
        report = verify_norm_limit(library.corrected_segment(), 1, (0,),
                                   (10.0, 20.0, 40.0, 80.0), tol=1e-9)
        assert report.passed
        assert report.target == pytest.approx(SEG_LIMIT, rel=1e-10)
        assert report.relative_error <= 0.02
        # raw values approach the target monotonically from below
        gaps = [report.target - v for v in report.norm_values]
        assert all(a > b > 0 for a, b in zip(gaps, gaps[1:]))


class TestDecomposition:
    def test_simplex_levels(self):
        groups = decomposition(library.simplex(2), 1)
        heads = [h for h, _ in groups]
        dims = [len(els) for _, els in groups]
        assert heads == [(0,), (1,), (2,)]
        assert dims == [3, 2, 1]
        assert sum(dims) == len(quantum_basis(library.simplex(2), 1))

    def test_table(self):
        table = hermitian_limit_table(library.corrected_segment(), 1)
        assert len(table) == 2
        for el, c, lim in table:
            assert c == pytest.approx(SEG_CM, rel=1e-10)
            assert lim == pytest.approx(SEG_LIMIT, rel=1e-10)
