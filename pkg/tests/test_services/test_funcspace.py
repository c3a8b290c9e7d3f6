# tests/test_services/test_funcspace.py
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from app.core.errors import DependentBasisError, DimensionMismatchError, InvalidInputError
from app.models.domain import Domain
from app.models.multiindex import MultiIndex
from app.models.trigpoly import TrigPoly
from app.services.funcspace import (
    change_basis,
    gram_matrix,
    l2_inner,
    make_space,
    orthonormalize,
    partial_multi,
    trig_eval,
    trig_eval_exact,
    trig_eval_many,
    trig_mul,
    trig_partial,
)
from tests.utils.factories import space_of, trig

TWO_PI = 2 * math.pi


def _random_poly(rng, dimension=1, max_freq=3, terms=4):
    items = []
    for _ in range(terms):
        freq = tuple(int(m) for m in rng.integers(-max_freq, max_freq + 1, size=dimension))
        items.append((freq, str(rng.choice(["cos", "sin"])), float(rng.normal())))
    return TrigPoly.from_terms(dimension, items)


class TestDerivatives:
    """Test exact differentiation"""

    def test_derivative_of_sin(self):
        """Test d/dx sin(2 pi x) = 2 pi cos(2 pi x)"""
        f = trig_partial(trig(1, ((1,), "sin", 1)), 0)
        assert f.keys == (((1,), "cos"),)
        assert f.coefficient((1,), "cos") == pytest.approx(TWO_PI)

    def test_exact_mode_keeps_pi(self):
        """Test exact derivatives carry 2*pi symbolically"""
        f = partial_multi(trig(1, ((2,), "cos", 1), mode="exact"), MultiIndex((2,)))
        assert sp.simplify(f.coefficient((2,), "cos") + 16 * sp.pi ** 2) == 0

    def test_mixed_partial_commutes(self):
        """Test d_x d_y = d_y d_x"""
        f = trig(2, ((1, 2), "sin", 1), ((2, -1), "cos", 3))
        xy = trig_partial(trig_partial(f, 0), 1)
        yx = trig_partial(trig_partial(f, 1), 0)
        assert xy.keys == yx.keys
        assert [c for _, c in xy.terms] == pytest.approx([c for _, c in yx.terms])

    def test_bad_axis(self):
        """Test an out-of-range axis raises InvalidInputError"""
        with pytest.raises(InvalidInputError):
            trig_partial(trig(1, ((1,), "sin", 1)), 1)

    def test_derivative_matches_evaluation(self):
        """Test the derivative agrees with a centered difference"""
        rng = np.random.default_rng(7)
        f = _random_poly(rng)
        x, h = 0.37, 1e-6
        numeric = (trig_eval(f, (x + h,)) - trig_eval(f, (x - h,))) / (2 * h)
        assert trig_eval(trig_partial(f, 0), (x,)) == pytest.approx(numeric, rel=1e-6, abs=1e-6)


class TestProducts:
    """Test product-to-sum multiplication"""

    def test_sin_squared(self):
        """Test sin^2 = 1/2 - cos(4 pi x)/2"""
        s = trig(1, ((1,), "sin", 1), mode="exact")
        product = trig_mul(s, s)
        assert product == trig(1, ((0,), "cos", "1/2"), ((2,), "cos", "-1/2"), mode="exact")

    @pytest.mark.parametrize("seed", range(20))
    def test_product_matches_pointwise(self, seed):
        """Test (fg)(x) = f(x) g(x) on random 2-d polynomials"""
        rng = np.random.default_rng(seed)
        f, g = _random_poly(rng, 2), _random_poly(rng, 2)
        coords = rng.random((10, 2))
        assert np.allclose(trig_eval_many(trig_mul(f, g), coords), trig_eval_many(f, coords) * trig_eval_many(g, coords))

    def test_dimension_mismatch(self):
        """Test products across dimensions raise"""
        with pytest.raises(DimensionMismatchError):
            trig_mul(trig(1, ((1,), "sin", 1)), trig(2, ((1, 0), "sin", 1)))


class TestEvaluation:
    """Test float and exact evaluation"""

    def test_exact_value_at_rational_point(self):
        """Test sin(2 pi / 8) = sqrt(2)/2 exactly"""
        value = trig_eval_exact(trig(1, ((1,), "sin", 1), mode="exact"), (Fraction(1, 8),))
        assert sp.simplify(value - sp.sqrt(2) / 2) == 0

    def test_point_dimension_checked(self):
        """Test evaluation points need one coordinate per axis"""
        with pytest.raises(DimensionMismatchError):
            trig_eval(trig(2, ((1, 0), "sin", 1)), (0.1,))


class TestInnerProducts:
    """Test L2 inner products and Gram matrices"""

    def test_orthogonality_relations(self):
        """Test <1,1> = 1, <cos,cos> = <sin,sin> = 1/2 and <sin,cos> = 0"""
        one = trig(1, ((0,), "cos", 1), mode="exact")
        s = trig(1, ((1,), "sin", 1), mode="exact")
        c = trig(1, ((1,), "cos", 1), mode="exact")
        assert l2_inner(one, one) == 1
        assert l2_inner(s, s) == sp.Rational(1, 2)
        assert l2_inner(c, c) == sp.Rational(1, 2)
        assert l2_inner(s, c) == 0

    def test_inner_product_matches_quadrature(self):
        """Test the exact formula against a Riemann sum on 64 points"""
        rng = np.random.default_rng(3)
        f, g = _random_poly(rng), _random_poly(rng)
        nodes = (np.arange(64) / 64)[:, None]
        quadrature = float(np.mean(trig_eval_many(f, nodes) * trig_eval_many(g, nodes)))
        assert l2_inner(f, g) == pytest.approx(quadrature, abs=1e-12)

    def test_gram_matrix_exact(self, sin_cos_exact):
        """Test the Gram matrix of {sin, cos} is I/2"""
        assert gram_matrix(sin_cos_exact.basis, "exact") == sp.eye(2) / 2


class TestSpaces:
    """Test function space construction"""

    def test_dependent_basis_reports_index(self):
        """Test the 1-based index of the first dependent element"""
        s = trig(1, ((1,), "sin", 1))
        with pytest.raises(DependentBasisError) as excinfo:
            space_of(1, s, trig(1, ((1,), "cos", 1)), s.scale(2.0))
        assert excinfo.value.index == 3

    def test_zero_function_is_dependent(self):
        """Test a basis element canonicalized to zero is dependent"""
        with pytest.raises(DependentBasisError) as excinfo:
            space_of(1, trig(1, ((0,), "sin", 1)))
        assert excinfo.value.index == 1

    def test_component_count_checked(self):
        """Test basis functions need one polynomial per component"""
        with pytest.raises(DimensionMismatchError):
            make_space(Domain.torus(1, 2), [(trig(1, ((1,), "sin", 1)),)])

    def test_empty_basis_rejected(self):
        """Test an empty basis is invalid"""
        with pytest.raises(InvalidInputError):
            make_space(Domain.torus(1), [])

    def test_orthonormalize_exact(self, sin_cos_exact):
        """Test orthonormalization gives an identity Gram matrix"""
        ortho = orthonormalize(sin_cos_exact)
        assert gram_matrix(ortho.basis, "exact") == sp.eye(2)

    @pytest.mark.parametrize("seed", range(10))
    def test_orthonormalize_float(self, seed):
        """Test float orthonormalization of random spaces"""
        rng = np.random.default_rng(seed)
        space = space_of(1, *[_random_poly(rng, max_freq=5, terms=6) for _ in range(3)])
        ortho = orthonormalize(space)
        assert np.allclose(gram_matrix(ortho.basis, "float"), np.eye(3), atol=1e-10)

    def test_change_basis_singular_rejected(self, sin_cos_space):
        """Test a singular basis change is reported as dependence"""
        with pytest.raises(DependentBasisError):
            change_basis(sin_cos_space, [[1.0, 2.0], [2.0, 4.0]])
