# tests/test_services/test_witness.py
import math

import pytest

from app.core.errors import InvalidInputError, KinkError, WitnessRangeError
from app.models.expression import Abs, Var
from app.services.pipeline import witness_summary
from app.services.witness import (
    build_counterexample,
    bump_layout,
    default_step,
    jet_arith,
    jets_at,
    refute_operator,
    richardson_derivative,
    witness_jets,
)
from tests.utils.factories import trig


@pytest.fixture
def counterexample():
    return build_counterexample(6)


class TestCounterexample:
    """Test the bump-sum function and its jets"""

    @pytest.mark.parametrize("n_max", [1, 9])
    def test_range(self, n_max):
        """Test n_max outside 2..8 is rejected"""
        with pytest.raises(WitnessRangeError):
            build_counterexample(n_max)

    def test_supports_are_disjoint(self):
        """Test neighbouring bumps never overlap"""
        layout = bump_layout(8)
        for (_, a, eps), (_, b, delta) in zip(layout, layout[1:]):
            assert float(a - b) > eps + delta

    def test_jets_at_centers(self, counterexample):
        """Test f^(k)(1/n) = 0 for k < n and f^(n)(1/n) = n!"""
        jets = witness_jets(counterexample)
        assert sorted(jets) == [2, 3, 4, 5, 6]
        for n, derivatives in jets.items():
            assert derivatives[n] == pytest.approx(math.factorial(n))
            assert all(abs(v) < 1e-12 for v in derivatives[:n])

    def test_zero_between_bumps(self, counterexample):
        """Test the function vanishes away from every bump"""
        assert counterexample(0.9) == 0.0
        assert jets_at(counterexample, 0.9, 3).derivatives() == [0.0, 0.0, 0.0, 0.0]

    def test_jets_defined_everywhere(self, counterexample):
        """Test jets exist across every bump, including its center and edges"""
        for i in range(2001):
            assert all(math.isfinite(v) for v in jets_at(counterexample, i / 2000, 3).derivatives())

    def test_local_power(self, counterexample):
        """Test f = (x - 1/2)^2 on the inner half of the first bump"""
        assert counterexample(0.51) == pytest.approx(1e-4)

    def test_negative_jet_order(self):
        """Test negative jet orders"""
        with pytest.raises(InvalidInputError):
            jet_arith(Var(), 0.0, -1)

    def test_kink(self):
        """Test jet_arith rejects |x| at its kink"""
        with pytest.raises(KinkError):
            jet_arith(Abs(Var()), 0.0, 2)


class TestRefutation:
    """Test E f(1/d) for operators of order d"""

    def test_constant_coefficients(self, counterexample):
        """Test sum_k f^(k)(1/3) = 3!"""
        result = refute_operator(3, [1.0, 1.0, 1.0, 1.0], counterexample)
        assert result.value == pytest.approx(6.0)
        assert result.certified
        assert result.bound < 6.0

    def test_variable_coefficients(self, counterexample):
        """Test trig and callable coefficients are evaluated at 1/d"""
        leading = trig(1, ((0,), "cos", 2))
        result = refute_operator(2, [lambda x: 5.0, math.sin, leading], counterexample)
        assert result.leading == pytest.approx(2.0)
        assert result.value == pytest.approx(4.0)
        assert result.certified

    def test_vanishing_leading_coefficient(self, counterexample):
        """Test a_d(1/d) = 0 is rejected"""
        with pytest.raises(InvalidInputError):
            refute_operator(2, [1.0, 1.0, 0.0], counterexample)

    def test_wrong_coefficient_count(self, counterexample):
        """Test a_0..a_d must all be given"""
        with pytest.raises(InvalidInputError):
            refute_operator(3, [1.0, 1.0], counterexample)

    def test_order_beyond_bumps(self, counterexample):
        """Test d must not exceed n_max"""
        with pytest.raises(WitnessRangeError):
            refute_operator(7, [1.0] * 8, counterexample)


class TestFiniteDifferences:
    """Test Richardson-extrapolated central differences"""

    def test_sine(self):
        """Test the second derivative of sin"""
        assert richardson_derivative(math.sin, 0.3, 2, 1e-2) == pytest.approx(-math.sin(0.3), rel=1e-6)

    def test_order_zero(self):
        """Test order 0 is plain evaluation"""
        assert richardson_derivative(math.cos, 0.0, 0, 0.1) == 1.0

    def test_counterexample_derivative(self, counterexample):
        """Test the third derivative at 1/3 matches 3!"""
        x = 1.0 / 3
        step = default_step(counterexample, x, 3)
        assert richardson_derivative(counterexample, x, 3, step) == pytest.approx(6.0, rel=1e-4)

    def test_summary(self):
        """Test the witness summary cross-checks the refutation"""
        report = witness_summary(6, order=4)
        assert sorted(report.jets) == ["2", "3", "4", "5", "6"]
        assert report.centers["4"] == "1/4"
        refutation = report.refutation
        assert refutation["certified"]
        assert refutation["value"] == pytest.approx(24.0)
        assert refutation["finite_difference"] == pytest.approx(24.0, rel=1e-3)
