# tests/test_services/test_constant_rank.py
import dataclasses
import math

import numpy as np
import pytest
import sympy as sp

from app.core.errors import CoverError, InvalidInputError, NonConstantRankError, ResidualViolation
from app.models.grid import GridSpec
from app.models.multiindex import MultiIndex
from app.services.constant_rank import (
    RankField,
    build_cover,
    construct_constant_rank,
    fit_constant_coefficients,
    glue_and_verify,
    partition_of_unity,
    patch_coefficients,
    rank_field,
)
from app.services.diffop import laplacian_power, reference_operator, residual_table
from tests.utils.factories import space_of, trig

TWO_PI = 2 * math.pi
EVAL = MultiIndex((0,))
D1 = MultiIndex((1,))


@pytest.fixture
def one_sin_exact():
    return space_of(1, trig(1, ((0,), "cos", 1), mode="exact"), trig(1, ((1,), "sin", 1), mode="exact"), mode="exact")


class TestRankField:
    """Test r(x) and q_min(x) on grids"""

    def test_sin_cos_constant(self, sin_cos_space):
        """Test {sin, cos} has rank 2 and order 1 everywhere"""
        field = rank_field(sin_cos_space, GridSpec(1, 64), 1)
        assert field.constant_rank
        assert field.constant_order
        assert field.histogram() == {"2": 64}
        assert set(field.q_min.tolist()) == {1}

    def test_one_sin_order_jumps(self, one_sin_space):
        """Test q_min rises to 2 exactly where cos vanishes"""
        field = rank_field(one_sin_space, GridSpec(1, 256), 2)
        assert field.constant_rank
        assert not field.constant_order
        assert np.flatnonzero(field.q_min == 2).tolist() == [64, 192]

    def test_exact_rank_field(self, one_sin_exact):
        """Test the exact rank path agrees on a coarse grid"""
        field = rank_field(one_sin_exact, GridSpec(1, 8), 2, exact=True)
        assert set(field.ranks.tolist()) == {2}
        assert np.flatnonzero(field.q_min == 2).tolist() == [2, 6]

    def test_constant_space(self, constant_space):
        """Test constants have rank 1 and order 0"""
        field = rank_field(constant_space, GridSpec(1, 16), 0)
        assert field.histogram() == {"1": 16}
        assert set(field.q_min.tolist()) == {0}


class TestCover:
    """Test independence patches grown from seeds"""

    def test_empty_seeds(self, sin_cos_space):
        """Test an empty seed set is rejected"""
        with pytest.raises(CoverError):
            build_cover(sin_cos_space, 1, [], GridSpec(1, 32))

    def test_non_constant_rank(self, sin_cos_space):
        """Test a rank field with two values is refused"""
        grid = GridSpec(1, 4)
        field = RankField(grid, 1, np.array([2, 2, 1, 2]), np.ones(4, dtype=int), np.ones(4))
        with pytest.raises(NonConstantRankError):
            build_cover(sin_cos_space, 1, range(4), grid, field=field)

    def test_sin_cos_single_patch(self, sin_cos_space):
        """Test {sin, cos} is covered by one whole-circle patch"""
        patches = build_cover(sin_cos_space, 1, range(64), GridSpec(1, 64))
        assert len(patches) == 1
        assert patches[0].whole
        assert patches[0].span.indices == (EVAL, D1)

    def test_one_sin_needs_several_patches(self, one_sin_space):
        """Test the zeros of cos split the circle"""
        patches = build_cover(one_sin_space, 2, range(256), GridSpec(1, 256))
        assert len(patches) >= 2
        assert all(not p.whole for p in patches)

    def test_single_seed_leaves_gaps(self, one_sin_space):
        """Test a seed set that cannot reach every point"""
        with pytest.raises(CoverError):
            build_cover(one_sin_space, 2, [0], GridSpec(1, 256))


class TestPatchCoefficients:
    """Test coefficient fields on patches"""

    @pytest.mark.parametrize("method", ["direct", "dual_frame"])
    def test_sin_cos_fields(self, sin_cos_space, method):
        """Test d^2 = -(2 pi)^2 eval on the whole circle"""
        grid = GridSpec(1, 64)
        patch = build_cover(sin_cos_space, 1, range(64), grid)[0]
        fields = patch_coefficients(sin_cos_space, patch, reference_operator(1, 2), grid, method)
        assert fields.values.shape == (64, 2)
        assert np.allclose(fields.values[:, 0], -TWO_PI ** 2, atol=1e-9)
        assert np.allclose(fields.values[:, 1], 0.0, atol=1e-9)
        assert fields.method == method

    def test_unknown_method(self, sin_cos_space):
        """Test unknown coefficient methods are rejected"""
        grid = GridSpec(1, 16)
        patch = build_cover(sin_cos_space, 1, range(16), grid)[0]
        with pytest.raises(InvalidInputError):
            patch_coefficients(sin_cos_space, patch, reference_operator(1, 2), grid, "guess")

    def test_partition_sums_to_one(self, one_sin_space):
        """Test the normalized bumps sum to one at every grid point"""
        grid = GridSpec(1, 256)
        partition = partition_of_unity(build_cover(one_sin_space, 2, range(256), grid), grid)
        assert np.allclose(partition.weights.sum(axis=0), 1.0, atol=1e-12)
        assert np.all(partition.weights >= 0)


class TestConstantRankConstruction:
    """Test the glued construction end to end"""

    def test_one_sin_fourth_order(self, one_sin_space):
        """Test d^4 minus glued fields annihilates {1, sin}"""
        grid = GridSpec(1, 256)
        result = construct_constant_rank(one_sin_space, reference_operator(1, 4), grid, 2)
        assert len(result.patches) >= 2
        assert result.partition_error <= 1e-12
        assert result.glued.residual_sup <= 1e-9
        assert result.glued.triangle_ok
        assert result.glued.symbol_report.passed
        assert result.glued.operator.coefficient(MultiIndex((4,))).value == 1.0
        assert result.method_agreement <= 1e-9

    def test_residual_checked_on_grid(self, sin_cos_space):
        """Test the glued operator residual table"""
        grid = GridSpec(1, 64)
        result = construct_constant_rank(sin_cos_space, reference_operator(1, 2), grid, 1)
        assert np.max(residual_table(result.glued.operator, sin_cos_space.basis, grid)) <= 1e-9

    def test_residual_tolerance_scales_with_reference(self, sin_cos_space):
        """Test a residual above tol but below tol * sup |E f| is accepted"""
        grid = GridSpec(1, 64)
        reference = reference_operator(1, 4)
        result = construct_constant_rank(sin_cos_space, reference, grid, 1)
        shifted = [dataclasses.replace(f, values=f.values + 1e-10) for f in result.fields]
        glued = glue_and_verify(sin_cos_space, shifted, result.partition, reference, grid, tol=1e-11)
        assert 1e-11 < glued.residual_sup <= 1e-11 * TWO_PI ** 4

    def test_residual_violation_reports_scaled_tolerance(self, sin_cos_space):
        """Test a residual far above tol * sup |E f| is rejected"""
        grid = GridSpec(1, 64)
        reference = reference_operator(1, 4)
        result = construct_constant_rank(sin_cos_space, reference, grid, 1)
        shifted = [dataclasses.replace(f, values=f.values + 1e-6) for f in result.fields]
        with pytest.raises(ResidualViolation) as excinfo:
            glue_and_verify(sin_cos_space, shifted, result.partition, reference, grid, tol=1e-11)
        assert excinfo.value.tol == pytest.approx(1e-11 * TWO_PI ** 4, rel=1e-6)


class TestConstantFit:
    """Test operators with constant coefficients"""

    def test_sin_cos_float(self, sin_cos_space):
        """Test d^2 + (2 pi)^2 is found"""
        op = fit_constant_coefficients(sin_cos_space, reference_operator(1, 2), [EVAL, D1])
        assert op.coefficient(EVAL).value == pytest.approx(TWO_PI ** 2)
        assert np.max(residual_table(op, sin_cos_space.basis, GridSpec(1, 32))) <= 1e-9

    def test_sin_cos_exact(self, sin_cos_exact):
        """Test the exact constant is 4 pi^2"""
        op = fit_constant_coefficients(sin_cos_exact, reference_operator(1, 2, mode="exact"), [EVAL, D1])
        assert op.mode == "exact"
        assert sp.simplify(op.coefficient(EVAL).value - 4 * sp.pi ** 2) == 0
        assert op.coefficient(D1) is None

    def test_eigenspace_keeps_only_needed_terms(self, eigen_space_2d):
        """Test the float fit of the 2-d eigenspace is the bi-Laplacian minus (2 pi)^4 with no stray terms"""
        indices = [MultiIndex((0, 0)), MultiIndex((1, 0)), MultiIndex((0, 1)), MultiIndex((2, 0))]
        op = fit_constant_coefficients(eigen_space_2d, laplacian_power(2, 2), indices)
        assert [i for i in op.indices if i.degree < 4] == [MultiIndex((0, 0))]
        assert op.coefficient(MultiIndex((0, 0))).value == pytest.approx(-(TWO_PI ** 4))
        assert op.coefficient(MultiIndex((2, 0))) is None

    def test_no_constant_form(self, one_sin_space):
        """Test {1, sin} admits no constant lower-order correction of d^4 in {eval, d}"""
        assert fit_constant_coefficients(one_sin_space, reference_operator(1, 4), [EVAL, D1]) is None

    def test_index_at_reference_order(self, sin_cos_space):
        """Test fitted indices must stay below the reference order"""
        with pytest.raises(InvalidInputError):
            fit_constant_coefficients(sin_cos_space, reference_operator(1, 2), [MultiIndex((2,))])
