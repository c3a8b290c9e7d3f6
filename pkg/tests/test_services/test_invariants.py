# tests/test_services/test_invariants.py
from fractions import Fraction

import numpy as np
import pytest

from app.models.domain import Domain
from app.models.trigpoly import TrigPoly
from app.services.funcspace import l2_inner, make_space, trig_eval, trig_eval_exact, trig_eval_many
from app.services.pointwise import DerivativeTable, jet_matrix, rank_and_annihilator
from app.services.sobolev import sobolev_inner, sobolev_inner_explicit

CASES = 500
DENOMINATORS = (1, 2, 3, 4, 6, 8, 12)


def random_items(rng, dimension, max_freq=3, count=4, exact=False):
    """(freq, phase, coeff) triples with signed frequencies and repeated keys allowed."""
    items = []
    for _ in range(count):
        freq = tuple(int(m) for m in rng.integers(-max_freq, max_freq + 1, size=dimension))
        phase = str(rng.choice(["cos", "sin"]))
        if exact:
            coeff = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))
        else:
            coeff = float(rng.normal())
        items.append((freq, phase, coeff))
    return items


def random_poly(rng, dimension, exact=False, **kwargs):
    mode = "exact" if exact else "float"
    return TrigPoly.from_terms(dimension, random_items(rng, dimension, exact=exact, **kwargs), mode)


def random_rational_point(rng, dimension):
    return tuple(
        Fraction(int(rng.integers(0, q)), q) for q in (int(rng.choice(DENOMINATORS)) for _ in range(dimension))
    )


def sample_grid(dimension, size):
    axes = np.meshgrid(*([np.arange(size) / size] * dimension), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=1)


def random_space(rng, dimension, count, exact=False):
    """Triangular combinations of distinct single terms, so the basis is independent."""
    mode = "exact" if exact else "float"
    keys = []
    while len(keys) < count:
        freq = tuple(int(m) for m in rng.integers(0, 3, size=dimension))
        phase = "sin" if any(freq) and rng.random() < 0.5 else "cos"
        if (freq, phase) not in keys:
            keys.append((freq, phase))
    basis = []
    for i, (freq, phase) in enumerate(keys):
        if exact:
            items = [(freq, phase, Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4))))]
            items += [(f, p, Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))) for f, p in keys[:i]]
        else:
            items = [(freq, phase, 1.0 + rng.random())]
            items += [(f, p, float(rng.normal())) for f, p in keys[:i]]
        basis.append((TrigPoly.from_terms(dimension, items, mode),))
    return make_space(Domain.torus(dimension), basis, mode)


class TestCanonicalFormInvariants:
    """Test canonical form on random polynomials"""

    @pytest.mark.parametrize("dimension", [1, 2, 3])
    def test_idempotent(self, dimension):
        """Test re-canonicalizing canonical terms changes nothing"""
        rng = np.random.default_rng(dimension)
        for _ in range(CASES):
            f = random_poly(rng, dimension, count=6)
            again = TrigPoly.from_terms(dimension, f.items())
            assert again.terms == f.terms
            assert list(f.keys) == sorted(set(f.keys))
            assert all(phase == "cos" or any(freq) for freq, phase in f.keys)
            assert all(next((m for m in freq if m), 1) > 0 for freq, _ in f.keys)

    def test_canonical_form_preserves_values(self):
        """Test flipping and merging do not change point values"""
        rng = np.random.default_rng(11)
        for _ in range(CASES):
            items = random_items(rng, 2, count=5)
            f = TrigPoly.from_terms(2, items)
            x = rng.random(2)
            direct = sum(
                c * (np.cos if p == "cos" else np.sin)(2 * np.pi * float(np.dot(freq, x))) for freq, p, c in items
            )
            assert trig_eval(f, x) == pytest.approx(direct, abs=1e-9)

    def test_exact_and_float_canonical_forms_agree(self):
        """Test converting an exact polynomial to float keeps its keys"""
        rng = np.random.default_rng(12)
        for _ in range(CASES):
            f = random_poly(rng, 2, exact=True, count=5)
            g = f.to_mode("float")
            assert g.keys == f.keys
            assert g == f


class TestParseval:
    """Test l2_inner against coefficients and quadrature"""

    @pytest.mark.parametrize("dimension", [1, 2])
    def test_norm_from_coefficients(self, dimension):
        """Test ||f||^2 is the weighted sum of squared coefficients"""
        rng = np.random.default_rng(20 + dimension)
        for _ in range(CASES):
            f = random_poly(rng, dimension, count=5)
            expected = sum(c * c * (1.0 if not any(freq) else 0.5) for freq, _, c in f.items())
            assert l2_inner(f, f) == pytest.approx(expected, rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("dimension", [1, 2])
    def test_inner_matches_grid_mean(self, dimension):
        """Test <f, g> equals the grid mean of f g once the grid resolves every product frequency"""
        rng = np.random.default_rng(30 + dimension)
        coords = sample_grid(dimension, 16)
        for _ in range(CASES):
            f, g = random_poly(rng, dimension), random_poly(rng, dimension)
            mean = float(np.mean(trig_eval_many(f, coords) * trig_eval_many(g, coords)))
            assert l2_inner(f, g) == pytest.approx(mean, abs=1e-10)


class TestSobolevInvariants:
    """Test the H^k inner product on random polynomials"""

    def test_symmetric(self):
        """Test <f, g>_k = <g, f>_k"""
        rng = np.random.default_rng(40)
        for _ in range(CASES):
            f, g = random_poly(rng, 2), random_poly(rng, 2)
            k = int(rng.integers(0, 4))
            assert sobolev_inner(f, g, k) == pytest.approx(sobolev_inner(g, f, k), rel=1e-12, abs=1e-12)

    def test_bilinear(self):
        """Test linearity in the first argument"""
        rng = np.random.default_rng(41)
        for _ in range(CASES):
            f, g, h = (random_poly(rng, 1) for _ in range(3))
            a, b = rng.normal(size=2)
            k = int(rng.integers(0, 4))
            left = sobolev_inner(f.scale(a) + g.scale(b), h, k)
            right = a * sobolev_inner(f, h, k) + b * sobolev_inner(g, h, k)
            assert left == pytest.approx(right, rel=1e-9, abs=1e-6)

    def test_monotone_in_k(self):
        """Test ||f||_k never decreases as k grows and ||f||_0 is the L^2 norm"""
        rng = np.random.default_rng(42)
        for _ in range(CASES):
            f = random_poly(rng, int(rng.integers(1, 4)))
            norms = [sobolev_inner(f, f, k) for k in range(4)]
            assert norms[0] == pytest.approx(l2_inner(f, f), rel=1e-12, abs=1e-14)
            assert all(lo <= hi * (1 + 1e-12) for lo, hi in zip(norms, norms[1:]))

    def test_weighted_form_matches_derivatives(self):
        """Test the frequency-weight form against term-by-term differentiation"""
        rng = np.random.default_rng(43)
        for _ in range(CASES):
            f, g = random_poly(rng, 2, max_freq=2), random_poly(rng, 2, max_freq=2)
            k = int(rng.integers(0, 3))
            assert sobolev_inner(f, g, k) == pytest.approx(sobolev_inner_explicit(f, g, k), rel=1e-9, abs=1e-9)


class TestJetRankInvariants:
    """Test pointwise jet ranks on random spaces"""

    def test_rank_non_decreasing_in_k(self):
        """Test r_k <= r_{k+1} <= N at random points"""
        rng = np.random.default_rng(50)
        for _ in range(CASES):
            dimension = int(rng.integers(1, 3))
            space = random_space(rng, dimension, int(rng.integers(1, 4)))
            table = DerivativeTable(space)
            point = tuple(float(c) for c in rng.random(dimension))
            ranks = [rank_and_annihilator(jet_matrix(space, point, k, table))[0] for k in range(4)]
            assert all(lo <= hi for lo, hi in zip(ranks, ranks[1:]))
            assert ranks[-1] <= len(space.basis)

    def test_rank_plus_annihilator_is_row_count(self):
        """Test r + dim(annihilator) equals the number of jet rows"""
        rng = np.random.default_rng(51)
        for _ in range(CASES):
            space = random_space(rng, 2, int(rng.integers(1, 4)))
            jets = jet_matrix(space, tuple(float(c) for c in rng.random(2)), 2)
            rank, annihilator = rank_and_annihilator(jets)
            assert rank + len(annihilator.vectors) == len(jets.indices)


class TestExactOracle:
    """Test float mode against exact mode on rational data"""

    def test_inner_products(self):
        """Test float L^2 and H^k inner products match the exact values"""
        rng = np.random.default_rng(60)
        for _ in range(CASES):
            f, g = random_poly(rng, 2, exact=True), random_poly(rng, 2, exact=True)
            k = int(rng.integers(0, 3))
            fl, gl = f.to_mode("float"), g.to_mode("float")
            assert l2_inner(fl, gl) == pytest.approx(float(l2_inner(f, g)), rel=1e-12, abs=1e-12)
            assert sobolev_inner(fl, gl, k) == pytest.approx(float(sobolev_inner(f, g, k)), rel=1e-10, abs=1e-9)

    def test_point_values(self):
        """Test float evaluation matches symbolic values at rational points"""
        rng = np.random.default_rng(61)
        for _ in range(CASES):
            dimension = int(rng.integers(1, 3))
            f = random_poly(rng, dimension, exact=True, count=3)
            point = random_rational_point(rng, dimension)
            exact = complex(trig_eval_exact(f, point).evalf(30))
            assert trig_eval(f.to_mode("float"), [float(c) for c in point]) == pytest.approx(exact.real, abs=1e-9)

    def test_jet_ranks(self):
        """Test float jet ranks match exact ranks at rational points"""
        rng = np.random.default_rng(62)
        for _ in range(CASES // 5):
            exact_space = random_space(rng, 1, int(rng.integers(1, 3)), exact=True)
            float_space = make_space(exact_space.domain, [tuple(p.to_mode("float") for p in f) for f in exact_space.basis])
            point = random_rational_point(rng, 1)
            for k in range(3):
                exact_rank, _ = rank_and_annihilator(jet_matrix(exact_space, point, k))
                float_jets = jet_matrix(float_space, [float(c) for c in point], k)
                if exact_rank == 0:
                    # a vanishing jet leaves only rounding noise in float mode
                    assert np.max(np.abs(float_jets.values)) <= 1e-9
                    continue
                assert rank_and_annihilator(float_jets)[0] == exact_rank
