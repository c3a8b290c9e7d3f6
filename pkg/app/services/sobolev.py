import logging
import math
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy as sp
from scipy import linalg

from app.core.config import EngineConfig, get_settings
from app.core.errors import DependentBasisError, DimensionMismatchError, InvalidInputError
from app.core.scalars import ScalarMode, is_zero, normalize, two_pi, zero
from app.models.cover import Arc, ChartCover
from app.models.domain import FunctionSpace
from app.models.multiindex import MultiIndex, multi_indices_of_degree
from app.models.trigpoly import TrigPoly
from app.services import bumps
from app.services.funcspace import gram_matrix, l2_inner, partial_multi, trig_eval_many

logger = logging.getLogger(__name__)


def sobolev_weight(freq: Sequence[int], k: int, mode: ScalarMode = "float"):
    """w_k(m) = sum_{j<=k} (2pi)^{2j} sum_{|I|=j} prod_a m_a^{2 I_a}."""
    if k < 0:
        raise InvalidInputError("Sobolev order must be non-negative.")
    n = len(freq)
    factor = two_pi(mode) ** 2
    total = zero(mode)
    for j in range(k + 1):
        inner = sum(
            math.prod(int(m) ** (2 * e) for m, e in zip(freq, index.entries))
            for index in multi_indices_of_degree(n, j)
        )
        total += factor ** j * inner
    return normalize(total, mode)


def sobolev_inner(f: TrigPoly, g: TrigPoly, k: int):
    """<f, g>_{2,k} = sum_{|I|<=k} <d^I f, d^I g>_{L2}, evaluated through the frequency weights."""
    if f.dimension != g.dimension:
        raise DimensionMismatchError(f.dimension, g.dimension)
    if k < 0:
        raise InvalidInputError("Sobolev order must be non-negative.")
    mode = f.mode if f.mode == g.mode else "float"
    other = g.to_mode(mode).as_dict()
    total = zero(mode)
    for (freq, phase), coeff in f.to_mode(mode).terms:
        if (freq, phase) in other:
            weight = l2_inner(
                TrigPoly(f.dimension, (((freq, phase), coeff),), mode),
                TrigPoly(f.dimension, (((freq, phase), other[(freq, phase)]),), mode),
            )
            total += weight * sobolev_weight(freq, k, mode)
    return normalize(total, mode)


def sobolev_inner_explicit(f: TrigPoly, g: TrigPoly, k: int):
    """Same value by differentiating term by term; kept as the cross-check of the weighted form."""
    mode = f.mode
    total = zero(mode)
    for j in range(k + 1):
        for index in multi_indices_of_degree(f.dimension, j):
            total += l2_inner(partial_multi(f, index), partial_multi(g, index))
    return normalize(total, mode)


def make_arc_cover(arcs: Sequence[Arc], quadrature: int = None) -> ChartCover:
    """
    Tabulate pi_i = b_i / sum b on Q nodes, b_i(x) = B(dist(x, c_i) / r_i).

    Raises InvalidInputError when Q < 64 or some node lies in no arc.
    """
    quadrature = quadrature or get_settings().quadrature
    if quadrature < EngineConfig.MIN_QUADRATURE:
        raise InvalidInputError(
            f"Quadrature resolution must be at least {EngineConfig.MIN_QUADRATURE}, got {quadrature}."
        )
    if not arcs:
        raise InvalidInputError("A chart cover needs at least one arc.")
    for arc in arcs:
        if arc.radius <= 0:
            raise InvalidInputError(f"Arc radius must be positive, got {arc.radius}.")
    nodes = np.arange(quadrature) / quadrature
    raw = np.array([bumps.plateau(bumps.circle_distance(nodes, float(a.center)) / a.radius) for a in arcs])
    total = raw.sum(axis=0)
    if np.any(total <= 0):
        uncovered = nodes[np.argmax(total <= 0)]
        raise InvalidInputError(f"Arcs do not cover the circle (first gap near x={uncovered:.6f}).")
    return ChartCover(tuple(arcs), quadrature, raw / total)


def whole_circle_cover(quadrature: int = None) -> ChartCover:
    return make_arc_cover([Arc(Fraction(0), 1.0)], quadrature)


def sobolev_inner_cover(f: TrigPoly, g: TrigPoly, k: int, cover: ChartCover) -> float:
    """
    sum_i <pi_i f, pi_i g>_{2,k} on the circle, composite trapezoid on Q nodes.
    Derivatives of pi_i come from FFT differentiation; (pi_i f)^(j) by Leibniz.
    """
    if f.dimension != 1 or g.dimension != 1:
        raise InvalidInputError("Cover-based Sobolev products are implemented on the circle only.")
    if k < 0:
        raise InvalidInputError("Sobolev order must be non-negative.")
    q = cover.quadrature
    nodes = (np.arange(q) / q)[:, None]
    f_derivs = [trig_eval_many(partial_multi(f.to_mode("float"), MultiIndex((j,))), nodes) for j in range(k + 1)]
    g_derivs = [trig_eval_many(partial_multi(g.to_mode("float"), MultiIndex((j,))), nodes) for j in range(k + 1)]
    total = 0.0
    for weights in cover.partition:
        pi_derivs = [bumps.spectral_derivative(weights, j) for j in range(k + 1)]
        for j in range(k + 1):
            pf = sum(math.comb(j, l) * pi_derivs[l] * f_derivs[j - l] for l in range(j + 1))
            pg = sum(math.comb(j, l) * pi_derivs[l] * g_derivs[j - l] for l in range(j + 1))
            total += float(np.sum(pf * pg)) / q
    return total


def sobolev_gram(space: FunctionSpace, k: int):
    return gram_matrix(space.basis, space.mode, inner=lambda a, b: sobolev_inner(a, b, k))


def norm_equivalence_constant(space: FunctionSpace, k: int):
    """
    C = max ||f||_{2,k} over L2-unit f in S: sqrt of the top generalized
    eigenvalue of (G_k, G_0). Exact when G_0^{-1} G_k is diagonal in exact mode.
    """
    if k < 1:
        raise InvalidInputError("Norm-equivalence constant needs k >= 1.")
    g0 = gram_matrix(space.basis, space.mode)
    gk = sobolev_gram(space, k)
    if space.mode == "exact":
        if is_zero(g0.det(), "exact"):
            raise DependentBasisError()
        ratio = (g0.inv() * gk).applyfunc(sp.expand)
        if ratio.is_diagonal():
            top = max((ratio[i, i] for i in range(ratio.shape[0])), key=lambda v: float(v))
            return sp.sqrt(top)
        g0 = np.array(g0.evalf(30).tolist(), dtype=float)
        gk = np.array(gk.evalf(30).tolist(), dtype=float)
    g0 = 0.5 * (g0 + g0.T)
    gk = 0.5 * (gk + gk.T)
    try:
        eigenvalues = linalg.eigh(gk, g0, eigvals_only=True)
    except linalg.LinAlgError as exc:
        raise DependentBasisError() from exc
    return math.sqrt(float(eigenvalues[-1]))


def mode_ratio(m: int, k: int) -> float:
    """||sin 2pi m x||_{2,k} / ||sin 2pi m x||_2 (the constant mode gives 1)."""
    return math.sqrt(float(sobolev_weight((m,), k)))


def mode_divergence(k: int, m_max: int) -> list[float]:
    """Ratios for m = 1..m_max; strictly increasing and unbounded in m."""
    if k < 1:
        raise InvalidInputError("Mode divergence needs k >= 1.")
    if m_max < 2:
        raise InvalidInputError("Mode divergence needs m_max >= 2.")
    return [mode_ratio(m, k) for m in range(1, m_max + 1)]


def dimension_certificate(space: FunctionSpace, k: int) -> dict:
    """Finite-dimension certificate: N, the constant C and the largest frequency present."""
    constant = norm_equivalence_constant(space, k)
    return {
        "dimension": space.size,
        "k": k,
        "constant": constant,
        "max_frequency": space.max_frequency(),
        "bound": float(constant),
    }


def random_trig_poly(rng: np.random.Generator, max_freq: int = 4, terms: int = 4) -> TrigPoly:
    items = []
    for _ in range(terms):
        m = int(rng.integers(0, max_freq + 1))
        phase = "cos" if m == 0 else str(rng.choice(["cos", "sin"]))
        items.append(((m,), phase, float(rng.normal())))
    return TrigPoly.from_terms(1, items, "float")


def measure_cover_equivalence(cover: ChartCover, k: int, trials: int = 50, seed: int = 0) -> dict:
    """
    Empirical ratio interval of cover-based over global squared norms on
    random trigonometric polynomials. K is the smallest value with every
    ratio in [1/K, K].
    """
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        f = random_trig_poly(rng)
        if f.is_zero:
            continue
        ratios.append(sobolev_inner_cover(f, f, k, cover) / float(sobolev_inner(f, f, k)))
    low, high = min(ratios), max(ratios)
    bound = max(high, 1.0 / low)
    logger.info("Cover equivalence over %d samples: ratios in [%.6g, %.6g], K=%.6g", len(ratios), low, high, bound)
    return {"min_ratio": low, "max_ratio": high, "K": bound, "trials": len(ratios)}
