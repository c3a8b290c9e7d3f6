"""
Error hierarchy for the annihilator engine.

Every error carries an ``exit_code`` and a ``detail`` message so the CLI can
translate it into the documented process exit status:

    0 success, 1 verification failure, 2 invalid input, 3 construction inconclusive
"""

from typing import Optional, Sequence


class EngineError(Exception):
    """Base class for every engine failure."""

    exit_code: int = 3

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidInputError(EngineError, ValueError):
    exit_code = 2


class DimensionMismatchError(InvalidInputError):
    def __init__(self, expected: int, got: int, what: str = "operand"):
        super().__init__(f"Dimension mismatch: expected {expected}, got {got} ({what}).")
        self.expected = expected
        self.got = got


class ModeMismatchError(InvalidInputError):
    def __init__(self, left: str, right: str):
        super().__init__(f"Scalar mode mismatch: {left} vs {right}.")


class GridMismatchError(InvalidInputError):
    pass


class DependentBasisError(InvalidInputError):
    def __init__(self, index: Optional[int] = None):
        if index is None:
            detail = "Basis is linearly dependent (singular Gram matrix)."
        else:
            detail = f"Basis is linearly dependent at index {index}."
        super().__init__(detail)
        self.index = index


class VerificationError(EngineError):
    exit_code = 1


class ResidualViolation(VerificationError):
    def __init__(self, residual: float, tol: float, point: Sequence[float], component: int, basis_index: int):
        super().__init__(
            f"Residual {residual:.3e} exceeds tolerance {tol:.1e} "
            f"at component {component}, x={tuple(point)}, basis function {basis_index + 1}."
        )
        self.residual = residual
        self.tol = tol
        self.point = tuple(point)
        self.component = component
        self.basis_index = basis_index


class ConstructionError(EngineError):
    exit_code = 3


class NonConstantRankError(ConstructionError):
    def __init__(self, ranks: Sequence[int]):
        super().__init__(
            f"Rank r(x) is not constant on the grid (values {sorted(set(ranks))}); "
            "use the stratified construction."
        )


class CoverError(ConstructionError):
    pass


class PatchSingularityError(ConstructionError):
    pass


class SpanResidualError(ConstructionError):
    def __init__(self, residual: float, tol: float, where: str = ""):
        suffix = f" ({where})" if where else ""
        super().__init__(
            f"Chosen functionals do not span V_x: residual {residual:.3e} > {tol:.1e}{suffix}."
        )
        self.residual = residual
        self.tol = tol


class StratificationError(ConstructionError):
    pass


class WitnessRangeError(InvalidInputError):
    pass


class KinkError(ValueError):
    """Jet requested at a point where an absolute value is not differentiable."""


class SampledFallbackWarning(UserWarning):
    """An exact symbolic object was replaced by grid samples."""
