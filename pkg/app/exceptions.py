"""
Custom exceptions for the diffeo-trees library
"""

from typing import Any, Dict, List, Optional


class DiffeoError(Exception):
    """Base exception for diffeo-trees"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class UnknownIndeterminate(DiffeoError):
    """Raised when a variable name is outside the closed alphabet"""

    def __init__(self, name: str):
        super().__init__(
            f"Unknown indeterminate '{name}'",
            {"name": name, "alphabet": "a1.., M, s_i_j (i<j), l3.., x1.."},
        )


class PolynomialParseError(DiffeoError):
    """Raised when a polynomial string does not follow the canonical grammar"""

    def __init__(self, text: str, position: int, reason: str):
        super().__init__(
            f"Cannot parse polynomial at position {position}: {reason}",
            {"text": text, "position": position, "reason": reason},
        )


class MissingAssignment(DiffeoError):
    """Raised when evaluation meets an indeterminate with no assigned value"""

    def __init__(self, indeterminate: str):
        self.indeterminate = indeterminate
        super().__init__(
            f"No value assigned to '{indeterminate}'", {"indeterminate": indeterminate}
        )


class SeriesError(DiffeoError):
    """Base for truncated power series errors"""


class NonzeroConstantTerm(SeriesError):
    """Raised when the inner series of a composition has a constant term"""

    def __init__(self, constant: str):
        super().__init__(
            "Inner series must have zero constant term", {"constant": constant}
        )


class OrderMismatch(SeriesError):
    """Raised when two series must share a truncation order and do not"""

    def __init__(self, left: int, right: int):
        super().__init__(
            f"Truncation orders differ: {left} != {right}",
            {"left": left, "right": right},
        )


class OrderUnderflow(SeriesError):
    """Raised when an operation would push the truncation order below zero"""

    def __init__(self, operation: str, order: int):
        super().__init__(
            f"Cannot apply {operation} to a series truncated at order {order}",
            {"operation": operation, "order": order},
        )


class NotInvertible(SeriesError):
    """Raised when a series has no compositional inverse in the supported sense"""

    def __init__(self, reason: str, linear: Optional[str] = None):
        details: Dict[str, Any] = {"reason": reason}
        if linear is not None:
            details["linear_coefficient"] = linear
        super().__init__(f"Series is not invertible: {reason}", details)


class SeriesKindMismatch(SeriesError):
    """Raised when an EGF and an OGF are combined directly"""

    def __init__(self, left: str, right: str):
        super().__init__(
            f"Series kinds differ: {left} vs {right}", {"left": left, "right": right}
        )


class BellArgumentError(DiffeoError):
    """Raised when a partial Bell polynomial needs more arguments than supplied"""

    def __init__(self, n: int, k: int, needed: int, available: int):
        super().__init__(
            f"B_{{{n},{k}}} needs x_1..x_{needed}, only {available} supplied",
            {"n": n, "k": k, "needed": needed, "available": available},
        )


class ZeroDenominator(DiffeoError):
    """Raised when a propagator denominator vanishes at a kinematic point"""

    def __init__(self, legs: List[int]):
        super().__init__(
            f"Propagator denominator vanishes for legs {legs}", {"legs": legs}
        )


class KinematicSamplingError(DiffeoError):
    """Raised when no valid kinematic point was found within the resample budget"""

    def __init__(self, n: int, attempts: int):
        super().__init__(
            f"No valid kinematic point for n={n} after {attempts} attempts",
            {"n": n, "attempts": attempts},
        )


class ConfigurationError(DiffeoError):
    """Raised when there's a configuration issue"""

    def __init__(self, setting_name: str, message: str):
        details = {"setting_name": setting_name}
        super().__init__(
            f"Configuration error for '{setting_name}': {message}", details
        )


class VerificationFailure(DiffeoError):
    """Raised when a verification report contains failing checks"""

    def __init__(self, suite: str, failures: List[Dict[str, Any]]):
        super().__init__(
            f"Suite '{suite}' failed {len(failures)} check(s)",
            {"suite": suite, "failures": failures[:10]},
        )
