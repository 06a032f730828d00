"""
Combinatorial Legendre transform and rooted-tree inversion.

Sign convention (fixed here and relied on by every caller):

    T(x) = A(K(x)) - x K(x),  K = (A')^{-1},    LA(x) = T(-x)

For the action A = -(t^2/2 + a_1 t^3/3 + a_2 t^4/4 + ...) of a diffeomorphism F,
the n-th EGF coefficient of LA is b_{n-1}. T commutes with reflection, so
applying the transform twice gives A(-x).
"""

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from app.amplitudes import b_values
from app.bell import integer_partitions
from app.exactalg import ONE, ZERO, Polynomial, format_poly
from app.exceptions import NotInvertible, OrderMismatch
from app.logging_config import get_structured_logger
from app.models import CheckResult, Report, SeriesKind, build_report
from app.series import (
    Diffeomorphism,
    Series,
    compose,
    derive,
    invert,
    mul_t,
    reflect,
    scale,
    series_from_diffeo,
    to_egf,
    to_ogf,
    truncate,
)

logger = get_structured_logger(__name__)

RootedTree = Tuple["RootedTree", ...]
LEAF: RootedTree = ()


@dataclass(frozen=True)
class ActionSeries:
    """OGF with vanishing constant and linear terms and a nonzero quadratic term"""

    series: Series

    def __post_init__(self):
        coefficients = to_ogf(self.series).coefficients
        if len(coefficients) < 3:
            raise OrderMismatch(len(coefficients) - 1, 2)
        if not (coefficients[0].is_zero() and coefficients[1].is_zero()):
            raise NotInvertible("an action must start at the quadratic term")
        if coefficients[2].is_zero():
            raise NotInvertible("the quadratic coefficient of an action must not vanish")

    @property
    def truncation(self) -> int:
        return self.series.truncation


def build_A(F: Diffeomorphism, N: int) -> ActionSeries:
    """A = -(t^2/2 + a_1 t^3/3 + a_2 t^4/4 + ...), truncated at N, so that A' = -F."""
    coefficients = [ZERO, ZERO] + [
        F.coefficient(j).scale(Fraction(-1, j + 2)) for j in range(N - 1)
    ]
    return ActionSeries(Series(SeriesKind.OGF, tuple(coefficients)))


def _slope_inverse(A: Series, N: int) -> Series:
    # (A')^{-1} at order N: A' = c h with h tangent to the identity, then
    # (A')^{-1}(x) = h^{-1}(x / c)
    slope = truncate(derive(A), N)
    linear = slope.coefficient(1)
    if not linear.is_constant() or linear.is_zero():
        raise NotInvertible("derivative has no invertible linear part", format_poly(linear))
    c = linear.constant_term()
    h_inverse = invert(scale(slope, 1 / c))
    return Series(
        SeriesKind.OGF,
        tuple(coeff.scale(c ** -n) for n, coeff in enumerate(h_inverse.coefficients)),
    )


def legendre_transform(A: ActionSeries, N: int) -> Series:
    """
    LA(x) = T(-x) with T = A o (A')^{-1} - x (A')^{-1}, as an OGF truncated at N.

    Raises:
        OrderMismatch: if A is known to fewer than N+1 orders
        NotInvertible: if A' has no constant nonzero linear coefficient
    """
    if A.truncation < N + 1:
        raise OrderMismatch(A.truncation, N + 1)
    action = to_ogf(A.series)
    K = _slope_inverse(action, N)
    logger.debug("Legendre transform", order=N, slope=format_poly(K.coefficient(1)))
    return reflect(compose(truncate(action, N), K) - truncate(mul_t(K), N))


def tree_series(A: ActionSeries, N: int) -> Series:
    """LA as an EGF; coefficient n is b_{n-1} when A comes from build_A."""
    return to_egf(legendre_transform(A, N))


# -- rooted trees ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootedTreeProfile:
    """m_j = number of vertices with j+1 children, as sorted (j, m_j) pairs"""

    m: Tuple[Tuple[int, int], ...]

    @property
    def vertices(self) -> int:
        return sum(count for _, count in self.m)

    def monomial(self, F: Diffeomorphism) -> Polynomial:
        """prod (-a_j)^{m_j}"""
        term = ONE
        for j, count in self.m:
            term = term * (-F.coefficient(j)) ** count
        return term


def _leaf_splits(leaves: int) -> Iterator[Tuple[int, ...]]:
    for k in range(2, leaves + 1):
        yield from integer_partitions(leaves, k)


@lru_cache(maxsize=None)
def _rooted_trees(leaves: int) -> Tuple[RootedTree, ...]:
    if leaves == 1:
        return (LEAF,)
    found: List[RootedTree] = []
    for parts in _leaf_splits(leaves):
        groups = Counter(parts)
        choices = [
            list(itertools.combinations_with_replacement(_rooted_trees(size), count))
            for size, count in sorted(groups.items(), reverse=True)
        ]
        for picked in itertools.product(*choices):
            children = tuple(sorted(child for group in picked for child in group))
            found.append(children)
    return tuple(sorted(found))


def enumerate_rooted_trees(leaves: int) -> Iterator[RootedTree]:
    """
    Unlabelled rooted trees with the given number of leaves, every internal
    vertex having at least two children, each exactly once in canonical form
    (children sorted, recursively).
    """
    if leaves < 1:
        raise ValueError("A rooted tree has at least one leaf")
    yield from _rooted_trees(leaves)


def plane_embeddings(tree: RootedTree) -> int:
    """Number of distinct child orderings: prod k!/prod(multiplicity!) over vertices."""
    if not tree:
        return 1
    count = 1
    for multiplicity in Counter(tree).values():
        count *= factorial(multiplicity)
    total = factorial(len(tree)) // count
    for child in tree:
        total *= plane_embeddings(child)
    return total


def tree_profile(tree: RootedTree) -> RootedTreeProfile:
    counts: Counter = Counter()

    def walk(node: RootedTree) -> None:
        if not node:
            return
        counts[len(node) - 1] += 1
        for child in node:
            walk(child)

    walk(tree)
    return RootedTreeProfile(tuple(sorted(counts.items())))


def profile_counts(n: int) -> Dict[RootedTreeProfile, int]:
    """Plane rooted trees with n+1 leaves, grouped by profile."""
    grouped: Counter = Counter()
    for tree in enumerate_rooted_trees(n + 1):
        grouped[tree_profile(tree)] += plane_embeddings(tree)
    return dict(grouped)


@lru_cache(maxsize=None)
def count_plane_trees(leaves: int) -> int:
    """Plane rooted trees with every internal vertex of outdegree >= 2, by ordered forests."""
    if leaves == 1:
        return 1
    # forests[k][m]: ordered sequences of k trees with m leaves in total
    forests = [[0] * (leaves + 1) for _ in range(leaves + 1)]
    forests[0][0] = 1
    for k in range(1, leaves + 1):
        for m in range(k, leaves + 1):
            forests[k][m] = sum(
                count_plane_trees(first) * forests[k - 1][m - first]
                for first in range(1, min(m - k + 2, leaves))
            )
    return sum(forests[k][leaves] for k in range(2, leaves + 1))


def loday_inverse(F: Diffeomorphism, N: int) -> Series:
    """x + sum_n r_n x^{n+1} with r_n = sum over plane rooted trees of prod (-a_j)^{m_j}."""
    coefficients = [ZERO] * (N + 1)
    if N >= 1:
        coefficients[1] = ONE
    for n in range(1, N):
        total = ZERO
        for profile, count in sorted(profile_counts(n).items(), key=lambda item: item[0].m):
            total = total + profile.monomial(F).scale(count)
        coefficients[n + 1] = total
    return Series(SeriesKind.OGF, tuple(coefficients))


# -- checks ------------------------------------------------------------------------------------


def _compare(identity: str, params: Dict[str, object], lhs: Polynomial, rhs: Polynomial) -> CheckResult:
    if lhs == rhs:
        return CheckResult(identity=identity, params=params, passed=True)
    return CheckResult(
        identity=identity, params=params, passed=False, lhs=format_poly(lhs), rhs=format_poly(rhs)
    )


def check_legendre_b_relation(N: int, F: Optional[Diffeomorphism] = None) -> Report:
    """EGF coefficient n of LA is b_{n-1} for 2 <= n <= N."""
    F = F or Diffeomorphism.generic(N + 1)
    A = build_A(F, N + 1)
    checks: List[CheckResult] = []
    slope = derive(A.series)
    expected_slope = scale(series_from_diffeo(F, N), -1)
    checks.append(
        CheckResult(
            identity="action_derivative",
            params={"order": N},
            passed=slope == expected_slope,
            detail=None if slope == expected_slope else str(slope),
        )
    )
    T = tree_series(A, N)
    b = b_values(N - 1, F) if N >= 2 else ()
    for n in range(2, N + 1):
        checks.append(_compare("legendre_coefficient", {"n": n}, T.coefficient(n), b[n - 2]))
    return build_report("legendre", checks, order=N)


def check_involution(A: ActionSeries, N: int) -> Report:
    """L(L(A)) = A(-x) at order N; A must be known to order N+2."""
    LA = legendre_transform(A, N + 1)
    twice = legendre_transform(ActionSeries(LA), N)
    expected = reflect(truncate(to_ogf(A.series), N))
    checks = [
        _compare("involution", {"n": n}, twice.coefficient(n), expected.coefficient(n))
        for n in range(N + 1)
    ]
    return build_report("involution", checks, order=N)


def check_loday(N: int) -> Report:
    """Rooted-tree inversion equals order-by-order inversion."""
    F = Diffeomorphism.generic(N)
    trees = loday_inverse(F, N)
    solved = invert(series_from_diffeo(F, N))
    checks = [
        _compare("loday_inverse", {"n": n}, trees.coefficient(n), solved.coefficient(n))
        for n in range(N + 1)
    ]
    return build_report("loday", checks, order=N)


def check_plane_tree_counts(n_max: int) -> Report:
    """With every a_j = -1, r_n counts plane trees with n+1 leaves."""
    F = Diffeomorphism.from_values(n_max + 1, {j: -1 for j in range(1, n_max + 1)}, symbolic_tail=False)
    checks: List[CheckResult] = []
    for n in range(1, n_max + 1):
        r_n = sum(
            (profile.monomial(F).scale(count) for profile, count in profile_counts(n).items()),
            ZERO,
        )
        checks.append(
            _compare("plane_tree_count", {"n": n}, r_n, Polynomial.constant(count_plane_trees(n + 1)))
        )
    return build_report("plane_trees", checks, n_max=n_max)


def random_action(N: int, seed: int, bound: int = 9) -> ActionSeries:
    """Numeric action with integer coefficients drawn from PCG64; quadratic term nonzero."""
    rng = np.random.Generator(np.random.PCG64(seed))
    quadratic = int(rng.integers(1, bound, endpoint=True)) * (1 if rng.integers(0, 2) else -1)
    rest = [int(v) for v in rng.integers(-bound, bound, size=max(N - 2, 0), endpoint=True)]
    return ActionSeries(Series.of(SeriesKind.OGF, [0, 0, quadratic] + rest))
