"""
Tree amplitudes b_n of a free massive scalar field seen through a field diffeomorphism.

b_n sums all trees with n on-shell legs and one off-shell edge e, propagator of
e included. The kinematics (M and the dot products s_i_j) are evaluated at
exact random integer points while the a_j stay symbolic; every tree value is
therefore a polynomial in the a_j with rational coefficients, and agreement
of b_n across points certifies independence from the momenta.
"""

import itertools
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, FrozenSet, Iterator, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np

from app.bell import BellArgs, bell_fast, set_partitions
from app.config import settings
from app.exactalg import (
    M_VAR,
    ONE,
    ZERO,
    Polynomial,
    a_weight,
    format_poly,
    s_var,
)
from app.exceptions import KinematicSamplingError, ZeroDenominator
from app.logging_config import get_structured_logger, log_performance
from app.models import CheckResult, Report, build_report
from app.series import Diffeomorphism, invert, series_from_diffeo, to_egf

logger = get_structured_logger(__name__)


# -- Feynman rules ---------------------------------------------------------------------


class FeynmanRules:
    """
    Vertex coefficients of the transformed Lagrangian.

    d_r = r! sum_{j=0}^{r} (j+1)(r-j+1) a_j a_{r-j}   (kinematic vertex)
    c_n = (n+2)! sum_{j=0}^{n} a_j a_{n-j}            (massive vertex)

    A vertex of degree k contributes d_{k-2}/2 * sum p^2 - M c_{k-2}/2.
    """

    def __init__(self, diffeo: Optional[Diffeomorphism] = None):
        self.diffeo = diffeo or Diffeomorphism.generic(1)
        self._d: Dict[int, Polynomial] = {}
        self._c: Dict[int, Polynomial] = {}
        self._lock = threading.Lock()

    def a(self, j: int) -> Polynomial:
        return self.diffeo.coefficient(j)

    def d(self, r: int) -> Polynomial:
        if r not in self._d:
            total = ZERO
            for j in range(r + 1):
                total = total + (self.a(j) * self.a(r - j)).scale((j + 1) * (r - j + 1))
            with self._lock:
                self._d[r] = total.scale(factorial(r))
        return self._d[r]

    def c(self, n: int) -> Polynomial:
        if n not in self._c:
            total = ZERO
            for j in range(n + 1):
                total = total + self.a(j) * self.a(n - j)
            with self._lock:
                self._c[n] = total.scale(factorial(n + 2))
        return self._c[n]

    def vertex(self, degree: int, momentum_squares: Fraction, mass: Fraction) -> Polynomial:
        """Combined vertex factor; ``momentum_squares`` sums p^2 over all incident edges."""
        r = degree - 2
        return self.d(r).scale(momentum_squares / 2) - self.c(r).scale(mass / 2)


def d_coeff(r: int, diffeo: Optional[Diffeomorphism] = None) -> Polynomial:
    return FeynmanRules(diffeo).d(r)


def c_coeff(n: int, diffeo: Optional[Diffeomorphism] = None) -> Polynomial:
    return FeynmanRules(diffeo).c(n)


# -- kinematics ------------------------------------------------------------------------


class MomentumSubset(NamedTuple):
    """Nonempty set of external legs whose momenta flow through one edge"""

    legs: Tuple[int, ...]

    @classmethod
    def of(cls, legs, n: int) -> "MomentumSubset":
        ordered = tuple(sorted(set(legs)))
        if not ordered or ordered[0] < 1 or ordered[-1] > n:
            raise ValueError(f"Legs {list(legs)} are not a nonempty subset of 1..{n}")
        return cls(ordered)


def square_momentum(P: MomentumSubset, n: int) -> Polynomial:
    """|P| M + 2 sum_{i<j in P} s_i_j."""
    MomentumSubset.of(P.legs, n)
    total = Polynomial.variable(M_VAR).scale(len(P.legs))
    for i, j in itertools.combinations(P.legs, 2):
        total = total + Polynomial.variable(s_var(i, j)).scale(2)
    return total


@dataclass(frozen=True)
class KinematicPoint:
    """Exact values of M and of every s_i_j, i < j <= n"""

    n: int
    M: Fraction
    s: Mapping[Tuple[int, int], Fraction] = field(default_factory=dict)

    def square(self, legs: Union[Tuple[int, ...], FrozenSet[int]]) -> Fraction:
        ordered = sorted(legs)
        total = self.M * len(ordered)
        for i, j in itertools.combinations(ordered, 2):
            total += 2 * self.s[(i, j)]
        return total

    def denominator(self, legs: Union[Tuple[int, ...], FrozenSet[int]]) -> Fraction:
        return self.square(legs) - self.M

    def is_valid(self) -> bool:
        """No propagator over two or more legs vanishes."""
        labels = range(1, self.n + 1)
        for size in range(2, self.n + 1):
            for legs in itertools.combinations(labels, size):
                if self.denominator(legs) == 0:
                    return False
        return True

    def assignment(self) -> Dict[str, Fraction]:
        values = {"M": self.M}
        values.update({s_var(i, j).name: v for (i, j), v in self.s.items()})
        return values


class KinematicSampler:
    """
    Seeded source of kinematic points.

    Integers are drawn from numpy's PCG64 generator, uniform in
    [-bound, bound]; points with a vanishing propagator are redrawn.
    """

    def __init__(self, seed: int = 42, bound: Optional[int] = None, max_resamples: Optional[int] = None):
        self.seed = seed
        self.bound = bound if bound is not None else settings.kinematic_bound
        self.max_resamples = (
            max_resamples if max_resamples is not None else settings.max_resamples
        )
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def _draw(self) -> Fraction:
        return Fraction(int(self._rng.integers(-self.bound, self.bound, endpoint=True)))

    def sample(self, n: int, massless: bool = False, dotless: bool = False) -> KinematicPoint:
        """
        Draw a valid point for n legs.

        Args:
            n: number of external legs
            massless: fix M = 0 and draw only the dot products
            dotless: fix every s_i_j = 0 and draw only M

        Raises:
            KinematicSamplingError: if no valid point appears within max_resamples draws
        """
        pairs = list(itertools.combinations(range(1, n + 1), 2))
        for attempt in range(1, self.max_resamples + 1):
            mass = Fraction(0) if massless else self._draw()
            dots = {pair: Fraction(0) if dotless else self._draw() for pair in pairs}
            point = KinematicPoint(n, mass, dots)
            if point.is_valid():
                return point
            logger.debug("Resampling kinematic point", n=n, attempt=attempt)
        raise KinematicSamplingError(n, self.max_resamples)

    def sample_many(self, n: int, trials: int) -> List[KinematicPoint]:
        return [self.sample(n) for _ in range(trials)]


# -- trees -------------------------------------------------------------------------------


class Vertex(NamedTuple):
    """Internal vertex; children ordered by their smallest leg"""

    children: Tuple["Node", ...]


Node = Union[int, Vertex]


def node_legs(node: Node) -> FrozenSet[int]:
    if isinstance(node, int):
        return frozenset((node,))
    return frozenset().union(*(node_legs(c) for c in node.children))


def _vertex_count(node: Node) -> int:
    if isinstance(node, int):
        return 0
    return 1 + sum(_vertex_count(c) for c in node.children)


@dataclass(frozen=True)
class Tree:
    """Leaf-labelled tree hanging from the off-shell edge e"""

    n: int
    root: Node

    @property
    def vertex_count(self) -> int:
        return _vertex_count(self.root)

    def __str__(self) -> str:
        return _render(self.root)


def _render(node: Node) -> str:
    if isinstance(node, int):
        return str(node)
    return "(" + " ".join(_render(c) for c in node.children) + ")"


@lru_cache(maxsize=4096)
def _subtrees(labels: Tuple[int, ...]) -> Tuple[Node, ...]:
    if len(labels) == 1:
        return (labels[0],)
    return tuple(_vertices(labels))


def _vertices(labels: Tuple[int, ...]) -> Iterator[Vertex]:
    # Every split of the labels into >= 2 blocks, blocks ordered by minimum
    for k in range(2, len(labels) + 1):
        for partition in set_partitions(len(labels), k):
            blocks = [tuple(labels[i - 1] for i in block) for block in partition.blocks]
            for children in itertools.product(*(_subtrees(b) for b in blocks)):
                yield Vertex(tuple(children))


def enumerate_trees(n: int) -> Iterator[Tree]:
    """Each tree with legs 1..n and internal vertices of degree >= 3, exactly once."""
    if n < 1:
        raise ValueError("n must be at least 1")
    labels = tuple(range(1, n + 1))
    if n == 1:
        yield Tree(1, 1)
        return
    for vertex in _vertices(labels):
        yield Tree(n, vertex)


@lru_cache(maxsize=None)
def count_trees(n: int) -> int:
    """T(n) = sum_{k>=2} B_{n,k}(T(1), T(2), ...), T(1) = 1."""
    if n == 1:
        return 1
    args = BellArgs([count_trees(i) for i in range(1, n)])
    return sum(int(bell_fast(n, k, args).constant_term()) for k in range(2, n + 1))


# -- evaluation --------------------------------------------------------------------------


def _node_value(
    node: Node, rules: FeynmanRules, pt: KinematicPoint, memo: Dict[Node, Polynomial]
) -> Polynomial:
    if isinstance(node, int):
        return ONE
    if node in memo:
        return memo[node]
    legs = node_legs(node)
    denominator = pt.denominator(legs)
    if denominator == 0:
        raise ZeroDenominator(sorted(legs))
    squares = pt.square(legs) + sum(pt.square(node_legs(c)) for c in node.children)
    value = rules.vertex(len(node.children) + 1, squares, pt.M)
    for child in node.children:
        value = value * _node_value(child, rules, pt, memo)
    # vertex i times propagator i gives the sign -1
    value = value.scale(Fraction(-1) / denominator)
    memo[node] = value
    return value


def tree_value(t: Tree, rules: FeynmanRules, pt: KinematicPoint) -> Polynomial:
    """
    Product of vertex factors and propagators 1/(p^2 - M) of one tree, times (-1)^V.

    Raises:
        ZeroDenominator: if some propagator vanishes at ``pt``
    """
    return _node_value(t.root, rules, pt, {})


@log_performance(logger, "b_direct")
def b_direct(n: int, rules: FeynmanRules, pt: KinematicPoint) -> Polynomial:
    """Sum of tree_value over all trees with n legs."""
    memo: Dict[Node, Polynomial] = {}
    total = ZERO
    for tree in enumerate_trees(n):
        total = total + _node_value(tree.root, rules, pt, memo)
    return total


@log_performance(logger, "b_recurrence")
def b_recurrence(n: int, rules: FeynmanRules, pt: KinematicPoint) -> Polynomial:
    """
    b_n by the recursion over partitions of the legs below the top vertex.

    For legs P split into blocks P_1..P_k,
    b(P) = -1/(P^2 - M) sum (k-1)!/2 sum_j a_j a_{k-1-j}
           [-M (k+1) k + (j+1)(k-j)(sum_i P_i^2 + P^2)] prod b(P_i).
    """
    memo: Dict[Tuple[int, ...], Polynomial] = {}

    def b(legs: Tuple[int, ...]) -> Polynomial:
        if len(legs) == 1:
            return ONE
        if legs in memo:
            return memo[legs]
        denominator = pt.denominator(legs)
        if denominator == 0:
            raise ZeroDenominator(list(legs))
        outer = pt.square(legs)
        total = ZERO
        for k in range(2, len(legs) + 1):
            for partition in set_partitions(len(legs), k):
                blocks = [tuple(legs[i - 1] for i in block) for block in partition.blocks]
                inner = outer + sum(pt.square(block) for block in blocks)
                vertex = ZERO
                for j in range(k):
                    bracket = -pt.M * (k + 1) * k + (j + 1) * (k - j) * inner
                    if bracket == 0:
                        continue
                    vertex = vertex + (rules.a(j) * rules.a(k - 1 - j)).scale(bracket)
                term = vertex.scale(Fraction(factorial(k - 1), 2))
                for block in blocks:
                    term = term * b(block)
                total = total + term
        value = total.scale(Fraction(-1) / denominator)
        memo[legs] = value
        return value

    return b(tuple(range(1, n + 1)))


@lru_cache(maxsize=64)
def _closed_args(diffeo: Diffeomorphism) -> BellArgs:
    return BellArgs(generator=lambda j: diffeo.coefficient(j).scale(-factorial(j)))


def b_closed(n: int, diffeo: Optional[Diffeomorphism] = None) -> Polynomial:
    """
    b_n from Bell polynomials alone: with m = n - 1,
    b_{m+1} = sum_k (m+k)!/m! B_{m,k}(-1! a_1, -2! a_2, ...), b_1 = 1.
    """
    if n < 1:
        raise ValueError("b_n is defined for n >= 1")
    diffeo = diffeo or Diffeomorphism.generic(n)
    m = n - 1
    if m == 0:
        return ONE
    args = _closed_args(diffeo)
    total = ZERO
    for k in range(1, m + 1):
        total = total + bell_fast(m, k, args).scale(Fraction(factorial(m + k), factorial(m)))
    return total


def b_inverse(n: int, diffeo: Optional[Diffeomorphism] = None) -> Polynomial:
    """n! [t^n] F^{-1}(t)."""
    diffeo = diffeo or Diffeomorphism.generic(n)
    return to_egf(invert(series_from_diffeo(diffeo, n))).coefficient(n)


def b_values(n_max: int, diffeo: Optional[Diffeomorphism] = None) -> Tuple[Polynomial, ...]:
    """(b_1, ..., b_{n_max}) by the closed formula."""
    diffeo = diffeo or Diffeomorphism.generic(n_max)
    return tuple(b_closed(n, diffeo) for n in range(1, n_max + 1))


# -- checks --------------------------------------------------------------------------------


def _compare(identity: str, params: Dict[str, object], lhs: Polynomial, rhs: Polynomial) -> CheckResult:
    if lhs == rhs:
        return CheckResult(identity=identity, params=params, passed=True)
    return CheckResult(
        identity=identity,
        params=params,
        passed=False,
        lhs=format_poly(lhs),
        rhs=format_poly(rhs),
    )


def point_independent(n: int, rules: FeynmanRules, points: List[KinematicPoint]) -> bool:
    values = {b_direct(n, rules, pt) for pt in points}
    return len(values) == 1


def onshell_amplitude_check(n: int, trials: int, seed: int, rules: Optional[FeynmanRules] = None) -> Report:
    """
    The n-point on-shell amplitude is (p_e^2 - M) b_{n-1}; it vanishes when
    b_{n-1} is the same polynomial at every sampled point.
    """
    if n < 3:
        raise ValueError("The on-shell amplitude check needs n >= 3")
    legs = n - 1
    rules = rules or FeynmanRules(Diffeomorphism.generic(legs))
    sampler = KinematicSampler(seed)
    reference = b_closed(legs, rules.diffeo)
    checks: List[CheckResult] = []
    for trial, pt in enumerate(sampler.sample_many(legs, trials)):
        checks.append(
            _compare(
                "point_independence",
                {"n": legs, "trial": trial},
                b_direct(legs, rules, pt),
                reference,
            )
        )
    return build_report("onshell", checks, n=n, trials=trials, seed=seed)


def check_routes(n_max_tree: int, n_max_series: int, seed: int, trials: int = 1) -> Report:
    """Tree sum, recursion, closed formula and series inversion give the same b_n."""
    diffeo = Diffeomorphism.generic(max(n_max_tree, n_max_series))
    rules = FeynmanRules(diffeo)
    sampler = KinematicSampler(seed)
    checks: List[CheckResult] = []
    for n in range(1, n_max_series + 1):
        closed = b_closed(n, diffeo)
        checks.append(_compare("closed_vs_inverse", {"n": n}, closed, b_inverse(n, diffeo)))
        if n > n_max_tree:
            continue
        for trial, pt in enumerate(sampler.sample_many(n, trials)):
            params = {"n": n, "trial": trial}
            checks.append(_compare("direct_vs_closed", params, b_direct(n, rules, pt), closed))
            checks.append(
                _compare("recurrence_vs_closed", params, b_recurrence(n, rules, pt), closed)
            )
    return build_report(
        "routes", checks, n_max_tree=n_max_tree, n_max_series=n_max_series, seed=seed
    )


def check_tree_counts(n_max: int) -> Report:
    checks: List[CheckResult] = []
    for n in range(1, n_max + 1):
        enumerated = sum(1 for _ in enumerate_trees(n))
        expected = count_trees(n)
        checks.append(
            CheckResult(
                identity="tree_count",
                params={"n": n},
                passed=enumerated == expected,
                lhs=None if enumerated == expected else str(enumerated),
                rhs=None if enumerated == expected else str(expected),
            )
        )
    return build_report("tree_counts", checks, n_max=n_max)


def check_homogeneity(n_max: int) -> Report:
    """Every monomial of b_n has weight n - 1 when a_j has weight j."""
    checks: List[CheckResult] = []
    for n, b in enumerate(b_values(n_max), start=1):
        weights = sorted(set(b.weighted_degrees(a_weight)))
        checks.append(
            CheckResult(
                identity="homogeneity",
                params={"n": n},
                passed=weights == [n - 1],
                lhs=None if weights == [n - 1] else str(weights),
                rhs=None if weights == [n - 1] else str([n - 1]),
            )
        )
    return build_report("homogeneity", checks, n_max=n_max)


def check_split_parts(n_max: int, seed: int) -> Report:
    """
    The recursion at a point with all s_i_j = 0 (pure mass part) and at a
    point with M = 0 (pure dot-product part) both reproduce b_n.
    """
    diffeo = Diffeomorphism.generic(n_max)
    rules = FeynmanRules(diffeo)
    sampler = KinematicSampler(seed)
    checks: List[CheckResult] = []
    for n in range(2, n_max + 1):
        closed = b_closed(n, diffeo)
        mass_point = sampler.sample(n, dotless=True)
        dot_point = sampler.sample(n, massless=True)
        checks.append(_compare("mass_part", {"n": n}, b_recurrence(n, rules, mass_point), closed))
        checks.append(_compare("dot_part", {"n": n}, b_recurrence(n, rules, dot_point), closed))
    return build_report("split_parts", checks, n_max=n_max, seed=seed)
