"""
Partial Bell polynomials B_{n,k}(x_1, x_2, ...) and checks of the Bell identities.

Three independent evaluations are provided:

- ``bell_oracle``: sum over set partitions of {1..n} into k blocks
- ``bell_fast``: the convolution recurrence k B_{n,k} = sum_s C(n,s) x_s B_{n-s,k-1}
- ``bell_partition_formula``: sum over integer partitions of n into k parts

The identity checks evaluate their Bell terms with the partition formula so
that no identity is checked against the recurrence it is built from.
"""

import logging
import threading
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import (
    Callable,
    Dict,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from app.exactalg import ONE, ZERO, Polynomial, Scalar, format_poly, x_var
from app.exceptions import BellArgumentError
from app.models import CheckResult, Report, build_report

logger = logging.getLogger(__name__)

Coefficient = Union[Scalar, Polynomial]


class BellArgs:
    """
    Arguments x_1, x_2, ... of a Bell polynomial, indexed from 1.

    Either a finite tuple of values or, when ``generator`` is given, an
    unbounded sequence produced on demand. Each instance memoizes its
    B_{n,k} table, so reuse one instance for related evaluations.
    """

    def __init__(
        self,
        values: Sequence[Coefficient] = (),
        generator: Optional[Callable[[int], Polynomial]] = None,
    ):
        self._values: List[Polynomial] = [
            v if isinstance(v, Polynomial) else Polynomial.constant(v) for v in values
        ]
        self._generator = generator
        self._table: Dict[Tuple[int, int], Polynomial] = {}
        self._lock = threading.Lock()

    @classmethod
    def symbolic(cls) -> "BellArgs":
        """Fresh indeterminates x1, x2, ... (shared instance)."""
        return _symbolic_args()

    @classmethod
    def ones(cls) -> "BellArgs":
        return cls(generator=lambda i: ONE)

    @property
    def bounded(self) -> bool:
        return self._generator is None

    def __len__(self) -> int:
        return len(self._values)

    def get(self, i: int) -> Polynomial:
        if i > len(self._values) and self._generator is not None:
            with self._lock:
                while i > len(self._values):
                    self._values.append(self._generator(len(self._values) + 1))
        return self._values[i - 1]

    def require(self, n: int, k: int) -> None:
        """B_{n,k} reads x_1 .. x_{n-k+1}."""
        if k < 1 or k > n:
            return
        needed = n - k + 1
        if self._generator is None and needed > len(self._values):
            raise BellArgumentError(n, k, needed, len(self._values))

    def cached(self, n: int, k: int) -> Optional[Polynomial]:
        return self._table.get((n, k))

    def store(self, n: int, k: int, value: Polynomial) -> None:
        with self._lock:
            self._table.setdefault((n, k), value)


@lru_cache(maxsize=1)
def _symbolic_args() -> BellArgs:
    return BellArgs(generator=lambda i: Polynomial.variable(x_var(i)))


class SetPartition(NamedTuple):
    """Blocks of {1..n}, each sorted, ordered by their minima"""

    blocks: Tuple[Tuple[int, ...], ...]

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)


# -- enumeration -------------------------------------------------------------------


def restricted_growth_strings(n: int, k: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """
    Strings a_1..a_n with a_1 = 0 and a_i <= 1 + max(a_1..a_{i-1}).

    With ``k`` set only strings using exactly k distinct values are produced;
    branches that can no longer reach k blocks are cut early.
    """
    if n == 0:
        if k in (None, 0):
            yield ()
        return
    if k is not None and (k < 1 or k > n):
        return
    a = [0] * n

    def extend(i: int, used: int) -> Iterator[Tuple[int, ...]]:
        if i == n:
            if k is None or used == k:
                yield tuple(a)
            return
        if k is not None and used + (n - i) < k:
            return
        limit = used + 1 if k is None or used < k else used
        for v in range(limit):
            a[i] = v
            yield from extend(i + 1, max(used, v + 1))

    yield from extend(1, 1)


def set_partitions(n: int, k: Optional[int] = None) -> Iterator[SetPartition]:
    """All set partitions of {1..n} (into exactly k blocks when k is given)."""
    for rgs in restricted_growth_strings(n, k):
        blocks: List[List[int]] = []
        for label, block in enumerate(rgs, start=1):
            if block == len(blocks):
                blocks.append([])
            blocks[block].append(label)
        yield SetPartition(tuple(tuple(b) for b in blocks))


def integer_partitions(n: int, k: int, largest: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Partitions of n into exactly k parts, parts non-increasing."""
    if largest is None:
        largest = n
    if k == 0:
        if n == 0:
            yield ()
        return
    if n < k:
        return
    for first in range(min(largest, n - k + 1), 0, -1):
        if first * k < n:
            break
        for rest in integer_partitions(n - first, k - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def count_integer_partitions(n: int, k: int) -> int:
    """p(n, k) by p(n, k) = p(n-1, k-1) + p(n-k, k)."""
    if n == 0 and k == 0:
        return 1
    if n <= 0 or k <= 0 or k > n:
        return 0
    return count_integer_partitions(n - 1, k - 1) + count_integer_partitions(n - k, k)


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


# -- evaluation ---------------------------------------------------------------------


def _trivial(n: int, k: int) -> Optional[Polynomial]:
    if n == 0 and k == 0:
        return ONE
    if k > n or k == 0 or n < 0 or k < 0:
        return ZERO
    return None


def bell_oracle(n: int, k: int, args: BellArgs) -> Polynomial:
    """Sum over set partitions of {1..n} into k blocks of prod x_{|block|}."""
    trivial = _trivial(n, k)
    if trivial is not None:
        return trivial
    args.require(n, k)
    shapes: Counter = Counter()
    for rgs in restricted_growth_strings(n, k):
        sizes = Counter(rgs)
        shapes[tuple(sorted(sizes.values()))] += 1
    total = ZERO
    for shape in sorted(shapes):
        term = Polynomial.constant(shapes[shape])
        for size in shape:
            term = term * args.get(size)
        total = total + term
    return total


def bell_fast(n: int, k: int, args: BellArgs) -> Polynomial:
    """
    B_{n,k} by k B_{n,k} = sum_{s=1}^{n-k+1} C(n,s) x_s B_{n-s,k-1}, memoized on args.

    Raises:
        BellArgumentError: if a bounded ``args`` has fewer than n-k+1 entries
    """
    trivial = _trivial(n, k)
    if trivial is not None:
        return trivial
    args.require(n, k)
    cached = args.cached(n, k)
    if cached is not None:
        return cached
    total = ZERO
    for s in range(1, n - k + 2):
        xs = args.get(s)
        if xs.is_zero():
            continue
        lower = bell_fast(n - s, k - 1, args)
        if lower.is_zero():
            continue
        total = total + (xs * lower).scale(comb(n, s))
    value = total.scale(Fraction(1, k))
    args.store(n, k, value)
    return value


def bell_partition_formula(n: int, k: int, args: BellArgs) -> Polynomial:
    """sum over 1^{j_1} 2^{j_2} ... |- n with k parts of n!/prod(j_i! (i!)^{j_i}) prod x_i^{j_i}."""
    trivial = _trivial(n, k)
    if trivial is not None:
        return trivial
    args.require(n, k)
    total = ZERO
    for parts in integer_partitions(n, k):
        multiplicity = Counter(parts)
        denominator = 1
        term = ONE
        for size, count in multiplicity.items():
            denominator *= factorial(count) * factorial(size) ** count
            term = term * args.get(size) ** count
        total = total + term.scale(Fraction(factorial(n), denominator))
    return total


def bell_table(n_max: int, args: BellArgs) -> Dict[Tuple[int, int], Polynomial]:
    """B_{n,k} for 0 <= k <= n <= n_max by the partition formula."""
    return {
        (n, k): bell_partition_formula(n, k, args)
        for n in range(n_max + 1)
        for k in range(n + 1)
    }


# -- identity checks -----------------------------------------------------------------


def _compare(identity: str, params: Dict[str, int], lhs: Polynomial, rhs: Polynomial) -> CheckResult:
    if lhs == rhs:
        return CheckResult(identity=identity, params=params, passed=True)
    logger.debug("Bell identity mismatch", extra={"identity": identity, "params": params})
    return CheckResult(
        identity=identity,
        params=params,
        passed=False,
        lhs=format_poly(lhs),
        rhs=format_poly(rhs),
    )


def check_genfunc_definition(n_max: int, k_max: int) -> Report:
    """
    exp(u X(t)) with X = sum_m x_m t^m/m! against sum B_{n,k} t^n/n! u^k.

    The coefficient of u^k is X^k/k!, expanded here as a truncated EGF.
    """
    from app.models import SeriesKind
    from app.series import Series, scale, series_mul

    args = BellArgs.symbolic()
    X = Series.of(SeriesKind.EGF, [ZERO] + [args.get(m) for m in range(1, n_max + 1)])
    power = Series.of(SeriesKind.EGF, [ONE] + [ZERO] * n_max)
    checks: List[CheckResult] = []
    for k in range(k_max + 1):
        if k > 0:
            power = series_mul(power, X)
        u_coefficient = scale(power, Fraction(1, factorial(k)))
        for n in range(n_max + 1):
            checks.append(
                _compare(
                    "genfunc",
                    {"n": n, "k": k},
                    u_coefficient.coefficient(n),
                    bell_fast(n, k, args),
                )
            )
    return build_report("genfunc", checks, n_max=n_max, k_max=k_max)


def check_lemma_localization(n_max: int) -> Report:
    """Both forms of rooting a partition at one block, for 1 <= k <= n <= n_max."""
    args = BellArgs.symbolic()
    table = bell_table(n_max, args)
    checks: List[CheckResult] = []
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            by_count = ZERO
            by_size = ZERO
            for s in range(1, n + 1):
                lower = table[(n - s, k - 1)] if k - 1 <= n - s else ZERO
                if lower.is_zero():
                    continue
                term = (args.get(s) * lower).scale(comb(n, s))
                by_count = by_count + term
                by_size = by_size + term.scale(s)
            checks.append(
                _compare("localization_k", {"n": n, "k": k}, table[(n, k)].scale(k), by_count)
            )
            checks.append(
                _compare("localization_n", {"n": n, "k": k}, table[(n, k)].scale(n), by_size)
            )
    return build_report("localization", checks, n_max=n_max)


def check_starter(n_max: int) -> Report:
    """B_{n+1,k+1} = sum_{a=0}^{n-k} C(n,a) x_{a+1} B_{n-a,k}, for n+1 <= n_max."""
    args = BellArgs.symbolic()
    table = bell_table(n_max, args)
    checks: List[CheckResult] = []
    for n in range(n_max):
        for k in range(n + 1):
            rhs = ZERO
            for alpha in range(n - k + 1):
                rhs = rhs + (args.get(alpha + 1) * table[(n - alpha, k)]).scale(comb(n, alpha))
            checks.append(_compare("starter", {"n": n, "k": k}, table[(n + 1, k + 1)], rhs))
    return build_report("starter", checks, n_max=n_max)


def _nested_chain(args: BellArgs, n_max: int) -> Dict[Tuple[int, int], Polynomial]:
    # F(a, 0) = x_a and F(a, r) = sum_{b=r}^{a-1} C(a, b) x_{a-b} F(b, r-1)
    chain: Dict[Tuple[int, int], Polynomial] = {}
    for a in range(1, n_max + 1):
        chain[(a, 0)] = args.get(a)
    for r in range(1, n_max):
        for a in range(r + 1, n_max + 1):
            total = ZERO
            for b in range(r, a):
                total = total + (args.get(a - b) * chain[(b, r - 1)]).scale(comb(a, b))
            chain[(a, r)] = total
    return chain


def check_cvijovic(n_max: int) -> Report:
    """
    Three further Bell identities, all in polynomial form:

    - (n-k) x_1 B_{n,k} = sum_{a=1}^{n-k} C(n,a) [(k+1) - (n+1)/(a+1)] x_{a+1} B_{n-a,k}, n > k >= 1
    - C(k1+k2, k1) B_{n,k1+k2} = sum_a C(n,a) B_{a,k1} B_{n-a,k2}, k1 + k2 <= n
    - (k+1)! B_{n,k+1} = nested chain of binomial sums, k+1 <= n
    """
    args = BellArgs.symbolic()
    table = bell_table(n_max, args)
    x1 = args.get(1)
    checks: List[CheckResult] = []

    for n in range(2, n_max + 1):
        for k in range(1, n):
            rhs = ZERO
            for alpha in range(1, n - k + 1):
                weight = Fraction(k + 1) - Fraction(n + 1, alpha + 1)
                if weight == 0:
                    continue
                rhs = rhs + (args.get(alpha + 1) * table[(n - alpha, k)]).scale(
                    comb(n, alpha) * weight
                )
            lhs = (x1 * table[(n, k)]).scale(n - k)
            checks.append(_compare("cvijovic_x1_recurrence", {"n": n, "k": k}, lhs, rhs))

    for n in range(n_max + 1):
        for k1 in range(n + 1):
            for k2 in range(n - k1 + 1):
                rhs = ZERO
                for alpha in range(k1, n - k2 + 1):
                    left, right = table[(alpha, k1)], table[(n - alpha, k2)]
                    if left.is_zero() or right.is_zero():
                        continue
                    rhs = rhs + (left * right).scale(comb(n, alpha))
                lhs = table[(n, k1 + k2)].scale(comb(k1 + k2, k1))
                checks.append(
                    _compare("cvijovic_convolution", {"n": n, "k1": k1, "k2": k2}, lhs, rhs)
                )

    chain = _nested_chain(args, n_max)
    for n in range(1, n_max + 1):
        for k in range(n):
            lhs = table[(n, k + 1)].scale(factorial(k + 1))
            checks.append(_compare("cvijovic_nested", {"n": n, "k": k}, lhs, chain[(n, k)]))

    return build_report("cvijovic", checks, n_max=n_max)


def check_oracle_agreement(n_max: int) -> Report:
    """Set partitions, recurrence and integer-partition formula agree, symbolic x."""
    args = BellArgs.symbolic()
    checks: List[CheckResult] = []
    for n in range(n_max + 1):
        for k in range(n + 1):
            oracle = bell_oracle(n, k, args)
            checks.append(
                _compare("oracle_vs_fast", {"n": n, "k": k}, oracle, bell_fast(n, k, args))
            )
            checks.append(
                _compare(
                    "oracle_vs_partition_formula",
                    {"n": n, "k": k},
                    oracle,
                    bell_partition_formula(n, k, args),
                )
            )
    return build_report("oracle", checks, n_max=n_max)


def check_specializations(n_max: int) -> Report:
    """B_{n,k}(1,1,...) = S(n,k) and term count of B_{n,k} = p(n,k)."""
    symbolic = BellArgs.symbolic()
    ones = BellArgs.ones()
    checks: List[CheckResult] = []
    for n in range(n_max + 1):
        for k in range(n + 1):
            checks.append(
                _compare(
                    "stirling",
                    {"n": n, "k": k},
                    bell_fast(n, k, ones),
                    Polynomial.constant(stirling2(n, k)),
                )
            )
            terms = len(bell_fast(n, k, symbolic))
            expected = count_integer_partitions(n, k)
            checks.append(
                CheckResult(
                    identity="term_count",
                    params={"n": n, "k": k},
                    passed=terms == expected,
                    lhs=None if terms == expected else str(terms),
                    rhs=None if terms == expected else str(expected),
                )
            )
    return build_report("specializations", checks, n_max=n_max)
