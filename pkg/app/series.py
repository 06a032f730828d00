"""
Truncated formal power series in one variable t with polynomial coefficients.

A ``Series`` stores c_0 .. c_N and its kind. For an EGF the series is
sum c_n t^n/n!, for an OGF it is sum c_n t^n. Coefficients beyond N are not
known; every binary operation keeps the smaller of the two truncation orders.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from app.bell import BellArgs, bell_fast
from app.exactalg import ONE, ZERO, Polynomial, Scalar, a_var, format_poly, parse_poly
from app.exceptions import (
    NonzeroConstantTerm,
    NotInvertible,
    OrderMismatch,
    OrderUnderflow,
    SeriesKindMismatch,
)
from app.models import (
    CheckResult,
    Report,
    SeriesCoefficient,
    SeriesDocument,
    SeriesKind,
    build_report,
)

Coefficient = Union[Scalar, Polynomial]


def _as_poly(value: Coefficient) -> Polynomial:
    return value if isinstance(value, Polynomial) else Polynomial.constant(value)


@dataclass(frozen=True)
class Series:
    kind: SeriesKind
    coefficients: Tuple[Polynomial, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise OrderUnderflow("construction", -1)

    @classmethod
    def of(cls, kind: SeriesKind, coefficients: Iterable[Coefficient]) -> "Series":
        return cls(kind, tuple(_as_poly(c) for c in coefficients))

    @property
    def truncation(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, n: int) -> Polynomial:
        if n < 0 or n > self.truncation:
            raise OrderMismatch(n, self.truncation)
        return self.coefficients[n]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coefficients)

    def __add__(self, other: "Series") -> "Series":
        return series_add(self, other)

    def __sub__(self, other: "Series") -> "Series":
        return series_add(self, scale(other, -1))

    def __mul__(self, other: "Series") -> "Series":
        return series_mul(self, other)

    def __neg__(self) -> "Series":
        return scale(self, -1)

    def __str__(self) -> str:
        body = ", ".join(format_poly(c) for c in self.coefficients)
        return f"{self.kind.value}[{body}] + O(t^{self.truncation + 1})"


@dataclass(frozen=True)
class Diffeomorphism:
    """
    Formal diffeomorphism F(t) = sum_j a_j t^(j+1) tangent to the identity.

    ``a`` holds a_0 .. a_{N-1}. Coefficients past the stored ones are the
    symbolic a_j when ``symbolic_tail`` is set, zero otherwise.
    """

    a: Tuple[Polynomial, ...]
    symbolic_tail: bool = field(default=True)

    def __post_init__(self):
        if not self.a or self.a[0] != ONE:
            raise ValueError("A diffeomorphism must have a_0 = 1")

    @classmethod
    def generic(cls, order: int) -> "Diffeomorphism":
        return cls(tuple([ONE] + [Polynomial.variable(a_var(j)) for j in range(1, order)]))

    @classmethod
    def identity(cls, order: int) -> "Diffeomorphism":
        return cls(tuple([ONE] + [ZERO] * (order - 1)), symbolic_tail=False)

    @classmethod
    def from_values(
        cls, order: int, values: Mapping[int, Coefficient], symbolic_tail: bool = True
    ) -> "Diffeomorphism":
        """Generic coefficients with some a_j fixed, e.g. {1: 2} for a_1 = 2."""
        base = cls.generic(order) if symbolic_tail else cls.identity(order)
        a = list(base.a)
        for j, value in values.items():
            if j < 1:
                raise ValueError("Only a_j with j >= 1 can be assigned")
            if j < order:
                a[j] = _as_poly(value)
        return cls(tuple(a), symbolic_tail)

    @property
    def order(self) -> int:
        return len(self.a)

    def coefficient(self, j: int) -> Polynomial:
        if j < len(self.a):
            return self.a[j]
        return Polynomial.variable(a_var(j)) if self.symbolic_tail else ZERO

    def substitute(self, mapping: Mapping[str, Coefficient]) -> "Diffeomorphism":
        """Apply a substitution such as {"a1": 2} to every coefficient."""
        subst = {k: _as_poly(v) for k, v in mapping.items()}
        return Diffeomorphism(tuple(c.substitute(subst) for c in self.a), self.symbolic_tail)

    def with_order(self, order: int) -> "Diffeomorphism":
        return Diffeomorphism(
            tuple(self.coefficient(j) for j in range(order)), self.symbolic_tail
        )

    @classmethod
    def with_assignments(cls, order: int, assignments: Mapping[str, str]) -> "Diffeomorphism":
        """Generic F with some coefficients given as strings, e.g. {"a1": "2", "a2": "1/3"}."""
        F = cls.generic(order)
        if not assignments:
            return F
        return F.substitute({name: parse_poly(value) for name, value in assignments.items()})


# -- construction -------------------------------------------------------------


def identity_series(order: int, kind: SeriesKind = SeriesKind.EGF) -> Series:
    coefficients = [ZERO] * (order + 1)
    if order >= 1:
        coefficients[1] = ONE
    return Series(kind, tuple(coefficients))


def series_from_diffeo(F: Diffeomorphism, order: Optional[int] = None) -> Series:
    """OGF t + a_1 t^2 + ... + a_{N-1} t^N, truncated at N (default F.order)."""
    if order is None:
        order = F.order
    return Series(SeriesKind.OGF, tuple([ZERO] + [F.coefficient(j) for j in range(order)]))


# -- kind conversion ------------------------------------------------------------


def to_egf(f: Series) -> Series:
    if f.kind == SeriesKind.EGF:
        return f
    return Series(
        SeriesKind.EGF, tuple(c.scale(factorial(n)) for n, c in enumerate(f.coefficients))
    )


def to_ogf(f: Series) -> Series:
    if f.kind == SeriesKind.OGF:
        return f
    return Series(
        SeriesKind.OGF,
        tuple(c.scale(Fraction(1, factorial(n))) for n, c in enumerate(f.coefficients)),
    )


def to_kind(f: Series, kind: SeriesKind) -> Series:
    return to_egf(f) if kind == SeriesKind.EGF else to_ogf(f)


def _same_kind(f: Series, g: Series) -> None:
    if f.kind != g.kind:
        raise SeriesKindMismatch(f.kind.value, g.kind.value)


# -- ring operations ---------------------------------------------------------------


def truncate(f: Series, order: int) -> Series:
    if order > f.truncation:
        raise OrderMismatch(order, f.truncation)
    if order < 0:
        raise OrderUnderflow("truncate", order)
    return Series(f.kind, f.coefficients[: order + 1])


def series_add(f: Series, g: Series) -> Series:
    _same_kind(f, g)
    order = min(f.truncation, g.truncation)
    return Series(
        f.kind, tuple(f.coefficients[n] + g.coefficients[n] for n in range(order + 1))
    )


def series_sub(f: Series, g: Series) -> Series:
    return series_add(f, scale(g, -1))


def scale(f: Series, factor: Coefficient) -> Series:
    if isinstance(factor, Polynomial):
        return Series(f.kind, tuple(c * factor for c in f.coefficients))
    return Series(f.kind, tuple(c.scale(factor) for c in f.coefficients))


def series_mul(f: Series, g: Series) -> Series:
    _same_kind(f, g)
    order = min(f.truncation, g.truncation)
    out: List[Polynomial] = []
    for n in range(order + 1):
        total = ZERO
        for k in range(n + 1):
            fk, gk = f.coefficients[k], g.coefficients[n - k]
            if fk.is_zero() or gk.is_zero():
                continue
            term = fk * gk
            if f.kind == SeriesKind.EGF:
                term = term.scale(comb(n, k))
            total = total + term
        out.append(total)
    return Series(f.kind, tuple(out))


def derive(f: Series) -> Series:
    """d/dt; the truncation order drops by one."""
    if f.truncation < 1:
        raise OrderUnderflow("derive", f.truncation)
    if f.kind == SeriesKind.EGF:
        return Series(f.kind, f.coefficients[1:])
    return Series(
        f.kind, tuple(c.scale(n) for n, c in enumerate(f.coefficients) if n >= 1)
    )


def integrate(f: Series) -> Series:
    """Antiderivative with constant of integration 0; the order rises by one."""
    if f.kind == SeriesKind.EGF:
        return Series(f.kind, (ZERO,) + f.coefficients)
    return Series(
        f.kind,
        (ZERO,) + tuple(c.scale(Fraction(1, n + 1)) for n, c in enumerate(f.coefficients)),
    )


def theta(f: Series) -> Series:
    """The operator t*d/dt, which keeps the truncation order."""
    return Series(f.kind, tuple(c.scale(n) for n, c in enumerate(f.coefficients)))


def mul_t(f: Series) -> Series:
    if f.kind == SeriesKind.OGF:
        return Series(f.kind, (ZERO,) + f.coefficients)
    return Series(
        f.kind, (ZERO,) + tuple(c.scale(n + 1) for n, c in enumerate(f.coefficients))
    )


def reflect(f: Series) -> Series:
    """f(-t)."""
    return Series(f.kind, tuple(c if n % 2 == 0 else -c for n, c in enumerate(f.coefficients)))


# -- composition and inversion -------------------------------------------------------


def _check_composable(f: Series, g: Series) -> None:
    _same_kind(f, g)
    if f.truncation != g.truncation:
        raise OrderMismatch(f.truncation, g.truncation)
    if not g.coefficients[0].is_zero():
        raise NonzeroConstantTerm(format_poly(g.coefficients[0]))


def compose(f: Series, g: Series) -> Series:
    """
    f(g(t)) by Faa di Bruno: h_n = sum_k f_k B_{n,k}(g_1, g_2, ...) on EGF
    coefficients. OGF inputs are converted and the result converted back.
    """
    _check_composable(f, g)
    fe, ge = to_egf(f), to_egf(g)
    order = f.truncation
    args = BellArgs(ge.coefficients[1:])
    out: List[Polynomial] = [fe.coefficients[0]]
    for n in range(1, order + 1):
        total = ZERO
        for k in range(1, n + 1):
            fk = fe.coefficients[k]
            if fk.is_zero():
                continue
            total = total + fk * bell_fast(n, k, args)
        out.append(total)
    return to_kind(Series(SeriesKind.EGF, tuple(out)), f.kind)


def compose_naive(f: Series, g: Series) -> Series:
    """f(g(t)) by Horner substitution of g into f, truncated at N."""
    _check_composable(f, g)
    fo, go = to_ogf(f), to_ogf(g)
    order = f.truncation
    result = Series.of(SeriesKind.OGF, [fo.coefficients[order]] + [ZERO] * order)
    for k in range(order - 1, -1, -1):
        result = series_mul(result, go)
        result = Series(
            SeriesKind.OGF,
            (result.coefficients[0] + fo.coefficients[k],) + result.coefficients[1:],
        )
    return to_kind(result, f.kind)


def invert(f: Series) -> Series:
    """
    Compositional inverse g with f(g(t)) = t mod t^(N+1).

    Solves order by order on OGF coefficients: [t^n] g^k only involves
    g_1 .. g_{n-k+1}, so for k >= 2 it is known before g_n is, and
    g_n = -sum_{k>=2} f_k [t^n] g^k.
    """
    fo = to_ogf(f)
    order = fo.truncation
    if not fo.coefficients[0].is_zero():
        raise NonzeroConstantTerm(format_poly(fo.coefficients[0]))
    if order >= 1 and fo.coefficients[1] != ONE:
        raise NotInvertible(
            "linear coefficient must be 1", format_poly(fo.coefficients[1])
        )
    g: List[Polynomial] = [ZERO] * (order + 1)
    if order >= 1:
        g[1] = ONE
    # powers[k][n] = [t^n] g^k for the part of g known so far
    powers: List[List[Polynomial]] = [[ZERO] * (order + 1) for _ in range(order + 1)]
    if order >= 1:
        powers[1][1] = ONE
    for n in range(2, order + 1):
        for k in range(2, n + 1):
            powers[k][n] = _convolve_step(g, powers[k - 1], n, k)
        total = ZERO
        for k in range(2, n + 1):
            fk = fo.coefficients[k]
            if not fk.is_zero():
                total = total + fk * powers[k][n]
        g[n] = -total
        powers[1][n] = g[n]
    return to_kind(Series(SeriesKind.OGF, tuple(g)), f.kind)


def _convolve_step(g: Sequence[Polynomial], lower: Sequence[Polynomial], n: int, k: int) -> Polynomial:
    total = ZERO
    for i in range(1, n - k + 2):
        if g[i].is_zero() or lower[n - i].is_zero():
            continue
        total = total + g[i] * lower[n - i]
    return total


# -- JSON document format -------------------------------------------------------------


def series_to_document(f: Series) -> SeriesDocument:
    return SeriesDocument(
        kind=f.kind,
        variable="t",
        truncation=f.truncation,
        coefficients=[
            SeriesCoefficient(n=n, poly=format_poly(c)) for n, c in enumerate(f.coefficients)
        ],
    )


def series_from_document(doc: SeriesDocument) -> Series:
    by_index = {c.n: parse_poly(c.poly) for c in doc.coefficients}
    missing = [n for n in range(doc.truncation + 1) if n not in by_index]
    if missing:
        raise OrderMismatch(len(by_index) - 1, doc.truncation)
    return Series(doc.kind, tuple(by_index[n] for n in range(doc.truncation + 1)))


# -- self checks ----------------------------------------------------------------------------


def check_series_laws(order: int) -> Report:
    """Composition, inversion and calculus laws for a generic diffeomorphism."""
    F = Diffeomorphism.generic(order)
    f = to_egf(series_from_diffeo(F, order))
    g = invert(f)
    args = BellArgs.symbolic()
    X = Series.of(SeriesKind.EGF, [ZERO] + [args.get(m) for m in range(1, order + 1)])
    identity = identity_series(order)

    def law(name: str, lhs: Series, rhs: Series) -> CheckResult:
        passed = lhs == rhs
        return CheckResult(
            identity=name,
            params={"order": order},
            passed=passed,
            lhs=None if passed else str(lhs),
            rhs=None if passed else str(rhs),
        )

    checks = [
        law("compose_inverse_right", compose(f, g), identity),
        law("compose_inverse_left", compose(g, f), identity),
        law("invert_involution", invert(g), f),
        law("faa_di_bruno_vs_substitution", compose(f, X), compose_naive(f, X)),
        law("egf_ogf_round_trip", to_egf(to_ogf(X)), X),
        law("derive_integrate", derive(integrate(X)), X),
    ]
    return build_report("series", checks, order=order)
