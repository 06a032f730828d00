"""
Exact scalar and sparse multivariate polynomial arithmetic over the rationals.

Every coefficient in the library is a ``fractions.Fraction``. Polynomials live
in the closed alphabet

    a1 < a2 < ... < M < s_1_2 < s_1_3 < ... < l3 < l4 < ... < x1 < x2 < ...

where ``a_j`` are the diffeomorphism coefficients, ``M`` stands for m^2,
``s_i_j`` for the dot product p_i.p_j, ``l_s`` for the coupling lambda_s and
``x_i`` for generic Bell polynomial arguments.
"""

import re
from fractions import Fraction
from typing import (
    Callable,
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Tuple,
    Union,
)

from app.exceptions import MissingAssignment, PolynomialParseError, UnknownIndeterminate

Rational = Fraction
Scalar = Union[int, Fraction]

_RANK_A = 0
_RANK_M = 1
_RANK_S = 2
_RANK_L = 3
_RANK_X = 4

_NAME_RE = re.compile(
    r"a(?P<a>[1-9]\d*)|(?P<M>M)|s_(?P<si>[1-9]\d*)_(?P<sj>[1-9]\d*)"
    r"|l(?P<l>[1-9]\d*)|x(?P<x>[1-9]\d*)"
)


class Indeterminate(NamedTuple):
    """A variable of the closed alphabet; tuple order is the alphabet order."""

    rank: int
    i: int = 0
    j: int = 0

    @property
    def name(self) -> str:
        if self.rank == _RANK_A:
            return f"a{self.i}"
        if self.rank == _RANK_M:
            return "M"
        if self.rank == _RANK_S:
            return f"s_{self.i}_{self.j}"
        if self.rank == _RANK_L:
            return f"l{self.i}"
        return f"x{self.i}"

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, name: str) -> "Indeterminate":
        match = _NAME_RE.fullmatch(name.strip())
        if match is None:
            raise UnknownIndeterminate(name)
        if match.group("a"):
            return cls(_RANK_A, int(match.group("a")))
        if match.group("M"):
            return cls(_RANK_M)
        if match.group("si"):
            i, j = int(match.group("si")), int(match.group("sj"))
            if i >= j:
                raise UnknownIndeterminate(name)
            return cls(_RANK_S, i, j)
        if match.group("l"):
            s = int(match.group("l"))
            if s < 3:
                raise UnknownIndeterminate(name)
            return cls(_RANK_L, s)
        return cls(_RANK_X, int(match.group("x")))


def a_var(j: int) -> Indeterminate:
    return Indeterminate(_RANK_A, j)


def s_var(i: int, j: int) -> Indeterminate:
    if i == j:
        raise UnknownIndeterminate(f"s_{i}_{j}")
    return Indeterminate(_RANK_S, min(i, j), max(i, j))


def l_var(s: int) -> Indeterminate:
    if s < 3:
        raise UnknownIndeterminate(f"l{s}")
    return Indeterminate(_RANK_L, s)


def x_var(i: int) -> Indeterminate:
    return Indeterminate(_RANK_X, i)


M_VAR = Indeterminate(_RANK_M)


def a_weight(v: Indeterminate) -> int:
    """Grading with a_j of weight j and every other variable of weight 0."""
    return v.i if v.rank == _RANK_A else 0

Monomial = Tuple[Tuple[Indeterminate, int], ...]

# Sorts after every real variable; makes a longer monomial precede its prefix.
_END = ((99,), 0)


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    merged = dict(m1)
    for v, e in m2:
        merged[v] = merged.get(v, 0) + e
    return tuple(sorted(merged.items()))


def _term_key(mono: Monomial) -> tuple:
    degree = sum(e for _, e in mono)
    return (-degree, tuple((v, -e) for v, e in mono) + (_END,))


def _as_indeterminate(key: Union[str, Indeterminate]) -> Indeterminate:
    if isinstance(key, Indeterminate):
        return key
    return Indeterminate.parse(key)


class Polynomial:
    """Immutable sparse polynomial: monomial -> nonzero Fraction."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Scalar]] = None):
        self._terms: Dict[Monomial, Fraction] = {}
        self._hash: Optional[int] = None
        if terms:
            for mono, coef in terms.items():
                if coef:
                    self._terms[tuple(sorted(mono))] = Fraction(coef)

    @classmethod
    def _wrap(cls, terms: Dict[Monomial, Fraction]) -> "Polynomial":
        # Trusted constructor: canonical monomials, no zero coefficients.
        poly = cls.__new__(cls)
        poly._terms = terms
        poly._hash = None
        return poly

    @classmethod
    def constant(cls, value: Scalar) -> "Polynomial":
        if not value:
            return cls._wrap({})
        return cls._wrap({(): Fraction(value)})

    @classmethod
    def variable(cls, v: Union[str, Indeterminate], power: int = 1) -> "Polynomial":
        ind = _as_indeterminate(v)
        if power == 0:
            return cls.constant(1)
        return cls._wrap({((ind, power),): Fraction(1)})

    # -- inspection -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Terms in canonical graded-lexicographic order."""
        return sorted(self._terms.items(), key=lambda item: _term_key(item[0]))

    def items(self) -> Iterable[Tuple[Monomial, Fraction]]:
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def variables(self) -> List[Indeterminate]:
        found = {v for mono in self._terms for v, _ in mono}
        return sorted(found)

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e for _, e in mono) for mono in self._terms)

    def weighted_degrees(self, weight: Callable[[Indeterminate], int]) -> List[int]:
        """Weighted degree of every monomial, in canonical order."""
        return [sum(weight(v) * e for v, e in mono) for mono, _ in self.terms()]

    # -- arithmetic -----------------------------------------------------

    def _coerce(self, other: object) -> Optional["Polynomial"]:
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other)
        return None

    def __add__(self, other: object) -> "Polynomial":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        if not rhs._terms:
            return self
        if not self._terms:
            return rhs
        out = dict(self._terms)
        for mono, coef in rhs._terms.items():
            total = out.get(mono, 0) + coef
            if total:
                out[mono] = total
            else:
                del out[mono]
        return Polynomial._wrap(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._wrap({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: object) -> "Polynomial":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> "Polynomial":
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs + (-self)

    def scale(self, factor: Scalar) -> "Polynomial":
        if not factor or not self._terms:
            return Polynomial._wrap({})
        if factor == 1:
            return self
        factor = Fraction(factor)
        return Polynomial._wrap({m: c * factor for m, c in self._terms.items()})

    def __mul__(self, other: object) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self._terms or not other._terms:
            return Polynomial._wrap({})
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mono_mul(m1, m2)
                out[mono] = out.get(mono, 0) + c1 * c2
        return Polynomial._wrap({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if exponent < 0:
            raise ValueError("Polynomial powers must be non-negative")
        result = Polynomial.constant(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    # -- evaluation -----------------------------------------------------

    def evaluate(self, assignment: Mapping[Union[str, Indeterminate], Scalar]) -> Fraction:
        values = {_as_indeterminate(k): Fraction(v) for k, v in assignment.items()}
        total = Fraction(0)
        for mono, coef in self._terms.items():
            term = coef
            for v, e in mono:
                if v not in values:
                    raise MissingAssignment(v.name)
                term *= values[v] ** e
            total += term
        return total

    def substitute(
        self, mapping: Mapping[Union[str, Indeterminate], Union[Scalar, "Polynomial"]]
    ) -> "Polynomial":
        """Replace some indeterminates by polynomials; the rest stay symbolic."""
        images: Dict[Indeterminate, Polynomial] = {}
        for key, value in mapping.items():
            ind = _as_indeterminate(key)
            images[ind] = value if isinstance(value, Polynomial) else Polynomial.constant(value)
        powers: Dict[Tuple[Indeterminate, int], Polynomial] = {}
        acc: Dict[Monomial, Fraction] = {}
        for mono, coef in self._terms.items():
            kept: List[Tuple[Indeterminate, int]] = []
            factor = Polynomial.constant(coef)
            for v, e in mono:
                if v in images:
                    if (v, e) not in powers:
                        powers[(v, e)] = images[v] ** e
                    factor = factor * powers[(v, e)]
                else:
                    kept.append((v, e))
            rest = tuple(kept)
            for m, c in factor._terms.items():
                merged = _mono_mul(rest, m)
                acc[merged] = acc.get(merged, 0) + c
        return Polynomial._wrap({m: c for m, c in acc.items() if c})

    # -- comparison and printing -----------------------------------------

    def __eq__(self, other: object) -> bool:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self._terms == rhs._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Polynomial('{format_poly(self)}')"


ZERO = Polynomial.constant(0)
ONE = Polynomial.constant(1)


def var(name: Union[str, Indeterminate]) -> Polynomial:
    return Polynomial.variable(name)


def const(value: Scalar) -> Polynomial:
    return Polynomial.constant(value)


def to_rational(value: Union[str, Scalar]) -> Fraction:
    """Parse ``3``, ``-3/4`` or pass a number through as an exact Fraction."""
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise PolynomialParseError(value, 0, f"not a rational number ({e})")
    return Fraction(value)


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def poly_sub(p: Polynomial, q: Polynomial) -> Polynomial:
    return p - q


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def poly_eval(
    p: Polynomial, assignment: Mapping[Union[str, Indeterminate], Scalar]
) -> Fraction:
    return p.evaluate(assignment)


def poly_sum(polys: Iterable[Polynomial]) -> Polynomial:
    """Sum many polynomials with a single accumulator."""
    acc: Dict[Monomial, Fraction] = {}
    for p in polys:
        for mono, coef in p.items():
            acc[mono] = acc.get(mono, 0) + coef
    return Polynomial._wrap({m: c for m, c in acc.items() if c})


def poly_product(polys: Iterable[Polynomial]) -> Polynomial:
    result = ONE
    for p in polys:
        result = result * p
        if result.is_zero():
            break
    return result


# -- canonical string format ------------------------------------------------


def _format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_poly(p: Polynomial) -> str:
    """Canonical, bit-exact rendering, e.g. ``12*a1^2 - 6*a2``."""
    if p.is_zero():
        return "0"
    pieces: List[str] = []
    for index, (mono, coef) in enumerate(p.terms()):
        factors = [v.name if e == 1 else f"{v.name}^{e}" for v, e in mono]
        magnitude = abs(coef)
        if not factors:
            body = _format_rational(magnitude)
        elif magnitude == 1:
            body = "*".join(factors)
        else:
            body = _format_rational(magnitude) + "*" + "*".join(factors)
        if index == 0:
            pieces.append(("-" if coef < 0 else "") + body)
        else:
            pieces.append((" - " if coef < 0 else " + ") + body)
    return "".join(pieces)


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*^]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens: List[Tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise PolynomialParseError(text, pos, f"unexpected character {text[pos]!r}")
        kind = match.lastgroup or ""
        tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    return tokens


def parse_poly(text: str) -> Polynomial:
    """Parse the canonical grammar: ``term (('+'|'-') term)*``."""
    tokens = _tokenize(text)
    if not tokens:
        raise PolynomialParseError(text, 0, "empty input")
    index = 0

    def peek() -> Optional[Tuple[str, str, int]]:
        return tokens[index] if index < len(tokens) else None

    def parse_factor() -> Polynomial:
        nonlocal index
        token = peek()
        if token is None:
            raise PolynomialParseError(text, len(text), "expected a factor")
        kind, value, position = token
        index += 1
        if kind == "num":
            num, _, den = value.partition("/")
            if den and int(den) == 0:
                raise PolynomialParseError(text, position, "zero denominator")
            return Polynomial.constant(Fraction(int(num), int(den) if den else 1))
        if kind == "name":
            ind = Indeterminate.parse(value)
            exponent = 1
            nxt = peek()
            if nxt is not None and nxt[1] == "^":
                index += 1
                exp_token = peek()
                if exp_token is None or exp_token[0] != "num" or "/" in exp_token[1]:
                    raise PolynomialParseError(text, position, "exponent must be an integer")
                index += 1
                exponent = int(exp_token[1])
            return Polynomial.variable(ind, exponent)
        raise PolynomialParseError(text, position, f"unexpected {value!r}")

    def parse_term() -> Polynomial:
        nonlocal index
        result = parse_factor()
        while True:
            token = peek()
            if token is None or token[1] != "*":
                return result
            index += 1
            result = result * parse_factor()

    sign = 1
    first = peek()
    if first is not None and first[1] in "+-" and first[0] == "op":
        sign = -1 if first[1] == "-" else 1
        index += 1
    total = parse_term().scale(sign)
    while index < len(tokens):
        kind, value, position = tokens[index]
        if kind != "op" or value not in "+-":
            raise PolynomialParseError(text, position, f"expected '+' or '-', got {value!r}")
        index += 1
        term = parse_term()
        total = total + term if value == "+" else total - term
    return total


def split_assignments(text: Optional[str]) -> Dict[str, str]:
    """``"a1=2, a2=1/3"`` -> ``{"a1": "2", "a2": "1/3"}``; names and values are not validated."""
    if not text or not text.strip():
        return {}
    pairs: Dict[str, str] = {}
    position = 0
    for item in text.split(","):
        name, sep, value = item.partition("=")
        if not sep or not name.strip() or not value.strip():
            raise PolynomialParseError(text, position, f"expected name=value, got {item.strip()!r}")
        pairs[name.strip()] = value.strip()
        position += len(item) + 1
    return pairs


def parse_substitution(text: Optional[str]) -> Dict[Indeterminate, Polynomial]:
    """Parse ``"x1=1, x2=2*a1"`` into a substitution mapping."""
    return {
        Indeterminate.parse(name): parse_poly(value)
        for name, value in split_assignments(text).items()
    }
