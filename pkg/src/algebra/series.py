"""
Truncated multivariate power series over a ground field.

A series stores its coefficients exactly for all monomials of total degree
at most ``order`` (its trust order). ``order=None`` marks an exact polynomial,
which is how ground-ring constants and tabulated operation outputs are kept.
Arithmetic always takes the smaller trust order of its operands.
"""

import logging
from functools import lru_cache
from math import comb
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from src.algebra.scalars import GroundRing
from src.shared_models import NotInvertibleError, RingMismatchError

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]


def min_order(*orders: Optional[int]) -> Optional[int]:
    """Smallest finite trust order, ``None`` if every input is exact."""
    finite = [o for o in orders if o is not None]
    return min(finite) if finite else None


def monomial_key(alpha: Exponent) -> tuple:
    """Graded-lex sort key with x1 > x2 > ... ; lower degrees sort first."""
    return (sum(alpha), tuple(-a for a in alpha))


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, degree: int) -> Tuple[Exponent, ...]:
    """All exponent vectors of the given total degree, in graded-lex order."""
    if nvars == 0:
        return ((),) if degree == 0 else ()
    out = []
    for a in range(degree, -1, -1):
        for rest in monomials_of_degree(nvars - 1, degree - a):
            out.append((a,) + rest)
    return tuple(out)


def monomials_up_to(nvars: int, degree: int) -> Iterator[Exponent]:
    for d in range(degree + 1):
        yield from monomials_of_degree(nvars, d)


def unit_exponent(nvars: int, i: int) -> Exponent:
    return tuple(1 if j == i else 0 for j in range(nvars))


def split_index(alpha: Exponent) -> Optional[int]:
    """Index used by the canonical splitting: the first variable present in x^alpha."""
    for i, a in enumerate(alpha):
        if a > 0:
            return i
    return None


class TruncatedSeries:
    """Element of R0[[x1..xn]] known exactly modulo m^(order+1)."""

    __slots__ = ("ring", "nvars", "order", "_terms")

    def __init__(
        self,
        ring: GroundRing,
        nvars: int,
        terms: Optional[Mapping[Exponent, object]] = None,
        order: Optional[int] = None,
    ):
        self.ring = ring
        self.nvars = nvars
        self.order = order
        self._terms: Dict[Exponent, object] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != nvars:
                raise RingMismatchError(f"Exponent {alpha} does not have {nvars} entries")
            if order is not None and sum(alpha) > order:
                continue
            c = ring.element(c)
            if c != 0:
                self._terms[alpha] = c

    @classmethod
    def _raw(cls, ring, nvars, terms: Dict[Exponent, object], order) -> "TruncatedSeries":
        # terms must already be ring elements within the trust order (zeros allowed)
        s = cls.__new__(cls)
        s.ring, s.nvars, s.order = ring, nvars, order
        if ring.is_finite:
            p = ring.p
            s._terms = {a: c % p for a, c in terms.items() if c % p != 0}
        else:
            s._terms = {a: c for a, c in terms.items() if c != 0}
        return s

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, ring, nvars, order=None) -> "TruncatedSeries":
        return cls._raw(ring, nvars, {}, order)

    @classmethod
    def constant(cls, ring, nvars, value, order=None) -> "TruncatedSeries":
        return cls(ring, nvars, {(0,) * nvars: value}, order)

    @classmethod
    def one(cls, ring, nvars, order=None) -> "TruncatedSeries":
        return cls.constant(ring, nvars, 1, order)

    @classmethod
    def variable(cls, ring, nvars, i, order=None) -> "TruncatedSeries":
        """The coordinate x_(i+1) (indices are 0-based)."""
        return cls(ring, nvars, {unit_exponent(nvars, i): 1}, order)

    @classmethod
    def monomial(cls, ring, nvars, alpha, coeff=1, order=None) -> "TruncatedSeries":
        return cls(ring, nvars, {tuple(alpha): coeff}, order)

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> Dict[Exponent, object]:
        return dict(self._terms)

    def items(self) -> List[Tuple[Exponent, object]]:
        """Nonzero terms sorted graded-lex."""
        return sorted(self._terms.items(), key=lambda t: monomial_key(t[0]))

    def coefficient(self, alpha: Exponent):
        return self._terms.get(tuple(alpha), self.ring.zero)

    def constant_term(self):
        return self._terms.get((0,) * self.nvars, self.ring.zero)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(a) == 0 for a in self._terms)

    def lowest_degree(self) -> Optional[int]:
        return min((sum(a) for a in self._terms), default=None)

    def degree(self) -> Optional[int]:
        return max((sum(a) for a in self._terms), default=None)

    def homogeneous_part(self, d: int) -> "TruncatedSeries":
        return TruncatedSeries._raw(
            self.ring, self.nvars, {a: c for a, c in self._terms.items() if sum(a) == d}, None
        )

    def truncate(self, order: Optional[int]) -> "TruncatedSeries":
        """Forget everything above ``order``; the trust order can only go down."""
        new_order = min_order(self.order, order)
        if new_order is None:
            return self
        return TruncatedSeries._raw(
            self.ring,
            self.nvars,
            {a: c for a, c in self._terms.items() if sum(a) <= new_order},
            new_order,
        )

    def with_order(self, order: Optional[int]) -> "TruncatedSeries":
        """Declare a trust order without checking (used for exact polynomials)."""
        return TruncatedSeries(self.ring, self.nvars, self._terms, order)

    def _check(self, other: "TruncatedSeries") -> None:
        if self.ring != other.ring or self.nvars != other.nvars:
            raise RingMismatchError(
                f"Series over {self.ring}/{self.nvars} vars and {other.ring}/{other.nvars} vars"
            )

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        return TruncatedSeries.constant(self.ring, self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        order = min_order(self.order, other.order)
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out.get(a, 0) + c
        if order is not None:
            out = {a: c for a, c in out.items() if sum(a) <= order}
        return TruncatedSeries._raw(self.ring, self.nvars, out, order)

    def __radd__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        return self.__add__(other)

    def __neg__(self):
        return TruncatedSeries._raw(
            self.ring, self.nvars, {a: -c for a, c in self._terms.items()}, self.order
        )

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "TruncatedSeries":
        if c == 1:
            return self
        if c == -1:
            return -self
        c = self.ring.element(c)
        return TruncatedSeries._raw(
            self.ring, self.nvars, {a: c * v for a, v in self._terms.items()}, self.order
        )

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        order = min_order(self.order, other.order)
        left = [(a, sum(a), c) for a, c in self._terms.items()]
        right = [(b, sum(b), c) for b, c in other._terms.items()]
        out: Dict[Exponent, object] = {}
        for a, da, ca in left:
            for b, db, cb in right:
                if order is not None and da + db > order:
                    continue
                e = tuple(x + y for x, y in zip(a, b))
                out[e] = out.get(e, 0) + ca * cb
        return TruncatedSeries._raw(self.ring, self.nvars, out, order)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int) -> "TruncatedSeries":
        result = TruncatedSeries.one(self.ring, self.nvars, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift_monomial(self, alpha: Exponent, coeff=1) -> "TruncatedSeries":
        """Multiply by coeff * x^alpha; the trust order rises by |alpha|."""
        d = sum(alpha)
        order = None if self.order is None else self.order + d
        c = self.ring.element(coeff)
        return TruncatedSeries._raw(
            self.ring,
            self.nvars,
            {tuple(x + y for x, y in zip(a, alpha)): c * v for a, v in self._terms.items()},
            order,
        )

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse of a series with invertible constant term."""
        c0 = self.constant_term()
        if c0 == 0:
            raise NotInvertibleError("Series with zero constant term is not invertible")
        if self.order is None and not self.is_constant():
            raise NotInvertibleError("Inverse of a non-constant exact polynomial needs an order")
        inv0 = self.ring.inverse(c0)
        unit = TruncatedSeries.one(self.ring, self.nvars, self.order)
        tail = unit - self.scale(inv0)
        result, power = unit, unit
        for _ in range(self.order or 0):
            power = power * tail
            if power.is_zero():
                break
            result = result + power
        return result.scale(inv0)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if self.ring != other.ring or self.nvars != other.nvars:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        return f"TruncatedSeries({format_series(self)}, order={self.order})"


def format_series(s: TruncatedSeries, names: Optional[Sequence[str]] = None) -> str:
    """Human-readable rendering, e.g. ``x1^2 - 3/2*x1*x2``."""
    if s.is_zero():
        return "0"
    names = names or ([f"x{i + 1}" for i in range(s.nvars)] if s.nvars > 1 else ["x"])
    parts = []
    for alpha, c in s.items():
        mono = "*".join(
            names[i] if a == 1 else f"{names[i]}^{a}" for i, a in enumerate(alpha) if a
        )
        coeff = s.ring.format(c)
        if not mono:
            parts.append(coeff)
        elif coeff == "1":
            parts.append(mono)
        else:
            parts.append(f"{coeff}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def partial_derivative(P: TruncatedSeries, i: int) -> TruncatedSeries:
    """d/dx_(i+1); the trust order drops by one."""
    out = {}
    for alpha, c in P.terms.items():
        if alpha[i] == 0:
            continue
        beta = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
        out[beta] = P.ring.element(alpha[i]) * c
    order = None if P.order is None else P.order - 1
    return TruncatedSeries._raw(P.ring, P.nvars, out, order)


def half_hessian(P: TruncatedSeries) -> List[List[TruncatedSeries]]:
    """Matrix with 1/2 d^2/dx_i^2 on the diagonal and d^2/dx_i dx_j off it.

    The diagonal uses the binomial coefficient m(m-1)/2 so it is defined in
    every characteristic.
    """
    n = P.nvars
    order = None if P.order is None else P.order - 2
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                out = {}
                for alpha, c in P.terms.items():
                    if alpha[i] < 2:
                        continue
                    beta = alpha[:i] + (alpha[i] - 2,) + alpha[i + 1:]
                    value = P.ring.reduce(P.ring.element(comb(alpha[i], 2)) * c)
                    if value != 0:
                        out[beta] = value
                row.append(TruncatedSeries._raw(P.ring, n, out, order))
            else:
                row.append(partial_derivative(partial_derivative(P, i), j))
        rows.append(row)
    return rows


def splitting_component(P: TruncatedSeries, i: int) -> TruncatedSeries:
    """The canonical m_i(P): monomials whose first variable is x_(i+1), divided by it."""
    out = {}
    for alpha, c in P.terms.items():
        if split_index(alpha) == i:
            out[alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]] = c
    order = None if P.order is None else P.order - 1
    return TruncatedSeries._raw(P.ring, P.nvars, out, order)


def substitute(P: TruncatedSeries, values: Sequence[TruncatedSeries]) -> TruncatedSeries:
    """Evaluate P at x_i = values[i]; every value must lie in the maximal ideal."""
    if len(values) != P.nvars:
        raise RingMismatchError(f"Need {P.nvars} substitution values, got {len(values)}")
    if not values:
        return P
    target = values[0]
    for g in values:
        if g.constant_term() != 0:
            raise NotInvertibleError("Substituted series must have zero constant term")
    order = min_order(P.order, *(g.order for g in values))
    values = [g.truncate(order) for g in values]
    powers: Dict[Tuple[int, int], TruncatedSeries] = {}

    def power(i: int, k: int) -> TruncatedSeries:
        if (i, k) not in powers:
            if k == 0:
                powers[(i, k)] = TruncatedSeries.one(P.ring, target.nvars, order)
            else:
                powers[(i, k)] = power(i, k - 1) * values[i]
        return powers[(i, k)]

    result = TruncatedSeries.zero(P.ring, target.nvars, order)
    for alpha, c in P.items():
        if order is not None and sum(alpha) > order:
            continue
        term = TruncatedSeries.constant(P.ring, target.nvars, c, order)
        for i, a in enumerate(alpha):
            if a:
                term = term * power(i, a)
        result = result + term
    return result


def _binomial(e: int, j: int) -> int:
    """Generalised binomial coefficient C(e, j) for any integer e."""
    num = 1
    for t in range(j):
        num *= e - t
    den = 1
    for t in range(2, j + 1):
        den *= t
    return num // den


def laurent_expand(
    laurent: Mapping[Tuple[int, ...], object],
    rho: Sequence[object],
    order: int,
    ring: GroundRing,
) -> TruncatedSeries:
    """Expand a Laurent polynomial at z_i = rho_i (1 + x_i) up to ``order``."""
    n = len(rho)
    rho = [ring.element(r) for r in rho]
    for r in rho:
        if r == 0:
            raise NotInvertibleError("Every rho_i must be invertible")
    result = TruncatedSeries.zero(ring, n, order)
    for exps, coeff in laurent.items():
        exps = tuple(exps)
        scalar = ring.element(coeff)
        for r, e in zip(rho, exps):
            factor = r if e >= 0 else ring.inverse(r)
            for _ in range(abs(e)):
                scalar = ring.mul(scalar, factor)
        term = TruncatedSeries.constant(ring, n, scalar, order)
        for i, e in enumerate(exps):
            if e == 0:
                continue
            univariate = {
                tuple(j if t == i else 0 for t in range(n)):
                _binomial(e, j)
                for j in range(order + 1)
            }
            term = term * TruncatedSeries(ring, n, univariate, order)
        result = result + term
    logger.debug(f"Laurent expansion with {len(laurent)} terms at order {order}")
    return result


def parse_laurent(terms: Iterable[Mapping]) -> Dict[Tuple[int, ...], str]:
    """Laurent JSON terms ``[{"exp": [...], "coeff": "..."}]`` into a mapping."""
    out: Dict[Tuple[int, ...], str] = {}
    for t in terms:
        out[tuple(int(e) for e in t["exp"])] = str(t["coeff"])
    return out


def random_series(rng, ring: GroundRing, nvars: int, order: int, min_degree: int = 0,
                  density: float = 0.6, height: int = 3) -> TruncatedSeries:
    """Random series with small coefficients (``rng`` is a ``numpy`` Generator)."""
    terms = {}
    for alpha in monomials_up_to(nvars, order):
        if sum(alpha) < min_degree or rng.random() > density:
            continue
        terms[alpha] = int(rng.integers(-height, height + 1))
    return TruncatedSeries(ring, nvars, terms, order)
