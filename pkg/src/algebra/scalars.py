import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from src.shared_models import InvalidInputError, NotInvertibleError

logger = logging.getLogger(__name__)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class GroundRing:
    """The ground field: exact rationals or integers modulo a prime.

    Elements are plain Python values: ``Fraction`` for Q and ``int`` in
    ``[0, p)`` for F_p. All arithmetic on them goes through this class so
    that residues stay normalised.
    """

    kind: str = "Q"
    p: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("Q", "Fp"):
            raise InvalidInputError(f"Unknown ring kind: {self.kind}")
        if self.kind == "Fp" and (self.p is None or not _is_prime(self.p)):
            raise InvalidInputError(f"F_p needs a prime p, got {self.p}")

    @property
    def is_finite(self) -> bool:
        return self.kind == "Fp"

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == "Fp" else 0

    @property
    def zero(self):
        return 0 if self.kind == "Fp" else Fraction(0)

    @property
    def one(self):
        return 1 if self.kind == "Fp" else Fraction(1)

    def element(self, value):
        """Coerce an int, Fraction or exact string into the ring."""
        if isinstance(value, str):
            value = Fraction(value.strip())
        if self.kind == "Q":
            return Fraction(value)
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise NotInvertibleError(f"Denominator of {value} vanishes mod {self.p}")
            return value.numerator * pow(value.denominator, -1, self.p) % self.p
        return int(value) % self.p

    def reduce(self, x):
        return x % self.p if self.kind == "Fp" else x

    def add(self, a, b):
        return self.reduce(a + b)

    def mul(self, a, b):
        return self.reduce(a * b)

    def neg(self, a):
        return self.reduce(-a)

    def inverse(self, a):
        if a == 0:
            raise NotInvertibleError("Zero has no inverse")
        if self.kind == "Fp":
            return pow(a, self.p - 2, self.p)
        return 1 / Fraction(a)

    def div(self, a, b):
        return self.mul(a, self.inverse(b))

    def elements(self) -> Iterator:
        """All elements of a finite ring, in increasing residue order."""
        if not self.is_finite:
            raise ValueError("Q has no finite element list")
        return iter(range(self.p))

    def format(self, x) -> str:
        if self.kind == "Fp":
            return str(x)
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def to_json(self) -> dict:
        return {"kind": "Q"} if self.kind == "Q" else {"kind": "Fp", "p": self.p}

    def __str__(self) -> str:
        return "Q" if self.kind == "Q" else f"Fp:{self.p}"


def parse_ring(spec) -> GroundRing:
    """Parse ``"Q"``, ``"Fp:<p>"`` or a ring JSON object."""
    if isinstance(spec, dict):
        return GroundRing(spec.get("kind", "Q"), spec.get("p"))
    text = str(spec).strip()
    if text == "Q":
        return GroundRing("Q")
    if text.startswith("Fp:"):
        try:
            return GroundRing("Fp", int(text[3:]))
        except ValueError as e:
            raise InvalidInputError(f"Bad ring specification: {spec}") from e
    raise InvalidInputError(f"Bad ring specification: {spec}")


def rational_root(value: Fraction, k: int) -> list:
    """All rational k-th roots of ``value`` (empty when there are none)."""
    value = Fraction(value)
    if value == 0:
        return [Fraction(0)]

    def int_root(m: int) -> Optional[int]:
        lo, hi = 0, 1
        while hi ** k < m:
            hi *= 2
        while lo < hi:
            mid = (lo + hi) // 2
            if mid ** k < m:
                lo = mid + 1
            else:
                hi = mid
        return lo if lo ** k == m else None

    num, den = abs(value.numerator), value.denominator
    rn, rd = int_root(num), int_root(den)
    if rn is None or rd is None:
        return []
    root = Fraction(rn, rd)
    if value < 0:
        return [-root] if k % 2 == 1 else []
    return [root, -root] if k % 2 == 0 else [root]
