"""
Exterior algebra E = Lambda V on n odd generators and its extension E_R.

Basis elements v_I are encoded as bitmasks: bit i-1 set means v_i is a
factor. Coefficients are ``TruncatedSeries`` (constants for E itself).
"""

import logging
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.algebra.scalars import GroundRing
from src.algebra.series import TruncatedSeries, min_order
from src.shared_models import RingMismatchError

logger = logging.getLogger(__name__)


def grade(mask: int) -> int:
    return mask.bit_count()


def mask_to_indices(mask: int) -> List[int]:
    """1-based generator indices of a basis mask, ascending."""
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


def indices_to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        if mask >> (i - 1) & 1:
            raise ValueError(f"Repeated generator {i} in {list(indices)}")
        mask |= 1 << (i - 1)
    return mask


@lru_cache(maxsize=None)
def basis_masks(nvars: int) -> Tuple[int, ...]:
    """All subsets of {1..n} ordered by size, then lexicographically."""
    return tuple(sorted(range(1 << nvars), key=lambda m: (grade(m), mask_to_indices(m))))


@lru_cache(maxsize=None)
def wedge_sign(left: int, right: int) -> int:
    """Sign of v_left ^ v_right relative to v_(left|right); 0 if they overlap."""
    if left & right:
        return 0
    inversions = 0
    for j in range(right.bit_length()):
        if right >> j & 1:
            inversions += (left >> (j + 1)).bit_count()
    return -1 if inversions % 2 else 1


def contract_sign(i: int, mask: int) -> int:
    """Sign of v_i^dual contracted into v_mask (0-based i); 0 if v_i is absent."""
    if not mask >> i & 1:
        return 0
    before = (mask & ((1 << i) - 1)).bit_count()
    return -1 if before % 2 else 1


class Multivector:
    """Sparse element of E_R on the subset basis."""

    __slots__ = ("ring", "nvars", "_terms")

    def __init__(self, ring: GroundRing, nvars: int,
                 terms: Optional[Dict[int, TruncatedSeries]] = None):
        self.ring = ring
        self.nvars = nvars
        self._terms: Dict[int, TruncatedSeries] = {
            m: c for m, c in (terms or {}).items() if not c.is_zero()
        }

    @classmethod
    def zero(cls, ring, nvars) -> "Multivector":
        return cls(ring, nvars)

    @classmethod
    def basis(cls, ring, nvars, mask: int, coeff=1, order=None) -> "Multivector":
        if not isinstance(coeff, TruncatedSeries):
            coeff = TruncatedSeries.constant(ring, nvars, coeff, order)
        return cls(ring, nvars, {mask: coeff})

    @classmethod
    def scalar(cls, ring, nvars, value) -> "Multivector":
        return cls.basis(ring, nvars, 0, value)

    @property
    def terms(self) -> Dict[int, TruncatedSeries]:
        return dict(self._terms)

    def items(self) -> List[Tuple[int, TruncatedSeries]]:
        order = {m: k for k, m in enumerate(basis_masks(self.nvars))}
        return sorted(self._terms.items(), key=lambda t: order[t[0]])

    def coefficient(self, mask: int) -> TruncatedSeries:
        return self._terms.get(mask) or TruncatedSeries.zero(self.ring, self.nvars)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def order(self) -> Optional[int]:
        return min_order(*(c.order for c in self._terms.values()))

    def parity(self) -> int:
        """Z/2 degree of a homogeneous element (0 for zero)."""
        parities = {grade(m) % 2 for m in self._terms}
        if len(parities) > 1:
            raise ValueError("Multivector has mixed parity")
        return parities.pop() if parities else 0

    def filtration_level(self) -> int:
        return max((grade(m) for m in self._terms), default=0)

    def grade_part(self, g: int) -> "Multivector":
        return Multivector(self.ring, self.nvars,
                           {m: c for m, c in self._terms.items() if grade(m) == g})

    def parity_part(self, parity: int) -> "Multivector":
        return Multivector(self.ring, self.nvars,
                           {m: c for m, c in self._terms.items() if grade(m) % 2 == parity})

    def _check(self, other: "Multivector") -> None:
        if self.ring != other.ring or self.nvars != other.nvars:
            raise RingMismatchError("Multivectors over different rings or generator counts")

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out[m] + c if m in out else c
        return Multivector(self.ring, self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.ring, self.nvars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Multivector":
        """Multiply by a scalar or a series (R acts centrally)."""
        if isinstance(c, TruncatedSeries):
            return Multivector(self.ring, self.nvars, {m: c * v for m, v in self._terms.items()})
        return Multivector(self.ring, self.nvars, {m: v.scale(c) for m, v in self._terms.items()})

    def wedge(self, other: "Multivector") -> "Multivector":
        self._check(other)
        out: Dict[int, TruncatedSeries] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                s = wedge_sign(a, b)
                if s == 0:
                    continue
                term = (ca * cb).scale(s)
                out[a | b] = out[a | b] + term if (a | b) in out else term
        return Multivector(self.ring, self.nvars, out)

    def interior(self, i: int) -> "Multivector":
        """v_(i+1)^dual contracted into self."""
        out = {}
        for m, c in self._terms.items():
            s = contract_sign(i, m)
            if s:
                out[m & ~(1 << i)] = c.scale(s)
        return Multivector(self.ring, self.nvars, out)

    def contract(self, covector: "Covector") -> "Multivector":
        return contract(covector, self)

    def truncate(self, order: Optional[int]) -> "Multivector":
        return Multivector(self.ring, self.nvars,
                           {m: c.truncate(order) for m, c in self._terms.items()})

    def reduce_mod_m(self) -> "Multivector":
        return reduce_mod_m(self)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, Multivector):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        return f"Multivector({format_multivector(self)})"


class Covector:
    """Element of R (x) V^dual, stored as its n coefficient series."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Sequence[TruncatedSeries]):
        self.coefficients = list(coefficients)

    def __len__(self) -> int:
        return len(self.coefficients)


def wedge(a: Multivector, b: Multivector) -> Multivector:
    return a.wedge(b)


def contract(c: Covector, a: Multivector) -> Multivector:
    """The odd derivation sum_i c_i v_i^dual contracted into a."""
    if len(c) != a.nvars:
        raise RingMismatchError(f"Covector has {len(c)} entries, expected {a.nvars}")
    result = Multivector.zero(a.ring, a.nvars)
    for i, ci in enumerate(c.coefficients):
        if not ci.is_zero():
            result = result + a.interior(i).scale(ci)
    return result


def canonical_v(ring: GroundRing, nvars: int, order: Optional[int] = None) -> Multivector:
    """The canonical odd element x1 v1 + ... + xn vn of m (x) V."""
    return Multivector(ring, nvars, {
        1 << i: TruncatedSeries.variable(ring, nvars, i, order) for i in range(nvars)
    })


def reduce_mod_m(a: Multivector) -> Multivector:
    """Keep only the constant terms of every coefficient."""
    return Multivector(a.ring, a.nvars, {
        m: TruncatedSeries.constant(a.ring, a.nvars, c.constant_term())
        for m, c in a.terms.items()
    })


def format_multivector(a: Multivector) -> str:
    from src.algebra.series import format_series

    if a.is_zero():
        return "0"
    parts = []
    for m, c in a.items():
        label = "1" if m == 0 else "v" + "".join(str(i) for i in mask_to_indices(m))
        parts.append(f"({format_series(c)})*{label}")
    return " + ".join(parts)
