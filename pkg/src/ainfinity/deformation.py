"""
Superfiltered A-infinity deformations of the exterior algebra, stored as
tables of operations on basis tuples.

A tuple of inputs is always written left to right as (a_k, ..., a_1), so the
rightmost entry is a_1. Signs follow the rule

    sum (-1)^(sum_{l<=i} |a_l| - i) mu(a_k, ..., mu(a_(i+j), ..., a_(i+1)), a_i, ..., a_1) = 0.
"""

import logging
from itertools import product
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from src.algebra.exterior import Multivector, basis_masks, grade, wedge_sign
from src.algebra.scalars import GroundRing
from src.algebra.series import TruncatedSeries
from src.shared_models import ArityCapError, RingMismatchError

logger = logging.getLogger(__name__)

BasisTuple = Tuple[int, ...]


def koszul_dagger(parities: Sequence[int]) -> int:
    """sum(|a_l|) - i over the given right-hand inputs, mod 2."""
    return (sum(parities) - len(parities)) % 2


def sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def evaluate_multilinear(
    lookup: Callable[[BasisTuple], Optional[Multivector]],
    args: Sequence[Multivector],
    ring: GroundRing,
    nvars: int,
) -> Multivector:
    """Extend a map defined on basis tuples R-multilinearly to arbitrary inputs.

    Coefficients are even, so expanding them out of the slots costs no sign.
    """
    result: Dict[int, TruncatedSeries] = {}
    supports = [a.items() for a in args]
    if any(not s for s in supports):
        return Multivector.zero(ring, nvars)
    for combo in product(*supports):
        masks = tuple(m for m, _ in combo)
        out = lookup(masks)
        if out is None or out.is_zero():
            continue
        coeff = None
        for _, c in combo:
            coeff = c if coeff is None else coeff * c
        if coeff.is_zero():
            continue
        for m, v in out.terms.items():
            term = coeff * v
            result[m] = result[m] + term if m in result else term
    return Multivector(ring, nvars, result)


def basis_tuples(nvars: int, k: int, skip_unit: bool = False) -> Iterator[BasisTuple]:
    masks = [m for m in basis_masks(nvars) if not (skip_unit and m == 0)]
    return product(masks, repeat=k)


class AInfinityDeformation:
    """A-infinity structure on E given by its operations mu^k, 2 <= k <= arity_cap."""

    def __init__(
        self,
        ring: GroundRing,
        nvars: int,
        arity_cap: int,
        order: int,
        ops: Optional[Dict[BasisTuple, Multivector]] = None,
        name: str = "",
    ):
        self.ring = ring
        self.nvars = nvars
        self.arity_cap = arity_cap
        self.order = order
        self.name = name
        self._ops: Dict[BasisTuple, Multivector] = {}
        for key, value in (ops or {}).items():
            key = tuple(key)
            if not 2 <= len(key) <= arity_cap:
                raise ArityCapError(f"Operation of arity {len(key)} outside [2, {arity_cap}]")
            if value.ring != ring or value.nvars != nvars:
                raise RingMismatchError("Operation output over a different ring")
            if not value.is_zero():
                self._ops[key] = value

    @classmethod
    def formal(cls, ring: GroundRing, nvars: int, arity_cap: int,
               order: int) -> "AInfinityDeformation":
        """The exterior algebra itself: mu^2(a2, a1) = (-1)^|a1| a2 ^ a1, nothing else."""
        ops = {}
        for a2 in basis_masks(nvars):
            for a1 in basis_masks(nvars):
                s = wedge_sign(a2, a1)
                if s:
                    s *= sign(grade(a1))
                    ops[(a2, a1)] = Multivector.basis(ring, nvars, a2 | a1, s)
        return cls(ring, nvars, arity_cap, order, ops, name="formal")

    @property
    def ops(self) -> Dict[BasisTuple, Multivector]:
        return dict(self._ops)

    def op(self, masks: BasisTuple) -> Multivector:
        return self._ops.get(tuple(masks)) or Multivector.zero(self.ring, self.nvars)

    def zero(self) -> Multivector:
        return Multivector.zero(self.ring, self.nvars)

    def basis_element(self, mask: int) -> Multivector:
        return Multivector.basis(self.ring, self.nvars, mask)

    @staticmethod
    def parity(x: Multivector) -> int:
        return x.parity()

    def mu(self, args: Sequence[Multivector]) -> Multivector:
        """mu^k on arbitrary E_R inputs (k = len(args)); mu^0 = mu^1 = 0."""
        k = len(args)
        if k > self.arity_cap:
            raise ArityCapError(f"mu^{k} requested with arity cap {self.arity_cap}")
        if k < 2:
            return self.zero()
        return evaluate_multilinear(self._ops.get, args, self.ring, self.nvars)

    def with_ops(self, ops: Dict[BasisTuple, Multivector],
                 name: str = "") -> "AInfinityDeformation":
        return AInfinityDeformation(self.ring, self.nvars, self.arity_cap, self.order, ops,
                                    name or self.name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AInfinityDeformation):
            return NotImplemented
        if (self.ring, self.nvars) != (other.ring, other.nvars):
            return False
        keys = set(self._ops) | set(other._ops)
        return all(self.op(k) == other.op(k) for k in keys)

    __hash__ = None


def tabulate(
    evaluate: Callable[[BasisTuple], Multivector],
    nvars: int,
    arities: Iterable[int],
) -> Dict[BasisTuple, Multivector]:
    """Evaluate a multilinear family on every basis tuple of the given arities."""
    table = {}
    for k in arities:
        for masks in basis_tuples(nvars, k):
            value = evaluate(masks)
            if not value.is_zero():
                table[masks] = value
    return table
