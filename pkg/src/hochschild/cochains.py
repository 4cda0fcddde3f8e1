"""
Reduced Hochschild cochains of a deformation A of E, truncated at a length
cap L, with the differential, the cup product and the insertion map into
A_v.

A cochain of degree t sends a basis tuple (a_r, ..., a_1) to an element of
parity t + sum |a_i| - r. On shifted spaces it acts with degree t + 1, so

    d phi = sum (-1)^((t+1) dagger_i) mu(..., phi(...), a_i, ..., a_1)
          + (-1)^t sum (-1)^dagger_i phi(..., mu(...), a_i, ..., a_1).

Cochains of length > L form a subcomplex, so lengths <= L is a quotient
complex and everything here is exact on it.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.algebra.exterior import Multivector, basis_masks, canonical_v, grade, mask_to_indices
from src.algebra.linalg import Vector, cycles_and_boundaries, persistent_rank
from src.algebra.series import TruncatedSeries
from src.ainfinity.deformation import (
    AInfinityDeformation,
    BasisTuple,
    basis_tuples,
    evaluate_multilinear,
    koszul_dagger,
    sign,
)
from src.ainfinity.potential import disc_potential, mu_v
from src.hochschild.clifford import clifford_complex, complex_cohomology
from src.shared_models import (
    ArityCapError,
    CertifiedWindow,
    InvalidInputError,
    RingMismatchError,
    add_issue,
    new_report,
)

logger = logging.getLogger(__name__)

CochainKey = Tuple[BasisTuple, int]


def output_parity(t: int, masks: Sequence[int]) -> int:
    return (t + sum(grade(m) for m in masks) - len(masks)) % 2


class HochschildCochain:
    """phi = (phi^r) for 0 <= r <= length_cap, vanishing on unit inputs."""

    def __init__(self, ring, nvars: int, parity: int, length_cap: int,
                 components: Optional[Dict[BasisTuple, Multivector]] = None):
        self.ring = ring
        self.nvars = nvars
        self.parity = parity % 2
        self.length_cap = length_cap
        self._components: Dict[BasisTuple, Multivector] = {}
        for masks, value in (components or {}).items():
            masks = tuple(masks)
            if value.is_zero() or len(masks) > length_cap:
                continue
            if 0 in masks:
                raise InvalidInputError("Reduced cochains vanish on unit inputs")
            expected = output_parity(self.parity, masks)
            if any(grade(J) % 2 != expected for J in value.terms):
                raise InvalidInputError(
                    f"Component on {[mask_to_indices(m) for m in masks]} has the wrong parity"
                )
            self._components[masks] = value

    @classmethod
    def zero(cls, A: AInfinityDeformation, parity: int, length_cap: int):
        return cls(A.ring, A.nvars, parity, length_cap)

    @classmethod
    def constant(cls, A: AInfinityDeformation, a: Multivector,
                 length_cap: int) -> "HochschildCochain":
        """Length-zero cochain with value ``a`` (homogeneous)."""
        return cls(A.ring, A.nvars, a.parity(), length_cap, {(): a})

    @classmethod
    def unit(cls, A: AInfinityDeformation, length_cap: int) -> "HochschildCochain":
        return cls.constant(A, A.basis_element(0), length_cap)

    @classmethod
    def identity(cls, A: AInfinityDeformation, length_cap: int) -> "HochschildCochain":
        """phi^1 = id on the reduced inputs; odd."""
        table = {(m,): A.basis_element(m) for m in basis_masks(A.nvars) if m}
        return cls(A.ring, A.nvars, 1, length_cap, table)

    @classmethod
    def from_vector(cls, A: AInfinityDeformation, parity: int, length_cap: int,
                    vector: Vector) -> "HochschildCochain":
        table: Dict[BasisTuple, Dict[int, object]] = {}
        for (masks, J), c in vector.items():
            table.setdefault(masks, {})[J] = c
        components = {
            masks: Multivector(A.ring, A.nvars, {J: _constant(A, c) for J, c in terms.items()})
            for masks, terms in table.items()
        }
        return cls(A.ring, A.nvars, parity, length_cap, components)

    @property
    def components(self) -> Dict[BasisTuple, Multivector]:
        return dict(self._components)

    def component(self, masks: BasisTuple) -> Multivector:
        return self._components.get(tuple(masks)) or Multivector.zero(self.ring, self.nvars)

    def is_zero(self) -> bool:
        return not self._components

    def evaluate(self, args: Sequence[Multivector]) -> Multivector:
        if len(args) > self.length_cap:
            raise ArityCapError(f"Cochain of length cap {self.length_cap} fed {len(args)} inputs")
        if not args:
            return self.component(())
        return evaluate_multilinear(self._components.get, args, self.ring, self.nvars)

    def to_vector(self) -> Vector:
        return {(masks, J): c.constant_term()
                for masks, value in self._components.items() for J, c in value.terms.items()}

    def _check(self, other: "HochschildCochain") -> None:
        if (self.ring, self.nvars) != (other.ring, other.nvars):
            raise RingMismatchError("Cochains over different rings")

    def __add__(self, other: "HochschildCochain") -> "HochschildCochain":
        self._check(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if other.parity != self.parity:
            raise InvalidInputError("Adding cochains of different parity")
        table = dict(self._components)
        for masks, value in other._components.items():
            table[masks] = table[masks] + value if masks in table else value
        return HochschildCochain(self.ring, self.nvars, self.parity,
                                 min(self.length_cap, other.length_cap), table)

    def scale(self, c) -> "HochschildCochain":
        return HochschildCochain(self.ring, self.nvars, self.parity, self.length_cap,
                                 {k: v.scale(c) for k, v in self._components.items()})

    def __neg__(self) -> "HochschildCochain":
        return self.scale(-1)

    def __sub__(self, other: "HochschildCochain") -> "HochschildCochain":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HochschildCochain):
            return NotImplemented
        keys = set(self._components) | set(other._components)
        return all(self.component(k) == other.component(k) for k in keys)

    __hash__ = None


def _constant(A: AInfinityDeformation, c) -> TruncatedSeries:
    return TruncatedSeries.constant(A.ring, A.nvars, c)


def _require_cap(A: AInfinityDeformation, length_cap: int) -> None:
    if A.arity_cap < length_cap + 1:
        raise ArityCapError(f"Length cap {length_cap} needs arity cap >= {length_cap + 1}")


def reduced_tuples(nvars: int, max_length: int) -> Iterable[BasisTuple]:
    for r in range(max_length + 1):
        yield from basis_tuples(nvars, r, skip_unit=True)


def _differential_on(phi: HochschildCochain, A: AInfinityDeformation,
                     masks: BasisTuple) -> Multivector:
    t = phi.parity
    k = len(masks)
    args = [A.basis_element(m) for m in masks]
    parities = [grade(m) % 2 for m in masks]
    total = A.zero()
    for j in range(0, k):
        for i in range(0, k - j + 1):
            inner = phi.evaluate(args[k - i - j:k - i])
            if inner.is_zero():
                continue
            outer = args[:k - i - j] + [inner] + args[k - i:]
            value = A.mu(outer)
            if not value.is_zero():
                total = total + value.scale(sign((t + 1) * koszul_dagger(parities[k - i:])))
    for j in range(2, k + 1):
        for i in range(0, k - j + 1):
            inner = A.mu(args[k - i - j:k - i])
            if inner.is_zero():
                continue
            value = phi.evaluate(args[:k - i - j] + [inner] + args[k - i:])
            if not value.is_zero():
                total = total + value.scale(sign(t + koszul_dagger(parities[k - i:])))
    return total


def hochschild_differential(phi: HochschildCochain, A: AInfinityDeformation,
                            length_cap: Optional[int] = None) -> HochschildCochain:
    L = phi.length_cap if length_cap is None else min(length_cap, phi.length_cap)
    _require_cap(A, L)
    table = {}
    for masks in reduced_tuples(A.nvars, L):
        if not masks:
            continue
        value = _differential_on(phi, A, masks)
        if not value.is_zero():
            table[masks] = value
    return HochschildCochain(A.ring, A.nvars, phi.parity + 1, L, table)


def _cup_on(phi: HochschildCochain, psi: HochschildCochain, A: AInfinityDeformation,
            masks: BasisTuple) -> Multivector:
    k = len(masks)
    args = [A.basis_element(m) for m in masks]
    parities = [grade(m) % 2 for m in masks]
    tp, tq = phi.parity + 1, psi.parity + 1
    total = A.zero()
    for p in range(k + 1):
        for j in range(0, k - p + 1):
            left = phi.evaluate(args[p:p + j])
            if left.is_zero():
                continue
            for q in range(p + j, k + 1):
                for m in range(0, k - q + 1):
                    right = psi.evaluate(args[q:q + m])
                    if right.is_zero():
                        continue
                    outer = args[:p] + [left] + args[p + j:q] + [right] + args[q + m:]
                    value = A.mu(outer)
                    if value.is_zero():
                        continue
                    s = tp * koszul_dagger(parities[p + j:]) + tq * koszul_dagger(parities[q + m:])
                    total = total + value.scale(sign(s))
    return total


def cup_product(phi: HochschildCochain, psi: HochschildCochain, A: AInfinityDeformation,
                length_cap: Optional[int] = None) -> HochschildCochain:
    """(-1)^|psi| mu{phi, psi}; the unit cochain is a two-sided identity.

    Two length-zero factors among L inputs need mu^(L+2), so the length cap
    is clamped to arity_cap - 2.
    """
    L = min(phi.length_cap, psi.length_cap, A.arity_cap - 2)
    L = L if length_cap is None else min(L, length_cap)
    if L < 0:
        raise ArityCapError(f"Cup products need arity cap >= 2, got {A.arity_cap}")
    s = sign(psi.parity)
    table = {}
    for masks in reduced_tuples(A.nvars, L):
        value = _cup_on(phi, psi, A, masks)
        if not value.is_zero():
            table[masks] = value.scale(s)
    return HochschildCochain(A.ring, A.nvars, phi.parity + psi.parity, L, table)


def insertion_map(phi: HochschildCochain, A: AInfinityDeformation) -> Multivector:
    """P_v(phi) = sum_r phi^r(v, ..., v), exact modulo m^(L+1)."""
    L = phi.length_cap
    v = canonical_v(A.ring, A.nvars, L)
    total = phi.component(())
    for r in range(1, L + 1):
        total = total + phi.evaluate([v] * r)
    return Multivector(A.ring, A.nvars,
                       {m: c.truncate(L).with_order(L) for m, c in total.terms.items()})


# -- the window complex ---------------------------------------------------------


@dataclass
class HochschildWindow:
    """Reduced cochains of length <= L and their persistent cohomology (L -> L - 1)."""

    algebra: AInfinityDeformation
    length_cap: int
    ranks: Dict[Tuple[int, int], int] = field(default_factory=dict)
    representatives: Dict[int, List[HochschildCochain]] = field(default_factory=dict)
    images: Dict[CochainKey, Vector] = field(default_factory=dict)

    @property
    def certified(self) -> CertifiedWindow:
        return CertifiedWindow(length=self.length_cap - 1)

    def total_rank(self, parity: int) -> int:
        return sum(r for (g, t), r in self.ranks.items() if t == parity)

    def rank_table(self) -> List[dict]:
        return [{"grade": g, "parity": t, "rank": r} for (g, t), r in sorted(self.ranks.items())]


def window_keys(A: AInfinityDeformation, length_cap: int, parity: int) -> List[CochainKey]:
    return [(masks, J) for masks in reduced_tuples(A.nvars, length_cap)
            for J in basis_masks(A.nvars) if output_parity(parity, masks) == grade(J) % 2]


def hh_window_complex(A: AInfinityDeformation, length_cap: int) -> HochschildWindow:
    """Persistent cohomology per (length-filtration grade, parity).

    The grade of a class is the largest g such that it has a representative
    with no components of length < g.
    """
    L = length_cap
    _require_cap(A, L)
    window = HochschildWindow(A, L)

    def apply_d(parity: int, key: CochainKey) -> Vector:
        if key not in window.images:
            phi = HochschildCochain.from_vector(A, parity, L, {key: A.ring.one})
            window.images[key] = hochschild_differential(phi, A).to_vector()
        return window.images[key]

    def restrict(vector: Vector) -> Vector:
        return {k: c for k, c in vector.items() if len(k[0]) < L}

    for t in (0, 1):
        keys = window_keys(A, L, t)
        source = window_keys(A, L - 1, t + 1)
        boundaries = [restrict(apply_d(t + 1, key)) for key in source]
        previous = 0
        for g in range(L, -1, -1):
            domain = [key for key in keys if len(key[0]) >= g]
            cycles, _ = cycles_and_boundaries(A.ring, domain, partial(apply_d, t))
            rank, reps = persistent_rank(A.ring, cycles, restrict, boundaries)
            if rank > previous:
                window.ranks[(g, t)] = rank - previous
            previous = rank
            if g == 0:
                window.representatives[t] = [
                    HochschildCochain.from_vector(A, t, L, z) for z in reps
                ]
    logger.info(f"Hochschild window L={L}: ranks {window.rank_table()}")
    return window


def hh_via_insertion(A: AInfinityDeformation, length_cap: int, max_pairs: int = 6) -> dict:
    """Push window cocycles through P_v and compare both sides."""
    L = length_cap
    window = hh_window_complex(A, L)
    order = min(L, A.arity_cap - 2)
    report = new_report(CertifiedWindow(order=order, length=L - 1))
    report["ranks"] = window.rank_table()

    unit = insertion_map(HochschildCochain.unit(A, L), A)
    if unit != A.basis_element(0):
        add_issue(report, "Insertion does not send the unit to 1")

    reps = [z for t in (0, 1) for z in window.representatives.get(t, [])]
    images = []
    for z in reps:
        image = insertion_map(z, A)
        images.append(image)
        if not mu_v(A, [image], L).truncate(L).is_zero():
            add_issue(report, "A cocycle is not sent to a mu_v^1-cocycle")
            break

    for t in (0, 1):
        for key in window_keys(A, L - 1, t):
            phi = HochschildCochain.from_vector(A, t, L, {key: A.ring.one})
            lhs = insertion_map(hochschild_differential(phi, A), A)
            rhs = mu_v(A, [insertion_map(phi, A)], L)
            if (lhs - rhs).truncate(L).is_zero():
                continue
            add_issue(report, "Insertion is not a chain map",
                      [[mask_to_indices(m) for m in key[0]], mask_to_indices(key[1])])
            break

    pairs = 0
    for a, pa in zip(reps, images):
        for b, pb in zip(reps, images):
            if pairs >= max_pairs:
                break
            pairs += 1
            lhs = insertion_map(cup_product(a, b, A), A)
            rhs = mu_v(A, [pa, pb], order).scale(sign(b.parity))
            if not (lhs - rhs).truncate(order).is_zero():
                add_issue(report, "Cup product is not sent to the A_v product")
                break
    report["pairs_checked"] = pairs

    try:
        P = disc_potential(A, min(A.order, A.arity_cap))
        report["clifford_ranks"] = complex_cohomology(clifford_complex(P)).rank_table()
    except ArityCapError as e:
        logger.warning(f"Clifford side skipped: {e}")
    return report
