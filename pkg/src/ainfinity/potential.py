"""
Disc potential and the operations obtained by inserting the canonical
element v = x1 v1 + ... + xn vn into the operations of a deformation.

Insertions beyond the arity cap are unknown, so outputs carry the trust
order ``min(order, arity_cap - k)`` where k is the number of genuine inputs.
"""

import logging
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

from src.algebra.exterior import Multivector, canonical_v, grade, mask_to_indices
from src.algebra.series import TruncatedSeries
from src.ainfinity.deformation import AInfinityDeformation, basis_tuples, koszul_dagger, sign
from src.shared_models import (
    ArityCapError,
    CertifiedWindow,
    InvalidInputError,
    add_issue,
    new_report,
)

logger = logging.getLogger(__name__)


def disc_potential(A: AInfinityDeformation, order: Optional[int] = None) -> TruncatedSeries:
    """The scalar series sum_k mu^k(v, ..., v), exact modulo m^(order+1)."""
    order = A.order if order is None else order
    if A.arity_cap < order:
        raise ArityCapError(f"Disc potential to order {order} needs arity cap >= {order}")
    n = A.nvars
    terms = {}
    for masks, value in A.ops.items():
        if len(masks) > order or any(grade(m) != 1 for m in masks):
            continue
        alpha = [0] * n
        for m in masks:
            alpha[m.bit_length() - 1] += 1
        alpha = tuple(alpha)
        for out_mask, c in value.terms.items():
            terms.setdefault(out_mask, {})
            terms[out_mask][alpha] = terms[out_mask].get(alpha, 0) + c.constant_term()
    result = TruncatedSeries.zero(A.ring, n, order)
    for out_mask, coeffs in terms.items():
        part = TruncatedSeries(A.ring, n, coeffs, order)
        if part.is_zero():
            continue
        if out_mask != 0:
            raise InvalidInputError(
                f"Disc potential has a component on v{mask_to_indices(out_mask)}; grading violated"
            )
        result = part
    if result.lowest_degree() is not None and result.lowest_degree() < 2:
        raise InvalidInputError("Disc potential is not in m^2")
    logger.debug(f"Disc potential of {A.name!r} computed to order {order}")
    return result


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All ways to write ``total`` as an ordered sum of ``parts`` non-negative integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def insertion_trust(A: AInfinityDeformation, k: int, order: int) -> int:
    """Largest x-degree certified when k genuine inputs are padded with v."""
    if k > A.arity_cap:
        raise ArityCapError(f"{k} inputs exceed arity cap {A.arity_cap}")
    return min(order, A.arity_cap - k)


def insert_v(
    apply: Callable[[Sequence[Multivector]], Multivector],
    inputs: Sequence[Multivector],
    v: Multivector,
    pattern: Sequence[int],
) -> Multivector:
    """apply(v^{p_k}, a_k, v^{p_(k-1)}, ..., a_1, v^{p_0}); pattern lists p_k first."""
    args: List[Multivector] = []
    for idx, a in enumerate(inputs):
        args.extend([v] * pattern[idx])
        args.append(a)
    args.extend([v] * pattern[len(inputs)])
    return apply(args)


def mu_0v(A: AInfinityDeformation, inputs: Sequence[Multivector],
          order: Optional[int] = None) -> Multivector:
    """sum_l mu^(k+l)(a_k, ..., a_1, v, ..., v) with l copies of v after a_1."""
    order = A.order if order is None else order
    k = len(inputs)
    trust = insertion_trust(A, k, order)
    v = canonical_v(A.ring, A.nvars, trust)
    result = Multivector.zero(A.ring, A.nvars)
    for l in range(0, trust + 1):
        if k + l < 2:
            continue
        result = result + A.mu(list(inputs) + [v] * l)
    return _with_trust(result, trust, A)


def mu_v(A: AInfinityDeformation, inputs: Sequence[Multivector],
         order: Optional[int] = None) -> Multivector:
    """mu^k with v inserted in every gap, summed over all insertion patterns."""
    order = A.order if order is None else order
    k = len(inputs)
    trust = insertion_trust(A, k, order)
    v = canonical_v(A.ring, A.nvars, trust)
    result = Multivector.zero(A.ring, A.nvars)
    for l in range(0, trust + 1):
        if k + l < 2:
            continue
        for pattern in compositions(l, k + 1):
            result = result + insert_v(A.mu, inputs, v, pattern)
    return _with_trust(result, trust, A)


def _with_trust(x: Multivector, trust: int, A: AInfinityDeformation) -> Multivector:
    """Truncate and stamp every coefficient with the certified order."""
    terms = {m: c.truncate(trust).with_order(trust) for m, c in x.terms.items()}
    return Multivector(A.ring, A.nvars, terms)


def potential_multivector(A: AInfinityDeformation, order: Optional[int] = None) -> Multivector:
    P = disc_potential(A, order)
    return Multivector.scalar(A.ring, A.nvars, P)


def mu_0v_relation_check(A: AInfinityDeformation, max_arity: int = 2,
                         order: Optional[int] = None) -> dict:
    """Check the relations satisfied by the right-insertion operations.

    For (a_k, ..., a_1) the A-infinity relations with v appended give

        sum_{i>=1} (-1)^dagger mu_0v(a_k, ..., mu(a_(i+j), ..., a_(i+1)), a_i, ..., a_1)
        + sum_j mu_0v(a_k, ..., a_(j+1), mu_0v(a_j, ..., a_1))  =  -P a_1 if k = 1, else 0.
    """
    order = A.order if order is None else order
    trust = min(order, A.arity_cap - max_arity)
    report = new_report(CertifiedWindow(order=trust, arity=max_arity))
    if trust < 2:
        add_issue(report, "Arity cap too small to certify the insertion relations")
        return report
    P = disc_potential(A, trust)

    def m0v(args):
        return mu_0v(A, args, trust)

    for k in range(1, max_arity + 1):
        for masks in basis_tuples(A.nvars, k):
            args = [A.basis_element(m) for m in masks]
            parities = [grade(m) % 2 for m in masks]
            total = Multivector.zero(A.ring, A.nvars)
            for j in range(2, k + 1):
                for i in range(1, k - j + 1):
                    inner = A.mu(args[k - i - j:k - i])
                    if inner.is_zero():
                        continue
                    outer = list(args[:k - i - j]) + [inner] + list(args[k - i:])
                    total = total + m0v(outer).scale(sign(koszul_dagger(parities[k - i:])))
            for j in range(1, k + 1):
                inner = m0v(args[k - j:])
                if not inner.is_zero():
                    total = total + m0v(list(args[:k - j]) + [inner])
            if k == 1:
                total = total + args[0].scale(P)
            if not total.truncate(trust).is_zero():
                add_issue(report, f"Insertion relation fails on {describe(masks)}", describe(masks))
                logger.error(f"Insertion relation failure on {describe(masks)}")
                return report
    return report


def describe(masks: Sequence[int]) -> List[List[int]]:
    return [mask_to_indices(m) for m in masks]
