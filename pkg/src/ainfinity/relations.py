import logging
from typing import Callable, List, Optional, Sequence

from src.algebra.exterior import Multivector, basis_masks, grade, mask_to_indices, wedge_sign
from src.ainfinity.deformation import (
    AInfinityDeformation,
    basis_tuples,
    koszul_dagger,
    sign,
)
from src.shared_models import CertifiedWindow, add_issue, new_report

logger = logging.getLogger(__name__)


def describe_tuple(masks: Sequence[int]) -> List[List[int]]:
    """Basis tuple as lists of 1-based generator indices, a_k first."""
    return [mask_to_indices(m) for m in masks]


def stasheff_sum(
    mu: Callable[[Sequence], object],
    args: Sequence,
    parities: Sequence[int],
    zero,
    min_inner: int = 2,
    min_outer: int = 2,
):
    """Sum over nested insertions of (-1)^dagger mu(..., mu(...), ...) for one tuple.

    ``args`` is (a_k, ..., a_1). ``min_inner``/``min_outer`` skip vanishing
    arities (2 for deformations, 1 when mu^1 is present).
    """
    k = len(args)
    total = zero
    for j in range(min_inner, k + 1):
        outer_arity = k - j + 1
        if outer_arity < min_outer:
            continue
        for i in range(0, k - j + 1):
            inner = mu(args[k - i - j:k - i])
            if inner.is_zero():
                continue
            outer_args = list(args[:k - i - j]) + [inner] + list(args[k - i:])
            value = mu(outer_args)
            if value.is_zero():
                continue
            total = total + value.scale(sign(koszul_dagger(parities[k - i:])))
    return total


def check_ainfinity(A: AInfinityDeformation, max_arity: Optional[int] = None) -> dict:
    """Verify the A-infinity relations on every basis tuple of arity <= max_arity."""
    max_arity = min(max_arity or A.arity_cap, A.arity_cap)
    report = new_report(CertifiedWindow(order=A.order, arity=max_arity))
    checked = 0
    for k in range(3, max_arity + 1):
        for masks in basis_tuples(A.nvars, k):
            args = [A.basis_element(m) for m in masks]
            parities = [grade(m) % 2 for m in masks]
            total = stasheff_sum(A.mu, args, parities, A.zero())
            checked += 1
            if not total.is_zero():
                add_issue(report,
                          f"A-infinity relation fails at arity {k} on {describe_tuple(masks)}",
                          describe_tuple(masks))
                logger.error(f"Relation failure at {describe_tuple(masks)}: {total}")
                report["tuples_checked"] = checked
                return report
    report["tuples_checked"] = checked
    logger.info(f"A-infinity relations hold on {checked} tuples up to arity {max_arity}")
    return report


def check_superfiltered_unital(A: AInfinityDeformation) -> dict:
    """Parity, filtration, associated-graded and strict-unit conditions on the table."""
    report = new_report(CertifiedWindow(order=A.order, arity=A.arity_cap))
    ring, n = A.ring, A.nvars

    for masks, value in A.ops.items():
        k = len(masks)
        total = sum(grade(m) for m in masks)
        bound = total + 2 - k
        for m in value.terms:
            if (grade(m) - bound) % 2:
                add_issue(report, f"Parity violation in mu^{k}{describe_tuple(masks)}",
                          describe_tuple(masks))
            if grade(m) > bound:
                add_issue(report, f"Filtration violation in mu^{k}{describe_tuple(masks)}",
                          describe_tuple(masks))
        if k >= 3 and not value.grade_part(bound).is_zero():
            add_issue(report, f"Associated graded of mu^{k}{describe_tuple(masks)} is nonzero",
                      describe_tuple(masks))
        if k >= 3 and 0 in masks:
            add_issue(report, f"mu^{k} with a unit input is nonzero at {describe_tuple(masks)}",
                      describe_tuple(masks))

    for a2 in basis_masks(n):
        for a1 in basis_masks(n):
            s = wedge_sign(a2, a1) * sign(grade(a1))
            expected = Multivector.basis(ring, n, a2 | a1, s) if s else Multivector.zero(ring, n)
            top = A.op((a2, a1)).grade_part(grade(a2) + grade(a1))
            if top != expected:
                add_issue(report,
                          f"Leading term of mu^2{describe_tuple((a2, a1))} is not the signed wedge",
                          describe_tuple((a2, a1)))
        element = A.basis_element(a2)
        if A.op((a2, 0)) != element:
            add_issue(report, f"mu^2(a, 1) != a for a = {mask_to_indices(a2)}")
        if A.op((0, a2)) != element.scale(sign(grade(a2))):
            add_issue(report, f"mu^2(1, a) != (-1)^|a| a for a = {mask_to_indices(a2)}")
    if not report["is_valid"]:
        logger.warning(f"Deformation {A.name!r} fails {len(report['issues'])} structural checks")
    return report
