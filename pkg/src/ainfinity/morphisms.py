"""
A-infinity morphisms between deformations of E, their composition, the
induced change of variables, and the transport of structures along formal
diffeomorphisms.

Morphisms have degree zero on the shifted spaces, so the morphism equation

    sum (-1)^dagger F(a_k, ..., mu(...), ..., a_1) = sum mu'(F(...), ..., F(...))

and the composition formula carry no further signs.
"""

import logging
from functools import partial
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra.diffeo import FormalDiffeo, series_compose
from src.algebra.exterior import (
    Multivector,
    basis_masks,
    grade,
    mask_to_indices,
)
from src.algebra.linalg import LinearSolver, invert_matrix
from src.algebra.series import TruncatedSeries
from src.ainfinity.deformation import (
    AInfinityDeformation,
    BasisTuple,
    basis_tuples,
    evaluate_multilinear,
    koszul_dagger,
    sign,
    tabulate,
)
from src.ainfinity.potential import disc_potential
from src.shared_models import (
    ArityCapError,
    CertifiedWindow,
    InvalidInputError,
    NotInvertibleError,
    RingMismatchError,
    VerificationError,
    add_issue,
    new_report,
)

logger = logging.getLogger(__name__)


def ordered_compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered sums of ``parts`` positive integers equal to ``total``."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in ordered_compositions(total - first, parts - 1):
            yield (first,) + rest


def split_blocks(args: Sequence, lengths: Sequence[int]) -> List[List]:
    """Cut (a_k, ..., a_1) into consecutive blocks, leftmost block first."""
    blocks, start = [], 0
    for s in lengths:
        blocks.append(list(args[start:start + s]))
        start += s
    return blocks


class AInfinityMorphism:
    """Morphism of deformations of E given by tables of its components F^k, k >= 1."""

    def __init__(
        self,
        source: AInfinityDeformation,
        target: Optional[AInfinityDeformation],
        arity_cap: int,
        table: Dict[BasisTuple, Multivector],
        name: str = "",
    ):
        self.source = source
        self.target = target
        self.arity_cap = arity_cap
        self.name = name
        self.ring = source.ring
        self.nvars = source.nvars
        if target is not None and (target.ring, target.nvars) != (self.ring, self.nvars):
            raise RingMismatchError("Morphism between deformations over different rings")
        self._table = {tuple(k): v for k, v in table.items() if not v.is_zero()}

    @classmethod
    def identity(cls, A: AInfinityDeformation, arity_cap: Optional[int] = None):
        table = {(m,): A.basis_element(m) for m in basis_masks(A.nvars)}
        return cls(A, A, arity_cap or A.arity_cap, table, name="identity")

    def with_target(self, target: AInfinityDeformation) -> "AInfinityMorphism":
        return AInfinityMorphism(self.source, target, self.arity_cap, self._table, self.name)

    @property
    def table(self) -> Dict[BasisTuple, Multivector]:
        return dict(self._table)

    def component(self, masks: BasisTuple) -> Multivector:
        return self._table.get(tuple(masks)) or Multivector.zero(self.ring, self.nvars)

    def apply(self, args: Sequence[Multivector]) -> Multivector:
        k = len(args)
        if k > self.arity_cap:
            raise ArityCapError(f"Component of arity {k} beyond cap {self.arity_cap}")
        if k == 0:
            return Multivector.zero(self.ring, self.nvars)
        return evaluate_multilinear(self._table.get, args, self.ring, self.nvars)

    def linear_matrix(self) -> List[List[object]]:
        """Matrix of F^1 on the subset basis (rows: output masks)."""
        masks = basis_masks(self.nvars)
        matrix = [[self.ring.zero] * len(masks) for _ in masks]
        for col, m in enumerate(masks):
            out = self.component((m,))
            for row, r in enumerate(masks):
                matrix[row][col] = out.coefficient(r).constant_term()
        return matrix


def linear_map_from_matrix(ring, nvars, matrix) -> Dict[BasisTuple, Multivector]:
    masks = basis_masks(nvars)
    table = {}
    for col, m in enumerate(masks):
        terms = {
            r: TruncatedSeries.constant(ring, nvars, matrix[row][col])
            for row, r in enumerate(masks) if matrix[row][col] != 0
        }
        table[(m,)] = Multivector(ring, nvars, terms)
    return table


def compose_morphisms(psi: AInfinityMorphism, phi: AInfinityMorphism) -> AInfinityMorphism:
    """(psi o phi)^k = sum psi^r(phi^(s_r)(...), ..., phi^(s_1)(...))."""
    if (psi.ring, psi.nvars) != (phi.ring, phi.nvars):
        raise RingMismatchError("Composed morphisms live over different rings")
    cap = min(psi.arity_cap, phi.arity_cap)

    def evaluate(masks: BasisTuple) -> Multivector:
        args = [phi.source.basis_element(m) for m in masks]
        total = Multivector.zero(phi.ring, phi.nvars)
        k = len(args)
        for r in range(1, k + 1):
            for lengths in ordered_compositions(k, r):
                inner = [phi.apply(block) for block in split_blocks(args, lengths)]
                if any(x.is_zero() for x in inner):
                    continue
                total = total + psi.apply(inner)
        return total

    table = tabulate(evaluate, phi.nvars, range(1, cap + 1))
    return AInfinityMorphism(phi.source, psi.target, cap, table, name=f"{psi.name}o{phi.name}")


def morphism_defect(
    apply: Callable[[Sequence], object],
    source_mu: Callable[[Sequence], object],
    target_mu: Callable[[Sequence], object],
    args: Sequence,
    parities: Sequence[int],
    zero,
    source_min_arity: int = 2,
    target_min_arity: int = 2,
):
    """LHS - RHS of the morphism equation on one input tuple (a_k, ..., a_1)."""
    k = len(args)
    total = zero
    for j in range(source_min_arity, k + 1):
        for i in range(0, k - j + 1):
            inner = source_mu(list(args[k - i - j:k - i]))
            if inner.is_zero():
                continue
            outer = list(args[:k - i - j]) + [inner] + list(args[k - i:])
            value = apply(outer)
            if not value.is_zero():
                total = total + value.scale(sign(koszul_dagger(parities[k - i:])))
    for r in range(target_min_arity, k + 1):
        for lengths in ordered_compositions(k, r):
            inner = [apply(block) for block in split_blocks(args, lengths)]
            if any(x.is_zero() for x in inner):
                continue
            value = target_mu(inner)
            if not value.is_zero():
                total = total - value
    return total


def check_d_equivalence(phi: AInfinityMorphism, d: Optional[int] = None,
                        max_arity: Optional[int] = None) -> dict:
    """Morphism equations, unitality, invertibility and gr F^k = Id^k for k <= d.

    ``d=None`` means every arity up to the certified range.
    """
    max_arity = min(max_arity or phi.arity_cap, phi.arity_cap,
                    phi.source.arity_cap, phi.target.arity_cap)
    d = max_arity if d is None else d
    report = new_report(CertifiedWindow(order=phi.source.order, arity=max_arity))
    report["d"] = d
    ring, n = phi.ring, phi.nvars

    for k in range(2, max_arity + 1):
        for masks in basis_tuples(n, k):
            args = [phi.source.basis_element(m) for m in masks]
            parities = [grade(m) % 2 for m in masks]
            defect = morphism_defect(phi.apply, phi.source.mu, phi.target.mu, args, parities,
                                     Multivector.zero(ring, n))
            if not defect.is_zero():
                add_issue(report, f"Morphism equation fails at arity {k}",
                          [mask_to_indices(m) for m in masks])
                break
        if not report["is_valid"]:
            break

    if phi.component((0,)) != Multivector.scalar(ring, n, 1):
        add_issue(report, "F^1(1) != 1")
    for masks in phi.table:
        if len(masks) >= 2 and 0 in masks:
            add_issue(report, f"F^{len(masks)} is nonzero on a tuple with a unit input")
            break

    solver = LinearSolver(ring)
    for m in basis_masks(n):
        solver.add({r: c.constant_term() for r, c in phi.component((m,)).terms.items()})
    if solver.rank != 1 << n:
        add_issue(report, "F^1 is not invertible")

    for masks, value in phi.table.items():
        k = len(masks)
        top = sum(grade(m) for m in masks) - k + 1
        if any(grade(m) > top or (grade(m) - top) % 2 for m in value.terms):
            add_issue(report, f"F^{k} violates grading or filtration",
                      [mask_to_indices(m) for m in masks])
            break
    for k in range(1, min(d, max_arity) + 1):
        for masks in basis_tuples(n, k):
            top = sum(grade(m) for m in masks) - k + 1
            leading = phi.component(masks).grade_part(top)
            expected = phi.source.basis_element(masks[0]) if k == 1 else Multivector.zero(ring, n)
            if leading != expected:
                add_issue(report, f"gr F^{k} is not the identity component",
                          [mask_to_indices(m) for m in masks])
                break
    if report["is_valid"]:
        logger.info(f"Morphism {phi.name!r} is a {d}-equivalence up to arity {max_arity}")
    return report


def morphism_change_of_vars(phi: AInfinityMorphism, order: Optional[int] = None,
                            verify: bool = False) -> FormalDiffeo:
    """f = sum_k F^k(v, ..., v), read off from the grade-one part."""
    order = phi.source.order if order is None else order
    n, ring = phi.nvars, phi.ring
    coeffs: Dict[int, Dict[tuple, object]] = {}
    for masks, value in phi.table.items():
        if len(masks) > order or any(grade(m) != 1 for m in masks):
            continue
        alpha = [0] * n
        for m in masks:
            alpha[m.bit_length() - 1] += 1
        for out, c in value.terms.items():
            bucket = coeffs.setdefault(out, {})
            bucket[tuple(alpha)] = bucket.get(tuple(alpha), 0) + c.constant_term()
    components = [TruncatedSeries.zero(ring, n, order) for _ in range(n)]
    for out, bucket in coeffs.items():
        series = TruncatedSeries(ring, n, bucket, order)
        if series.is_zero():
            continue
        if grade(out) != 1:
            raise InvalidInputError(
                f"Change of variables has a component on v{mask_to_indices(out)}"
            )
        components[out.bit_length() - 1] = series
    f = FormalDiffeo(components)
    if verify and phi.target is not None:
        lhs = disc_potential(phi.source, order)
        rhs = series_compose(disc_potential(phi.target, order), f)
        if lhs != rhs:
            raise VerificationError("change_of_vars",
                                    "Source potential is not target potential o f")
    return f


def diffeo_morphism(source: AInfinityDeformation, f: FormalDiffeo,
                    arity_cap: Optional[int] = None) -> AInfinityMorphism:
    """The formal diffeomorphism attached to a change of variables.

    The linear component is Lambda(L) for the linear part L of f; the degree-k
    part of f sits on the single sorted tuple of generators for each monomial.
    """
    ring, n = source.ring, source.nvars
    if f.nvars != n:
        raise RingMismatchError("Change of variables has the wrong number of variables")
    cap = arity_cap or source.arity_cap
    L = f.linear_part()
    images = [
        Multivector(ring, n, {1 << i: TruncatedSeries.constant(ring, n, L[i][j]) for i in range(n)})
        for j in range(n)
    ]
    table = {}
    for m in basis_masks(n):
        value = Multivector.scalar(ring, n, 1)
        for idx in mask_to_indices(m):
            value = value.wedge(images[idx - 1])
        table[(m,)] = value
    for i, fi in enumerate(f.components):
        for alpha, c in fi.terms.items():
            k = sum(alpha)
            if k < 2 or k > cap:
                continue
            key = tuple(1 << j for j in range(n) for _ in range(alpha[j]))
            entry = table.get(key) or Multivector.zero(ring, n)
            table[key] = entry + Multivector.basis(ring, n, 1 << i, c)
    return AInfinityMorphism(source, None, cap, table, name="diffeo")


def random_gr_identity_diffeo(source: AInfinityDeformation, seed: int = 0,
                              density: float = 0.3, arity_cap: Optional[int] = None):
    """Random strictly unital formal diffeomorphism whose associated graded is the identity."""
    rng = np.random.default_rng(seed)
    ring, n = source.ring, source.nvars
    cap = arity_cap or source.arity_cap
    table = {(m,): source.basis_element(m) for m in basis_masks(n)}
    for k in range(1, cap + 1):
        for masks in basis_tuples(n, k, skip_unit=True):
            top = sum(grade(m) for m in masks) - k + 1
            for out in basis_masks(n):
                g = grade(out)
                if g >= top or (g - top) % 2 or rng.random() > density:
                    continue
                c = int(rng.integers(-2, 3))
                if c == 0:
                    continue
                entry = table.get(masks) or Multivector.zero(ring, n)
                table[masks] = entry + Multivector.basis(ring, n, out, c)
    return AInfinityMorphism(source, None, cap, table, name=f"random-gr-id-{seed}")


def _inverse_linear(phi: AInfinityMorphism) -> Dict[BasisTuple, Multivector]:
    try:
        inverse = invert_matrix(phi.ring, phi.linear_matrix())
    except NotInvertibleError as e:
        raise NotInvertibleError("Linear component is not invertible") from e
    return linear_map_from_matrix(phi.ring, phi.nvars, inverse)


def _change_basis(table: Dict[BasisTuple, Multivector], inverse_linear, source, k: int):
    """Re-express a k-linear table through inputs (F^1)^-1 b_k, ..., (F^1)^-1 b_1."""
    ring, n = source.ring, source.nvars
    preimages = {
        m: evaluate_multilinear(inverse_linear.get, [source.basis_element(m)], ring, n)
        for m in basis_masks(n)
    }
    out = {}
    for masks in basis_tuples(n, k):
        value = evaluate_multilinear(table.get, [preimages[m] for m in masks], ring, n)
        if not value.is_zero():
            out[masks] = value
    return out


def _pushforward_rhs(A: AInfinityDeformation, delta: AInfinityMorphism,
                     lower: AInfinityDeformation, masks: BasisTuple) -> Multivector:
    args = [A.basis_element(m) for m in masks]
    parities = [grade(m) % 2 for m in masks]
    k = len(args)
    total = A.zero()
    for j in range(2, k + 1):
        for i in range(0, k - j + 1):
            inner = A.mu(args[k - i - j:k - i])
            if inner.is_zero():
                continue
            outer = list(args[:k - i - j]) + [inner] + list(args[k - i:])
            total = total + delta.apply(outer).scale(sign(koszul_dagger(parities[k - i:])))
    for r in range(2, k):
        for lengths in ordered_compositions(k, r):
            inner = [delta.apply(b) for b in split_blocks(args, lengths)]
            if any(x.is_zero() for x in inner):
                continue
            total = total - lower.mu(inner)
    return total


def pushforward(A: AInfinityDeformation, delta: AInfinityMorphism) -> AInfinityDeformation:
    """The unique structure making ``delta`` a strict morphism A -> delta_* A.

    Solved arity by arity from
    mu'^k(D^1 a_k, ..., D^1 a_1)
        = sum (-1)^dagger D(..., mu(...), ...) - sum_{r<k} mu'^r(D(...), ...).
    """
    ring, n = A.ring, A.nvars
    cap = min(A.arity_cap, delta.arity_cap)
    inverse_linear = _inverse_linear(delta)
    new_ops: Dict[BasisTuple, Multivector] = {}
    for k in range(2, cap + 1):
        lower = AInfinityDeformation(ring, n, max(k - 1, 2), A.order, dict(new_ops))
        rhs = tabulate(partial(_pushforward_rhs, A, delta, lower), n, [k])
        new_ops.update(_change_basis(rhs, inverse_linear, A, k))
    logger.info(f"Pushed {A.name!r} forward along {delta.name!r} up to arity {cap}")
    return AInfinityDeformation(ring, n, cap, A.order, new_ops, name=f"{delta.name}_*{A.name}")


def _inverse_rhs(phi: AInfinityMorphism, lower: AInfinityMorphism,
                 masks: BasisTuple) -> Multivector:
    args = [phi.source.basis_element(m) for m in masks]
    k = len(args)
    total = Multivector.zero(phi.ring, phi.nvars)
    for r in range(1, k):
        for lengths in ordered_compositions(k, r):
            inner = [phi.apply(b) for b in split_blocks(args, lengths)]
            if any(x.is_zero() for x in inner):
                continue
            total = total - lower.apply(inner)
    return total


def inverse_morphism(phi: AInfinityMorphism) -> AInfinityMorphism:
    """Two-sided inverse of a morphism with invertible linear component.

    psi^k(F^1 a_k, ..., F^1 a_1) = -sum_{r<k} psi^r(F(...), ..., F(...)).
    """
    n = phi.nvars
    inverse_linear = _inverse_linear(phi)
    table: Dict[BasisTuple, Multivector] = dict(inverse_linear)
    name = f"{phi.name}^-1"
    for k in range(2, phi.arity_cap + 1):
        lower = AInfinityMorphism(phi.source, phi.source, k - 1, table, name=name)
        rhs = tabulate(partial(_inverse_rhs, phi, lower), n, [k])
        table.update(_change_basis(rhs, inverse_linear, phi.source, k))
    return AInfinityMorphism(phi.target or phi.source, phi.source, phi.arity_cap, table, name=name)
