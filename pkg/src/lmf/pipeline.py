"""
The localised mirror pipeline for a deformation A of E:

    A --Phi--> end(E_A) --Psi--> end(E0(P)) --Pi--> B0min(P)

E_A is the mirror factorisation of A, E0(P) the stabilised skyscraper of the
disc potential P, Psi conjugation by the comparison cocycle i: E_A -> E0(P)
and Pi the projection onto the minimal model.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, Optional, Sequence, Tuple

from src.algebra.exterior import Multivector, basis_masks, grade, mask_to_indices
from src.algebra.linalg import LinearSolver, Vector
from src.algebra.series import min_order, monomial_key, monomials_up_to
from src.ainfinity.deformation import (
    AInfinityDeformation,
    BasisTuple,
    basis_tuples,
    sign,
    tabulate,
)
from src.ainfinity.morphisms import (
    AInfinityMorphism,
    check_d_equivalence,
    morphism_defect,
    ordered_compositions,
    split_blocks,
)
from src.ainfinity.potential import disc_potential, insertion_trust, mu_0v
from src.mf.factorization import (
    DgEndomorphismAlgebra,
    EndKey,
    MatrixFactorization,
    MfMorphism,
    hom_differential,
    sparse_compose,
)
from src.mf.mirror import leading_terms_agree, mirror_object
from src.shared_models import (
    ArityCapError,
    CertifiedWindow,
    InvalidInputError,
    VerificationError,
    add_issue,
    new_report,
)
from src.transfer.minimal_model import ProjectionMorphism, minimal_model

logger = logging.getLogger(__name__)


def _expand(lookup: Callable[[BasisTuple], MfMorphism], args: Sequence[Multivector],
            zero: MfMorphism) -> MfMorphism:
    """Extend a family defined on basis tuples R-multilinearly."""
    total = zero
    supports = [a.items() for a in args]
    for combo in product(*supports):
        value = lookup(tuple(m for m, _ in combo))
        if value.is_zero():
            continue
        for _, c in combo:
            value = value.scale(c)
        total = total + value
    return total


class YonedaMorphism:
    """Phi: A -> end(E_A), Phi^k(a_k, ..., a_1)(a_0) = (-1)^|a_0| mu_0v(a_k, ..., a_1, a_0).

    Phi^k is certified modulo m^(t+1) with t = min(order, arity_cap - k - 1).
    """

    def __init__(self, A: AInfinityDeformation, E: MatrixFactorization):
        self.source = A
        self.factorization = E
        self.target = DgEndomorphismAlgebra(E)
        self.arity_cap = A.arity_cap - 1
        self.ring = A.ring
        self.nvars = A.nvars
        self._cache: Dict[BasisTuple, MfMorphism] = {}

    def trust(self, k: int) -> int:
        return insertion_trust(self.source, k + 1, self.factorization.order)

    def component(self, masks: BasisTuple) -> MfMorphism:
        masks = tuple(masks)
        if masks in self._cache:
            return self._cache[masks]
        A, E = self.source, self.factorization
        trust = self.trust(len(masks))
        inputs = [A.basis_element(m) for m in masks]
        terms: Dict[EndKey, object] = {}
        for I in basis_masks(self.nvars):
            out = mu_0v(A, inputs + [A.basis_element(I)], E.order)
            s = sign(grade(I))
            for J, c in out.terms.items():
                for alpha, v in c.terms.items():
                    terms[(J, I, alpha)] = s * v
        value = MfMorphism(E, E, terms, order=trust)
        self._cache[masks] = value
        return value

    def apply(self, args: Sequence[Multivector]) -> MfMorphism:
        k = len(args)
        if k > self.arity_cap:
            raise ArityCapError(f"Phi^{k} needs mu^{k + 1}, beyond the arity cap")
        if k == 0:
            return self.target.zero()
        return _expand(self.component, args, self.target.zero())


def yoneda_morphism(A: AInfinityDeformation, order: Optional[int] = None) -> YonedaMorphism:
    E = mirror_object(A, order)
    return YonedaMorphism(A, E)


def check_yoneda(Phi: YonedaMorphism, max_arity: int = 3) -> dict:
    """Morphism equations on basis tuples, strict unitality and gr Phi^1 = a ^ ."""
    max_arity = min(max_arity, Phi.arity_cap)
    A, E = Phi.source, Phi.factorization
    report = new_report(CertifiedWindow(order=Phi.trust(max_arity), arity=max_arity))
    zero = Phi.target.zero()
    for k in range(1, max_arity + 1):
        for masks in basis_tuples(Phi.nvars, k):
            args = [A.basis_element(m) for m in masks]
            parities = [grade(m) % 2 for m in masks]
            defect = morphism_defect(Phi.apply, A.mu, Phi.target.mu, args, parities, zero,
                                     target_min_arity=1)
            if not defect.truncate(Phi.trust(k)).is_zero():
                add_issue(report, f"Yoneda morphism equation fails at arity {k}",
                          [mask_to_indices(m) for m in masks])
                return report
    if Phi.component((0,)) != MfMorphism.identity(E):
        add_issue(report, "Phi^1(1) != id")
    for k in range(2, max_arity + 1):
        for masks in basis_tuples(Phi.nvars, k):
            if 0 in masks and not Phi.component(masks).is_zero():
                add_issue(report, f"Phi^{k} is nonzero on a tuple with a unit input")
                break
    for m in basis_masks(Phi.nvars):
        wedge = MfMorphism.wedge_map(E, A.basis_element(m))
        leading = Phi.component((m,)) - wedge
        if any(grade(J) - grade(I) == grade(m) for J, I, _ in leading.terms):
            add_issue(report, f"gr Phi^1(v{mask_to_indices(m)}) is not left multiplication")
            break
    return report


# -- comparison cocycle ---------------------------------------------------------


def _g_degree(key: EndKey) -> int:
    """x-degree minus shift; the common leading part -v ^ . preserves it."""
    J, I, alpha = key
    return sum(alpha) - grade(J) + grade(I)


def _sort_key(key: EndKey):
    J, I, alpha = key
    return (monomial_key(alpha), grade(J), mask_to_indices(J), grade(I), mask_to_indices(I))


def _leading_commutator(lead0: MfMorphism, lead: MfMorphism, f: MfMorphism) -> MfMorphism:
    return lead0.compose(f) - f.compose(lead)


def comparison_cocycle(E: MatrixFactorization,
                       E0: MatrixFactorization) -> Tuple[MfMorphism, MfMorphism]:
    """Degree-zero cocycle i: E -> E0 with leading term id, and its inverse.

    Solves D0 i = i D one g-degree at a time; at each step the failure is
    cancelled through the leading commutator f -> (-v ^) f - f (-v ^).
    """
    order = min_order(E.order, E0.order)
    if order is None:
        raise InvalidInputError("Comparison cocycle needs a finite working order")
    if not E.same_potential(E0):
        raise VerificationError("comparison", "Factorisations of different potentials")
    if not leading_terms_agree(E, E0):
        raise VerificationError("comparison", "Leading squifferential terms differ")
    n, ring = E.nvars, E.ring
    lead, lead0 = E.leading_part(), E0.leading_part()

    solver = LinearSolver(ring, sort_key=_sort_key)
    keys = [(J, I, alpha) for alpha in monomials_up_to(n, order - 1)
            for J in basis_masks(n) for I in basis_masks(n)
            if (grade(J) + grade(I)) % 2 == 0]
    for key in sorted(keys, key=_sort_key):
        if _g_degree(key) < 1:
            continue
        unit = MfMorphism(E, E0, {key: ring.one}, order=order)
        solver.add(_leading_commutator(lead0, lead, unit).to_vector(), {key: ring.one})

    zero = (0,) * n
    i = MfMorphism(E, E0, {(m, m, zero): 1 for m in basis_masks(n)}, order=order)
    for g in range(1, order + n + 1):
        failure = E0.differential.compose(i) - i.compose(E.differential)
        target: Vector = {k: ring.neg(c) for k, c in failure.terms.items() if _g_degree(k) == g}
        if not target:
            continue
        correction = solver.solve(target)
        if correction is None:
            raise VerificationError("comparison", f"Obstruction at g-degree {g} is not a boundary")
        i = i + MfMorphism(E, E0, correction, order=order)
    if not hom_differential(i).is_zero():
        raise VerificationError("comparison", "Corrected map is not a cocycle")
    inverse = _inverse(i, E, E0, order)
    logger.info(f"Comparison cocycle found at order {order} with {len(i.terms)} terms")
    return i, inverse


def _inverse(i: MfMorphism, E: MatrixFactorization, E0: MatrixFactorization,
             order: int) -> MfMorphism:
    """(id + c)^-1 = sum (-c)^m; c raises the g-degree so the sum is finite."""
    ring, n = i.ring, i.nvars
    zero = (0,) * n
    identity = {(m, m, zero): ring.one for m in basis_masks(n)}
    c = dict(i.terms)
    for key, v in identity.items():
        value = ring.reduce(c.get(key, 0) - v)
        if value == 0:
            c.pop(key, None)
        else:
            c[key] = value
    neg_c = {k: ring.neg(v) for k, v in c.items()}
    total = dict(identity)
    power = dict(identity)
    for _ in range(order + n + 2):
        power = sparse_compose(ring, neg_c, power, order)
        if not power:
            break
        for key, v in power.items():
            total[key] = ring.reduce(total.get(key, 0) + v)
    else:
        raise VerificationError("comparison", "Inverse series does not terminate")
    return MfMorphism(E0, E, total, order=order)


class Conjugation:
    """Psi: end(E) -> end(E0), the strict dg map a -> i o a o i^-1."""

    def __init__(self, i: MfMorphism, inverse: MfMorphism):
        self.i = i
        self.inverse = inverse
        self.source = DgEndomorphismAlgebra(i.source)
        self.target = DgEndomorphismAlgebra(i.target)

    def apply(self, args: Sequence[MfMorphism]) -> MfMorphism:
        if len(args) != 1:
            return self.target.zero()
        return self.i.compose(args[0]).compose(self.inverse)


def conjugation(i: MfMorphism, inverse: MfMorphism) -> Conjugation:
    return Conjugation(i, inverse)


# -- composite ----------------------------------------------------------------


def composite_morphism(Phi: YonedaMorphism, Psi: Conjugation, Pi: ProjectionMorphism,
                       arity_cap: int) -> AInfinityMorphism:
    """(Pi o Psi o Phi)^k = sum Pi^r(Psi Phi^(s_r)(...), ..., Psi Phi^(s_1)(...))."""
    middle: Dict[BasisTuple, MfMorphism] = {}

    def psi_phi(masks: BasisTuple) -> MfMorphism:
        if masks not in middle:
            middle[masks] = Psi.apply([Phi.component(masks)])
        return middle[masks]

    def evaluate(masks: BasisTuple) -> Multivector:
        k = len(masks)
        total = Multivector.zero(Phi.ring, Phi.nvars)
        for r in range(1, k + 1):
            for lengths in ordered_compositions(k, r):
                inner = [psi_phi(tuple(block)) for block in split_blocks(masks, lengths)]
                if any(x.is_zero() for x in inner):
                    continue
                total = total + Pi.apply(inner)
        return total

    table = tabulate(evaluate, Phi.nvars, range(1, arity_cap + 1))
    return AInfinityMorphism(Phi.source, Pi.target, arity_cap, table, name="PiPsiPhi")


@dataclass
class PipelineResult:
    """Every stage of the localised mirror pipeline for one deformation."""

    mirror: MatrixFactorization
    skyscraper: MatrixFactorization
    cocycle: MfMorphism
    inverse: MfMorphism
    yoneda: YonedaMorphism
    conjugation: Conjugation
    projection: ProjectionMorphism
    minimal_model: AInfinityDeformation
    composite: AInfinityMorphism
    report: dict = field(default_factory=dict)


def composite_equivalence(A: AInfinityDeformation, order: Optional[int] = None,
                          max_arity: Optional[int] = None) -> PipelineResult:
    """Run the pipeline and certify Pi o Psi o Phi as an infinity-equivalence."""
    Phi = yoneda_morphism(A, order)
    E = Phi.factorization
    W = E.order
    P = disc_potential(A, W)
    cap = min(A.arity_cap - 1, W + 1)
    if max_arity is not None:
        cap = min(cap, max_arity)
    if cap < 2:
        raise ArityCapError(f"Arity cap {A.arity_cap} leaves no room for the composite")
    Bmin, Pi, T = minimal_model(P, cap)
    E0 = T.factorization
    i, inverse = comparison_cocycle(E, E0)
    Psi = conjugation(i, inverse)
    composite = composite_morphism(Phi, Psi, Pi, cap)

    report = new_report(CertifiedWindow(order=W, arity=cap))
    for stage, sub in (("mirror", E.check()), ("equivalence", check_d_equivalence(composite))):
        report[stage] = sub
        for issue in sub["issues"]:
            add_issue(report, f"[{stage}] {issue}")
    if not (i.compose(inverse) - MfMorphism.identity(E0)).is_zero():
        add_issue(report, "[comparison] i o i^-1 != id")
    if not (inverse.compose(i) - MfMorphism.identity(E)).is_zero():
        add_issue(report, "[comparison] i^-1 o i != id")
    target_potential = disc_potential(Bmin, min(W, cap))
    if target_potential != P.truncate(min(W, cap)):
        add_issue(report, "[potential] Disc potential of the minimal model differs")
    if report["is_valid"]:
        logger.info(f"Pipeline for {A.name!r}: composite is an equivalence up to arity {cap}")
    else:
        logger.warning(f"Pipeline for {A.name!r} failed: {report['issues']}")
    return PipelineResult(E, E0, i, inverse, Phi, Psi, Pi, Bmin, composite, report)
