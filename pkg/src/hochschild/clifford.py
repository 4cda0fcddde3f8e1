"""
The Clifford side of Hochschild cohomology: Cl(-1/2 Hess P) with the odd
differential -dP -| ., its truncated cohomology, the Jacobian algebra, and
the comparison with A_v.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, Hashable, List, Optional, Tuple

from src.algebra.exterior import (
    Covector,
    Multivector,
    basis_masks,
    grade,
    mask_to_indices,
)
from src.algebra.linalg import LinearSolver, Vector, cycles_and_boundaries, persistent_rank
from src.algebra.scalars import GroundRing
from src.algebra.series import (
    TruncatedSeries,
    half_hessian,
    min_order,
    monomial_key,
    monomials_up_to,
    partial_derivative,
)
from src.ainfinity.deformation import AInfinityDeformation, sign
from src.ainfinity.potential import disc_potential, insertion_trust, mu_v
from src.shared_models import (
    CertifiedWindow,
    InvalidInputError,
    VerificationError,
    add_issue,
    new_report,
)

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


def _bits(mask: int) -> Word:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _check_potential(P: TruncatedSeries) -> None:
    low = P.lowest_degree()
    if low is not None and low < 2:
        raise InvalidInputError("Potential must lie in m^2")


class CliffordAlgebra:
    """Cl(-1/2 Hess P) on the ordered basis v_I (generators in increasing order).

    v_i v_i = -1/2 d_i^2 P and v_i v_j + v_j v_i = -d_i d_j P.
    """

    def __init__(self, P: TruncatedSeries):
        _check_potential(P)
        self.potential = P
        self.ring = P.ring
        self.nvars = P.nvars
        hess = half_hessian(P)
        self.relations = [[-hess[i][j] for j in range(self.nvars)] for i in range(self.nvars)]
        self.order = None if P.order is None else P.order - 2
        self._memo: Dict[Word, Dict[int, TruncatedSeries]] = {}

    def _accumulate(self, out: Dict[int, TruncatedSeries], terms: Dict[int, TruncatedSeries],
                    coeff: TruncatedSeries) -> None:
        for m, c in terms.items():
            term = c * coeff
            out[m] = out[m] + term if m in out else term

    def normal_order(self, word: Word) -> Dict[int, TruncatedSeries]:
        """A word in the generators as a combination of ordered monomials."""
        if word in self._memo:
            return self._memo[word]
        one = TruncatedSeries.one(self.ring, self.nvars)
        result: Optional[Dict[int, TruncatedSeries]] = None
        for p in range(len(word) - 1):
            a, b = word[p], word[p + 1]
            if a < b:
                continue
            rest = word[:p] + word[p + 2:]
            result = {}
            if a == b:
                self._accumulate(result, self.normal_order(rest), self.relations[a][a])
            else:
                self._accumulate(result, self.normal_order(word[:p] + (b, a) + word[p + 2:]), -one)
                self._accumulate(result, self.normal_order(rest), self.relations[a][b])
            break
        if result is None:
            mask = 0
            for i in word:
                mask |= 1 << i
            result = {mask: one}
        self._memo[word] = result
        return result

    def multiply(self, a: Multivector, b: Multivector) -> Multivector:
        out: Dict[int, TruncatedSeries] = {}
        for I, ca in a.terms.items():
            for J, cb in b.terms.items():
                self._accumulate(out, self.normal_order(_bits(I) + _bits(J)), ca * cb)
        return Multivector(self.ring, self.nvars, out)

    def generator(self, i: int) -> Multivector:
        return Multivector.basis(self.ring, self.nvars, 1 << i)

    def differential(self, a: Multivector) -> Multivector:
        """-dP -| a."""
        partials = Covector([partial_derivative(self.potential, i) for i in range(self.nvars)])
        return -a.contract(partials)


def clifford_multiply(a: Multivector, b: Multivector, P: TruncatedSeries) -> Multivector:
    return CliffordAlgebra(P).multiply(a, b)


# -- truncated complexes ----------------------------------------------------------


@dataclass
class TruncatedComplex:
    """Finite complex over the ground field, graded by degree (mod ``period`` if set).

    ``restrict`` projects onto the quotient complex at the lower truncation.
    """

    ring: GroundRing
    keys: Dict[int, List[Hashable]]
    differential: Callable[[Hashable], Vector]
    restrict: Callable[[Vector], Vector]
    window: Tuple[int, int]
    step: int = -1
    period: Optional[int] = None
    sort_key: Optional[Callable] = None

    def degree_after(self, e: int) -> int:
        e = e + self.step
        return e % self.period if self.period else e

    def apply(self, vector: Vector) -> Vector:
        out: Vector = {}
        for k, c in vector.items():
            for key, v in self.differential(k).items():
                value = self.ring.reduce(out.get(key, 0) + c * v)
                if value == 0:
                    out.pop(key, None)
                else:
                    out[key] = value
        return out


@dataclass
class ComplexCohomology:
    window: Tuple[int, int]
    ranks: Dict[int, int] = field(default_factory=dict)
    cycle_ranks: Dict[int, int] = field(default_factory=dict)
    differential_ranks: Dict[int, int] = field(default_factory=dict)
    representatives: Dict[int, List[Vector]] = field(default_factory=dict)

    def total_rank(self) -> int:
        return sum(self.ranks.values())

    def rank_table(self) -> List[dict]:
        return [{"grade": e, "parity": e % 2, "rank": r} for e, r in sorted(self.ranks.items())]


def complex_cohomology(C: TruncatedComplex) -> ComplexCohomology:
    """Image of H(C_M) in H(C_M'), degree by degree."""
    for keys in C.keys.values():
        for key in keys:
            if C.apply(C.differential(key)):
                raise VerificationError("complex", "d^2 != 0")
    result = ComplexCohomology(C.window)
    incoming: Dict[int, List[Vector]] = {}
    for e, keys in C.keys.items():
        incoming.setdefault(C.degree_after(e), []).extend(
            C.restrict(C.differential(k)) for k in keys
        )
    for e, keys in sorted(C.keys.items()):
        cycles, solver = cycles_and_boundaries(C.ring, keys, C.differential, C.sort_key)
        boundaries = incoming.get(e, [])
        rank, reps = persistent_rank(C.ring, cycles, C.restrict, boundaries, C.sort_key)
        result.ranks[e] = rank
        result.cycle_ranks[e] = len(cycles)
        result.differential_ranks[e] = solver.rank
        result.representatives[e] = reps
    logger.debug(f"Cohomology in window {C.window}: {result.ranks}")
    return result


def _degree_margin(P: TruncatedSeries) -> int:
    lows = [partial_derivative(P, i).lowest_degree() for i in range(P.nvars)]
    return max((d for d in lows if d is not None), default=0)


def _clifford_key(key) -> tuple:
    I, alpha = key
    return (monomial_key(alpha), mask_to_indices(I))


def _clifford_differential(P: TruncatedSeries, M: int, key) -> Vector:
    I, alpha = key
    x = Multivector.basis(P.ring, P.nvars, I,
                          TruncatedSeries.monomial(P.ring, P.nvars, alpha, 1, M))
    partials = Covector([partial_derivative(P, i) for i in range(P.nvars)])
    image = -x.contract(partials)
    return {(J, beta): c for J, s in image.terms.items()
            for beta, c in s.truncate(M).terms.items()}


def _drop_above(limit: int, vector: Vector) -> Vector:
    return {k: c for k, c in vector.items() if sum(k[1]) <= limit}


def clifford_complex(P: TruncatedSeries) -> TruncatedComplex:
    """(Cl(-1/2 Hess P), -dP -| .) over R/m^(M+1), M = N - 1, as a complex over the field."""
    _check_potential(P)
    if P.order is None:
        raise InvalidInputError("The Clifford complex needs a finite order")
    M = P.order - 1
    M_low = M - _degree_margin(P)
    n = P.nvars
    keys: Dict[int, List[Hashable]] = {}
    for I in basis_masks(n):
        keys.setdefault(grade(I), []).extend((I, alpha) for alpha in monomials_up_to(n, M))
    return TruncatedComplex(
        ring=P.ring,
        keys=keys,
        differential=partial(_clifford_differential, P, M),
        restrict=partial(_drop_above, M_low),
        window=(M, M_low),
        sort_key=_clifford_key,
    )


def vector_to_multivector(ring: GroundRing, nvars: int, vector: Vector,
                          order: Optional[int] = None) -> Multivector:
    table: Dict[int, Dict] = {}
    for (I, alpha), c in vector.items():
        table.setdefault(I, {})[alpha] = c
    return Multivector(ring, nvars, {I: TruncatedSeries(ring, nvars, t, order)
                                     for I, t in table.items()})


# -- Jacobian algebra ---------------------------------------------------------------


class JacobianAlgebra:
    """R/(d_1 P, ..., d_n P) truncated at m^(M+1), M = N - 1.

    Normal forms pivot on the lowest monomial, so reducing a series only
    introduces higher-degree terms.
    """

    def __init__(self, P: TruncatedSeries):
        _check_potential(P)
        if P.order is None:
            raise InvalidInputError("The Jacobian algebra needs a finite order")
        self.ring = P.ring
        self.nvars = P.nvars
        self.order = P.order - 1
        self.solver = LinearSolver(P.ring, sort_key=monomial_key)
        for i in range(P.nvars):
            d = partial_derivative(P, i)
            low = d.lowest_degree()
            if low is None:
                continue
            for beta in monomials_up_to(P.nvars, self.order - low):
                self.solver.add(d.shift_monomial(beta).truncate(self.order).terms)
        pivots = set(self.solver.pivots)
        self.basis = [alpha for alpha in monomials_up_to(self.nvars, self.order)
                      if alpha not in pivots]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def rank_by_degree(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for alpha in self.basis:
            out[sum(alpha)] = out.get(sum(alpha), 0) + 1
        return out

    def reduce(self, s: TruncatedSeries, order: Optional[int] = None) -> TruncatedSeries:
        order = min_order(self.order, order, s.order)
        remainder = self.solver.normal_form(s.truncate(self.order).terms)
        return TruncatedSeries(self.ring, self.nvars, remainder, order)

    def contains(self, s: TruncatedSeries, order: Optional[int] = None) -> bool:
        return self.reduce(s, order).is_zero()


def jacobian_algebra(P: TruncatedSeries) -> JacobianAlgebra:
    return JacobianAlgebra(P)


def embed_and_centre_check(P: TruncatedSeries) -> dict:
    """Every cohomology representative supercommutes with each v_l modulo (d_i P)."""
    C = clifford_complex(P)
    H = complex_cohomology(C)
    cl = CliffordAlgebra(P)
    jac = JacobianAlgebra(P)
    M, M_low = C.window
    trust = min(M_low, cl.order if cl.order is not None else M_low)
    report = new_report(CertifiedWindow(order=trust))
    report["ranks"] = H.rank_table()
    report["jacobian_rank"] = jac.rank
    checked = 0
    for e, reps in H.representatives.items():
        for z in reps:
            a = vector_to_multivector(P.ring, P.nvars, z, M_low)
            for l in range(P.nvars):
                v = cl.generator(l)
                commutator = cl.multiply(v, a) - cl.multiply(a, v).scale(sign(e))
                if any(not jac.contains(c, trust) for c in commutator.terms.values()):
                    add_issue(report, f"Representative in degree {e} is not central",
                              {"degree": e, "generator": l + 1})
                    break
            checked += 1
    report["representatives_checked"] = checked
    report["centre_check"] = "pass" if report["is_valid"] else "fail"
    logger.info(f"Centre check on {checked} representatives: {report['centre_check']}")
    return report


def theta_chain_check(A: AInfinityDeformation, order: Optional[int] = None) -> dict:
    """Left-nested products v_I = ((v_i1 v_i2) ...) v_ir in A_v carry d_v to the C differential.

    Products use the dg rule a.b = (-1)^|b| mu_v^2(a, b) and d_v a = (-1)^|a| mu_v^1(a).
    """
    order = A.order if order is None else order
    n = A.nvars
    trust = min(order, insertion_trust(A, 2, order))
    P = disc_potential(A, min(trust + 1, A.arity_cap))
    trust = min(trust, P.order - 1)
    report = new_report(CertifiedWindow(order=trust))
    theta: Dict[int, Multivector] = {0: A.basis_element(0)}
    for I in basis_masks(n):
        if I == 0:
            continue
        bits = _bits(I)
        prev = theta[I & ~(1 << bits[-1])]
        gen = A.basis_element(1 << bits[-1])
        theta[I] = mu_v(A, [prev, gen], trust).scale(-1)
        lead = theta[I].grade_part(grade(I))
        if lead.coefficient(I).constant_term() != 1:
            add_issue(report, f"theta(v{mask_to_indices(I)}) does not start with v_I")
    partials = [partial_derivative(P, i) for i in range(n)]
    for I, t in theta.items():
        d_theta = mu_v(A, [t], trust).scale(sign(grade(I)))
        expected = Multivector.zero(A.ring, n)
        for j, i in enumerate(_bits(I), start=1):
            expected = expected + theta[I & ~(1 << i)].scale(partials[i]).scale(sign(j))
        if not (d_theta - expected).truncate(trust).is_zero():
            add_issue(report, f"d_v theta(v{mask_to_indices(I)}) differs from the C differential",
                      mask_to_indices(I))
            break
    return report
