"""
Minimal model of end(E0) on E by homotopy transfer, and the projection
morphism Pi from end(E0) onto it.

Inputs are written (a_k, ..., a_1) and an operator applied at some slot
passes the shifted degrees of the inputs to its right. With these rules the
kernels carry no extra signs:

    p_2 = mu^2,  p_k = sum_j mu^2(X_(k-j)(a_k, ..., a_(j+1)), X_j(a_j, ..., a_1)),

where X_1 = iota and X_m = eta p_m.
"""

import logging
from itertools import product
from typing import Dict, Optional, Sequence, Tuple

from src.algebra.exterior import Multivector, mask_to_indices
from src.algebra.series import TruncatedSeries, unit_exponent
from src.ainfinity.deformation import AInfinityDeformation, BasisTuple, basis_tuples
from src.ainfinity.morphisms import morphism_defect
from src.ainfinity.potential import disc_potential
from src.mf.factorization import MatrixFactorization, MfMorphism, stabilize_skyscraper
from src.shared_models import ArityCapError, CertifiedWindow, add_issue, new_report
from src.transfer.homotopy import TransferData, build_transfer

logger = logging.getLogger(__name__)

RAW, IOTA, ETA = "raw", "iota", "eta"


class MarklKernels:
    """Memoised kernels p_k and eta p_k on tuples of iota-images of basis elements."""

    def __init__(self, T: TransferData):
        self.T = T
        self._p: Dict[BasisTuple, MfMorphism] = {}
        self._x: Dict[BasisTuple, MfMorphism] = {}

    def x(self, masks: BasisTuple) -> MfMorphism:
        if len(masks) == 1:
            return self.T.iota[masks[0]]
        if masks not in self._x:
            self._x[masks] = self.T.eta(self.p(masks))
        return self._x[masks]

    def p(self, masks: BasisTuple) -> MfMorphism:
        masks = tuple(masks)
        if masks not in self._p:
            k = len(masks)
            B = self.T.algebra
            total = B.zero()
            for j in range(1, k):
                left, right = self.x(masks[:k - j]), self.x(masks[k - j:])
                if left.is_zero() or right.is_zero():
                    continue
                total = total + B.mu([left, right])
            self._p[masks] = total
        return self._p[masks]


def minimal_model_from_transfer(T: TransferData, arity_cap: int,
                                order: Optional[int] = None) -> AInfinityDeformation:
    """mu^k_min = pi p_k (iota a_k, ..., iota a_1) for 2 <= k <= arity_cap."""
    W = T.order
    if arity_cap - 2 > W:
        raise ArityCapError(f"Arity {arity_cap} needs working order >= {arity_cap - 2}, got {W}")
    kernels = MarklKernels(T)
    ops = {}
    for k in range(2, arity_cap + 1):
        for masks in basis_tuples(T.nvars, k):
            value = T.pi(kernels.p(masks))
            if not value.is_zero():
                ops[masks] = value
        logger.debug(f"Minimal model: arity {k} done, {len(ops)} nonzero entries so far")
    return AInfinityDeformation(T.ring, T.nvars, arity_cap, W if order is None else order, ops,
                                name="B0min")


class ProjectionMorphism:
    """The A-infinity morphism Pi: end(E0) -> minimal model, with Pi^1 = pi.

    Pi^k = pi pr_1 (delta H)^(k-1), where delta applies mu^2 to adjacent
    slots and H = sum (iota pi)^(...) (x) eta (x) 1^(...) keeps raw inputs on
    the a_1 side.
    """

    def __init__(self, T: TransferData, target: AInfinityDeformation):
        self.T = T
        self.source = T.algebra
        self.target = target
        self.arity_cap = target.arity_cap
        self.ring = T.ring
        self.nvars = T.nvars

    @staticmethod
    def _shifted(f: MfMorphism) -> int:
        return (f.parity() + 1) % 2

    def _homotopy(self, tensor: Sequence[Tuple[MfMorphism, str]], coeff: int):
        l = len(tensor)
        for q in range(l):
            element, tag = tensor[q]
            if tag != RAW:
                continue
            if any(t == ETA for _, t in tensor[:q]):
                break
            s = sum(self._shifted(e) for e, _ in tensor[q + 1:]) % 2
            eta = self.T.eta(element)
            if eta.is_zero():
                continue
            left = [(e, IOTA) if t == IOTA else (self.T.iota_pi(e), IOTA) for e, t in tensor[:q]]
            if any(e.is_zero() for e, _ in left):
                continue
            yield left + [(eta, ETA)] + list(tensor[q + 1:]), -coeff if s else coeff

    def _merge(self, tensor: Sequence[Tuple[MfMorphism, str]], coeff: int):
        B = self.source
        for q in range(len(tensor) - 1):
            s = sum(self._shifted(e) for e, _ in tensor[q + 2:]) % 2
            value = B.mu([tensor[q][0], tensor[q + 1][0]])
            if value.is_zero():
                continue
            merged = list(tensor[:q]) + [(value, RAW)] + list(tensor[q + 2:])
            yield merged, -coeff if s else coeff

    def _homogeneous(self, args: Sequence[MfMorphism]) -> Multivector:
        terms = [([(a, RAW) for a in args], 1)]
        for _ in range(len(args) - 1):
            next_terms = []
            for tensor, coeff in terms:
                for t1, c1 in self._homotopy(tensor, coeff):
                    next_terms.extend(self._merge(t1, c1))
            terms = next_terms
        total = Multivector.zero(self.ring, self.nvars)
        for tensor, coeff in terms:
            total = total + self.T.pi(tensor[0][0]).scale(coeff)
        return total

    def apply(self, args: Sequence[MfMorphism]) -> Multivector:
        k = len(args)
        if k > self.arity_cap:
            raise ArityCapError(f"Pi^{k} requested with arity cap {self.arity_cap}")
        if k == 0:
            return Multivector.zero(self.ring, self.nvars)
        if k == 1:
            return self.T.pi(args[0])
        parts = [[a.parity_part(p) for p in (0, 1) if not a.parity_part(p).is_zero()]
                 for a in args]
        total = Multivector.zero(self.ring, self.nvars)
        for combo in product(*parts):
            total = total + self._homogeneous(combo)
        return total


def minimal_model(w: TruncatedSeries, arity_cap: int):
    """Transfer end(E0(w)) to E; returns (minimal model, Pi, transfer data)."""
    X: MatrixFactorization = stabilize_skyscraper(w)
    T = build_transfer(X)
    A = minimal_model_from_transfer(T, arity_cap)
    logger.info(f"Minimal model built: n={w.nvars}, order={w.order}, arity cap={arity_cap}")
    return A, ProjectionMorphism(T, A), T


def check_projection(Pi: ProjectionMorphism, inputs: Sequence[MfMorphism],
                     max_arity: int = 3) -> dict:
    """Morphism equations for Pi on all tuples drawn from ``inputs``."""
    max_arity = min(max_arity, Pi.arity_cap)
    trust = Pi.T.order - max_arity
    report = new_report(CertifiedWindow(order=trust, arity=max_arity))
    zero = Multivector.zero(Pi.ring, Pi.nvars)
    homogeneous = [f.parity_part(p) for f in inputs for p in (0, 1)
                   if not f.parity_part(p).is_zero()]
    for k in range(1, max_arity + 1):
        for args in product(homogeneous, repeat=k):
            parities = [a.parity() for a in args]
            defect = morphism_defect(Pi.apply, Pi.source.mu, Pi.target.mu, list(args), parities,
                                     zero, source_min_arity=1)
            if not defect.is_zero():
                add_issue(report, f"Projection morphism equation fails at arity {k}")
                return report
    for k in range(2, max_arity + 1):
        for masks in basis_tuples(Pi.nvars, k):
            if not Pi.apply([Pi.T.iota[m] for m in masks]).is_zero():
                add_issue(report, f"Pi^{k} is nonzero on iota-images",
                          [mask_to_indices(m) for m in masks])
                return report
    unit = Pi.source.unit()
    for k in range(2, max_arity + 1):
        for pos in range(k):
            for others in product(homogeneous, repeat=k - 1):
                args = list(others)
                args.insert(pos, unit)
                if not Pi.apply(args).is_zero():
                    add_issue(report, f"Pi^{k} is not strictly unital")
                    return report
    return report


def clifford_check(A: AInfinityDeformation, w: Optional[TruncatedSeries] = None) -> dict:
    """mu^2 on generators realises Cl(Q) with Q the quadratic part of -w.

    Checks mu^2(v_i, v_i) = [x_i^2]w and mu^2(v_i, v_j) + mu^2(v_j, v_i) = [x_i x_j]w,
    both as scalars; the products are then v_i v_i = -[x_i^2]w.
    """
    n, ring = A.nvars, A.ring
    report = new_report(CertifiedWindow(order=2, arity=2))
    if w is None:
        w = disc_potential(A, 2)
    form = [[ring.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a, b = 1 << i, 1 << j
            value = A.op((a, b)) if i == j else A.op((a, b)) + A.op((b, a))
            if any(m != 0 for m in value.terms):
                add_issue(report, f"Clifford relation for (v{i + 1}, v{j + 1}) is not scalar")
                continue
            scalar = value.coefficient(0).constant_term()
            alpha = tuple(x + y for x, y in zip(unit_exponent(n, i), unit_exponent(n, j)))
            if scalar != w.coefficient(alpha):
                add_issue(report, f"Clifford constant for (v{i + 1}, v{j + 1}) is {scalar}, "
                                  f"expected {w.coefficient(alpha)}")
            form[i][j] = form[j][i] = ring.neg(scalar)
    report["clifford_constants"] = [[ring.format(c) for c in row] for row in form]
    return report
