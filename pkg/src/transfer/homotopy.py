"""
Contraction data for end(E0): the cocycles f_i, the quasi-isomorphism iota,
the projection pi and the homotopy eta with

    mu^1 eta + eta mu^1 = iota pi - id,   eta iota = 0,  pi eta = 0,  eta eta = 0.

eta vanishes on im(iota). On C = ker(pi) the filtration-raising part d_1 of
mu^1 is contracted by exact linear algebra (seeded with the closed form on
m id), and the remaining part d_-1 is absorbed by the series
eta_0 sum_m (d_-1 eta_0)^m.
"""

import logging
from typing import Dict, List, Optional

import numpy as np

from src.algebra.exterior import (
    Multivector,
    basis_masks,
    contract_sign,
    grade,
    mask_to_indices,
    wedge_sign,
)
from src.algebra.linalg import LinearSolver, axpy
from src.algebra.series import (
    TruncatedSeries,
    monomial_key,
    monomials_up_to,
    split_index,
    splitting_component,
    unit_exponent,
)
from src.mf.factorization import (
    DgEndomorphismAlgebra,
    EndKey,
    MatrixFactorization,
    MfMorphism,
    as_dg_algebra,
    hom_differential,
    sparse_compose,
)
from src.shared_models import (
    CertifiedWindow,
    InvalidInputError,
    VerificationError,
    add_issue,
    new_report,
)

logger = logging.getLogger(__name__)

Vector = Dict[EndKey, object]


def _exact(w: TruncatedSeries) -> TruncatedSeries:
    return w.with_order(None)


def build_cocycles(X: MatrixFactorization) -> List[MfMorphism]:
    """f_i = v_i ^ . + sum_j lambda_ij v_j^dual -| . with lambda_ij = -m_j(w_i)."""
    n = X.nvars
    zero = (0,) * n
    w = _exact(X.potential)
    cocycles = []
    for i in range(n):
        w_i = splitting_component(w, i)
        terms: Vector = {}
        for I in basis_masks(n):
            bit = 1 << i
            if not I & bit:
                terms[(I | bit, I, zero)] = wedge_sign(bit, I)
        for j in range(n):
            lam = splitting_component(w_i, j)
            for I in basis_masks(n):
                s = contract_sign(j, I)
                if not s:
                    continue
                for alpha, c in lam.terms.items():
                    key = (I & ~(1 << j), I, alpha)
                    terms[key] = terms.get(key, 0) - s * c
        cocycles.append(MfMorphism(X, X, terms))
    return cocycles


def check_cocycles(cocycles: List[MfMorphism]) -> dict:
    report = new_report(CertifiedWindow(order=cocycles[0].order if cocycles else None))
    for i, f in enumerate(cocycles):
        if not hom_differential(f).is_zero():
            add_issue(report, f"f_{i + 1} is not a cocycle", i + 1)
    return report


def pi_map(f: MfMorphism) -> Multivector:
    """Apply f to 1 and reduce modulo m."""
    n = f.nvars
    zero = (0,) * n
    terms = {J: TruncatedSeries.constant(f.ring, n, c)
             for (J, I, alpha), c in f.terms.items() if I == 0 and alpha == zero}
    return Multivector(f.ring, n, terms)


def build_iota_pi(X: MatrixFactorization, cocycles: List[MfMorphism]) -> Dict[int, MfMorphism]:
    """iota(v_I) = f_(i_1) o ... o f_(i_r), corrected by lower terms so that pi iota = id.

    The correction subtracts iota of the constant lower-grade part of
    pi(f_(i_1) o ... o f_(i_r)); it only matters when some lambda_ij with
    i < j has a nonzero constant term.
    """
    iota: Dict[int, MfMorphism] = {}
    for I in basis_masks(X.nvars):
        product = MfMorphism.identity(X)
        for i in mask_to_indices(I):
            product = product.compose(cocycles[i - 1])
        for J, c in pi_map(product).terms.items():
            if J == I:
                continue
            product = product - iota[J].scale(c.constant_term())
        iota[I] = product
    return iota


def iota_map(iota: Dict[int, MfMorphism], a: Multivector, X: MatrixFactorization) -> MfMorphism:
    result = MfMorphism.zero(X)
    for m, c in a.terms.items():
        result = result + iota[m].scale(c)
    return result


class TransferData:
    """The contraction (iota, pi, eta) of end(E0) onto E."""

    def __init__(self, X: MatrixFactorization, cocycles: List[MfMorphism],
                 iota: Dict[int, MfMorphism]):
        self.factorization = X
        self.algebra: DgEndomorphismAlgebra = as_dg_algebra(X)
        self.cocycles = cocycles
        self.iota = iota
        self.ring = X.ring
        self.nvars = X.nvars
        self.order = X.order
        if X.order is None:
            raise InvalidInputError("Transfer needs a potential with a finite trust order")
        n = X.nvars
        self._wedge_v: Vector = {}
        for I in basis_masks(n):
            for i in range(n):
                bit = 1 << i
                if not I & bit:
                    self._wedge_v[(I | bit, I, unit_exponent(n, i))] = wedge_sign(bit, I)
        self._contract_w: Vector = {
            k: self.ring.neg(c) for k, c in X.differential.terms.items()
            if grade(k[0]) < grade(k[1])
        }
        self._solver: Optional[LinearSolver] = None
        self._memo: Dict[EndKey, Vector] = {}
        self.repaired = False

    # -- the two parts of mu^1 on sparse vectors -----------------------------

    def _graded_commutator(self, op: Vector, f: Vector, parity: int, order) -> Vector:
        """f o op - (-1)^|f| op o f."""
        out = sparse_compose(self.ring, f, op, order)
        axpy(self.ring, out, 1 if parity else -1, sparse_compose(self.ring, op, f, order))
        return out

    def _by_parity(self, f: Vector) -> Dict[int, Vector]:
        parts: Dict[int, Vector] = {}
        for k, c in f.items():
            parts.setdefault((grade(k[0]) + grade(k[1])) % 2, {})[k] = c
        return parts

    def d_plus(self, f: Vector, order) -> Vector:
        """Filtration-raising part of mu^1 (the v ^ . terms of D)."""
        out: Vector = {}
        for parity, part in self._by_parity(f).items():
            axpy(self.ring, out, 1, self._graded_commutator(self._wedge_v, part, parity, order))
        return out

    def d_minus(self, f: Vector, order) -> Vector:
        """Remaining part of mu^1 (the w_check contraction terms of D)."""
        out: Vector = {}
        for parity, part in self._by_parity(f).items():
            axpy(self.ring, out, 1,
                 self._graded_commutator(self._contract_w, part, parity, order))
        return out

    # -- eta_0: contraction of (C, d_plus) ------------------------------------

    def _sort_key(self, key: EndKey):
        J, I, alpha = key
        return (monomial_key(alpha), grade(J), mask_to_indices(J), grade(I), mask_to_indices(I))

    def _seed(self, alpha) -> Vector:
        """Closed form h(x^alpha) = m_i(x^alpha) v_i^dual -| . with i the splitting index."""
        i = split_index(alpha)
        beta = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
        out: Vector = {}
        for I in basis_masks(self.nvars):
            s = contract_sign(i, I)
            if s:
                out[(I & ~(1 << i), I, beta)] = self.ring.element(s)
        return out

    def solver(self) -> LinearSolver:
        if self._solver is not None:
            return self._solver
        n, W = self.nvars, self.order
        solver = LinearSolver(self.ring, sort_key=self._sort_key)
        top = None if W is None else W + 1
        monomials = list(monomials_up_to(n, W))
        for alpha in monomials:
            if sum(alpha) == 0:
                continue
            seed = self._seed(alpha)
            solver.add(self.d_plus(seed, top), seed)
        keys = [key for key in self.basis_keys(W) if key[1] != 0 or sum(key[2]) > 0]
        for key in sorted(keys, key=self._sort_key):
            solver.add(self.d_plus({key: self.ring.one}, top), {key: self.ring.one})
        logger.info(f"Contraction solver for end(E0): rank {solver.rank} on {len(keys)} generators")
        self._solver = solver
        return solver

    def _solve(self, b: Vector) -> Vector:
        combo = self.solver().solve(b)
        if combo is None:
            raise VerificationError("eta", "d_1 is not acyclic on ker pi at the working order")
        return combo

    def eta0(self, y: Vector) -> Vector:
        """-(d_+ restricted to a complement)^-1 applied to the boundary part of y."""
        if not y:
            return {}
        top = None if self.order is None else self.order + 1
        boundary = dict(y)
        axpy(self.ring, boundary, -1, self._solve(self.d_plus(y, top)))
        out: Vector = {}
        axpy(self.ring, out, -1, self._solve(boundary))
        return out

    def eta_on_kernel(self, y: Vector) -> Vector:
        total: Vector = {}
        z = self.eta0(y)
        steps = 0
        while z:
            axpy(self.ring, total, 1, z)
            z = self.eta0(self.d_minus(z, self.order))
            steps += 1
            if steps > 4 * (self.order or 0) + 8:
                raise VerificationError("eta", "Perturbation series does not terminate")
        return total

    def _eta_basis(self, key: EndKey) -> Vector:
        if key not in self._memo:
            J, I, alpha = key
            y = {key: self.ring.one}
            if I == 0 and sum(alpha) == 0:
                axpy(self.ring, y, -1, self.iota[J].terms)
            self._memo[key] = self.eta_on_kernel(y)
        return self._memo[key]

    def _eta_raw(self, f: MfMorphism) -> MfMorphism:
        out: Vector = {}
        for key, c in f.terms.items():
            axpy(self.ring, out, c, self._eta_basis(key))
        order = None if f.order is None else f.order - 1
        X = self.factorization
        return MfMorphism(X, X, out, order)

    def eta(self, f: MfMorphism) -> MfMorphism:
        """The homotopy, eta = 0 on im(iota); trust drops by one.

        When the side condition eta^2 = 0 fails, the repaired homotopy is
        -eta mu^1 eta. It keeps the homotopy equation and both annihilation
        conditions.
        """
        if not self.repaired:
            return self._eta_raw(f)
        inner = self._eta_raw(f)
        return -self._eta_raw(self.algebra.mu([inner]))

    # -- convenience ----------------------------------------------------------

    def pi(self, f: MfMorphism) -> Multivector:
        return pi_map(f)

    def iota_of(self, a: Multivector) -> MfMorphism:
        return iota_map(self.iota, a, self.factorization)

    def iota_pi(self, f: MfMorphism) -> MfMorphism:
        return self.iota_of(self.pi(f))

    def basis_keys(self, max_degree: Optional[int] = None) -> List[EndKey]:
        degree = self.order if max_degree is None else max_degree
        n = self.nvars
        return [(J, I, alpha) for alpha in monomials_up_to(n, degree)
                for J in basis_masks(n) for I in basis_masks(n)]

    def unit_morphism(self, key: EndKey) -> MfMorphism:
        X = self.factorization
        return MfMorphism(X, X, {key: self.ring.one})


def build_eta(X: MatrixFactorization, cocycles: List[MfMorphism],
              iota: Dict[int, MfMorphism]) -> TransferData:
    """Assemble the contraction and apply the side-condition repair when eta^2 != 0."""
    T = TransferData(X, cocycles, iota)
    T.solver()
    if T.order is not None and not _eta_squares_to_zero(T):
        logger.warning("eta^2 != 0; replacing eta by -eta mu^1 eta")
        T.repaired = True
    return T


def _eta_squares_to_zero(T: TransferData) -> bool:
    for key in T.basis_keys(T.order):
        e = T.unit_morphism(key)
        if not T.eta(T.eta(e)).truncate(T.order - 2).is_zero():
            return False
    return True


def build_transfer(X: MatrixFactorization) -> TransferData:
    cocycles = build_cocycles(X)
    report = check_cocycles(cocycles)
    if not report["is_valid"]:
        raise VerificationError("cocycles", "; ".join(report["issues"]))
    iota = build_iota_pi(X, cocycles)
    return build_eta(X, cocycles, iota)


def check_transfer(T: TransferData, sample: Optional[int] = None, seed: int = 0) -> dict:
    """Exact checks of every contraction identity at the certified order.

    ``sample`` restricts the homotopy identities to that many random basis
    elements of end(E0).
    """
    W = T.order
    trust = None if W is None else W - 1
    report = new_report(CertifiedWindow(order=trust))
    B = T.algebra
    # eta^2 carries two trust drops
    report["side_condition_order"] = None if trust is None else trust - 1
    report["eta_repair"] = "-eta mu^1 eta" if T.repaired else None
    for I, f in T.iota.items():
        if T.pi(f) != Multivector.basis(T.ring, T.nvars, I):
            add_issue(report, f"pi iota != id on v{mask_to_indices(I)}")
        if not B.mu([f]).is_zero():
            add_issue(report, f"iota(v{mask_to_indices(I)}) is not a cocycle")
        if not T.eta(f).is_zero():
            add_issue(report, f"eta iota != 0 on v{mask_to_indices(I)}")
    keys = T.basis_keys(trust)
    if sample is not None and sample < len(keys):
        rng = np.random.default_rng(seed)
        keys = [keys[k] for k in sorted(rng.choice(len(keys), size=sample, replace=False))]
    for key in keys:
        e = T.unit_morphism(key)
        h = T.eta(e)
        lhs = B.mu([h]) + T.eta(B.mu([e]))
        rhs = T.iota_pi(e) - e
        if not (lhs - rhs).truncate(trust).is_zero():
            add_issue(report, "Homotopy equation fails", list(key))
            break
        if not T.pi(h).is_zero():
            add_issue(report, "pi eta != 0", list(key))
            break
        if trust is not None and not T.eta(h).truncate(trust - 1).is_zero():
            add_issue(report, "eta^2 != 0", list(key))
            break
    if report["is_valid"]:
        logger.info(f"Transfer data verified on {len(keys)} basis elements")
    return report
