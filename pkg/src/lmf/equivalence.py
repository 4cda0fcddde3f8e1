"""
Search for formal changes of variables relating two potentials:
P1 = P2 o f modulo m^(N+1), with f = id modulo m^(d+1) when d >= 1 and f
only required to be invertible when d = 0.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Tuple

from src.algebra.diffeo import FormalDiffeo, diffeo_compose, series_compose
from src.algebra.linalg import ideal_solve, invert_matrix
from src.algebra.scalars import rational_root
from src.algebra.series import (
    TruncatedSeries,
    min_order,
    monomials_of_degree,
    partial_derivative,
)
from src.shared_models import (
    CertifiedWindow,
    InvalidInputError,
    NotInvertibleError,
    RingMismatchError,
    VerificationError,
    new_report,
)

logger = logging.getLogger(__name__)

FOUND = "FOUND"
NOT_EQUIVALENT = "NOT-EQUIVALENT"
INDETERMINATE = "INDETERMINATE"

DEFAULT_NODE_LIMIT = 20000


@dataclass
class EquivalenceResult:
    verdict: str
    order: int
    d: int
    diffeo: Optional[FormalDiffeo] = None
    nodes: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.verdict == FOUND

    def report(self) -> dict:
        report = new_report(CertifiedWindow(order=self.order))
        report["verdict"] = self.verdict
        report["d"] = self.d
        report["nodes"] = self.nodes
        report["notes"] = list(self.notes)
        return report


def _identity_components(ring, n: int, order: int) -> List[TruncatedSeries]:
    return list(FormalDiffeo.identity(ring, n, order).components)


class _Search:
    """Order-by-order solver for P1 = P2 o f with a fixed linear part id."""

    def __init__(self, P1: TruncatedSeries, P2: TruncatedSeries, d: int, order: int,
                 node_limit: int):
        self.P1 = P1
        self.P2 = P2
        self.d = max(d, 1)
        self.order = order
        self.ring = P1.ring
        self.n = P1.nvars
        self.node_limit = node_limit
        self.nodes = 0
        self.exhausted = True

    def residual(self, components: List[TruncatedSeries]) -> TruncatedSeries:
        return (self.P1 - series_compose(self.P2, FormalDiffeo(components))).truncate(self.order)

    def agrees_up_to(self, components: List[TruncatedSeries], degree: int) -> bool:
        return self.residual(components).truncate(degree).is_zero()

    def greedy(self) -> Tuple[Optional[FormalDiffeo], bool]:
        """Canonical stage-by-stage solve; the flag says whether every stage was forced.

        At degree m the component f_i enters linearly through its degree
        m - low_i part, where low_i is the lowest degree of d_i P2; every other
        contribution to degree m comes from parts already fixed.
        """
        partials = [partial_derivative(self.P2, i) for i in range(self.n)]
        lows = [p.lowest_degree() for p in partials]
        if all(low is None for low in lows):
            return None, False
        leading = [p.homogeneous_part(low) if low is not None else p
                   for p, low in zip(partials, lows)]
        zero = TruncatedSeries.zero(self.ring, self.n)
        f = _identity_components(self.ring, self.n, self.order)
        forced = True
        for m in range(2, self.order + 1):
            target = self.residual(f).homogeneous_part(m)
            # parts of degree <= d are pinned by f = id mod m^(d+1)
            generators = [g if low is not None and m - low > self.d else zero
                          for g, low in zip(leading, lows)]
            if all(g.is_zero() for g in generators):
                if target.is_zero():
                    continue
                logger.debug(f"Greedy search: degree {m} is fixed by f = id mod m^{self.d + 1}")
                return None, forced
            solved = ideal_solve(target, generators, m)
            if solved is None:
                logger.debug(f"Greedy search: no solution at degree {m}")
                return None, forced
            particular, kernel = solved
            # a free choice here can change every later stage
            if kernel:
                forced = False
            f = [fi + ci for fi, ci in zip(f, particular)]
        return FormalDiffeo(f), forced

    def enumerate(self) -> Optional[FormalDiffeo]:
        """Depth-first search over the components, for finite ground rings."""
        f = _identity_components(self.ring, self.n, self.order)
        if not self.agrees_up_to(f, self.d + 1):
            return None
        found = self._descend(f, self.d + 1)
        return FormalDiffeo(found) if found is not None else None

    def _descend(self, f: List[TruncatedSeries], e: int) -> Optional[List[TruncatedSeries]]:
        if e >= self.order:
            return f
        monomials = monomials_of_degree(self.n, e)
        for coeffs in product(list(self.ring.elements()), repeat=self.n * len(monomials)):
            self.nodes += 1
            if self.nodes > self.node_limit:
                self.exhausted = False
                return None
            g = []
            for i, fi in enumerate(f):
                chunk = coeffs[i * len(monomials):(i + 1) * len(monomials)]
                terms = {alpha: c for alpha, c in zip(monomials, chunk) if c != 0}
                g.append(fi + TruncatedSeries(self.ring, self.n, terms, self.order))
            # components of degree > e only reach degrees > e + 1
            if not self.agrees_up_to(g, e + 1):
                continue
            found = self._descend(g, e + 1)
            if found is not None:
                return found
            if not self.exhausted:
                return None
        return None

    def run(self) -> Tuple[str, Optional[FormalDiffeo]]:
        if self.P2.is_zero():
            if not self.P1.is_zero():
                return NOT_EQUIVALENT, None
            return FOUND, FormalDiffeo(_identity_components(self.ring, self.n, self.order))
        f, forced = self.greedy()
        if f is not None:
            return FOUND, f
        if self.ring.is_finite:
            f = self.enumerate()
            if f is not None:
                return FOUND, f
            return (NOT_EQUIVALENT if self.exhausted else INDETERMINATE), None
        return (NOT_EQUIVALENT if forced else INDETERMINATE), None


def _linear_candidates(P1: TruncatedSeries, P2: TruncatedSeries, node_limit: int):
    """Invertible linear parts to try when d = 0, and whether the list is complete."""
    ring, n = P1.ring, P1.nvars
    if n == 1:
        k1, k2 = P1.lowest_degree(), P2.lowest_degree()
        if k1 is None or k2 is None or k1 != k2:
            return [], True
        ratio = ring.div(P1.coefficient((k1,)), P2.coefficient((k2,)))
        if ring.is_finite:
            roots = [a for a in range(1, ring.p) if pow(a, k1, ring.p) == ratio]
        else:
            roots = rational_root(ratio, k1)
        return [[[a]] for a in roots], True
    if not ring.is_finite:
        return [[[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]], False
    candidates = []
    for count, entries in enumerate(product(list(ring.elements()), repeat=n * n)):
        if count >= node_limit:
            return candidates, False
        matrix = [list(entries[i * n:(i + 1) * n]) for i in range(n)]
        try:
            invert_matrix(ring, matrix)
        except NotInvertibleError:
            continue
        candidates.append(matrix)
    return candidates, True


def potential_equivalence_search(P1: TruncatedSeries, P2: TruncatedSeries, d: int = 1,
                                 order: Optional[int] = None,
                                 node_limit: int = DEFAULT_NODE_LIMIT) -> EquivalenceResult:
    """Find f with P1 = P2 o f at the given order, or explain why not.

    The verdict is FOUND (with a re-verified witness), NOT-EQUIVALENT when the
    search was exhaustive, or INDETERMINATE.
    """
    if (P1.ring, P1.nvars) != (P2.ring, P2.nvars):
        raise RingMismatchError("Potentials live over different rings")
    if d < 0:
        raise InvalidInputError("d must be non-negative")
    order = min_order(P1.order, P2.order) if order is None else order
    if order is None:
        raise InvalidInputError("Equivalence search needs a finite order")
    for P in (P1, P2):
        low = P.lowest_degree()
        if low is not None and low < 2:
            raise InvalidInputError("Potentials must lie in m^2")
    P1, P2 = P1.truncate(order).with_order(order), P2.truncate(order).with_order(order)
    ring, n = P1.ring, P1.nvars

    if d >= 1:
        search = _Search(P1, P2, d, order, node_limit)
        verdict, f = search.run()
        result = EquivalenceResult(verdict, order, d, f, search.nodes)
    else:
        candidates, complete = _linear_candidates(P1, P2, node_limit)
        result = EquivalenceResult(NOT_EQUIVALENT if complete else INDETERMINATE, order, d)
        if not complete:
            result.notes.append("linear parts not enumerated exhaustively")
        for matrix in candidates:
            L = FormalDiffeo.linear(ring, matrix, order)
            search = _Search(P1, series_compose(P2, L), 1, order, node_limit)
            verdict, g = search.run()
            result.nodes += search.nodes
            if verdict == FOUND:
                result.verdict, result.diffeo = FOUND, diffeo_compose(L, g)
                break
            if verdict == INDETERMINATE:
                result.verdict = INDETERMINATE

    if result.found:
        _verify_witness(P1, P2, result.diffeo, d, order)
    logger.info(f"Equivalence search (n={n}, d={d}, order={order}, ring={ring}): "
                f"{result.verdict} after {result.nodes} nodes")
    return result


def _verify_witness(P1: TruncatedSeries, P2: TruncatedSeries, f: FormalDiffeo, d: int,
                    order: int) -> None:
    if series_compose(P2, f).truncate(order) != P1.truncate(order):
        raise VerificationError("search", "Witness does not satisfy P1 = P2 o f")
    if d >= 1 and not f.is_identity_mod(d):
        raise VerificationError("search", f"Witness is not the identity modulo m^{d + 1}")
