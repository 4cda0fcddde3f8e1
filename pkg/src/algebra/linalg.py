"""
Sparse exact linear algebra over the ground field.

Vectors are dicts ``{key: coefficient}`` with hashable keys. Elimination
always pivots on the smallest key under ``sort_key``, which makes every
choice (particular solutions, complements, normal forms) deterministic.
"""

import logging
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from src.algebra.scalars import GroundRing
from src.algebra.series import TruncatedSeries, monomial_key, monomials_of_degree
from src.shared_models import NotInvertibleError

logger = logging.getLogger(__name__)

Vector = Dict[Hashable, object]


def axpy(ring: GroundRing, target: Vector, coeff, source: Vector) -> None:
    """target += coeff * source, in place, dropping zeros."""
    if coeff == 0:
        return
    for k, v in source.items():
        value = ring.reduce(target.get(k, 0) + coeff * v)
        if value == 0:
            target.pop(k, None)
        else:
            target[k] = value


class LinearSolver:
    """Incremental Gaussian elimination that remembers preimages.

    Each added pair ``(image, domain)`` says "domain maps to image". Pivot rows
    keep the combination of domain vectors that produced them, so ``solve``
    returns a preimage and ``kernel`` collects the dependent combinations.
    """

    def __init__(self, ring: GroundRing, sort_key: Optional[Callable] = None):
        self.ring = ring
        self.sort_key = sort_key or (lambda k: k)
        self._rows: Dict[Hashable, Tuple[Vector, Vector]] = {}
        self.kernel: List[Vector] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> List[Hashable]:
        return sorted(self._rows, key=self.sort_key)

    def _eliminate(self, r: Vector, c: Vector) -> Optional[Hashable]:
        """Reduce (r, c) in place until r is zero or has a fresh pivot."""
        while r:
            k = min(r, key=self.sort_key)
            if k not in self._rows:
                return k
            coeff = r[k]
            row, combo = self._rows[k]
            axpy(self.ring, r, self.ring.neg(coeff), row)
            axpy(self.ring, c, self.ring.neg(coeff), combo)
        return None

    def add(self, image: Vector, domain: Optional[Vector] = None) -> bool:
        """Add a vector; returns True if it was independent of the earlier ones."""
        r = {k: v for k, v in image.items() if v != 0}
        c = dict(domain or {})
        pivot = self._eliminate(r, c)
        if pivot is None:
            if c:
                self.kernel.append(c)
            return False
        inv = self.ring.inverse(r[pivot])
        self._rows[pivot] = (
            {k: self.ring.mul(v, inv) for k, v in r.items()},
            {k: self.ring.mul(v, inv) for k, v in c.items()},
        )
        return True

    def contains(self, vector: Vector) -> bool:
        r = {k: v for k, v in vector.items() if v != 0}
        return self._eliminate(r, {}) is None

    def solve(self, target: Vector) -> Optional[Vector]:
        """A domain combination mapping to ``target``, or None if target is not in the span."""
        r = {k: v for k, v in target.items() if v != 0}
        c: Vector = {}
        while r:
            k = min(r, key=self.sort_key)
            if k not in self._rows:
                return None
            coeff = r[k]
            row, combo = self._rows[k]
            axpy(self.ring, r, self.ring.neg(coeff), row)
            axpy(self.ring, c, coeff, combo)
        return c

    def normal_form(self, vector: Vector) -> Vector:
        """Remainder of ``vector`` supported on non-pivot keys."""
        r = {k: v for k, v in vector.items() if v != 0}
        remainder: Vector = {}
        while r:
            k = min(r, key=self.sort_key)
            coeff = r.pop(k)
            if k in self._rows:
                row, _ = self._rows[k]
                for key, v in row.items():
                    if key == k:
                        continue
                    value = self.ring.reduce(r.get(key, 0) - coeff * v)
                    if value == 0:
                        r.pop(key, None)
                    else:
                        r[key] = value
            else:
                remainder[k] = coeff
        return remainder


def rank_of(ring: GroundRing, vectors: Iterable[Vector], sort_key=None) -> int:
    solver = LinearSolver(ring, sort_key)
    for v in vectors:
        solver.add(v)
    return solver.rank


def series_to_vector(s: TruncatedSeries, degree: Optional[int] = None) -> Vector:
    return {a: c for a, c in s.terms.items() if degree is None or sum(a) == degree}


def ideal_solve(
    target: TruncatedSeries,
    generators: Sequence[TruncatedSeries],
    degree: int,
) -> Optional[Tuple[List[TruncatedSeries], List[List[TruncatedSeries]]]]:
    """Solve sum_i c_i * gen_i = target in homogeneous degree ``degree``.

    Each c_i is homogeneous of degree ``degree`` minus the lowest degree of
    gen_i. Returns the particular solution and a basis of the homogeneous
    solution space, or None if inconsistent.
    """
    ring, n = target.ring, target.nvars
    solver = LinearSolver(ring, sort_key=monomial_key)
    unknowns = []
    for i, g in enumerate(generators):
        low = g.lowest_degree()
        if low is None or low > degree:
            continue
        for beta in monomials_of_degree(n, degree - low):
            unknowns.append((i, beta))
    for idx, (i, beta) in enumerate(unknowns):
        image = series_to_vector(generators[i].shift_monomial(beta), degree)
        solver.add(image, {idx: ring.one})
    combo = solver.solve(series_to_vector(target, degree))
    if combo is None:
        return None

    def as_multipliers(vec: Vector) -> List[TruncatedSeries]:
        out = [dict() for _ in generators]
        for idx, c in vec.items():
            i, beta = unknowns[idx]
            out[i][beta] = c
        return [TruncatedSeries(ring, n, t) for t in out]

    return as_multipliers(combo), [as_multipliers(k) for k in solver.kernel]


def cycles_and_boundaries(
    ring: GroundRing,
    domain: Sequence[Hashable],
    apply_d: Callable[[Hashable], Vector],
    sort_key=None,
) -> Tuple[List[Vector], LinearSolver]:
    """Kernel basis of d on ``domain`` together with a solver spanning im d."""
    solver = LinearSolver(ring, sort_key)
    for key in domain:
        solver.add(apply_d(key), {key: ring.one})
    return solver.kernel, solver


def persistent_rank(
    ring: GroundRing,
    cycles: Sequence[Vector],
    restrict: Callable[[Vector], Vector],
    boundaries: Iterable[Vector],
    sort_key=None,
) -> Tuple[int, List[Vector]]:
    """Rank of the image of cycles in a quotient complex, modulo its boundaries.

    Returns the rank together with the cycles whose restrictions are
    independent modulo the boundaries, in the order given.
    """
    solver = LinearSolver(ring, sort_key)
    for b in boundaries:
        solver.add(b)
    base = solver.rank
    reps = []
    for z in cycles:
        if solver.add(restrict(z)):
            reps.append(z)
    return solver.rank - base, reps


def invert_matrix(ring: GroundRing, matrix: Sequence[Sequence[object]]) -> List[List[object]]:
    """Inverse of a square matrix of ground-ring scalars (Gauss-Jordan)."""
    n = len(matrix)
    rows = [[ring.element(v) for v in row] + [ring.one if i == j else ring.zero
                                                for j in range(n)]
            for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            raise NotInvertibleError("Linear part is singular")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = ring.inverse(rows[col][col])
        rows[col] = [ring.mul(v, inv) for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [ring.reduce(a - f * b) for a, b in zip(rows[r], rows[col])]
    return [row[n:] for row in rows]
