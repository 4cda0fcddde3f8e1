import logging
from dataclasses import dataclass
from typing import List, Sequence

from src.algebra.linalg import invert_matrix
from src.algebra.scalars import GroundRing
from src.algebra.series import TruncatedSeries, min_order, substitute, unit_exponent
from src.shared_models import InvalidInputError, RingMismatchError

logger = logging.getLogger(__name__)


@dataclass
class FormalDiffeo:
    """Formal change of variables x_i -> f_i(x) with f_i in the maximal ideal."""

    components: List[TruncatedSeries]

    def __post_init__(self):
        if not self.components:
            raise InvalidInputError("A change of variables needs at least one component")
        for f in self.components:
            if f.constant_term() != 0:
                raise InvalidInputError(
                    "Components of a change of variables need zero constant term"
                )
            if f.nvars != len(self.components):
                raise RingMismatchError("Component count must equal the number of variables")

    @property
    def ring(self) -> GroundRing:
        return self.components[0].ring

    @property
    def nvars(self) -> int:
        return len(self.components)

    @property
    def order(self):
        return min_order(*(f.order for f in self.components))

    @classmethod
    def identity(cls, ring: GroundRing, nvars: int, order=None) -> "FormalDiffeo":
        return cls([TruncatedSeries.variable(ring, nvars, i, order) for i in range(nvars)])

    @classmethod
    def linear(cls, ring: GroundRing, matrix: Sequence[Sequence[object]], order=None):
        """x_i -> sum_j matrix[i][j] x_j."""
        n = len(matrix)
        return cls([
            TruncatedSeries(ring, n, {unit_exponent(n, j): matrix[i][j] for j in range(n)}, order)
            for i in range(n)
        ])

    def linear_part(self) -> List[List[object]]:
        n = self.nvars
        return [[f.coefficient(unit_exponent(n, j)) for j in range(n)] for f in self.components]

    def truncate(self, order) -> "FormalDiffeo":
        return FormalDiffeo([f.truncate(order) for f in self.components])

    def is_identity_mod(self, degree: int) -> bool:
        """True if f = id modulo m^(degree+1)."""
        ident = FormalDiffeo.identity(self.ring, self.nvars)
        for f, x in zip(self.components, ident.components):
            diff = f - x
            if diff.lowest_degree() is not None and diff.lowest_degree() <= degree:
                return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalDiffeo):
            return NotImplemented
        return all(a == b for a, b in zip(self.components, other.components))

    __hash__ = None


def series_compose(P: TruncatedSeries, f: FormalDiffeo) -> TruncatedSeries:
    """P o f, exact modulo m^(min order + 1)."""
    if P.nvars != f.nvars:
        raise RingMismatchError(f"Series in {P.nvars} variables composed with {f.nvars}")
    return substitute(P, f.components)


def diffeo_compose(f: FormalDiffeo, g: FormalDiffeo) -> FormalDiffeo:
    """(f o g)_i = f_i(g_1, ..., g_n)."""
    return FormalDiffeo([series_compose(fi, g) for fi in f.components])


def diffeo_invert(f: FormalDiffeo) -> FormalDiffeo:
    """Two-sided inverse, computed by fixed-point iteration order by order."""
    ring, n = f.ring, f.nvars
    order = f.order
    if order is None:
        raise InvalidInputError("Inverting a change of variables needs a finite trust order")
    inv_linear = invert_matrix(ring, f.linear_part())
    linear_inverse = FormalDiffeo.linear(ring, inv_linear, order)
    g = linear_inverse
    ident = FormalDiffeo.identity(ring, n, order)
    # every pass fixes at least one more degree
    for _ in range(order):
        residual = [a - b for a, b in zip(diffeo_compose(f, g).components, ident.components)]
        if all(r.is_zero() for r in residual):
            break
        correction = diffeo_compose(linear_inverse, FormalDiffeo(residual))
        g = FormalDiffeo([a - b for a, b in zip(g.components, correction.components)])
    return g
