"""
Filtered matrix factorisations on E_R and their morphism complexes.

Morphisms are stored sparsely as ``{(J, I, alpha): c}``: the coefficient of
x^alpha in the entry from column v_I to row v_J. ``matrix`` renders the same
data as a dense numpy object array of series.
"""

import logging
from typing import Callable, Dict, Hashable, Optional, Tuple

import numpy as np

from src.algebra.exterior import (
    Multivector,
    basis_masks,
    contract_sign,
    grade,
    wedge_sign,
)
from src.algebra.scalars import GroundRing
from src.algebra.series import TruncatedSeries, min_order, splitting_component, unit_exponent
from src.shared_models import (
    CertifiedWindow,
    InvalidInputError,
    RingMismatchError,
    add_issue,
    new_report,
)

logger = logging.getLogger(__name__)

EndKey = Tuple[int, int, Tuple[int, ...]]


def _exp_add(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def sparse_compose(ring: GroundRing, g: Dict[EndKey, object], f: Dict[EndKey, object],
                   order: Optional[int]) -> Dict[EndKey, object]:
    """Terms of g o f, dropping x-degrees above ``order``."""
    by_row: Dict[int, list] = {}
    for (J, I, alpha), c in f.items():
        by_row.setdefault(J, []).append((I, alpha, sum(alpha), c))
    out: Dict[EndKey, object] = {}
    for (K, J, beta), c in g.items():
        db = sum(beta)
        for I, alpha, da, d in by_row.get(J, ()):
            if order is not None and da + db > order:
                continue
            key = (K, I, _exp_add(beta, alpha))
            value = ring.reduce(out.get(key, 0) + c * d)
            if value == 0:
                out.pop(key, None)
            else:
                out[key] = value
    return out


class MfMorphism:
    """Element of hom(X, X') for factorisations X, X' on E_R."""

    __slots__ = ("source", "target", "order", "_terms")

    def __init__(self, source: "MatrixFactorization", target: "MatrixFactorization",
                 terms: Optional[Dict[EndKey, object]] = None, order: Optional[int] = None):
        if (source.ring, source.nvars) != (target.ring, target.nvars):
            raise RingMismatchError("Morphism between factorisations over different rings")
        self.source = source
        self.target = target
        self.order = min_order(source.order, target.order) if order is None else order
        ring = source.ring
        self._terms: Dict[EndKey, object] = {}
        for (J, I, alpha), c in (terms or {}).items():
            if self.order is not None and sum(alpha) > self.order:
                continue
            c = ring.element(c)
            if c != 0:
                self._terms[(J, I, tuple(alpha))] = c

    @classmethod
    def _raw(cls, source, target, terms, order) -> "MfMorphism":
        f = cls.__new__(cls)
        f.source, f.target, f.order, f._terms = source, target, order, terms
        return f

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, source, target=None) -> "MfMorphism":
        return cls(source, target or source)

    @classmethod
    def identity(cls, X: "MatrixFactorization") -> "MfMorphism":
        zero = (0,) * X.nvars
        return cls(X, X, {(m, m, zero): 1 for m in basis_masks(X.nvars)})

    @classmethod
    def from_function(cls, source, target,
                      fn: Callable[[Multivector], Multivector]) -> "MfMorphism":
        """Tabulate an R-linear map on the subset basis."""
        terms = {}
        for I in basis_masks(source.nvars):
            image = fn(Multivector.basis(source.ring, source.nvars, I))
            for J, c in image.terms.items():
                for alpha, v in c.terms.items():
                    terms[(J, I, alpha)] = v
        return cls(source, target, terms)

    @classmethod
    def from_matrix(cls, source, target, matrix: np.ndarray) -> "MfMorphism":
        masks = basis_masks(source.nvars)
        terms = {}
        for r, J in enumerate(masks):
            for c, I in enumerate(masks):
                entry = matrix[r, c]
                if isinstance(entry, TruncatedSeries):
                    for alpha, v in entry.terms.items():
                        terms[(J, I, alpha)] = v
                elif entry != 0:
                    terms[(J, I, (0,) * source.nvars)] = entry
        return cls(source, target, terms)

    @classmethod
    def wedge_map(cls, X: "MatrixFactorization", element: Multivector) -> "MfMorphism":
        """Left multiplication by ``element`` in E_R."""
        return cls.from_function(X, X, element.wedge)

    @classmethod
    def contraction_map(cls, X: "MatrixFactorization", i: int, coeff=1) -> "MfMorphism":
        """coeff * v_(i+1)^dual contracted into the input."""
        return cls.from_function(X, X, lambda a: a.interior(i).scale(coeff))

    # -- inspection ---------------------------------------------------------

    @property
    def ring(self) -> GroundRing:
        return self.source.ring

    @property
    def nvars(self) -> int:
        return self.source.nvars

    @property
    def terms(self) -> Dict[EndKey, object]:
        return dict(self._terms)

    def to_vector(self) -> Dict[Hashable, object]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def parity(self) -> int:
        """Z/2 degree read off from the support (0 for the zero map)."""
        parities = {(grade(J) + grade(I)) % 2 for J, I, _ in self._terms}
        if len(parities) > 1:
            raise ValueError("Morphism has mixed parity")
        return parities.pop() if parities else 0

    def filtration_degree(self) -> Optional[int]:
        return max((grade(J) - grade(I) for J, I, _ in self._terms), default=None)

    def entry(self, J: int, I: int) -> TruncatedSeries:
        terms = {alpha: c for (r, col, alpha), c in self._terms.items() if r == J and col == I}
        return TruncatedSeries(self.ring, self.nvars, terms, self.order)

    @property
    def matrix(self) -> np.ndarray:
        masks = basis_masks(self.nvars)
        out = np.empty((len(masks), len(masks)), dtype=object)
        for r, J in enumerate(masks):
            for c, I in enumerate(masks):
                out[r, c] = TruncatedSeries.zero(self.ring, self.nvars, self.order)
        index = {m: k for k, m in enumerate(masks)}
        for (J, I, alpha), c in self._terms.items():
            out[index[J], index[I]] = out[index[J], index[I]] + TruncatedSeries.monomial(
                self.ring, self.nvars, alpha, c, self.order)
        return out

    # -- arithmetic ---------------------------------------------------------

    def _like(self, terms, order=None) -> "MfMorphism":
        return MfMorphism._raw(self.source, self.target, terms,
                               self.order if order is None else order)

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        if (other.ring, other.nvars) != (self.ring, self.nvars):
            raise RingMismatchError("Adding morphisms over different rings")
        order = min_order(self.order, other.order)
        out = {}
        for key, c in list(self._terms.items()) + list(other._terms.items()):
            if order is not None and sum(key[2]) > order:
                continue
            value = self.ring.reduce(out.get(key, 0) + c)
            if value == 0:
                out.pop(key, None)
            else:
                out[key] = value
        return self._like(out, order)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: self.ring.neg(c) for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "MfMorphism":
        """Multiply by a scalar or by a series (R acts centrally)."""
        if isinstance(c, TruncatedSeries):
            order = min_order(self.order, c.order)
            out: Dict[EndKey, object] = {}
            for (J, I, alpha), v in self._terms.items():
                for beta, d in c.terms.items():
                    gamma = _exp_add(alpha, beta)
                    if order is not None and sum(gamma) > order:
                        continue
                    key = (J, I, gamma)
                    out[key] = self.ring.reduce(out.get(key, 0) + v * d)
            return self._like({k: v for k, v in out.items() if v != 0}, order)
        if c == 1:
            return self
        c = self.ring.element(c)
        scaled = {k: self.ring.mul(c, v) for k, v in self._terms.items()}
        return self._like({k: v for k, v in scaled.items() if v != 0})

    def compose(self, other: "MfMorphism") -> "MfMorphism":
        """self o other."""
        order = min_order(self.order, other.order)
        terms = sparse_compose(self.ring, self._terms, other._terms, order)
        return MfMorphism._raw(other.source, self.target, terms, order)

    __matmul__ = compose

    def parity_part(self, parity: int) -> "MfMorphism":
        return self._like({k: c for k, c in self._terms.items()
                           if (grade(k[0]) + grade(k[1])) % 2 == parity})

    def truncate(self, order: Optional[int]) -> "MfMorphism":
        order = min_order(self.order, order)
        return self._like({k: c for k, c in self._terms.items()
                           if order is None or sum(k[2]) <= order}, order)

    def with_order(self, order: Optional[int]) -> "MfMorphism":
        return self._like(dict(self._terms), order)

    def apply(self, x: Multivector) -> Multivector:
        out: Dict[int, TruncatedSeries] = {}
        for (J, I, alpha), c in self._terms.items():
            coeff = x.coefficient(I)
            if coeff.is_zero():
                continue
            term = coeff.shift_monomial(alpha, c).truncate(self.order)
            out[J] = out[J] + term if J in out else term
        return Multivector(self.ring, self.nvars, out)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, MfMorphism):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        return f"MfMorphism({len(self._terms)} terms, order={self.order})"


class MatrixFactorization:
    """Odd endomorphism D of E_R with D o D = w id, filtered of degree one."""

    def __init__(self, potential: TruncatedSeries, matrix: np.ndarray, name: str = ""):
        self.potential = potential
        self.ring = potential.ring
        self.nvars = potential.nvars
        self.order = potential.order
        self.name = name
        size = 1 << self.nvars
        if matrix.shape != (size, size):
            raise InvalidInputError(f"Squifferential must be {size}x{size}, got {matrix.shape}")
        self.differential = MfMorphism.from_matrix(self, self, matrix)

    @classmethod
    def from_morphism_terms(cls, potential: TruncatedSeries, terms: Dict[EndKey, object],
                            name: str = "") -> "MatrixFactorization":
        size = 1 << potential.nvars
        X = cls(potential, np.zeros((size, size), dtype=object), name)
        X.differential = MfMorphism(X, X, terms)
        return X

    @property
    def matrix(self) -> np.ndarray:
        return self.differential.matrix

    @property
    def basis(self):
        return basis_masks(self.nvars)

    def apply(self, x: Multivector) -> Multivector:
        return self.differential.apply(x)

    def square_defect(self) -> MfMorphism:
        D = self.differential
        return D.compose(D) - MfMorphism.identity(self).scale(self.potential)

    def leading_part(self) -> MfMorphism:
        """The filtration-raising entries of D (|J| = |I| + 1)."""
        return self.differential._like({
            k: c for k, c in self.differential.terms.items() if grade(k[0]) == grade(k[1]) + 1
        })

    def check(self) -> dict:
        report = new_report(CertifiedWindow(order=self.order))
        D = self.differential
        for J, I, _ in D.terms:
            if (grade(J) + grade(I)) % 2 == 0:
                add_issue(report, "Squifferential is not odd", [J, I])
                break
        for J, I, _ in D.terms:
            if grade(J) > grade(I) + 1:
                add_issue(report, "Squifferential is not filtered of degree one", [J, I])
                break
        if not self.square_defect().is_zero():
            add_issue(report, "D^2 != w id")
            logger.error(f"Factorisation {self.name!r}: D^2 - w id = {self.square_defect()!r}")
        return report

    def same_potential(self, other: "MatrixFactorization") -> bool:
        order = min_order(self.order, other.order)
        return self.potential.truncate(order) == other.potential.truncate(order)


def koszul_terms(nvars: int, components) -> Dict[EndKey, object]:
    """Terms of -(v ^ a + sum_i w_i v_i^dual -| a)."""
    terms: Dict[EndKey, object] = {}
    for I in basis_masks(nvars):
        for i in range(nvars):
            bit = 1 << i
            if I & bit:
                s = contract_sign(i, I)
                for alpha, c in components[i].terms.items():
                    key = (I & ~bit, I, alpha)
                    terms[key] = terms.get(key, 0) - s * c
            else:
                terms[(I | bit, I, unit_exponent(nvars, i))] = -wedge_sign(bit, I)
    return terms


def stabilize_skyscraper(w: TruncatedSeries) -> MatrixFactorization:
    """The stabilised skyscraper E_0(w) with D(a) = -(v ^ a + w_check -| a)."""
    low = w.lowest_degree()
    if low is not None and low < 2:
        raise InvalidInputError("Potential must lie in m^2")
    exact = w.with_order(None)
    components = [splitting_component(exact, i) for i in range(w.nvars)]
    X = MatrixFactorization.from_morphism_terms(w, koszul_terms(w.nvars, components),
                                                name="E0")
    logger.debug(f"Stabilised skyscraper built in {w.nvars} variables at order {w.order}")
    return X


def check_potentials(f: MfMorphism) -> None:
    if not f.source.same_potential(f.target):
        raise InvalidInputError("Source and target factorise different potentials")


def hom_differential(f: MfMorphism) -> MfMorphism:
    """d f = D' o f - (-1)^|f| f o D."""
    check_potentials(f)
    left = f.target.differential.compose(f)
    right = f.compose(f.source.differential)
    return left - right if f.parity() == 0 else left + right


def hom_compose(g: MfMorphism, f: MfMorphism) -> MfMorphism:
    if g.source is not f.target and not g.source.same_potential(f.target):
        raise InvalidInputError("Morphisms are not composable")
    return g.compose(f)


class DgEndomorphismAlgebra:
    """end(X) with mu^1(f) = (-1)^|f| d f and mu^2(g, f) = (-1)^|f| g o f."""

    def __init__(self, X: MatrixFactorization):
        self.factorization = X
        self.ring = X.ring
        self.nvars = X.nvars
        self.order = X.order

    def zero(self) -> MfMorphism:
        return MfMorphism.zero(self.factorization)

    def unit(self) -> MfMorphism:
        return MfMorphism.identity(self.factorization)

    @staticmethod
    def parity(f: MfMorphism) -> int:
        return f.parity()

    def mu(self, args) -> MfMorphism:
        if len(args) == 1:
            f = args[0]
            df = hom_differential(f)
            return -df if f.parity() else df
        if len(args) == 2:
            g, f = args
            gf = g.compose(f)
            return -gf if f.parity() else gf
        return self.zero()


def as_dg_algebra(X: MatrixFactorization) -> DgEndomorphismAlgebra:
    return DgEndomorphismAlgebra(X)
