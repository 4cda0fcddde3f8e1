import logging
from typing import Optional

from src.algebra.exterior import basis_masks, grade
from src.ainfinity.deformation import AInfinityDeformation
from src.ainfinity.potential import disc_potential, mu_0v
from src.mf.factorization import MatrixFactorization, MfMorphism
from src.shared_models import ArityCapError, VerificationError

logger = logging.getLogger(__name__)


def mirror_order(A: AInfinityDeformation, order: Optional[int] = None) -> int:
    """Order up to which the mirror squifferential is certified."""
    order = A.order if order is None else order
    return min(order, A.arity_cap - 1)


def mirror_object(A: AInfinityDeformation, order: Optional[int] = None,
                  verify: bool = True) -> MatrixFactorization:
    """Factorisation of the disc potential with D(a) = (-1)^|a| mu_0v(a)."""
    order = mirror_order(A, order)
    if order < 2:
        raise ArityCapError(f"Arity cap {A.arity_cap} too small for a mirror object")
    P = disc_potential(A, order)
    terms = {}
    for I in basis_masks(A.nvars):
        image = mu_0v(A, [A.basis_element(I)], order)
        s = -1 if grade(I) % 2 else 1
        for J, c in image.terms.items():
            for alpha, v in c.terms.items():
                terms[(J, I, alpha)] = s * v
    X = MatrixFactorization.from_morphism_terms(P, terms, name=f"mirror({A.name})")
    if verify and not X.square_defect().is_zero():
        raise VerificationError("mirror", "D^2 != P id; the deformation table is invalid")
    logger.info(f"Mirror object of {A.name!r} built at order {order}")
    return X


def leading_terms_agree(X: MatrixFactorization, Y: MatrixFactorization) -> bool:
    """Both squifferentials reduce to -v ^ . on their filtration-raising parts."""
    lx, ly = X.leading_part(), Y.leading_part()
    return MfMorphism(X, X, lx.terms) == MfMorphism(X, X, ly.terms)
