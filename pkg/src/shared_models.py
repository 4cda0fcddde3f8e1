from dataclasses import dataclass, field
from typing import Optional


class RingMismatchError(ValueError):
    """Operands live over different ground rings or variable counts."""


class NotInvertibleError(ArithmeticError):
    """A scalar, linear part or leading term that must be invertible is not."""


class ArityCapError(ValueError):
    """An evaluation needs operations beyond the tabulated arity cap."""


class InvalidInputError(ValueError):
    """Malformed input data or a violated precondition on user input."""


class VerificationError(RuntimeError):
    """A construction that must succeed mathematically failed at some stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class CertifiedWindow:
    """Range (order, arity, length) up to which a report is exact."""

    order: Optional[int] = None
    arity: Optional[int] = None
    length: Optional[int] = None

    def as_dict(self) -> dict:
        return {k: v for k, v in (("order", self.order), ("arity", self.arity),
                                  ("length", self.length)) if v is not None}


@dataclass
class JobConfig:
    """Options of a single command-line job."""

    ring: Optional[str] = None
    nvars: Optional[int] = None
    order: int = 4
    arity: int = 5
    length: int = 3
    d: int = 1
    seed: int = 0
    inputs: list = field(default_factory=list)
    out: Optional[str] = None
    force: bool = False


def new_report(window: Optional[CertifiedWindow] = None) -> dict:
    """Empty validation report in the shape used by every check."""
    return {
        "is_valid": True,
        "issues": [],
        "certified": window.as_dict() if window else {},
    }


def add_issue(report: dict, message: str, first_failure=None) -> None:
    report["is_valid"] = False
    report["issues"].append(message)
    if first_failure is not None and "first_failure" not in report:
        report["first_failure"] = first_failure
