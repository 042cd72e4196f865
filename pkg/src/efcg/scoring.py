"""Aggregate verification results into the benchmark metrics.

CSR averages per-instruction satisfaction fractions; macro accuracy averages
per-constraint-type rates with equal weight per type, which keeps heavily
represented types from dominating. All rates are exact fractions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence, Union

from .errors import EmptyInput, OutOfRange
from .types import HardConstraint, VerificationResult

SatisfiedFlag = Union[VerificationResult, bool, int]


def _flag(value: SatisfiedFlag) -> bool:
    if isinstance(value, VerificationResult):
        return value.satisfied
    return bool(value)


@dataclass(frozen=True)
class InstructionScore:
    """Satisfaction fraction of one instruction's constraint list."""

    instruction_id: str
    n_constraints: int
    satisfied_count: int

    @property
    def rate(self) -> Fraction:
        return Fraction(self.satisfied_count, self.n_constraints)

    def to_dict(self) -> dict[str, Any]:
        return {
            "instruction_id": self.instruction_id,
            "n_constraints": self.n_constraints,
            "satisfied_count": self.satisfied_count,
            "rate": float(self.rate),
        }


@dataclass(frozen=True)
class CsrReport:
    """Constraint satisfaction rate over a batch of instructions."""

    per_instruction: tuple[InstructionScore, ...]

    @property
    def m(self) -> int:
        return len(self.per_instruction)

    @property
    def csr(self) -> Fraction:
        return sum((s.rate for s in self.per_instruction), Fraction(0)) / self.m

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "csr": float(self.csr),
            "per_instruction": [s.to_dict() for s in self.per_instruction],
        }


@dataclass(frozen=True)
class TypeScore:
    """Satisfaction rate of one constraint type across the whole batch."""

    type_name: str
    total: int
    satisfied: int

    @property
    def rate(self) -> Fraction:
        return Fraction(self.satisfied, self.total)

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": self.type_name,
            "total": self.total,
            "satisfied": self.satisfied,
            "rate": float(self.rate),
        }


@dataclass(frozen=True)
class MacroReport:
    """Unweighted mean of per-type rates over the types that appear."""

    per_type: tuple[TypeScore, ...]

    @property
    def types_present(self) -> int:
        return len(self.per_type)

    @property
    def macro_accuracy(self) -> Fraction:
        return sum((t.rate for t in self.per_type), Fraction(0)) / self.types_present

    def to_dict(self) -> dict[str, Any]:
        return {
            "macro_accuracy": float(self.macro_accuracy),
            "types_present": self.types_present,
            "per_type": {t.type_name: t.to_dict() for t in self.per_type},
        }


def compute_csr(
    results_per_instruction: Sequence[Sequence[SatisfiedFlag]],
    ids: Sequence[str] | None = None,
) -> CsrReport:
    """CSR = (1/m) * sum_i (1/n_i) * sum_j s_ij over m instructions.

    Accepts VerificationResults or bare satisfied flags. Instruction ids
    default to the list index.
    """
    if not results_per_instruction:
        raise EmptyInput("compute_csr needs at least one instruction")
    if ids is not None and len(ids) != len(results_per_instruction):
        raise EmptyInput("ids must align one-to-one with instructions")
    scores = []
    for i, results in enumerate(results_per_instruction):
        if not results:
            raise EmptyInput(f"instruction {i} has zero constraints")
        instruction_id = ids[i] if ids is not None else str(i)
        scores.append(
            InstructionScore(
                instruction_id=instruction_id,
                n_constraints=len(results),
                satisfied_count=sum(1 for r in results if _flag(r)),
            )
        )
    return CsrReport(per_instruction=tuple(scores))


def compute_macro(
    results: Iterable[tuple[HardConstraint, SatisfiedFlag]],
) -> MacroReport:
    """Group results by constraint variant and average the per-type rates.

    The grouping key is the variant name (10 classes), not the parameter
    values, so 'include sustainability' and 'include velocity' share a type.
    """
    totals: dict[str, int] = {}
    satisfied: dict[str, int] = {}
    for constraint, result in results:
        name = constraint.type_name
        totals[name] = totals.get(name, 0) + 1
        if _flag(result):
            satisfied[name] = satisfied.get(name, 0) + 1
    if not totals:
        raise EmptyInput("compute_macro needs at least one result")
    per_type = tuple(
        TypeScore(type_name=name, total=totals[name], satisfied=satisfied.get(name, 0))
        for name in sorted(totals)
    )
    return MacroReport(per_type=per_type)


def combined_score(soft_rate: Fraction | float, hard_macro: Fraction | float) -> Fraction | float:
    """Arithmetic mean of the soft and hard scores."""
    for name, value in (("soft_rate", soft_rate), ("hard_macro", hard_macro)):
        if not 0 <= float(value) <= 1:
            raise OutOfRange(f"{name} must lie in [0, 1], got {value}")
    return (soft_rate + hard_macro) / 2


def agreement_rate(pairs: Sequence[tuple[bool, bool]]) -> Fraction:
    """Fraction of (auto, human) pairs whose labels match."""
    if not pairs:
        raise EmptyInput("agreement_rate needs at least one pair")
    matches = sum(1 for auto, human in pairs if bool(auto) == bool(human))
    return Fraction(matches, len(pairs))


def cohens_kappa(pairs: Sequence[tuple[bool, bool]]) -> Fraction:
    """Chance-corrected agreement between two binary raters.

    kappa = (p_o - p_e) / (1 - p_e). When both raters use a single label
    everywhere, chance agreement is 1 and the ratio degenerates; we return 1
    (they agree perfectly) and emit a warning instead of dividing by zero.
    """
    if not pairs:
        raise EmptyInput("cohens_kappa needs at least one pair")
    n = len(pairs)
    a_yes = sum(1 for a, _ in pairs if bool(a))
    b_yes = sum(1 for _, b in pairs if bool(b))
    agree = sum(1 for a, b in pairs if bool(a) == bool(b))
    p_o = Fraction(agree, n)
    p_a, p_b = Fraction(a_yes, n), Fraction(b_yes, n)
    p_e = p_a * p_b + (1 - p_a) * (1 - p_b)
    if p_e == 1:
        warnings.warn(
            "cohens_kappa: both raters used a single label everywhere; returning 1",
            stacklevel=2,
        )
        return Fraction(1)
    return (p_o - p_e) / (1 - p_e)
