"""Experiment drivers: position-bias measurement and the attribute-count sweep.

Both drivers accept plain callables for generation and judging so they run
identically against HTTP clients and deterministic test doubles. Reports
carry exact fractional scores and serialize to JSON and CSV rows; plotting
itself is out of scope (feed the CSV to your plotter of choice).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from .errors import ClientError, EmptyInput, GeneratorError, PoolTooSmall, PositionOutOfRange
from .expansion import ExpansionConfig, expand_batch
from .pairs import GenerateFn, JudgeFn
from .prompts import render_generation_prompt
from .scoring import compute_csr
from .types import Attribute, AttributeSet, HardConstraint, validate_constraint
from .verifier import normalize_word, verify

Position = float | int
QualityScorer = Callable[[str, str], float]

TOKEN_F1_LABEL = "token_f1"


@dataclass(frozen=True)
class PositionBucket:
    """Mean probe satisfaction at one insertion position."""

    position_fraction: float
    n: int
    hard_score: Fraction

    def to_dict(self) -> dict[str, Any]:
        return {
            "position_fraction": self.position_fraction,
            "n": self.n,
            "hard_score": float(self.hard_score),
        }


@dataclass(frozen=True)
class PositionBiasReport:
    """Probe satisfaction per insertion position, ordered by position."""

    buckets: tuple[PositionBucket, ...]
    probe_type: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "probe_type": self.probe_type,
            "buckets": [b.to_dict() for b in self.buckets],
        }

    def csv_rows(self) -> list[dict[str, Any]]:
        return [b.to_dict() for b in self.buckets]


@dataclass(frozen=True)
class TradeoffPoint:
    """CSR (and optional quality) at one attribute count."""

    n_attributes: int
    csr: Fraction
    quality: float | None
    n_sets: int

    def to_dict(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "n_attributes": self.n_attributes,
            "csr": float(self.csr),
            "n_sets": self.n_sets,
        }
        if self.quality is not None:
            record["quality"] = self.quality
        return record


@dataclass(frozen=True)
class TradeoffReport:
    """CSR versus attribute count, ordered by count."""

    points: tuple[TradeoffPoint, ...]
    label: str
    quality_metric: str | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "quality_metric": self.quality_metric,
            "points": [p.to_dict() for p in self.points],
        }

    def csv_rows(self) -> list[dict[str, Any]]:
        return [p.to_dict() for p in self.points]


def _insertion_index(position: Position, set_size: int) -> int:
    if isinstance(position, bool) or set_size < 1:
        raise PositionOutOfRange(f"bad position {position!r} for set of size {set_size}")
    if isinstance(position, int):
        if not 0 <= position <= set_size:
            raise PositionOutOfRange(
                f"index {position} does not fit a set of {set_size} attributes"
            )
        return position
    if not 0.0 <= position <= 1.0:
        raise PositionOutOfRange(f"fraction {position} outside [0, 1]")
    return round(position * set_size)


def run_position_bias(
    sets: Sequence[AttributeSet],
    probe: HardConstraint,
    positions: Sequence[Position],
    generate: GenerateFn,
    probe_id: str = "probe",
) -> PositionBiasReport:
    """Measure probe satisfaction as the probe moves through the attribute list.

    For each set and position the probe constraint is inserted (all other
    attributes fixed, order preserved), one generation is fetched, and the
    probe alone is verified. Integer positions are insertion indices;
    floats in [0, 1] are fractions of the set length.
    """
    if not sets or not positions:
        raise EmptyInput("run_position_bias needs sets and positions")
    validate_constraint(probe)
    probe_attribute = Attribute.hard(probe_id, probe)

    buckets = []
    for position in positions:
        satisfied = 0
        fraction_total = 0.0
        for attr_set in sets:
            index = _insertion_index(position, len(attr_set))
            fraction_total += index / len(attr_set)
            probed = AttributeSet(
                id=f"{attr_set.id}@{position}",
                attributes=(
                    attr_set.attributes[:index]
                    + (probe_attribute,)
                    + attr_set.attributes[index:]
                ),
            )
            prompt = render_generation_prompt(probed)
            try:
                text = generate(prompt)
            except GeneratorError:
                raise
            except ClientError as exc:
                raise GeneratorError(str(exc)) from exc
            if verify(probe, text, attribute_id=probe_id).satisfied:
                satisfied += 1
        fraction = (
            float(position) if isinstance(position, float) else fraction_total / len(sets)
        )
        buckets.append(
            PositionBucket(
                position_fraction=fraction,
                n=len(sets),
                hard_score=Fraction(satisfied, len(sets)),
            )
        )
    buckets.sort(key=lambda b: b.position_fraction)
    return PositionBiasReport(buckets=tuple(buckets), probe_type=probe.type_name)


def token_f1(candidate: str, reference: str) -> float:
    """Token-level F1 over normalized words. This is NOT BERTScore; it is the
    built-in fallback quality signal and is labeled token_f1 in reports."""
    cand = Counter(t for t in (normalize_word(w) for w in candidate.split()) if t)
    ref = Counter(t for t in (normalize_word(w) for w in reference.split()) if t)
    if not cand or not ref:
        return 0.0
    common = sum((cand & ref).values())
    if common == 0:
        return 0.0
    precision = common / sum(cand.values())
    recall = common / sum(ref.values())
    return 2 * precision * recall / (precision + recall)


def run_tradeoff(
    pool: Mapping[str, Attribute] | Sequence[Attribute],
    store,
    counts: Sequence[int],
    per_count_sets: int,
    generate: GenerateFn,
    judge: JudgeFn | None,
    base_cfg: ExpansionConfig | None = None,
    quality_scorer: QualityScorer | None = None,
    source_texts: Mapping[str, str] | None = None,
    label: str = "default",
) -> TradeoffReport:
    """Sweep attribute counts: expand sets of exactly each count, generate once
    per set, and report CSR per count.

    CSR here is micro per instruction: each set contributes the fraction of
    its constraints satisfied (hard via the verifier, soft via the judge).
    Quality uses quality_scorer when given, else token F1 against the seed
    attribute's source document when source_texts provides it; otherwise the
    point carries no quality value.
    """
    if not counts:
        raise EmptyInput("run_tradeoff needs at least one attribute count")
    if list(counts) != sorted(counts) or len(set(counts)) != len(counts):
        raise ValueError("counts must be strictly ascending")
    if per_count_sets < 1:
        raise EmptyInput("per_count_sets must be >= 1")
    base_cfg = base_cfg or ExpansionConfig()

    points = []
    for count in counts:
        cfg = replace(base_cfg, seed_count=per_count_sets, size_min=count, size_max=count)
        outcomes = expand_batch(pool, store, cfg)
        short = [o for o in outcomes if not o.reached_target]
        if short:
            raise PoolTooSmall(
                f"{len(short)} of {len(outcomes)} expansions exhausted below "
                f"{count} attributes; the pool cannot support this sweep"
            )
        per_set_flags: list[list[bool]] = []
        qualities: list[float] = []
        for outcome in outcomes:
            attr_set = outcome.attribute_set
            prompt = render_generation_prompt(attr_set)
            try:
                text = generate(prompt)
            except GeneratorError:
                raise
            except ClientError as exc:
                raise GeneratorError(str(exc)) from exc
            flags: list[bool] = []
            hard = attr_set.hard_attributes
            if hard:
                flags.extend(
                    verify(a.constraint, text, attribute_id=a.id).satisfied for a in hard
                )
            soft = attr_set.soft_attributes
            if soft:
                if judge is None:
                    raise EmptyInput("sets contain soft attributes but no judge was given")
                flags.extend(bool(f) for f in judge(text, soft))
            per_set_flags.append(flags)

            reference = None
            seed_doc = attr_set.attributes[0].source_doc
            if source_texts and seed_doc is not None:
                reference = source_texts.get(seed_doc)
            if quality_scorer is not None and reference is not None:
                qualities.append(quality_scorer(text, reference))
            elif quality_scorer is None and reference is not None:
                qualities.append(token_f1(text, reference))

        csr = compute_csr(per_set_flags).csr
        quality = sum(qualities) / len(qualities) if qualities else None
        points.append(
            TradeoffPoint(
                n_attributes=count,
                csr=csr,
                quality=quality,
                n_sets=len(outcomes),
            )
        )
    metric = None
    if any(p.quality is not None for p in points):
        metric = "custom" if quality_scorer is not None else TOKEN_F1_LABEL
    return TradeoffReport(points=tuple(points), label=label, quality_metric=metric)
