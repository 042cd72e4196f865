"""Preference-pair construction: generate K candidates, score, pick extremes.

Each candidate is scored twice: the hard score is macro accuracy from the
deterministic verifier over the set's hard constraints, and the soft score
is the fraction of soft attributes the judge marks satisfied. The combined
score is their mean. The top-ranked candidate becomes "chosen", the
bottom-ranked "rejected"; sets whose extremes tie (or fall under the margin
floor) are skipped because they carry no learning signal.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Sequence

from .clients import ChatClient, EndpointConfig
from .errors import (
    ClientError,
    CountMismatch,
    DegenerateSet,
    GeneratorError,
    JudgeError,
    MalformedScore,
    SchemaError,
)
from .prompts import (
    parse_judge_reply,
    render_generation_prompt,
    render_judge_prompt,
    render_judge_repair_prompt,
)
from .scoring import compute_macro
from .types import Attribute, AttributeSet, ScoredResponse, VerificationResult
from .verifier import verify_all

logger = logging.getLogger(__name__)

GenerateFn = Callable[[str], str]
JudgeFn = Callable[[str, Sequence[Attribute]], list[bool]]

SKIP_ZERO_MARGIN = "zero_margin"
SKIP_BELOW_MIN_MARGIN = "below_min_margin"
SKIP_DEGENERATE = "degenerate_set"


@dataclass(frozen=True)
class PairConfig:
    """Candidate count, margin floor, and the two endpoints."""

    k_candidates: int = 4
    min_margin: float = 0.0
    generator: EndpointConfig | None = None
    judge: EndpointConfig | None = None
    max_inflight: int = 4

    def __post_init__(self) -> None:
        if self.k_candidates < 2:
            raise SchemaError("k_candidates must be >= 2")
        if self.min_margin < 0:
            raise SchemaError("min_margin must be >= 0")
        if self.max_inflight < 1:
            raise SchemaError("max_inflight must be >= 1")


@dataclass(frozen=True)
class PreferencePair:
    """A (prompt, chosen, rejected) triple where chosen strictly outscores rejected."""

    set_id: str
    prompt: str
    chosen: ScoredResponse
    rejected: ScoredResponse
    margin: float | Fraction

    def __post_init__(self) -> None:
        chosen_score = self.chosen.combined_score
        rejected_score = self.rejected.combined_score
        if not chosen_score > rejected_score:
            raise SchemaError(
                f"pair for set {self.set_id!r}: chosen score {chosen_score} "
                f"must strictly exceed rejected score {rejected_score}"
            )
        expected = chosen_score - rejected_score
        if isinstance(expected, Rational) and isinstance(self.margin, Rational):
            ok = expected == self.margin
        else:
            ok = abs(float(expected) - float(self.margin)) <= 1e-12
        if not ok:
            raise SchemaError(f"margin {self.margin} != score difference {expected}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "set_id": self.set_id,
            "prompt": self.prompt,
            "chosen": self.chosen.to_dict(),
            "rejected": self.rejected.to_dict(),
            "margin": float(self.margin),
        }


@dataclass(frozen=True)
class PairResult:
    """Outcome for one set: either a pair or a skip reason, for yield accounting."""

    set_id: str
    pair: PreferencePair | None
    skip_reason: str | None = None

    @property
    def skipped(self) -> bool:
        return self.pair is None


def judge_with_client(client: ChatClient, text: str, soft_attributes: Sequence[Attribute]) -> list[bool]:
    """Run the judge flow: render, call, parse, one repair retry on CountMismatch.

    A persistent mismatch propagates CountMismatch; callers decide whether
    that fails the candidate or the run.
    """
    prompt = render_judge_prompt(text, soft_attributes)
    try:
        reply = client.complete(prompt)
    except ClientError as exc:
        raise JudgeError(str(exc)) from exc
    try:
        return parse_judge_reply(reply, len(soft_attributes))
    except CountMismatch:
        repair = render_judge_repair_prompt(prompt, len(soft_attributes))
        try:
            retry_reply = client.complete(repair)
        except ClientError as exc:
            raise JudgeError(str(exc)) from exc
        return parse_judge_reply(retry_reply, len(soft_attributes))


def score_response(
    attr_set: AttributeSet,
    text: str,
    judge: JudgeFn,
) -> ScoredResponse:
    """Score one candidate: verifier macro for hard, judge micro for soft.

    A judge reply that stays unparseable after the retry scores the
    candidate's soft side as 0 rather than silently guessing.
    """
    hard_attributes = attr_set.hard_attributes
    soft_attributes = attr_set.soft_attributes
    if not hard_attributes or not soft_attributes:
        raise DegenerateSet(
            f"set {attr_set.id!r} needs at least one hard and one soft attribute"
        )
    hard_results = verify_all(attr_set, text)
    hard_score = compute_macro(
        [(a.constraint, r) for a, r in zip(hard_attributes, hard_results)]
    ).macro_accuracy

    try:
        flags = judge(text, soft_attributes)
    except (CountMismatch, MalformedScore) as exc:
        logger.warning("judge reply unusable for set %s: %s", attr_set.id, exc)
        flags = [False] * len(soft_attributes)
    if len(flags) != len(soft_attributes):
        raise JudgeError(
            f"judge returned {len(flags)} flags for {len(soft_attributes)} soft attributes"
        )
    soft_results = tuple(
        VerificationResult(
            attribute_id=a.id,
            satisfied=bool(flag),
            detail="judged satisfied" if flag else "judged unsatisfied",
        )
        for a, flag in zip(soft_attributes, flags)
    )
    soft_score = Fraction(sum(1 for f in flags if f), len(flags))
    return ScoredResponse(
        text=text,
        hard_results=tuple(hard_results),
        soft_results=soft_results,
        soft_score=soft_score,
        hard_score=hard_score,
        combined_score=(soft_score + hard_score) / 2,
    )


def rank_candidates(candidates: Sequence[ScoredResponse]) -> list[int]:
    """Indices ranked best-first: combined score, then hard score, then index."""
    return sorted(
        range(len(candidates)),
        key=lambda i: (-candidates[i].combined_score, -candidates[i].hard_score, i),
    )


def build_pair(
    attr_set: AttributeSet,
    cfg: PairConfig,
    generate: GenerateFn | None = None,
    judge: JudgeFn | None = None,
) -> PairResult:
    """Build one preference pair from K candidate generations.

    `generate` and `judge` default to HTTP clients built from the config
    endpoints; tests inject deterministic callables.
    """
    if not attr_set.hard_attributes or not attr_set.soft_attributes:
        raise DegenerateSet(
            f"set {attr_set.id!r} needs at least one hard and one soft attribute"
        )
    generate = generate or _generator_fn(cfg)
    judge = judge or _judge_fn(cfg)

    prompt = render_generation_prompt(attr_set)
    texts: list[str] = []
    for _ in range(cfg.k_candidates):
        try:
            texts.append(generate(prompt))
        except GeneratorError:
            raise
        except ClientError as exc:
            raise GeneratorError(str(exc)) from exc
    candidates = [score_response(attr_set, text, judge) for text in texts]

    ranking = rank_candidates(candidates)
    chosen = candidates[ranking[0]]
    rejected = candidates[ranking[-1]]
    margin = chosen.combined_score - rejected.combined_score
    if margin == 0:
        logger.info("set %s skipped: zero margin", attr_set.id)
        return PairResult(set_id=attr_set.id, pair=None, skip_reason=SKIP_ZERO_MARGIN)
    if float(margin) < cfg.min_margin:
        logger.info("set %s skipped: margin %s below floor %s", attr_set.id, margin, cfg.min_margin)
        return PairResult(set_id=attr_set.id, pair=None, skip_reason=SKIP_BELOW_MIN_MARGIN)
    pair = PreferencePair(
        set_id=attr_set.id,
        prompt=prompt,
        chosen=chosen,
        rejected=rejected,
        margin=margin,
    )
    return PairResult(set_id=attr_set.id, pair=pair, skip_reason=None)


def _generator_fn(cfg: PairConfig) -> GenerateFn:
    if cfg.generator is None:
        raise GeneratorError("no generator endpoint configured")
    client = ChatClient(cfg.generator)

    def generate(prompt: str) -> str:
        try:
            return client.complete(prompt)
        except ClientError as exc:
            raise GeneratorError(str(exc)) from exc

    return generate


def _judge_fn(cfg: PairConfig) -> JudgeFn:
    if cfg.judge is None:
        raise JudgeError("no judge endpoint configured")
    client = ChatClient(cfg.judge)

    def judge(text: str, soft_attributes: Sequence[Attribute]) -> list[bool]:
        return judge_with_client(client, text, soft_attributes)

    return judge


def build_pairs(
    sets: Sequence[AttributeSet],
    cfg: PairConfig,
    generate: GenerateFn | None = None,
    judge: JudgeFn | None = None,
    skip_set_ids: set[str] | None = None,
) -> list[PairResult]:
    """Build pairs for many sets with bounded parallelism.

    Output order equals input order regardless of completion order.
    skip_set_ids supports idempotent resume: those sets are not reprocessed
    and produce no result entry. Degenerate sets (missing a hard or soft
    attribute) become skips here instead of aborting the batch.
    """
    todo = [s for s in sets if not skip_set_ids or s.id not in skip_set_ids]
    if not todo:
        return []

    def build_one(attr_set: AttributeSet) -> PairResult:
        try:
            return build_pair(attr_set, cfg, generate, judge)
        except DegenerateSet as exc:
            logger.info("set %s skipped: %s", attr_set.id, exc)
            return PairResult(set_id=attr_set.id, pair=None, skip_reason=SKIP_DEGENERATE)

    if cfg.max_inflight == 1 or len(todo) == 1:
        return [build_one(s) for s in todo]
    with ThreadPoolExecutor(max_workers=cfg.max_inflight) as pool:
        return list(pool.map(build_one, todo))
