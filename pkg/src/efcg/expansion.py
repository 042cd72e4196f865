"""Attribute set expansion: correlation-ranked greedy growth under a redundancy cap.

Each set starts from a seed soft attribute. Candidates come from the seed's
top-k neighbours in the correlation space, visited in descending correlation,
and a candidate joins only while its semantic-space similarity to the chosen
members stays below the redundancy threshold. Growth stops at a per-set
target size drawn uniformly from the configured range, or when candidates
run out.

The redundancy threshold default (0.85) is a configuration choice, not a
published value; tune it per pool. By default redundancy is checked against
every current member; seed_only_redundancy weakens the check to the seed
alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .embedding import Space, VectorStore, _norm
from .errors import MissingVector, OutOfRange, PoolTooSmall, UnknownSeed
from .types import Attribute, AttributeSet


@dataclass(frozen=True)
class ExpansionConfig:
    """Knobs for a batch expansion run. Defaults follow the pipeline scale:
    2000 seeds, 1024 retrieved candidates, target sizes 10 to 110."""

    seed_count: int = 2000
    retrieval_k: int = 1024
    redundancy_threshold: float = 0.85
    size_min: int = 10
    size_max: int = 110
    rng_seed: int = 0
    seed_only_redundancy: bool = False
    candidates_soft_only: bool = True

    def __post_init__(self) -> None:
        if self.seed_count < 1:
            raise OutOfRange("seed_count must be >= 1")
        if self.retrieval_k < 1:
            raise OutOfRange("retrieval_k must be >= 1")
        if not 0 < self.redundancy_threshold <= 1:
            raise OutOfRange("redundancy_threshold must lie in (0, 1]")
        if self.size_min < 1 or self.size_max < self.size_min:
            raise OutOfRange("need 1 <= size_min <= size_max")


@dataclass(frozen=True)
class ExpansionOutcome:
    """One expanded set plus bookkeeping about how growth ended."""

    attribute_set: AttributeSet
    seed_id: str
    target_size: int
    reached_target: bool
    rejected_redundant: int
    exhausted: bool

    def to_stats(self) -> dict:
        return {
            "seed_id": self.seed_id,
            "size": len(self.attribute_set),
            "target_size": self.target_size,
            "reached_target": self.reached_target,
            "rejected_redundant": self.rejected_redundant,
            "exhausted": self.exhausted,
        }


def _as_pool(pool: Mapping[str, Attribute] | Iterable[Attribute]) -> dict[str, Attribute]:
    if isinstance(pool, Mapping):
        return dict(pool)
    return {a.id: a for a in pool}


def expand_one(
    seed_id: str,
    pool: Mapping[str, Attribute] | Iterable[Attribute],
    store: VectorStore,
    cfg: ExpansionConfig,
    target_size: int,
) -> ExpansionOutcome:
    """Grow one set from a seed using the greedy redundancy-filtered rule.

    Pure given a pool snapshot and target size; safe to fan out over seeds.
    """
    attributes = _as_pool(pool)
    if seed_id not in attributes:
        raise UnknownSeed(f"seed {seed_id!r} not in pool")
    for space in (Space.CORRELATION, Space.SEMANTIC):
        if not store.has(seed_id, space):
            raise MissingVector(f"seed {seed_id!r} lacks a {space.value} vector")
    if not cfg.size_min <= target_size <= cfg.size_max:
        raise OutOfRange(
            f"target_size {target_size} outside [{cfg.size_min}, {cfg.size_max}]"
        )

    candidates = store.top_k(seed_id, cfg.retrieval_k, Space.CORRELATION)

    seed_array = np.asarray(store.get(seed_id, Space.SEMANTIC).values, dtype=np.float64)
    members = [attributes[seed_id]]
    member_arrays = [seed_array]
    member_norms = [_norm(seed_array)]
    rejected = 0
    ran_out = True
    for candidate_id, _ in candidates:
        if len(members) >= target_size:
            ran_out = False
            break
        attribute = attributes.get(candidate_id)
        if attribute is None:
            continue
        if cfg.candidates_soft_only and not attribute.is_soft:
            continue
        if not store.has(candidate_id, Space.SEMANTIC):
            continue
        row = np.asarray(store.get(candidate_id, Space.SEMANTIC).values, dtype=np.float64)
        row_norm = _norm(row)
        if row_norm == 0.0:
            continue
        checked = 1 if cfg.seed_only_redundancy else len(member_arrays)
        redundant = False
        for other, other_norm in zip(member_arrays[:checked], member_norms[:checked]):
            similarity = float(np.dot(row, other)) / (row_norm * other_norm)
            if similarity >= cfg.redundancy_threshold:
                redundant = True
                break
        if redundant:
            rejected += 1
            continue
        members.append(attribute)
        member_arrays.append(row)
        member_norms.append(row_norm)
    reached = len(members) == target_size
    if reached:
        ran_out = False

    attr_set = AttributeSet(
        id=f"set-{seed_id}",
        attributes=tuple(members),
        target_size=target_size,
    )
    return ExpansionOutcome(
        attribute_set=attr_set,
        seed_id=seed_id,
        target_size=target_size,
        reached_target=reached,
        rejected_redundant=rejected,
        exhausted=ran_out,
    )


def draw_seeds_and_targets(
    eligible_ids: list[str],
    cfg: ExpansionConfig,
) -> list[tuple[str, int]]:
    """Seeded draw of (seed, target_size) pairs: seeds without replacement,
    targets uniform over [size_min, size_max], all from one stream."""
    if len(eligible_ids) < cfg.seed_count:
        raise PoolTooSmall(
            f"need {cfg.seed_count} eligible soft attributes, found {len(eligible_ids)}"
        )
    rng = random.Random(cfg.rng_seed)
    seeds = rng.sample(eligible_ids, cfg.seed_count)
    return [(seed, rng.randint(cfg.size_min, cfg.size_max)) for seed in seeds]


def expand_batch(
    pool: Mapping[str, Attribute] | Iterable[Attribute],
    store: VectorStore,
    cfg: ExpansionConfig,
) -> list[ExpansionOutcome]:
    """Expand cfg.seed_count sets from randomly drawn soft seeds.

    Eligible seeds are soft attributes with vectors in both spaces, sorted by
    id before sampling, so results are byte-reproducible for a given
    rng_seed regardless of pool iteration order. Random draws all happen up
    front; per-seed expansion is deterministic and could fan out in parallel
    without perturbing results.
    """
    attributes = _as_pool(pool)
    eligible = sorted(
        attr_id
        for attr_id, attribute in attributes.items()
        if attribute.is_soft
        and store.has(attr_id, Space.CORRELATION)
        and store.has(attr_id, Space.SEMANTIC)
    )
    plan = draw_seeds_and_targets(eligible, cfg)
    return [
        expand_one(seed_id, attributes, store, cfg, target_size)
        for seed_id, target_size in plan
    ]
