"""Vector store and similarity layer over two representation spaces.

The store keeps one vector per attribute per space. The correlation space
(fine-tuned encoder output) drives candidate retrieval; the semantic space
(base encoder output) drives redundancy checks. Vectors are ingested, never
computed here; provenance is the caller's responsibility.

Retrieval is an exact scan: no approximate index, ties broken by ascending
attribute id so rankings are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    SchemaError,
    SpaceMismatch,
    UnknownId,
    ZeroNorm,
)


class Space(Enum):
    """Which encoder produced a vector."""

    SEMANTIC = "semantic"
    CORRELATION = "correlation"


@dataclass(frozen=True)
class EmbeddingVector:
    """A finite, fixed-dimension vector tagged with its space."""

    values: tuple[float, ...]
    space: Space

    def __post_init__(self) -> None:
        if not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise SchemaError("embedding vector must have dim >= 1")
        if not all(math.isfinite(v) for v in self.values):
            raise SchemaError("embedding vector values must all be finite")

    @property
    def dim(self) -> int:
        return len(self.values)

    def norm(self) -> float:
        return _norm(np.asarray(self.values, dtype=np.float64))


@dataclass(frozen=True)
class Triplet:
    """An (anchor, positive, negative) id triple for encoder evaluation."""

    anchor_id: str
    positive_id: str
    negative_id: str

    def __post_init__(self) -> None:
        if len({self.anchor_id, self.positive_id, self.negative_id}) != 3:
            raise SchemaError("triplet ids must be three distinct attribute ids")


def _norm(array: np.ndarray) -> float:
    return math.sqrt(float(np.dot(array, array)))


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    dot_uu = float(np.dot(u, u))
    dot_vv = float(np.dot(v, v))
    if dot_uu == 0.0 or dot_vv == 0.0:
        raise ZeroNorm("zero-norm vectors cannot participate in similarity")
    # sqrt of the product keeps sim(u, u) exactly 1.0: sqrt(x * x) == x in IEEE.
    product = dot_uu * dot_vv
    if math.isinf(product):
        denominator = math.sqrt(dot_uu) * math.sqrt(dot_vv)
    else:
        denominator = math.sqrt(product)
    value = float(np.dot(u, v)) / denominator
    return max(-1.0, min(1.0, value))


def cosine_similarity(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """u.v / (|u||v|), clamped to [-1, 1] against floating rounding."""
    if u.space is not v.space:
        raise SpaceMismatch(f"cannot compare {u.space.value} with {v.space.value}")
    if u.dim != v.dim:
        raise DimensionMismatch(f"dim {u.dim} != dim {v.dim}")
    return _cosine(np.asarray(u.values, dtype=np.float64), np.asarray(v.values, dtype=np.float64))


class VectorStore:
    """Exact-lookup vector store, immutable once loaded.

    Adding a vector invalidates the cached scan matrix for its space;
    concurrent read-only queries after loading are safe.
    """

    def __init__(self) -> None:
        self._entries: dict[Space, dict[str, np.ndarray]] = {space: {} for space in Space}
        self._dims: dict[Space, int] = {}
        self._scan_cache: dict[Space, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def add(self, attribute_id: str, space: Space, values: Sequence[float]) -> None:
        try:
            array = np.asarray(list(values), dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"vector for {attribute_id!r} is not numeric: {exc}") from None
        if array.ndim != 1 or array.size == 0:
            raise SchemaError(f"vector for {attribute_id!r} must be a nonempty flat list")
        if not np.all(np.isfinite(array)):
            raise SchemaError(f"vector for {attribute_id!r} has non-finite values")
        expected = self._dims.setdefault(space, array.size)
        if array.size != expected:
            raise DimensionMismatch(
                f"vector for {attribute_id!r} has dim {array.size}; space "
                f"{space.value} holds dim {expected}"
            )
        self._entries[space][attribute_id] = array
        self._scan_cache.pop(space, None)

    def add_vector(self, attribute_id: str, vector: EmbeddingVector) -> None:
        self.add(attribute_id, vector.space, vector.values)

    def ids(self, space: Space) -> list[str]:
        return list(self._entries[space])

    def dim(self, space: Space) -> int | None:
        return self._dims.get(space)

    def __len__(self) -> int:
        return sum(len(entries) for entries in self._entries.values())

    def has(self, attribute_id: str, space: Space) -> bool:
        return attribute_id in self._entries[space]

    def get(self, attribute_id: str, space: Space) -> EmbeddingVector:
        try:
            array = self._entries[space][attribute_id]
        except KeyError:
            raise UnknownId(f"no {space.value} vector for id {attribute_id!r}") from None
        return EmbeddingVector(values=tuple(float(v) for v in array), space=space)

    def _array(self, attribute_id: str, space: Space) -> np.ndarray:
        try:
            return self._entries[space][attribute_id]
        except KeyError:
            raise UnknownId(f"no {space.value} vector for id {attribute_id!r}") from None

    def similarity(self, id_a: str, id_b: str, space: Space) -> float:
        """Cosine similarity between two stored vectors."""
        return _cosine(self._array(id_a, space), self._array(id_b, space))

    def _scan_matrix(self, space: Space) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # Zero-norm vectors are excluded: they cannot be ranked by similarity.
        cached = self._scan_cache.get(space)
        if cached is not None:
            return cached
        entries = self._entries[space]
        ids = [i for i, a in entries.items() if np.any(a != 0.0)]
        if ids:
            matrix = np.stack([entries[i] for i in ids])
            norms = np.array([_norm(entries[i]) for i in ids])
        else:
            matrix = np.empty((0, self._dims.get(space, 1)))
            norms = np.empty((0,))
        result = (np.asarray(ids, dtype=object), matrix, norms)
        self._scan_cache[space] = result
        return result

    def top_k(self, query_id: str, k: int, space: Space) -> list[tuple[str, float]]:
        """The k most similar ids to the query, excluding the query itself.

        Descending similarity, ties broken by ascending id; returns fewer
        than k when the store is smaller.
        """
        if k < 1:
            raise EmptyInput("k must be >= 1")
        query = self._array(query_id, space)
        query_norm = _norm(query)
        if query_norm == 0.0:
            raise ZeroNorm(f"query {query_id!r} has zero norm in {space.value}")
        ids, matrix, norms = self._scan_matrix(space)
        if ids.size == 0:
            return []
        sims = (matrix @ query) / (norms * query_norm)
        np.clip(sims, -1.0, 1.0, out=sims)
        self_mask = ids == query_id
        sims[self_mask] = -np.inf

        available = int(ids.size - self_mask.sum())
        take = min(k, available)
        if take <= 0:
            return []
        if take < available:
            # Keep every candidate tied with the k-th similarity so the id
            # tie-break sees them all, then cut after sorting.
            cutoff_index = sims.size - take
            cutoff = np.partition(sims, cutoff_index)[cutoff_index]
            keep = sims >= cutoff
        else:
            keep = ~self_mask
        kept_ids = ids[keep]
        kept_sims = sims[keep]
        order = sorted(range(kept_ids.size), key=lambda i: (-kept_sims[i], kept_ids[i]))
        return [(str(kept_ids[i]), float(kept_sims[i])) for i in order[:take]]


def top_k(store: VectorStore, query_id: str, k: int, space: Space) -> list[tuple[str, float]]:
    """Module-level alias for VectorStore.top_k."""
    return store.top_k(query_id, k, space)


def triplet_accuracy(store: VectorStore, triplets: Iterable[Triplet], space: Space) -> Fraction:
    """Fraction of triplets where sim(anchor, positive) > sim(anchor, negative).

    Ties count as failures: the encoder failed to distinguish the pair.
    """
    triplet_list = list(triplets)
    if not triplet_list:
        raise EmptyInput("triplet_accuracy needs at least one triplet")
    correct = 0
    for t in triplet_list:
        sim_pos = store.similarity(t.anchor_id, t.positive_id, space)
        sim_neg = store.similarity(t.anchor_id, t.negative_id, space)
        if sim_pos > sim_neg:
            correct += 1
    return Fraction(correct, len(triplet_list))
