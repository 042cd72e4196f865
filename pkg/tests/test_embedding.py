"""Similarity math, exact-scan retrieval, and triplet evaluation."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import bruteforce
from efcg.embedding import (
    EmbeddingVector,
    Space,
    Triplet,
    VectorStore,
    cosine_similarity,
    top_k,
    triplet_accuracy,
)
from efcg.errors import (
    DimensionMismatch,
    EmptyInput,
    SchemaError,
    SpaceMismatch,
    UnknownId,
    ZeroNorm,
)


def _vec(*values, space=Space.SEMANTIC):
    return EmbeddingVector(values=tuple(float(v) for v in values), space=space)


def _store(vectors: dict[str, tuple], space=Space.SEMANTIC) -> VectorStore:
    store = VectorStore()
    for vec_id, values in vectors.items():
        store.add(vec_id, space, values)
    return store


coarse_floats = st.integers(-8, 8).map(lambda i: i / 2.0)


class TestEmbeddingVector:
    def test_dim_and_validation(self):
        assert _vec(1, 2, 3).dim == 3
        with pytest.raises(SchemaError):
            EmbeddingVector(values=(), space=Space.SEMANTIC)
        with pytest.raises(SchemaError):
            EmbeddingVector(values=(float("nan"), 1.0), space=Space.SEMANTIC)
        with pytest.raises(SchemaError):
            EmbeddingVector(values=(float("inf"),), space=Space.SEMANTIC)


class TestCosineSimilarity:
    def test_identical_vector_is_one(self):
        u = _vec(0.3, -1.2, 4.0)
        assert cosine_similarity(u, u) == 1.0

    def test_orthogonal_is_zero(self):
        assert cosine_similarity(_vec(1, 0), _vec(0, 1)) == 0.0

    def test_hand_computed_45_degrees(self):
        assert cosine_similarity(_vec(1, 1), _vec(1, 0)) == pytest.approx(
            math.sqrt(2) / 2, abs=1e-6
        )

    def test_opposite_is_minus_one(self):
        assert cosine_similarity(_vec(2, 0), _vec(-3, 0)) == -1.0

    def test_errors(self):
        with pytest.raises(SpaceMismatch):
            cosine_similarity(_vec(1, 0), _vec(1, 0, space=Space.CORRELATION))
        with pytest.raises(DimensionMismatch):
            cosine_similarity(_vec(1, 0), _vec(1, 0, 0))
        with pytest.raises(ZeroNorm):
            cosine_similarity(_vec(0, 0), _vec(1, 0))

    @given(
        st.lists(coarse_floats, min_size=2, max_size=6),
        st.lists(coarse_floats, min_size=2, max_size=6),
        st.integers(1, 8),
    )
    @settings(max_examples=200)
    def test_symmetry_and_scale_invariance(self, u_values, v_values, alpha):
        dim = min(len(u_values), len(v_values))
        u_values, v_values = u_values[:dim], v_values[:dim]
        if not any(u_values) or not any(v_values):
            return
        u, v = _vec(*u_values), _vec(*v_values)
        assert cosine_similarity(u, v) == cosine_similarity(v, u)
        scaled = _vec(*(alpha * x for x in u_values))
        assert cosine_similarity(scaled, v) == pytest.approx(
            cosine_similarity(u, v), abs=1e-12
        )
        assert -1.0 <= cosine_similarity(u, v) <= 1.0

    def test_agrees_with_naive_math(self):
        rng = random.Random(5)
        for _ in range(200):
            dim = rng.randint(2, 8)
            u = [round(rng.uniform(-2, 2), 3) for _ in range(dim)]
            v = [round(rng.uniform(-2, 2), 3) for _ in range(dim)]
            if not any(u) or not any(v):
                continue
            assert cosine_similarity(_vec(*u), _vec(*v)) == pytest.approx(
                bruteforce.naive_cosine(u, v), abs=1e-12
            )


class TestVectorStore:
    def test_dim_enforced_per_space(self):
        store = _store({"a": (1, 0)})
        with pytest.raises(DimensionMismatch):
            store.add("b", Space.SEMANTIC, (1, 0, 0))
        store.add("b", Space.CORRELATION, (1, 0, 0))  # other space, own dim

    def test_exact_lookup(self):
        store = _store({"a": (1, 2)})
        assert store.get("a", Space.SEMANTIC).values == (1.0, 2.0)
        with pytest.raises(UnknownId):
            store.get("missing", Space.SEMANTIC)
        with pytest.raises(UnknownId):
            store.get("a", Space.CORRELATION)


class TestTopK:
    def test_k_larger_than_store_returns_all_sorted(self):
        store = _store({"q": (1, 0), "a": (1, 0.1), "b": (0, 1), "c": (1, 0.5)})
        result = store.top_k("q", 1024, Space.SEMANTIC)
        assert [i for i, _ in result] == ["a", "c", "b"]

    def test_k_one_is_analytic_nearest(self):
        store = _store({"q": (1.0, 0.0), "near": (0.9, 0.1), "far": (-1.0, 0.2)})
        result = store.top_k("q", 1, Space.SEMANTIC)
        assert [i for i, _ in result] == ["near"]

    def test_ties_break_by_ascending_id(self):
        store = _store({"q": (1, 0), "zz": (2, 0), "aa": (2, 0), "mm": (0.5, 0.5)})
        result = store.top_k("q", 3, Space.SEMANTIC)
        assert [i for i, _ in result] == ["aa", "zz", "mm"]

    def test_tie_at_cut_boundary_prefers_lower_id(self):
        store = _store({"q": (1, 0), "b": (3, 0), "a": (3, 0), "z": (1, 1)})
        result = store.top_k("q", 1, Space.SEMANTIC)
        assert [i for i, _ in result] == ["a"]

    def test_unknown_query(self):
        with pytest.raises(UnknownId):
            _store({"a": (1, 0)}).top_k("nope", 3, Space.SEMANTIC)

    def test_zero_norm_query_rejected(self):
        store = _store({"q": (0, 0), "a": (1, 0)})
        with pytest.raises(ZeroNorm):
            store.top_k("q", 1, Space.SEMANTIC)

    def test_zero_norm_candidates_skipped(self):
        store = _store({"q": (1, 0), "z": (0, 0), "a": (1, 1)})
        assert [i for i, _ in store.top_k("q", 5, Space.SEMANTIC)] == ["a"]

    def test_module_level_alias(self):
        store = _store({"q": (1, 0), "a": (0.5, 0)})
        assert top_k(store, "q", 1, Space.SEMANTIC) == store.top_k("q", 1, Space.SEMANTIC)

    def test_matches_bruteforce_full_sort(self):
        rng = random.Random(17)
        for trial in range(30):
            n = rng.randint(3, 24)
            dim = rng.randint(2, 5)
            vectors = {}
            for i in range(n):
                values = tuple(rng.randint(-4, 4) * 0.5 for _ in range(dim))
                if not any(values):
                    values = (1.0,) + (0.0,) * (dim - 1)
                vectors[f"v{i:02d}"] = values
            if rng.random() < 0.5:
                vectors["v00"] = vectors[f"v{n - 1:02d}"]  # force duplicates
            store = _store(vectors)
            query = rng.choice(sorted(vectors))
            expected = bruteforce.naive_top_k(vectors, query, len(vectors) - 1)
            actual = store.top_k(query, len(vectors) - 1, Space.SEMANTIC)
            assert [i for i, _ in actual] == [i for i, _ in expected], f"trial {trial}"
            for (_, got), (_, want) in zip(actual, expected):
                assert got == pytest.approx(want, abs=1e-12)


class TestTripletAccuracy:
    def test_positive_identical_negative_orthogonal(self):
        store = _store({"a": (1, 0), "p": (1, 0), "n": (0, 1)})
        triplets = [Triplet("a", "p", "n")]
        assert triplet_accuracy(store, triplets, Space.SEMANTIC) == 1

    def test_swapped_everywhere_is_zero(self):
        store = _store({"a": (1, 0), "p": (1, 0), "n": (0, 1)})
        swapped = [Triplet("a", "n", "p")]
        assert triplet_accuracy(store, swapped, Space.SEMANTIC) == 0

    def test_hand_built_fraction(self):
        store = _store({"a": (1.0, 0.0), "close": (0.9, 0.1), "far": (0.0, 1.0)})
        triplets = [Triplet("a", "close", "far")] * 7 + [Triplet("a", "far", "close")] * 3
        assert triplet_accuracy(store, triplets, Space.SEMANTIC) == Fraction(7, 10)

    def test_ties_count_as_failures(self):
        store = _store({"a": (1, 0), "p": (2, 0), "n": (3, 0)})
        assert triplet_accuracy(store, [Triplet("a", "p", "n")], Space.SEMANTIC) == 0

    def test_antisymmetry_bound(self):
        rng = random.Random(23)
        vectors = {
            f"v{i}": tuple(rng.randint(-4, 4) * 0.5 or 1.0 for _ in range(3))
            for i in range(10)
        }
        store = _store(vectors)
        ids = sorted(vectors)
        triplets = []
        for _ in range(60):
            anchor, pos, neg = rng.sample(ids, 3)
            triplets.append(Triplet(anchor, pos, neg))
        forward = triplet_accuracy(store, triplets, Space.SEMANTIC)
        swapped = triplet_accuracy(
            store,
            [Triplet(t.anchor_id, t.negative_id, t.positive_id) for t in triplets],
            Space.SEMANTIC,
        )
        assert forward + swapped <= 1

    def test_errors(self):
        store = _store({"a": (1, 0), "p": (1, 1), "n": (0, 1)})
        with pytest.raises(EmptyInput):
            triplet_accuracy(store, [], Space.SEMANTIC)
        with pytest.raises(UnknownId):
            triplet_accuracy(store, [Triplet("a", "p", "ghost")], Space.SEMANTIC)
        with pytest.raises(SchemaError):
            Triplet("a", "a", "n")
