"""Core type invariants and serialization round-trips."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from efcg.errors import InvalidConstraint, OutOfRange, SchemaError
from efcg.types import (
    AllLowercase,
    AllUppercase,
    Attribute,
    AttributeSet,
    CONSTRAINT_TYPE_NAMES,
    EndPhrase,
    IncludeKeyword,
    KeywordFrequency,
    NumParagraphs,
    NumSentences,
    NumWords,
    Relation,
    ScoredResponse,
    VerificationResult,
    WordAtPosition,
    WordOrder,
    attribute_from_dict,
    attribute_set_from_dict,
    attribute_set_to_dict,
    attribute_to_dict,
    constraint_from_dict,
    constraint_to_dict,
    validate_constraint,
)

nonblank = st.text(min_size=1, max_size=20).filter(lambda s: bool(s.strip()))

constraints = st.one_of(
    st.builds(IncludeKeyword, keyword=nonblank),
    st.builds(KeywordFrequency, word=nonblank, n=st.integers(0, 999)),
    st.builds(NumParagraphs, n=st.integers(1, 999)),
    st.builds(NumWords, relation=st.sampled_from(Relation), n=st.integers(1, 999)),
    st.builds(NumSentences, relation=st.sampled_from(Relation), n=st.integers(1, 999)),
    st.just(AllUppercase()),
    st.just(AllLowercase()),
    st.builds(EndPhrase, phrase=nonblank),
    st.builds(WordAtPosition, k=st.integers(1, 5), word=nonblank),
    st.builds(WordOrder, first=nonblank, second=nonblank),
)

attributes = st.one_of(
    st.builds(
        Attribute.soft,
        st.text(min_size=1, max_size=12),
        nonblank,
        source_doc=st.none() | st.text(max_size=8),
        domain=st.none() | st.text(max_size=8),
    ),
    st.builds(
        Attribute.hard,
        st.text(min_size=1, max_size=12),
        constraints,
        source_doc=st.none() | st.text(max_size=8),
    ),
)


class TestValidateConstraint:
    def test_word_position_beyond_limit_rejected(self):
        with pytest.raises(InvalidConstraint):
            validate_constraint(WordAtPosition(k=6, word="hello"))

    def test_minimal_paragraph_count_ok(self):
        validate_constraint(NumParagraphs(n=1))

    def test_whitespace_keyword_rejected(self):
        with pytest.raises(InvalidConstraint):
            validate_constraint(IncludeKeyword(keyword="   "))

    def test_zero_frequency_is_legal_only_for_keyword_frequency(self):
        validate_constraint(KeywordFrequency(word="tide", n=0))
        with pytest.raises(InvalidConstraint):
            validate_constraint(NumWords(relation=Relation.AT_LEAST, n=0))
        with pytest.raises(InvalidConstraint):
            validate_constraint(NumSentences(relation=Relation.AROUND, n=0))
        with pytest.raises(InvalidConstraint):
            validate_constraint(NumParagraphs(n=0))

    def test_negative_frequency_rejected(self):
        with pytest.raises(InvalidConstraint):
            validate_constraint(KeywordFrequency(word="tide", n=-1))

    @given(constraints)
    def test_generated_constraints_are_valid(self, constraint):
        validate_constraint(constraint)


class TestConstraintSerialization:
    @given(constraints)
    def test_round_trip(self, constraint):
        record = json.loads(json.dumps(constraint_to_dict(constraint)))
        assert constraint_from_dict(record) == constraint

    def test_type_names_are_snake_case(self):
        for name in CONSTRAINT_TYPE_NAMES:
            assert name == name.lower()
            assert " " not in name

    def test_unknown_field_strict_vs_lenient(self):
        record = {"type": "num_paragraphs", "n": 3, "bogus": 1}
        with pytest.raises(SchemaError):
            constraint_from_dict(record)
        assert constraint_from_dict(record, strict=False) == NumParagraphs(n=3)

    def test_unknown_type_rejected(self):
        with pytest.raises(SchemaError):
            constraint_from_dict({"type": "start_with", "phrase": "x"})

    def test_missing_field_rejected(self):
        with pytest.raises(SchemaError):
            constraint_from_dict({"type": "include_keyword"})

    def test_invalid_values_rejected_after_parse(self):
        with pytest.raises(InvalidConstraint):
            constraint_from_dict({"type": "word_at_position", "k": 9, "word": "x"})


class TestAttribute:
    def test_soft_and_hard_constructors(self):
        soft = Attribute.soft("a1", "calm tone")
        hard = Attribute.hard("a2", NumParagraphs(n=2))
        assert soft.is_soft and not soft.is_hard and soft.kind == "soft"
        assert hard.is_hard and not hard.is_soft and hard.kind == "hard"

    def test_must_be_exactly_one_kind(self):
        with pytest.raises(SchemaError):
            Attribute(id="a", text="x", constraint=NumParagraphs(n=1))
        with pytest.raises(SchemaError):
            Attribute(id="a")

    def test_blank_soft_text_rejected(self):
        with pytest.raises(SchemaError):
            Attribute.soft("a", "  \n ")

    def test_empty_id_rejected(self):
        with pytest.raises(SchemaError):
            Attribute.soft("", "text")

    @given(attributes)
    def test_round_trip(self, attribute):
        record = json.loads(json.dumps(attribute_to_dict(attribute)))
        assert attribute_from_dict(record) == attribute

    def test_record_schema_field_names(self):
        soft = attribute_to_dict(Attribute.soft("s", "vivid", source_doc="d7", domain="news"))
        assert soft == {"id": "s", "kind": "soft", "text": "vivid",
                        "source_doc": "d7", "domain": "news"}
        hard = attribute_to_dict(Attribute.hard("h", IncludeKeyword(keyword="tide")))
        assert hard == {"id": "h", "kind": "hard",
                        "constraint": {"type": "include_keyword", "keyword": "tide"}}

    def test_unknown_field_strict_vs_lenient(self):
        record = {"id": "a", "kind": "soft", "text": "x", "extra": True}
        with pytest.raises(SchemaError):
            attribute_from_dict(record)
        assert attribute_from_dict(record, strict=False).text == "x"

    def test_kind_payload_mismatch_rejected(self):
        with pytest.raises(SchemaError):
            attribute_from_dict({"id": "a", "kind": "soft",
                                 "constraint": {"type": "num_paragraphs", "n": 1}})
        with pytest.raises(SchemaError):
            attribute_from_dict({"id": "a", "kind": "hard", "text": "x"})


class TestAttributeSet:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(SchemaError):
            AttributeSet(id="s", attributes=(
                Attribute.soft("a", "x"), Attribute.soft("a", "y"),
            ))

    def test_order_preserved_through_round_trip(self):
        attrs = tuple(Attribute.soft(f"a{i}", f"text {i}") for i in range(6))
        original = AttributeSet(id="s", attributes=attrs, target_size=9)
        record = json.loads(json.dumps(attribute_set_to_dict(original)))
        restored = attribute_set_from_dict(record)
        assert restored == original
        assert [a.id for a in restored.attributes] == [f"a{i}" for i in range(6)]

    @given(st.lists(attributes, max_size=8, unique_by=lambda a: a.id))
    def test_round_trip_any_set(self, attrs):
        original = AttributeSet(id="s", attributes=tuple(attrs))
        record = json.loads(json.dumps(attribute_set_to_dict(original)))
        assert attribute_set_from_dict(record) == original


class TestVerificationResult:
    def test_unsatisfied_needs_detail(self):
        with pytest.raises(SchemaError):
            VerificationResult(attribute_id="a", satisfied=False, detail="")

    def test_satisfied_detail_optional(self):
        VerificationResult(attribute_id="a", satisfied=True, detail="")


class TestScoredResponse:
    def _results(self, flags, prefix):
        return tuple(
            VerificationResult(attribute_id=f"{prefix}{i}", satisfied=f, detail="d")
            for i, f in enumerate(flags)
        )

    def test_combined_must_be_mean(self):
        with pytest.raises(SchemaError):
            ScoredResponse(
                text="t",
                hard_results=(),
                soft_results=(),
                soft_score=Fraction(1),
                hard_score=Fraction(0),
                combined_score=Fraction(1),
            )

    def test_exact_fraction_combined(self):
        response = ScoredResponse(
            text="t",
            hard_results=self._results([True], "h"),
            soft_results=self._results([True, False, True], "s"),
            soft_score=Fraction(2, 3),
            hard_score=Fraction(1, 2),
            combined_score=Fraction(7, 12),
        )
        assert response.combined_score == Fraction(7, 12)

    def test_soft_score_must_match_results(self):
        with pytest.raises(SchemaError):
            ScoredResponse(
                text="t",
                hard_results=(),
                soft_results=self._results([True, False], "s"),
                soft_score=Fraction(1),
                hard_score=Fraction(1),
                combined_score=Fraction(1),
            )

    def test_out_of_range_scores_rejected(self):
        with pytest.raises(OutOfRange):
            ScoredResponse(
                text="t",
                hard_results=(),
                soft_results=(),
                soft_score=Fraction(3, 2),
                hard_score=Fraction(1, 2),
                combined_score=Fraction(1),
            )

    @given(
        soft=st.fractions(min_value=0, max_value=1),
        hard=st.fractions(min_value=0, max_value=1),
    )
    def test_combined_invariant_holds_for_any_scores(self, soft, hard):
        response = ScoredResponse(
            text="t",
            hard_results=(),
            soft_results=(),
            soft_score=soft,
            hard_score=hard,
            combined_score=(soft + hard) / 2,
        )
        assert response.combined_score == (soft + hard) / 2
