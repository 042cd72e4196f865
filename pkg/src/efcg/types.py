"""Core domain vocabulary: hard constraints, attributes, sets, and scored results.

All types are immutable value objects and safe to share between threads.
Scores are kept as exact fractions internally and rendered to floats only
at serialization boundaries, so macro averages never accumulate error.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Any, ClassVar, Union

from .errors import InvalidConstraint, OutOfRange, SchemaError

MAX_WORD_POSITION = 5


class Relation(Enum):
    """Direction of a count requirement: at least / around / at most N."""

    AT_LEAST = "at_least"
    AROUND = "around"
    AT_MOST = "at_most"

    @property
    def phrase(self) -> str:
        return self.value.replace("_", " ")


def _nonblank(value: str) -> bool:
    return isinstance(value, str) and bool(value.strip())


@dataclass(frozen=True)
class IncludeKeyword:
    """The response must include the keyword (whole-word, case-insensitive)."""

    keyword: str
    type_name: ClassVar[str] = "include_keyword"

    def describe(self) -> str:
        return f"Include keywords {self.keyword} in your response"


@dataclass(frozen=True)
class KeywordFrequency:
    """The word must appear exactly n times. n = 0 means zero occurrences."""

    word: str
    n: int
    type_name: ClassVar[str] = "keyword_frequency"

    def describe(self) -> str:
        return f"In your response, the word {self.word} should appear {self.n} times."


@dataclass(frozen=True)
class NumParagraphs:
    """The response must contain exactly n paragraphs (blank-line separated)."""

    n: int
    type_name: ClassVar[str] = "num_paragraphs"

    def describe(self) -> str:
        return (
            f"Your response should contain {self.n} paragraphs. "
            "You separate paragraphs using \\n\\n"
        )


@dataclass(frozen=True)
class NumWords:
    """Word count compared against n under a relation."""

    relation: Relation
    n: int
    type_name: ClassVar[str] = "num_words"

    def describe(self) -> str:
        return f"Answer with {self.relation.phrase} {self.n} words."


@dataclass(frozen=True)
class NumSentences:
    """Sentence count compared against n under a relation."""

    relation: Relation
    n: int
    type_name: ClassVar[str] = "num_sentences"

    def describe(self) -> str:
        return f"Answer with {self.relation.phrase} {self.n} sentences."


@dataclass(frozen=True)
class AllUppercase:
    """Every cased letter must be uppercase, and at least one must exist."""

    type_name: ClassVar[str] = "all_uppercase"

    def describe(self) -> str:
        return "Your entire response should be in English, capital letters only."


@dataclass(frozen=True)
class AllLowercase:
    """Every cased letter must be lowercase, and at least one must exist."""

    type_name: ClassVar[str] = "all_lowercase"

    def describe(self) -> str:
        return (
            "Your entire response should be in English, and in all lowercase "
            "letters. No capital letters are allowed."
        )


@dataclass(frozen=True)
class EndPhrase:
    """The response must end with this exact phrase (case-sensitive)."""

    phrase: str
    type_name: ClassVar[str] = "end_phrase"

    def describe(self) -> str:
        return (
            f"Finish your response with this exact phrase {self.phrase}. "
            "No other words should follow this phrase."
        )


@dataclass(frozen=True)
class WordAtPosition:
    """The k-th word (1-indexed, k <= 5) must be the given word."""

    k: int
    word: str
    type_name: ClassVar[str] = "word_at_position"

    def describe(self) -> str:
        return f"The {self.k}-th word in the text must be {self.word}."


@dataclass(frozen=True)
class WordOrder:
    """The first word must occur before the second word."""

    first: str
    second: str
    type_name: ClassVar[str] = "word_order"

    def describe(self) -> str:
        return f"Word {self.first} must appear before word {self.second}."


HardConstraint = Union[
    IncludeKeyword,
    KeywordFrequency,
    NumParagraphs,
    NumWords,
    NumSentences,
    AllUppercase,
    AllLowercase,
    EndPhrase,
    WordAtPosition,
    WordOrder,
]

CONSTRAINT_CLASSES: dict[str, type] = {
    cls.type_name: cls
    for cls in (
        IncludeKeyword,
        KeywordFrequency,
        NumParagraphs,
        NumWords,
        NumSentences,
        AllUppercase,
        AllLowercase,
        EndPhrase,
        WordAtPosition,
        WordOrder,
    )
}

CONSTRAINT_TYPE_NAMES: tuple[str, ...] = tuple(CONSTRAINT_CLASSES)


def validate_constraint(constraint: HardConstraint) -> None:
    """Raise InvalidConstraint unless every field invariant holds."""
    name = getattr(type(constraint), "type_name", None)
    if name not in CONSTRAINT_CLASSES or not isinstance(constraint, CONSTRAINT_CLASSES[name]):
        raise InvalidConstraint(f"not a hard constraint: {constraint!r}")

    if isinstance(constraint, IncludeKeyword):
        if not _nonblank(constraint.keyword):
            raise InvalidConstraint("include_keyword: keyword must contain a non-whitespace character")
    elif isinstance(constraint, KeywordFrequency):
        if not _nonblank(constraint.word):
            raise InvalidConstraint("keyword_frequency: word must contain a non-whitespace character")
        if not isinstance(constraint.n, int) or constraint.n < 0:
            raise InvalidConstraint("keyword_frequency: n must be an integer >= 0")
    elif isinstance(constraint, NumParagraphs):
        if not isinstance(constraint.n, int) or constraint.n < 1:
            raise InvalidConstraint("num_paragraphs: n must be an integer >= 1")
    elif isinstance(constraint, (NumWords, NumSentences)):
        if not isinstance(constraint.relation, Relation):
            raise InvalidConstraint(f"{constraint.type_name}: relation must be a Relation")
        if not isinstance(constraint.n, int) or constraint.n < 1:
            raise InvalidConstraint(f"{constraint.type_name}: n must be an integer >= 1")
    elif isinstance(constraint, EndPhrase):
        if not _nonblank(constraint.phrase):
            raise InvalidConstraint("end_phrase: phrase must contain a non-whitespace character")
    elif isinstance(constraint, WordAtPosition):
        if not isinstance(constraint.k, int) or not 1 <= constraint.k <= MAX_WORD_POSITION:
            raise InvalidConstraint(f"word_at_position: k must be in [1, {MAX_WORD_POSITION}]")
        if not _nonblank(constraint.word):
            raise InvalidConstraint("word_at_position: word must contain a non-whitespace character")
    elif isinstance(constraint, WordOrder):
        if not _nonblank(constraint.first):
            raise InvalidConstraint("word_order: first must contain a non-whitespace character")
        if not _nonblank(constraint.second):
            raise InvalidConstraint("word_order: second must contain a non-whitespace character")


def constraint_to_dict(constraint: HardConstraint) -> dict[str, Any]:
    """Serialize to the wire form {"type": <snake_case name>, ...fields}."""
    record: dict[str, Any] = {"type": constraint.type_name}
    for f in fields(constraint):
        value = getattr(constraint, f.name)
        record[f.name] = value.value if isinstance(value, Relation) else value
    return record


def constraint_from_dict(record: dict[str, Any], strict: bool = True) -> HardConstraint:
    """Parse the wire form back into a validated constraint.

    Unknown fields raise SchemaError in strict mode and are ignored otherwise.
    """
    if not isinstance(record, dict):
        raise SchemaError(f"constraint record must be an object, got {type(record).__name__}")
    type_name = record.get("type")
    cls = CONSTRAINT_CLASSES.get(type_name)
    if cls is None:
        raise SchemaError(f"unknown constraint type: {type_name!r}")
    field_names = {f.name for f in fields(cls)}
    extra = set(record) - field_names - {"type"}
    if extra and strict:
        raise SchemaError(f"unknown constraint fields for {type_name}: {sorted(extra)}")
    kwargs: dict[str, Any] = {}
    for f in fields(cls):
        if f.name not in record:
            raise SchemaError(f"constraint {type_name} is missing field {f.name!r}")
        value = record[f.name]
        if f.name == "relation":
            try:
                value = Relation(value)
            except ValueError:
                raise SchemaError(f"invalid relation: {value!r}") from None
        kwargs[f.name] = value
    constraint = cls(**kwargs)
    validate_constraint(constraint)
    return constraint


@dataclass(frozen=True)
class Attribute:
    """A single control condition: soft free text or a hard constraint.

    Ids are caller-supplied; the library never invents identity, which keeps
    dataset joins deterministic.
    """

    id: str
    text: str | None = None
    constraint: HardConstraint | None = None
    source_doc: str | None = None
    domain: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise SchemaError("attribute id must be a nonempty string")
        if (self.text is None) == (self.constraint is None):
            raise SchemaError(f"attribute {self.id!r} must be exactly one of soft or hard")
        if self.text is not None and not _nonblank(self.text):
            raise SchemaError(f"soft attribute {self.id!r} has blank text")
        if self.constraint is not None:
            validate_constraint(self.constraint)

    @classmethod
    def soft(cls, attr_id: str, text: str, source_doc: str | None = None,
             domain: str | None = None) -> "Attribute":
        return cls(id=attr_id, text=text, source_doc=source_doc, domain=domain)

    @classmethod
    def hard(cls, attr_id: str, constraint: HardConstraint, source_doc: str | None = None,
             domain: str | None = None) -> "Attribute":
        return cls(id=attr_id, constraint=constraint, source_doc=source_doc, domain=domain)

    @property
    def is_soft(self) -> bool:
        return self.text is not None

    @property
    def is_hard(self) -> bool:
        return self.constraint is not None

    @property
    def kind(self) -> str:
        return "soft" if self.is_soft else "hard"


_ATTRIBUTE_FIELDS = {"id", "kind", "text", "constraint", "source_doc", "domain"}


def attribute_to_dict(attribute: Attribute) -> dict[str, Any]:
    """Serialize to the JSONL record schema. Optional fields are omitted when absent."""
    record: dict[str, Any] = {"id": attribute.id, "kind": attribute.kind}
    if attribute.is_soft:
        record["text"] = attribute.text
    else:
        record["constraint"] = constraint_to_dict(attribute.constraint)
    if attribute.source_doc is not None:
        record["source_doc"] = attribute.source_doc
    if attribute.domain is not None:
        record["domain"] = attribute.domain
    return record


def attribute_from_dict(record: dict[str, Any], strict: bool = True) -> Attribute:
    """Parse one JSONL attribute record.

    Unknown fields raise SchemaError in strict mode and are ignored in
    lenient mode.
    """
    if not isinstance(record, dict):
        raise SchemaError(f"attribute record must be an object, got {type(record).__name__}")
    extra = set(record) - _ATTRIBUTE_FIELDS
    if extra and strict:
        raise SchemaError(f"unknown attribute fields: {sorted(extra)}")
    kind = record.get("kind")
    if kind not in ("soft", "hard"):
        raise SchemaError(f"attribute kind must be 'soft' or 'hard', got {kind!r}")
    attr_id = record.get("id")
    if kind == "soft":
        if "text" not in record:
            raise SchemaError(f"soft attribute {attr_id!r} is missing 'text'")
        if "constraint" in record:
            raise SchemaError(f"soft attribute {attr_id!r} must not carry a constraint")
        return Attribute(
            id=attr_id,
            text=record["text"],
            source_doc=record.get("source_doc"),
            domain=record.get("domain"),
        )
    if "constraint" not in record:
        raise SchemaError(f"hard attribute {attr_id!r} is missing 'constraint'")
    if "text" in record:
        raise SchemaError(f"hard attribute {attr_id!r} must not carry text")
    return Attribute(
        id=attr_id,
        constraint=constraint_from_dict(record["constraint"], strict=strict),
        source_doc=record.get("source_doc"),
        domain=record.get("domain"),
    )


@dataclass(frozen=True)
class AttributeSet:
    """An ordered collection of attributes forming one generation instruction.

    Order is significant: it determines prompt position and survives
    serialization.
    """

    id: str
    attributes: tuple[Attribute, ...]
    target_size: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.attributes, tuple):
            object.__setattr__(self, "attributes", tuple(self.attributes))
        seen: set[str] = set()
        for attribute in self.attributes:
            if attribute.id in seen:
                raise SchemaError(f"duplicate attribute id in set {self.id!r}: {attribute.id!r}")
            seen.add(attribute.id)

    def __len__(self) -> int:
        return len(self.attributes)

    @property
    def hard_attributes(self) -> tuple[Attribute, ...]:
        return tuple(a for a in self.attributes if a.is_hard)

    @property
    def soft_attributes(self) -> tuple[Attribute, ...]:
        return tuple(a for a in self.attributes if a.is_soft)


def attribute_set_to_dict(attr_set: AttributeSet) -> dict[str, Any]:
    record: dict[str, Any] = {
        "id": attr_set.id,
        "attributes": [attribute_to_dict(a) for a in attr_set.attributes],
    }
    if attr_set.target_size is not None:
        record["target_size"] = attr_set.target_size
    return record


def attribute_set_from_dict(record: dict[str, Any], strict: bool = True) -> AttributeSet:
    if not isinstance(record, dict):
        raise SchemaError(f"set record must be an object, got {type(record).__name__}")
    extra = set(record) - {"id", "attributes", "target_size"}
    if extra and strict:
        raise SchemaError(f"unknown set fields: {sorted(extra)}")
    attributes = record.get("attributes")
    if not isinstance(attributes, list):
        raise SchemaError("set record needs an 'attributes' list")
    return AttributeSet(
        id=record.get("id"),
        attributes=tuple(attribute_from_dict(a, strict=strict) for a in attributes),
        target_size=record.get("target_size"),
    )


@dataclass(frozen=True)
class VerificationResult:
    """Outcome of checking one constraint: satisfied flag plus an explanation."""

    attribute_id: str
    satisfied: bool
    detail: str

    def __post_init__(self) -> None:
        if not self.satisfied and not self.detail:
            raise SchemaError("unsatisfied results must carry a nonempty detail")

    def to_dict(self) -> dict[str, Any]:
        return {"attribute_id": self.attribute_id, "satisfied": self.satisfied, "detail": self.detail}


Score = Union[Fraction, float]

SCORE_TOLERANCE = 1e-12


def _score_value(value: Score) -> float:
    return float(value)


def _check_unit_interval(name: str, value: Score) -> None:
    if not 0 <= _score_value(value) <= 1:
        raise OutOfRange(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class ScoredResponse:
    """A candidate text with per-constraint results and aggregate scores.

    combined_score is always the arithmetic mean of soft and hard scores.
    """

    text: str
    hard_results: tuple[VerificationResult, ...]
    soft_results: tuple[VerificationResult, ...]
    soft_score: Score
    hard_score: Score
    combined_score: Score

    def __post_init__(self) -> None:
        if not isinstance(self.hard_results, tuple):
            object.__setattr__(self, "hard_results", tuple(self.hard_results))
        if not isinstance(self.soft_results, tuple):
            object.__setattr__(self, "soft_results", tuple(self.soft_results))
        for name in ("soft_score", "hard_score", "combined_score"):
            _check_unit_interval(name, getattr(self, name))
        expected = (self.soft_score + self.hard_score) / 2
        if isinstance(expected, Rational) and isinstance(self.combined_score, Rational):
            ok = expected == self.combined_score
        else:
            ok = abs(float(expected) - float(self.combined_score)) <= SCORE_TOLERANCE
        if not ok:
            raise SchemaError(
                f"combined_score {self.combined_score} != (soft + hard) / 2 = {expected}"
            )
        if self.soft_results:
            soft_mean = Fraction(sum(1 for r in self.soft_results if r.satisfied), len(self.soft_results))
            if isinstance(self.soft_score, Rational):
                ok = soft_mean == self.soft_score
            else:
                ok = abs(float(soft_mean) - float(self.soft_score)) <= SCORE_TOLERANCE
            if not ok:
                raise SchemaError(f"soft_score {self.soft_score} != mean of soft results {soft_mean}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "hard_results": [r.to_dict() for r in self.hard_results],
            "soft_results": [r.to_dict() for r in self.soft_results],
            "soft_score": _score_value(self.soft_score),
            "hard_score": _score_value(self.hard_score),
            "combined_score": _score_value(self.combined_score),
        }
