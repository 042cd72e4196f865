"""Deterministic verification of hard constraints against response text.

Tokenization rules (fixed, documented, and shared by every check):

* words are maximal runs of non-whitespace, split on Unicode whitespace;
  each word also has a normalized form: lowercased with leading and
  trailing Unicode punctuation stripped
* paragraphs are segments split on two or more consecutive newlines;
  blank segments are dropped
* sentences are segments terminated by '.', '!' or '?' followed by
  whitespace or end of text; a segment counts if it contains any
  non-whitespace character, and so does a trailing unterminated segment

Keyword matching is whole-word and case-insensitive (no substrings, no
stemming). Sentence splitting has no abbreviation handling; hyphenated
compounds count as one whitespace token. Both are known approximations.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import NoHardConstraints
from .types import (
    AllLowercase,
    AllUppercase,
    Attribute,
    AttributeSet,
    EndPhrase,
    HardConstraint,
    IncludeKeyword,
    KeywordFrequency,
    NumParagraphs,
    NumSentences,
    NumWords,
    Relation,
    VerificationResult,
    WordAtPosition,
    WordOrder,
    validate_constraint,
)

def default_around_tolerance(n: int) -> int:
    """Window half-width for 'around N': 10% of n, round half up, at least 1."""
    return max(1, (n + 5) // 10)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def normalize_word(token: str) -> str:
    """Lowercase and strip leading/trailing Unicode punctuation."""
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end].lower()


_PARAGRAPH_SEPARATOR = re.compile(r"\n{2,}")
_SENTENCE_TERMINATOR = re.compile(r"[.!?](?=\s|\Z)")


def _split_paragraphs(text: str) -> list[str]:
    return [seg for seg in _PARAGRAPH_SEPARATOR.split(text) if seg.strip()]


def _split_sentences(text: str) -> list[str]:
    segments = []
    start = 0
    for match in _SENTENCE_TERMINATOR.finditer(text):
        segments.append(text[start : match.end()])
        start = match.end()
    segments.append(text[start:])
    return [seg for seg in segments if seg.strip()]


@dataclass(frozen=True)
class TokenizedText:
    """Pure, cached decomposition of a text under the documented rules."""

    raw: str
    words: tuple[str, ...]
    norms: tuple[str, ...]
    sentences: tuple[str, ...]
    paragraphs: tuple[str, ...]
    n_uppercase: int
    n_lowercase: int

    @property
    def n_words(self) -> int:
        return len(self.words)


def tokenize(text: str) -> TokenizedText:
    """Decompose text into words, sentences, paragraphs and case counts."""
    words = tuple(text.split())
    return TokenizedText(
        raw=text,
        words=words,
        norms=tuple(normalize_word(w) for w in words),
        sentences=tuple(_split_sentences(text)),
        paragraphs=tuple(_split_paragraphs(text)),
        n_uppercase=sum(1 for ch in text if ch.isupper()),
        n_lowercase=sum(1 for ch in text if ch.islower()),
    )


def _keyword_sequence(phrase: str) -> tuple[str, ...]:
    """Normalized word sequence for a keyword; empty tokens make it unmatchable."""
    tokens = tuple(normalize_word(t) for t in phrase.split())
    if not tokens or any(not t for t in tokens):
        return ()
    return tokens


def _count_occurrences(norms: tuple[str, ...], sequence: tuple[str, ...]) -> int:
    if not sequence or len(sequence) > len(norms):
        return 0
    if len(sequence) == 1:
        return norms.count(sequence[0])
    span = len(sequence)
    return sum(1 for i in range(len(norms) - span + 1) if norms[i : i + span] == sequence)


def _relation_holds(relation: Relation, count: int, n: int, tolerance: Callable[[int], int]) -> tuple[bool, str]:
    if relation is Relation.AT_LEAST:
        return count >= n, f"required at least {n}"
    if relation is Relation.AT_MOST:
        return count <= n, f"required at most {n}"
    tol = tolerance(n)
    return abs(count - n) <= tol, f"required around {n} (tolerance {tol})"


def _verify_tokenized(
    constraint: HardConstraint,
    tok: TokenizedText,
    attribute_id: str,
    tolerance: Callable[[int], int],
) -> VerificationResult:
    if isinstance(constraint, IncludeKeyword):
        sequence = _keyword_sequence(constraint.keyword)
        count = _count_occurrences(tok.norms, sequence)
        detail = (
            f"keyword {constraint.keyword!r} occurs {count} time(s) "
            f"among {tok.n_words} word(s)"
        )
        return VerificationResult(attribute_id, count >= 1, detail)

    if isinstance(constraint, KeywordFrequency):
        sequence = _keyword_sequence(constraint.word)
        count = _count_occurrences(tok.norms, sequence)
        detail = f"word {constraint.word!r} appears {count} time(s); required exactly {constraint.n}"
        return VerificationResult(attribute_id, count == constraint.n, detail)

    if isinstance(constraint, NumParagraphs):
        count = len(tok.paragraphs)
        detail = f"found {count} paragraph(s); required exactly {constraint.n}"
        return VerificationResult(attribute_id, count == constraint.n, detail)

    if isinstance(constraint, NumWords):
        count = tok.n_words
        ok, requirement = _relation_holds(constraint.relation, count, constraint.n, tolerance)
        return VerificationResult(attribute_id, ok, f"found {count} word(s); {requirement}")

    if isinstance(constraint, NumSentences):
        count = len(tok.sentences)
        ok, requirement = _relation_holds(constraint.relation, count, constraint.n, tolerance)
        return VerificationResult(attribute_id, ok, f"found {count} sentence(s); {requirement}")

    if isinstance(constraint, AllUppercase):
        ok = tok.n_uppercase > 0 and tok.n_lowercase == 0
        detail = f"found {tok.n_uppercase} uppercase and {tok.n_lowercase} lowercase letter(s)"
        return VerificationResult(attribute_id, ok, detail)

    if isinstance(constraint, AllLowercase):
        ok = tok.n_lowercase > 0 and tok.n_uppercase == 0
        detail = f"found {tok.n_uppercase} uppercase and {tok.n_lowercase} lowercase letter(s)"
        return VerificationResult(attribute_id, ok, detail)

    if isinstance(constraint, EndPhrase):
        trimmed = tok.raw.rstrip()
        ok = trimmed.endswith(constraint.phrase)
        tail = trimmed[-min(len(trimmed), max(len(constraint.phrase), 20)) :]
        detail = f"text ends with {tail!r}; required phrase {constraint.phrase!r}"
        return VerificationResult(attribute_id, ok, detail)

    if isinstance(constraint, WordAtPosition):
        target = normalize_word(constraint.word)
        if constraint.k > tok.n_words:
            detail = f"text has only {tok.n_words} word(s); position {constraint.k} required"
            return VerificationResult(attribute_id, False, detail)
        actual = tok.norms[constraint.k - 1]
        detail = f"word {constraint.k} is {actual!r}; required {target!r}"
        return VerificationResult(attribute_id, bool(target) and actual == target, detail)

    if isinstance(constraint, WordOrder):
        first = normalize_word(constraint.first)
        second = normalize_word(constraint.second)
        first_at = tok.norms.index(first) if first and first in tok.norms else None
        second_at = tok.norms.index(second) if second and second in tok.norms else None
        if first_at is None or second_at is None:
            missing = [w for w, at in ((constraint.first, first_at), (constraint.second, second_at)) if at is None]
            detail = f"word(s) not found: {', '.join(repr(w) for w in missing)}"
            return VerificationResult(attribute_id, False, detail)
        detail = f"{constraint.first!r} first at word {first_at + 1}, {constraint.second!r} first at word {second_at + 1}"
        return VerificationResult(attribute_id, first_at < second_at, detail)

    raise AssertionError(f"unhandled constraint: {constraint!r}")


def verify(
    constraint: HardConstraint,
    text: str,
    attribute_id: str = "",
    around_tolerance: Callable[[int], int] = default_around_tolerance,
) -> VerificationResult:
    """Check one constraint against a text.

    Pure and deterministic: repeated calls agree byte-for-byte. Unsatisfiable
    inputs never raise; they yield satisfied=False with an explanation.
    """
    validate_constraint(constraint)
    return _verify_tokenized(constraint, tokenize(text), attribute_id, around_tolerance)


def verify_all(
    attr_set: AttributeSet,
    text: str,
    around_tolerance: Callable[[int], int] = default_around_tolerance,
) -> list[VerificationResult]:
    """Check every hard attribute of the set, in set order, on one tokenization pass.

    Soft attributes are skipped. Raises NoHardConstraints when the set has none.
    """
    hard: list[Attribute] = [a for a in attr_set.attributes if a.is_hard]
    if not hard:
        raise NoHardConstraints(f"set {attr_set.id!r} has no hard attributes")
    tok = tokenize(text)
    results = []
    for attribute in hard:
        validate_constraint(attribute.constraint)
        results.append(_verify_tokenized(attribute.constraint, tok, attribute.id, around_tolerance))
    return results


def verify_constraints(
    constraints: Iterable[tuple[str, HardConstraint]],
    text: str,
    around_tolerance: Callable[[int], int] = default_around_tolerance,
) -> list[VerificationResult]:
    """Like verify_all but over bare (attribute_id, constraint) pairs."""
    tok = tokenize(text)
    results = []
    for attribute_id, constraint in constraints:
        validate_constraint(constraint)
        results.append(_verify_tokenized(constraint, tok, attribute_id, around_tolerance))
    return results
