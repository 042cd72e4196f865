"""Independent naive re-implementations used as test oracles.

Everything here follows the documented rules but is written from scratch
with character-by-character scans and full sorts, deliberately sharing no
code with the package under test.
"""

from __future__ import annotations

import math
import unicodedata
from fractions import Fraction

from efcg.types import (
    AllLowercase,
    AllUppercase,
    EndPhrase,
    IncludeKeyword,
    KeywordFrequency,
    NumParagraphs,
    NumSentences,
    NumWords,
    Relation,
    WordAtPosition,
    WordOrder,
)


def naive_words(text):
    words = []
    current = []
    for ch in text:
        if ch.isspace():
            if current:
                words.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        words.append("".join(current))
    return words


def naive_normalize(token):
    chars = list(token)
    while chars and unicodedata.category(chars[0]).startswith("P"):
        chars.pop(0)
    while chars and unicodedata.category(chars[-1]).startswith("P"):
        chars.pop()
    return "".join(chars).lower()


def naive_paragraphs(text):
    segments = []
    current = []
    i = 0
    n = len(text)
    while i < n:
        if text[i] == "\n":
            run = 0
            while i < n and text[i] == "\n":
                run += 1
                i += 1
            if run >= 2:
                segments.append("".join(current))
                current = []
            else:
                current.append("\n" * run)
        else:
            current.append(text[i])
            i += 1
    segments.append("".join(current))
    return [s for s in segments if s.strip() != ""]


def naive_sentences(text):
    segments = []
    current = []
    n = len(text)
    for i, ch in enumerate(text):
        current.append(ch)
        if ch in ".!?" and (i + 1 == n or text[i + 1].isspace()):
            segments.append("".join(current))
            current = []
    if current:
        segments.append("".join(current))
    return [s for s in segments if s.strip() != ""]


def naive_case_counts(text):
    upper = 0
    lower = 0
    for ch in text:
        if ch.isupper():
            upper += 1
        if ch.islower():
            lower += 1
    return upper, lower


def _sequence_matches(norms, sequence):
    positions = []
    for start in range(len(norms)):
        if start + len(sequence) > len(norms):
            break
        window = norms[start : start + len(sequence)]
        if window == sequence:
            positions.append(start)
    return positions


def _keyword_count(text, phrase):
    norms = [naive_normalize(w) for w in naive_words(text)]
    sequence = [naive_normalize(t) for t in naive_words(phrase)]
    if not sequence or any(t == "" for t in sequence):
        return 0
    return len(_sequence_matches(norms, sequence))


def naive_around_tolerance(n):
    return max(1, math.floor(n / 10 + 0.5))


def _naive_relation(relation, count, n):
    if relation is Relation.AT_LEAST:
        return count >= n
    if relation is Relation.AT_MOST:
        return count <= n
    tol = naive_around_tolerance(n)
    return n - tol <= count <= n + tol


def naive_verify(constraint, text):
    """Naive satisfied/unsatisfied decision for any constraint variant."""
    if isinstance(constraint, IncludeKeyword):
        return _keyword_count(text, constraint.keyword) >= 1

    if isinstance(constraint, KeywordFrequency):
        return _keyword_count(text, constraint.word) == constraint.n

    if isinstance(constraint, NumParagraphs):
        return len(naive_paragraphs(text)) == constraint.n

    if isinstance(constraint, NumWords):
        return _naive_relation(constraint.relation, len(naive_words(text)), constraint.n)

    if isinstance(constraint, NumSentences):
        return _naive_relation(constraint.relation, len(naive_sentences(text)), constraint.n)

    if isinstance(constraint, AllUppercase):
        upper, lower = naive_case_counts(text)
        return upper > 0 and lower == 0

    if isinstance(constraint, AllLowercase):
        upper, lower = naive_case_counts(text)
        return lower > 0 and upper == 0

    if isinstance(constraint, EndPhrase):
        end = len(text)
        while end > 0 and text[end - 1].isspace():
            end -= 1
        trimmed = text[:end]
        phrase = constraint.phrase
        if len(trimmed) < len(phrase):
            return False
        return trimmed[len(trimmed) - len(phrase) :] == phrase

    if isinstance(constraint, WordAtPosition):
        words = naive_words(text)
        target = naive_normalize(constraint.word)
        if target == "" or constraint.k > len(words):
            return False
        return naive_normalize(words[constraint.k - 1]) == target

    if isinstance(constraint, WordOrder):
        norms = [naive_normalize(w) for w in naive_words(text)]
        first = naive_normalize(constraint.first)
        second = naive_normalize(constraint.second)
        if first == "" or second == "":
            return False
        first_positions = [i for i, n in enumerate(norms) if n == first]
        second_positions = [i for i, n in enumerate(norms) if n == second]
        if not first_positions or not second_positions:
            return False
        return min(first_positions) < min(second_positions)

    raise AssertionError(f"no naive rule for {constraint!r}")


def naive_cosine(u, v):
    dot = math.fsum(a * b for a, b in zip(u, v))
    norm_u = math.sqrt(math.fsum(a * a for a in u))
    norm_v = math.sqrt(math.fsum(b * b for b in v))
    return dot / (norm_u * norm_v)


def naive_top_k(vectors, query_id, k):
    """Full sort of every other id by (similarity desc, id asc)."""
    query = vectors[query_id]
    scored = [
        (other_id, naive_cosine(query, vector))
        for other_id, vector in vectors.items()
        if other_id != query_id
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


def naive_greedy_expand(
    seed_id,
    semantic,
    correlation,
    retrieval_k,
    threshold,
    target_size,
    seed_only=False,
):
    """Re-execute the greedy admission rule with naive similarity math."""
    candidates = naive_top_k(correlation, seed_id, retrieval_k)
    members = [seed_id]
    rejected = 0
    for candidate_id, _ in candidates:
        if len(members) >= target_size:
            break
        if candidate_id not in semantic:
            continue
        against = members[:1] if seed_only else members
        if any(
            naive_cosine(semantic[candidate_id], semantic[m]) >= threshold
            for m in against
        ):
            rejected += 1
            continue
        members.append(candidate_id)
    return members, rejected


def naive_csr(flags_per_instruction):
    total = Fraction(0)
    for flags in flags_per_instruction:
        total += Fraction(sum(1 for f in flags if f), len(flags))
    return total / len(flags_per_instruction)


def naive_kappa(pairs):
    n = len(pairs)
    agree = sum(1 for a, b in pairs if bool(a) == bool(b))
    a_yes = sum(1 for a, _ in pairs if a)
    b_yes = sum(1 for _, b in pairs if b)
    p_o = Fraction(agree, n)
    p_e = Fraction(a_yes, n) * Fraction(b_yes, n) + Fraction(n - a_yes, n) * Fraction(n - b_yes, n)
    if p_e == 1:
        return Fraction(1)
    return (p_o - p_e) / (1 - p_e)
