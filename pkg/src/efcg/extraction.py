"""Attribute extraction: decomposition-reply parsing and hard-constraint mining.

Hard constraints are instantiated from measurements of the source text, so
the text satisfies every emitted constraint by construction. Candidate
selection (which keywords, which positions) is driven by a seeded RNG and is
reproducible for a given seed.
"""

from __future__ import annotations

import random
import re
from typing import Sequence

from .errors import EmptyText, NoAttributesFound
from .types import (
    AllLowercase,
    AllUppercase,
    Attribute,
    CONSTRAINT_TYPE_NAMES,
    EndPhrase,
    HardConstraint,
    IncludeKeyword,
    KeywordFrequency,
    MAX_WORD_POSITION,
    NumParagraphs,
    NumSentences,
    NumWords,
    Relation,
    WordAtPosition,
    WordOrder,
)
from .verifier import tokenize

# Function words excluded from keyword candidates; override per call if needed.
DEFAULT_STOPWORDS = frozenset(
    """
    a about above after again all also am an and any are as at be because been
    before being below between both but by could did do does doing down during
    each few for from further had has have having he her here hers him his how
    i if in into is it its just me more most my no nor not now of off on once
    only or other our ours out over own same she should so some such than that
    the their theirs them then there these they this those through to too under
    until up very was we were what when where which while who whom why will
    with would you your yours
    """.split()
)

MIN_KEYWORD_LENGTH = 4

_LIST_MARKER = re.compile(r"^\s*(?:[-*•]\s+|\d+[.)]\s+)")


def parse_decomposed_attributes(reply: str, id_prefix: str = "soft") -> list[Attribute]:
    """Turn a decomposition reply into soft attributes, one per non-blank line.

    List markers ("- ", "* ", "1. ") are stripped; duplicate lines are
    dropped keeping the first occurrence. Ids are deterministic:
    "{id_prefix}-000", "{id_prefix}-001", ... in reply order.
    """
    texts: list[str] = []
    seen: set[str] = set()
    for line in reply.splitlines():
        cleaned = _LIST_MARKER.sub("", line).strip()
        if not cleaned or cleaned in seen:
            continue
        seen.add(cleaned)
        texts.append(cleaned)
    if not texts:
        raise NoAttributesFound("decomposition reply had no non-blank attribute lines")
    return [
        Attribute.soft(f"{id_prefix}-{i:03d}", text) for i, text in enumerate(texts)
    ]


def _keyword_candidates(norms: Sequence[str], stopwords: frozenset[str]) -> list[str]:
    """Unique content words in first-occurrence order."""
    seen: set[str] = set()
    out: list[str] = []
    for norm in norms:
        if len(norm) < MIN_KEYWORD_LENGTH or norm in stopwords or norm in seen:
            continue
        seen.add(norm)
        out.append(norm)
    return out


def extract_hard_attributes(
    text: str,
    catalog: Sequence[str] | None = None,
    count: int = 38,
    rng_seed: int = 0,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
) -> list[HardConstraint]:
    """Mine up to `count` hard constraints that the text itself satisfies.

    Structural constraints (paragraph/word/sentence counts, case, end
    phrase) are measured directly; keyword and position constraints are
    sampled from eligible candidates with the seeded RNG. Returns fewer than
    `count` when the text does not offer enough distinct candidates.
    """
    if not text or not text.strip():
        raise EmptyText("cannot extract constraints from empty text")
    wanted = set(catalog) if catalog is not None else set(CONSTRAINT_TYPE_NAMES)
    unknown = wanted - set(CONSTRAINT_TYPE_NAMES)
    if unknown:
        raise ValueError(f"unknown constraint types in catalog: {sorted(unknown)}")

    tok = tokenize(text)
    rng = random.Random(rng_seed)
    candidates: list[HardConstraint] = []

    if "num_paragraphs" in wanted and tok.paragraphs:
        candidates.append(NumParagraphs(n=len(tok.paragraphs)))
    if "num_words" in wanted and tok.n_words >= 1:
        candidates.append(NumWords(relation=Relation.AROUND, n=tok.n_words))
    if "num_sentences" in wanted and tok.sentences:
        candidates.append(NumSentences(relation=Relation.AROUND, n=len(tok.sentences)))
    if "all_uppercase" in wanted and tok.n_uppercase > 0 and tok.n_lowercase == 0:
        candidates.append(AllUppercase())
    if "all_lowercase" in wanted and tok.n_lowercase > 0 and tok.n_uppercase == 0:
        candidates.append(AllLowercase())
    if "end_phrase" in wanted and tok.sentences:
        phrase = tok.sentences[-1].strip()
        if phrase:
            candidates.append(EndPhrase(phrase=phrase))

    content_words = _keyword_candidates(tok.norms, stopwords)
    if "include_keyword" in wanted:
        candidates.extend(IncludeKeyword(keyword=w) for w in content_words)
    if "keyword_frequency" in wanted:
        candidates.extend(
            KeywordFrequency(word=w, n=tok.norms.count(w)) for w in content_words
        )
    if "word_at_position" in wanted:
        for k in range(1, min(MAX_WORD_POSITION, tok.n_words) + 1):
            if tok.norms[k - 1]:
                candidates.append(WordAtPosition(k=k, word=tok.norms[k - 1]))
    if "word_order" in wanted:
        first_seen: dict[str, int] = {}
        for index, norm in enumerate(tok.norms):
            if norm and norm not in first_seen:
                first_seen[norm] = index
        ordered = sorted(first_seen, key=first_seen.get)
        if len(ordered) >= 2:
            pair_budget = max(count, 8)
            pairs: set[tuple[str, str]] = set()
            for _ in range(pair_budget * 4):
                if len(pairs) >= pair_budget:
                    break
                a, b = rng.sample(range(len(ordered)), 2)
                if a > b:
                    a, b = b, a
                pairs.add((ordered[a], ordered[b]))
            candidates.extend(
                WordOrder(first=f, second=s) for f, s in sorted(pairs)
            )

    if count >= len(candidates):
        selected = list(candidates)
        rng.shuffle(selected)
        return selected
    return rng.sample(candidates, count)
