"""Prompt templates for generation, judging, and document decomposition.

Rendering is byte-deterministic: the same inputs always produce the same
prompt. Attribute texts are collapsed to a single line before insertion so
line-oriented reply parsing stays aligned with the attribute count.
"""

from __future__ import annotations

import re
from typing import Sequence

from .errors import CountMismatch, EmptySet, EmptySoftList, EmptyText, MalformedScore
from .types import Attribute, AttributeSet

GENERATION_TEMPLATE = """You are an expert at generating text that matches given attributes. Your task is to generate a text that satisfies as many of the provided attributes as possible.

### Hard Attributes:
{hard_attributes}

### Soft Attributes:
{soft_attributes}"""

JUDGE_TEMPLATE = """You are a binary evaluator. Given a text and several attributes, determine if the text fulfills each attribute.

Your task is simple:
- Score 0 if the text does NOT fulfill the attribute or the attribute is not directly mentioned
- Score 1 if and only if the text directly fulfills the attribute

Text to evaluate:
{text}

Attributes to evaluate:
{attributes}

Provide exactly {num_attributes} scores, one per line, using this format:
Score: 0 or 1

- Scores should correspond to attributes in order
- Only provide the scores, no additional explanation"""

DECOMPOSE_TEMPLATE = """### Requirements
For the following paragraph, propose attributes that capture its overall characteristics. Focus on what makes this text unique and distinctive, rather than using predefined categories. Your analysis should:
- Identify the most prominent and defining features of the text
- Use clear, specific descriptions rather than vague terms
- Base attributes solely on what is explicitly present in the text
- Describe each attribute with enough detail to be meaningful
Avoid:
- Overly broad or generic attributes
- Speculative interpretations
- Attributes not clearly supported by the text
- Complex or academic jargon

Output each attribute on a separate line, separated by a single newline, with no line breaks within each attribute.

Now, analyze the following paragraph and summarize its key attributes:

### Text
{text}

### Attributes
"""

JUDGE_REPAIR_INSTRUCTION = (
    "Your previous reply did not contain the required number of scores. "
    "Reply again with exactly {num_attributes} lines, each of the form "
    '"Score: 0" or "Score: 1", and nothing else.'
)


def _single_line(text: str) -> str:
    return " ".join(text.split())


def render_generation_prompt(attr_set: AttributeSet) -> str:
    """Instantiate the generation template with the set's attributes in order.

    Hard constraints render in their English instruction form; soft
    attributes render as their text, one per line.
    """
    if not attr_set.attributes:
        raise EmptySet(f"set {attr_set.id!r} has no attributes")
    hard_lines = [a.constraint.describe() for a in attr_set.attributes if a.is_hard]
    soft_lines = [_single_line(a.text) for a in attr_set.attributes if a.is_soft]
    return GENERATION_TEMPLATE.format(
        hard_attributes="\n".join(hard_lines),
        soft_attributes="\n".join(soft_lines),
    )


def render_judge_prompt(text: str, soft_attributes: Sequence[Attribute]) -> str:
    """Instantiate the binary-judge template over the soft attributes."""
    if not soft_attributes:
        raise EmptySoftList("judge prompt needs at least one soft attribute")
    if any(not a.is_soft for a in soft_attributes):
        raise EmptySoftList("judge prompt accepts soft attributes only")
    numbered = "\n".join(
        f"{i}. {_single_line(a.text)}" for i, a in enumerate(soft_attributes, start=1)
    )
    return JUDGE_TEMPLATE.format(
        text=text,
        attributes=numbered,
        num_attributes=len(soft_attributes),
    )


_SCORE_LINE = re.compile(r"^\s*score\s*:\s*(\S+)\s*$", re.IGNORECASE)
_BARE_SCORE_LINE = re.compile(r"^\s*([01])\s*$")


def parse_judge_reply(reply: str, expected: int) -> list[bool]:
    """Extract exactly `expected` binary scores from a judge reply.

    Accepts "Score: 0" / "Score: 1" lines and bare "0" / "1" lines, in
    order. Other lines are ignored as judge chatter. Raises MalformedScore
    for a non-binary score line and CountMismatch when the total is off.
    """
    if expected < 1:
        raise CountMismatch("expected score count must be >= 1")
    scores: list[bool] = []
    for line in reply.splitlines():
        match = _SCORE_LINE.match(line)
        if match:
            token = match.group(1)
            if token not in ("0", "1"):
                raise MalformedScore(f"score line is not binary: {line.strip()!r}")
            scores.append(token == "1")
            continue
        match = _BARE_SCORE_LINE.match(line)
        if match:
            scores.append(match.group(1) == "1")
    if len(scores) != expected:
        raise CountMismatch(f"expected {expected} scores, found {len(scores)}")
    return scores


def render_judge_repair_prompt(original_prompt: str, num_attributes: int) -> str:
    """The retry prompt used after a CountMismatch."""
    return (
        original_prompt
        + "\n\n"
        + JUDGE_REPAIR_INSTRUCTION.format(num_attributes=num_attributes)
    )


def render_decompose_prompt(text: str) -> str:
    """Instantiate the attribute-decomposition template for one document."""
    if not text or not text.strip():
        raise EmptyText("decomposition needs a nonempty document")
    return DECOMPOSE_TEMPLATE.format(text=text)
