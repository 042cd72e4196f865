"""Shared fixtures: random case generators for the oracle suite and a local
HTTP stub standing in for the generation/judge/embedding endpoints."""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

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

VOCAB = [
    "apple", "tide", "banana", "cat", "dog", "the", "zebra", "echo", "fox",
    "moon", "star", "river", "stone", "cloud", "grove", "amber", "quartz",
    "naïve", "café", "über", "Ångström", "漢字", "привет", "a", "it", "of",
    "chain", "thought", "formal", "tone",
]

_WORD_SUFFIXES = ["", "", "", "", ".", ",", "!", "?", ";", ":", "...", ".)", '."']
_WORD_PREFIXES = ["", "", "", "", "(", '"', "'", "¿"]
_SEPARATORS = [" "] * 14 + ["  ", "\t", "\n", "\n", "\n\n", "\n\n\n", " \n ", "\xa0"]


def random_text(rng: random.Random, max_words: int = 50) -> str:
    """A small noisy document: mixed case, punctuation, blank lines."""
    n = rng.randint(0, max_words)
    pieces: list[str] = []
    for i in range(n):
        word = rng.choice(VOCAB)
        roll = rng.random()
        if roll < 0.15:
            word = word.upper()
        elif roll < 0.35:
            word = word.capitalize()
        word = rng.choice(_WORD_PREFIXES) + word + rng.choice(_WORD_SUFFIXES)
        pieces.append(word)
        if i < n - 1:
            pieces.append(rng.choice(_SEPARATORS))
    if rng.random() < 0.25:
        pieces.append(rng.choice([" ", "\n", "\n\n", "\t "]))
    if rng.random() < 0.1:
        pieces.insert(0, rng.choice([" ", "\n\n"]))
    return "".join(pieces)


def _pick_word(rng: random.Random, text: str) -> str:
    words = text.split()
    if words and rng.random() < 0.6:
        return rng.choice(words)
    return rng.choice(VOCAB)


def random_constraint(variant: str, rng: random.Random, text: str):
    """A constraint of the given variant that sometimes holds on `text`."""
    words = text.split()
    if variant == "include_keyword":
        if words and rng.random() < 0.2:
            start = rng.randrange(len(words))
            span = min(len(words) - start, rng.randint(2, 3))
            return IncludeKeyword(keyword=" ".join(words[start : start + span]))
        return IncludeKeyword(keyword=_pick_word(rng, text))
    if variant == "keyword_frequency":
        return KeywordFrequency(word=_pick_word(rng, text), n=rng.randint(0, 4))
    if variant == "num_paragraphs":
        return NumParagraphs(n=rng.randint(1, 6))
    if variant == "num_words":
        base = len(words)
        n = rng.choice([max(1, base), max(1, base + rng.randint(-12, 12)), rng.randint(1, 60)])
        return NumWords(relation=rng.choice(list(Relation)), n=n)
    if variant == "num_sentences":
        n = rng.choice([rng.randint(1, 12), rng.randint(1, 4)])
        return NumSentences(relation=rng.choice(list(Relation)), n=n)
    if variant == "all_uppercase":
        return AllUppercase()
    if variant == "all_lowercase":
        return AllLowercase()
    if variant == "end_phrase":
        trimmed = text.rstrip()
        if trimmed and rng.random() < 0.55:
            start = rng.randrange(len(trimmed))
            phrase = trimmed[start:]
            if phrase.strip():
                return EndPhrase(phrase=phrase)
        return EndPhrase(phrase=rng.choice(VOCAB) + rng.choice(["", ".", "!"]))
    if variant == "word_at_position":
        k = rng.randint(1, 5)
        if len(words) >= k and rng.random() < 0.6:
            return WordAtPosition(k=k, word=words[k - 1])
        return WordAtPosition(k=k, word=_pick_word(rng, text))
    if variant == "word_order":
        return WordOrder(first=_pick_word(rng, text), second=_pick_word(rng, text))
    raise ValueError(f"unknown variant {variant!r}")


# --- HTTP stub -------------------------------------------------------------


def _stable_int(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


_NUM_SCORES = re.compile(r"Provide exactly (\d+) scores")


class StubState:
    """Behavior knobs plus call accounting, shared with the handler."""

    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.chat_calls = 0
        self.embed_calls = 0
        self.generation_counter: dict[int, int] = {}
        self.fail_next_statuses: list[int] = []
        self.chat_override = None  # optional fn(prompt, state) -> str
        self.embed_override = None  # optional fn(texts) -> vectors

    def next_generation_index(self, prompt: str) -> int:
        key = _stable_int(prompt)
        with self.lock:
            index = self.generation_counter.get(key, 0)
            self.generation_counter[key] = index + 1
        return index


def default_chat_reply(prompt: str, state: StubState) -> str:
    """Deterministic replies for the three prompt families."""
    if prompt.startswith("You are a binary evaluator"):
        match = _NUM_SCORES.search(prompt)
        count = int(match.group(1)) if match else 1
        seed = _stable_int(prompt)
        return "\n".join(
            f"Score: {1 if (seed >> i) & 1 else 0}" for i in range(count)
        )
    if prompt.startswith("### Requirements"):
        seed = _stable_int(prompt) % 100000
        return "\n".join(f"- distinctive feature {seed}-{i} in plain prose" for i in range(5))
    index = state.next_generation_index(prompt)
    rng = random.Random(_stable_int(prompt) + index * 7919)
    words = [rng.choice(VOCAB).lower() for _ in range(rng.randint(20, 60))]
    sentences = []
    while words:
        cut = rng.randint(4, 8)
        take, words = words[:cut], words[cut:]
        sentences.append(" ".join(take) + ".")
    return f"candidate {index}: " + " ".join(sentences)


class _StubHandler(BaseHTTPRequestHandler):
    def log_message(self, *args) -> None:
        pass

    def _reply(self, status: int, body: dict) -> None:
        payload = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_POST(self) -> None:
        state: StubState = self.server.state  # type: ignore[attr-defined]
        length = int(self.headers.get("Content-Length", 0))
        data = json.loads(self.rfile.read(length) or b"{}")

        with state.lock:
            forced = state.fail_next_statuses.pop(0) if state.fail_next_statuses else None
        if forced is not None:
            self._reply(forced, {"error": "injected failure"})
            return

        if self.path.endswith("/chat/completions"):
            with state.lock:
                state.chat_calls += 1
            prompt = data["messages"][0]["content"]
            replier = state.chat_override or default_chat_reply
            content = replier(prompt, state)
            self._reply(200, {"choices": [{"message": {"content": content}}]})
            return
        if self.path.endswith("/embed"):
            with state.lock:
                state.embed_calls += 1
            texts = data.get("texts", [])
            if state.embed_override is not None:
                self._reply(200, {"vectors": state.embed_override(texts)})
                return
            vectors = []
            for text in texts:
                rng = random.Random(_stable_int(text))
                vectors.append([round(rng.uniform(-1, 1), 6) for _ in range(16)])
            self._reply(200, {"vectors": vectors})
            return
        self._reply(404, {"error": f"no route {self.path}"})


class StubServer:
    def __init__(self) -> None:
        self.state = StubState()
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self.httpd.state = self.state  # type: ignore[attr-defined]
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StubServer":
        self.thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture()
def stub_server():
    server = StubServer().start()
    yield server
    server.stop()
