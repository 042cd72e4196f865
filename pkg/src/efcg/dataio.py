"""Streaming JSONL serialization for every pipeline artifact.

All files are UTF-8, newline-delimited JSON, no BOM. Readers stream line by
line and report the offending line number on parse errors. Strict mode
rejects unknown fields; lenient mode ignores them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from .embedding import Space, VectorStore
from .errors import SchemaError
from .types import (
    Attribute,
    AttributeSet,
    attribute_from_dict,
    attribute_set_from_dict,
    attribute_set_to_dict,
    attribute_to_dict,
)


class Split(Enum):
    """Which benchmark split a record belongs to."""

    FINEWEB = "fineweb"
    MULTI_SOURCE = "multi_source"


@dataclass(frozen=True)
class BenchRecord:
    """One document's attribute set, with the raw text kept for the FineWeb
    split (reconstruction needs the target)."""

    doc_id: str
    attributes: AttributeSet
    split: Split
    raw_text: str | None = None
    domain: str | None = None

    def __post_init__(self) -> None:
        if self.split is Split.FINEWEB and self.raw_text is None:
            raise SchemaError(f"fineweb record {self.doc_id!r} must carry raw_text")


def bench_record_to_dict(record: BenchRecord) -> dict[str, Any]:
    out: dict[str, Any] = {
        "doc_id": record.doc_id,
        "split": record.split.value,
        "attributes": attribute_set_to_dict(record.attributes),
    }
    if record.raw_text is not None:
        out["raw_text"] = record.raw_text
    if record.domain is not None:
        out["domain"] = record.domain
    return out


def bench_record_from_dict(data: dict[str, Any], strict: bool = True) -> BenchRecord:
    extra = set(data) - {"doc_id", "split", "attributes", "raw_text", "domain"}
    if extra and strict:
        raise SchemaError(f"unknown bench record fields: {sorted(extra)}")
    try:
        split = Split(data.get("split"))
    except ValueError:
        raise SchemaError(f"unknown split: {data.get('split')!r}") from None
    return BenchRecord(
        doc_id=data.get("doc_id"),
        attributes=attribute_set_from_dict(data.get("attributes"), strict=strict),
        split=split,
        raw_text=data.get("raw_text"),
        domain=data.get("domain"),
    )


def read_jsonl(path: str | Path) -> Iterator[tuple[int, Any]]:
    """Yield (line_number, parsed_object) pairs; blank lines are skipped."""
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON: {exc}") from None


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> int:
    """Write records one per line; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def read_attributes(path: str | Path, strict: bool = True) -> list[Attribute]:
    attributes = []
    seen: set[str] = set()
    for lineno, data in read_jsonl(path):
        try:
            attribute = attribute_from_dict(data, strict=strict)
        except SchemaError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from None
        if attribute.id in seen:
            raise SchemaError(f"{path}:{lineno}: duplicate attribute id {attribute.id!r}")
        seen.add(attribute.id)
        attributes.append(attribute)
    return attributes


def write_attributes(path: str | Path, attributes: Iterable[Attribute]) -> int:
    return write_jsonl(path, (attribute_to_dict(a) for a in attributes))


def read_attribute_sets(path: str | Path, strict: bool = True) -> list[AttributeSet]:
    sets = []
    for lineno, data in read_jsonl(path):
        try:
            sets.append(attribute_set_from_dict(data, strict=strict))
        except SchemaError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return sets


def write_attribute_sets(path: str | Path, sets: Iterable[AttributeSet]) -> int:
    return write_jsonl(path, (attribute_set_to_dict(s) for s in sets))


def read_bench_records(path: str | Path, strict: bool = True) -> list[BenchRecord]:
    records = []
    for lineno, data in read_jsonl(path):
        try:
            records.append(bench_record_from_dict(data, strict=strict))
        except SchemaError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return records


def write_bench_records(path: str | Path, records: Iterable[BenchRecord]) -> int:
    return write_jsonl(path, (bench_record_to_dict(r) for r in records))


_VECTOR_FIELDS = {"id", "space", "values"}


def load_vectors(path: str | Path, store: VectorStore | None = None, strict: bool = True) -> VectorStore:
    """Load a vector JSONL file ({"id", "space", "values"}) into a store."""
    store = store if store is not None else VectorStore()
    for lineno, data in read_jsonl(path):
        if not isinstance(data, dict):
            raise SchemaError(f"{path}:{lineno}: vector record must be an object")
        extra = set(data) - _VECTOR_FIELDS
        if extra and strict:
            raise SchemaError(f"{path}:{lineno}: unknown vector fields: {sorted(extra)}")
        try:
            space = Space(data.get("space"))
        except ValueError:
            raise SchemaError(f"{path}:{lineno}: unknown space {data.get('space')!r}") from None
        values = data.get("values")
        if not isinstance(values, list):
            raise SchemaError(f"{path}:{lineno}: 'values' must be a list")
        try:
            store.add(data.get("id"), space, values)
        except SchemaError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return store


def write_vectors(path: str | Path, store: VectorStore) -> int:
    def records() -> Iterator[dict[str, Any]]:
        for space in Space:
            for attr_id in store.ids(space):
                vector = store.get(attr_id, space)
                yield {"id": attr_id, "space": space.value, "values": list(vector.values)}

    return write_jsonl(path, records())


def write_csv(path: str | Path, rows: Sequence[dict[str, Any]]) -> int:
    """Plain delimited output for external plotters; header from row keys."""
    import csv

    if not rows:
        raise SchemaError("no rows to write")
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return len(rows)
