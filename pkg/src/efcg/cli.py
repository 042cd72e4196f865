"""The efcg command line: extract, verify, score, expand, build-pairs, judge,
eval-position, eval-tradeoff, kappa.

Subcommands compose through files: every stage reads and writes newline-
delimited UTF-8 JSON. Exit codes: 0 success (for verify: all satisfied),
1 unsatisfied constraints or endpoint failure, 2 input/config error.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Sequence

import click

from . import dataio
from .clients import ChatClient, EmbeddingClient
from .config import Config, load_config
from .embedding import Space, VectorStore
from .errors import (
    ClientError,
    EfcgError,
    EmptyInput,
    NoHardConstraints,
    SchemaError,
)
from .expansion import expand_batch
from .extraction import extract_hard_attributes, parse_decomposed_attributes
from .harness import run_position_bias, run_tradeoff
from .pairs import PairResult, build_pairs, judge_with_client
from .prompts import render_decompose_prompt
from .scoring import agreement_rate, cohens_kappa, compute_csr, compute_macro
from .types import (
    Attribute,
    AttributeSet,
    constraint_from_dict,
    CONSTRAINT_CLASSES,
)
from .verifier import verify_all


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn: Callable[[], None]) -> None:
    """Map exceptions to the documented exit codes."""
    try:
        fn()
    except ClientError as exc:
        _fail(str(exc), 1)
    except (EfcgError, OSError, json.JSONDecodeError) as exc:
        _fail(str(exc), 2)


def pipeline_options(command: Callable) -> Callable:
    """The global flags, accepted on the group and on every subcommand."""
    decorators = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="TOML config file."),
        click.option("--lenient", is_flag=True, default=False,
                     help="Ignore unknown fields in input records."),
        click.option("--seed", type=int, default=None, help="RNG seed override."),
        click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
                     help="Output file (default: stdout)."),
        click.option("--max-inflight", type=int, default=None,
                     help="Bound on concurrent endpoint requests."),
    ]
    for decorator in reversed(decorators):
        command = decorator(command)
    return command


class Settings:
    """Group-level flag values merged with subcommand-level overrides."""

    def __init__(self, ctx: click.Context, config_path: str | None, lenient: bool,
                 seed: int | None, out_path: str | None, max_inflight: int | None):
        base = ctx.obj or {}
        self.config_path = config_path or base.get("config_path")
        self.lenient = lenient or bool(base.get("lenient"))
        self.seed = seed if seed is not None else base.get("seed")
        self.out_path = out_path or base.get("out_path")
        self.max_inflight = max_inflight if max_inflight is not None else base.get("max_inflight")
        self._config: Config | None = None

    @property
    def strict(self) -> bool:
        return not self.lenient

    def config(self) -> Config:
        if self._config is None:
            self._config = load_config(self.config_path) if self.config_path else Config()
        return self._config

    def require_endpoint(self, name: str):
        endpoint = getattr(self.config(), name)
        if endpoint is None:
            raise SchemaError(f"this command needs a [{name}] section in --config")
        return endpoint

    def emit_lines(self, records: Sequence[dict[str, Any]]) -> None:
        if self.out_path:
            dataio.write_jsonl(self.out_path, records)
        else:
            for record in records:
                click.echo(json.dumps(record, ensure_ascii=False))

    def emit_json(self, document: dict[str, Any]) -> None:
        text = json.dumps(document, ensure_ascii=False, indent=2)
        if self.out_path:
            Path(self.out_path).write_text(text + "\n", encoding="utf-8")
        else:
            click.echo(text)


@click.group()
@pipeline_options
@click.pass_context
def main(ctx: click.Context, config_path: str | None, lenient: bool, seed: int | None,
         out_path: str | None, max_inflight: int | None) -> None:
    """Constraint verification, scoring, set expansion and pair building."""
    ctx.obj = {
        "config_path": config_path,
        "lenient": lenient,
        "seed": seed,
        "out_path": out_path,
        "max_inflight": max_inflight,
    }


def _read_text_arg(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    return Path(source).read_text(encoding="utf-8")


def _doc_seed(base_seed: int, doc_id: str) -> int:
    digest = hashlib.sha256(f"{base_seed}:{doc_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@main.command()
@click.option("--docs", "docs_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSONL of {doc_id, text, domain?}.")
@click.option("--split", type=click.Choice([s.value for s in dataio.Split]),
              default=dataio.Split.FINEWEB.value, show_default=True)
@click.option("--count", type=int, default=38, show_default=True,
              help="Hard constraints to extract per document.")
@click.option("--decompose", is_flag=True, default=False,
              help="Also extract soft attributes via the [generator] endpoint.")
@click.option("--pool-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the flattened attribute pool here.")
@pipeline_options
@click.pass_context
def extract(ctx: click.Context, docs_path: str, split: str, count: int, decompose: bool,
            pool_out: str | None, **flags) -> None:
    """Mine attributes from documents into bench records."""

    def run() -> None:
        settings = Settings(ctx, **flags)
        base_seed = settings.seed if settings.seed is not None else 0
        generator = ChatClient(settings.require_endpoint("generator")) if decompose else None

        records: list[dataio.BenchRecord] = []
        pool: list[Attribute] = []
        for lineno, data in dataio.read_jsonl(docs_path):
            if not isinstance(data, dict) or "doc_id" not in data or "text" not in data:
                raise SchemaError(f"{docs_path}:{lineno}: need doc_id and text")
            doc_id = str(data["doc_id"])
            text = data["text"]
            domain = data.get("domain")

            attributes: list[Attribute] = []
            if generator is not None:
                reply = generator.complete(render_decompose_prompt(text))
                soft = parse_decomposed_attributes(reply, id_prefix=f"{doc_id}-soft")
                attributes.extend(
                    replace(a, source_doc=doc_id, domain=domain) for a in soft
                )
            constraints = extract_hard_attributes(
                text, count=count, rng_seed=_doc_seed(base_seed, doc_id)
            )
            attributes.extend(
                Attribute.hard(f"{doc_id}-hard-{i:03d}", c, source_doc=doc_id, domain=domain)
                for i, c in enumerate(constraints)
            )
            attr_set = AttributeSet(id=doc_id, attributes=tuple(attributes))
            records.append(
                dataio.BenchRecord(
                    doc_id=doc_id,
                    attributes=attr_set,
                    split=dataio.Split(split),
                    raw_text=text,
                    domain=domain,
                )
            )
            pool.extend(attributes)

        settings.emit_lines([dataio.bench_record_to_dict(r) for r in records])
        if pool_out:
            dataio.write_attributes(pool_out, pool)

    _guard(run)


@main.command()
@click.option("--constraints", "constraints_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="JSONL of attribute records (hard kind).")
@click.option("--text", "text_source", required=True,
              help="Response text file, or - for stdin.")
@click.option("--instruction-id", default="0", show_default=True,
              help="Instruction id stamped on each result line.")
@pipeline_options
@click.pass_context
def verify(ctx: click.Context, constraints_path: str, text_source: str,
           instruction_id: str, **flags) -> None:
    """Check hard constraints against a response text."""
    settings = Settings(ctx, **flags)
    try:
        attributes = dataio.read_attributes(constraints_path, strict=settings.strict)
        text = _read_text_arg(text_source)
        hard = [a for a in attributes if a.is_hard]
        if not hard:
            raise NoHardConstraints(f"{constraints_path} contains no hard attributes")
        attr_set = AttributeSet(id=instruction_id, attributes=tuple(hard))
        results = verify_all(attr_set, text)
        lines = []
        for attribute, result in zip(hard, results):
            record = result.to_dict()
            record["type"] = attribute.constraint.type_name
            record["instruction_id"] = instruction_id
            lines.append(record)
        settings.emit_lines(lines)
    except ClientError as exc:
        _fail(str(exc), 1)
        return
    except (EfcgError, OSError) as exc:
        _fail(str(exc), 2)
        return
    sys.exit(0 if all(r.satisfied for r in results) else 1)


@main.command()
@click.option("--results", "results_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="JSONL of verification result lines.")
@pipeline_options
@click.pass_context
def score(ctx: click.Context, results_path: str, **flags) -> None:
    """Aggregate verification results into CSR and macro accuracy."""

    def run() -> None:
        settings = Settings(ctx, **flags)
        by_instruction: dict[str, list[bool]] = {}
        typed: list[tuple[Any, bool]] = []
        for lineno, data in dataio.read_jsonl(results_path):
            if not isinstance(data, dict) or "satisfied" not in data:
                raise SchemaError(f"{results_path}:{lineno}: need a 'satisfied' field")
            instruction = str(data.get("instruction_id", "0"))
            satisfied = bool(data["satisfied"])
            by_instruction.setdefault(instruction, []).append(satisfied)
            type_name = data.get("type")
            if type_name is not None:
                cls = CONSTRAINT_CLASSES.get(type_name)
                if cls is None:
                    raise SchemaError(f"{results_path}:{lineno}: unknown type {type_name!r}")
                # compute_macro only reads .type_name, a ClassVar, so the
                # class itself stands in for a constraint instance here
                typed.append((cls, satisfied))
        if not by_instruction:
            raise EmptyInput(f"{results_path} contains no results")

        ids = list(by_instruction)
        csr_report = compute_csr([by_instruction[i] for i in ids], ids=ids)
        report: dict[str, Any] = {
            "csr": float(csr_report.csr),
            "per_instruction": [s.to_dict() for s in csr_report.per_instruction],
            "macro": None,
            "per_type": {},
        }
        if typed:
            macro_report = compute_macro(typed)
            report["macro"] = float(macro_report.macro_accuracy)
            report["per_type"] = {t.type_name: t.to_dict() for t in macro_report.per_type}
        settings.emit_json(report)

    _guard(run)


def _embed_pool(settings: Settings, pool: Sequence[Attribute]) -> VectorStore:
    """Fetch vectors for every pool attribute and mirror them into both spaces.

    Used when no --vectors file is given; with a single service there is no
    separate fine-tuned correlation encoder, so the two spaces coincide.
    """
    endpoint = settings.require_endpoint("embedding")
    client = EmbeddingClient(endpoint, max_inflight=settings.max_inflight or 4)
    texts = [a.text if a.is_soft else a.constraint.describe() for a in pool]
    vectors = client.embed(texts)
    store = VectorStore()
    for attribute, values in zip(pool, vectors):
        store.add(attribute.id, Space.SEMANTIC, values)
        store.add(attribute.id, Space.CORRELATION, values)
    return store


@main.command()
@click.option("--pool", "pool_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSONL attribute pool.")
@click.option("--vectors", "vectors_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSONL vector file; omit to fetch from the [embedding] endpoint.")
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False), default=None,
              help="Stats sidecar path (default: <out>.stats.json).")
@pipeline_options
@click.pass_context
def expand(ctx: click.Context, pool_path: str, vectors_path: str | None,
           stats_path: str | None, **flags) -> None:
    """Expand seed attributes into coherent, non-redundant attribute sets."""

    def run() -> None:
        settings = Settings(ctx, **flags)
        pool = dataio.read_attributes(pool_path, strict=settings.strict)
        if vectors_path:
            store = dataio.load_vectors(vectors_path, strict=settings.strict)
        else:
            store = _embed_pool(settings, pool)
        cfg = settings.config().expansion
        if settings.seed is not None:
            cfg = replace(cfg, rng_seed=settings.seed)
        outcomes = expand_batch(pool, store, cfg)
        settings.emit_lines(
            [dataio.attribute_set_to_dict(o.attribute_set) for o in outcomes]
        )

        histogram: dict[str, int] = {}
        for outcome in outcomes:
            key = str(len(outcome.attribute_set))
            histogram[key] = histogram.get(key, 0) + 1
        stats = {
            "n_sets": len(outcomes),
            "reached_target": sum(1 for o in outcomes if o.reached_target),
            "exhausted": sum(1 for o in outcomes if o.exhausted),
            "rejected_redundant_total": sum(o.rejected_redundant for o in outcomes),
            "size_histogram": {k: histogram[k] for k in sorted(histogram, key=int)},
            "per_set": [o.to_stats() for o in outcomes],
        }
        sidecar = stats_path or (f"{settings.out_path}.stats.json" if settings.out_path else None)
        if sidecar:
            Path(sidecar).write_text(
                json.dumps(stats, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
            )

    _guard(run)


@main.command("build-pairs")
@click.option("--sets", "sets_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSONL of attribute sets.")
@pipeline_options
@click.pass_context
def build_pairs_command(ctx: click.Context, sets_path: str, **flags) -> None:
    """Build DPO preference pairs for each attribute set."""

    def run() -> None:
        settings = Settings(ctx, **flags)
        sets = dataio.read_attribute_sets(sets_path, strict=settings.strict)
        cfg = settings.config().pairs
        if cfg.generator is None or cfg.judge is None:
            raise SchemaError("build-pairs needs [generator] and [judge] in --config")
        if settings.max_inflight is not None:
            cfg = replace(cfg, max_inflight=settings.max_inflight)

        done: set[str] = set()
        if settings.out_path and Path(settings.out_path).exists():
            for lineno, data in dataio.read_jsonl(settings.out_path):
                if isinstance(data, dict) and "set_id" in data:
                    done.add(str(data["set_id"]))

        results: list[PairResult] = build_pairs(sets, cfg, skip_set_ids=done)
        emitted = [r.pair.to_dict() for r in results if r.pair is not None]
        for result in results:
            if result.skipped:
                click.echo(f"skipped {result.set_id}: {result.skip_reason}", err=True)

        if settings.out_path:
            mode = "a" if done else "w"
            with open(settings.out_path, mode, encoding="utf-8", newline="\n") as handle:
                for record in emitted:
                    handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        else:
            settings.emit_lines(emitted)

    _guard(run)


@main.command()
@click.option("--text", "text_source", required=True, help="Text file, or - for stdin.")
@click.option("--attributes", "attributes_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="JSONL of soft attributes.")
@pipeline_options
@click.pass_context
def judge(ctx: click.Context, text_source: str, attributes_path: str, **flags) -> None:
    """Judge a text against soft attributes via the [judge] endpoint."""

    def run() -> None:
        settings = Settings(ctx, **flags)
        text = _read_text_arg(text_source)
        attributes = dataio.read_attributes(attributes_path, strict=settings.strict)
        soft = [a for a in attributes if a.is_soft]
        if not soft:
            raise SchemaError(f"{attributes_path} contains no soft attributes")
        client = ChatClient(settings.require_endpoint("judge"))
        flags_list = judge_with_client(client, text, soft)
        settings.emit_lines(
            [
                {
                    "attribute_id": a.id,
                    "satisfied": bool(flag),
                    "detail": "judged satisfied" if flag else "judged unsatisfied",
                }
                for a, flag in zip(soft, flags_list)
            ]
        )

    _guard(run)


def _parse_positions(raw: str) -> list[float | int]:
    positions: list[float | int] = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        if "." in token or "e" in token.lower():
            positions.append(float(token))
        else:
            positions.append(int(token))
    if not positions:
        raise SchemaError("no positions given")
    return positions


def _best_effort_generate(client: ChatClient, failures: list[str]) -> Callable[[str], str]:
    def generate(prompt: str) -> str:
        try:
            return client.complete(prompt)
        except ClientError as exc:
            failures.append(str(exc))
            return ""

    return generate


@main.command("eval-position")
@click.option("--sets", "sets_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--probe", "probe_json", required=True,
              help='Probe constraint as JSON, e.g. \'{"type": "include_keyword", "keyword": "tide"}\'.')
@click.option("--positions", "positions_raw", default="0.0,0.25,0.5,0.75,1.0", show_default=True,
              help="Comma-separated insertion fractions (floats) or indices (ints).")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the buckets as CSV.")
@click.option("--best-effort", is_flag=True, default=False,
              help="Score failed generations as unsatisfied instead of aborting.")
@pipeline_options
@click.pass_context
def eval_position(ctx: click.Context, sets_path: str, probe_json: str, positions_raw: str,
                  csv_path: str | None, best_effort: bool, **flags) -> None:
    """Measure probe satisfaction as its position shifts through the prompt."""

    def run() -> None:
        settings = Settings(ctx, **flags)
        sets = dataio.read_attribute_sets(sets_path, strict=settings.strict)
        probe = constraint_from_dict(json.loads(probe_json), strict=settings.strict)
        positions = _parse_positions(positions_raw)
        client = ChatClient(settings.require_endpoint("generator"))
        failures: list[str] = []
        if best_effort:
            generate = _best_effort_generate(client, failures)
        else:
            generate = client.complete
        report = run_position_bias(sets, probe, positions, generate)
        document = report.to_dict()
        document["positions"] = [str(p) for p in positions]
        document["n_sets"] = len(sets)
        if failures:
            document["client_failures"] = len(failures)
        settings.emit_json(document)
        if csv_path:
            dataio.write_csv(csv_path, report.csv_rows())

    _guard(run)


@main.command("eval-tradeoff")
@click.option("--pool", "pool_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--vectors", "vectors_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--counts", "counts_raw", default="10,20,30,40,50", show_default=True)
@click.option("--per-count", "per_count", type=int, default=20, show_default=True,
              help="Sets generated per attribute count.")
@click.option("--quality-file", "quality_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help='JSON {"<count>": score} joined onto the report.')
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--best-effort", is_flag=True, default=False)
@pipeline_options
@click.pass_context
def eval_tradeoff(ctx: click.Context, pool_path: str, vectors_path: str | None, counts_raw: str,
                  per_count: int, quality_path: str | None, csv_path: str | None,
                  best_effort: bool, **flags) -> None:
    """Sweep attribute counts and report the CSR decline curve."""

    def run() -> None:
        settings = Settings(ctx, **flags)
        pool = dataio.read_attributes(pool_path, strict=settings.strict)
        if vectors_path:
            store = dataio.load_vectors(vectors_path, strict=settings.strict)
        else:
            store = _embed_pool(settings, pool)
        counts = [int(t) for t in counts_raw.split(",") if t.strip()]
        cfg = settings.config().expansion
        if settings.seed is not None:
            cfg = replace(cfg, rng_seed=settings.seed)

        gen_client = ChatClient(settings.require_endpoint("generator"))
        judge_client = ChatClient(settings.require_endpoint("judge"))
        failures: list[str] = []
        if best_effort:
            generate = _best_effort_generate(gen_client, failures)

            def judge_fn(text: str, soft: Sequence[Attribute]) -> list[bool]:
                try:
                    return judge_with_client(judge_client, text, soft)
                except ClientError as exc:
                    failures.append(str(exc))
                    return [False] * len(soft)

        else:
            generate = gen_client.complete

            def judge_fn(text: str, soft: Sequence[Attribute]) -> list[bool]:
                return judge_with_client(judge_client, text, soft)

        report = run_tradeoff(
            pool, store, counts, per_count, generate, judge_fn, base_cfg=cfg
        )
        document = report.to_dict()
        if quality_path:
            external = json.loads(Path(quality_path).read_text(encoding="utf-8"))
            document["quality_metric"] = "external"
            for point in document["points"]:
                key = str(point["n_attributes"])
                if key in external:
                    point["quality"] = external[key]
        if failures:
            document["client_failures"] = len(failures)
        settings.emit_json(document)
        if csv_path:
            dataio.write_csv(csv_path, document["points"])

    _guard(run)


@main.command()
@click.option("--pairs", "pairs_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help='JSONL of {"a": bool, "b": bool} label pairs.')
@pipeline_options
@click.pass_context
def kappa(ctx: click.Context, pairs_path: str, **flags) -> None:
    """Cohen's kappa and raw agreement between two binary raters."""

    def run() -> None:
        settings = Settings(ctx, **flags)
        pairs: list[tuple[bool, bool]] = []
        for lineno, data in dataio.read_jsonl(pairs_path):
            if not isinstance(data, dict) or "a" not in data or "b" not in data:
                raise SchemaError(f"{pairs_path}:{lineno}: need fields 'a' and 'b'")
            pairs.append((bool(data["a"]), bool(data["b"])))
        if not pairs:
            raise EmptyInput(f"{pairs_path} contains no pairs")
        kappa_value = cohens_kappa(pairs)
        agreement = agreement_rate(pairs)
        settings.emit_json(
            {
                "n": len(pairs),
                "kappa": float(kappa_value),
                "agreement_rate": float(agreement),
            }
        )

    _guard(run)


if __name__ == "__main__":
    main()
