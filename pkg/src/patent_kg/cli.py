"""Command-line entry point: ``patent-kg <command> ...``.

Data goes to files or stdout, logs to stderr. Exit codes: 0 success,
1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import kgstore
from .attention import (
    AttentionConfig,
    BertAttentionProvider,
    FixtureAttentionProvider,
    ProviderConfigError,
    WordAttention,
    aggregate_to_words,
    compute_token_attention,
    dump_attention,
)
from .constraints import ThresholdPolicy
from .corpus import CorpusFilter, CorpusFormatError, filter_corpus, parse_corpus_report, write_corpus_jsonl
from .evaluation import bundled_benchmark, load_benchmark, recall_rate, relation_recall
from .kgstore import KnowledgeGraph, canonicalize_relation
from .matcher import MatchConfig
from .pipeline import extract_corpus
from .preprocess import FixtureParseProvider, SpacyParseProvider, preprocess_sentence

log = logging.getLogger("patent_kg")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model_id: str = "bert-base-uncased"
    spacy_model: str = "en_core_web_sm"
    layer: int = 9
    beam_size: int = 2
    threshold_mode: str = "median"
    jobs: int = 1
    corpus: str | None = None
    out: str | None = None
    kg: str | None = None
    benchmark: str | None = None
    fixture_parse: str | None = None
    fixture_attn: str | None = None
    strict: bool = False

    def __post_init__(self):
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")

    @property
    def parse_provider(self) -> str:
        return "fixture" if self.fixture_parse else "real"

    @property
    def attn_provider(self) -> str:
        return "fixture" if self.fixture_attn else "real"


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the JSON config file, which overrides defaults."""
    cfg = RunConfig()
    names = {f.name for f in fields(RunConfig)}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        data = json.loads(path.read_text(encoding="utf-8"))
        unknown = set(data) - names
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = replace(cfg, **data)
    flags = {k: v for k, v in vars(args).items() if k in names and v is not None}
    return replace(cfg, **flags)


def _require_file(path: str | None, what: str) -> Path:
    if not path:
        raise UsageError(f"{what} path is required")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {p}")
    return p


def _providers(cfg: RunConfig):
    if cfg.fixture_parse:
        parse = FixtureParseProvider.from_file(_require_file(cfg.fixture_parse, "parse fixture"))
    else:
        try:
            parse = SpacyParseProvider(cfg.spacy_model)
        except (RuntimeError, OSError) as e:
            raise ProviderConfigError(str(e)) from e
    if cfg.fixture_attn:
        attn = FixtureAttentionProvider.from_file(_require_file(cfg.fixture_attn, "attention fixture"))
    else:
        attn = BertAttentionProvider(cfg.model_id)
    return parse, attn


def _read_corpus(cfg: RunConfig, fmt: str):
    path = _require_file(cfg.corpus, "corpus")
    with path.open(encoding="utf-8", newline="") as f:
        report = parse_corpus_report(f, fmt, cfg.strict)
    for e in report.errors:
        log.warning("%s: %s", path, e)
    return report


def cmd_ingest(args) -> int:
    cfg = resolve_config(args)
    report = _read_corpus(cfg, args.format)
    flt = CorpusFilter(args.cpc_prefix, args.year_min, args.year_max, not args.keep_family)
    kept = filter_corpus(report.records, flt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as f:
            write_corpus_jsonl(kept, f)
    else:
        write_corpus_jsonl(kept, sys.stdout)
    print(f"kept {len(kept)} dropped {len(report.records) - len(kept)} malformed {len(report.errors)}", file=sys.stderr)
    return 0


def cmd_extract(args) -> int:
    cfg = resolve_config(args)
    records = _read_corpus(cfg, args.format).records
    parse, attn = _providers(cfg)
    per_record = extract_corpus(
        records,
        parse,
        attn,
        MatchConfig(beam_size=cfg.beam_size),
        AttentionConfig(layer=cfg.layer, model_id=cfg.model_id),
        ThresholdPolicy(cfg.threshold_mode),
        jobs=cfg.jobs,
    )
    triples = [t for ts in per_record for t in ts]
    sink = open(cfg.out, "w", encoding="utf-8") if cfg.out else sys.stdout
    try:
        for t in triples:
            sink.write(json.dumps(t.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
    finally:
        if sink is not sys.stdout:
            sink.close()
    log.info("extracted %d triples from %d abstracts", len(triples), len(records))
    return 0


def cmd_build_kg(args) -> int:
    cfg = resolve_config(args)
    if not cfg.kg:
        raise UsageError("--kg output path is required")
    kg = KnowledgeGraph()
    for path in args.triples:
        kg = kgstore.merge(kg, kgstore.load_path(_require_file(path, "triples file")))
    kgstore.save_path(kg, cfg.kg)
    s = kgstore.stats(kg)
    print(json.dumps(s.__dict__))
    return 0


def _load_kg(cfg: RunConfig) -> KnowledgeGraph:
    return kgstore.load_path(_require_file(cfg.kg, "knowledge graph"))


def cmd_query(args) -> int:
    cfg = resolve_config(args)
    if args.depth < 1:
        raise UsageError("--depth must be >= 1")
    sub = kgstore.query_neighbors(_load_kg(cfg), args.entity, args.depth)
    for t in sub.canonical_triples():
        print(f"{t.head}\t{t.relation}\t{t.tail}\t{t.score:.4f}\t{t.patent_id}")
    return 0


def _read_lines(path: str) -> list[str]:
    return [l.strip() for l in _require_file(path, "list file").read_text(encoding="utf-8").splitlines() if l.strip()]


def _emit_eval(result, as_json: bool):
    print(result.dumps() if as_json else result.table())


def cmd_eval_entities(args) -> int:
    cfg = resolve_config(args)
    text = _require_file(cfg.benchmark, "benchmark").read_text(encoding="utf-8") if cfg.benchmark else bundled_benchmark()
    bench = load_benchmark(text)
    entities = _read_lines(args.entities) if args.entities else list(_load_kg(cfg).entities)
    _emit_eval(recall_rate(entities, bench), args.json)
    return 0


def cmd_eval_relations(args) -> int:
    cfg = resolve_config(args)
    if cfg.benchmark:
        text = _require_file(cfg.benchmark, "benchmark").read_text(encoding="utf-8")
    else:
        text = bundled_benchmark("relations")
    bench = load_benchmark(text, canonicalize_relation)
    relations = _read_lines(args.relations) if args.relations else list(_load_kg(cfg).relation_stats)
    _emit_eval(relation_recall(relations, bench), args.json)
    return 0


def cmd_dump_attention(args) -> int:
    cfg = resolve_config(args)
    if args.sentence:
        parse, attn = _providers(cfg)
        ps = preprocess_sentence(args.sentence, parse)
        tok = compute_token_attention(ps.tokens, AttentionConfig(layer=cfg.layer, model_id=cfg.model_id), attn, ps.units)
        dump_attention(aggregate_to_words(tok, ps.units), sys.stdout)
        return 0
    data = json.loads(_require_file(cfg.fixture_attn, "attention fixture").read_text(encoding="utf-8"))
    for i, entry in enumerate(data if isinstance(data, list) else [data]):
        if i:
            print()
        dump_attention(WordAttention(list(entry["units_or_tokens"]), entry["matrix"]), sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags take precedence")
    common.add_argument("--model", dest="model_id", help="pretrained encoder id")
    common.add_argument("--spacy-model", dest="spacy_model")
    common.add_argument("--layer", type=int, help="1-based encoder layer (default 9)")
    common.add_argument("--beam-size", dest="beam_size", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--corpus")
    common.add_argument("--out")
    common.add_argument("--kg")
    common.add_argument("--benchmark")
    common.add_argument("--fixture-parse", dest="fixture_parse")
    common.add_argument("--fixture-attn", dest="fixture_attn")
    common.add_argument("--strict", action="store_const", const=True, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="patent-kg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="parse and filter a patent corpus")
    s.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    s.add_argument("--cpc-prefix", default="F")
    s.add_argument("--year-min", type=int, default=2016)
    s.add_argument("--year-max", type=int, default=2021)
    s.add_argument("--keep-family", action="store_true", help="do not drop non-earliest family members")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("extract", parents=[common], help="extract triples from abstracts")
    s.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("build-kg", parents=[common], help="merge triples files into a graph")
    s.add_argument("triples", nargs="+")
    s.set_defaults(func=cmd_build_kg)

    s = sub.add_parser("query", parents=[common], help="list triples around an entity")
    s.add_argument("entity")
    s.add_argument("--depth", type=int, default=1)
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("eval-entities", parents=[common], help="entity recall against a term list")
    s.add_argument("--entities", help="one entity per line instead of --kg")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_eval_entities)

    s = sub.add_parser("eval-relations", parents=[common], help="relation recall against a list")
    s.add_argument("--relations", help="one relation per line instead of --kg")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_eval_relations)

    s = sub.add_parser("dump-attention", parents=[common], help="print a word attention matrix as TSV")
    s.add_argument("--sentence", help="run the providers on this sentence instead of dumping the fixture")
    s.set_defaults(func=cmd_dump_attention)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as e:
        print(f"patent-kg: error: {e}", file=sys.stderr)
        return 2
    except (ProviderConfigError, CorpusFormatError, kgstore.KgFormatError, ValueError, OSError) as e:
        print(f"patent-kg: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
