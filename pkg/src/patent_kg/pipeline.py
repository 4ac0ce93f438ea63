"""End-to-end extraction: abstract text in, canonical triples out."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

from .attention import (
    AttentionConfig,
    AttentionError,
    AttentionProvider,
    ProviderConfigError,
    aggregate_to_words,
    compute_token_attention,
)
from .constraints import AbstractCandidates, ThresholdPolicy, apply_constraints
from .corpus import PatentRecord
from .kgstore import Triple
from .matcher import CandidateFact, MatchConfig, beam_match, enumerate_pairs
from .preprocess import ParseError, ParseProvider, preprocess_sentence, split_sentences

log = logging.getLogger(__name__)


def sentence_candidates(sentence, parse, attn, match_cfg, attn_cfg, abstract_id="", index=0) -> list[CandidateFact]:
    ps = preprocess_sentence(sentence, parse, abstract_id, index)
    tok = compute_token_attention(ps.tokens, attn_cfg, attn, ps.units)
    wa = aggregate_to_words(tok, ps.units)
    facts = []
    for pair in enumerate_pairs(ps, match_cfg):
        fact = beam_match(pair, wa, ps, match_cfg)
        if fact is not None:
            facts.append(fact)
    return facts


def abstract_candidates(
    record: PatentRecord,
    parse: ParseProvider,
    attn: AttentionProvider,
    match_cfg: MatchConfig | None = None,
    attn_cfg: AttentionConfig | None = None,
) -> AbstractCandidates:
    match_cfg = match_cfg or MatchConfig()
    attn_cfg = attn_cfg or AttentionConfig()
    cands = AbstractCandidates(record.patent_id)
    if not record.abstract.strip():
        return cands
    for i, sentence in enumerate(split_sentences(record.abstract, getattr(parse, "sentences", None))):
        try:
            cands.facts.extend(sentence_candidates(sentence, parse, attn, match_cfg, attn_cfg, record.patent_id, i))
        except ProviderConfigError:
            raise
        except (ParseError, AttentionError) as e:
            log.warning("patent %s sentence %d skipped: %s", record.patent_id, i, e)
    return cands


def to_triples(facts: Iterable[CandidateFact]) -> list[Triple]:
    return [
        Triple.from_surface(f.head, f.relation, f.tail, f.score, f.abstract_id, f.sentence_index, f.relation_is_phrasal)
        for f in facts
    ]


def extract_from_abstract(
    record: PatentRecord,
    parse: ParseProvider,
    attn: AttentionProvider,
    match_cfg: MatchConfig | None = None,
    attn_cfg: AttentionConfig | None = None,
    policy: ThresholdPolicy | None = None,
) -> list[Triple]:
    cands = abstract_candidates(record, parse, attn, match_cfg, attn_cfg)
    return to_triples(apply_constraints(cands, policy).facts)


_worker: dict = {}


def _init_worker(parse, attn, match_cfg, attn_cfg, policy):
    _worker.update(parse=parse, attn=attn, match_cfg=match_cfg, attn_cfg=attn_cfg, policy=policy)


def _extract_one(record):
    w = _worker
    return extract_from_abstract(record, w["parse"], w["attn"], w["match_cfg"], w["attn_cfg"], w["policy"])


def extract_corpus(
    records: Sequence[PatentRecord],
    parse: ParseProvider,
    attn: AttentionProvider,
    match_cfg: MatchConfig | None = None,
    attn_cfg: AttentionConfig | None = None,
    policy: ThresholdPolicy | None = None,
    jobs: int = 1,
) -> list[list[Triple]]:
    """Triples per record, in record order.

    ``jobs > 1`` uses a process pool, but only if both providers declare no
    concurrency limit; otherwise the run is sequential.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    shareable = parse.max_concurrency is None and attn.max_concurrency is None
    if jobs > 1 and not shareable:
        log.info("providers are not concurrency-safe; running with one worker")
        jobs = 1
    if jobs == 1 or len(records) <= 1:
        return [extract_from_abstract(r, parse, attn, match_cfg, attn_cfg, policy) for r in records]
    chunk = max(1, len(records) // (jobs * 4))
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(parse, attn, match_cfg, attn_cfg, policy)) as ex:
        return list(ex.map(_extract_one, records, chunksize=chunk))
