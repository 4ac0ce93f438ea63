"""Relation search between noun-unit pairs over a word attention matrix.

Search runs backwards from the tail: the ``beam_size`` relation units the
tail attends to most are expanded, each is completed with the relation's
attention to the head, and the best total wins.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .attention import AttentionError, WordAttention
from .preprocess import ProcessedSentence, UnitKind

DEFAULT_ALLOW = frozenset({"VERB", "AUX", "ADP", "PART"})
DEFAULT_DENY = frozenset({"ADV", "NOUN", "PROPN", "DET", "PUNCT", "NUM", "ADJ"})


@dataclass(frozen=True)
class MatchConfig:
    beam_size: int = 2
    relation_pos_allow: frozenset = field(default=DEFAULT_ALLOW)
    relation_pos_deny: frozenset = field(default=DEFAULT_DENY)

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        object.__setattr__(self, "relation_pos_allow", frozenset(self.relation_pos_allow))
        object.__setattr__(self, "relation_pos_deny", frozenset(self.relation_pos_deny))
        if self.relation_pos_allow & self.relation_pos_deny:
            raise ValueError("relation_pos_allow and relation_pos_deny overlap")


@dataclass(frozen=True)
class CandidatePair:
    head_unit: int
    tail_unit: int

    def __post_init__(self):
        if self.head_unit >= self.tail_unit:
            raise ValueError("head must precede tail")


@dataclass(frozen=True)
class CandidateFact:
    head: str
    relation: str
    tail: str
    score: float
    head_idx: int
    rel_idx: int
    tail_idx: int
    abstract_id: str = ""
    sentence_index: int = 0
    relation_is_phrasal: bool = False

    @property
    def triple(self) -> tuple[str, str, str]:
        return self.head, self.relation, self.tail


def rank_key(score: float, rel_idx: int):
    """Sort key, best first: higher score, then relation nearer the tail (higher index)."""
    return (-score, -rel_idx)


def _is_relation(sentence: ProcessedSentence, k: int, config: MatchConfig) -> bool:
    unit = sentence.units[k]
    if unit.kind is UnitKind.NOUN_PHRASE:
        return False
    if unit.kind is UnitKind.PHRASAL_VERB:
        return True
    if any(t.dep == "neg" for t in sentence.tokens[unit.start:unit.end]):
        return True
    return unit.unit_pos in config.relation_pos_allow and unit.unit_pos not in config.relation_pos_deny


def candidate_relations(pair: CandidatePair, sentence: ProcessedSentence, config: MatchConfig | None = None) -> list[int]:
    config = config or MatchConfig()
    return [k for k in range(pair.head_unit + 1, pair.tail_unit) if _is_relation(sentence, k, config)]


def enumerate_pairs(sentence: ProcessedSentence, config: MatchConfig | None = None) -> list[CandidatePair]:
    config = config or MatchConfig()
    nouns = [k for k, u in enumerate(sentence.units) if u.kind is UnitKind.NOUN_PHRASE]
    rel = [_is_relation(sentence, k, config) for k in range(len(sentence.units))]
    pairs = []
    for a, i in enumerate(nouns):
        for j in nouns[a + 1:]:
            if any(rel[i + 1:j]):
                pairs.append(CandidatePair(i, j))
    return pairs


def _check_dims(attn: WordAttention, sentence: ProcessedSentence):
    if attn.matrix.shape != (len(sentence.units), len(sentence.units)):
        raise AttentionError(
            f"attention is {attn.matrix.shape} but sentence has {len(sentence.units)} units"
        )


def _fact(pair, r, score, attn, sentence) -> CandidateFact:
    units = sentence.units
    return CandidateFact(
        head=units[pair.head_unit].text,
        relation=units[r].text,
        tail=units[pair.tail_unit].text,
        score=float(score),
        head_idx=pair.head_unit,
        rel_idx=r,
        tail_idx=pair.tail_unit,
        abstract_id=sentence.abstract_id,
        sentence_index=sentence.sentence_index,
        relation_is_phrasal=units[r].kind is UnitKind.PHRASAL_VERB,
    )


def expand_beam(
    pair: CandidatePair, attn: WordAttention, sentence: ProcessedSentence, config: MatchConfig | None = None
) -> list[CandidateFact]:
    """All candidates the beam completes, in expansion order."""
    config = config or MatchConfig()
    _check_dims(attn, sentence)
    A = attn.matrix
    h, t = pair.head_unit, pair.tail_unit
    frontier = candidate_relations(pair, sentence, config)
    visited: set[int] = set()
    facts = []
    # first backward hop tail -> relation, best first
    for r in sorted(frontier, key=lambda r: rank_key(A[t, r], r)):
        if len(facts) == config.beam_size:
            break
        if r in visited:
            continue
        visited.add(r)
        facts.append(_fact(pair, r, A[t, r] + A[r, h], attn, sentence))
    return facts


def best_fact(facts) -> CandidateFact | None:
    if not facts:
        return None
    return min(facts, key=lambda f: rank_key(f.score, f.rel_idx))


def beam_match(
    pair: CandidatePair, attn: WordAttention, sentence: ProcessedSentence, config: MatchConfig | None = None
) -> CandidateFact | None:
    return best_fact(expand_beam(pair, attn, sentence, config))


def brute_force_match(
    pair: CandidatePair, attn: WordAttention, sentence: ProcessedSentence, config: MatchConfig | None = None
) -> CandidateFact | None:
    """Score every eligible relation; no pruning. Test oracle for :func:`beam_match`."""
    _check_dims(attn, sentence)
    A = attn.matrix
    best = None
    for r in candidate_relations(pair, sentence, config):
        score = A[pair.tail_unit, r] + A[r, pair.head_unit]
        if best is None or score > best[0] or (score == best[0] and r > best[1]):
            best = (score, r)
    if best is None:
        return None
    return _fact(pair, best[1], best[0], attn, sentence)
