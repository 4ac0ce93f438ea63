"""Filtering of per-pair candidate facts within one abstract."""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from itertools import groupby

from .matcher import CandidateFact, best_fact


@dataclass
class AbstractCandidates:
    abstract_id: str
    facts: list[CandidateFact] = field(default_factory=list)

    def __post_init__(self):
        bad = {f.abstract_id for f in self.facts} - {self.abstract_id}
        if bad:
            raise ValueError(f"facts from other abstracts: {sorted(bad)}")


@dataclass(frozen=True)
class ThresholdPolicy:
    mode: str = "median"

    def __post_init__(self):
        if self.mode != "median":
            raise ValueError(f"unsupported threshold mode {self.mode!r}")

    def threshold(self, scores: list[float]) -> float:
        return statistics.median(scores)


def filter_by_median(cands: AbstractCandidates, policy: ThresholdPolicy | None = None) -> AbstractCandidates:
    """Keep facts scoring at least the median score of the abstract."""
    policy = policy or ThresholdPolicy()
    if not cands.facts:
        return AbstractCandidates(cands.abstract_id, [])
    cut = policy.threshold([f.score for f in cands.facts])
    return AbstractCandidates(cands.abstract_id, [f for f in cands.facts if f.score >= cut])


def _resolve_sentence(facts: list[CandidateFact]) -> list[CandidateFact]:
    # a head keeps only the relation of its best fact (several tails may share it)
    keep = []
    for h in sorted({f.head_idx for f in facts}):
        group = [f for f in facts if f.head_idx == h]
        rel = best_fact(group).rel_idx
        keep.extend(f for f in group if f.rel_idx == rel)
    # a tail keeps a single fact
    return [best_fact([f for f in keep if f.tail_idx == t]) for t in sorted({f.tail_idx for f in keep})]


def resolve_relations(cands: AbstractCandidates) -> AbstractCandidates:
    kept = set()
    by_sentence = sorted(cands.facts, key=lambda f: f.sentence_index)
    for _, group in groupby(by_sentence, key=lambda f: f.sentence_index):
        kept.update(id(f) for f in _resolve_sentence(list(group)))
    return AbstractCandidates(cands.abstract_id, [f for f in cands.facts if id(f) in kept])


def apply_constraints(cands: AbstractCandidates, policy: ThresholdPolicy | None = None) -> AbstractCandidates:
    return resolve_relations(filter_by_median(cands, policy))
