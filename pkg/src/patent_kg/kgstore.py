"""Triple store: canonical entities, multiset of triples, JSONL persistence."""
from __future__ import annotations

import json
import re
from collections import Counter, deque
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, TextIO

DETERMINERS = ("the", "a", "an")
_WS = re.compile(r"\s+")

TRIPLE_FIELDS = (
    "patent_id", "sentence_index", "head", "head_surface", "relation",
    "relation_surface", "tail", "tail_surface", "score", "relation_is_phrasal",
)


class KgFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def canonicalize(surface: str) -> str:
    """Lower-case, collapse whitespace, drop leading determiners.

    A string made only of determiners is returned lower-cased, unstripped.

    >>> canonicalize("The  magnetic force")
    'magnetic force'
    """
    text = _WS.sub(" ", surface).strip().lower()
    if not text:
        raise ValueError("cannot canonicalize an empty string")
    words = text.split(" ")
    i = 0
    while i < len(words) and words[i] in DETERMINERS:
        i += 1
    return " ".join(words[i:]) or text


def canonicalize_relation(surface: str) -> str:
    text = _WS.sub(" ", surface).strip().lower()
    if not text:
        raise ValueError("cannot canonicalize an empty relation")
    return text


@dataclass(frozen=True)
class Triple:
    head: str
    relation: str
    tail: str
    head_surface: str
    relation_surface: str
    tail_surface: str
    score: float
    patent_id: str
    sentence_index: int
    relation_is_phrasal: bool = False

    def __post_init__(self):
        if not (self.head and self.relation and self.tail):
            raise ValueError("canonical strings must be non-empty")
        if self.score < 0:
            raise ValueError("score must be non-negative")

    @classmethod
    def from_surface(cls, head, relation, tail, score, patent_id, sentence_index, relation_is_phrasal=False):
        return cls(
            canonicalize(head), canonicalize_relation(relation), canonicalize(tail),
            head, relation, tail, float(score), patent_id, sentence_index, relation_is_phrasal,
        )

    @property
    def key(self) -> tuple[str, str, str]:
        return self.head, self.relation, self.tail

    def sort_key(self):
        return (self.head, self.relation, self.tail, self.patent_id, self.sentence_index,
                self.head_surface, self.relation_surface, self.tail_surface, self.score, self.relation_is_phrasal)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in TRIPLE_FIELDS}


@dataclass
class EntityInfo:
    surfaces: set[str] = field(default_factory=set)
    frequency: int = 0


@dataclass(frozen=True)
class KgStats:
    n_patents: int = 0
    n_entities: int = 0
    n_edges: int = 0
    n_phrasal_verbs: int = 0


class KnowledgeGraph:
    """Immutable-by-convention graph; ``add_triples``/``merge`` return new graphs."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self.triples: tuple[Triple, ...] = ()
        self.entities: dict[str, EntityInfo] = {}
        self.relation_stats: Counter = Counter()
        self.phrasal_relations: set[str] = set()
        self._ingest(triples)

    def _ingest(self, triples: Iterable[Triple]):
        new = tuple(triples)
        for t in new:
            for name, surface in ((t.head, t.head_surface), (t.tail, t.tail_surface)):
                info = self.entities.setdefault(name, EntityInfo())
                info.surfaces.add(surface)
                info.frequency += 1
            self.relation_stats[t.relation] += 1
            if t.relation_is_phrasal:
                self.phrasal_relations.add(t.relation)
        self.triples = self.triples + new

    def copy(self) -> "KnowledgeGraph":
        return KnowledgeGraph(self.triples)

    def __len__(self) -> int:
        return len(self.triples)

    def canonical_triples(self) -> list[Triple]:
        return sorted(self.triples, key=Triple.sort_key)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.canonical_triples() == other.canonical_triples()

    def __repr__(self) -> str:
        return f"KnowledgeGraph(entities={len(self.entities)}, edges={len(self.triples)})"


def add_triples(kg: KnowledgeGraph, triples: Iterable[Triple]) -> KnowledgeGraph:
    out = kg.copy()
    out._ingest(triples)
    return out


def merge(a: KnowledgeGraph, b: KnowledgeGraph) -> KnowledgeGraph:
    return KnowledgeGraph(a.triples + b.triples)


def stats(kg: KnowledgeGraph) -> KgStats:
    return KgStats(
        n_patents=len({t.patent_id for t in kg.triples}),
        n_entities=len(kg.entities),
        n_edges=len(kg.triples),
        n_phrasal_verbs=sum(1 for t in kg.triples if t.relation_is_phrasal),
    )


def query_neighbors(kg: KnowledgeGraph, entity: str, depth: int = 1) -> KnowledgeGraph:
    """Triples within ``depth`` undirected hops of ``entity``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    start = canonicalize(entity)
    if start not in kg.entities:
        return KnowledgeGraph()
    touching: dict[str, list[int]] = {}
    for i, t in enumerate(kg.triples):
        touching.setdefault(t.head, []).append(i)
        if t.tail != t.head:
            touching.setdefault(t.tail, []).append(i)
    seen = {start}
    picked: set[int] = set()
    queue = deque([(start, 0)])
    while queue:
        node, d = queue.popleft()
        if d == depth:
            continue
        for i in touching.get(node, ()):
            picked.add(i)
            t = kg.triples[i]
            for nxt in (t.head, t.tail):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append((nxt, d + 1))
    return KnowledgeGraph(kg.triples[i] for i in sorted(picked))


def save(kg: KnowledgeGraph, sink: TextIO) -> None:
    for t in kg.canonical_triples():
        sink.write(json.dumps(t.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def triple_from_json(d: dict) -> Triple:
    missing = [k for k in TRIPLE_FIELDS if k not in d]
    if missing:
        raise ValueError(f"missing field(s): {', '.join(missing)}")
    return Triple(
        head=d["head"], relation=d["relation"], tail=d["tail"],
        head_surface=d["head_surface"], relation_surface=d["relation_surface"], tail_surface=d["tail_surface"],
        score=float(d["score"]), patent_id=str(d["patent_id"]), sentence_index=int(d["sentence_index"]),
        relation_is_phrasal=bool(d["relation_is_phrasal"]),
    )


def read_triples(source: TextIO) -> list[Triple]:
    triples = []
    for lineno, line in enumerate(source, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            if not isinstance(d, dict):
                raise ValueError("not a JSON object")
            triples.append(triple_from_json(d))
        except (ValueError, TypeError) as e:
            raise KgFormatError(lineno, str(e)) from None
    return triples


def load(source: TextIO) -> KnowledgeGraph:
    return KnowledgeGraph(read_triples(source))


def save_path(kg: KnowledgeGraph, path: str | Path) -> Path:
    """Write ``<path>`` (triples JSONL) and ``<path>.stats.json``."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        save(kg, f)
    stats_path = path.with_name(path.name + ".stats.json")
    stats_path.write_text(json.dumps(asdict(stats(kg)), indent=2) + "\n", encoding="utf-8")
    return stats_path


def load_path(path: str | Path) -> KnowledgeGraph:
    with Path(path).open(encoding="utf-8") as f:
        return load(f)
