"""Recall of benchmark term lists against a graph's entities or relations.

Benchmark files are UTF-8 text::

    % comment
    # Category
    ## Subcategory
    term one
    term two

Recall is ``n / N``: covered terms over all listed terms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable

from .kgstore import canonicalize, canonicalize_relation


class BenchmarkFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class TermBenchmark:
    categories: dict[str, dict[str, list[str]]] = field(default_factory=dict)

    def terms(self) -> list[tuple[str, str, str]]:
        return [
            (cat, sub, term)
            for cat, subs in self.categories.items()
            for sub, terms in subs.items()
            for term in terms
        ]

    def __len__(self) -> int:
        return len(self.terms())


@dataclass(frozen=True)
class Recall:
    n: int
    N: int

    @property
    def recall(self) -> float:
        return self.n / self.N if self.N else 0.0

    def to_json(self) -> dict:
        return {"n": self.n, "N": self.N, "recall": self.recall}


@dataclass
class EvalResult:
    total: Recall
    per_category: dict[str, Recall]
    missing: list[str]

    def to_json(self) -> dict:
        return {
            "total": self.total.to_json(),
            "per_category": {k: v.to_json() for k, v in self.per_category.items()},
            "missing": self.missing,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False)

    def table(self) -> str:
        rows = [("Total recall rate", self.total)] + list(self.per_category.items())
        width = max(len(name) for name, _ in rows)
        lines = [f"{'':{width}}  {'n':>5}  {'N':>5}  recall"]
        lines += [f"{name:{width}}  {r.n:>5}  {r.N:>5}  {r.recall:.3f}" for name, r in rows]
        return "\n".join(lines)


def load_benchmark(source: str, canon: Callable[[str], str] = canonicalize) -> TermBenchmark:
    bench = TermBenchmark()
    cat = sub = None
    seen: set[str] = set()
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("## "):
            if cat is None:
                raise BenchmarkFormatError(lineno, "subcategory before any category")
            sub = line[3:].strip()
            bench.categories[cat].setdefault(sub, [])
            seen = {canon(t) for t in bench.categories[cat][sub]}
        elif line.startswith("# "):
            cat = line[2:].strip()
            sub = None
            bench.categories.setdefault(cat, {})
        elif line.startswith("#"):
            raise BenchmarkFormatError(lineno, f"malformed header {line!r}")
        else:
            if sub is None:
                raise BenchmarkFormatError(lineno, f"term {line!r} outside a subcategory")
            if ";" in line:
                raise BenchmarkFormatError(lineno, "terms may not contain ';'")
            key = canon(line)
            if key in seen:
                raise BenchmarkFormatError(lineno, f"duplicate term {line!r} in {sub!r}")
            seen.add(key)
            bench.categories[cat][sub].append(line)
    if not bench.terms():
        raise BenchmarkFormatError(0, "benchmark contains no terms")
    return bench


def bundled_benchmark(name: str = "mechanical_terms") -> str:
    return resources.files("patent_kg").joinpath("data", f"{name}.txt").read_text(encoding="utf-8")


def _recall(items: Iterable[str], benchmark: TermBenchmark, canon: Callable[[str], str]) -> EvalResult:
    have = {canon(x) for x in items if x and x.strip()}
    per_cat: dict[str, list[int]] = {}
    missing = []
    for cat, _, term in benchmark.terms():
        hit = canon(term) in have
        counts = per_cat.setdefault(cat, [0, 0])
        counts[0] += hit
        counts[1] += 1
        if not hit:
            missing.append(term)
    per_category = {c: Recall(n, N) for c, (n, N) in per_cat.items()}
    total = Recall(sum(r.n for r in per_category.values()), sum(r.N for r in per_category.values()))
    return EvalResult(total, per_category, missing)


def recall_rate(entity_set: Iterable[str], benchmark: TermBenchmark) -> EvalResult:
    return _recall(entity_set, benchmark, canonicalize)


def relation_recall(relation_set: Iterable[str], benchmark: TermBenchmark) -> EvalResult:
    # phrasal verbs match whole: "connect to" is not covered by "connect"
    return _recall(relation_set, benchmark, canonicalize_relation)
