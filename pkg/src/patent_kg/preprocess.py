"""Sentence splitting, tokenization and word-unit merging.

A sentence becomes a list of :class:`WordUnit` objects laid over the parser's
token sequence: noun chunks and phrasal verbs are merged into single units,
everything else stays a one-token ``WORD`` unit.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Protocol, Sequence

# Universal coarse tags. Providers may emit any of these; unknown tags map to OTHER.
COARSE_POS = frozenset(
    "NOUN PROPN VERB AUX ADP PART ADV ADJ DET NUM PUNCT PRON CCONJ SCONJ INTJ SYM X SPACE OTHER".split()
)

# Hyphen between two letters is an infix that must NOT split a word.
LETTER_HYPHEN = r"(?<=[^\W\d_])-(?=[^\W\d_])"

_WORD_RE = re.compile(
    r"[^\W_]+(?=n't\b)"  # "does" in "doesn't"
    r"|n't\b"
    r"|'(?:s|re|ve|ll|d|m)\b"
    rf"|[^\W_]+(?:{LETTER_HYPHEN}[^\W_]+)*"
    r"|\S",
    re.IGNORECASE,
)
# base segmenter: sentence-final punctuation followed by whitespace
_SENT_END_RE = re.compile(r"(?<=[.!?])\s+")


class ParseError(RuntimeError):
    pass


class UnitKind(str, Enum):
    NOUN_PHRASE = "NOUN_PHRASE"
    PHRASAL_VERB = "PHRASAL_VERB"
    WORD = "WORD"


@dataclass(frozen=True)
class Token:
    text: str
    pos: str
    dep: str
    head_index: int
    char_span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class WordUnit:
    text: str
    kind: UnitKind
    token_span: tuple[int, int]
    unit_pos: str

    @property
    def start(self) -> int:
        return self.token_span[0]

    @property
    def end(self) -> int:
        return self.token_span[1]

    def __len__(self) -> int:
        return self.end - self.start


@dataclass
class ProcessedSentence:
    tokens: list[Token]
    units: list[WordUnit]
    abstract_id: str = ""
    sentence_index: int = 0
    text: str = ""

    @property
    def unit_texts(self) -> list[str]:
        return [u.text for u in self.units]


@dataclass
class Parse:
    """Raw provider output for one sentence."""

    tokens: list[dict]
    noun_chunks: list[tuple[int, int]] = field(default_factory=list)


class ParseProvider(Protocol):
    # None means safe to call from several workers at once
    max_concurrency: int | None

    def parse(self, sentence: str) -> Parse: ...


def split_words(text: str) -> list[tuple[str, int, int]]:
    """Reference tokenizer: whitespace + punctuation split, letter-hyphen-letter kept whole."""
    return [(m.group(), m.start(), m.end()) for m in _WORD_RE.finditer(text)]


def default_segmenter(text: str) -> list[str]:
    return [s for s in _SENT_END_RE.split(text) if s.strip()]


def split_sentences(abstract: str, segmenter=None) -> list[str]:
    """Split an abstract into sentences, adding ';' as an extra boundary.

    The ``;`` characters are consumed; sentence-final punctuation stays with
    its sentence. ``segmenter`` is the base splitter (defaults to a
    punctuation rule); it only ever sees ';'-free text.
    """
    segmenter = segmenter or default_segmenter
    out = []
    for piece in abstract.split(";"):
        if not piece.strip():
            continue
        out.extend(s.strip() for s in segmenter(piece) if s.strip())
    return out


def _normalize_pos(pos: str) -> str:
    pos = (pos or "").upper()
    return pos if pos in COARSE_POS else "OTHER"


def align_tokens(sentence: str, raw_tokens: Sequence[dict]) -> list[Token]:
    """Attach character spans to provider tokens and validate head indices."""
    tokens = []
    cursor = 0
    n = len(raw_tokens)
    for i, t in enumerate(raw_tokens):
        text = t["text"]
        start = sentence.find(text, cursor)
        if start < 0 or sentence[cursor:start].strip():
            raise ParseError(f"token {i} {text!r} does not align with sentence {sentence!r}")
        head = int(t.get("head_index", i))
        if not 0 <= head < n:
            raise ParseError(f"token {i} {text!r} has head_index {head} outside [0, {n})")
        end = start + len(text)
        tokens.append(Token(text, _normalize_pos(t.get("pos", "")), t.get("dep", ""), head, (start, end)))
        cursor = end
    if sentence[cursor:].strip():
        raise ParseError(f"untokenized trailing text {sentence[cursor:]!r}")
    return tokens


def tokenize(sentence: str, provider: ParseProvider) -> list[Token]:
    return _parse(sentence, provider)[0]


def _parse(sentence: str, provider: ParseProvider) -> tuple[list[Token], list[tuple[int, int]]]:
    if not sentence.strip():
        raise ParseError("cannot tokenize an empty sentence")
    try:
        parse = provider.parse(sentence)
    except ParseError:
        raise
    except Exception as e:
        raise ParseError(f"parse provider failed on {sentence!r}: {e}") from e
    return align_tokens(sentence, parse.tokens), [tuple(c) for c in parse.noun_chunks]


def _unit(tokens: Sequence[Token], start: int, end: int, kind: UnitKind, pos: str | None = None) -> WordUnit:
    text = " ".join(t.text for t in tokens[start:end])
    if pos is None:
        pos = _span_head(tokens, start, end).pos
    return WordUnit(text, kind, (start, end), pos)


def _span_head(tokens: Sequence[Token], start: int, end: int) -> Token:
    # syntactic head of a span: the token whose head lies outside the span (or is itself)
    for i in range(end - 1, start - 1, -1):
        h = tokens[i].head_index
        if h == i or not start <= h < end:
            return tokens[i]
    return tokens[end - 1]


def merge_noun_phrases(tokens: Sequence[Token], chunk_spans: Iterable[tuple[int, int]]) -> list[WordUnit]:
    spans = sorted(tuple(s) for s in chunk_spans)
    for s, e in spans:
        if not 0 <= s < e <= len(tokens):
            raise ParseError(f"noun chunk {(s, e)} out of range for {len(tokens)} tokens")
    for a, b in zip(spans, spans[1:]):
        if b[0] < a[1]:
            raise ParseError(f"overlapping noun chunks {a} and {b}")
    return [_unit(tokens, s, e, UnitKind.NOUN_PHRASE) for s, e in spans]


def merge_phrasal_verbs(tokens: Sequence[Token]) -> list[WordUnit]:
    """Merge each VERB with its ``prt`` particles into one PHRASAL_VERB unit.

    Only contiguous verb+particle runs are merged ("turn the light off" is
    left alone, the object would otherwise end up inside the relation).
    """
    particles: dict[int, list[int]] = {}
    for i, t in enumerate(tokens):
        if t.dep == "prt" and tokens[t.head_index].pos == "VERB" and t.head_index != i:
            particles.setdefault(t.head_index, []).append(i)
    units = []
    for verb, parts in sorted(particles.items()):
        members = {verb, *parts}
        start, end = min(members), max(members) + 1
        if end - start != len(members):
            continue
        units.append(_unit(tokens, start, end, UnitKind.PHRASAL_VERB, "VERB"))
    return units


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def assemble_units(tokens: Sequence[Token], chunk_spans: Iterable[tuple[int, int]]) -> list[WordUnit]:
    nps = merge_noun_phrases(tokens, chunk_spans)
    units = list(nps)
    # noun chunks win span conflicts
    verbs = [v for v in merge_phrasal_verbs(tokens) if not any(_overlaps(v.token_span, n.token_span) for n in nps)]
    covered = [False] * len(tokens)
    for u in units:
        for i in range(u.start, u.end):
            covered[i] = True

    # infinitival marker directly before its verb: "to receive"
    verb_at = {v.start: v for v in verbs}
    for i in range(1, len(tokens)):
        marker, verb = tokens[i - 1], tokens[i]
        if (
            verb.pos in ("VERB", "AUX")
            and marker.pos == "PART"
            and marker.text.lower() == "to"
            and marker.head_index == i
            and not covered[i - 1]
            and not covered[i]
            and not any(v.start <= i - 1 < v.end for v in verbs)
        ):
            if i in verb_at:
                old = verb_at.pop(i)
                verbs.remove(old)
                new = _unit(tokens, i - 1, old.end, UnitKind.PHRASAL_VERB, "VERB")
            elif any(v.start <= i < v.end for v in verbs):
                continue
            else:
                new = _unit(tokens, i - 1, i + 1, UnitKind.WORD, verb.pos)
            verbs.append(new)
            verb_at[new.start] = new

    for v in verbs:
        units.append(v)
        for i in range(v.start, v.end):
            covered[i] = True
    for i, c in enumerate(covered):
        if not c:
            units.append(_unit(tokens, i, i + 1, UnitKind.WORD))
    units.sort(key=lambda u: u.start)
    return units


def preprocess_sentence(sentence: str, provider: ParseProvider, abstract_id: str = "", index: int = 0) -> ProcessedSentence:
    tokens, chunks = _parse(sentence, provider)
    return ProcessedSentence(tokens, assemble_units(tokens, chunks), abstract_id, index, sentence)


def _sentence_key(s: str) -> str:
    return " ".join(s.split())


class FixtureParseProvider:
    """Serves pre-computed parses from the JSON fixture format.

    Each entry is ``{"sentence", "tokens": [{"text", "pos", "dep",
    "head_index"}], "noun_chunks": [[start, end], ...]}``; lookups ignore
    whitespace differences.
    """

    max_concurrency = None

    def __init__(self, entries: Iterable[dict]):
        self._entries: dict[str, dict] = {}
        for e in entries:
            self._entries[_sentence_key(e["sentence"])] = e

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureParseProvider":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data if isinstance(data, list) else [data])

    def __contains__(self, sentence: str) -> bool:
        return _sentence_key(sentence) in self._entries

    def parse(self, sentence: str) -> Parse:
        try:
            e = self._entries[_sentence_key(sentence)]
        except KeyError:
            raise ParseError(f"no fixture parse for sentence {sentence!r}") from None
        return Parse(list(e["tokens"]), [tuple(c) for c in e.get("noun_chunks", [])])


class SpacyParseProvider:
    """spaCy-backed parser with the letter-hyphen infix rule removed.

    Requires ``spacy`` and an installed pipeline (``en_core_web_sm`` by default).
    """

    max_concurrency = 1

    def __init__(self, model: str = "en_core_web_sm", nlp=None):
        if nlp is None:
            try:
                import spacy
            except ImportError as e:
                raise RuntimeError("spacy is not installed; install patent-kg[spacy]") from e
            nlp = spacy.load(model)
        self.nlp = nlp
        self._keep_letter_hyphens()

    def _keep_letter_hyphens(self):
        from spacy.util import compile_infix_regex

        infixes = [p for p in self.nlp.Defaults.infixes if not _splits_letter_hyphen(p)]
        self.nlp.tokenizer.infix_finditer = compile_infix_regex(infixes).finditer

    def sentences(self, text: str) -> list[str]:
        return [s.text for s in self.nlp(text).sents]

    def parse(self, sentence: str) -> Parse:
        doc = self.nlp(sentence)
        tokens = [
            {"text": t.text, "pos": t.pos_, "dep": t.dep_, "head_index": t.head.i}
            for t in doc
            if not t.is_space
        ]
        chunks = [(c.start, c.end) for c in doc.noun_chunks]
        return Parse(tokens, chunks)


def _splits_letter_hyphen(pattern: str) -> bool:
    try:
        rx = re.compile(pattern)
    except re.error:
        return False
    return any(rx.search(w) for w in ("H-theorem", "mother-in-law", "a-b"))
