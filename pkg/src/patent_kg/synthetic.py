"""Random fixture corpora for smoke runs and property tests.

Everything here is seeded and deterministic. The sentences are not real
English; they only need plausible tag layouts.
"""
from __future__ import annotations

import numpy as np

from .corpus import PatentRecord
from .preprocess import ProcessedSentence, Token, UnitKind, WordUnit

NOUNS = ["valve", "rotor", "shaft", "relay", "sensor", "bearing", "nozzle", "piston", "housing", "magnet",
         "spring", "chamber", "boiler", "module", "cabinet", "turbine", "gear", "lamp", "pump", "fan"]
MODIFIERS = ["magnetic", "hydraulic", "output", "input", "thermal", "flow", "pressure", "control"]
VERBS = ["drives", "holds", "comprises", "connects", "supports", "receives", "rotates", "heats", "seals", "moves"]
PARTICLES = ["up", "out", "off", "down"]
PREPS = ["in", "on", "with", "through", "between"]
ADVERBS = ["quickly", "firmly", "separately", "electrically"]


def row_stochastic(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.random((n, n)) + 1e-3
    return m / m.sum(axis=1, keepdims=True)


def _np_tokens(rng, toks):
    words = [("the" if rng.random() < 0.5 else "a", "DET", "det")]
    if rng.random() < 0.5:
        words.append((str(rng.choice(MODIFIERS)), "ADJ" if rng.random() < 0.5 else "NOUN", "amod"))
    words.append((str(rng.choice(NOUNS)), "NOUN", "dobj"))
    start = len(toks)
    head = start + len(words) - 1
    for text, pos, dep in words:
        toks.append({"text": text, "pos": pos, "dep": dep, "head_index": head})
    toks[head]["head_index"] = head
    return start, len(toks)


def _relation_tokens(rng, toks):
    for _ in range(int(rng.integers(1, 4))):
        kind = rng.random()
        i = len(toks)
        if kind < 0.45:
            toks.append({"text": str(rng.choice(VERBS)), "pos": "VERB", "dep": "ROOT", "head_index": i})
            if rng.random() < 0.3:
                toks.append({"text": str(rng.choice(PARTICLES)), "pos": "ADP", "dep": "prt", "head_index": i})
        elif kind < 0.75:
            toks.append({"text": str(rng.choice(PREPS)), "pos": "ADP", "dep": "prep", "head_index": i})
        else:
            toks.append({"text": str(rng.choice(ADVERBS)), "pos": "ADV", "dep": "advmod", "head_index": i})


def random_sentence(rng: np.random.Generator, n_np: int | None = None) -> tuple[dict, dict]:
    """One sentence as a (parse fixture entry, token attention fixture entry) pair."""
    n_np = n_np or int(rng.integers(2, 5))
    toks: list[dict] = []
    chunks = []
    for k in range(n_np):
        chunks.append(list(_np_tokens(rng, toks)))
        if k < n_np - 1:
            _relation_tokens(rng, toks)
    toks.append({"text": ".", "pos": "PUNCT", "dep": "punct", "head_index": len(toks)})
    sentence = " ".join(t["text"] for t in toks[:-1]) + "."
    parse = {"sentence": sentence, "tokens": toks, "noun_chunks": chunks}
    texts = [t["text"] for t in toks]
    attn = {"units_or_tokens": texts, "matrix": row_stochastic(rng, len(texts)).round(6).tolist()}
    return parse, attn


def synthetic_corpus(n_abstracts: int = 20, seed: int = 0, sentences=(1, 4)):
    """Records plus the parse and attention fixture entries covering them."""
    rng = np.random.default_rng(seed)
    records, parses, attns = [], [], []
    for a in range(n_abstracts):
        sents = []
        for _ in range(int(rng.integers(sentences[0], sentences[1] + 1))):
            p, m = random_sentence(rng)
            sents.append(p["sentence"])
            parses.append(p)
            attns.append(m)
        pid = f"SYN{a:04d}"
        records.append(PatentRecord(pid, pid, pid, ("F16C32/04",), f"synthetic {a}", " ".join(sents), 2019))
    return records, parses, attns


def random_processed_sentence(rng: np.random.Generator, n_units: int | None = None) -> ProcessedSentence:
    """Single-token units with random kinds and tags; matrix-free."""
    n = n_units or int(rng.integers(2, 12))
    tags = ["NOUN", "VERB", "AUX", "ADP", "PART", "ADV", "DET", "ADJ", "PUNCT"]
    tokens, units = [], []
    for i in range(n):
        pos = str(rng.choice(tags))
        dep = "neg" if pos == "PART" and rng.random() < 0.3 else "dep"
        kind = UnitKind.NOUN_PHRASE if pos == "NOUN" else UnitKind.WORD
        if pos == "VERB" and rng.random() < 0.2:
            kind = UnitKind.PHRASAL_VERB
        text = f"w{i}"
        tokens.append(Token(text, pos, dep, i))
        units.append(WordUnit(text, kind, (i, i + 1), pos))
    return ProcessedSentence(tokens, units, "RND", 0, " ".join(u.text for u in units))
