"""Token- and word-level attention matrices.

Rows are the "from" side and columns the "to" side: ``A[i][j]`` is the
attention weight unit ``i`` puts on unit ``j``.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence, TextIO

import numpy as np

from .preprocess import Token, WordUnit

log = logging.getLogger(__name__)


class AttentionError(RuntimeError):
    pass


class OverLengthError(AttentionError):
    """Sentence does not fit the encoder; the caller skips it."""


class ProviderConfigError(AttentionError):
    """Model or provider could not be set up. Fatal for a run."""


@dataclass(frozen=True)
class AttentionConfig:
    layer: int = 9  # 1-based
    head_aggregation: str = "mean"
    model_id: str = "bert-base-uncased"

    def __post_init__(self):
        if self.layer < 1:
            raise ValueError("layer is 1-based and must be >= 1")
        if self.head_aggregation != "mean":
            raise ValueError(f"unsupported head aggregation {self.head_aggregation!r}")


@dataclass
class TokenAttention:
    tokens: list[str]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        n = len(self.tokens)
        if self.matrix.shape != (n, n):
            raise AttentionError(f"matrix shape {self.matrix.shape} does not match {n} tokens")


@dataclass
class WordAttention:
    units: list[str]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        n = len(self.units)
        if self.matrix.shape != (n, n):
            raise AttentionError(f"matrix shape {self.matrix.shape} does not match {n} units")

    def __getitem__(self, ij):
        return self.matrix[ij]


class AttentionProvider(Protocol):
    max_concurrency: int | None

    def token_attention(
        self, tokens: Sequence[Token], config: AttentionConfig, units: Sequence[WordUnit] | None = None
    ) -> TokenAttention: ...


def aggregate_spans(matrix: np.ndarray, spans: Sequence[tuple[int, int]]) -> np.ndarray:
    """Collapse index groups: mean over grouped rows, sum over grouped columns."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    pos = 0
    for s, e in spans:
        if s != pos or e <= s:
            raise AttentionError(f"spans do not tile the index range at {(s, e)}")
        pos = e
    if pos != n:
        raise AttentionError(f"spans cover {pos} indices but matrix has {n}")
    if all(e - s == 1 for s, e in spans):
        return matrix.copy()
    m = len(spans)
    # column sums first, then row means
    cols = np.empty((n, m))
    for k, (s, e) in enumerate(spans):
        cols[:, k] = matrix[:, s:e].sum(axis=1)
    out = np.empty((m, m))
    for k, (s, e) in enumerate(spans):
        out[k] = cols[s:e].mean(axis=0)
    return out


def aggregate_to_words(token_attn: TokenAttention, units: Sequence[WordUnit]) -> WordAttention:
    matrix = aggregate_spans(token_attn.matrix, [u.token_span for u in units])
    return WordAttention([u.text for u in units], matrix)


def expand_unit_matrix(matrix: np.ndarray, units: Sequence[WordUnit]) -> np.ndarray:
    """Spread a unit-level matrix over tokens so that aggregation gives it back.

    Every token of unit ``u`` gets row ``u``; a unit's column mass is split
    evenly over its tokens.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    owner = np.concatenate([[k] * len(u) for k, u in enumerate(units)]).astype(int)
    width = np.array([len(units[k]) for k in owner], dtype=np.float64)
    return matrix[np.ix_(owner, owner)] / width[None, :]


def compute_token_attention(
    tokens: Sequence[Token],
    config: AttentionConfig,
    provider: AttentionProvider,
    units: Sequence[WordUnit] | None = None,
) -> TokenAttention:
    attn = provider.token_attention(tokens, config, units)
    if len(attn.tokens) != len(tokens):
        raise AttentionError(f"provider returned {len(attn.tokens)} tokens for a {len(tokens)}-token sentence")
    if (attn.matrix < 0).any():
        raise AttentionError("attention weights must be non-negative")
    return attn


def dump_attention(word_attn: WordAttention, sink: TextIO) -> None:
    units = [u.replace("\t", " ") for u in word_attn.units]
    sink.write("\t".join([""] + units) + "\n")
    for label, row in zip(units, word_attn.matrix):
        sink.write("\t".join([label] + [f"{v:.4f}" for v in row]) + "\n")


class FixtureAttentionProvider:
    """Serves matrices from the JSON fixture format ``{"units_or_tokens", "matrix"}``.

    An entry labelled with the sentence's token texts is returned as-is. An
    entry labelled with unit texts is spread over tokens with
    :func:`expand_unit_matrix`, so word-level aggregation reproduces it.
    """

    max_concurrency = None

    def __init__(self, entries: Iterable[dict]):
        self._entries: dict[tuple[str, ...], np.ndarray] = {}
        for e in entries:
            labels = tuple(e["units_or_tokens"])
            m = np.asarray(e["matrix"], dtype=np.float64)
            if m.shape != (len(labels), len(labels)):
                raise AttentionError(f"fixture matrix for {labels!r} is {m.shape}, expected square {len(labels)}")
            if (m < 0).any():
                raise AttentionError(f"fixture matrix for {labels!r} has negative weights")
            self._entries[labels] = m

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureAttentionProvider":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data if isinstance(data, list) else [data])

    def token_attention(self, tokens, config, units=None) -> TokenAttention:
        texts = tuple(t.text for t in tokens)
        if texts in self._entries:
            return TokenAttention(list(texts), self._entries[texts].copy())
        if units is not None:
            key = tuple(u.text for u in units)
            if key in self._entries:
                return TokenAttention(list(texts), expand_unit_matrix(self._entries[key], units))
        raise AttentionError(f"no fixture attention for {' '.join(texts)!r}")


class BertAttentionProvider:
    """Head-mean attention of one layer of a pretrained encoder.

    Subword pieces are folded back onto pipeline tokens with the same
    mean-rows / sum-columns rule used for phrases. Special-marker rows and
    columns are dropped without renormalizing.
    """

    max_concurrency = 1

    def __init__(self, model_id: str = "bert-base-uncased", model=None, tokenizer=None, cache_dir: str | None = None):
        self.model_id = model_id
        if model is None or tokenizer is None:
            try:
                from transformers import AutoModel, AutoTokenizer
            except ImportError as e:
                raise ProviderConfigError("transformers is not installed; install patent-kg[bert]") from e
            cache_dir = cache_dir or os.environ.get("PATENT_KG_CACHE")
            try:
                tokenizer = tokenizer or AutoTokenizer.from_pretrained(model_id, cache_dir=cache_dir)
                model = model or AutoModel.from_pretrained(
                    model_id, cache_dir=cache_dir, attn_implementation="eager"
                )
            except Exception as e:
                raise ProviderConfigError(f"could not load encoder {model_id!r}: {e}") from e
        if not getattr(tokenizer, "is_fast", False):
            raise ProviderConfigError("a fast tokenizer is required for subword alignment")
        self.model = model.eval()
        self.tokenizer = tokenizer
        self.n_layers = model.config.num_hidden_layers
        self.max_length = min(getattr(tokenizer, "model_max_length", 512) or 512, model.config.max_position_embeddings)

    def token_attention(self, tokens, config, units=None) -> TokenAttention:
        import torch

        if not 1 <= config.layer <= self.n_layers:
            raise ProviderConfigError(f"layer {config.layer} outside 1..{self.n_layers}")
        words = [t.text for t in tokens]
        enc = self.tokenizer(words, is_split_into_words=True, return_tensors="pt")
        n_pieces = enc["input_ids"].shape[1]
        if n_pieces > self.max_length:
            raise OverLengthError(f"{n_pieces} subword pieces exceed encoder limit {self.max_length}")
        with torch.no_grad():
            out = self.model(**enc, output_attentions=True)
        layer = out.attentions[config.layer - 1][0].mean(dim=0).double().numpy()
        word_ids = enc.word_ids(0)
        keep = [i for i, w in enumerate(word_ids) if w is not None]
        layer = layer[np.ix_(keep, keep)]
        owners = [word_ids[i] for i in keep]
        spans = []
        start = 0
        for w in range(len(words)):
            end = start
            while end < len(owners) and owners[end] == w:
                end += 1
            if end == start:
                raise AttentionError(f"token {words[w]!r} produced no subword pieces")
            spans.append((start, end))
            start = end
        return TokenAttention(words, aggregate_spans(layer, spans))
