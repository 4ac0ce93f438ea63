import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from patent_kg.attention import (
    AttentionConfig,
    AttentionError,
    BertAttentionProvider,
    FixtureAttentionProvider,
    OverLengthError,
    ProviderConfigError,
    TokenAttention,
    WordAttention,
    aggregate_spans,
    aggregate_to_words,
    compute_token_attention,
    dump_attention,
    expand_unit_matrix,
)
from patent_kg.preprocess import Token, UnitKind, WordUnit, preprocess_sentence
from patent_kg.synthetic import row_stochastic

from conftest import HUB_SENTENCE, load_fixture


def units_for(spans):
    return [WordUnit(f"u{k}", UnitKind.WORD, s, "NOUN") for k, s in enumerate(spans)]


def toks(*texts):
    return [Token(t, "NOUN", "dep", i) for i, t in enumerate(texts)]


def projection_oracle(A, spans):
    """Membership matrix P: out = diag(1/|u|) P^T A P."""
    n = A.shape[0]
    P = np.zeros((n, len(spans)))
    for k, (s, e) in enumerate(spans):
        P[s:e, k] = 1.0
    return np.diag(1.0 / P.sum(axis=0)) @ P.T @ A @ P


def random_partition(rng, n):
    cuts = sorted(rng.choice(np.arange(1, n), size=rng.integers(0, n), replace=False)) if n > 1 else []
    bounds = [0, *cuts, n]
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:])]


def test_config_defaults_and_validation():
    cfg = AttentionConfig()
    assert (cfg.layer, cfg.head_aggregation) == (9, "mean")
    with pytest.raises(ValueError):
        AttentionConfig(layer=0)
    with pytest.raises(ValueError):
        AttentionConfig(head_aggregation="max")


def test_aggregate_worked_example():
    A = TokenAttention(["a", "b", "c"], [[0.2, 0.3, 0.5], [0.4, 0.4, 0.2], [0.1, 0.6, 0.3]])
    W = aggregate_to_words(A, units_for([(0, 2), (2, 3)]))
    np.testing.assert_allclose(W.matrix, [[0.65, 0.35], [0.70, 0.30]], atol=1e-12)


def test_aggregate_identity_partition():
    rng = np.random.default_rng(1)
    A = row_stochastic(rng, 6)
    W = aggregate_to_words(TokenAttention(list("abcdef"), A), units_for([(i, i + 1) for i in range(6)]))
    assert np.array_equal(W.matrix, A)


def test_aggregate_span_mismatch():
    A = TokenAttention(["a", "b", "c"], np.eye(3))
    with pytest.raises(AttentionError):
        aggregate_to_words(A, units_for([(0, 2)]))
    with pytest.raises(AttentionError):
        aggregate_to_words(A, units_for([(0, 1), (2, 3)]))


def test_aggregate_row_sums_and_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 13))
        A = row_stochastic(rng, n)
        spans = random_partition(rng, n)
        out = aggregate_spans(A, spans)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-9)
        np.testing.assert_allclose(out, projection_oracle(A, spans), atol=1e-12)


@settings(max_examples=100)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_row_mass_is_mean_of_constituent_rows(n, seed):
    # not row-stochastic: arbitrary non-negative rows
    rng = np.random.default_rng(seed)
    A = rng.random((n, n)) * rng.random((n, 1)) * 3
    spans = random_partition(rng, n)
    out = aggregate_spans(A, spans)
    for k, (s, e) in enumerate(spans):
        assert out[k].sum() == pytest.approx(A[s:e].sum(axis=1).mean(), abs=1e-9)


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_row_mean_and_column_sum_commute(n, seed):
    rng = np.random.default_rng(seed)
    A = row_stochastic(rng, n)
    spans = random_partition(rng, n)
    rows_first = np.array([A[s:e].mean(axis=0) for s, e in spans])
    rows_first = np.stack([rows_first[:, s:e].sum(axis=1) for s, e in spans], axis=1)
    np.testing.assert_allclose(rows_first, aggregate_spans(A, spans), atol=1e-12)


def test_expand_unit_matrix_round_trip():
    rng = np.random.default_rng(3)
    spans = [(0, 2), (2, 3), (3, 6)]
    W = row_stochastic(rng, 3)
    T = expand_unit_matrix(W, units_for(spans))
    assert T.shape == (6, 6)
    np.testing.assert_allclose(aggregate_spans(T, spans), W, atol=1e-15)


def test_fixture_provider_single_token():
    p = FixtureAttentionProvider([{"units_or_tokens": ["rotor"], "matrix": [[1.0]]}])
    out = compute_token_attention(toks("rotor"), AttentionConfig(), p)
    assert out.matrix.tolist() == [[1.0]]


def test_fixture_provider_unit_level_matrix_unchanged():
    entry = load_fixture("hub_attn")
    p = FixtureAttentionProvider([entry])
    out = compute_token_attention(toks(*entry["units_or_tokens"]), AttentionConfig(), p)
    assert np.array_equal(out.matrix, np.array(entry["matrix"]))


def test_fixture_provider_via_units(hub):
    parse, attn = hub
    ps = preprocess_sentence(HUB_SENTENCE, parse)
    tok = compute_token_attention(ps.tokens, AttentionConfig(), attn, ps.units)
    assert tok.matrix.shape == (12, 12)
    W = aggregate_to_words(tok, ps.units)
    np.testing.assert_allclose(W.matrix, load_fixture("hub_attn")["matrix"], atol=1e-12)


def test_fixture_provider_rejects_bad_entries():
    with pytest.raises(AttentionError):
        FixtureAttentionProvider([{"units_or_tokens": ["a", "b"], "matrix": [[1.0]]}])
    with pytest.raises(AttentionError):
        FixtureAttentionProvider([{"units_or_tokens": ["a"], "matrix": [[-1.0]]}])
    p = FixtureAttentionProvider([])
    with pytest.raises(AttentionError, match="no fixture"):
        compute_token_attention(toks("a"), AttentionConfig(), p)


def test_dump_hub_tsv():
    entry = load_fixture("hub_attn")
    buf = io.StringIO()
    dump_attention(WordAttention(entry["units_or_tokens"], entry["matrix"]), buf)
    lines = buf.getvalue().splitlines()
    header = lines[0].split("\t")
    assert header == ["", *entry["units_or_tokens"]]
    rows = {l.split("\t")[0]: l.split("\t")[1:] for l in lines[1:]}
    assert rows["comprises"][header.index("a bearingless hub assembly") - 1] == "0.4030"
    assert rows["a tube magnet"] == ["0.0076", "0.0250", "0.0177", "0.6368", "0.3001"]


def test_dump_small_cases():
    buf = io.StringIO()
    dump_attention(WordAttention(["rotor"], [[1.0]]), buf)
    assert buf.getvalue() == "\trotor\nrotor\t1.0000\n"
    buf = io.StringIO()
    dump_attention(WordAttention([], np.zeros((0, 0))), buf)
    assert buf.getvalue() == "\n"


# -- encoder-backed provider, exercised with a tiny randomly initialised model --

VOCAB = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "the", "sensor", "send", "##s", "a", "signal",
         "mag", "##net", "h", "-", "theorem", "."]


@pytest.fixture(scope="module")
def tiny_bert():
    torch = pytest.importorskip("torch")
    transformers = pytest.importorskip("transformers")
    tok = transformers.BertTokenizer(vocab={w: i for i, w in enumerate(VOCAB)})
    if not tok.is_fast:
        pytest.skip("fast tokenizer unavailable")
    torch.manual_seed(0)
    cfg = transformers.BertConfig(
        vocab_size=len(VOCAB), hidden_size=16, num_hidden_layers=12, num_attention_heads=4,
        intermediate_size=32, attn_implementation="eager",
    )
    model = transformers.BertModel(cfg)
    return BertAttentionProvider("tiny", model=model, tokenizer=tok), model, tok


def test_bert_provider_alignment(tiny_bert):
    import torch

    provider, model, tok = tiny_bert
    words = ["the", "sensor", "sends", "a", "magnet"]
    out = provider.token_attention(toks(*words), AttentionConfig(layer=9))
    assert out.matrix.shape == (5, 5)
    # independent recomputation: pieces [CLS] the sensor send ##s a mag ##net [SEP]
    enc = tok(words, is_split_into_words=True, return_tensors="pt")
    with torch.no_grad():
        raw = model(**enc, output_attentions=True).attentions[8][0].mean(0).double().numpy()
    inner = raw[1:-1, 1:-1]
    expected = projection_oracle(inner, [(0, 1), (1, 2), (2, 4), (4, 5), (5, 7)])
    np.testing.assert_allclose(out.matrix, expected, atol=1e-12)
    # special-marker mass removed without renormalising
    assert (out.matrix.sum(axis=1) <= 1 + 1e-9).all()


def test_bert_provider_layer_and_length_limits(tiny_bert):
    provider = tiny_bert[0]
    with pytest.raises(ProviderConfigError):
        provider.token_attention(toks("the"), AttentionConfig(layer=13))
    provider_short = BertAttentionProvider("tiny", model=tiny_bert[1], tokenizer=tiny_bert[2])
    provider_short.max_length = 4
    with pytest.raises(OverLengthError):
        provider_short.token_attention(toks("the", "sensor", "sends"), AttentionConfig())
