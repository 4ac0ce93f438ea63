"""Run the two worked examples from the bundled fixtures and print every
expanded candidate with its score, then the facts that survive."""
import argparse
import json
from pathlib import Path

from patent_kg.attention import AttentionConfig, FixtureAttentionProvider, aggregate_to_words, compute_token_attention
from patent_kg.corpus import PatentRecord
from patent_kg.matcher import MatchConfig, enumerate_pairs, expand_beam
from patent_kg.pipeline import extract_from_abstract
from patent_kg.preprocess import FixtureParseProvider, preprocess_sentence

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
EXAMPLES = {
    "levitate": "the magnetic force provided levitates the shaft",
    "hub": "a bearingless hub assembly comprises a rim to receive a tube magnet",
}


def run(name, sentence, beam_size):
    parse = FixtureParseProvider.from_file(FIXTURES / f"{name}_parse.json")
    attn = FixtureAttentionProvider.from_file(FIXTURES / f"{name}_attn.json")
    ps = preprocess_sentence(sentence, parse, name, 0)
    tok = compute_token_attention(ps.tokens, AttentionConfig(), attn, ps.units)
    wa = aggregate_to_words(tok, ps.units)
    cfg = MatchConfig(beam_size=beam_size)
    print(f"== {name}: {sentence}")
    for pair in enumerate_pairs(ps):
        for f in expand_beam(pair, wa, ps, cfg):
            print(f"  candidate {f.score:.4f}  ({f.head}, {f.relation}, {f.tail})")
    rec = PatentRecord(name, name, name, ("F16C",), "", sentence, 2020)
    for t in extract_from_abstract(rec, parse, attn, match_cfg=cfg):
        print(f"  kept      {t.score:.4f}  {json.dumps([t.head, t.relation, t.tail])}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beam-size", type=int, default=2)
    args = ap.parse_args()
    for name, sentence in EXAMPLES.items():
        run(name, sentence, args.beam_size)


if __name__ == "__main__":
    main()
