import json

import pytest

from patent_kg import kgstore
from patent_kg.cli import main, resolve_config, build_parser
from patent_kg.synthetic import synthetic_corpus

from conftest import HUB_SENTENCE, FIXTURES


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return path


def record(pid, app, earliest, abstract="", cpc=("F16C32/04",), year=2019):
    return {"patent_id": pid, "application_id": app, "earliest_filing_id": earliest, "cpc_codes": list(cpc),
            "title": "", "abstract": abstract, "filing_year": year}


@pytest.fixture
def synthetic_files(tmp_path):
    records, parses, attns = synthetic_corpus(20, seed=11)
    corpus = write_jsonl(tmp_path / "corpus.jsonl", [r.to_json() for r in records])
    (tmp_path / "parse.json").write_text(json.dumps(parses))
    (tmp_path / "attn.json").write_text(json.dumps(attns))
    return tmp_path, corpus


def test_ingest_counts(tmp_path, capsys):
    src = write_jsonl(tmp_path / "in.jsonl", [record("P1", "A1", "A1"), record("P2", "A2", "A1"), record("P3", "A3", "A3")])
    assert main(["ingest", "--corpus", str(src), "--out", str(tmp_path / "out.jsonl")]) == 0
    assert "kept 2 dropped 1" in capsys.readouterr().err
    kept = [json.loads(l)["patent_id"] for l in (tmp_path / "out.jsonl").read_text().splitlines()]
    assert kept == ["P1", "P3"]


def test_ingest_empty_and_missing(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["ingest", "--corpus", str(empty), "--out", str(tmp_path / "o.jsonl")]) == 0
    assert "kept 0" in capsys.readouterr().err
    assert main(["ingest", "--corpus", str(tmp_path / "nope.jsonl")]) == 2
    assert "not found" in capsys.readouterr().err


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_extract_hub(tmp_path):
    corpus = write_jsonl(tmp_path / "c.jsonl", [record("P1", "A1", "A1", HUB_SENTENCE)])
    out = tmp_path / "t.jsonl"
    rc = main(["extract", "--corpus", str(corpus), "--out", str(out),
               "--fixture-parse", str(FIXTURES / "hub_parse.json"), "--fixture-attn", str(FIXTURES / "hub_attn.json")])
    assert rc == 0
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert [(r["head"], r["relation"], r["tail"]) for r in rows] == [
        ("bearingless hub assembly", "comprises", "rim"), ("rim", "to receive", "tube magnet")]
    assert set(rows[0]) == set(kgstore.TRIPLE_FIELDS)


def test_extract_empty_corpus(tmp_path):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text("")
    out = tmp_path / "t.jsonl"
    args = ["extract", "--corpus", str(corpus), "--out", str(out),
            "--fixture-parse", str(FIXTURES / "hub_parse.json"), "--fixture-attn", str(FIXTURES / "hub_attn.json")]
    assert main(args) == 0
    assert out.read_text() == ""


def test_extract_skips_bad_sentence(tmp_path, caplog):
    corpus = write_jsonl(tmp_path / "c.jsonl", [
        record("P1", "A1", "A1", "an unparsed sentence here; " + HUB_SENTENCE),
        record("P2", "A2", "A2", HUB_SENTENCE),
    ])
    out = tmp_path / "t.jsonl"
    rc = main(["extract", "--corpus", str(corpus), "--out", str(out),
               "--fixture-parse", str(FIXTURES / "hub_parse.json"), "--fixture-attn", str(FIXTURES / "hub_attn.json")])
    assert rc == 0
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert {r["patent_id"] for r in rows} == {"P1", "P2"}
    assert "skipped" in caplog.text


def test_extract_jobs_identical(synthetic_files):
    tmp, corpus = synthetic_files
    base = ["extract", "--corpus", str(corpus), "--fixture-parse", str(tmp / "parse.json"),
            "--fixture-attn", str(tmp / "attn.json")]
    assert main(base + ["--out", str(tmp / "j1.jsonl")]) == 0
    assert main(base + ["--out", str(tmp / "j4.jsonl"), "--jobs", "4"]) == 0
    one, four = (tmp / "j1.jsonl").read_text(), (tmp / "j4.jsonl").read_text()
    assert one and one == four


def test_build_query_and_eval(tmp_path, capsys):
    valve = [
        kgstore.Triple.from_surface("output", "connect with", "relay", 1.0, "CN1", 0, True),
        kgstore.Triple.from_surface("millisecond-level", "connect between", "relay", 1.0, "CN1", 1, True),
        kgstore.Triple.from_surface("flow sensor", "connect to", "input end", 1.0, "CN1", 2, True),
    ]
    triples = tmp_path / "t.jsonl"
    triples.write_text("".join(json.dumps(t.to_json()) + "\n" for t in valve))
    kg = tmp_path / "kg.jsonl"
    assert main(["build-kg", str(triples), "--kg", str(kg)]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats == {"n_patents": 1, "n_entities": 5, "n_edges": 3, "n_phrasal_verbs": 3}
    assert (tmp_path / "kg.jsonl.stats.json").exists()

    assert main(["query", "relay", "--kg", str(kg)]) == 0
    out = capsys.readouterr().out
    assert "output\tconnect with\trelay" in out and "millisecond-level\tconnect between\trelay" in out
    assert "flow sensor" not in out

    assert main(["eval-relations", "--kg", str(kg), "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["total"]["n"] == 1 and "connect through" in data["missing"]


def test_eval_entities_162_of_180(tmp_path, capsys):
    bench = tmp_path / "bench.txt"
    lines = []
    for c in range(3):
        lines += [f"# Cat {c}", f"## Sub {c}"] + [f"term {c} {i}" for i in range(60)]
    bench.write_text("\n".join(lines))
    terms = [l for l in lines if not l.startswith("#")]
    ents = tmp_path / "ents.txt"
    ents.write_text("\n".join(terms[:162]))
    assert main(["eval-entities", "--entities", str(ents), "--benchmark", str(bench)]) == 0
    out = capsys.readouterr().out
    assert "0.900" in out.splitlines()[1]


def test_dump_attention_fixture(capsys):
    assert main(["dump-attention", "--fixture-attn", str(FIXTURES / "hub_attn.json")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[2].split("\t") == ["comprises", "0.4030", "0.2188", "0.0124", "0.0078", "0.0006"]


def test_dump_attention_sentence(capsys):
    rc = main(["dump-attention", "--sentence", HUB_SENTENCE, "--fixture-parse", str(FIXTURES / "hub_parse.json"),
               "--fixture-attn", str(FIXTURES / "hub_attn.json")])
    assert rc == 0
    assert capsys.readouterr().out.splitlines()[2].startswith("comprises\t0.4030")


def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({"beam_size": 5, "layer": 10}))
    args = build_parser().parse_args(["extract", "--config", str(cfg_file), "--layer", "11"])
    cfg = resolve_config(args)
    assert (cfg.beam_size, cfg.layer, cfg.jobs) == (5, 11, 1)


def test_bad_config_and_jobs(tmp_path, capsys):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({"colour": "red"}))
    corpus = tmp_path / "c.jsonl"
    corpus.write_text("")
    assert main(["ingest", "--corpus", str(corpus), "--config", str(cfg_file)]) == 2
    assert main(["ingest", "--corpus", str(corpus), "--jobs", "0"]) == 2


def test_malformed_kg_is_runtime_error(tmp_path, capsys):
    kg = tmp_path / "kg.jsonl"
    kg.write_text('{"head": "x"}\n')
    assert main(["query", "x", "--kg", str(kg)]) == 1
    assert "line 1" in capsys.readouterr().err
