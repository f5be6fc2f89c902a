import json
import subprocess
import sys

import pytest

from griffs.alignment import Score
from griffs.cli import main
from griffs.midi import write_smf

from conftest import write_corpus

PLAN = [((0,), (4, 7)), ((0, 3), (9,)), ((0,),), ((0,), (4,), (7,))]


@pytest.fixture
def corpus(tmp_path):
    score = Score.from_pitches("sc1", [48, 50, 43, 45])
    other = Score.from_pitches("sc2", [40, 41])
    takes = {
        ("alice", "sc1"): [PLAN, PLAN],
        ("bob", "sc1"): [[((0, 4, 7),)] * 4, [((0, 4, 7),), ((0, 3, 9),), ((0,),), ((0, 4, 7),)]],
        ("alice", "sc2"): [[((0, 12),), ((0,), (3,))]],
    }
    return write_corpus(tmp_path, {"sc1": score, "sc2": other}, takes)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_extract_json(corpus, capsys):
    d = corpus.parent
    code, out, _ = run(capsys, "extract", d / "sc1.json", d / "alice_sc1_1.mid", d / "alice_sc1_1.alignment.json")
    assert code == 0
    doc = json.loads(out)
    assert [row["griff"] for row in doc["griffs"]] == ["0|4_7", "0_3|9", "0", "0|4|7"]
    assert [row["class"] for row in doc["griffs"]] == ["harmonic", "harmonic", "bass_only", "harmonic"]
    assert doc["performance_id"] == "alice_sc1_1"
    assert '"window_ms": 35.000000' in out


def test_extract_pooled_csv(corpus, capsys):
    d = corpus.parent
    code, out, _ = run(capsys, "extract", d / "sc1.json", d / "alice_sc1_1.mid",
                       d / "alice_sc1_1.alignment.json", "--representation", "pooled", "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["score_note_id,griff,class", "s0,0_4_7,harmonic", "s1,0_3_9,harmonic",
                                "s2,0,bass_only", "s3,0_4_7,harmonic"]


def test_extract_missing_alignment(corpus, capsys):
    d = corpus.parent
    missing = d / "nope.json"
    code, out, err = run(capsys, "extract", d / "sc1.json", d / "alice_sc1_1.mid", missing)
    assert code == 2
    assert str(missing) in err and out == ""


def test_extract_invalid_alignment(corpus, capsys):
    d = corpus.parent
    # alignment of a different take references note ids that do not exist here
    bad = d / "bad.json"
    bad.write_text(json.dumps({"score_id": "sc1", "matches": [
        {"score_note_id": "s0", "performance_note_ids": ["n999"]}]}))
    code, _, err = run(capsys, "extract", d / "sc1.json", d / "alice_sc1_1.mid", bad)
    assert code == 1
    assert "n999" in err


def test_stats(corpus, capsys):
    code, out, _ = run(capsys, "stats", "--manifest", corpus)
    assert code == 0
    doc = json.loads(out)
    ordered = doc["representations"]["ordered"]
    # harmonic griffs: alice sc1 x2 -> 3 each; bob -> 4 + 3; alice sc2 -> 2
    assert ordered["total"] == 15
    assert ordered["filtered_bass_only"] == 3
    assert ordered["types"] == 7
    assert ordered["avg_occurrence"] == pytest.approx(15 / 7, abs=1e-6)
    assert doc["representations"]["pooled"]["types"] == 4


def test_stats_table(corpus, capsys):
    code, out, _ = run(capsys, "stats", "--manifest", corpus, "--format", "table")
    assert code == 0
    assert "Total Griff Types" in out and "2.14" in out


def test_stats_skips_broken_entries(corpus, capsys):
    entries = json.loads(corpus.read_text())
    entries.append(dict(entries[0], performance_path="missing.mid"))
    corpus.write_text(json.dumps(entries))
    code, out, err = run(capsys, "stats", "--manifest", corpus)
    assert code == 0
    assert json.loads(out)["skipped"] == 1
    assert "missing.mid" in err


def test_stats_all_failing(tmp_path, capsys):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps([{"score_path": "x.json", "performance_path": "y.mid",
                                     "alignment_path": "z.json", "player_id": "a", "score_id": "x"}]))
    code, _, _ = run(capsys, "stats", "--manifest", manifest)
    assert code != 0


def test_coverage(corpus, capsys, tmp_path):
    out_path = tmp_path / "cov.csv"
    code, _, _ = run(capsys, "coverage", "--manifest", corpus, "--format", "csv", "--out", out_path, "--svg")
    assert code == 0
    rows = [line.split(",") for line in out_path.read_text().splitlines()[1:]]
    alice_all = [float(r[3]) for r in rows if r[0] == "alice" and r[1] == "all"]
    # alice: 0|4_7 x2, 0_3|9 x2, 0|4|7 x2, 0_12, 0|3 -> 8 griffs
    assert alice_all == pytest.approx([0.25, 0.5, 0.75, 0.875, 1.0])
    assert {r[1] for r in rows if r[0] == "alice"} == {"all", "sc1", "sc2"}
    assert out_path.with_suffix(".svg").read_text().startswith("<svg")


def test_coverage_empty_manifest(tmp_path, capsys):
    manifest = tmp_path / "m.json"
    manifest.write_text("[]")
    code, _, err = run(capsys, "coverage", "--manifest", manifest)
    assert code != 0 and "no performances" in err


def test_similarity(corpus, capsys):
    code, out, err = run(capsys, "similarity", "--manifest", corpus)
    assert code == 0
    doc = json.loads(out)
    assert [(m["score_id"], m["representation"]) for m in doc["matrices"]] == [
        ("sc1", "ordered"), ("sc1", "pooled"), ("sc1", "interval"),
        ("sc2", "ordered"), ("sc2", "pooled"), ("sc2", "interval")]
    sc1 = doc["matrices"][0]
    assert sc1["labels"] == ["alice", "bob"]
    assert all(v is not None for row in sc1["values"] for v in row)
    sc2 = doc["matrices"][3]
    assert sc2["values"] == [[None]] and sc2["errors"]
    assert "single performance" in err


def test_similarity_csv_blocks(corpus, capsys):
    code, out, _ = run(capsys, "similarity", "--manifest", corpus, "--format", "csv",
                       "--representation", "ordered")
    assert code == 0
    blocks = out.strip().split("\n\n")
    assert len(blocks) == 2
    assert blocks[0].splitlines()[0] == "score_id,representation,player_id,alice,bob"
    assert blocks[1].splitlines()[1] == "sc2,ordered,alice,"


def test_align(tmp_path, capsys):
    score = Score.from_pitches("bass", [48, 43])
    (tmp_path / "bass.json").write_text(json.dumps(score.to_json()))
    (tmp_path / "p.mid").write_bytes(write_smf([(0.0, 0.4, 48, 64), (0.0, 0.4, 55, 64),
                                                (1.0, 1.4, 43, 64), (1.1, 1.4, 59, 64)]))
    out_path = tmp_path / "a.json"
    code, _, _ = run(capsys, "align", tmp_path / "bass.json", tmp_path / "p.mid", "--out", out_path)
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["matches"] == [{"score_note_id": "s0", "performance_note_ids": ["n0", "n1"]},
                              {"score_note_id": "s1", "performance_note_ids": ["n2", "n3"]}]


def test_align_unalignable(tmp_path, capsys):
    score = Score.from_pitches("bass", [30])
    (tmp_path / "bass.json").write_text(json.dumps(score.to_json()))
    (tmp_path / "p.mid").write_bytes(write_smf([(0.0, 0.4, 60, 64)]))
    code, _, err = run(capsys, "align", tmp_path / "bass.json", tmp_path / "p.mid")
    assert code == 3 and "unalignable" in err


def test_outputs_are_byte_identical(corpus, capsys):
    first = run(capsys, "similarity", "--manifest", corpus)[1]
    second = run(capsys, "similarity", "--manifest", corpus)[1]
    assert first == second


def test_bad_alpha(corpus, capsys):
    code, _, _ = run(capsys, "similarity", "--manifest", corpus, "--alpha", "0")
    assert code == 2


def test_module_entry_point(corpus):
    proc = subprocess.run([sys.executable, "-m", "griffs", "stats", "--manifest", str(corpus)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["performances"] == 5
