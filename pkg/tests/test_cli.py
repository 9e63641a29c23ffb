import json

import pytest

from fibtype.cli import main, record_digest
from fibtype.presentations import FibTypeParams, reduce_gcd, to_h_form


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "6", "5", "3")
    assert code == 0
    d = json.loads(out)
    assert d["group_status"]["structure"]["label"] == "cyclic(7)"
    assert d["spine_status"] == {"status": "no"}


def test_classify_check(capsys):
    code, out, _ = run(capsys, "classify", "5", "1", "2", "--check")
    assert code == 0 and json.loads(out)["cross_check"]["passed"] is True


def test_byte_identical(capsys):
    a = run(capsys, "classify", "10", "2", "1")[1]
    b = run(capsys, "classify", "10", "2", "1")[1]
    assert a == b


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "0", "1", "1"],
        ["classify", "5", "1"],
        ["frobnicate"],
        [],
        ["export", "polyhedron", "--family", "h1", "--n", "3", "--dot"],
        ["batch", "--n", "5..x", "--out", "x.jsonl"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_overflow_exit(capsys):
    code, out, _ = run(capsys, "enumerate", "8", "3", "1", "--max-cosets", "1000")
    assert code == 3 and json.loads(out)["table"]["status"] == "overflowed"
    assert run(capsys, "embeddings", "8", "0", "1", "--budget", "10")[0] == 3


def test_env_defaults(capsys, monkeypatch):
    monkeypatch.setenv("FIBTYPE_MAX_COSETS", "1000")
    assert run(capsys, "enumerate", "8", "3", "1")[0] == 3
    # the flag wins over the environment
    assert run(capsys, "enumerate", "5", "1", "2", "--max-cosets", "100000")[0] == 0
    monkeypatch.setenv("FIBTYPE_MAX_COSETS", "lots")
    assert run(capsys, "enumerate", "5", "1", "2")[0] == 2


def test_enumerate_quotient(capsys):
    code, out, _ = run(capsys, "enumerate", "3", "2", "1", "--quotient", "x0 x0", "--strategy", "felsch")
    assert code == 0 and json.loads(out)["table"]["index"] == 4


def test_abelianize(capsys):
    d = json.loads(run(capsys, "abelianize", "9", "3", "1")[1])
    assert d["abelianization"]["torsion"] == [7] and d["resultant_order"] == 7


def test_whitehead(capsys):
    d = json.loads(run(capsys, "whitehead", "9", "4", "1")[1])
    assert len(d["vertices"]) == 18 and len(d["edges"]) == 27
    assert d["planar"] is False and d["witness"]["kind"] == "K33"


def test_embeddings_and_export(capsys, tmp_path):
    d = json.loads(run(capsys, "export", "embedding", "6", "0", "1", "--json")[1])
    assert d["count"] == 1
    assert d["embeddings"][0]["census"] == {"4": 6, "6": 2}
    out = tmp_path / "g.dot"
    assert run(capsys, "export", "whitehead", "3", "0", "1", "--dot", "--out", str(out))[0] == 0
    assert out.read_text().startswith("graph")


def test_polyhedron(capsys):
    d = json.loads(run(capsys, "polyhedron", "--family", "altfib", "--m", "3")[1])
    assert d["ok"] and d["chi"] == 0
    d = json.loads(run(capsys, "export", "polyhedron", "--family", "altfib", "--m", "3", "--json")[1])
    assert len(d["faces"]) == 6


def test_batch_resume(capsys, tmp_path):
    out = tmp_path / "sweep.jsonl"
    code, _, err = run(capsys, "batch", "--n", "1..5", "--out", str(out))
    assert code == 0 and json.loads(err)["computed"] == 55
    first = out.read_text()
    lines = [json.loads(x) for x in first.splitlines()]
    assert [tuple(r["params"]) for r in lines] == sorted(tuple(r["params"]) for r in lines)
    assert all(r["digest"] == record_digest(r["verdict"], r["evidence"]) for r in lines)
    code, _, err = run(capsys, "batch", "--n", "1..5", "--out", str(out))
    assert code == 0 and json.loads(err)["computed"] == 0
    # a tampered record is recomputed
    lines[3]["verdict"]["group_status"]["status"] = "no"
    out.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in lines))
    code, _, err = run(capsys, "batch", "--n", "1..5", "--out", str(out))
    assert json.loads(err)["computed"] == 1
    strip = lambda text: [{k: v for k, v in json.loads(x).items() if k not in ("started", "finished")} for x in text.splitlines()]
    assert strip(out.read_text()) == strip(first)


def test_batch_filter(capsys, tmp_path):
    out = tmp_path / "h.jsonl"
    assert run(capsys, "batch", "--n", "9..9", "--out", str(out), "--filter", "h-form")[0] == 0
    got = {tuple(json.loads(x)["params"]) for x in out.read_text().splitlines()}
    want = {
        (9, m, k)
        for m in range(9)
        for k in range(9)
        if reduce_gcd(FibTypeParams(9, m, k))[0] == 1 and to_h_form(FibTypeParams(9, m, k)) is not None
    }
    assert got == want and len(got) == 72
