import json

import pytest

from halfdirac.cli import EXIT_OK, EXIT_PRECONDITION, EXIT_VERDICT, run


def _write(tmp_path, raw, name="cfg.json"):
    f = tmp_path / name
    f.write_text(json.dumps(raw))
    return str(f)


def _records(out):
    return [json.loads(line) for line in (out / "records.jsonl").read_text().splitlines()]


def test_enclosure_outputs(tmp_path):
    cfg = _write(tmp_path, {"v": 0.5, "alpha": 0, "hermitian": True})
    assert run(["enclosure", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    recs = _records(tmp_path / "o")
    assert recs[0]["kind"] == "header" and "timestamp" in recs[0]["payload"]
    assert all(set(r) == {"kind", "payload", "provenance"} for r in recs)
    which = {r["payload"]["which"] for r in recs if r["kind"] == "enclosure"}
    assert which == {"derived", "printed", "theorem2-level-set", "hermitian-gap"}
    header = (tmp_path / "o" / "theorem2_level_set.csv").read_text().splitlines()[0]
    assert header == "re,im"


def test_massless_enclosure(tmp_path):
    cfg = _write(tmp_path, {"v": 0.3, "params": {"m": 0, "c": 1}})
    assert run(["enclosure", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    assert "empty enclosure; spectrum = R" in (tmp_path / "o" / "report.txt").read_text()


def test_large_coupling_is_precondition_error(tmp_path):
    cfg = _write(tmp_path, {"v": 0.75})
    assert run(["enclosure", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_PRECONDITION


def test_invalid_config_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, {"alpha": "sideways"})
    assert run(["enclosure", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_PRECONDITION
    assert "alpha" in capsys.readouterr().err


def test_scan_is_deterministic(tmp_path):
    raw = {"alpha": "pi/2", "potential": {"corpus": "bump-complex", "v": 0.5}}
    cfg = _write(tmp_path, raw)
    outs = []
    for k, threads in enumerate((1, 3)):
        out = tmp_path / f"o{k}"
        assert run(["scan", "--config", cfg, "--out", str(out), "--threads", str(threads),
                    "--timestamp", "fixed"]) == EXIT_OK
        outs.append(out)
    for name in ("records.jsonl", "zeros.csv", "winding.csv", "report.txt"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    zeros = [r["payload"] for r in _records(outs[0]) if r["kind"] == "zero"]
    assert {z["method"] for z in zeros} == {"evans", "birman-schwinger"}
    z = next(z["z"] for z in zeros if z["method"] == "evans")
    assert z == pytest.approx([0.885265, 0.160275], abs=1e-6)


def test_fault_injection_fails_verdict(tmp_path):
    raw = {"alpha": "pi/2", "potential": {"corpus": "bump-complex", "v": 0.5},
           "fault_injection": {"radius_scale": 0.05}}
    out = tmp_path / "o"
    assert run(["scan", "--config", _write(tmp_path, raw), "--out", str(out)]) == EXIT_VERDICT
    assert any(r["kind"] == "violation" for r in _records(out))


def test_nrlimit_and_selftest(tmp_path):
    assert run(["nrlimit", "--out", str(tmp_path / "n")]) == EXIT_OK
    rows = (tmp_path / "n" / "rate.csv").read_text().splitlines()
    assert rows[0] == "branch,alpha,bc,c,D,D_nontrivial,D_off,ratio"
    assert len(rows) == 1 + 3 * 4
    assert run(["nrlimit", "--config", _write(tmp_path, {"params": {"m": 1}}), "--out",
                str(tmp_path / "n2")]) == EXIT_PRECONDITION
    assert run(["selftest", "--out", str(tmp_path / "s")]) == EXIT_OK
