from __future__ import annotations

import json
import shutil
import subprocess

import pytest

from conftest import DATA, FIXTURES
from scpt.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, run

TOY_INI = """
[task]
name = plogp
[oracle]
builtin = additive_logp_toy
rename = additive_logp_toy = plogp
[pipeline]
delta = 0.3
"""


@pytest.fixture
def toy_ini(tmp_path):
    p = tmp_path / "toy.ini"
    p.write_text(TOY_INI)
    return str(p)


@pytest.fixture
def table_ini(tmp_path):
    p = tmp_path / "table.ini"
    p.write_text(f"[task]\nname = plogp\n[oracle]\ntable = {FIXTURES / 'props10.tsv'}\n")
    return str(p)


def test_eval_three_of_five(tmp_path, table_ini, capsys):
    code = run(["eval", str(FIXTURES / "eval5.tsv"), "--config", table_ini, "--out", str(tmp_path)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "SR = 0.600" in out.splitlines()
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["SR"] == 0.6 and metrics["n_records"] == 5
    report = json.loads((tmp_path / "eval.report.json").read_text())
    assert report["seed"] == 0 and "config" in report


def test_filter_byte_identical(tmp_path, toy_ini):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert run(["filter", str(DATA / "toy_200.smi"), "--config", toy_ini, "--out", str(d)]) == EXIT_OK
        outs.append({f.name: f.read_bytes() for f in sorted(d.iterdir())})
    assert outs[0] == outs[1]
    assert {"pairs.property.tsv", "pairs.similarity.tsv", "pairs.structure.tsv"} <= set(outs[0])


def test_filter_jobs_do_not_change_output(tmp_path, toy_ini):
    for name, jobs in (("j1", "1"), ("j2", "2")):
        assert run(["filter", str(DATA / "toy_200.smi"), "--config", toy_ini, "--jobs", jobs,
                    "--out", str(tmp_path / name)]) == EXIT_OK
    a = (tmp_path / "j1" / "pairs.structure.tsv").read_bytes()
    assert a == (tmp_path / "j2" / "pairs.structure.tsv").read_bytes()


def test_sweep_six_rows(tmp_path, capsys):
    ini = tmp_path / "rq1.ini"
    ini.write_text(f"[task]\nname = plogp\nthresholds = plogp=0.5\n[oracle]\ntable = {DATA / 'rq1_scores.tsv'}\n"
                   "columns = plogp=additive\n[sweep]\nper_bin_sample = 20\n")
    code = run(["sweep", str(DATA / "rq1_corpus.smi"), "--axis", "sim", "--config", str(ini), "--out", str(tmp_path)])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("bin\t") and len(lines) == 7
    assert [ln.split("\t")[0] for ln in lines[1:]] == ["0.3-0.4", "0.4-0.5", "0.5-0.6", "0.6-0.7",
                                                       "0.7-0.8", "0.8-0.9"]


def test_export_and_triplets(tmp_path, toy_ini):
    for cmd in ("triplets", "export-sft", "export-dpo"):
        assert run([cmd, str(DATA / "toy_200.smi"), "--config", toy_ini, "--out", str(tmp_path)]) == EXIT_OK
    sft = (tmp_path / "sft.jsonl").read_text().splitlines()
    dpo = (tmp_path / "dpo.jsonl").read_text().splitlines()
    assert sft and dpo
    assert set(json.loads(dpo[0])) == {"prompt", "chosen", "rejected"}
    assert len(dpo) == len((tmp_path / "triplets.tsv").read_text().splitlines()) - 1


def test_canon_fp_mine(tmp_path):
    corpus = tmp_path / "c.smi"
    corpus.write_text("OCC\nc1ccccc1C\nbad(\nCc1ccccc1O\n")
    assert run(["canon", str(corpus), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "canonical.smi").read_text().splitlines() == ["CCO", "Cc1ccccc1", "Cc1ccccc1O"]
    assert run(["fp", str(corpus), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "fingerprints.bin").read_bytes()[:4] == b"SCFP"
    assert len((tmp_path / "pairwise.tsv").read_text().splitlines()) >= 3
    assert run(["mine", str(corpus), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "pairs.mined.tsv").exists()


def test_align_demo(tmp_path, capsys):
    assert run(["align-demo", "--out", str(tmp_path)]) == EXIT_OK
    hist = (tmp_path / "history.tsv").read_text().splitlines()
    assert hist[0] == "step\tstage\tloss\tmean_margin" and len(hist) > 100


def test_baseline(tmp_path, toy_ini):
    code = run(["baseline", "Cc1ccc(O)cc1", "--config", toy_ini, "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = (tmp_path / "trace.tsv").read_text().splitlines()[1:]
    fits = [float(r.split("\t")[2]) for r in rows]
    assert fits and all(a < b for a, b in zip(fits, fits[1:]))


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[task]\nbogus = 1\n")
    assert run(["canon", str(DATA / "toy_200.smi"), "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_oracle_is_config_error(tmp_path):
    assert run(["filter", str(DATA / "toy_200.smi"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_input_error_exit_code(tmp_path, toy_ini, capsys):
    assert run(["canon", str(tmp_path / "missing.smi"), "--out", str(tmp_path)]) == EXIT_INPUT
    assert "input error" in capsys.readouterr().err
    assert run(["filter", "--config", toy_ini, "--out", str(tmp_path)]) == EXIT_INPUT


def test_dry_run_writes_nothing(tmp_path, toy_ini, capsys):
    out = tmp_path / "never"
    assert run(["filter", str(DATA / "toy_200.smi"), "--config", toy_ini, "--out", str(out), "--dry-run"]) == EXIT_OK
    assert not out.exists()
    plan = json.loads(capsys.readouterr().out)
    assert plan["command"] == "filter" and plan["plan"]


@pytest.mark.skipif(shutil.which("scpt") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["scpt", "canon", str(DATA / "toy_200.smi"), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert len((tmp_path / "canonical.smi").read_text().splitlines()) == 200
