import io
import math
from pathlib import Path

import numpy as np
import pytest

from listrec.cli import (ExperimentConfig, TrialRecord, format_record, load_config, load_poly, main,
                         run_experiment, stream, summary_line, wilson_interval)
from listrec.codes import load_codeword
from listrec.errors import ConfigInvalid


def run(argv):
    buf = io.StringIO()
    return main(argv, buf), buf.getvalue()


def test_streams_are_keyed_by_labels():
    a = stream(3, "trial", 0).integers(1 << 30, size=4)
    b = stream(3, "trial", 0).integers(1 << 30, size=4)
    c = stream(3, "trial", 1).integers(1 << 30, size=4)
    d = stream(4, "trial", 0).integers(1 << 30, size=4)
    assert (a == b).all() and not (a == c).all() and not (a == d).all()


def test_wilson_interval():
    lo, hi = wilson_interval(3, 3)
    z = 1.96
    assert lo == pytest.approx((1 + z * z / 6 - z * math.sqrt(z * z / 36)) / (1 + z * z / 3))
    assert hi == 1.0
    assert all(math.isnan(v) for v in wilson_interval(0, 0))


def test_record_format():
    assert format_record("trial", trial=2, success=True, rate=0.5, coeffs=[1, 2]) == \
        "record=trial trial=2 success=1 rate=0.5 coeffs=1,2"
    rec = TrialRecord(0, "ab", True, 1, {"decode": 0.25})
    assert "t_decode" not in rec.line() and "t_decode=0.25" in rec.line(True)


def test_zero_trials_summary():
    assert run_experiment(ExperimentConfig(trials=0)) == []
    assert "rate=NA" in summary_line([])


def test_validation_names_the_failure():
    with pytest.raises(ConfigInvalid, match="alpha"):
        ExperimentConfig(alpha="2").validate()
    with pytest.raises(ConfigInvalid, match="q=12"):
        ExperimentConfig(q=12).validate()
    with pytest.raises(ConfigInvalid, match="family"):
        ExperimentConfig(family="rs").validate()
    with pytest.raises(ConfigInvalid, match="code parameters"):
        ExperimentConfig(n=100).validate()


def test_bad_config_exit_code():
    code, _ = run(["bench", "--seed", "1", "--alpha", "3/2"])
    assert code == 2


def test_ini_config(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[code]\nfamily = mult\nq = 13\ns = 6\nn = 13\nd = 20\n"
                    "[channel]\nalpha = 1/13\n[decoder]\nr = 3\ntau = 4\nrepetitions = 10\n"
                    "[run]\ntrials = 2\nseed = 9\n")
    cfg = load_config(path)
    assert cfg.family == "mult" and cfg.q == 13 and cfg.r == 3 and cfg.alpha == "1/13"
    code, out = run(["bench", "--config", str(path), "--seed", "9"])
    assert code == 0 and out.strip().splitlines()[-1].startswith("record=summary trials=2")
    (tmp_path / "bad.ini").write_text("[code]\ncolour = red\n")
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "bad.ini")


def test_frs_zero_error_config_succeeds():
    cfg = ExperimentConfig(family="frs", alpha="0", r=2, tau=12, repetitions=20, trials=3, seed=1)
    records = run_experiment(cfg)
    assert [r.success for r in records] == [True] * 3
    assert "rate=1 " in summary_line(records)


def test_workers_do_not_change_output():
    cfg = ExperimentConfig(family="mult", q=13, s=6, n=13, d=20, alpha="1/13", r=3, tau=4, repetitions=10,
                           trials=4, seed=3)
    serial = [r.line() for r in run_experiment(cfg)]
    cfg.workers = 2
    assert [r.line() for r in run_experiment(cfg)] == serial


def test_encode_corrupt_recover_pipeline(tmp_path):
    cw, lw, msg = tmp_path / "cw.txt", tmp_path / "lw.txt", tmp_path / "msg.txt"
    assert run(["encode", "--family", "frs", "--q", "97", "--s", "8", "--n", "12", "--d", "30",
                "--seed", "4", "--out", str(cw), "--message-out", str(msg)])[0] == 0
    head, c = load_codeword(cw.read_text())
    assert head["n"] == 12 and c.n == 12
    assert run(["corrupt", "--in", str(cw), "--family", "frs", "--alpha", "1/12", "--seed", "4",
                "--out", str(lw)])[0] == 0
    code, out = run(["list-recover", "--in", str(lw), "--family", "frs", "--alpha", "1/12", "--ell", "1",
                     "--r", "2", "--tau", "6", "--repetitions", "20", "--seed", "4"])
    assert code == 0
    P = load_poly(msg.read_text())
    want = "coeffs=" + ",".join(str(int(v)) for v in P.coeffs)
    assert any(line.endswith(want) for line in out.splitlines())


def test_encode_given_message(tmp_path):
    msg = tmp_path / "m.txt"
    msg.write_text("kind=poly q=5 m=1\n0 1\n")
    code, out = run(["encode", "--family", "frs", "--q", "5", "--s", "2", "--n", "2", "--d", "1",
                     "--seed", "0", "--message", str(msg)])
    assert code == 0
    assert out.splitlines()[1:] == ["1,2", "4,3"]


def test_ael_and_local_commands():
    code, out = run(["ael", "--trials", "1", "--seed", "2"])
    assert code == 0 and "success=1" in out
    code, out = run(["local-recover", "--q", "13", "--s", "3", "--m", "2", "--n", "169", "--d", "26",
                     "--alpha", "1/100", "--alpha-prime", "3/20", "--s-star", "3", "--U-size", "8",
                     "--K-param", "4", "--trials", "1", "--points", "3", "--inner-trials", "3", "--seed", "2"])
    assert code == 0 and "queries=" in out and "success=1" in out


def test_seed_is_required():
    with pytest.raises(SystemExit):
        main(["bench"], io.StringIO())


def test_verify_lines():
    code, out = run(["verify", "--only", "5,6"])
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0].startswith("criterion=5 status=PASS") and "measured=" in lines[0] and "required=" in lines[0]
    assert lines[-1] == "record=summary criteria=2 failed=0"


def test_timings_flag():
    argv = ["bench", "--family", "mult", "--q", "13", "--s", "6", "--n", "13", "--d", "20", "--alpha", "1/13",
            "--r", "3", "--tau", "4", "--repetitions", "5", "--trials", "1", "--seed", "1"]
    assert "t_decode" not in run(argv)[1]
    assert "t_decode" in run(argv + ["--timings"])[1]
