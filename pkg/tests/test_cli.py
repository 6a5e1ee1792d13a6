import json
import math

import pytest

from xmdl import cli


def run_cli(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_jeffreys_bernoulli(capsys):
    code, rep = run_cli(["jeffreys", "--family", "bernoulli"], capsys)
    assert code == 0 and rep["status"] == "pass"
    assert rep["measured"] == pytest.approx(math.pi, abs=1e-6)
    assert len(rep["config_hash"]) == 64


def test_conditional_jeffreys(capsys):
    code, rep = run_cli(["jeffreys", "--family", "exponential", "--conditional", "1", "0.5"], capsys)
    assert code == 0 and rep["measured"] == pytest.approx(math.e, abs=1e-6)


def test_finiteness_expect(capsys):
    argv = ["finiteness", "--family", "gaussian-location", "--prior", "gauss-alpha:1", "--m", "2", "--xbar", "0"]
    code, rep = run_cli(argv, capsys)
    assert code == 0 and rep["measured"] == "divergent"
    code, rep = run_cli(argv + ["--expect", "finite"], capsys)
    assert code == 1 and rep["status"] == "fail"


def test_inconclusive_exit_code(capsys):
    code, rep = run_cli(["finiteness", "--family", "exponential", "--prior", "exp-inv-sq", "--m", "2",
                         "--xbar", "0.6", "--budget", "50"], capsys)
    assert code == 2 and rep["status"] == "inconclusive"


def test_usage_errors(capsys):
    assert cli.main(["jeffreys", "--family", "nope"]) == 3
    with pytest.raises(SystemExit) as e:
        cli.main(["regret", "--family", "bernoulli"])
    assert e.value.code == 3
    with pytest.raises(SystemExit) as e:
        cli.main(["frobnicate"])
    assert e.value.code == 3
    assert cli.main(["regret", "--family", "bernoulli", "--n-schedule", "10,5"]) == 3
    capsys.readouterr()


def test_regret_csv_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["regret", "--family", "bernoulli", "--system", "jeffreys", "--n-schedule", "64:4096:4", "--seeds", "4"]
    code, rep = run_cli(base + ["--csv", str(a)], capsys)
    assert code == 0
    code2, rep2 = run_cli(base + ["--csv", str(b), "--workers", "2"], capsys)
    assert a.read_bytes() == b.read_bytes()
    assert rep["config_hash"] == rep2["config_hash"]
    lines = a.read_text().splitlines()
    assert lines[0] == "seed,n,m,regret2_nats,gap"
    assert len(lines) == 1 + 4 * 4
    assert rep["target"] == pytest.approx(math.log(math.pi))


def test_regret_json_summary(tmp_path, capsys):
    j = tmp_path / "s.json"
    code, _ = run_cli(["regret", "--family", "poisson", "--m", "1", "--n", "2000", "--seeds", "3",
                       "--json", str(j)], capsys)
    summary = json.loads(j.read_text())
    assert {"status", "measured", "target", "tolerance", "wall_clock", "config_hash"} <= set(summary)
    assert summary["details"]["target_verdict"] == "finite"


def test_shtarkov_and_kraft(capsys):
    code, rep = run_cli(["shtarkov", "--n", "1024,65536"], capsys)
    assert code == 0 and rep["n_rows"] == 2
    code, rep = run_cli(["kraft", "--lengths", "a=1.3,b=1.7", "--n", "3"], capsys)
    assert code == 0 and rep["n_rows"] == 8
    code, rep = run_cli(["kraft", "--trials", "20"], capsys)
    assert code == 0 and rep["measured"] == 0


def test_race_and_exchangeability(capsys):
    code, rep = run_cli(["race", "--family", "bernoulli", "--a", "jeffreys", "--b", "plugin", "--n", "10",
                         "--exhaustive"], capsys)
    assert code == 0 and rep["details"]["beam_shortfall"] == pytest.approx(0.0, abs=1e-9)
    code, rep = run_cli(["exchangeability", "--family", "bernoulli", "--system", "jeffreys", "--n", "6"], capsys)
    assert code == 0 and rep["measured"] <= 1e-12
    code, rep = run_cli(["exchangeability", "--family", "bernoulli", "--system", "snml", "--n", "6"], capsys)
    assert code == 0 and rep["details"]["asserted"] is False


def test_other_subcommands(capsys):
    code, rep = run_cli(["families"], capsys)
    assert code == 0 and rep["n_rows"] == 7
    code, rep = run_cli(["divergence", "--family", "poisson", "--mu0", "2", "--mu1", "3"], capsys)
    assert rep["measured"] == pytest.approx(2 * math.log(2 / 3) + 1)
    code, rep = run_cli(["diagnose", "--family", "exp-cauchy"], capsys)
    assert code == 0 and rep["measured"] == "Infinite"
    code, rep = run_cli(["posterior", "--family", "exponential", "--m", "1", "--xbar", "2", "--y", "2"], capsys)
    assert rep["rows"][0]["log_density"] == pytest.approx(-math.log(2) - 1)
    code, rep = run_cli(["posterior", "--family", "exponential"], capsys)
    assert code == 1


@pytest.mark.parametrize("family,text,m", [("bernoulli", "0110100111010110001", 0),
                                           ("bernoulli", "1101", 2), ("poisson", "3,0,2,5,1,40000,0", 1)])
def test_encode_decode_files(tmp_path, capsys, family, text, m):
    raw, blob, back = tmp_path / "raw.txt", tmp_path / "blob", tmp_path / "back.txt"
    raw.write_text(text)
    code, rep = run_cli(["encode", "--family", family, "--m", str(m), "--in", str(raw), "--out", str(blob)], capsys)
    assert code == 0
    code, _ = run_cli(["decode", "--family", family, "--in", str(blob), "--out", str(back)], capsys)
    assert code == 0 and back.read_text() == text
    assert cli.main(["decode", "--family", "geometric", "--in", str(blob), "--out", str(back)]) == 3
    capsys.readouterr()


def test_reproduce_subset(capsys):
    code, rep = run_cli(["reproduce-paper", "--only", "1,3,5", "--quiet"], capsys)
    assert code == 0 and rep["measured"] == "3/3"


def test_run_api(tmp_path):
    cfg = cli.ExperimentConfig("jeffreys", family="bernoulli", m=2, xbar=0.5, csv_path=str(tmp_path / "j.csv"))
    rep = cli.run(cfg)
    assert rep.status == "pass" and rep.exit_code == 0
    assert (tmp_path / "j.csv").read_text().startswith("m,xbar,verdict")
