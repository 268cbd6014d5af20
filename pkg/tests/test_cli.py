import json

import pytest

from netvuln.cli import main, parse_config, run
from netvuln.errors import ConfigError
from netvuln.records import emit, read_csv, read_jsonl


def test_parse_valid():
    cfg = parse_config({"op": "spectral", "eps": 0.1, "gamma": 0.5, "beta": 1.0, "grid": 2048})
    assert cfg.op == "spectral" and cfg.params["grid"] == 2048 and cfg.axes == []


def test_parse_eps_range():
    with pytest.raises(ConfigError) as exc:
        parse_config({"op": "spectral", "eps": 1.5, "gamma": 0.5, "beta": 1.0})
    assert exc.value.field == "eps"
    assert "eps must lie in (0,1)" in exc.value.message


def test_parse_missing_beta():
    with pytest.raises(ConfigError) as exc:
        parse_config({"op": "giant", "gamma": 0.5, "n": 100, "eps": 0.1, "p": 1.0})
    assert exc.value.field == "beta"
    with pytest.raises(ConfigError) as exc:
        parse_config({"op": "giant", "rule": {"kind": "affine", "gamma": 0.5}, "n": 100, "eps": 0.1, "p": 1.0})
    assert "beta" in exc.value.field


def test_parse_sweep_entry_validated():
    with pytest.raises(ConfigError) as exc:
        parse_config({"op": "spectral", "eps": [0.1, 2.0], "gamma": 0.5, "beta": 1.0})
    assert exc.value.field == "eps[1]"


def test_parse_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"op": "irg", "kernel": "cl", "gamma": 0.5, "eps": 0.1, "grid": 64}))
    assert parse_config(str(p)).op == "irg"
    with pytest.raises(ConfigError):
        parse_config(str(tmp_path / "missing.json"))


def test_spectral_sweep_decreasing():
    cfg = parse_config({"op": "spectral", "eps": [0.1, 0.01, 0.001], "gamma": 0.75, "beta": 1.0, "grid": 128})
    recs = run(cfg)
    assert len(recs) == 3
    pcs = [r.values["pc_spectral"] for r in recs]
    assert pcs[0] > pcs[1] > pcs[2]
    assert len({r.seed for r in recs}) == 3


def test_partial_failure_recorded():
    cfg = parse_config({"op": "cm", "degree_law": {"pmf": {"1": 1.0}}, "eps": [0.1, 0.5]})
    recs = run(cfg)
    assert len(recs) == 2 and all(r.error["type"] == "SubcriticalError" for r in recs)


def test_cli_pc_single_record(capsys):
    assert main(["pc", "--method", "spectral", "--eps", "0.1", "--gamma", "0.5", "--beta", "1", "--grid", "64"]) == 0
    lines = read_jsonl(capsys.readouterr().out)
    assert len(lines) == 1 and lines[0]["op"] == "pc" and "seed" in lines[0]


def test_cli_exit_codes(capsys):
    assert main(["spectral", "--eps", "1.5", "--gamma", "0.5", "--beta", "1"]) == 2
    assert main(["giant", "--gamma", "0.5", "--n", "100", "--eps", "0.1", "--p", "1"]) == 2


def test_cli_numerical_exit_code(monkeypatch, capsys):
    from netvuln import cli
    from netvuln.errors import NoConvergenceError

    def boom(c, seed):
        raise NoConvergenceError("forced")

    monkeypatch.setitem(cli.DISPATCH, "spectral", boom)
    assert main(["spectral", "--eps", "0.1", "--gamma", "0.5", "--beta", "1"]) == 3


def test_deterministic_output(tmp_path):
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({"op": "giant", "gamma": 0.5, "beta": 1.0, "n": 2000, "eps": 0.05,
                                   "p": [0.5, 1.0], "replicas": 2, "seed": 11}))
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["sweep", "--config", str(cfgfile), "--out", str(a)]) == 0
    assert main(["sweep", "--config", str(cfgfile), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_and_jsonl_agree():
    cfg = parse_config({"op": "irg", "kernel": ["cl", "pa"], "gamma": 0.75, "eps": 0.01, "grid": 64})
    recs = run(cfg)
    js = read_jsonl(emit(recs, "jsonl"))
    cs = read_csv(emit(recs, "csv"))
    for a, b in zip(js, cs):
        assert float(b["pc"]) == a["pc"]
        assert int(b["seed"]) == a["seed"]


def test_every_record_has_seed():
    cfg = parse_config({"op": "ibp", "eps": 0.05, "gamma": 0.5, "beta": 1.0, "p": [0.5, 1.0], "replicas": 50})
    for line in read_jsonl(emit(run(cfg))):
        assert isinstance(line["seed"], int)
        assert "zeta_lower" in line and "zeta_upper" in line and "censored_fraction" in line


def test_file_commands(tmp_path, capsys):
    e = tmp_path / "e.tsv"
    assert main(["generate", "--gamma", "0.5", "--beta", "1", "--n", "50", "--seed", "3", "--out", str(e)]) == 0
    assert e.read_text().startswith("# netvuln edges v1 n=50")
    m = tmp_path / "m.tsv"
    assert main(["damage", "--edges", str(e), "--eps", "0.2", "--out", str(m)]) == 0
    lines = m.read_text().splitlines()
    assert lines[0] == "# netvuln mask v1" and lines[1] == "1\t0" and lines[11] == "11\t1"
    assert main(["percolate", "--edges", str(e), "--mask", str(m), "--p", "0.5", "--out", str(tmp_path / "q")]) == 0


def test_degrees_csv(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["degrees", "--eps", "0.25", "--gamma", "0.5", "--beta", "0.5", "--k-max", "20", "--n", "2000",
                 "--csv", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "k,mu_theory,x_empirical,abs_diff"


def test_cm_and_distances(capsys):
    assert main(["cm", "--degree-law", '{"pmf": {"1": 0.5, "4": 0.5}}', "--eps", "0.25"]) == 0
    rec = read_jsonl(capsys.readouterr().out)[0]
    assert rec["pc"] == pytest.approx(2.5 / 3)
    assert main(["distances", "--gamma", "0.5", "--beta", "1", "--n", "2000", "--eps", "0.05",
                 "--pairs", "50"]) == 0
    rec = read_jsonl(capsys.readouterr().out)[0]
    assert 0 <= rec["violation_fraction"] <= 1


def test_pc_mc_and_ibp_methods():
    r = run(parse_config({"op": "pc", "method": "mc", "eps": 0.1, "gamma": 0.5, "beta": 1.0,
                          "n_schedule": [500, 1000], "replicas": 2}))[0]
    assert r.ok and 0 <= r.values["p_lo"] <= r.values["p_hi"] <= 1
    r = run(parse_config({"op": "pc", "method": "ibp", "eps": 0.1, "gamma": 0.5, "beta": 1.0, "replicas": 300}))[0]
    assert r.ok and r.values["p_hi"] - r.values["p_lo"] <= 2.0**-10
