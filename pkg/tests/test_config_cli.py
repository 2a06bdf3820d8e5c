import dataclasses

import pytest

from thzsim.cli import main
from thzsim.config import ConfigError, ExperimentConfig, build_config, parse_config, parse_range


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("")
    cfg = parse_config(str(p), scenario="rate-los")
    ref = ExperimentConfig(scenario="rate-los")
    assert dataclasses.asdict(cfg) == dataclasses.asdict(ref)
    assert (cfg.rows, cfg.cols, cfg.carrier, cfg.bandwidth) == (100, 100, 300e9, 40e9)
    assert cfg.power_dbm == 10 and cfg.noise_dbm_hz == -174


def test_units_and_ranges():
    cfg = build_config("nmse", "bandwidth_ghz = 40\nsnr_db = -15:5:10\n")
    assert cfg.bandwidth == 4.0e10
    assert cfg.snr_db == [-15, -10, -5, 0, 5, 10]
    assert parse_range("1, 2.5,4") == [1, 2.5, 4]
    with pytest.raises(ValueError):
        parse_range("0:0:3")


def test_errors_name_key_and_line():
    with pytest.raises(ConfigError, match=r"colour: unknown key \(line 3\)"):
        build_config("nmse", "# comment\nrows = 8\ncolour = red\n")
    with pytest.raises(ConfigError, match="line 1"):
        build_config("nmse", "rows 8\n")
    with pytest.raises(ConfigError, match="rows"):
        build_config("nmse", "rows = eight\n")
    with pytest.raises(ConfigError, match="n_sb"):
        build_config("gain", "n_sb = 3\n")


def test_precedence(tmp_path):
    cfg = build_config("nmse", "rows = 12\ntrials = 4\n", {"trials": 2}, desk=True)
    assert (cfg.rows, cfg.cols, cfg.trials, cfg.subcarriers) == (12, 16, 2, 32)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["nmse", "--bogus=1"]) == 2
    assert "bogus" in capsys.readouterr().err
    assert main(["nmse", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["nosuch"]) == 2
    assert main(["nmse", "--desk", "--trials", "1", "--paths", "400"]) == 3
    assert main(["gain", "--out", str(tmp_path / "no" / "dir.csv")]) == 3


def _csv_body(text):
    return [l for l in text.splitlines() if not l.startswith("#")]


def test_nmse_schema_and_determinism(tmp_path):
    args = ["nmse", "--desk", "--snr-db=-15:5:10", "--trials=1", "--seed=7",
            "--estimators=ls,omp,gsomp,crlb", "--subcarriers=4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "# seed = 7" in text
    body = _csv_body(text)
    assert body[0].split(",")[:3] == ["snr_db", "estimator", "nmse_db"]
    assert len(body) == 1 + 6 * 4


def test_gain_defaults(tmp_path):
    out = tmp_path / "gain.csv"
    assert main(["gain", "--out", str(out)]) == 0
    body = _csv_body(out.read_text())
    rows = [r.split(",") for r in body[1:]]
    schemes = {r[0] for r in rows}
    assert schemes == {"narrowband", "proposed", "digital"}
    by = {s: [float(r[3]) for r in rows if r[0] == s] for s in schemes}
    n = len(by["digital"])
    assert len(by["proposed"]) == len(by["narrowband"]) == n
    assert all(p >= nb - 1e-12 for p, nb in zip(by["proposed"], by["narrowband"]))
    assert min(by["proposed"]) > 0.8 and min(by["narrowband"]) < 0.05
