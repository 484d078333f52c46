"""The command-line surface: parsing, figure data, exit codes, determinism."""
from pathlib import Path

import numpy as np
import pytest

from switched_nagumo.cli import (
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_USAGE,
    ConfigError,
    main,
    parse_config,
)

ROOT = Path(__file__).resolve().parents[1]
REF = ROOT / "configs" / "reference.cfg"


def test_parse_config():
    cfg = parse_config("g = 0.5\n# comment\na=0.4\nname = hello\nn = 3\n")
    assert cfg == {"g": 0.5, "a": 0.4, "name": "hello", "n": 3}
    with pytest.raises(ConfigError):
        parse_config("novalue\n")
    with pytest.raises(ConfigError):
        parse_config(" = 3\n")


def test_thresholds_command(capsys):
    rc = main(["thresholds", "--config", str(REF)])
    out = capsys.readouterr().out
    assert rc == EXIT_PASS
    assert "m0star" in out and "0.711111" in out
    assert "m1star" in out
    assert "theorem-regime flag  : True" in out


def test_thresholds_h0_violated(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("g = 0.1\na = 0.6\nn0 = 0.1\nn1 = 10\nalpha = 4\nbeta = 6\n")
    rc = main(["thresholds", "--config", str(cfg)])
    out = capsys.readouterr().out
    assert rc == EXIT_FAIL
    assert "m0star" in out                 # still printed
    assert "undefined" in out


def test_figure1_zero_structure(tmp_path, capsys):
    rc = main(["figure", "1", "--out", str(tmp_path)])
    assert rc == EXIT_PASS
    lines = (tmp_path / "figure1.csv").read_text().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    assert any("g = 5.0" in ln for ln in header)   # effective config echoed
    data = np.array([[float(v) for v in ln.split(",")]
                     for ln in lines if not ln.startswith("#") and "s" not in ln])
    s, low, high = data.T
    # low curve strictly negative for s > 0; high curve has two interior zeros
    assert np.all(low[s > 1e-3] < 0.0)
    sign_changes = np.nonzero(np.diff(np.sign(high[s > 1e-6])))[0]
    assert len(sign_changes) == 2
    z1 = s[s > 1e-6][sign_changes[0]]
    z2 = s[s > 1e-6][sign_changes[1]]
    assert z1 == pytest.approx(0.4576160, abs=2e-3)
    assert z2 == pytest.approx(0.9423840, abs=2e-3)


def test_figure3_metadata(tmp_path, capsys):
    rc = main(["figure", "3", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == EXIT_PASS
    assert "-0.0085043" in out              # c
    assert "0.41715" in out                 # a_n1
    assert "-0.0936779" in out              # E1(a_n1, 0)


def test_figure5_metadata(tmp_path, capsys):
    rc = main(["figure", "5", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == EXIT_PASS
    assert "0.65249" in out                 # pbar0_plus
    assert "inclusion a_n1 <= pbar0_plus: True" in out
    body = (tmp_path / "figure5.csv").read_text()
    assert "guide" in body and "x=a_n1" in body


def test_figure_bad_index(tmp_path):
    assert main(["figure", "7", "--out", str(tmp_path)]) == EXIT_USAGE


def test_levelsets_and_orbit(tmp_path):
    assert main(["levelsets", "--config", str(REF), "--out", str(tmp_path)]) \
        == EXIT_PASS
    assert (tmp_path / "levelsets.csv").exists()
    assert main(["orbit", "--config", str(REF), "--out", str(tmp_path)]) \
        == EXIT_PASS
    lines = (tmp_path / "orbit.csv").read_text().splitlines()
    assert any(ln.startswith("t,x,y,n,E0,E1") for ln in lines)


def test_timemap_command(capsys):
    rc = main(["timemap", "--config", str(REF)])
    out = capsys.readouterr().out
    assert rc == EXIT_PASS
    assert "sigma(" in out and "tau(" in out and "limit" in out


def test_certify_exit_code_on_regime_violation(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(REF.read_text().replace("n0 = 0.35", "n0 = 0.72"))
    rc = main(["certify", "--config", str(cfg), "--out", str(tmp_path),
               "--paths", "2"])
    assert rc == EXIT_FAIL
    cert = (tmp_path / "certificate.txt").read_text()
    assert "pass = false" in cert
    assert "first_failure = regime" in cert


def test_config_parse_error_exit(tmp_path):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text("g == 0.1\nnot a config line\n")
    assert main(["thresholds", "--config", str(cfg)]) == EXIT_USAGE


def test_find_periodic_usage_errors(tmp_path):
    # symbol out of the declared range
    rc = main(["find-periodic", "3", "--config", str(REF),
               "--out", str(tmp_path), "--symbols", "2", "--force"])
    assert rc == EXIT_USAGE
    # no certificate and no --force
    rc = main(["find-periodic", "1", "--config", str(REF),
               "--out", str(tmp_path)])
    assert rc == EXIT_USAGE


def test_scan_empty_and_small(tmp_path):
    assert main(["scan", "--config", str(REF), "--out", str(tmp_path)]) \
        == EXIT_PASS
    assert (tmp_path / "scan.csv").exists()
    cfg = tmp_path / "scan.cfg"
    cfg.write_text(REF.read_text() + "\nscan_n1 = 1.5:16:2\nscan_paths = 2\n")
    rc = main(["scan", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == EXIT_PASS
    rows = [ln for ln in (tmp_path / "scan.csv").read_text().splitlines()
            if not ln.startswith("#")]
    assert rows[0] == "n1,pass,first_failure,min_margin"
    assert len(rows) == 3
    assert all(("false" in r) or ("error" in r) for r in rows[1:])


def test_output_determinism(tmp_path):
    # identical config (including the echoed out dir) -> identical bytes
    out = tmp_path / "r"
    main(["figure", "2", "--out", str(out)])
    b1 = (out / "figure2.csv").read_bytes()
    main(["figure", "2", "--out", str(out)])
    b2 = (out / "figure2.csv").read_bytes()
    assert b1 == b2
