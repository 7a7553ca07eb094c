import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from glassy_chaos import cli
from glassy_chaos.config import ConfigError, ExperimentConfig, config_hash, dump_config, parse_config
from glassy_chaos.parallel import WORKERS_ENV, resolve_workers

SMALL = """
[grid]
n = 128
[run]
replicas = 20
block = 10
[limit]
replicas = 2000
[pd]
alphas = 0.5
replicas = 100
[brw]
depths = 4, 6
replicas = 40
[estimate]
replicas = 100
"""


def test_empty_config_is_default():
    assert parse_config("") == ExperimentConfig()


def test_dump_roundtrip_and_hash():
    cfg = parse_config(SMALL)
    again = parse_config(dump_config(cfg))
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)
    assert config_hash(cfg) != config_hash(ExperimentConfig())


def test_errors_carry_key_paths():
    with pytest.raises(ConfigError) as exc:
        parse_config("[grid]\nn = 1\nbogus = 2\n[limit]\ngamma = 1.0\n[nope]\n")
    msgs = exc.value.errors
    assert "grid.n: at least 2 points per side" in msgs
    assert "grid.bogus: unknown key" in msgs
    assert "nope: unknown section" in msgs
    assert any(m.startswith("limit.gamma: not supercritical") for m in msgs)


def test_type_errors():
    with pytest.raises(ConfigError, match="run.replicas"):
        parse_config("[run]\nreplicas = many\n")
    with pytest.raises(ConfigError, match="freeze.log_correction"):
        parse_config("[freeze]\nlog_correction = maybe\n")


def test_worker_precedence(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert resolve_workers(None, 3) == 3
    monkeypatch.setenv(WORKERS_ENV, "2")
    assert resolve_workers(None, 3) == 2
    assert resolve_workers(4, 3) == 4
    with pytest.raises(ValueError):
        resolve_workers(0, 1)


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL)
    return str(p)


def _run(cmd, cfg, out, *extra):
    return cli.main([cmd, "--config", cfg, "--out", str(out), *extra])


def test_invalid_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[limit]\ngamma = 1.5\n")
    assert cli.main(["limit", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "limit.gamma: not supercritical" in capsys.readouterr().err


@pytest.mark.parametrize("cmd", ["kernel-check", "field-cov", "measure", "limit", "tails", "pd", "brw", "estimate-c"])
def test_commands_write_outputs(cmd, small_cfg, tmp_path):
    out = tmp_path / cmd
    assert _run(cmd, small_cfg, out) in (0, 1)
    stem = cmd.replace("-", "_")
    body = json.loads((out / f"{stem}.json").read_text())
    assert body["header"]["command"] == cmd
    assert body["header"]["seed"] == 0
    for csv_file in out.glob("*.csv"):
        assert csv_file.read_text().startswith("# artifact: glassy_chaos\n")


def test_freeze_command(tmp_path):
    cfg = tmp_path / "f.ini"
    cfg.write_text("[grid]\nn = 256\n[run]\nreplicas = 20\nblock = 10\n")
    assert cli.main(["freeze", "--config", str(cfg), "--out", str(tmp_path / "o")]) in (0, 1)
    assert (tmp_path / "o" / "freeze_slopes.csv").exists()


def test_outputs_identical_across_worker_counts(small_cfg, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("limit", small_cfg, a, "--workers", "1", "--seed", "5") == 0
    assert _run("limit", small_cfg, b, "--workers", "2", "--seed", "5") == 0
    for name in ("laplace.csv", "atoms.csv", "limit.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    a2, b2 = tmp_path / "a2", tmp_path / "b2"
    _run("measure", small_cfg, a2, "--workers", "1")
    _run("measure", small_cfg, b2, "--workers", "2")
    assert (a2 / "measures.csv").read_bytes() == (b2 / "measures.csv").read_bytes()


def test_seed_changes_output(small_cfg, tmp_path):
    _run("tails", small_cfg, tmp_path / "s1", "--seed", "1")
    _run("tails", small_cfg, tmp_path / "s2", "--seed", "2")
    assert (tmp_path / "s1" / "hill.csv").read_text() != (tmp_path / "s2" / "hill.csv").read_text()


def test_dump_fields(small_cfg, tmp_path):
    _run("measure", small_cfg, tmp_path / "d", "--dump-fields")
    assert (tmp_path / "d" / "fields.bin").stat().st_size > 0


def test_report_subset(tmp_path, capsys):
    assert cli.main(["report", "--out", str(tmp_path), "--criteria", "1,9"]) == 0
    out = capsys.readouterr().out
    assert "criterion  1 [PASS]" in out and "criterion  9 [PASS]" in out


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "glassy_chaos", "kernel-check", "--out", str(tmp_path)],
                       capture_output=True, text=True, env={**os.environ, WORKERS_ENV: "1"})
    assert r.returncode == 0, r.stderr
    assert "kernel-check: PASS" in r.stdout
