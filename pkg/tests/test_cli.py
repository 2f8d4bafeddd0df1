import json
from pathlib import Path

import pytest

from choquet_lattice import cli

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"


def run(tmp_path, cfg, command, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out.csv"
    code = cli.main([command, "--config", str(path), "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else "")


BASE = {
    "model": {"type": "gbm", "mu": 0.0, "sigma": 0.2},
    "distortion": {"family": "linear"},
    "payoff": {"type": "call", "S0": 100.0, "K": 100.0},
}


def test_converge_header_and_gap(tmp_path):
    cfg = dict(BASE, grid={"n_list": [250, 1000]}, reference={"type": "closed_form"})
    code, text = run(tmp_path, cfg, "converge")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "n,delta,h,a,value,reference,gap,truncated_mass,runtime_ms"
    assert float(lines[-1].split(",")[6]) <= 0.03


def test_price_header(tmp_path):
    code, text = run(tmp_path, dict(BASE, grid={"n_steps": 100}), "price")
    assert code == 0
    assert text.splitlines()[0] == "n,delta,h,a,value,truncated_mass,runtime_ms"


def test_identical_bytes(tmp_path):
    cfg = dict(BASE, grid={"n_list": [50, 100]})
    _, a = run(tmp_path, cfg, "converge", "--no-timing")
    _, b = run(tmp_path, cfg, "converge", "--no-timing")
    assert a == b


def test_unknown_key_rejected(tmp_path):
    cfg = dict(BASE, grid={"n_steps": 10, "bogus": 1})
    assert run(tmp_path, cfg, "price")[0] == cli.EXIT_SCHEMA
    assert run(tmp_path, dict(BASE, grid={"n_steps": 10}, extra=1), "price")[0] == cli.EXIT_SCHEMA


def test_command_mismatch(tmp_path):
    cfg = dict(BASE, grid={"n_steps": 10}, command="converge")
    assert run(tmp_path, cfg, "price")[0] == cli.EXIT_SCHEMA


def test_bad_tick_exit_3(tmp_path, capsys):
    cfg = dict(BASE, grid={"n_steps": 100, "h_override": 0.05})
    assert run(tmp_path, cfg, "price")[0] == cli.EXIT_INFEASIBLE
    assert "tick_identity" in capsys.readouterr().err


def test_model_error_exit_3(tmp_path):
    cfg = dict(BASE, model={"type": "tailcgmy", "C": 1.0, "G": 5.0, "M": 1.5, "Y": 0.5},
               grid={"n_steps": 10})
    assert run(tmp_path, cfg, "price")[0] == cli.EXIT_INFEASIBLE


def test_check_all_pass(tmp_path):
    out = tmp_path / "check.csv"
    assert cli.main(["check", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert rows and all(",true," in r for r in rows)


def test_couple(tmp_path):
    code, text = run(tmp_path, json.loads((CONFIGS / "couple_exponential.json").read_text()), "couple")
    assert code == 0
    rows = text.splitlines()[1:]
    assert all(r.split(",")[2] == "1.0" and r.endswith("true") for r in rows)


def test_seed_override_changes_output(tmp_path):
    cfg = json.loads((CONFIGS / "couple_exponential.json").read_text())
    cfg["coupling"]["n_paths"] = 200
    _, a = run(tmp_path, cfg, "couple", "--seed", "1")
    _, b = run(tmp_path, cfg, "couple", "--seed", "2")
    assert a != b


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_validate(name):
    cfg = json.loads((CONFIGS / name).read_text())
    cli.validate_config(cfg, cfg["command"])


def test_fmt_is_repr():
    assert cli.fmt(0.1) == "0.1"
    assert cli.fmt(1e-300) == "1e-300"
    assert cli.fmt(True) == "true"
