from __future__ import annotations

import pytest

from qcauset.cli import main
from qcauset.config import DEFAULT_TEMPERATURE, validate_config
from qcauset.errors import ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_defaults_filled():
    cfg = validate_config("experiment: spectral-gap\nseed: 1\nstrategies: {}\n")
    assert cfg.epsilon == 0.1
    assert cfg.temperatures == (DEFAULT_TEMPERATURE,)
    (s,) = cfg.strategies
    assert s.kind == "quantum" and s.r_tc == (0.7, 0.9) and s.t == (3, 10) and s.samples == 10
    name, strat = cfg.proposal_strategies()[0]
    assert strat.r_bd_range == (0.0, 0.0)
    weighted = validate_config("experiment: spectral-gap\nseed: 1\nrule: metropolis\nstrategies: {}\n")
    assert weighted.proposal_strategies()[0][1].r_bd_range == (0.02, 0.05)


def test_r_bd_sorted_and_ranges():
    cfg = validate_config(
        "experiment: sweep-N\nseed: 2\nn: {min: 3, max: 5}\nstrategies:\n  - kind: quantum\n    r_bd: [0.05, 0.02]\n"
    )
    assert cfg.strategies[0].r_bd == (0.02, 0.05)
    assert cfg.cardinalities == (3, 4, 5)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("experiment: sample\nseed: 1\ntemperature: -0.1\n", "line 3: key 'temperature'"),
        ("experiment: enumerate\nfoo: 1\n", "line 2: key 'foo': unknown key"),
        ("experiment: spectral-gap\nseed: 1\nstrategies:\n  - kind: warp\n", "line 4: key 'strategies.0.kind'"),
        ("experiment: spectral-gap\nseed: 1\nstrategies:\n  - r_tc: [0.5, 1.4]\n", "line 4: key 'strategies.0.r_tc'"),
        ("experiment: sample\n", "key 'seed'"),
        ("experiment: sweep-N\nseed: 1\nn: 4\n", "key 'n'"),
        ("experiment: [unclosed\n", "malformed YAML"),
    ],
)
def test_validation_errors(text, needle):
    with pytest.raises(ConfigError) as err:
        validate_config(text)
    assert needle in str(err.value)


def test_enumerate_n4_lines(capsys):
    code, out, _ = run(capsys, "enumerate", "-n", "4")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# config_hash=") and "seed=None" in lines[0] and "version=" in lines[0]
    assert lines[1] == "n,index,set,relations"
    assert len(lines) == 2 + 40


def test_action_from_file(tmp_path, capsys):
    f = tmp_path / "sets.txt"
    f.write_text("3:111\n3:000\n")
    code, out, _ = run(capsys, "action", "--input", str(f))
    rows = out.splitlines()[2:]
    assert code == 0 and len(rows) == 2
    assert rows[0].startswith("3:111,3,2;1,")
    f.write_text("3:101\n")
    assert run(capsys, "action", "--input", str(f))[0] == 1


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep-N", "-n", "3..5", "--seed", "9", "--strategies", "quantum,relation", "--samples", "3"]
    assert main(args + ["-o", str(a)]) == 0
    assert main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[1] == "strategy,n,temperature,delta,delta_err,k,k_err"
    assert len(lines) == 2 + 6


def test_sample_trace(capsys):
    code, out, _ = run(capsys, "sample", "-n", "3", "--steps", "50", "--seed", "4", "--rule", "metropolis",
                       "--strategies", "classical-mixed")
    lines = out.splitlines()
    assert code == 0
    assert lines[1] == "strategy,n,temperature,step,set,action,accepted"
    assert len(lines) == 2 + 45


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("n: 3\nseed: 1\nrule: metropolis\ntemperature: [0.004, 0.04]\nstrategies: [relation]\n")
    code, out, _ = run(capsys, "sweep-T", "-c", str(cfg), "-n", "4")
    rows = out.splitlines()[2:]
    assert code == 0 and [r.split(",")[1] for r in rows] == ["4", "4"]


def test_exit_codes(capsys):
    assert run(capsys, "enumerate", "-n", "8")[0] == 2
    assert run(capsys, "sample", "-n", "3")[0] == 1
    assert run(capsys, "exactbd-verify", "-n", "4", "--lambda", "4")[0] == 3
    code, out, _ = run(capsys, "exactbd-verify", "-n", "3..4")
    assert code == 0 and "PASS" in out


def test_spectral_gap_rows(capsys, monkeypatch):
    monkeypatch.setenv("QCAUSET_WORKERS", "1")
    code, out, _ = run(capsys, "spectral-gap", "-n", "3", "--seed", "1", "--strategies", "relation")
    row = out.splitlines()[2].split(",")
    assert code == 0 and row[0] == "relation" and float(row[3]) == pytest.approx(0.1952621458756, abs=1e-9)


def test_worker_count_does_not_change_output(tmp_path, monkeypatch):
    args = ["spectral-gap", "-n", "3,4", "--seed", "5", "--strategies", "quantum", "--samples", "3"]
    outs = []
    for workers in ("1", "2"):
        monkeypatch.setenv("QCAUSET_WORKERS", workers)
        path = tmp_path / f"w{workers}.csv"
        assert main(args + ["-o", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
