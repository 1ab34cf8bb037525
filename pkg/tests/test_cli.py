from pathlib import Path

from sscl import cli
from sscl.config import ExperimentConfig, serialize_config

SIMULATE = ExperimentConfig(dimension=1, cells=(128,), flux="burgers",
                            initial="sine", horizon=1.0, segments=32,
                            seed=3, times="linspace(0.25,1,4)", replicas=2)


def write_cfg(tmp_path, cfg, name="exp.ini"):
    p = tmp_path / name
    p.write_text(serialize_config(cfg))
    return p


def run_in(tmp_path, monkeypatch, sub, cfg, outname="out"):
    monkeypatch.setenv("SSCL_OUT", str(tmp_path / outname))
    return cli.run(sub, write_cfg(tmp_path, cfg))


def read_tree(root: Path):
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_unknown_subcommand_exit_2(tmp_path, capsys):
    assert cli.run("frobnicate", write_cfg(tmp_path, SIMULATE)) == 2


def test_missing_config_exit_2(tmp_path):
    assert cli.run("simulate", tmp_path / "absent.ini") == 2


def test_invalid_config_exit_2(tmp_path, monkeypatch):
    bad = ExperimentConfig(dimension=1, cells=(32,), flux="diagonal_power(1)")
    assert run_in(tmp_path, monkeypatch, "simulate", bad) == 2


def test_simulate_passes_and_writes(tmp_path, monkeypatch, capsys):
    code = run_in(tmp_path, monkeypatch, "simulate", SIMULATE)
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("simulate: PASS")
    root = tmp_path / "out"
    files = read_tree(root)
    names = {Path(k).name for k in files}
    assert {"config.ini", "record.csv", "ledger.csv"} <= names


def test_simulate_constant_data(tmp_path, monkeypatch, capsys):
    cfg = ExperimentConfig(dimension=1, cells=(64,), flux="burgers",
                           initial="constant(0.4)", horizon=0.5, segments=8,
                           seed=1, times="linspace(0.25,0.5,2)")
    assert run_in(tmp_path, monkeypatch, "simulate", cfg) == 0
    assert "PASS" in capsys.readouterr().out


def test_decay_det_passes(tmp_path, monkeypatch, capsys):
    cfg = ExperimentConfig(dimension=1, cells=(512,), flux="burgers",
                           initial="sine", horizon=50.0,
                           times="geometric(1,1.25)", ledger=False,
                           fit_window=(5.0, 50.0))
    assert run_in(tmp_path, monkeypatch, "decay-det", cfg) == 0
    assert "decay-det: PASS" in capsys.readouterr().out


def test_decay_small_ensemble(tmp_path, monkeypatch, capsys):
    cfg = ExperimentConfig(dimension=1, cells=(128,), flux="burgers",
                           initial="sine", horizon=20.0, segments=640,
                           seed=31, times="geometric(1,1.25)", ledger=False,
                           replicas=6, fit_window=(1.0, 20.0))
    assert run_in(tmp_path, monkeypatch, "decay", cfg) == 0
    assert "decay: PASS" in capsys.readouterr().out


def test_nonlinearity_passes(tmp_path, monkeypatch, capsys):
    cfg = ExperimentConfig(dimension=1, cells=(64,), flux="power_law(2)",
                           initial="sine")
    assert run_in(tmp_path, monkeypatch, "nonlinearity", cfg) == 0
    assert "nonlinearity: PASS" in capsys.readouterr().out


def test_verify_split_cli(tmp_path, monkeypatch, capsys):
    cfg = ExperimentConfig(dimension=1, cells=(64,), flux="burgers",
                           initial="sine", gamma=1.0, alpha=0.5,
                           verify_time=0.1, quad_buckets=32, xi_bins=128,
                           test_modes=(1,))
    assert run_in(tmp_path, monkeypatch, "verify-split", cfg) == 0
    assert "verify-split: PASS" in capsys.readouterr().out


def test_verify_lemma_cli_small(tmp_path, monkeypatch, capsys):
    cfg = ExperimentConfig(lemma_instances=5, seed=12)
    assert run_in(tmp_path, monkeypatch, "verify-lemma", cfg) == 0
    out = capsys.readouterr().out
    assert "verify-lemma: PASS" in out


def test_scaling_u0_cli(tmp_path, monkeypatch, capsys):
    cfg = ExperimentConfig(dimension=1, cells=(64,), flux="burgers",
                           initial="sine", horizon=2.0, segments=128,
                           seed=2024, mc_paths=32,
                           scaling_gammas=(1.0, 2.0, 4.0, 8.0))
    assert run_in(tmp_path, monkeypatch, "scaling-u0", cfg) == 0
    assert "scaling-u0: PASS" in capsys.readouterr().out


def test_rerun_bitwise_identical(tmp_path, monkeypatch):
    monkeypatch.setenv("SSCL_OUT", str(tmp_path / "a"))
    assert cli.run("simulate", write_cfg(tmp_path, SIMULATE)) == 0
    monkeypatch.setenv("SSCL_OUT", str(tmp_path / "b"))
    assert cli.run("simulate", write_cfg(tmp_path, SIMULATE)) == 0
    ta, tb = read_tree(tmp_path / "a"), read_tree(tmp_path / "b")
    assert ta.keys() == tb.keys() and len(ta) >= 3
    for k in ta:
        assert ta[k] == tb[k], f"{k} differs between reruns"


def test_main_entry(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SSCL_OUT", str(tmp_path / "out"))
    code = cli.main(["simulate", str(write_cfg(tmp_path, SIMULATE))])
    assert code == 0
