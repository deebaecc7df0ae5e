import pytest

from fastrip.cli import EXIT_CONFIG, EXIT_OK, main
from fastrip.config import ExperimentConfig, emit_config, normalize_config_text, parse_config
from fastrip.errors import ConfigParse


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig(construction="theorem2", n=64, k=8, s=1, kappa_override=0.3,
                               n_list=(64, 128), timing=True, master_seed=5)
        assert parse_config(emit_config(cfg)) == cfg

    def test_normalization_idempotent(self):
        text = "# comment\nk = 4\n  n=32  \ntrials = 0x100\n"
        once = normalize_config_text(text)
        assert normalize_config_text(once) == once
        assert parse_config(once).trials == 256

    @pytest.mark.parametrize("text", [
        "bogus = 1\n",
        "n = 16\nn = 32\n",
        "n = sixteen\n",
        "construction = magic\n",
        "timing = maybe\n",
    ])
    def test_rejected(self, text):
        with pytest.raises(ConfigParse):
            parse_config(text)


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_rip_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, "n = 16\nk = 8\ns = 2\ntrials = 2000\n")
    outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for out in outs:
        assert main(["rip", "--config", cfg, "--seed", "42", "--out", str(out), "--quiet"]) == EXIT_OK
    first, second = (p.read_bytes() for p in outs)
    assert first == second
    lines = first.decode().splitlines()
    assert lines[0].startswith("# fastrip rip | construction=theorem1; n=16; k=8; s=2")
    assert "master_seed=42" in lines[0]
    assert lines[1].split(",")[:3] == ["construction", "n", "k"]
    assert len(lines) == 4  # header, columns, exact, monte-carlo


def test_kappa_too_large_exit(tmp_path, capsys):
    cfg = write_config(tmp_path, "construction = theorem2\nn = 1024\nk = 40\ns = 8\n")
    assert main(["build", "--config", cfg]) == EXIT_CONFIG
    assert "1.47176" in capsys.readouterr().err


def test_chaos_full_sampling(tmp_path, capsys):
    cfg = write_config(tmp_path, "n = 32\nk = 32\ntrials = 500\n")
    assert main(["chaos", "--config", cfg]) == EXIT_OK
    captured = capsys.readouterr()
    assert "variance     = 0.000000" in captured.err
    row = captured.out.splitlines()[2].split(",")
    assert float(row[7]) == pytest.approx(0.0, abs=1e-20)


@pytest.mark.parametrize("command", ["build", "recover", "bench"])
def test_other_commands(tmp_path, capsys, command):
    cfg = write_config(tmp_path, "n = 64\nk = 32\ns = 2\ninstances = 3\nn_list = 64,128\n")
    assert main([command, "--config", cfg, "--quiet"]) == EXIT_OK
    assert capsys.readouterr().out.startswith(f"# fastrip {command} |")


def test_missing_and_malformed_config(tmp_path):
    assert main(["build", "--config", str(tmp_path / "nope.cfg"), "--quiet"]) == EXIT_CONFIG
    bad = write_config(tmp_path, "n = 12\n")
    assert main(["build", "--config", bad, "--quiet"]) == EXIT_CONFIG
    unknown = write_config(tmp_path, "colour = red\n", "u.cfg")
    assert main(["build", "--config", unknown, "--quiet"]) == EXIT_CONFIG


def test_regime_warning_is_logged(tmp_path, capsys):
    cfg = write_config(tmp_path, "n = 64\nk = 32\ns = 2\n")
    assert main(["build", "--config", cfg]) == EXIT_OK
    assert "regime" in capsys.readouterr().err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
