import pytest

from omit_lab.cli import main
from omit_lab.config import bundled_config_path


def preset(fig_id):
    return str(bundled_config_path(fig_id))


def test_figure_writes_table_and_plot(tmp_path, capsys):
    assert main(["figure", "fig2a", "--out", str(tmp_path), "--points", "201"]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig2a.csv", "fig2a.json", "fig2a.svg"]
    assert "wrote" in capsys.readouterr().out


def test_unknown_subcommand(capsys):
    assert main(["bogus"]) == 2
    err = capsys.readouterr().err
    assert "Usage:" in err and "error[usage]" in err


def test_missing_option_is_usage_error():
    assert main(["spectrum"]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "figure" in capsys.readouterr().out


def test_spectrum_from_config(tmp_path):
    rc = main(["spectrum", "--config", preset("fig3a"), "--out", str(tmp_path), "--points", "101",
               "--format", "json", "--eta", "0.5", "--phi-over-pi", "1"])
    assert rc == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["fig3a.json", "fig3a.svg"]


def test_sweep2d_defaults_eta_axis(tmp_path):
    rc = main(["sweep2d", "--config", preset("fig2a"), "--out", str(tmp_path), "--points", "51"])
    assert rc == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["fig2a.bmp", "fig2a.csv", "fig2a.svg"]
    lines = (tmp_path / "fig2a.csv").read_text().splitlines()
    assert len(lines) == 1 + 9 * 51


def test_io_collision_exit_code(tmp_path, capsys):
    args = ["figure", "fig2b", "--out", str(tmp_path), "--points", "11"]
    assert main(args) == 0
    assert main(args) == 5
    assert "error[io]" in capsys.readouterr().err
    assert main(args + ["--overwrite"]) == 0


def test_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[system]\nomega_b = 1\n")
    assert main(["steady", "--config", str(bad)]) == 3
    assert "error[validation]" in capsys.readouterr().err


def test_steady_prints_state(capsys):
    assert main(["steady", "--config", preset("fig2a")]) == 0
    out = capsys.readouterr().out
    assert "a_s = 17118.67557399" in out
    assert "gauge = real-G" in out


def test_dressed_prints_modes(capsys):
    assert main(["dressed", "--config", preset("fig2a")]) == 0
    out = capsys.readouterr().out
    assert "lambda_plus_over_2pi_hz = 70+320000j" in out


@pytest.mark.parametrize("threads", ["1", "4"])
def test_figure_csv_independent_of_threads(tmp_path, monkeypatch, threads):
    monkeypatch.setenv("OMIT_LAB_THREADS", "1")
    assert main(["figure", "fig2a", "--out", str(tmp_path / "ref")]) == 0
    monkeypatch.setenv("OMIT_LAB_THREADS", threads)
    assert main(["figure", "fig2a", "--out", str(tmp_path / "run")]) == 0
    assert (tmp_path / "ref" / "fig2a.csv").read_bytes() == (tmp_path / "run" / "fig2a.csv").read_bytes()


def test_verify_quick(capsys):
    assert main(["verify", "--quick", "--draws", "50", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2
    assert "envelope" in out and "seed 7" in out
