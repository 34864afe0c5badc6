import csv
import math

import numpy as np
import pytest

from ridgephase import io as rio
from ridgephase.cli import main
from ridgephase.config import RunConfig, format_config, parse_config
from ridgephase.errors import ConfigError
from ridgephase.states import JonesVector

SMALL = """\
# reduced detector for quick runs
nx = 200
ny = 160
dx = 18e-6
dy = 18e-6
"""


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------- config

def test_defaults_follow_reference_setup():
    cfg = RunConfig()
    assert cfg.wavelength == 532e-9 and cfg.distance == 2.0
    assert (cfg.nx, cfg.ny, cfg.dx, cfg.dy) == (640, 480, 9e-6, 8e-6)
    assert cfg.geometry().separation(1, 2) == pytest.approx(1.5e-3)
    assert len(cfg.sweep_thetas) == 36 and cfg.sweep_thetas[-1] == 175.0


def test_parse_values():
    cfg = parse_config(
        "wavelength = 633nm  # HeNe\n"
        "distance = 1.5\n"
        "states = paper:45\n"
        "sweep_thetas = 10:30:10\n"
        "gauge_shifts = 1:0.5, 3:-1\n"
        "noise_counts = 500\n"
        "model = paraxial\n"
    )
    assert cfg.wavelength == pytest.approx(633e-9)
    assert cfg.paper_theta == 45.0
    assert cfg.sweep_thetas == (10.0, 20.0, 30.0)
    assert cfg.gauge_shifts == ((1, 0.5), (3, -1.0))
    assert cfg.noise().mean_counts == 500
    assert cfg.model == "paraxial"


def test_round_trip_default():
    cfg = RunConfig()
    assert parse_config(format_config(cfg)) == cfg


def test_round_trip_explicit_states():
    rng = np.random.default_rng(2)
    states = tuple(JonesVector.normalized(*(rng.normal(size=2) + 1j * rng.normal(size=2))) for _ in range(3))
    cfg = RunConfig(states=states, paper_theta=None, phases=(0.1, -0.2, 3.0), noise_counts=123.0,
                    noise_seed=9, bit_depth=8, gauge_shifts=(), center=(1e-4, -2e-4))
    assert parse_config(format_config(cfg)) == cfg


def test_unnormalized_state_is_normalized():
    cfg = parse_config("state1 = 2, 0, 0, 0\nstate2 = 0, 0, 1, 0\nstate3 = 1, 0, 1, 0\n")
    assert cfg.states[0] == JonesVector(1.0, 0.0)
    assert abs(cfg.states[2].h) == pytest.approx(1 / math.sqrt(2))


@pytest.mark.parametrize("text, line, key", [
    ("nx = 10\nbogus = 1\n", 2, "bogus"),
    ("distance = abc\n", 1, "distance"),
    ("\n\nmodel = fresnel\n", 3, "model"),
    ("gauge_shifts = 4:1.0\n", 1, "gauge_shifts"),
    ("just words\n", 1, None),
])
def test_parse_errors_carry_location(text, line, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.key == key
    assert f"line {line}" in str(info.value)


def test_validation_errors():
    with pytest.raises(ConfigError, match="distance"):
        parse_config("distance = -1\n")
    with pytest.raises(ConfigError, match="bit_depth"):
        parse_config("bit_depth = 12\n")
    with pytest.raises(ConfigError):
        parse_config("pinhole1 = 0, 0\n")


# ---------------------------------------------------------------- cli

def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--config", "--out", "--seed", "--threads", "simulate", "extract", "sweep", "gauge"):
        assert flag in out


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--bogus"])
    assert info.value.code == 2


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nx = 100\nwavelenght = 500nm\n")
    code, _, err = run(["--config", bad, "simulate"], capsys)
    assert code == 2
    assert "line 2" in err and "wavelenght" in err


def test_simulate_default(tmp_path, capsys):
    out = tmp_path / "sim"
    code, _, _ = run(["simulate", "--out", out], capsys)
    assert code == 0
    raster, k = rio.read_pgm(out / "interferogram.pgm")
    assert raster.pixels.shape == (480, 640) and raster.bit_depth == 16
    assert k == pytest.approx(2 * math.pi / 532e-9)
    text = (out / "validity.txt").read_text()
    # the strict margin includes the pinhole offset and lands just above 0.1
    assert "paraxial_valid = no" in text
    assert parse_config((out / "config.txt").read_text()) == RunConfig(output=str(out))


def test_simulate_collinear(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(SMALL + "pinhole1 = 0, 0\npinhole2 = 1e-3, 0\npinhole3 = 2e-3, 0\n")
    code, _, err = run(["--config", cfg, "--out", tmp_path / "o", "simulate"], capsys)
    assert code == 3
    assert "collinear" in err.lower()


def test_paper_states_match_explicit(tmp_path, capsys):
    from ridgephase.states import paper_states
    s = paper_states(math.pi / 2)
    explicit = "".join(
        f"state{i} = {st.h.real!r}, {st.h.imag!r}, {st.v.real!r}, {st.v.imag!r}\n" for i, st in enumerate(s, 1))
    a, b = tmp_path / "a.cfg", tmp_path / "b.cfg"
    a.write_text(SMALL + "states = paper:90\n")
    b.write_text(SMALL + explicit)
    assert run(["--config", a, "--out", tmp_path / "a", "simulate"], capsys)[0] == 0
    assert run(["--config", b, "--out", tmp_path / "b", "simulate"], capsys)[0] == 0
    assert (tmp_path / "a" / "interferogram.rph").read_bytes() == (tmp_path / "b" / "interferogram.rph").read_bytes()


def test_extract_round_trip(tmp_path, small_cfg, capsys):
    sim = tmp_path / "sim"
    assert run(["--config", small_cfg, "--out", sim, "simulate"], capsys)[0] == 0
    for name in ("interferogram.rph", "interferogram.pgm"):
        ex_out = tmp_path / f"ex_{name}"
        code, out, _ = run(["--config", small_cfg, "extract", sim / name, "--out", ex_out], capsys)
        assert code == 0
        summary = dict(line.split(" ", 1) for line in (ex_out / "summary.txt").read_text().splitlines())
        assert float(summary["delta3_phase_route"]) == pytest.approx(math.pi, abs=1e-3)
        assert float(summary["delta3_area_route"]) == pytest.approx(math.pi, abs=1e-3)
        for f in ("families.csv", "triangles.csv", "overlay.pgm"):
            assert (ex_out / f).exists()


def test_extract_truncated(tmp_path, small_cfg, capsys):
    sim = tmp_path / "sim"
    run(["--config", small_cfg, "--out", sim, "simulate"], capsys)
    data = (sim / "interferogram.rph").read_bytes()
    (tmp_path / "cut.rph").write_bytes(data[:-100])
    code, _, err = run(["extract", tmp_path / "cut.rph", "--out", tmp_path / "x"], capsys)
    assert code == 4 and "format error" in err
    code, _, _ = run(["extract", tmp_path / "missing.rph", "--out", tmp_path / "x"], capsys)
    assert code == 4


def test_extract_orthogonal_pair_warns(tmp_path, capsys):
    cfg = tmp_path / "o.cfg"
    cfg.write_text(SMALL + "state1 = 1, 0, 0, 0\nstate2 = 0, 0, 1, 0\nstate3 = 0.7071067811865476, 0, "
                   "0.7071067811865476, 0\n")
    run(["--config", cfg, "--out", tmp_path / "s", "simulate"], capsys)
    code, _, err = run(["--config", cfg, "extract", tmp_path / "s" / "interferogram.rph",
                        "--out", tmp_path / "e"], capsys)
    assert code == 0
    assert "warning" in err and "P12" in err


def test_sweep_command(tmp_path, small_cfg, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SMALL + "sweep_thetas = 30:150:30\n")
    code, out, _ = run(["--config", cfg, "--out", tmp_path / "w", "--threads", 2, "sweep"], capsys)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "w" / "sweep.csv").open()))
    assert [float(r["theta_deg"]) for r in rows] == [30, 60, 90, 120, 150]
    assert out.count("PASS") == 4
    assert (tmp_path / "w" / "theta_090.00_overlay.pgm").exists()


def test_gauge_no_shifts(tmp_path, capsys):
    cfg = tmp_path / "g.cfg"
    cfg.write_text(SMALL + "gauge_shifts =\n")
    code, out, _ = run(["--config", cfg, "--out", tmp_path / "g", "gauge"], capsys)
    # only a baseline: nothing to judge, so the report is not a pass
    assert code == 1
    assert "FAIL" in out


def test_seed_changes_pixels_not_verdict(tmp_path, capsys):
    cfg = tmp_path / "n.cfg"
    cfg.write_text(SMALL + "noise_counts = 5000\nsweep_thetas = 60:120:60\n")
    outs = []
    for seed in (1, 2):
        d = tmp_path / f"seed{seed}"
        code, out, _ = run(["--config", cfg, "--out", d, "--seed", seed, "sweep"], capsys)
        outs.append((code, [ln.split()[0] for ln in out.splitlines() if ln.startswith(("PASS", "FAIL"))]))
    assert outs[0] == outs[1]
    a = (tmp_path / "seed1" / "theta_060.00_interferogram.pgm").read_bytes()
    b = (tmp_path / "seed2" / "theta_060.00_interferogram.pgm").read_bytes()
    assert a != b
