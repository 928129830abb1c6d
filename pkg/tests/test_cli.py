import os
import textwrap

import numpy as np
import pytest

from qbrownian.cli import main
from qbrownian.config import initial_covariance_from_task, load_config
from qbrownian.errors import ConfigError
from qbrownian.phase_space import PhaseSpaceLayout


def write(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body))
    return str(path)


BASE = """
    [model]
    delta = 0.38

    [bath]
    gamma = 0.05
    cutoff = 10.0
    theta = 0.7

    [grid]
    t_max_gamma = 1.0
    points = 41
"""


def read_csv(path):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    assert lines[0].startswith("# ")
    header = lines[1].split(",")
    rows = [ln.split(",") for ln in lines[2:]]
    return header, rows


# ---------------------------------------------------------------------------
# configuration parsing


def test_config_requires_exactly_one_temperature(tmp_path):
    cfg = write(tmp_path, "bad.ini", BASE.replace("theta = 0.7", ""))
    with pytest.raises(ConfigError, match="temperature / theta"):
        load_config(cfg)
    cfg = write(
        tmp_path, "bad2.ini", BASE.replace("theta = 0.7", "theta = 0.7\ntemperature = 1")
    )
    with pytest.raises(ConfigError, match="temperature / theta"):
        load_config(cfg)


def test_config_missing_field_is_named(tmp_path):
    cfg = write(tmp_path, "bad.ini", BASE.replace("gamma = 0.05", ""))
    with pytest.raises(ConfigError, match="gamma"):
        load_config(cfg)
    cfg = write(tmp_path, "bad.ini", BASE.replace("t_max_gamma = 1.0", ""))
    with pytest.raises(ConfigError, match="t_max"):
        load_config(cfg)


def test_config_delta_expansion_normalizes_frequencies(tmp_path):
    cfg = load_config(write(tmp_path, "ok.ini", BASE))
    f = np.array(cfg.model.system.frequencies)
    assert abs((f**2).sum() - 1.0) < 1e-12
    assert abs(cfg.model.bath.temperature - 0.7) < 1e-12
    assert len(cfg.times) == 41
    assert cfg.times[-1] == pytest.approx(1.0 / 0.05)


def test_config_zero_gamma_needs_absolute_horizon(tmp_path):
    body = BASE.replace("gamma = 0.05", "gamma = 0.0")
    with pytest.raises(ConfigError, match="t_max"):
        load_config(write(tmp_path, "bad.ini", body))
    ok = body.replace("t_max_gamma = 1.0", "t_max = 10.0")
    cfg = load_config(write(tmp_path, "ok.ini", ok))
    assert cfg.times[-1] == 10.0


def test_initial_state_presets(tmp_path):
    layout = PhaseSpaceLayout(2)
    assert initial_covariance_from_task({}, layout) is None
    V = initial_covariance_from_task({"initial_state": "vacuum"}, layout)
    np.testing.assert_array_equal(V, 0.5 * np.eye(4))
    V = initial_covariance_from_task({"initial_state": "thermal:1.5"}, layout)
    np.testing.assert_array_equal(V, 1.5 * np.eye(4))
    V = initial_covariance_from_task({"initial_state": "two-mode-squeezed:0.8"}, layout)
    assert V.shape == (4, 4)
    V = initial_covariance_from_task(
        {"initial_state": "factorized-squeezed:0.5,0.2"}, layout
    )
    assert V.shape == (4, 4)
    V = initial_covariance_from_task(
        {"initial_state": "matrix:1,0,0,0; 0,1,0,0; 0,0,1,0; 0,0,0,1"}, layout
    )
    np.testing.assert_array_equal(V, np.eye(4))
    with pytest.raises(ConfigError):
        initial_covariance_from_task({"initial_state": "wigner"}, layout)


# ---------------------------------------------------------------------------
# subcommands


def test_propagator_zero_coupling_writes_zero_diffusion(tmp_path):
    body = BASE.replace("gamma = 0.05", "gamma = 0.0").replace(
        "t_max_gamma = 1.0", "t_max = 5.0"
    )
    cfg = write(tmp_path, "run.ini", body)
    out = str(tmp_path)
    assert main(["propagator", "--config", cfg, "--out", out]) == 0
    header, rows = read_csv(os.path.join(out, "propagator.csv"))
    assert header[0] == "t" and "R_0_0" in header and "S_3_3" in header
    s_cols = [i for i, h in enumerate(header) if h.startswith("S_")]
    for row in rows:
        assert all(float(row[i]) == 0.0 for i in s_cols)


def test_bounds_with_two_mode_squeezed_initial_state(tmp_path):
    body = BASE + "\n[task]\ninitial_state = two-mode-squeezed:1.0\nmode = analytic\n"
    cfg = write(tmp_path, "run.ini", body)
    out = str(tmp_path)
    assert main(["bounds", "--config", cfg, "--out", out]) == 0
    header, rows = read_csv(os.path.join(out, "bounds.csv"))
    i_lb = header.index("lambda_bound")
    i_lm = header.index("lambda_min")
    first, last = rows[0], rows[-1]
    assert float(first[i_lb]) == pytest.approx(-1.0, abs=1e-9)
    assert float(first[i_lm]) < 0  # squeezed state starts entangled
    # the bound is respected everywhere
    for row in rows:
        assert float(row[i_lm]) >= float(row[i_lb]) - 1e-8


def test_bounds_vacuum_is_constant_for_closed_unit_oscillators(tmp_path):
    body = """
        [model]
        frequencies = 1.0, 1.0

        [bath]
        gamma = 0.0
        cutoff = 10.0
        temperature = 0.0

        [grid]
        t_max = 12.0
        points = 25

        [task]
        initial_state = vacuum
    """
    cfg = write(tmp_path, "run.ini", body)
    out = str(tmp_path)
    assert main(["bounds", "--config", cfg, "--out", out]) == 0
    header, rows = read_csv(os.path.join(out, "bounds.csv"))
    i_lm = header.index("lambda_min")
    vals = np.array([float(r[i_lm]) for r in rows])
    np.testing.assert_allclose(vals, 0.0, atol=1e-10)


def test_bounds_rejects_unphysical_initial_matrix(tmp_path):
    body = BASE + (
        "\n[task]\ninitial_state = matrix:"
        "0.1,0,0,0; 0,0.1,0,0; 0,0,0.1,0; 0,0,0,0.1\n"
    )
    cfg = write(tmp_path, "run.ini", body)
    assert main(["bounds", "--config", cfg, "--out", str(tmp_path)]) == 3


def test_tdis_sweep_and_zero_coupling_status(tmp_path):
    body = BASE.replace("t_max_gamma = 1.0", "t_max_gamma = 8.0").replace(
        "points = 41", "points = 321"
    ) + "\n[task]\nthetas = 5.0\ndeltas = 0.38\n"
    cfg = write(tmp_path, "run.ini", body)
    out = str(tmp_path)
    assert main(["tdis", "--config", cfg, "--out", out]) == 0
    header, rows = read_csv(os.path.join(out, "tdis.csv"))
    assert header == ["theta", "delta", "t_dis_gamma", "status"]
    assert rows[0][3] == "crossed"
    assert 0.0 < float(rows[0][2]) < 1.0  # finite and well under 1/gamma

    body0 = body.replace("gamma = 0.05", "gamma = 0.0").replace(
        "t_max_gamma = 8.0", "t_max = 40.0"
    )
    cfg0 = write(tmp_path, "run0.ini", body0)
    assert main(["tdis", "--config", cfg0, "--out", out]) == 0
    _, rows0 = read_csv(os.path.join(out, "tdis.csv"))
    assert rows0[0][2] == ""
    assert rows0[0][3].startswith("no-crossing")


def test_oracle_check_uncoupled_deviation_is_tiny(tmp_path):
    body = """
        [model]
        delta = 0.38

        [bath]
        gamma = 0.0
        cutoff = 5.0
        theta = 0.21

        [grid]
        t_max = 10.0
        points = 6

        [task]
        bath_modes = 40
    """
    cfg = write(tmp_path, "run.ini", body)
    out = str(tmp_path)
    assert main(["oracle-check", "--config", cfg, "--out", out]) == 0
    path = os.path.join(out, "oracle_check.csv")
    with open(path) as fh:
        comment = fh.readline()
    assert "result=pass" in comment
    header, rows = read_csv(path)
    assert max(float(r[1]) for r in rows) < 1e-10


def test_oracle_check_small_run(tmp_path):
    body = BASE.replace("cutoff = 10.0", "cutoff = 5.0").replace(
        "theta = 0.7", "theta = 0.21"
    ).replace("t_max_gamma = 1.0", "t_max = 15.0").replace("points = 41", "points = 7")
    body += "\n[task]\nbath_modes = 120\n"
    cfg = write(tmp_path, "run.ini", body)
    out = str(tmp_path)
    assert main(["oracle-check", "--config", cfg, "--out", out]) == 0
    with open(os.path.join(out, "oracle_check.csv")) as fh:
        comment = fh.readline()
    assert "result=pass" in comment


def test_oracle_check_respects_recurrence_limit(tmp_path):
    body = BASE.replace("cutoff = 10.0", "cutoff = 5.0").replace(
        "t_max_gamma = 1.0", "t_max = 100.0"
    ) + "\n[task]\nbath_modes = 40\n"
    cfg = write(tmp_path, "run.ini", body)
    assert main(["oracle-check", "--config", cfg, "--out", str(tmp_path)]) == 3


def test_plot_generates_svg_and_validates_columns(tmp_path):
    body = BASE + "\n[task]\nmode = analytic\n"
    cfg = write(tmp_path, "run.ini", body)
    out = str(tmp_path)
    assert main(["bounds", "--config", cfg, "--out", out]) == 0
    csv = os.path.join(out, "bounds.csv")
    svg = os.path.join(out, "fig.svg")
    assert main(["plot", csv, "--columns", "lambda_bound,lambda_tilde_bound",
                 "--svg", svg]) == 0
    content = open(svg).read()
    assert content.startswith("<svg") and "polyline" in content
    assert "lambda_bound" in content
    assert main(["plot", csv, "--columns", "nope", "--svg", svg]) == 1


def test_plot_rejects_empty_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["plot", str(empty)]) == 1


def test_usage_errors_exit_one():
    assert main(["bogus-subcommand"]) == 1
    assert main(["bounds"]) == 1  # missing --config


def test_missing_config_file_is_config_error(tmp_path):
    assert main(["bounds", "--config", str(tmp_path / "nope.ini"),
                 "--out", str(tmp_path)]) == 1


def test_determinism_byte_identical_outputs(tmp_path):
    body = BASE + "\n[task]\ninitial_state = vacuum\nmode = analytic\n"
    cfg = write(tmp_path, "run.ini", body)
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["bounds", "--config", cfg, "--out", out1, "--seed", "11"]) == 0
    assert main(["bounds", "--config", cfg, "--out", out2, "--seed", "11"]) == 0
    b1 = open(os.path.join(out1, "bounds.csv"), "rb").read()
    b2 = open(os.path.join(out2, "bounds.csv"), "rb").read()
    assert b1 == b2


def test_bounds_envelope_draws_follow_seed(tmp_path):
    body = BASE + "\n[task]\nmode = analytic\nenvelope_draws = 5\n"
    cfg = write(tmp_path, "run.ini", body)
    outs = {}
    for seed in (3, 3, 4):
        out = str(tmp_path / f"s{seed}_{len(outs)}")
        assert main(["bounds", "--config", cfg, "--out", out, "--seed", str(seed)]) == 0
        outs[len(outs)] = open(os.path.join(out, "bounds.csv"), "rb").read()
    assert outs[0] == outs[1]          # same seed, same bytes
    assert outs[0] != outs[2]          # different seed, different draws
    header, rows = read_csv(os.path.join(str(tmp_path / "s3_0"), "bounds.csv"))
    i_env = header.index("lambda_min_envelope")
    i_lb = header.index("lambda_bound")
    for row in rows:
        assert float(row[i_env]) >= float(row[i_lb]) - 1e-8


def test_bounds_tripartite_flag(tmp_path):
    body = """
        [model]
        frequencies = 0.66, 0.55, 0.43
        oscillators = 3

        [bath]
        gamma = 0.02
        cutoff = 10.0
        theta = 0.21

        [grid]
        t_max = 40.0
        points = 21

        [task]
        tripartite = true
    """
    cfg = write(tmp_path, "run.ini", body)
    out = str(tmp_path)
    assert main(["bounds", "--config", cfg, "--out", out]) == 0
    header, rows = read_csv(os.path.join(out, "bounds.csv"))
    assert "sufficiency_min_2" in header and "factorizability_max_3" in header
    # initial values: sufficiency min eig = -1, factorizability matrix = 0
    assert float(rows[0][header.index("sufficiency_min_1")]) == pytest.approx(-1.0, abs=1e-9)
    assert abs(float(rows[0][header.index("factorizability_max_1")])) < 1e-9


def test_bounds_tripartite_requires_three_oscillators(tmp_path):
    body = BASE + "\n[task]\ntripartite = true\n"
    cfg = write(tmp_path, "run.ini", body)
    assert main(["bounds", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_threads_do_not_change_results(tmp_path):
    body = BASE.replace("t_max_gamma = 1.0", "t_max_gamma = 6.0").replace(
        "points = 41", "points = 201"
    ) + "\n[task]\nthetas = 1.0, 2.0\ndeltas = 0.38\n"
    cfg = write(tmp_path, "run.ini", body)
    out1, out2 = str(tmp_path / "t1"), str(tmp_path / "t4")
    assert main(["tdis", "--config", cfg, "--out", out1]) == 0
    assert main(["tdis", "--config", cfg, "--out", out2, "--threads", "4"]) == 0
    assert (
        open(os.path.join(out1, "tdis.csv"), "rb").read()
        == open(os.path.join(out2, "tdis.csv"), "rb").read()
    )
