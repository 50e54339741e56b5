import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseqec.circuits import encoder_circuit
from phaseqec.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from phaseqec.config import ConfigError, DelayGrid, ExperimentConfig, defaults_for


def read_table(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def write_ini(path, text):
    path.write_text(text)
    return str(path)


# --- config -------------------------------------------------------------------

finite = st.floats(0.01, 100, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(
    exp=st.sampled_from(["alanine", "tce", "custom"]),
    model=st.sampled_from(["correlated", "independent"]),
    tau=finite,
    t2=st.tuples(finite, finite, finite),
    start=st.floats(0.001, 1),
    span=st.floats(0.1, 10),
    count=st.integers(1, 50),
    spacing=st.sampled_from(["linear", "log"]),
    mode=st.sampled_from(["decode", "correct", "both"]),
    tbt=st.booleans(),
    window=st.integers(3, 10),
    workers=st.integers(1, 8),
    mc=st.booleans(),
    samples=st.integers(1, 10 ** 7),
    seed=st.integers(0, 2 ** 32),
    out=st.text("abcxyz/_-.0123456789", min_size=1, max_size=20),
)
def test_config_round_trip(exp, model, tau, t2, start, span, count, spacing, mode, tbt,
                           window, workers, mc, samples, seed, out):
    cfg = ExperimentConfig(
        experiment=exp, model=model, tau=tau, t2=t2,
        delays=DelayGrid(start, start + span, count, spacing),
        mode=mode, term_by_term=tbt, slope_window=window, workers=workers,
        mc_enabled=mc, mc_samples=samples, mc_seed=seed, output=out,
        circuit="enc.txt" if exp == "custom" else None,
    )
    assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg


def test_config_defaults_from_partial_file(tmp_path):
    cfg = ExperimentConfig.from_file(write_ini(tmp_path / "c.ini", "[model]\nkind = correlated\n"), "tce")
    assert cfg.experiment == "tce" and cfg.model == "correlated"
    assert cfg.delays == DelayGrid(0.01, 2.0, 9, "log")
    assert defaults_for("alanine").delays == DelayGrid(0.0, 2.0, 41, "linear")


@pytest.mark.parametrize("text, msg", [
    ("[bogus]\nx = 1\n", "unknown section"),
    ("[experiment]\nkind = alanine\n", "not 'tce'"),
    ("[model]\nkind = fancy\n", "model kind"),
    ("[model]\nt2 = 1, -2, 3\n", "T2"),
    ("[model]\nt2 = 1, 2\n", "3 T2"),
    ("[delays]\nstart = 0\nspacing = log\n", "log-spaced"),
    ("[delays]\ncount = many\n", "count"),
    ("[run]\nslope_window = 2\n", "slope window"),
    ("[run]\nterm_by_term = perhaps\n", "boolean"),
    ("[output]\ndirectory =\n", "non-empty"),
    ("not ini at all", "c.ini"),
])
def test_config_errors(tmp_path, text, msg):
    with pytest.raises(ConfigError, match=msg):
        ExperimentConfig.from_file(write_ini(tmp_path / "c.ini", text), "tce")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        ExperimentConfig.from_file(tmp_path / "nope.ini")


# --- tce / custom ---------------------------------------------------------------


def test_tce_outputs_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["tce", "--out", str(a)]) == EXIT_OK
    assert "slope ratio" in capsys.readouterr().out
    assert main(["tce", "--out", str(b), "--workers", "3"]) == EXIT_OK
    for name in ("fidelity_decode.csv", "fidelity_correct.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "fidelity.svg").exists()
    echoed = ExperimentConfig.from_file(a / "config.ini")
    assert echoed == defaults_for("tce").replace(output=str(a))
    summary = json.loads((a / "summary.json").read_text())
    assert 5 <= summary["slope_ratio"] <= 20
    header, data = read_table(a / "fidelity_correct.csv")
    assert header == ["delay", "f_x", "f_y", "f_z", "f"]
    assert np.allclose(data[:, 4], 0.25 * (1 + data[:, 1:4].sum(axis=1)))


def test_tce_config_echo_is_rerunnable(tmp_path):
    a = tmp_path / "a"
    assert main(["tce", "--out", str(a), "--mode", "correct"]) == EXIT_OK
    b = tmp_path / "b"
    assert main(["tce", "--config", str(a / "config.ini"), "--out", str(b)]) == EXIT_OK
    assert (a / "fidelity_correct.csv").read_bytes() == (b / "fidelity_correct.csv").read_bytes()
    assert not (b / "fidelity_decode.csv").exists()


def test_custom_with_builtin_encoder_matches_tce(tmp_path):
    circ = tmp_path / "enc.txt"
    circ.write_text("# the built-in network\n" + encoder_circuit().to_text())
    assert main(["tce", "--out", str(tmp_path / "t")]) == EXIT_OK
    assert main(["custom", str(circ), "--out", str(tmp_path / "c")]) == EXIT_OK
    for name in ("fidelity_decode.csv", "fidelity_correct.csv"):
        assert (tmp_path / "t" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
    assert (tmp_path / "c" / "circuit.txt").read_text() == circ.read_text()


def test_custom_empty_circuit_is_bare_dephasing(tmp_path):
    circ = tmp_path / "empty.txt"
    circ.write_text("# no gates\n")
    assert main(["custom", str(circ), "--out", str(tmp_path / "o")]) == EXIT_OK
    t2 = defaults_for("custom").t2
    for mode in ("decode", "correct"):
        _, data = read_table(tmp_path / "o" / f"fidelity_{mode}.csv")
        t = data[:, 0]
        assert np.allclose(data[:, 1], np.exp(-t / t2[0]), rtol=1e-12)
        assert np.allclose(data[:, 2], np.exp(-t / t2[0]), rtol=1e-12)
        assert np.allclose(data[:, 3], 1.0, atol=1e-12)


def test_custom_malformed_circuit(tmp_path, capsys):
    circ = tmp_path / "bad.txt"
    circ.write_text("CNOT 1 2\nRY ninety 1\n")
    out = tmp_path / "o"
    assert main(["custom", str(circ), "--out", str(out)]) == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err


def test_custom_missing_circuit(tmp_path, capsys):
    assert main(["custom", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "cannot read circuit" in capsys.readouterr().err


def test_empty_output_path(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["tce", "--out", ""]) == EXIT_CONFIG
    assert "non-empty" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_zero_delay_gives_unit_fidelity(tmp_path):
    for model in ("correlated", "independent"):
        ini = write_ini(tmp_path / f"{model}.ini",
                        f"[model]\nkind = {model}\n[delays]\nstart = 0\ncount = 1\nspacing = linear\n")
        out = tmp_path / model
        assert main(["tce", "--config", ini, "--out", str(out)]) == EXIT_OK
        for mode in ("decode", "correct"):
            _, data = read_table(out / f"fidelity_{mode}.csv")
            assert data.shape == (1, 5)
            assert np.allclose(data[0, 1:], 1.0, atol=1e-12)
        assert json.loads((out / "summary.json").read_text())["slope_ratio"] is None


def test_equal_t2_corrected_slope_small(tmp_path):
    ini = write_ini(tmp_path / "c.ini",
                    "[model]\nt2 = 1, 1, 1\n[delays]\nstart = 0.0001\nstop = 0.0004\ncount = 4\n"
                    "spacing = linear\n")
    assert main(["tce", "--config", ini, "--out", str(tmp_path / "o")]) == EXIT_OK
    s = json.loads((tmp_path / "o" / "summary.json").read_text())["initial_slope"]
    assert abs(s["correct"]) < 1e-2
    assert s["decode"] < -0.3


def test_tce_montecarlo_table(tmp_path):
    out = tmp_path / "o"
    assert main(["tce", "--out", str(out), "--samples", "20000", "--seed", "7",
                 "--mode", "correct"]) == EXIT_OK
    _, exact = read_table(out / "fidelity_correct.csv")
    _, mc = read_table(out / "fidelity_correct_montecarlo.csv")
    assert np.allclose(mc, exact, atol=0.03)
    first = (out / "fidelity_correct_montecarlo.csv").read_bytes()
    assert main(["tce", "--out", str(out), "--samples", "20000", "--seed", "7",
                 "--mode", "correct"]) == EXIT_OK
    assert (out / "fidelity_correct_montecarlo.csv").read_bytes() == first


# --- alanine --------------------------------------------------------------------


def test_alanine_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(["alanine", "--out", str(out), "--term-by-term"]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["recombination_max_abs_diff"] < 1e-10
    assert summary["analytic_max_abs_diff"] < 1e-10
    for label in ("Iz1", "2Iz1Iz2", "2Iz1Iz3", "4Iz1Iz2Iz3-single", "4Iz1Iz2Iz3-triple"):
        assert (out / f"term_{label}.csv").exists()
    with open(out / "fits.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header[0] == "label" and "exp_slope" in header
    assert (out / "alanine.svg").exists()


def test_alanine_rejects_tce_config(tmp_path, capsys):
    ini = write_ini(tmp_path / "c.ini", "[experiment]\nkind = tce\n")
    assert main(["alanine", "--config", ini, "--out", str(tmp_path / "o")]) == EXIT_CONFIG


# --- fit ------------------------------------------------------------------------


def test_fit_command(tmp_path, capsys):
    t = np.linspace(0, 3, 8)
    src = tmp_path / "c.csv"
    src.write_text("delay,intensity\n" + "".join(f"{a},{b}\n" for a, b in zip(t.tolist(), (2 * np.exp(-0.7 * t)).tolist())))
    assert main(["fit", str(src), "--out", str(tmp_path / "f")]) == EXIT_OK
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["method", "slope", "intercept", "residual_norm"]
    slopes = {r[0]: float(r[1]) for r in rows[1:]}
    assert set(slopes) == {"log-linear-ls", "single-exponential", "initial-slope"}
    assert all(s == pytest.approx(-0.7, rel=1e-9) for s in slopes.values())
    assert (tmp_path / "f" / "fit.csv").exists()


def test_fit_command_failures(tmp_path, capsys):
    src = tmp_path / "c.csv"
    src.write_text("delay,intensity\n0,1\n1,1e-300\n2,1\n")
    assert main(["fit", str(src), "--method", "exponential"]) == EXIT_NUMERIC
    src.write_text("delay,intensity\n0,1\n1,-0.5\n2,0.2\n")
    assert main(["fit", str(src), "--method", "log-linear"]) == EXIT_CONFIG
    assert "point 1" in capsys.readouterr().err
    assert main(["fit", str(tmp_path / "missing.csv")]) == 1
