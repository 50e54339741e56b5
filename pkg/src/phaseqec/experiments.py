"""Batch runners for the alanine, TCE and custom-network campaigns.

Each runner writes CSV tables (the contract), a ``summary.json``, an SVG
plot, and ``config.ini`` holding the resolved configuration.  Given the same
configuration and kernel backend, the CSV and JSON outputs are
byte-identical between runs.
"""

from __future__ import annotations

import csv
import json
import logging
import shutil
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import _kernels
from .analysis import (
    ALANINE_WEIGHTS,
    DecayCurve,
    fit_exponential,
    fit_log_linear,
    initial_slope,
    recombine_pseudopure,
    write_curve_csv,
)
from .channels import Correlated, monte_carlo_dephasing
from .circuits import Circuit, load_circuit
from .config import ConfigError, ExperimentConfig
from .qec import (
    InputAxis,
    PipelineConfig,
    alanine_term_curves,
    analytic_corrected_z,
    fidelity_report,
    retained_polarization,
    run_pipeline,
)

log = logging.getLogger(__name__)

MODE_CORRECTION = {"decode": False, "correct": True}


def _modes(cfg: ExperimentConfig) -> list[str]:
    return ["decode", "correct"] if cfg.mode == "both" else [cfg.mode]


def _prepare_output(cfg: ExperimentConfig) -> Path:
    if not cfg.output:
        raise ConfigError("output directory must be a non-empty path")
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.ini").write_text(cfg.to_ini(), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write to output directory {out}: {exc.strerror}") from exc
    return out


def _write(path: Path, writer) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer(fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _write_rows(path: Path, header, rows) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else repr(float(v)) for v in row])

    _write(path, emit)


def _write_json(path: Path, payload: dict) -> None:
    _write(path, lambda fh: fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n"))


def _mc_channel(cfg: ExperimentConfig, model, tag: int):
    """Monte Carlo channel whose seed depends on the call's delay only."""

    def channel(rho, t):
        key = int(np.searchsorted(cfg.delays.values(), t))
        return monte_carlo_dephasing(rho, model, t, cfg.mc_samples, seed=[cfg.mc_seed, tag, key])

    return channel


def _map(cfg: ExperimentConfig, fn, items):
    if cfg.workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, items))


# --- TCE / custom -------------------------------------------------------------


def _fidelity_table(cfg, model, delays, with_correction, encoder, channel=None):
    def one(t):
        return fidelity_report(model, float(t), with_correction, encoder, channel, cfg.term_by_term)

    reports = _map(cfg, one, delays)
    return {
        "f_x": np.array([r.f_x for r in reports]),
        "f_y": np.array([r.f_y for r in reports]),
        "f_z": np.array([r.f_z for r in reports]),
        "f": np.array([r.f for r in reports]),
    }


def _slope_or_none(delays, values, window, label):
    if len(delays) < window:
        return None
    return initial_slope(DecayCurve(label, delays, values), window)


def run_tce(cfg: ExperimentConfig, encoder: Circuit | None = None) -> dict:
    """Entanglement fidelity of the four-input protocol along the delay grid.

    Writes ``fidelity_<mode>.csv`` (``delay,f_x,f_y,f_z,f``) for each mode,
    Monte Carlo counterparts when enabled, ``summary.json`` with the initial
    log-slopes and their ratio, and ``fidelity.svg``.
    """
    out = _prepare_output(cfg)
    model = cfg.dephasing_model()
    delays = cfg.delays.values()
    tables, mc_tables, slopes = {}, {}, {}
    for mode in _modes(cfg):
        corr = MODE_CORRECTION[mode]
        tab = _fidelity_table(cfg, model, delays, corr, encoder)
        tables[mode] = tab
        _write_rows(
            out / f"fidelity_{mode}.csv",
            ["delay", "f_x", "f_y", "f_z", "f"],
            zip(delays, tab["f_x"], tab["f_y"], tab["f_z"], tab["f"]),
        )
        slopes[mode] = _slope_or_none(delays, tab["f"], cfg.slope_window, f"f-{mode}")
        if cfg.mc_enabled:
            chan = _mc_channel(cfg, model, tag=int(corr))
            mtab = _fidelity_table(cfg, model, delays, corr, encoder, chan)
            mc_tables[mode] = mtab
            _write_rows(
                out / f"fidelity_{mode}_montecarlo.csv",
                ["delay", "f_x", "f_y", "f_z", "f"],
                zip(delays, mtab["f_x"], mtab["f_y"], mtab["f_z"], mtab["f"]),
            )
    ratio = None
    if slopes.get("decode") is not None and slopes.get("correct"):
        ratio = slopes["decode"] / slopes["correct"]
    summary = {
        "experiment": cfg.experiment,
        "backend": _kernels.backend(),
        "delays": [float(t) for t in delays],
        "slope_window": cfg.slope_window,
        "initial_slope": slopes,
        "slope_ratio": ratio,
        "fidelity_at_first_delay": {m: float(tab["f"][0]) for m, tab in tables.items()},
    }
    if cfg.mc_enabled:
        summary["montecarlo_max_abs_error"] = {
            m: float(np.max(np.abs(mc_tables[m]["f"] - tables[m]["f"]))) for m in mc_tables
        }
    _write_json(out / "summary.json", summary)
    _plot_fidelity(out / "fidelity.svg", delays, tables)
    return summary


def run_custom(cfg: ExperimentConfig, circuit_path=None) -> dict:
    """:func:`run_tce` with the encoder read from a circuit file."""
    path = circuit_path or cfg.circuit
    if not path:
        raise ConfigError("custom experiment needs a circuit file")
    try:
        encoder = load_circuit(path)
    except OSError as exc:
        raise ConfigError(f"cannot read circuit file {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg = cfg.replace(experiment="custom", circuit=str(path))
    summary = run_tce(cfg, encoder)
    shutil.copyfile(path, Path(cfg.output) / "circuit.txt")
    return summary


# --- alanine -----------------------------------------------------------------


def _fit_row(curve: DecayCurve, window: int):
    lin = fit_log_linear(curve)
    exp = fit_exponential(curve)
    init = initial_slope(curve, window) if len(curve) >= window else float("nan")
    return [
        curve.label,
        lin.slope, lin.intercept, lin.residual_norm,
        exp.slope, exp.intercept, exp.residual_norm,
        init,
    ]


def run_alanine(cfg: ExperimentConfig) -> dict:
    """Per-term decode-only curves and their error-corrected recombination.

    Writes ``term_<label>.csv`` for the five curves (the three-spin operator
    split by encoded coherence order), ``corrected.csv`` (recombination),
    ``full_matrix_corrected.csv`` (the same quantity from one full-matrix
    run), ``decode_only.csv``, ``fits.csv``, ``summary.json`` and
    ``alanine.svg``.
    """
    out = _prepare_output(cfg)
    model = cfg.dephasing_model()
    delays = cfg.delays.values()
    modes = _modes(cfg)

    terms = {
        label: DecayCurve(label, delays, values)
        for label, values in alanine_term_curves(model, delays).items()
    }
    for label, curve in terms.items():
        _write(out / f"term_{label}.csv", lambda fh, c=curve: write_curve_csv(c, fh))
    fitted = list(terms.values())
    summary: dict = {
        "experiment": "alanine",
        "backend": _kernels.backend(),
        "delays": [float(t) for t in delays],
        "slope_window": cfg.slope_window,
        "weights": ALANINE_WEIGHTS,
    }

    def pipeline_z(corrected, channel=None):
        def one(t):
            pc = PipelineConfig(model, float(t), corrected, InputAxis.Z)
            return retained_polarization(InputAxis.Z, run_pipeline(pc, None, channel, cfg.term_by_term))

        return np.array(_map(cfg, one, delays))

    if "correct" in modes:
        recombined = recombine_pseudopure(terms, ALANINE_WEIGHTS, label="corrected")
        full = DecayCurve("full-matrix-corrected", delays, pipeline_z(True))
        _write(out / "corrected.csv", lambda fh: write_curve_csv(recombined, fh))
        _write(out / "full_matrix_corrected.csv", lambda fh: write_curve_csv(full, fh))
        fitted += [recombined]
        summary["recombination_max_abs_diff"] = float(
            np.max(np.abs(recombined.intensities - full.intensities))
        )
        if isinstance(model, Correlated):
            ref = analytic_corrected_z(delays, model.tau)
            summary["analytic_max_abs_diff"] = float(np.max(np.abs(full.intensities - ref)))
        if cfg.mc_enabled:
            mc = pipeline_z(True, _mc_channel(cfg, model, tag=1))
            mc_curve = DecayCurve("montecarlo-corrected", delays, mc)
            _write(out / "corrected_montecarlo.csv", lambda fh: write_curve_csv(mc_curve, fh))
            summary["montecarlo_max_abs_error"] = float(np.max(np.abs(mc - full.intensities)))
    if "decode" in modes:
        dec = DecayCurve("decode-only", delays, pipeline_z(False))
        _write(out / "decode_only.csv", lambda fh: write_curve_csv(dec, fh))
        fitted += [dec]

    fittable = [c for c in fitted if len(c) >= 3]
    rows = [_fit_row(c, cfg.slope_window) for c in fittable]
    _write_rows(
        out / "fits.csv",
        ["label", "loglin_slope", "loglin_intercept", "loglin_residual",
         "exp_slope", "exp_amplitude", "exp_residual", "initial_slope"],
        rows,
    )
    summary["initial_slope"] = {r[0]: (None if np.isnan(r[-1]) else r[-1]) for r in rows}
    _write_json(out / "summary.json", summary)
    _plot_alanine(out / "alanine.svg", terms, fitted)
    return summary


# --- plots ---------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "phaseqec"
    import matplotlib.pyplot as plt

    return plt


def _plot_fidelity(path: Path, delays, tables) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    styles = {"decode": ("tab:red", "decoded"), "correct": ("tab:green", "decoded + corrected")}
    for mode, tab in tables.items():
        color, name = styles[mode]
        ax.plot(delays, tab["f"], "o-", color=color, label=name)
    ax.set_xlabel("delay (s)")
    ax.set_ylabel("entanglement fidelity")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _plot_alanine(path: Path, terms, fitted) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for curve in terms.values():
        ax.plot(curve.delays, curve.intensities, ".-", label=curve.label)
    for curve in fitted:
        if curve.label in terms:
            continue
        ax.plot(curve.delays, curve.intensities, "k-" if curve.label == "corrected" else "k--",
                label=curve.label)
    ax.set_xlabel("dephasing time")
    ax.set_ylabel("spin-1 intensity")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
