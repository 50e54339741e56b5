"""Decay-curve fitting and recombination of per-term experiments."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np


class FitError(RuntimeError):
    """A fit did not converge."""


@dataclass(frozen=True)
class DecayCurve:
    """Intensity versus delay.  Delays must be strictly increasing."""

    label: str
    delays: np.ndarray
    intensities: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        delays = np.asarray(self.delays, dtype=float)
        values = np.asarray(self.intensities, dtype=float)
        if delays.ndim != 1 or delays.shape != values.shape:
            raise ValueError(f"{self.label}: delays and intensities must be 1-d and equal length")
        if np.any(np.diff(delays) <= 0):
            raise ValueError(f"{self.label}: delays must be strictly increasing")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "intensities", values)
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != delays.shape:
                raise ValueError(f"{self.label}: sigma must match delays")
            object.__setattr__(self, "sigma", sigma)

    def __len__(self) -> int:
        return self.delays.size

    def head(self, k: int) -> "DecayCurve":
        sigma = None if self.sigma is None else self.sigma[:k]
        return DecayCurve(self.label, self.delays[:k], self.intensities[:k], sigma)

    def scaled(self, factor: float) -> "DecayCurve":
        return DecayCurve(self.label, self.delays, factor * self.intensities, self.sigma)


@dataclass(frozen=True)
class FitResult:
    """``slope`` is the fitted log-slope (s^-1, negative for decay).

    For ``log-linear-ls`` the intercept is ``ln I(0)``; for
    ``single-exponential`` it is the amplitude ``a`` of ``a exp(slope t)``.
    ``residual_norm`` is the 2-norm of the residuals in the space the fit
    was done in (log intensity or intensity).
    """

    slope: float
    intercept: float
    residual_norm: float
    method: str
    iterations: int = field(default=0, compare=False)


def _require_points(curve: DecayCurve, n: int = 3):
    if len(curve) < n:
        raise ValueError(f"{curve.label}: need at least {n} points, got {len(curve)}")


def fit_log_linear(curve: DecayCurve) -> FitResult:
    """Ordinary least squares of ``ln I`` against delay."""
    _require_points(curve)
    bad = np.flatnonzero(~(curve.intensities > 0))
    if bad.size:
        i = bad[0]
        raise ValueError(
            f"{curve.label}: log-linear fit needs positive intensities; point {i} "
            f"(delay={curve.delays[i]:g}) has intensity {curve.intensities[i]:g}"
        )
    logs = np.log(curve.intensities)
    design = np.column_stack([curve.delays, np.ones_like(curve.delays)])
    coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
    resid = logs - design @ coef
    return FitResult(float(coef[0]), float(coef[1]), float(np.linalg.norm(resid)), "log-linear-ls")


def fit_exponential(
    curve: DecayCurve,
    max_iter: int = 100,
    tol: float = 1e-12,
) -> FitResult:
    """Nonlinear least squares of ``I = a exp(slope t)`` by Gauss-Newton.

    Accepts non-positive intensities.  Converged when the relative parameter
    step drops below ``tol``; raises :class:`FitError` after ``max_iter``.
    """
    _require_points(curve)
    t = curve.delays
    y = curve.intensities
    pos = y > 0
    if pos.sum() >= 2:
        slope, log_a = np.polyfit(t[pos], np.log(y[pos]), 1)
        a = np.exp(log_a)
    else:
        slope, a = 0.0, float(np.mean(y))
    params = np.array([a, slope], dtype=float)
    for it in range(1, max_iter + 1):
        a, k = params
        e = np.exp(k * t)
        resid = y - a * e
        jac = np.column_stack([e, a * t * e])
        step, *_ = np.linalg.lstsq(jac, resid, rcond=None)
        params = params + step
        if not np.all(np.isfinite(params)):
            raise FitError(f"{curve.label}: Gauss-Newton diverged at iteration {it}")
        if np.all(np.abs(step) <= tol * np.maximum(np.abs(params), 1e-300)) or not np.any(step):
            a, k = params
            res = np.linalg.norm(y - a * np.exp(k * t))
            return FitResult(float(k), float(a), float(res), "single-exponential", it)
    raise FitError(f"{curve.label}: Gauss-Newton did not converge in {max_iter} iterations")


def initial_slope(curve: DecayCurve, window: int = 4) -> float:
    """Log-linear slope over the first ``window`` points."""
    if window < 3:
        raise ValueError(f"slope window must be >= 3, got {window}")
    _require_points(curve, window)
    return fit_log_linear(curve.head(window)).slope


def _interp(curve: DecayCurve, grid: np.ndarray) -> np.ndarray:
    if grid[0] < curve.delays[0] or grid[-1] > curve.delays[-1]:
        raise ValueError(
            f"{curve.label}: grid [{grid[0]:g}, {grid[-1]:g}] extends outside the curve's "
            f"delays [{curve.delays[0]:g}, {curve.delays[-1]:g}]"
        )
    if curve.delays.shape == grid.shape and np.array_equal(curve.delays, grid):
        return curve.intensities
    return np.interp(grid, curve.delays, curve.intensities)


def recombine_pseudopure(
    curves: Mapping[str, DecayCurve],
    weights: Mapping[str, float],
    grid: Sequence[float] | None = None,
    label: str = "error-corrected",
) -> DecayCurve:
    """Pointwise weighted sum of labelled curves.

    ``curves`` and ``weights`` must carry the same labels.  Curves on other
    delay grids are linearly interpolated onto ``grid`` (default: the grid
    of the first curve); extrapolation is refused.
    """
    if set(curves) != set(weights):
        missing = sorted(set(weights) - set(curves))
        extra = sorted(set(curves) - set(weights))
        raise ValueError(f"curve/weight labels differ: missing {missing}, unexpected {extra}")
    if not curves:
        raise ValueError("nothing to recombine")
    first = next(iter(curves.values()))
    grid = first.delays if grid is None else np.asarray(grid, dtype=float)
    total = np.zeros_like(grid, dtype=float)
    for name, curve in curves.items():
        total = total + weights[name] * _interp(curve, grid)
    return DecayCurve(label, grid, total)


# --- CSV --------------------------------------------------------------------


def write_curve_csv(curve: DecayCurve, fh) -> None:
    """Write ``delay,intensity[,sigma]`` with ``repr`` floats."""
    w = csv.writer(fh, lineterminator="\n")
    if curve.sigma is None:
        w.writerow(["delay", "intensity"])
        w.writerows([repr(float(t)), repr(float(y))] for t, y in zip(curve.delays, curve.intensities))
    else:
        w.writerow(["delay", "intensity", "sigma"])
        w.writerows(
            [repr(float(t)), repr(float(y)), repr(float(s))]
            for t, y, s in zip(curve.delays, curve.intensities, curve.sigma)
        )


def read_curve_csv(source, label: str | None = None) -> DecayCurve:
    """Read a ``delay,intensity[,sigma]`` CSV from a path or an open file."""
    if hasattr(source, "read"):
        text = source.read()
        name = label or getattr(source, "name", "curve")
    else:
        with open(source, encoding="utf-8") as f:
            text = f.read()
        name = label or str(source)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError(f"{name}: empty CSV")
    header = [h.strip() for h in rows[0]]
    if header not in (["delay", "intensity"], ["delay", "intensity", "sigma"]):
        raise ValueError(f"{name}: header must be 'delay,intensity[,sigma]', got {','.join(header)!r}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ValueError(f"{name}: line {lineno}: expected {len(header)} fields")
        try:
            data.append([float(c) for c in row])
        except ValueError:
            raise ValueError(f"{name}: line {lineno}: non-numeric field in {row}") from None
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    sigma = arr[:, 2] if len(header) == 3 else None
    return DecayCurve(name, arr[:, 0], arr[:, 1], sigma)


# --- alanine fixture --------------------------------------------------------

ALANINE_LABELS = (
    "Iz1",
    "2Iz1Iz2",
    "2Iz1Iz3",
    "4Iz1Iz2Iz3-single",
    "4Iz1Iz2Iz3-triple",
)

# Weights for curves normalized per operator: input coefficient times the
# spin-1 polarization each operator yields after the Toffoli.  Checked
# against the simulator in the test suite.
ALANINE_WEIGHTS = {
    "Iz1": 0.5,
    "2Iz1Iz2": 0.5,
    "2Iz1Iz3": 0.5,
    "4Iz1Iz2Iz3-single": -0.5,
    "4Iz1Iz2Iz3-triple": -0.5,
}


@dataclass(frozen=True)
class AlanineFixtureRow:
    label: str
    slope: float
    amplitude: float
    weight: float


def load_alanine_fixture() -> list[AlanineFixtureRow]:
    """The measured alanine log-slopes with the amplitudes of the ideal
    per-term curves.  Synthetic: see the comment block in the data file."""
    text = resources.files("phaseqec.data").joinpath("alanine_slopes.csv").read_text("utf-8")
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    return [
        AlanineFixtureRow(r["label"], float(r["slope"]), float(r["amplitude"]), float(r["weight"]))
        for r in rows
    ]


def synthetic_alanine_curves(delays: Sequence[float]) -> dict[str, DecayCurve]:
    """Pure exponentials ``amplitude * exp(slope t)`` for each fixture row."""
    t = np.asarray(delays, dtype=float)
    return {
        r.label: DecayCurve(r.label, t, r.amplitude * np.exp(r.slope * t))
        for r in load_alanine_fixture()
    }


def log_slope_at_zero(amplitudes, rates, weights=None) -> float:
    """``d/dt ln(sum_k w_k a_k exp(r_k t))`` at ``t = 0``.

    This is the mean of the rates ``r_k`` weighted by ``w_k a_k``.
    """
    amplitudes = np.asarray(amplitudes, dtype=float)
    rates = np.asarray(rates, dtype=float)
    weights = np.ones_like(amplitudes) if weights is None else np.asarray(weights, dtype=float)
    mass = weights * amplitudes
    return float(np.sum(mass * rates) / np.sum(mass))
