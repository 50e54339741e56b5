"""Encode, dephase, decode and correct: the single-round phase-code pipeline.

The data spin is spin 1; spins 2 and 3 start in ``|0>`` and are discarded
after correction.  Inputs are one of the four spin-1 deviation operators
``1/2``, ``I_x``, ``I_y``, ``I_z`` (:class:`InputAxis`); any spin-1 input is
a linear combination of these.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import DephasingModel, apply_dephasing
from .circuits import Circuit, apply_circuit, correction_circuit, encoder_circuit
from .qstate import (
    coherence_project,
    matrix_to_po,
    operator_matrix,
    partial_trace_to_spin1,
    po_to_matrix,
    pseudopure_input,
    ProductOperatorSum,
)

Channel = Callable[[np.ndarray, float], np.ndarray]

_PAULI_HALF = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex) / 2,
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex) / 2,
    "z": np.array([[1, 0], [0, -1]], dtype=complex) / 2,
}


class InputAxis(enum.Enum):
    UNIT = "1"
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def rho1(self) -> np.ndarray:
        if self is InputAxis.UNIT:
            return np.eye(2, dtype=complex) / 2
        return _PAULI_HALF[self.value].copy()


@dataclass(frozen=True)
class PipelineConfig:
    model: DephasingModel
    delay: float
    with_correction: bool = True
    input_axis: InputAxis = InputAxis.Z

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")
        object.__setattr__(self, "input_axis", InputAxis(self.input_axis))


def _evolve(rho, cfg: PipelineConfig, encoder: Circuit, channel: Channel | None):
    rho = apply_circuit(rho, encoder)
    if channel is None:
        rho = apply_dephasing(rho, cfg.model, cfg.delay)
    else:
        rho = channel(rho, cfg.delay)
    rho = apply_circuit(rho, encoder.inverse())
    if cfg.with_correction:
        rho = apply_circuit(rho, correction_circuit())
    return rho


def run_pipeline(
    cfg: PipelineConfig,
    encoder: Circuit | None = None,
    channel: Channel | None = None,
    term_by_term: bool = False,
) -> np.ndarray:
    """Spin-1 reduced matrix after the full pipeline.

    ``encoder`` replaces the built-in network (the decoder is always its
    inverse); ``channel(rho, t)`` replaces the analytic dephasing map, e.g.
    with a Monte Carlo estimate.  With ``term_by_term`` each product-operator
    term of the input is pushed through separately and the outputs summed.
    """
    encoder = encoder_circuit() if encoder is None else encoder
    rho = pseudopure_input(cfg.input_axis.rho1)
    if not term_by_term:
        return partial_trace_to_spin1(_evolve(rho, cfg, encoder, channel))
    out = np.zeros((2, 2), dtype=complex)
    for term in matrix_to_po(rho).terms:
        piece = po_to_matrix(ProductOperatorSum((term,)))
        out += partial_trace_to_spin1(_evolve(piece, cfg, encoder, channel))
    return out


def retained_polarization(input_axis, output: np.ndarray) -> float:
    """Polarization of ``I_a`` left in a 2x2 output, relative to input ``I_a``."""
    axis = InputAxis(input_axis)
    if axis is InputAxis.UNIT:
        raise ValueError("retained polarization is undefined for the unit input")
    op = _PAULI_HALF[axis.value]
    # <I_a, I_a> = 1/2
    return float(2 * np.trace(op @ np.asarray(output)).real)


def entanglement_fidelity(f_x: float, f_y: float, f_z: float) -> float:
    return 0.25 * (1 + f_x + f_y + f_z)


@dataclass(frozen=True)
class FidelityReport:
    f_x: float
    f_y: float
    f_z: float

    @property
    def f(self) -> float:
        return entanglement_fidelity(self.f_x, self.f_y, self.f_z)


def fidelity_report(
    model: DephasingModel,
    delay: float,
    with_correction: bool,
    encoder: Circuit | None = None,
    channel: Channel | None = None,
    term_by_term: bool = False,
) -> FidelityReport:
    fs = {}
    for axis in (InputAxis.X, InputAxis.Y, InputAxis.Z):
        cfg = PipelineConfig(model, delay, with_correction, axis)
        out = run_pipeline(cfg, encoder, channel, term_by_term)
        fs[axis.value] = retained_polarization(axis, out)
    return FidelityReport(fs["x"], fs["y"], fs["z"])


def analytic_corrected_z(t, tau):
    """``(9 exp(-t/tau) - exp(-9 t/tau)) / 8``: corrected ``I_z`` polarization
    under correlated dephasing.  Its slope at ``t = 0`` vanishes."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    if not tau > 0:
        raise ValueError("tau must be positive")
    out = (9 * np.exp(-t / tau) - np.exp(-9 * t / tau)) / 8
    return float(out) if out.ndim == 0 else out


# --- alanine protocol -------------------------------------------------------
#
# The pseudopure I_z input is split into four product operators, each run as
# its own decode-only experiment.  The three-spin operator is further split
# by the coherence order it carries while encoded.  Each experiment reports
# the polarization of its own operator after decoding.  The corrected curve
# is a fixed linear combination of these five curves.


@dataclass(frozen=True)
class AlanineTerm:
    label: str
    operator: str                      # product-operator label, unit coefficient
    scale: float                       # normalization, e.g. 2 for 2 I_z I_z
    orders: tuple[int, ...] | None     # encoded coherence orders kept, None = all

    def matrix(self) -> np.ndarray:
        return self.scale * operator_matrix(self.operator)


ALANINE_TERMS = (
    AlanineTerm("Iz1", "z11", 1.0, None),
    AlanineTerm("2Iz1Iz2", "zz1", 2.0, None),
    AlanineTerm("2Iz1Iz3", "z1z", 2.0, None),
    AlanineTerm("4Iz1Iz2Iz3-single", "zzz", 4.0, (-1, 1)),
    AlanineTerm("4Iz1Iz2Iz3-triple", "zzz", 4.0, (-3, 3)),
)


def alanine_term_curve(term: AlanineTerm, model: DephasingModel, delays) -> np.ndarray:
    """Decode-only polarization of ``term`` along ``delays``.

    Equals 1 at ``t = 0`` for unsplit terms; the two coherence-order parts of
    the three-spin term start at 3/4 and 1/4.
    """
    op = term.matrix()
    norm = np.trace(op @ op).real
    encoded = apply_circuit(op, encoder_circuit())
    if term.orders is not None:
        encoded = coherence_project(encoded, term.orders)
    decoder = encoder_circuit().inverse()
    out = []
    for t in delays:
        rho = apply_circuit(apply_dephasing(encoded, model, t), decoder)
        out.append(np.trace(op @ rho).real / norm)
    return np.array(out)


def alanine_term_curves(model: DephasingModel, delays) -> dict[str, np.ndarray]:
    return {term.label: alanine_term_curve(term, model, delays) for term in ALANINE_TERMS}


def alanine_weights() -> dict[str, float]:
    """Recombination weights for the five alanine curves.

    Weight = (coefficient of the term in the pseudopure ``I_z`` input) x
    (spin-1 ``I_z`` polarization the term yields after the Toffoli and the
    trace over spins 2, 3).  Both factors are computed here from the state
    and the circuit; the result is ``(1/2, 1/2, 1/2, -1/2, -1/2)``.
    """
    rho_a = matrix_to_po(pseudopure_input(_PAULI_HALF["z"]))
    toffoli = correction_circuit()
    iz = _PAULI_HALF["z"]
    weights = {}
    for term in ALANINE_TERMS:
        coeff = rho_a.coefficient(term.operator) / term.scale
        reduced = partial_trace_to_spin1(apply_circuit(term.matrix(), toffoli))
        readout = 2 * np.trace(iz @ reduced).real
        weights[term.label] = float(coeff * readout)
    return weights

