"""Phase-noise channels on three spins.

Two noise models are provided:

* :class:`Correlated` -- one random phase shared by all spins.  Entry
  ``(b, b')`` of the density matrix decays as ``exp(-n^2 t / tau)`` with
  ``n`` its coherence order.
* :class:`Independent` -- an independent phase per spin.  Entry ``(b, b')``
  decays as ``exp(-t * sum_k [b_k != b'_k] / T2_k)``.

Both have an exact analytic form (:func:`apply_dephasing`) and a Monte Carlo
form (:func:`monte_carlo_dephasing`) that averages
``U(theta) rho U(theta)^dagger`` with ``U = exp(-i sum_k theta_k sigma_z^k)``.

Phase calibration.  ``U`` gives entry ``(b, b')`` the factor
``exp(-i sum_k theta_k (s_k(b) - s_k(b')))`` where ``s_k = +1`` for ``|0>``
and ``-1`` for ``|1>``.  For zero-mean Gaussian ``theta`` with variance
``v``, ``E[exp(-i m theta)] = exp(-m^2 v / 2)``.

* Correlated: ``m = 2 n``, so ``exp(-2 n^2 v)``; matching ``exp(-n^2 t/tau)``
  needs ``v = t / (2 tau)``.
* Independent: ``m = +-2`` on each spin that differs, so ``exp(-2 v_k)``;
  matching ``exp(-t/T2_k)`` needs ``v_k = t / (2 T2_k)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .qstate import COHERENCE_ORDER, DIM, NSPIN

# s_k(b): +1 if spin k of basis state b is |0>, -1 if |1>
SIGNS = np.array(
    [[1 - 2 * ((b >> (NSPIN - 1 - k)) & 1) for k in range(NSPIN)] for b in range(DIM)],
    dtype=float,
)
SIGNS.setflags(write=False)
_FLIPPED = (SIGNS[:, None, :] != SIGNS[None, :, :]).astype(float)  # (b, b', k)

# samples per independently seeded block; fixed so results never depend on
# how the work is partitioned
MC_BLOCK = 65536


@dataclass(frozen=True)
class Correlated:
    """Completely correlated phase noise with time constant ``tau`` (s)."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @classmethod
    def from_gradient(cls, gamma, grad, delta, diffusion) -> "Correlated":
        """Model whose single-quantum rate is the gradient-diffusion rate."""
        rate = gradient_diffusion_rate(GradientDiffusionParams(gamma, grad, delta, diffusion, 1))
        return cls(1.0 / rate)

    def rates(self) -> np.ndarray:
        return COHERENCE_ORDER.astype(float) ** 2 / self.tau

    def phase_variances(self, t: float) -> np.ndarray:
        return np.full(NSPIN, t / (2 * self.tau))

    def sample_thetas(self, rng: np.random.Generator, n: int, t: float) -> np.ndarray:
        common = rng.standard_normal((n, 1)) * np.sqrt(t / (2 * self.tau))
        return np.repeat(common, NSPIN, axis=1)

    @property
    def timescale(self) -> float:
        return self.tau


@dataclass(frozen=True)
class Independent:
    """Uncorrelated per-spin phase noise with transverse times ``t2`` (s)."""

    t2: tuple[float, float, float]

    def __post_init__(self):
        t2 = tuple(float(x) for x in self.t2)
        if len(t2) != NSPIN:
            raise ValueError(f"need {NSPIN} T2 values, got {len(t2)}")
        if not all(x > 0 for x in t2):
            raise ValueError(f"T2 values must be positive, got {t2}")
        object.__setattr__(self, "t2", t2)

    def rates(self) -> np.ndarray:
        return _FLIPPED @ (1.0 / np.array(self.t2))

    def phase_variances(self, t: float) -> np.ndarray:
        return t / (2 * np.array(self.t2))

    def sample_thetas(self, rng: np.random.Generator, n: int, t: float) -> np.ndarray:
        return rng.standard_normal((n, NSPIN)) * np.sqrt(self.phase_variances(t))

    @property
    def timescale(self) -> float:
        return min(self.t2)


DephasingModel = Correlated | Independent


@dataclass(frozen=True)
class GradientDiffusionParams:
    gamma: float      # rad s^-1 T^-1
    grad: float       # T m^-1
    delta: float      # s
    diffusion: float  # m^2 s^-1
    order: int = 1


def gradient_diffusion_rate(p: GradientDiffusionParams) -> float:
    """Decoherence rate ``1/tau = gamma^2 grad^2 n^2 delta^2 D`` (s^-1)."""
    if p.delta < 0:
        raise ValueError(f"gradient duration must be >= 0, got {p.delta}")
    if p.diffusion < 0:
        raise ValueError(f"diffusion constant must be >= 0, got {p.diffusion}")
    dphi_dz = p.order * p.delta * p.gamma * p.grad
    return dphi_dz ** 2 * p.diffusion


def _check_time(t):
    if t < 0:
        raise ValueError(f"dephasing time must be >= 0, got {t}")


def decay_factors(model: DephasingModel, t: float) -> np.ndarray:
    """Entrywise multipliers of the analytic channel at time ``t``."""
    _check_time(t)
    return np.exp(-model.rates() * t)


def apply_dephasing(rho: np.ndarray, model: DephasingModel, t: float) -> np.ndarray:
    return np.asarray(rho, dtype=complex) * decay_factors(model, t)


def phase_unitary(thetas) -> np.ndarray:
    """``exp(-i sum_k theta_k sigma_z^k)`` as a diagonal 8x8 matrix."""
    return np.diag(np.exp(-1j * (SIGNS @ np.asarray(thetas, dtype=float))))


def phase_average(rho: np.ndarray, thetas) -> np.ndarray:
    """Average of ``U(theta) rho U(theta)^dagger`` over the rows of ``thetas``."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    total, _, _ = _kernels.phase_average(rho, thetas, SIGNS)
    return total / thetas.shape[0]


def monte_carlo_dephasing(
    rho: np.ndarray,
    model: DephasingModel,
    t: float,
    samples: int,
    seed: int,
    return_stderr: bool = False,
):
    """Monte Carlo estimate of :func:`apply_dephasing`.

    Phases are drawn in blocks of ``MC_BLOCK`` samples; block ``j`` uses a
    Philox generator keyed by the ``j``-th child of ``SeedSequence(seed)``.
    The result therefore depends only on ``(seed, samples)`` and the active
    kernel backend.

    With ``return_stderr`` the standard error of each entry is returned as
    well, as a complex matrix whose real and imaginary parts are the
    standard errors of the real and imaginary parts.
    """
    _check_time(t)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rho = np.asarray(rho, dtype=complex)
    nblocks = -(-samples // MC_BLOCK)
    children = np.random.SeedSequence(seed).spawn(nblocks)
    total = np.zeros((DIM, DIM), dtype=complex)
    sumsq_re = np.zeros((DIM, DIM))
    sumsq_im = np.zeros((DIM, DIM))
    for j, child in enumerate(children):
        n = min(MC_BLOCK, samples - j * MC_BLOCK)
        rng = np.random.Generator(np.random.Philox(child))
        thetas = model.sample_thetas(rng, n, t)
        tot, sre, sim = _kernels.phase_average(rho, thetas, SIGNS)
        total += tot
        sumsq_re += sre
        sumsq_im += sim
    mean = total / samples
    if not return_stderr:
        return mean
    if samples == 1:
        return mean, np.zeros_like(mean)
    var_re = np.clip(sumsq_re - samples * mean.real ** 2, 0, None) / (samples - 1)
    var_im = np.clip(sumsq_im - samples * mean.imag ** 2, 0, None) / (samples - 1)
    stderr = np.sqrt(var_re / samples) + 1j * np.sqrt(var_im / samples)
    return mean, stderr
