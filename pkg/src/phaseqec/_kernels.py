"""Hot inner loops, with a numba and a pure-numpy implementation of each.

The numba path is used when numba imports and ``PHASEQEC_DISABLE_JIT`` is
unset (or ``0``).  Setting ``PHASEQEC_DISABLE_JIT=1`` forces the numpy path,
which is also the automatic fallback when numba is missing.  Both paths are
importable directly (``*_numba`` / ``*_numpy``) for testing and benchmarks.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

JIT_DISABLED = os.environ.get("PHASEQEC_DISABLE_JIT", "0").strip().lower() not in (
    "",
    "0",
    "false",
    "no",
)

# rows of vectorised work per numpy chunk; bounds memory at ~8 MB per buffer
_NUMPY_CHUNK = 8192


def phase_average_numpy(rho, thetas, signs):
    """Accumulate ``rho * exp(-i (phi_b - phi_b'))`` over phase samples.

    ``phi_b = thetas @ signs[b]`` is the phase picked up by basis state ``b``
    under ``exp(-i sum_k theta_k sigma_z^k)``.

    Returns ``(total, sumsq_re, sumsq_im)``: the complex sum over samples and
    the sums of squared real and imaginary parts, all shaped like ``rho``.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    thetas = np.asarray(thetas, dtype=np.float64)
    signs = np.asarray(signs, dtype=np.float64)
    dim = rho.shape[0]
    total = np.zeros((dim, dim), dtype=np.complex128)
    sumsq_re = np.zeros((dim, dim))
    sumsq_im = np.zeros((dim, dim))
    for start in range(0, thetas.shape[0], _NUMPY_CHUNK):
        block = thetas[start:start + _NUMPY_CHUNK]
        ket = np.exp(-1j * (block @ signs.T))  # (m, dim)
        vals = rho[None, :, :] * ket[:, :, None] * ket.conj()[:, None, :]
        total += vals.sum(axis=0)
        sumsq_re += (vals.real ** 2).sum(axis=0)
        sumsq_im += (vals.imag ** 2).sum(axis=0)
    return total, sumsq_re, sumsq_im


def _phase_average_py(rho, thetas, signs):
    dim = rho.shape[0]
    nspin = signs.shape[1]
    total = np.zeros((dim, dim), dtype=np.complex128)
    sumsq_re = np.zeros((dim, dim))
    sumsq_im = np.zeros((dim, dim))
    ket = np.empty(dim, dtype=np.complex128)
    for s in range(thetas.shape[0]):
        for b in range(dim):
            phi = 0.0
            for k in range(nspin):
                phi += thetas[s, k] * signs[b, k]
            ket[b] = np.cos(phi) - 1j * np.sin(phi)
        for b in range(dim):
            for c in range(dim):
                v = rho[b, c] * ket[b] * np.conj(ket[c])
                total[b, c] += v
                sumsq_re[b, c] += v.real * v.real
                sumsq_im[b, c] += v.imag * v.imag
    return total, sumsq_re, sumsq_im


if HAVE_NUMBA:
    _phase_average_jit = numba.njit(cache=True)(_phase_average_py)

    def phase_average_numba(rho, thetas, signs):
        return _phase_average_jit(
            np.ascontiguousarray(rho, dtype=np.complex128),
            np.ascontiguousarray(thetas, dtype=np.float64),
            np.ascontiguousarray(signs, dtype=np.float64),
        )

    phase_average_numba.__doc__ = phase_average_numpy.__doc__
else:  # pragma: no cover
    phase_average_numba = None


def backend() -> str:
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if HAVE_NUMBA and not JIT_DISABLED else "numpy"


def phase_average(rho, thetas, signs):
    if backend() == "numba":
        return phase_average_numba(rho, thetas, signs)
    return phase_average_numpy(rho, thetas, signs)


phase_average.__doc__ = phase_average_numpy.__doc__
