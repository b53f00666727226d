"""Zero-padded DFT peak picking and the extended reciprocal spectrum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError

__all__ = ["SampledSignal", "SpectrumPeak", "dft_peak", "extended_spectrum", "DEFAULT_NFFT"]

DEFAULT_NFFT = 2**14


@dataclass(frozen=True, eq=False)
class SampledSignal:
    values: np.ndarray
    spacing: float
    origin: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 16:
            raise ParameterError(f"need at least 16 samples, got {v.size}")
        if not self.spacing > 0:
            raise ParameterError(f"spacing must be > 0, got {self.spacing}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_samples(cls, x, values) -> "SampledSignal":
        """Build from abscissae that must be uniformly spaced."""
        x = np.asarray(x, dtype=float)
        dx = np.diff(x)
        if dx.size == 0 or not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
            raise ParameterError("samples are not uniformly spaced")
        return cls(values, float(dx.mean()), float(x[0]))


@dataclass(frozen=True)
class SpectrumPeak:
    wavenumber: float
    magnitude: float
    bin: int
    n_fft: int
    spacing: float

    @property
    def resolution(self) -> float:
        """Bin width ``1 / (n_fft * dx)``; the wavenumber is only known to this precision."""
        return 1.0 / (self.n_fft * self.spacing)


def dft_peak(signal: SampledSignal, n_fft: int = DEFAULT_NFFT) -> SpectrumPeak:
    """Largest-magnitude bin in ``(0, Nyquist]`` of the mean-removed, zero-padded DFT.

    Bins within a relative ``1e-12`` of the maximum count as tied and resolve
    to the lower wavenumber.
    """
    n = signal.values.size
    if n_fft < n or n_fft & (n_fft - 1):
        raise ParameterError(f"n_fft must be a power of two >= {n}, got {n_fft}")
    z = signal.values - signal.values.mean()
    if not np.any(np.abs(z) > 1e-14 * max(1.0, np.abs(signal.values).max())):
        raise NumericError("no spectral content: signal is constant")
    mag = np.abs(np.fft.rfft(z, n_fft))
    top = mag[1:].max()
    # magnitudes equal up to rounding count as tied
    k = int(np.flatnonzero(mag[1:] >= top * (1 - 1e-12))[0]) + 1
    return SpectrumPeak(k / (n_fft * signal.spacing), float(mag[k]), k, n_fft, signal.spacing)


def extended_spectrum(nu: float, lambda_mod: float, n_range: tuple[int, int]) -> np.ndarray:
    """All non-negative ``n / lambda_mod +- nu`` for ``n`` in the inclusive range.

    Values closer than ``1e-12`` are merged; the result is sorted ascending.
    """
    if nu < 0:
        raise ParameterError(f"nu must be >= 0, got {nu}")
    if not lambda_mod > 0:
        raise ParameterError(f"lambda_mod must be > 0, got {lambda_mod}")
    n = np.arange(int(n_range[0]), int(n_range[1]) + 1) / lambda_mod
    cand = np.sort(np.concatenate((n + nu, n - nu)))
    cand = cand[cand >= -1e-12]
    out = []
    for c in cand:
        if not out or c - out[-1] > 1e-12:
            out.append(max(float(c), 0.0))
    return np.array(out)
