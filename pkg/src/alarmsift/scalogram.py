"""Continuous wavelet transform and normalized 64x64 Morlet scalograms.

The transform correlates the signal against scaled copies of the analytic
Morlet wavelet

    psi(t) = pi**-0.25 * exp(1j*omega0*t) * exp(-t**2 / 2)

with the L2 normalization 1/sqrt(a) per scale, so

    W(a, b) = sum_n x[n] * (1/sqrt(a)) * conj(psi((n - b) / a)).

Scales are expressed in samples; scale ``a`` responds most strongly to the
pseudo-frequency f = fc * fs / a with fc = omega0 / (2*pi).  The kernel is
evaluated on a support of +/- 4a samples (the Gaussian envelope is below
3.4e-4 outside) and applied as a frequency-domain product, zero-padded to
the next power of two >= 2N so no wrap-around reaches the output window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KERNEL_SUPPORT_SCALES = 4.0  # kernel truncated at +/- 4a samples
FLAT_EPS = 1e-12


@dataclass(frozen=True)
class ScaleGrid:
    """Geometric scale sequence from ``s_min`` to ``s_max`` inclusive."""

    n_scales: int
    s_min: float
    s_max: float
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def log_scales(n: int = 64, s_min: float = 1.0, s_max: float = 128.0) -> ScaleGrid:
    """Logarithmically spaced scales: values[i] = s_min*(s_max/s_min)**(i/(n-1))."""
    if n < 2:
        raise ValueError(f"need at least 2 scales, got {n}")
    if not 0 < s_min < s_max:
        raise ValueError(f"require 0 < s_min < s_max, got ({s_min}, {s_max})")
    i = np.arange(n)
    values = s_min * (s_max / s_min) ** (i / (n - 1))
    # pin the endpoints exactly despite float exponentiation
    values[0], values[-1] = s_min, s_max
    return ScaleGrid(n_scales=n, s_min=s_min, s_max=s_max, values=values)


@dataclass(frozen=True)
class MorletParams:
    """Morlet center frequency.  omega0 >= 5 keeps the analytic form admissible."""

    omega0: float = 6.0

    def __post_init__(self):
        if self.omega0 < 5.0:
            raise ValueError(f"omega0 must be >= 5, got {self.omega0}")

    @property
    def fc(self) -> float:
        """Center frequency in cycles per unit time, omega0 / (2*pi)."""
        return self.omega0 / (2.0 * math.pi)

    def scale_for_freq(self, freq_hz: float, fs: float) -> float:
        """Scale (in samples) whose pseudo-frequency is ``freq_hz``."""
        return self.fc * fs / freq_hz

    def freq_for_scale(self, scale: float, fs: float) -> float:
        return self.fc * fs / scale


def morlet_wavelet(u: np.ndarray, scale: float, params: MorletParams) -> np.ndarray:
    """Sampled analytic Morlet at offsets ``u`` (samples), L2-normalized in scale."""
    v = np.asarray(u, dtype=np.float64) / scale
    return (np.pi ** -0.25 / math.sqrt(scale)) * np.exp(1j * params.omega0 * v - 0.5 * v * v)


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


# Kernel spectra are reused heavily across chunks/channels/records; keep the
# few most recent (scales, omega0, nfft) entries.
_KERNEL_CACHE: dict[tuple, np.ndarray] = {}
_KERNEL_CACHE_MAX = 4


def _kernel_spectra(scales: np.ndarray, params: MorletParams, nfft: int) -> np.ndarray:
    key = (scales.tobytes(), params.omega0, nfft)
    spectra = _KERNEL_CACHE.get(key)
    if spectra is None:
        offsets = np.arange(nfft)
        offsets = np.where(offsets > nfft // 2, offsets - nfft, offsets).astype(np.float64)
        kernels = np.zeros((scales.size, nfft), dtype=np.complex128)
        for i, a in enumerate(scales):
            support = np.abs(offsets) <= KERNEL_SUPPORT_SCALES * a
            kernels[i, support] = morlet_wavelet(offsets[support], a, params)
        spectra = np.fft.fft(kernels, axis=1)
        if len(_KERNEL_CACHE) >= _KERNEL_CACHE_MAX:
            _KERNEL_CACHE.pop(next(iter(_KERNEL_CACHE)))
        _KERNEL_CACHE[key] = spectra
    return spectra


def cwt(signal: np.ndarray, scales: ScaleGrid | np.ndarray,
        params: MorletParams = MorletParams(), fs: float = 250.0) -> np.ndarray:
    """Complex CWT coefficients, one row per scale, one column per sample.

    Frequency-domain evaluation: the signal is zero-padded to the next
    power of two >= 2N (extended further only if a kernel's +/-4a support
    would not fit), multiplied with the kernel spectra, and inverse
    transformed.  This equals direct time-domain convolution with the
    truncated kernels to machine precision.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("signal must be a 1-D vector of length >= 2")
    if not np.isfinite(x).all():
        raise ValueError("signal contains non-finite values")
    if fs <= 0:
        raise ValueError(f"fs must be positive, got {fs}")
    scale_values = scales.values if isinstance(scales, ScaleGrid) else np.asarray(scales, float)
    n = x.size
    max_half = int(math.ceil(KERNEL_SUPPORT_SCALES * float(scale_values.max())))
    nfft = _next_pow2(max(2 * n, n + 2 * max_half + 1))
    spectra = _kernel_spectra(scale_values, params, nfft)
    xhat = np.fft.fft(x, nfft)
    coeffs = np.fft.ifft(xhat[None, :] * spectra, axis=1)[:, :n]
    return coeffs


@dataclass(frozen=True)
class Scalogram:
    """Min-max normalized magnitude image, rows = scales, cols = time bins."""

    values: np.ndarray
    channel: str | None = None
    chunk_index: int | None = None
    grid: ScaleGrid | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"scalogram values must be 2-D, got {values.shape}")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("scalogram values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def pool_columns(mag: np.ndarray, target_cols: int) -> np.ndarray:
    """Mean-pool columns into ``target_cols`` nearly-equal contiguous bins.

    Bin j covers columns [j*N//C, (j+1)*N//C); when a bin is empty
    (N < C) the single column at its left edge is used.
    """
    n = mag.shape[1]
    edges = (np.arange(target_cols + 1) * n) // target_cols
    counts = np.diff(edges)
    sums = np.add.reduceat(mag, edges[:-1], axis=1)
    return sums / np.maximum(counts, 1)


def to_scalogram(coeffs: np.ndarray, target_cols: int = 64,
                 channel: str | None = None, chunk_index: int | None = None,
                 grid: ScaleGrid | None = None) -> Scalogram:
    """Magnitude -> time pooling to ``target_cols`` bins -> min-max to [0, 1].

    A flat magnitude image (max - min below 1e-12) maps to all zeros.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.size == 0:
        raise ValueError("empty coefficient matrix")
    pooled = pool_columns(np.abs(coeffs), target_cols)
    lo, hi = pooled.min(), pooled.max()
    if hi - lo < FLAT_EPS:
        values = np.zeros_like(pooled)
    else:
        values = (pooled - lo) / (hi - lo)
    return Scalogram(values=values, channel=channel, chunk_index=chunk_index, grid=grid)


# ---------------------------------------------------------------------------
# Optional on-disk cache: <id>/chunk<k>_<channel>.f32, 4096 LE float32 values
# ---------------------------------------------------------------------------

def cache_path(root: Path | str, record_id: str, chunk_index: int, channel: str) -> Path:
    return Path(root) / record_id / f"chunk{chunk_index}_{channel.lower()}.f32"


def save_scalogram(scal: Scalogram, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(scal.values.astype("<f4").tobytes(order="C"))


def load_scalogram(path: Path | str, shape: tuple[int, int] = (64, 64)) -> np.ndarray:
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f4")
    if raw.size != shape[0] * shape[1]:
        raise ValueError(f"cache file {path} holds {raw.size} values, expected {shape[0]*shape[1]}")
    return raw.reshape(shape).astype(np.float64)
