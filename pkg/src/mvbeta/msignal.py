"""Per-channel signal processing: band-pass filtering, multilevel wavelet
decomposition, and marginalization onto the simplex.

The feature pipeline is bandpass -> dwt -> marginalize, applied channel by
channel. Each channel of a trial ends up as a short nonnegative vector that
sums to one, suitable for Dirichlet modelling downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError

__all__ = [
    "Signal",
    "WaveletDecomposition",
    "Trial",
    "FeatureConfig",
    "bandpass",
    "dwt",
    "marginalize",
    "floor_simplex",
    "extract_features",
]

_SQRT3 = math.sqrt(3.0)
# Orthonormal Daubechies-2 analysis taps (two vanishing moments).
DB2_LOWPASS = np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3]) / (
    4.0 * math.sqrt(2.0)
)
# High-pass by alternating-sign reversal: g[k] = (-1)^k h[3-k].
DB2_HIGHPASS = np.array(
    [DB2_LOWPASS[3], -DB2_LOWPASS[2], DB2_LOWPASS[1], -DB2_LOWPASS[0]]
)


@dataclass(frozen=True)
class Signal:
    """A single-channel recording with its sampling rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("samples must be a 1-d sequence of length >= 2")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must all be finite")
        if not (self.sample_rate_hz > 0.0 and math.isfinite(self.sample_rate_hz)):
            raise ValueError("sample_rate_hz must be positive and finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class WaveletDecomposition:
    """Pyramid of detail bands plus the final approximation band.

    ``detail_bands[k]`` holds the level-(k+1) detail coefficients;
    ``approx_band`` holds the approximation at the deepest level.
    """

    detail_bands: tuple
    approx_band: np.ndarray

    def __post_init__(self):
        bands = tuple(np.asarray(b, dtype=float) for b in self.detail_bands)
        approx = np.asarray(self.approx_band, dtype=float)
        if len(bands) < 1:
            raise ValueError("at least one detail band is required")
        for b in bands:
            if not np.all(np.isfinite(b)):
                raise ValueError("all coefficients must be finite")
        if not np.all(np.isfinite(approx)):
            raise ValueError("all coefficients must be finite")
        object.__setattr__(self, "detail_bands", bands)
        object.__setattr__(self, "approx_band", approx)

    @property
    def level(self) -> int:
        return len(self.detail_bands)


@dataclass(frozen=True)
class Trial:
    """One labelled multichannel recording."""

    trial_id: str
    channels: np.ndarray  # (n_channels, n_samples)
    label: int
    sample_rate_hz: float = 1000.0

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[0] < 1:
            raise ValueError("channels must be an (n_channels, n_samples) matrix")
        if not np.all(np.isfinite(ch)):
            raise ValueError("channel samples must all be finite")
        if self.label not in (+1, -1):
            raise ValueError(f"label must be +1 or -1, got {self.label!r}")
        object.__setattr__(self, "channels", ch)

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]


@dataclass(frozen=True)
class FeatureConfig:
    """Knobs of the extraction pipeline.

    level : decomposition depth (feature dimension is level + 1)
    band_low_hz / band_high_hz : pass-band edges
    epsilon_floor : lower bound applied to each output coordinate
    """

    level: int = 4
    band_low_hz: float = 7.0
    band_high_hz: float = 30.0
    epsilon_floor: float = 1e-10

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if not (0.0 < self.band_low_hz < self.band_high_hz):
            raise ValueError("band edges must satisfy 0 < low < high")
        if not (0.0 < self.epsilon_floor < 1e-2):
            raise ValueError("epsilon_floor must be a small positive number")


def bandpass(signal: Signal, low_hz: float, high_hz: float) -> Signal:
    """Zero every frequency bin outside [low_hz, high_hz].

    Brick-wall filtering in the DFT domain: deterministic, parameter-free,
    idempotent, and exactly length-preserving.
    """
    fs = signal.sample_rate_hz
    if not (0.0 < low_hz < high_hz < fs / 2.0):
        raise ValueError(
            f"band edges must satisfy 0 < low < high < fs/2, got [{low_hz}, {high_hz}] at fs={fs}"
        )
    x = signal.samples
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, d=1.0 / fs)
    spectrum[(freqs < low_hz) | (freqs > high_hz)] = 0.0
    return Signal(np.fft.irfft(spectrum, n=x.size), fs)


def _analysis_step(x: np.ndarray):
    """One circular filter-and-decimate step: (approx, detail)."""
    n = x.size
    half = n // 2
    idx = (2 * np.arange(half)[:, None] + np.arange(4)[None, :]) % n
    windows = x[idx]
    return windows @ DB2_LOWPASS, windows @ DB2_HIGHPASS


def dwt(signal: Signal, level: int) -> WaveletDecomposition:
    """Multilevel Daubechies-2 decomposition with circular extension.

    Level k produces floor(L / 2^k) coefficients. With the orthonormal taps
    the transform preserves energy exactly whenever every level's input
    length is even; odd lengths truncate one sample at that level.

    Parameters
    ----------
    signal : Signal
    level : int
        Depth of the pyramid; requires len(signal) >= 2**level.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    if len(signal) < 2**level:
        raise ValueError(
            f"signal of length {len(signal)} is too short for {level} levels"
        )
    details = []
    approx = signal.samples
    for _ in range(level):
        approx, detail = _analysis_step(approx)
        details.append(detail)
    return WaveletDecomposition(tuple(details), approx)


def floor_simplex(x, eps: float = 1e-10) -> np.ndarray:
    """Push zero or near-zero simplex coordinates up to ``eps``.

    Coordinates below ``eps`` are set to exactly ``eps`` and the remaining
    ones are rescaled to keep the total at 1, so every output coordinate is
    >= eps and the vector still sums to 1. A plain clip-then-renormalize
    would land the floored coordinates slightly below eps again.
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("input must be a vector of length >= 2")
    if np.any(v < 0.0):
        raise ValueError("coordinates must be nonnegative")
    if abs(v.sum() - 1.0) > 1e-9:
        raise ValueError("input must sum to 1")
    below = v < eps
    m = int(below.sum())
    if m == 0:
        return v.copy()
    if m * eps >= 0.5:
        raise ValueError("floor too large for this many degenerate coordinates")
    out = np.empty_like(v)
    out[below] = eps
    rest = v[~below]
    out[~below] = rest * ((1.0 - m * eps) / rest.sum())
    return out


def marginalize(decomp: WaveletDecomposition, eps: float = 1e-10) -> np.ndarray:
    """Collapse a decomposition to a simplex vector of per-band magnitudes.

    Coordinate k (k = 1..level) is the sum of absolute values of the
    level-k detail band; the last coordinate is the same sum over the final
    approximation band. The vector is normalized to sum 1 and floored away
    from the boundary.
    """
    sums = [np.abs(b).sum() for b in decomp.detail_bands]
    sums.append(np.abs(decomp.approx_band).sum())
    c = np.asarray(sums)
    total = c.sum()
    if total <= 0.0:
        raise DegenerateDataError("all wavelet coefficients are zero; nothing to normalize")
    return floor_simplex(c / total, eps=eps)


def extract_features(trial: Trial, config: FeatureConfig = FeatureConfig()) -> list:
    """Per-channel mDWT feature vectors of one trial.

    Returns a list with one length-(level+1) simplex vector per channel,
    in channel order. Deterministic: identical inputs give bit-identical
    outputs.
    """
    fs = trial.sample_rate_hz
    out = []
    for row in trial.channels:
        filtered = bandpass(Signal(row, fs), config.band_low_hz, config.band_high_hz)
        decomp = dwt(filtered, config.level)
        out.append(marginalize(decomp, eps=config.epsilon_floor))
    return out
