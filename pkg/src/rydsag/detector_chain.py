"""Dual-channel photodetection and intensity-contrast readout.

The split detector integrates the transverse beam profile on each side of
a small dead gap about x = 0, converts the two optical powers to the
normalized contrast eta, and supports noisy time-series sampling with
photon shot noise, NEP-equivalent white noise, dark-current noise, an
optional common-mode relative-intensity noise, an optional narrowband
line, and a single-pole bandwidth limit.  Noise is injected in optical
power units before the eta division, since the physical ratio circuit
divides noisy photocurrents; this is what makes small post-selected
powers expensive, as a real weak-value readout finds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants, signal
from scipy.integrate import trapezoid

from .errors import InvalidParameterError, RegimeWarning

MAX_SAMPLES = 100_000_000


@dataclass(frozen=True)
class DetectorParams:
    """Split-detector electronics and noise figures.

    ``gain`` is the dimensionless transimpedance magnification, ``nep`` the
    noise-equivalent power in W per root Hz, ``gap`` the dead zone about
    x = 0 in meters, ``rin`` a common-mode relative intensity noise density
    in 1 per root Hz shared by both channels, and ``line_freq_hz`` /
    ``line_amp_w`` an optional additive narrowband line split across the
    channels.  ``wavelength`` sets the photon energy for shot noise.
    """

    gain: float = 1.0e5
    nep: float = 7.2e-15
    dark_current: float = 0.5e-9
    bandwidth: float = 25.0e6
    gap: float = 30.0e-6
    responsivity: float = 0.6
    wavelength: float = 852.35e-9
    rin: float = 0.0
    line_freq_hz: float = 0.0
    line_amp_w: float = 0.0

    def __post_init__(self):
        for name in (
            "gain",
            "nep",
            "dark_current",
            "bandwidth",
            "gap",
            "responsivity",
            "wavelength",
            "rin",
            "line_freq_hz",
            "line_amp_w",
        ):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            if value < 0.0:
                raise InvalidParameterError(f"{name} must be >= 0, got {value!r}")
        for name in ("gain", "bandwidth", "responsivity", "wavelength"):
            if getattr(self, name) <= 0.0:
                raise InvalidParameterError(f"{name} must be > 0")

    @property
    def photon_energy(self):
        return constants.h * constants.c / self.wavelength


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled real-valued record."""

    fs: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.fs) or self.fs <= 0.0:
            raise InvalidParameterError(f"sample rate must be > 0, got {self.fs!r}")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidParameterError("samples must be a nonempty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise InvalidParameterError("samples contain non-finite values")
        object.__setattr__(self, "samples", samples)

    def times(self):
        return self.t0 + np.arange(self.samples.size) / self.fs


# ---------------------------------------------------------------------------
# profile partition


def _segment_integral(x, y, a, b):
    """Trapezoid integral of sampled y over [a, b] with interpolated ends."""
    if b <= a:
        return 0.0
    inside = (x > a) & (x < b)
    xs = np.concatenate(([a], x[inside], [b]))
    ys = np.concatenate(([np.interp(a, x, y)], y[inside], [np.interp(b, x, y)]))
    return float(trapezoid(ys, xs))


def split_powers(profile, grid, det):
    """Optical power on the left and right detector halves.

    Integrates the intensity profile over x < -gap/2 and x > +gap/2;
    power falling in the gap is discarded.
    """
    grid = np.asarray(grid, dtype=float)
    profile = np.asarray(profile, dtype=float)
    if grid.ndim != 1 or grid.shape != profile.shape or grid.size < 3:
        raise InvalidParameterError("profile and grid must be matching 1-D arrays")
    if not np.all(np.diff(grid) > 0.0):
        raise InvalidParameterError("grid must be strictly increasing")
    total = float(trapezoid(profile, grid))
    if total <= 0.0:
        raise InvalidParameterError("profile carries no power")
    half_gap = 0.5 * det.gap
    p_left = _segment_integral(grid, profile, grid[0], -half_gap)
    p_right = _segment_integral(grid, profile, half_gap, grid[-1])
    return p_left, p_right


def icr_from_powers(p_left, p_right):
    """Normalized contrast (P_left - P_right) / (P_left + P_right)."""
    if p_left < 0.0 or p_right < 0.0:
        raise InvalidParameterError("channel powers must be >= 0")
    total = p_left + p_right
    if total <= 0.0:
        raise InvalidParameterError("total detected power must be > 0")
    return (p_left - p_right) / total


# ---------------------------------------------------------------------------
# noisy sampling


def _sample_count(fs, duration):
    if not math.isfinite(fs) or fs <= 0.0:
        raise InvalidParameterError(f"sample rate must be > 0, got {fs!r}")
    if not math.isfinite(duration) or duration <= 0.0:
        raise InvalidParameterError(f"duration must be > 0, got {duration!r}")
    n = int(round(fs * duration))
    if n < 1:
        raise InvalidParameterError("duration too short for one sample")
    if n > MAX_SAMPLES:
        raise InvalidParameterError(f"{n} samples exceed the {MAX_SAMPLES} cap")
    return n


def _additive_noise(rng, power, det, fs):
    """One channel's additive noise draw in optical power units."""
    nyquist = 0.5 * fs
    shot_var = 2.0 * det.photon_energy * np.clip(power, 0.0, None) * nyquist
    nep_var = det.nep**2 * nyquist
    dark_var = (
        2.0 * constants.e * det.dark_current * nyquist / det.responsivity**2
    )
    return rng.standard_normal(power.size) * np.sqrt(shot_var + nep_var + dark_var)


def _bandwidth_filter(x, det, fs):
    """Single-pole low-pass at the detector bandwidth, settled at x[0]."""
    a = math.exp(-2.0 * math.pi * det.bandwidth / fs)
    if a == 0.0:
        return x
    zi = np.array([a * x[0]])
    y, _ = signal.lfilter([1.0 - a], [1.0, -a], x, zi=zi)
    return y


def _common_mode_factors(rng, det, fs, t):
    """Multiplicative RIN factor and additive line waveform (may be None)."""
    factor = None
    if det.rin > 0.0:
        factor = 1.0 + det.rin * math.sqrt(0.5 * fs) * rng.standard_normal(t.size)
    line = None
    if det.line_amp_w > 0.0 and det.line_freq_hz > 0.0:
        phase = rng.uniform(0.0, 2.0 * math.pi)
        line = det.line_amp_w * np.sin(2.0 * math.pi * det.line_freq_hz * t + phase)
    return factor, line


def _warn_bandwidth(det, fs):
    if fs > 2.0 * det.bandwidth:
        warnings.warn(
            "sample rate exceeds twice the detector bandwidth; the sampled "
            "record is bandwidth-limited",
            RegimeWarning,
            stacklevel=3,
        )


def sample_timeseries(signal_fn, det, fs, duration, seed):
    """Noisy eta record of a two-channel optical signal.

    ``signal_fn(t)`` maps an array of sample times to the pair of clean
    channel powers (P_left, P_right) in watts.  Per sample and channel the
    chain draws shot noise (variance 2 h nu P fs/2), NEP noise (variance
    nep^2 fs/2) and dark-current noise, applies any common-mode intensity
    noise, low-passes each channel at the detector bandwidth, clamps
    negative powers, and divides into eta.  Reproducible from the seed.
    """
    n = _sample_count(fs, duration)
    _warn_bandwidth(det, fs)
    t = np.arange(n) / fs
    p_left, p_right = signal_fn(t)
    p_left = np.broadcast_to(np.asarray(p_left, dtype=float), t.shape).copy()
    p_right = np.broadcast_to(np.asarray(p_right, dtype=float), t.shape).copy()

    rng = np.random.default_rng(seed)
    factor, line = _common_mode_factors(rng, det, fs, t)
    noise_left = _additive_noise(rng, p_left, det, fs)
    noise_right = _additive_noise(rng, p_right, det, fs)

    if factor is not None:
        p_left *= factor
        p_right *= factor
    if line is not None:
        p_left += 0.5 * line
        p_right += 0.5 * line
    left = _bandwidth_filter(p_left + noise_left, det, fs)
    right = _bandwidth_filter(p_right + noise_right, det, fs)

    left = np.clip(left, 0.0, None)
    right = np.clip(right, 0.0, None)
    total = left + right
    eta = np.divide(
        left - right,
        total,
        out=np.zeros_like(total),
        where=total > 0.0,
    )
    return TimeSeries(fs=fs, samples=eta)


def sample_power_timeseries(power_fn, det, fs, duration, seed):
    """Noisy single-channel power record (watts) of ``power_fn(t)``.

    Same noise chain as sample_timeseries without the division; used by
    transmission-based readout.
    """
    n = _sample_count(fs, duration)
    _warn_bandwidth(det, fs)
    t = np.arange(n) / fs
    power = np.broadcast_to(np.asarray(power_fn(t), dtype=float), t.shape).copy()

    rng = np.random.default_rng(seed)
    factor, line = _common_mode_factors(rng, det, fs, t)
    noise = _additive_noise(rng, power, det, fs)

    if factor is not None:
        power *= factor
    if line is not None:
        power += line
    out = _bandwidth_filter(power + noise, det, fs)
    return TimeSeries(fs=fs, samples=np.clip(out, 0.0, None))


# ---------------------------------------------------------------------------
# spectral estimation


def psd(ts, segment_length, overlap=None):
    """Averaged-periodogram density of a time series (Hann window).

    Returns (frequencies in Hz, one-sided density in units^2/Hz).  The
    Hann-windowed estimate satisfies Parseval to within a few percent:
    integrating the density recovers the series variance.
    """
    samples = ts.samples
    segment_length = int(segment_length)
    if segment_length < 8:
        raise InvalidParameterError("segment_length must be at least 8")
    if segment_length > samples.size:
        raise InvalidParameterError(
            f"segment_length {segment_length} exceeds the {samples.size}-sample series"
        )
    if overlap is None:
        overlap = segment_length // 2
    overlap = int(overlap)
    if not 0 <= overlap < segment_length:
        raise InvalidParameterError("overlap must satisfy 0 <= overlap < segment_length")
    freqs, density = signal.welch(
        samples,
        fs=ts.fs,
        window="hann",
        nperseg=segment_length,
        noverlap=overlap,
        detrend="constant",
        scaling="density",
    )
    return freqs, density
