"""Steady-state response of a warm four-level ladder vapor.

Level chain: ground -> first excited (probe laser), first excited ->
Rydberg (coupling laser), Rydberg -> neighbor Rydberg (microwave field).
The probe coherence is evaluated in the weak-probe limit as a nested
resolvent, written division-free so that zero decoherence and zero drive
edge cases stay finite.  The complex susceptibility is reduced to the
interferometer phase/absorption pair, transparency-window splitting reads
the microwave field, and a discrete Hilbert transform checks dispersion
against absorption.

Sign conventions:

- detunings are field frequency minus transition frequency (rad/s);
- Im(chi) >= 0 is absorption; single-pass power transmission is
  exp(2 * delta_beta) with delta_beta = -(pi L / lambda) Im(chi);
- the interferometer phase is delta_phi = (pi L / lambda) Re(chi);
- Doppler shifts for counter-propagating probe and coupling beams enter
  as delta_p -> delta_p - k_p v and delta_c -> delta_c + k_c v.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants, signal
from scipy.special import roots_hermite

from .errors import (
    AccuracyError,
    GridPolicyError,
    InvalidParameterError,
    RegimeWarning,
    UnresolvedSplittingError,
)

_TWO_PI = 2.0 * math.pi

CS_MASS_KG = 132.905451931 * constants.atomic_mass

GH_NODES_START = 64
GH_NODES_MAX = 32768
GH_RTOL = 1e-6

# Absorption must have decayed to below this fraction of its peak at the
# grid edges before the Hilbert-transform comparison is meaningful.
KK_EDGE_FRACTION = 0.01
_KK_PAD_FACTOR = 4

# Probe drive above this fraction of the intermediate-state decay rate
# leaves the weak-probe regime the model assumes.
_WEAK_PROBE_FRACTION = 0.2


@dataclass(frozen=True)
class LadderSystemParams:
    """Drive fields, decay rates and cell constants of the ladder medium.

    Rabi frequencies, detunings and decay rates are in rad/s; decay rates
    are full population rates.  ``density`` is atoms per cubic meter and
    ``dipole_probe`` is the effective probe transition moment in C*m
    (an effective value keeps the 10 cm cell in the thin-medium regime
    that the single (delta_phi, delta_beta) parameterization assumes).
    """

    omega_p: float = _TWO_PI * 1.0e5
    omega_c: float = _TWO_PI * 2.0e6
    omega_mw: float = 0.0
    delta_p: float = 0.0
    delta_c: float = 0.0
    delta_mw: float = 0.0
    gamma_2: float = _TWO_PI * 5.2e6
    gamma_3: float = _TWO_PI * 1.0e5
    gamma_4: float = _TWO_PI * 1.0e5
    density: float = 5.40e16
    dipole_probe: float = 1.0e-30
    cell_length: float = 0.10
    lambda_p: float = 852.35e-9
    lambda_c: float = 509.93e-9
    temperature: float = 299.15
    atomic_mass: float = CS_MASS_KG
    doppler_enabled: bool = False

    def __post_init__(self):
        for name in (
            "omega_p",
            "omega_c",
            "omega_mw",
            "delta_p",
            "delta_c",
            "delta_mw",
            "gamma_2",
            "gamma_3",
            "gamma_4",
            "density",
            "dipole_probe",
            "cell_length",
            "lambda_p",
            "lambda_c",
            "temperature",
            "atomic_mass",
        ):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if self.gamma_2 <= 0.0:
            raise InvalidParameterError("gamma_2 must be > 0")
        if self.gamma_3 < 0.0 or self.gamma_4 < 0.0:
            raise InvalidParameterError("gamma_3 and gamma_4 must be >= 0")
        for name in ("omega_p", "omega_c", "omega_mw"):
            if getattr(self, name) < 0.0:
                raise InvalidParameterError(f"{name} must be >= 0")
        for name in ("cell_length", "lambda_p", "lambda_c", "temperature"):
            if getattr(self, name) <= 0.0:
                raise InvalidParameterError(f"{name} must be > 0")
        if self.density < 0.0:
            raise InvalidParameterError("density must be >= 0")
        if self.dipole_probe <= 0.0 or self.atomic_mass <= 0.0:
            raise InvalidParameterError("dipole_probe and atomic_mass must be > 0")
        if self.omega_p > _WEAK_PROBE_FRACTION * self.gamma_2:
            warnings.warn(
                "probe Rabi frequency is not small against gamma_2; the "
                "weak-probe steady state degrades",
                RegimeWarning,
                stacklevel=2,
            )

    @property
    def k_p(self):
        return _TWO_PI / self.lambda_p

    @property
    def k_c(self):
        return _TWO_PI / self.lambda_c

    @property
    def thermal_speed(self):
        """Most-probable 1-D speed scale sqrt(2 kB T / m) in m/s."""
        return math.sqrt(2.0 * constants.k * self.temperature / self.atomic_mass)


@dataclass(frozen=True)
class SusceptibilityPoint:
    """Complex susceptibility at one probe detuning."""

    delta_p: float
    chi: complex


@dataclass(frozen=True)
class PhaseAbsorptionPair:
    """Single-pass probe phase shift and log-amplitude change (radians)."""

    delta_phi: float
    delta_beta: float


# ---------------------------------------------------------------------------
# steady state


def _resolvent_ratio(params, delta_p, velocity=0.0, omega_mw=None):
    """rho_21 divided by (i omega_p / 2), in a division-free rational form.

    Vectorized over any one of delta_p, velocity, omega_mw.  The rational
    form keeps zero-decoherence and zero-drive corners finite: every
    denominator is nonzero for gamma_2 > 0 and real detunings.
    """
    dp = np.asarray(delta_p, dtype=float)
    omw = params.omega_mw if omega_mw is None else omega_mw
    d2 = dp - params.k_p * velocity
    d3 = dp + params.delta_c + (params.k_c - params.k_p) * velocity
    d4 = d3 + params.delta_mw

    outer = 0.5 * params.gamma_2 - 1j * d2
    if params.omega_c == 0.0:
        return 1.0 / outer

    mid = params.gamma_3 - 1j * d3
    c2 = (0.5 * params.omega_c) ** 2
    if np.ndim(omw) == 0 and omw == 0.0:
        return mid / (outer * mid + c2)

    inner = params.gamma_4 - 1j * d4
    m2 = np.square(np.multiply(0.5, omw))
    nested = mid * inner + m2
    return nested / (outer * nested + c2 * inner)


def steady_state_coherence(params, delta_p):
    """Weak-probe coherence between ground and first excited state.

    Linear in the probe Rabi frequency; scalar in, scalar out, with array
    detunings supported for sweeps.
    """
    ratio = (0.5j * params.omega_p) * _resolvent_ratio(params, delta_p)
    if np.ndim(delta_p) == 0:
        return complex(ratio)
    return ratio


def _chi_prefactor(params):
    return params.density * params.dipole_probe**2 / (constants.epsilon_0 * constants.hbar)


def _chi_values(params, delta_p, velocity=0.0, omega_mw=None):
    """Susceptibility, vectorized, probe-amplitude independent."""
    return (
        _chi_prefactor(params)
        * 1j
        * _resolvent_ratio(params, delta_p, velocity, omega_mw)
    )


def susceptibility(params, delta_p):
    """Complex probe susceptibility of a single velocity class.

    The weak-probe coherence is linear in the probe field, so the probe
    amplitude cancels and chi is well defined even as omega_p -> 0.
    """
    chi = _chi_values(params, delta_p)
    if np.ndim(delta_p) == 0:
        return complex(chi)
    return chi


def susceptibility_spectrum(params, grid):
    """Susceptibility sampled on a strictly increasing detuning grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InvalidParameterError("detuning grid is empty")
    if grid.ndim != 1 or (grid.size > 1 and not np.all(np.diff(grid) > 0.0)):
        raise InvalidParameterError("detuning grid must be 1-D strictly increasing")
    if params.doppler_enabled:
        chi = np.array([doppler_average(params, dp) for dp in grid])
    else:
        chi = _chi_values(params, grid)
    return [SusceptibilityPoint(float(dp), complex(c)) for dp, c in zip(grid, chi)]


def doppler_average(params, delta_p, rtol=GH_RTOL):
    """Thermal-ensemble susceptibility via adaptive Gauss-Hermite quadrature.

    Node count doubles from 64 until successive levels agree to ``rtol``,
    raising an accuracy error past 32768 nodes.  Narrow-line warm vapors
    legitimately exhaust the ladder: their velocity integrand varies on a
    scale far below the node spacing.
    """
    if not params.doppler_enabled:
        raise InvalidParameterError(
            "doppler_average requires doppler_enabled=True on the parameter set"
        )
    u = params.thermal_speed
    previous = None
    n = GH_NODES_START
    while n <= GH_NODES_MAX:
        nodes, weights = roots_hermite(n)
        values = _chi_values(params, float(delta_p), velocity=u * nodes)
        current = complex(np.dot(weights, values) / math.sqrt(math.pi))
        if previous is not None and abs(current - previous) <= rtol * abs(current):
            return current
        previous = current
        n *= 2
    raise AccuracyError(
        "Doppler average did not converge within 32768 Gauss-Hermite nodes; "
        "the velocity integrand is narrower than the node spacing"
    )


def phase_and_absorption(chi, params):
    """Map one susceptibility value onto the interferometer pair."""
    chi = complex(chi)
    if abs(chi) > 0.1:
        warnings.warn(
            "|chi| is not small; the thin-medium phase/absorption mapping degrades",
            RegimeWarning,
            stacklevel=2,
        )
    factor = math.pi * params.cell_length / params.lambda_p
    return PhaseAbsorptionPair(
        delta_phi=factor * chi.real,
        delta_beta=-factor * chi.imag,
    )


def rabi_from_field(e_field, dipole):
    """Rabi frequency dipole * E / hbar in rad/s."""
    if dipole <= 0.0:
        raise InvalidParameterError(f"dipole moment must be > 0, got {dipole!r}")
    if e_field < 0.0:
        raise InvalidParameterError(f"field amplitude must be >= 0, got {e_field!r}")
    return dipole * e_field / constants.hbar


# ---------------------------------------------------------------------------
# spectral structure


def detuning_grid(params, span_linewidths=40.0, points=4096):
    """Symmetric probe-detuning grid, span in units of gamma_2."""
    if span_linewidths <= 0.0 or points < 16:
        raise InvalidParameterError("grid needs positive span and >= 16 points")
    half = 0.5 * span_linewidths * params.gamma_2
    return np.linspace(-half, half, int(points))


def _spectrum_arrays(spectrum):
    points = list(spectrum)
    if len(points) < 3:
        raise InvalidParameterError("spectrum needs at least 3 points")
    detunings = np.array([p.delta_p for p in points], dtype=float)
    chi = np.array([p.chi for p in points], dtype=complex)
    if not np.all(np.diff(detunings) > 0.0):
        raise InvalidParameterError("spectrum detunings must be strictly increasing")
    return detunings, chi


def kk_residual(spectrum):
    """Dispersion-vs-absorption consistency of a sampled spectrum.

    Reconstructs Re(chi) from Im(chi) with a zero-padded discrete Hilbert
    transform and returns the max-norm relative residual over the central
    half of the grid.  Preconditions: uniform grid of at least 64 points
    with the absorption decayed below 1 percent of its peak at both edges.
    """
    detunings, chi = _spectrum_arrays(spectrum)
    if detunings.size < 64:
        raise GridPolicyError("Hilbert-transform check needs at least 64 samples")
    steps = np.diff(detunings)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise GridPolicyError("Hilbert-transform check needs a uniform grid")
    absorption = np.imag(chi)
    dispersion = np.real(chi)
    peak = float(np.max(np.abs(absorption)))
    if peak == 0.0:
        return 0.0
    edge = max(abs(absorption[0]), abs(absorption[-1]))
    if edge > KK_EDGE_FRACTION * peak:
        raise GridPolicyError(
            "absorption has not decayed at the grid edges "
            f"(edge/peak = {edge / peak:.3g} > {KK_EDGE_FRACTION}); widen the span"
        )
    n = absorption.size
    analytic = signal.hilbert(absorption, N=_KK_PAD_FACTOR * n)
    reconstructed = -np.imag(analytic[:n])
    lo, hi = n // 4, n - n // 4
    scale = float(np.max(np.abs(dispersion[lo:hi])))
    worst = float(np.max(np.abs(dispersion[lo:hi] - reconstructed[lo:hi])))
    if scale == 0.0:
        return 0.0 if worst == 0.0 else math.inf
    return worst / scale


def _refine_extremum(x, y, index):
    """Vertex of the parabola through three samples around a grid extremum."""
    x0, x1, x2 = x[index - 1 : index + 2]
    y0, y1, y2 = y[index - 1 : index + 2]
    denom = (y0 - 2.0 * y1 + y2)
    if denom == 0.0:
        return x1
    shift = 0.5 * (y0 - y2) / denom
    # a degenerate fit (vertex outside the bracket) keeps the grid point
    if abs(shift) > 1.0:
        return x1
    return x1 + shift * (x1 - x0)


def at_splitting(spectrum):
    """Separation in Hz of the two transparency dips of the absorption.

    The split transparency window puts two local minima of Im(chi) at
    probe detunings of plus and minus half the microwave Rabi frequency
    (exact in the low-decoherence limit), so the dip separation reads the
    microwave field.  Exactly two interior minima are required; fewer
    means the window has not split (sub-threshold drive), more means the
    spectrum is not a resolved doublet.
    """
    detunings, chi = _spectrum_arrays(spectrum)
    absorption = np.imag(chi)
    interior = (
        np.flatnonzero(
            (absorption[1:-1] < absorption[:-2])
            & (absorption[1:-1] < absorption[2:])
        )
        + 1
    )
    if interior.size != 2:
        raise UnresolvedSplittingError(
            f"expected two transparency dips, found {interior.size}; "
            "the splitting is unresolved at this drive and decoherence"
        )
    left = _refine_extremum(detunings, absorption, int(interior[0]))
    right = _refine_extremum(detunings, absorption, int(interior[1]))
    return (right - left) / _TWO_PI


def field_from_at_splitting(f_at, dipole_mw):
    """Microwave field amplitude E = h f_AT / dipole in V/m."""
    if dipole_mw <= 0.0:
        raise InvalidParameterError(f"dipole_mw must be > 0, got {dipole_mw!r}")
    if f_at < 0.0:
        raise InvalidParameterError(f"f_at must be >= 0, got {f_at!r}")
    return constants.h * f_at / dipole_mw


def splitting_vs_drive(params, omega_mw_values, span_linewidths=40.0, points=8192):
    """at_splitting swept over microwave drive amplitudes.

    Returns a list of (omega_mw, f_at or None); None marks drives whose
    transparency window did not resolve into two dips.
    """
    results = []
    grid = detuning_grid(params, span_linewidths, points)
    for omega in omega_mw_values:
        swept = replace(params, omega_mw=float(omega))
        try:
            f_at = at_splitting(susceptibility_spectrum(swept, grid))
        except UnresolvedSplittingError:
            f_at = None
        results.append((float(omega), f_at))
    return results
