"""Weak-measurement pointer algebra for a Sagnac-loop polarization readout.

The measured system lives on two counter-propagating polarization modes
H and V.  A small transverse momentum kick ``exp(-i k x A)`` with
``A = |H><H| - |V><V|`` entangles the system with the transverse beam
profile, the prepared state carries the inter-arm phase ``delta_phi`` and
log-amplitude imbalance ``delta_beta``, and post-selection is a linear
polarizer at ``angle``.  Pointer observables are the beam centroid and
the left/right intensity-contrast ratio eta.

Conventions fixed here and enforced against the quadrature oracle:

- meter amplitude ``phi(x) = (2 pi w^2)**-0.25 * exp(-x^2 / (4 w^2))``,
  so ``|phi|^2`` is a normal density with RMS width ``w``;
- prepared state ``e^{+i dphi/2 + dbeta} |H> + e^{-i dphi/2 - dbeta} |V>``,
  renormalized to unit power;
- post-selection onto ``cos(angle) |H> - sin(angle) |V>``;
- ``eta > 0`` means more power in the left half-plane ``x < 0``, which is
  the side the centroid ``~ -delta_phi / k`` moves to for small positive
  ``delta_phi``; with these signs the linearized forms
  ``centroid = -delta_phi / k`` and ``eta = sqrt(2/pi) delta_phi / (k w)``
  hold simultaneously.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import (
    AccuracyError,
    DomainError,
    InvalidParameterError,
    OrthogonalPostselectionError,
    RegimeWarning,
)

_SQRTPI = math.sqrt(math.pi)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Post-selected power below this fraction of the input power is treated as
# an orthogonal post-selection (numerical floor, not a physical cutoff).
ORTHOGONAL_POWER_FLOOR = 1e-30

_QUAD_EPSREL = 1e-13
_QUAD_LIMIT = 400

# erfi is validated on |z| <= 10.  The power series is used below the
# crossover and the scaled asymptotic continuation above it; the crossover
# sits where the asymptotic truncation floor is safely below 1e-13.
_ERFI_DOMAIN = 10.0
_ERFI_SERIES_CUTOFF = 6.0


def _check_finite(**named):
    for name, value in named.items():
        if not math.isfinite(value):
            raise InvalidParameterError(f"{name} must be finite, got {value!r}")


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class PreSelection:
    """Inter-arm phase and log-amplitude imbalance of the prepared state."""

    delta_phi: float
    delta_beta: float = 0.0

    def __post_init__(self):
        _check_finite(delta_phi=self.delta_phi, delta_beta=self.delta_beta)


@dataclass(frozen=True)
class PostSelection:
    """Linear-polarizer angle of the analysis port, in (0, pi/2)."""

    angle: float = math.pi / 4

    def __post_init__(self):
        _check_finite(angle=self.angle)
        if not 0.0 < self.angle < math.pi / 2:
            raise InvalidParameterError(
                f"post-selection angle must lie in (0, pi/2), got {self.angle!r}"
            )


@dataclass(frozen=True)
class WeakCoupling:
    """Transverse momentum kick k in rad/m (sign = kick direction)."""

    k: float

    def __post_init__(self):
        _check_finite(k=self.k)


@dataclass(frozen=True, eq=False)
class BeamPointer:
    """Gaussian meter: RMS width w and a symmetric transverse sample grid."""

    w: float
    grid: np.ndarray

    def __post_init__(self):
        _check_finite(w=self.w)
        if self.w <= 0.0:
            raise InvalidParameterError(f"beam width w must be > 0, got {self.w!r}")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 3:
            raise InvalidParameterError("beam grid must be 1-D with >= 3 samples")
        if not np.all(np.isfinite(grid)):
            raise InvalidParameterError("beam grid contains non-finite samples")
        if not np.allclose(grid, -grid[::-1], rtol=0.0, atol=1e-12 * self.w):
            raise InvalidParameterError("beam grid must be symmetric about x = 0")
        if grid[-1] - grid[0] < 8.0 * self.w:
            raise InvalidParameterError(
                "beam grid span must cover at least 8 beam widths"
            )
        object.__setattr__(self, "grid", grid)

    @classmethod
    def centered(cls, w, span_w=10.0, points=1001):
        """Symmetric grid covering span_w beam widths about x = 0."""
        half = 0.5 * span_w * w
        return cls(w=w, grid=np.linspace(-half, half, int(points)))


@dataclass(frozen=True, eq=False)
class PointerSetup:
    """Post-selection, coupling and beam grouped for pipeline calls."""

    post: PostSelection
    coupling: WeakCoupling
    beam: BeamPointer


@dataclass(frozen=True, eq=False)
class PointerReadout:
    """Observables of one pointer measurement (unit input power)."""

    centroid: float
    eta: float
    p_post: float
    profile: np.ndarray

    def summary(self):
        return {
            "centroid_m": self.centroid,
            "eta": self.eta,
            "p_post": self.p_post,
        }


# ---------------------------------------------------------------------------
# special function


def erfi(z):
    """Imaginary error function erfi(z) = -i erf(i z) for real |z| <= 10.

    All power-series terms are positive for real argument, so the series
    has no cancellation; together with the asymptotic continuation the
    relative error stays below 1e-12 on the whole validated range.
    """
    z = float(z)
    if not math.isfinite(z):
        raise InvalidParameterError(f"erfi argument must be finite, got {z!r}")
    az = abs(z)
    if az > _ERFI_DOMAIN:
        raise DomainError(f"erfi validated only for |z| <= {_ERFI_DOMAIN}, got {z!r}")
    if az == 0.0:
        return 0.0
    if az < _ERFI_SERIES_CUTOFF:
        return math.copysign(_erfi_series(az), z)
    return math.copysign(_erfi_asymptotic(az), z)


def _erfi_series(x, max_terms=400):
    # sum_n x^(2n+1) / (n! (2n+1)), scaled by 2/sqrt(pi)
    xx = x * x
    power = x  # x^(2n+1) / n!
    total = x
    for n in range(1, max_terms):
        power *= xx / n
        term = power / (2 * n + 1)
        total += term
        if term < 1e-17 * total:
            return 2.0 * total / _SQRTPI
    raise AccuracyError(f"erfi series did not converge at x = {x!r}")


def _erfi_asymptotic(x):
    # erfi(x) ~ e^{x^2} / (x sqrt(pi)) * sum_m (2m-1)!! / (2 x^2)^m
    inv = 1.0 / (2.0 * x * x)
    term = 1.0
    total = 1.0
    for m in range(1, 60):
        nxt = term * (2 * m - 1) * inv
        if nxt >= term:  # divergent tail reached
            break
        term = nxt
        total += term
        if term < 1e-17 * total:
            break
    return math.exp(x * x) * total / (x * _SQRTPI)


def scaled_erfi(z):
    """exp(-z^2) * erfi(z), overflow-free for any real z (vectorized).

    Equals 2/sqrt(pi) times the Dawson function; used by the closed pointer
    forms so large actuator excursions stay finite.
    """
    return 2.0 / _SQRTPI * special.dawsn(z)


# ---------------------------------------------------------------------------
# state algebra


def _arm_amplitudes(pre, post):
    """Post-selected (cos(angle)*a_H, sin(angle)*a_V) arm coefficients."""
    norm = math.sqrt(2.0 * math.cosh(2.0 * pre.delta_beta))
    a_h = cmath.exp(complex(pre.delta_beta, 0.5 * pre.delta_phi)) / norm
    a_v = cmath.exp(complex(-pre.delta_beta, -0.5 * pre.delta_phi)) / norm
    return math.cos(post.angle) * a_h, math.sin(post.angle) * a_v


def weak_value(pre, post):
    """Weak value of A = |H><H| - |V><V| for the given pre/post selection.

    Equals coth(delta_beta + i delta_phi / 2) at the symmetric analyzer
    angle pi/4, hence -i cot(delta_phi / 2) for a pure phase.  The pure
    phase branch is computed through the half-angle identity
    cot(x/2) = (1 + cos x)/sin x, which keeps special points exact.
    """
    if pre.delta_beta == 0.0 and post.angle == math.pi / 4:
        c = math.cos(pre.delta_phi)
        s = math.sin(pre.delta_phi)
        if 1.0 - c < 1e-30:
            raise OrthogonalPostselectionError(
                "pre- and post-selection are orthogonal; weak value diverges"
            )
        return complex(0.0, -(1.0 + c) / s) if s != 0.0 else complex(0.0, 0.0)
    ch, sv = _arm_amplitudes(pre, post)
    numerator = ch + sv
    denominator = ch - sv
    if abs(denominator) ** 2 < ORTHOGONAL_POWER_FLOOR:
        raise OrthogonalPostselectionError(
            "pre- and post-selection are orthogonal; weak value diverges"
        )
    return numerator / denominator


def final_wavefunction(pre, post, coupling, beam):
    """Post-selected meter amplitude on the beam grid (unit input power)."""
    x = beam.grid
    ch, sv = _arm_amplitudes(pre, post)
    envelope = (2.0 * math.pi * beam.w**2) ** -0.25 * np.exp(
        -(x**2) / (4.0 * beam.w**2)
    )
    phase = np.exp(-1j * coupling.k * x)
    return envelope * (ch * phase - sv * np.conj(phase))


# ---------------------------------------------------------------------------
# closed forms for the symmetric analyzer (angle = pi/4)


def closed_p_post(delta_phi, delta_beta, k, w):
    """Post-selection probability, symmetric analyzer, any delta_beta."""
    kw2 = np.square(np.multiply(k, w))
    cosh2b = np.cosh(2.0 * np.asarray(delta_beta, dtype=float))
    return (cosh2b - np.exp(-2.0 * kw2) * np.cos(delta_phi)) / (2.0 * cosh2b)


def closed_centroid(delta_phi, delta_beta, k, w):
    """Beam centroid in meters, symmetric analyzer, any delta_beta."""
    kw2 = np.square(np.multiply(k, w))
    damp = np.exp(-2.0 * kw2)
    den = np.cosh(2.0 * np.asarray(delta_beta, dtype=float)) - damp * np.cos(delta_phi)
    _guard_closed_denominator(den, delta_beta)
    return -2.0 * np.multiply(k, np.square(w)) * damp * np.sin(delta_phi) / den


def closed_icr(delta_phi, delta_beta, k, w):
    """Left/right intensity contrast, symmetric analyzer, any delta_beta."""
    kw = np.multiply(k, w)
    den = np.cosh(2.0 * np.asarray(delta_beta, dtype=float)) - np.exp(
        -2.0 * np.square(kw)
    ) * np.cos(delta_phi)
    _guard_closed_denominator(den, delta_beta)
    return scaled_erfi(math.sqrt(2.0) * kw) * np.sin(delta_phi) / den


def _guard_closed_denominator(den, delta_beta):
    floor = 2.0 * np.cosh(2.0 * np.asarray(delta_beta, dtype=float))
    if np.any(den < ORTHOGONAL_POWER_FLOOR * floor):
        raise OrthogonalPostselectionError(
            "post-selected power below 1e-30 of input; pointer readout undefined"
        )


def centroid_exact(pre, post, coupling, beam):
    """Exact post-selected beam centroid in meters.

    Closed form for the symmetric analyzer with a pure phase; any other
    setting is routed through the quadrature oracle.
    """
    if pre.delta_beta == 0.0 and post.angle == math.pi / 4:
        _warn_coupling_regime(coupling, beam)
        return float(closed_centroid(pre.delta_phi, 0.0, coupling.k, beam.w))
    return quadrature_oracle(pre, post, coupling, beam).centroid


def centroid_approx(delta_phi, coupling):
    """First-order centroid -delta_phi / k of the weak-value regime."""
    _check_finite(delta_phi=delta_phi)
    if coupling.k == 0.0:
        raise InvalidParameterError("centroid_approx requires a nonzero kick k")
    if abs(delta_phi) > 0.1:
        warnings.warn(
            "small-phase approximation degrades for |delta_phi| > 0.1 rad",
            RegimeWarning,
            stacklevel=2,
        )
    return -delta_phi / coupling.k


def icr_exact(pre, post, coupling, beam):
    """Exact intensity-contrast ratio (left minus right over total).

    The closed form carries the imaginary error function of sqrt(2) k w;
    routing matches centroid_exact.
    """
    if pre.delta_beta == 0.0 and post.angle == math.pi / 4:
        _warn_coupling_regime(coupling, beam)
        kw = coupling.k * beam.w
        den = 1.0 - math.exp(-2.0 * kw * kw) * math.cos(pre.delta_phi)
        if den < 2.0 * ORTHOGONAL_POWER_FLOOR:
            raise OrthogonalPostselectionError(
                "post-selected power below 1e-30 of input; contrast undefined"
            )
        num = math.exp(-2.0 * kw * kw) * erfi(math.sqrt(2.0) * kw)
        return num * math.sin(pre.delta_phi) / den
    return quadrature_oracle(pre, post, coupling, beam).eta


def icr_approx(delta_phi, coupling, beam):
    """First-order contrast sqrt(2/pi) * delta_phi / (k w)."""
    _check_finite(delta_phi=delta_phi)
    if coupling.k == 0.0 or beam.w == 0.0:
        raise InvalidParameterError("icr_approx requires nonzero k and w")
    kw = coupling.k * beam.w
    if abs(delta_phi) > 0.1 or abs(kw) > 0.15:
        warnings.warn(
            "contrast linearization degrades outside |delta_phi| <= 0.1, |k w| <= 0.15",
            RegimeWarning,
            stacklevel=2,
        )
    return math.sqrt(2.0 / math.pi) * delta_phi / kw


def _warn_coupling_regime(coupling, beam):
    if (coupling.k * beam.w) ** 2 > 0.5:
        warnings.warn(
            "k^2 w^2 is not small; pointer leaves the weak-coupling regime",
            RegimeWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# quadrature oracle


def quadrature_oracle(pre, post, coupling, beam):
    """Direct numerical readout of the post-selected meter state.

    Integrates |Phi(x)|^2 adaptively (relative tolerance 1e-13 per
    sign-definite piece) for the total power, the left/right partition and
    the first moment.  Handles arbitrary delta_beta and analyzer angle;
    this is the ground truth the closed forms are validated against.
    """
    ch, sv = _arm_amplitudes(pre, post)
    cross_c = ch * sv.conjugate()
    cross = abs(cross_c)
    dphi = cmath.phase(cross_c)
    wk = coupling.k * beam.w
    # |ch|^2 + |sv|^2 - 2 cross cos(theta) rewritten as a sum of two
    # nonnegative pieces so deep destructive interference is computed
    # without cancellation
    imbalance_sq = (abs(ch) - abs(sv)) ** 2

    def interference(theta):
        return imbalance_sq + 4.0 * cross * math.sin(0.5 * theta) ** 2

    def intensity(u):
        # standard-normal envelope times the two-arm interference factor
        return (
            math.exp(-0.5 * u * u)
            / _SQRT2PI
            * interference(dphi - 2.0 * wk * u)
        )

    if coupling.k == 0.0:
        # interference factor is constant: profile symmetric by construction
        p_post = interference(dphi)
        if p_post < ORTHOGONAL_POWER_FLOOR:
            raise OrthogonalPostselectionError(
                "post-selected power below 1e-30 of input"
            )
        centroid = 0.0
        eta = 0.0
    else:
        left = _quad(intensity, -np.inf, 0.0)
        right = _quad(intensity, 0.0, np.inf)
        p_post = left + right
        if p_post < ORTHOGONAL_POWER_FLOOR:
            raise OrthogonalPostselectionError(
                "post-selected power below 1e-30 of input"
            )
        moment = _quad(lambda u: u * intensity(u), -np.inf, 0.0) + _quad(
            lambda u: u * intensity(u), 0.0, np.inf
        )
        centroid = beam.w * moment / p_post
        eta = (left - right) / p_post
        eta = min(1.0, max(-1.0, eta))

    profile = np.abs(final_wavefunction(pre, post, coupling, beam)) ** 2
    return PointerReadout(centroid=centroid, eta=eta, p_post=p_post, profile=profile)


def _quad(fn, a, b):
    value, abserr, info, *tail = integrate.quad(
        fn, a, b, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=_QUAD_LIMIT, full_output=True
    )
    if tail:
        raise AccuracyError(f"pointer quadrature did not converge: {tail[0]}")
    return value


# ---------------------------------------------------------------------------
# auxiliary interferometer readouts


def mzi_intensity(a, delta_phi):
    """Reference Mach-Zehnder output intensity a * cos(delta_phi)."""
    _check_finite(a=a, delta_phi=delta_phi)
    if not 0.0 <= a <= 1.0:
        raise InvalidParameterError(f"contrast amplitude must be in [0, 1], got {a!r}")
    return a * math.cos(delta_phi)


def feedback_weak_value(phi_f):
    """Weak value -i cot(phi_f) of the which-path stabilization port."""
    _check_finite(phi_f=phi_f)
    s = math.sin(phi_f)
    if abs(s) < 1e-15:
        raise OrthogonalPostselectionError(
            "which-path pre/post selection orthogonal at phi_f = n*pi"
        )
    return -1j * math.cos(phi_f) / s


def feedback_centroid(phi_f, coupling, beam):
    """Pointer displacement 2 k w^2 |A_w| of the stabilization port."""
    a_w = feedback_weak_value(phi_f)
    return 2.0 * coupling.k * beam.w**2 * abs(a_w)
