"""Transforms between angular correlation functions and their spectra.

The full-sky pair is the Legendre transform

    C_ell = 2 pi Integral_0^pi C(theta) P_ell(cos theta) sin theta dtheta
    C(theta) = (1/4pi) Sum_ell (2 ell + 1) C_ell P_ell(cos theta)

and the small-angle (flat) limit replaces P_ell(cos theta) by J_0(k theta)
with k = ell + 1/2.  Everything is evaluated on fixed-order Gauss-Legendre
nodes; integrands with kinks are handled by splitting the quadrature into
panels at the model breakpoints, never by adaptive subdivision, so repeated
runs are bit-identical.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import j0, j1, roots_legendre

__all__ = [
    "TabulatedCorrelation",
    "PowerSpectrum",
    "Profile1D",
    "ExtrapolationError",
    "gauss_nodes",
    "panel_nodes",
    "legendre_coefficients",
    "correlation_from_spectrum",
    "small_angle_spectrum",
    "ft_1d",
    "spherical_box_ft",
    "box_profile",
    "triangle_profile",
    "quadratic_spline_profile",
]

# Fixed quadrature order per panel.  4096 nodes resolve P_ell up to
# ell ~ 2000 with several digits to spare; raise for larger ell_max.
DEFAULT_NODES = 4096

# Tabulated input whose grid coincides with the quadrature nodes to this
# tolerance is used directly, with no interpolation step at all.
NODE_MATCH_ATOL = 1e-12


class ExtrapolationError(ValueError):
    """Raised when a tabulated function is needed outside its grid."""


def _as_float_array(x, name, allow_nan=False):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    finite = np.isfinite(arr) | (np.isnan(arr) if allow_nan else False)
    if not np.all(finite):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class TabulatedCorrelation:
    """An angular correlation function sampled on a theta grid.

    Parameters
    ----------
    theta : array
        Sample angles in radians, strictly increasing, inside [0, pi].
    values : array
        C(theta) at the sample angles.  NaN marks a missing estimate
        (an empty estimator bin); transforms refuse tables with gaps.
    sigma : array, optional
        One-sigma uncertainty per sample, if known.
    """

    theta: np.ndarray
    values: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        theta = _as_float_array(self.theta, "theta")
        values = _as_float_array(self.values, "values", allow_nan=True)
        if theta.shape != values.shape:
            raise ValueError("theta and values must have equal length")
        if theta.size < 2:
            raise ValueError("need at least two samples")
        if np.any(np.diff(theta) <= 0):
            raise ValueError("theta must be strictly increasing")
        if theta[0] < 0 or theta[-1] > math.pi + 1e-12:
            raise ValueError("theta must lie in [0, pi]")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "values", values)
        if self.sigma is not None:
            sigma = _as_float_array(self.sigma, "sigma", allow_nan=True)
            if sigma.shape != theta.shape:
                raise ValueError("sigma must match theta in length")
            if np.any(sigma < 0):
                raise ValueError("sigma must be nonnegative")
            object.__setattr__(self, "sigma", sigma)

    def __call__(self, theta):
        """Cubic-spline evaluation; raises ExtrapolationError off the grid."""
        theta = np.asarray(theta, dtype=float)
        if np.any(theta < self.theta[0] - NODE_MATCH_ATOL) or np.any(
            theta > self.theta[-1] + NODE_MATCH_ATOL
        ):
            raise ExtrapolationError(
                "requested angle outside tabulated range "
                f"[{self.theta[0]:.6g}, {self.theta[-1]:.6g}] rad"
            )
        spl = CubicSpline(self.theta, self.values)
        return spl(np.clip(theta, self.theta[0], self.theta[-1]))


@dataclass(frozen=True)
class PowerSpectrum:
    """Transform-side coefficients on a multipole or wavenumber grid.

    ``grid`` is either integer multipoles ell = 0..ell_max (Legendre side)
    or a positive wavenumber grid (small-angle side).  Values may dip
    slightly negative; transforms of valid correlation functions do so at
    the quadrature-noise level and genuinely oscillating ones near their
    zero crossings, so negativity is not rejected here.  Use
    :meth:`clamped` when a nonnegative version is wanted for display.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = _as_float_array(self.grid, "grid")
        values = _as_float_array(self.values, "values")
        if grid.shape != values.shape:
            raise ValueError("grid and values must have equal length")
        if grid.size < 2:
            raise ValueError("need at least two coefficients")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if grid[0] < 0:
            raise ValueError("grid must be nonnegative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def is_multipole(self):
        """True when the grid is the contiguous integers 0..ell_max."""
        expect = np.arange(self.grid.size, dtype=float)
        return bool(np.array_equal(self.grid, expect))

    def clamped(self, floor=0.0):
        """Values clipped from below, for plotting on log axes only."""
        return np.maximum(self.values, floor)


@dataclass(frozen=True)
class Profile1D:
    """Even one-dimensional profile f(x) of compact support [0, x_max].

    ``fn`` must accept a vector of nonnegative x and is taken to vanish
    beyond ``x_max``.  ``breakpoints`` lists interior kink locations so
    quadrature panels can end there; ``smoothness`` records how many
    derivatives exist at the support edge (0 = jump, 1 = kink, ...).
    """

    fn: callable
    x_max: float
    breakpoints: tuple = ()
    smoothness: int = 0
    name: str = "profile"

    def __post_init__(self):
        if not self.x_max > 0:
            raise ValueError("x_max must be positive")
        bad = [b for b in self.breakpoints if not 0 < b < self.x_max]
        if bad:
            raise ValueError(f"breakpoints must lie inside (0, x_max): {bad}")

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        inside = np.abs(x) <= self.x_max
        if np.any(inside):
            out[inside] = self.fn(np.abs(x[inside]))
        return out[0] if scalar else out


def gauss_nodes(n):
    """Gauss-Legendre nodes and weights on [-1, 1], cached by order."""
    try:
        return _NODE_CACHE[n]
    except KeyError:
        x, w = roots_legendre(n)
        _NODE_CACHE[n] = (x, w)
        return x, w


_NODE_CACHE = {}


def panel_nodes(breakpoints, n_nodes, lo=0.0, hi=math.pi):
    """Quadrature nodes and weights on [lo, hi], split at breakpoints.

    Each panel between consecutive cut points carries the full n_nodes
    Gauss-Legendre rule, so integrands that are smooth between cuts are
    resolved to near machine precision.
    """
    cuts = sorted({lo, hi, *(float(b) for b in breakpoints if lo < b < hi)})
    x, w = gauss_nodes(n_nodes)
    thetas = []
    weights = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (b - a)
        thetas.append(0.5 * (a + b) + half * x)
        weights.append(half * w)
    return np.concatenate(thetas), np.concatenate(weights)


def _model_breakpoints(corr):
    bp = getattr(corr, "breakpoints", None)
    if bp is None:
        return ()
    return tuple(bp() if callable(bp) else bp)


def _sample_correlation(corr, theta):
    """Evaluate a model, callable, or tabulated correlation on quadrature nodes."""
    if isinstance(corr, TabulatedCorrelation):
        if np.any(np.isnan(corr.values)):
            raise ValueError(
                "correlation table has missing values; fill or drop them "
                "before transforming"
            )
        # When the table was produced on this exact node set, skip the
        # spline: the round trip is then limited only by quadrature.
        if corr.theta.size == theta.size and np.allclose(
            corr.theta, theta, rtol=0.0, atol=NODE_MATCH_ATOL
        ):
            return corr.values
        if corr.theta[0] > theta.min() + NODE_MATCH_ATOL or corr.theta[-1] < theta.max() - NODE_MATCH_ATOL:
            raise ExtrapolationError(
                "tabulated correlation does not cover the integration range; "
                f"grid ends at {np.degrees(corr.theta[-1]):.4g} deg"
            )
        return CubicSpline(corr.theta, corr.values)(theta)
    return np.asarray(corr(theta), dtype=float)


def legendre_coefficients(corr, ell_max=2000, breakpoints=None, n_nodes=DEFAULT_NODES):
    """Legendre coefficients of an angular correlation function.

    Parameters
    ----------
    corr : callable, model, or TabulatedCorrelation
        The correlation C(theta), theta in radians on [0, pi].  Models
        supply their own kink locations through ``breakpoints()``.
    ell_max : int
        Highest multipole returned.
    breakpoints : sequence, optional
        Extra quadrature cut points in (0, pi); overrides the model's own.
    n_nodes : int
        Gauss-Legendre order per panel.

    Returns
    -------
    PowerSpectrum on the integer grid 0..ell_max.

    Notes
    -----
    P_ell(cos theta) is generated by the upward three-term recurrence and
    contracted with the weighted samples panel by panel, so memory stays
    O(n_nodes) rather than O(n_nodes * ell_max).
    """
    ell_max = int(ell_max)
    if ell_max < 0:
        raise ValueError("ell_max must be nonnegative")
    if breakpoints is None:
        breakpoints = _model_breakpoints(corr)
    theta, w = panel_nodes(breakpoints, n_nodes)
    f = _sample_correlation(corr, theta)
    if f.shape != theta.shape:
        raise ValueError("correlation evaluation returned a wrong shape")

    x = np.cos(theta)
    base = 2.0 * math.pi * w * np.sin(theta) * f
    out = np.empty(ell_max + 1)

    p_prev = np.ones_like(x)  # P_0
    out[0] = base.sum()
    if ell_max >= 1:
        p = x.copy()  # P_1
        out[1] = base @ p
        for ell in range(1, ell_max):
            # (ell+1) P_{ell+1} = (2 ell + 1) x P_ell - ell P_{ell-1}
            p_next = ((2 * ell + 1) * x * p - ell * p_prev) / (ell + 1)
            out[ell + 1] = base @ p_next
            p_prev, p = p, p_next

    return PowerSpectrum(np.arange(ell_max + 1, dtype=float), out)


def correlation_from_spectrum(spectrum, theta):
    """Resum a multipole spectrum into C(theta) on the given angles.

    The spectrum must sit on the contiguous integer grid 0..ell_max; a
    wavenumber-side spectrum has no exact resummation and is rejected.
    """
    if not isinstance(spectrum, PowerSpectrum):
        raise TypeError("expected a PowerSpectrum")
    if not spectrum.is_multipole:
        raise ValueError("resummation needs coefficients on ell = 0..ell_max")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(theta < 0) or np.any(theta > math.pi + 1e-12):
        raise ValueError("theta must lie in [0, pi]")

    x = np.cos(theta)
    coeff = spectrum.values * (2.0 * spectrum.grid + 1.0) / (4.0 * math.pi)
    acc = np.full_like(x, coeff[0])
    if coeff.size > 1:
        p_prev = np.ones_like(x)
        p = x.copy()
        acc = acc + coeff[1] * p
        for ell in range(1, coeff.size - 1):
            p_next = ((2 * ell + 1) * x * p - ell * p_prev) / (ell + 1)
            acc = acc + coeff[ell + 1] * p_next
            p_prev, p = p, p_next
    order = np.argsort(theta)
    if np.any(np.diff(theta[order]) <= 0):
        raise ValueError("theta grid must not contain duplicates")
    return TabulatedCorrelation(theta[order], acc[order])


# Fraction of the correlation's peak magnitude allowed beyond the
# small-angle regime before the flat-sky transform is flagged.
SMALL_ANGLE_LIMIT = math.radians(10.0)
SMALL_ANGLE_TAIL_FRAC = 1e-3


def small_angle_spectrum(corr, k_grid, breakpoints=None, n_nodes=DEFAULT_NODES):
    """Flat-sky spectrum P(k) = 2 pi Integral C(theta) J_0(k theta) sin theta dtheta.

    Valid when C(theta) has support at small angles; k corresponds to
    ell + 1/2 on the full sky.  A warning is issued when a noticeable
    fraction of C lives beyond 10 degrees, where the approximation and
    the Legendre transform part ways.
    """
    k_grid = _as_float_array(k_grid, "k_grid")
    if np.any(np.diff(k_grid) <= 0) or k_grid[0] < 0:
        raise ValueError("k_grid must be nonnegative and strictly increasing")
    if breakpoints is None:
        breakpoints = _model_breakpoints(corr)
    theta, w = panel_nodes(breakpoints, n_nodes)
    f = _sample_correlation(corr, theta)

    tail = theta > SMALL_ANGLE_LIMIT
    peak = np.max(np.abs(f))
    if peak > 0 and np.max(np.abs(f[tail]), initial=0.0) > SMALL_ANGLE_TAIL_FRAC * peak:
        warnings.warn(
            "correlation has weight beyond 10 deg; small-angle spectrum "
            "is unreliable there",
            stacklevel=2,
        )

    base = 2.0 * math.pi * w * np.sin(theta) * f
    out = np.empty_like(k_grid)
    # Chunk the Bessel evaluation; a full (n_k, n_theta) table of J_0 would
    # dwarf every other allocation in this module.
    step = 256
    for i in range(0, k_grid.size, step):
        kk = k_grid[i : i + step, None]
        out[i : i + step] = j0(kk * theta[None, :]) @ base
    return PowerSpectrum(k_grid, out)


def ft_1d(profile, k_grid, n_nodes=2048):
    """Fourier transform of an even compact profile: 2 Integral_0^xmax f cos(kx) dx.

    Quadrature panels end at the profile's interior breakpoints and at the
    support edge, so piecewise-polynomial profiles are integrated exactly
    up to the oscillation of cos(kx) itself.
    """
    if not isinstance(profile, Profile1D):
        raise TypeError("expected a Profile1D")
    k_grid = _as_float_array(k_grid, "k_grid")
    x, w = panel_nodes(profile.breakpoints, n_nodes, lo=0.0, hi=profile.x_max)
    fx = w * profile.fn(x)
    out = np.empty_like(k_grid)
    step = 256
    for i in range(0, k_grid.size, step):
        kk = k_grid[i : i + step, None]
        out[i : i + step] = 2.0 * (np.cos(kk * x[None, :]) @ fx)
    return out


def spherical_box_ft(k, radius, dim):
    """Normalised Fourier transform of a uniform ball in dim = 1, 2, or 3.

    Returns ft(k) with ft(0) = 1:

        dim 1:  sin(t)/t
        dim 2:  2 J_1(t)/t
        dim 3:  3 (sin t - t cos t)/t^3,   t = k * radius

    The dim = 3 form switches to its Taylor series below t = 1e-3, where
    the closed form loses digits to cancellation.
    """
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2, or 3")
    if not radius > 0:
        raise ValueError("radius must be positive")
    scalar = np.ndim(k) == 0
    t = np.atleast_1d(np.asarray(k, dtype=float)) * radius
    if np.any(t < 0):
        raise ValueError("k must be nonnegative")
    if dim == 1:
        out = np.sinc(t / math.pi)
    elif dim == 2:
        out = np.ones_like(t)
        nz = t > 0
        out[nz] = 2.0 * j1(t[nz]) / t[nz]
    else:
        out = np.empty_like(t)
        small = t < 1e-3
        ts = t[small]
        out[small] = 1.0 - ts**2 / 10.0 + ts**4 / 280.0
        tb = t[~small]
        out[~small] = 3.0 * (np.sin(tb) - tb * np.cos(tb)) / tb**3
    return out[0] if scalar else out


def box_profile(x_max, height=1.0):
    """Top-hat profile: f = height on [0, x_max], zero outside (edge jump)."""
    h = float(height)
    return Profile1D(lambda x: np.full_like(x, h), float(x_max), (), 0, "box")


def triangle_profile(x_max, height=1.0):
    """Linear ramp f = height (1 - x/x_max); continuous, kinked at the edge."""
    xm, h = float(x_max), float(height)
    return Profile1D(lambda x: h * (1.0 - x / xm), xm, (), 1, "triangle")


def quadratic_spline_profile(x_max, height=1.0):
    """Quadratic B-spline bump scaled so its support ends at x_max.

    Twice continuously differentiable everywhere except for jumps in the
    second derivative at the two knots; the transform therefore decays one
    power faster than the triangle's.
    """
    xm, h = float(x_max), float(height)
    s = 2.0 * xm / 3.0  # knot spacing: support is 1.5 s

    def bump(x):
        t = x / s
        out = np.zeros_like(t)
        core = t <= 0.5
        out[core] = 0.75 - t[core] ** 2
        wing = (t > 0.5) & (t <= 1.5)
        out[wing] = 0.5 * (1.5 - t[wing]) ** 2
        return h * out / 0.75  # peak normalised to height

    return Profile1D(bump, xm, (xm / 3.0,), 2, "quadratic-spline")
