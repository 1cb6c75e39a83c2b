"""Detection and characterisation of oscillating peak sequences in spectra.

A spectrum with a breakpoint-bearing source shows quasi-periodic peaks
whose envelope decays as a power of k.  This module finds those peaks,
measures the spacing and the envelope exponent, and turns the result
into a yes/no oscillation verdict.

Detection runs on log10 of the magnitude: spectra here span many decades
and sit arbitrarily close to zero between peaks, so no fixed linear
prominence threshold can see both the first peak and the tenth.  The log
scale makes "peak" mean the same thing across the whole range.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .transforms import PowerSpectrum

__all__ = [
    "PeakReport",
    "InsufficientPeaksError",
    "find_peaks",
    "quasi_period",
    "envelope_decay_exponent",
    "oscillation_score",
    "analyze_spectrum",
]

SMOOTHING_WINDOW = 5
PROMINENCE_FRAC = 0.01
# Peaks below this fraction of the spectrum maximum are floor noise.
MAGNITUDE_FLOOR = 1e-15
# Verdict: at least MIN_PEAKS peaks whose spacings are regular enough.
MIN_PEAKS = 3
REGULARITY_MIN = 0.5
# Envelope fits use only peaks beyond this multiple of the first peak
# location, past the non-asymptotic head of the spectrum.
ASYMPTOTIC_FACTOR = 3.0


class InsufficientPeaksError(ValueError):
    """Raised when an analysis step needs more peaks than were found."""


@dataclass(frozen=True)
class PeakReport:
    """Everything measured about one spectrum's peak structure.

    ``quasi_period``/``envelope_exponent`` and their uncertainties are
    NaN when too few peaks qualify; ``detected`` is the final verdict.
    """

    locations: np.ndarray
    heights: np.ndarray
    quasi_period: float
    quasi_period_std: float
    envelope_exponent: float
    envelope_stderr: float
    score: float
    detected: bool

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        h = np.asarray(self.heights, dtype=float)
        if loc.shape != h.shape:
            raise ValueError("locations and heights must match in length")
        if loc.size and np.any(np.diff(loc) <= 0):
            raise ValueError("peak locations must be strictly increasing")
        if np.any(h <= 0):
            raise ValueError("peak heights must be positive")
        if not math.isnan(self.quasi_period_std) and self.quasi_period_std < 0:
            raise ValueError("spacing dispersion cannot be negative")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "heights", h)

    @property
    def n_peaks(self):
        return int(self.locations.size)


def _moving_average(y, window):
    if window < 1 or window % 2 == 0:
        raise ValueError("smoothing window must be a positive odd integer")
    if window == 1:
        return y.copy()
    half = window // 2
    padded = np.concatenate([y[half:0:-1], y, y[-2 : -half - 2 : -1]])
    kernel = np.full(window, 1.0 / window)
    return np.convolve(padded, kernel, mode="valid")


def _log_magnitude(values):
    mag = np.abs(np.asarray(values, dtype=float))
    top = mag.max()
    if top <= 0:
        return np.full_like(mag, -15.0), 0.0
    return np.log10(np.maximum(mag, MAGNITUDE_FLOOR * top)), top


def find_peaks(spec, smoothing_window=SMOOTHING_WINDOW, prominence_frac=PROMINENCE_FRAC):
    """Locate qualified local maxima of a spectrum.

    Parameters
    ----------
    spec : PowerSpectrum
        Needs at least 16 grid points.
    smoothing_window : odd int
        Moving-average width applied before extremum search; reflective
        padding keeps the ends unbiased.
    prominence_frac : float
        Minimum prominence as a fraction of the smoothed dynamic range.

    Returns
    -------
    (locations, heights) : pair of arrays
        Peak positions on the spectrum grid, and the unsmoothed spectrum
        magnitudes there.  Each smoothed peak is re-anchored to the
        nearest raw local maximum so smoothing cannot shift locations.
    """
    if not isinstance(spec, PowerSpectrum):
        raise TypeError("expected a PowerSpectrum")
    if spec.grid.size < 16:
        raise ValueError("spectrum too short for peak analysis (< 16 points)")

    work, top = _log_magnitude(spec.values)
    smooth = _moving_average(work, smoothing_window)
    span = smooth.max() - smooth.min()
    if span <= 0:  # constant spectrum
        return np.array([]), np.array([])
    idx, _ = _scipy_find_peaks(smooth, prominence=prominence_frac * span)

    # Snap back to the raw grid: the smoothed maximum can sit a sample or
    # two off the true one.
    half = max(1, smoothing_window // 2)
    refined = []
    for i in idx:
        lo = max(1, i - half)
        hi = min(work.size - 1, i + half + 1)
        refined.append(lo + int(np.argmax(work[lo:hi])))
    refined = sorted(set(refined))

    locations = spec.grid[refined]
    heights = np.abs(spec.values[refined])
    keep = heights > MAGNITUDE_FLOOR * top
    return locations[keep], heights[keep]


def quasi_period(locations):
    """Mean and standard deviation of consecutive peak spacings.

    Raises InsufficientPeaksError below three peaks, where "spacing
    dispersion" stops meaning anything.
    """
    locations = np.asarray(locations, dtype=float)
    if locations.size < MIN_PEAKS:
        raise InsufficientPeaksError(
            f"need at least {MIN_PEAKS} peaks, got {locations.size}"
        )
    gaps = np.diff(locations)
    return float(gaps.mean()), float(gaps.std())


def envelope_decay_exponent(locations, heights, k_min=None):
    """Power-law exponent of the peak-height envelope.

    Least-squares slope of log(height) against log(location) over the
    asymptotic window, which by default starts at ASYMPTOTIC_FACTOR times
    the first peak location.  Returns (slope, standard error).
    """
    locations = np.asarray(locations, dtype=float)
    heights = np.asarray(heights, dtype=float)
    if locations.size == 0:
        raise InsufficientPeaksError("no peaks to fit")
    if k_min is None:
        k_min = ASYMPTOTIC_FACTOR * locations[0]
    sel = locations >= k_min
    if sel.sum() < 4:
        raise InsufficientPeaksError(
            f"need at least 4 peaks beyond k = {k_min:.4g}, got {int(sel.sum())}"
        )
    x = np.log(locations[sel])
    y = np.log(heights[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = x.size - 2
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = math.sqrt(resid @ resid / dof / sxx) if dof > 0 else float("nan")
    return float(slope), float(stderr)


def oscillation_score(spec, smoothing_window=SMOOTHING_WINDOW, prominence_frac=PROMINENCE_FRAC):
    """Boolean oscillation verdict plus its supporting score.

    score = n_peaks * regularity with regularity = 1 - sigma/mean of the
    spacings (floored at zero); detected requires >= 3 peaks and
    regularity >= 0.5, i.e. several peaks with broadly even spacing.
    """
    locations, _ = find_peaks(spec, smoothing_window, prominence_frac)
    n = locations.size
    if n < 2:
        return False, 0.0
    gaps = np.diff(locations)
    regularity = max(0.0, 1.0 - gaps.std() / gaps.mean()) if gaps.mean() > 0 else 0.0
    score = n * regularity
    detected = n >= MIN_PEAKS and regularity >= REGULARITY_MIN
    return detected, float(score)


def analyze_spectrum(spec, smoothing_window=SMOOTHING_WINDOW, prominence_frac=PROMINENCE_FRAC):
    """Full PeakReport for a spectrum; NaN fields where peaks run out."""
    locations, heights = find_peaks(spec, smoothing_window, prominence_frac)
    nan = float("nan")
    qp = qp_std = env = env_err = nan
    if locations.size >= MIN_PEAKS:
        qp, qp_std = quasi_period(locations)
    try:
        env, env_err = envelope_decay_exponent(locations, heights)
    except InsufficientPeaksError:
        pass
    detected, score = oscillation_score(spec, smoothing_window, prominence_frac)
    return PeakReport(
        locations=locations,
        heights=heights,
        quasi_period=qp,
        quasi_period_std=qp_std,
        envelope_exponent=env,
        envelope_stderr=env_err,
        score=score,
        detected=detected,
    )
