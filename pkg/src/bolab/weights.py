"""Weighted norms, truncated weights, tail fits, and boundary guards.

Spatial weights on the periodic cell use the centered coordinate (the cell
is already [-L/2, L/2)) and are only meaningful for fields that pass the
boundary guard; weighted quadrature is restricted to the trusted window
|x| <= L/4 where periodization effects stay below the measurement floor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import Field, forward, _boundary_ratio

__all__ = [
    "WeightSpec",
    "NormReport",
    "TailFit",
    "truncated_weight",
    "windowed_coordinate",
    "z_norm",
    "weighted_l2_truncated",
    "tail_amplitude",
    "boundary_contamination",
]

TRUSTED_FRACTION = 0.25  # half-width of the trusted window, as a fraction of L
WEIGHT_RELIABLE_RATIO = 1e-6  # boundary ratio beyond which weighted norms are flagged


def _hermite_quintic(v0, d0, c0, v1, d1, c1, h):
    """Coefficients of p(s) on s in [0,1] with p(0)=v0, p'(0)=d0*h,
    p''(0)=c0*h^2 and the mirrored conditions at s=1 (h is the physical
    width, so d, c are physical slope and curvature)."""
    a0 = v0
    a1 = d0 * h
    a2 = 0.5 * c0 * h * h
    # remaining three coefficients from the right-end conditions
    b = np.array([
        v1 - (a0 + a1 + a2),
        d1 * h - (a1 + 2 * a2),
        c1 * h * h - 2 * a2,
    ])
    mat = np.array([[1.0, 1.0, 1.0],
                    [3.0, 4.0, 5.0],
                    [6.0, 12.0, 20.0]])
    a3, a4, a5 = np.linalg.solve(mat, b)
    return np.array([a0, a1, a2, a3, a4, a5])


def _eval_poly(coeffs, s):
    out = np.zeros_like(s)
    for c in coeffs[::-1]:
        out = out * s + c
    return out


def _eval_poly_deriv(coeffs, s):
    out = np.zeros_like(s)
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))
    for c in dcoeffs[::-1]:
        out = out * s + c
    return out


@dataclass(frozen=True)
class WeightSpec:
    """Bounded smooth surrogate for <x> = sqrt(1+x^2).

    Equals <x> for |x| <= cap, the constant 2*cap for |x| >= 3*cap, and a
    C^2 monotone quintic Hermite blend in between.  Construction verifies
    0 <= w' <= 1 and x*w' <= 3*w on a dense sample and records the
    measured extremes.
    """

    cap: float
    blend: np.ndarray = field(init=False, repr=False)
    max_slope: float = field(init=False)
    max_slope_ratio: float = field(init=False)

    def __post_init__(self):
        N = float(self.cap)
        if not N >= 2.0:
            # below cap ~1.3 the C^2 quintic develops a non-monotone dip
            raise ValueError(f"cap must be >= 2, got {self.cap}")
        root = np.hypot(1.0, N)
        coeffs = _hermite_quintic(
            v0=root, d0=N / root, c0=root ** -3,
            v1=2.0 * N, d1=0.0, c1=0.0, h=2.0 * N)
        object.__setattr__(self, "blend", coeffs)

        s = np.linspace(0.0, 1.0, 4001)
        slope_blend = _eval_poly_deriv(coeffs, s) / (2.0 * N)
        xs = np.linspace(0.0, 4.0 * N, 4001)
        w = truncated_weight_raw(self, xs)
        wp = self._slope(xs)
        max_slope = max(float(np.max(slope_blend)), float(np.max(wp)))
        min_slope = min(float(np.min(slope_blend)), float(np.min(wp)))
        ratio = float(np.max(xs * wp / w))
        if min_slope < -1e-10 or max_slope > 1.0 + 1e-10:
            raise ValueError(
                f"blend violates the slope cap for cap={N}: "
                f"slope range [{min_slope:.3e}, {max_slope:.3e}]")
        if ratio > 3.0 + 1e-10:
            raise ValueError(f"x*w' <= 3*w violated for cap={N}: ratio {ratio:.6f}")
        # continuity of w and w' at the junctions (branch values compared
        # at the junction itself)
        one = np.ones(1)
        checks = [
            (root, _eval_poly(coeffs, 0.0 * one)[0]),
            (2.0 * N, _eval_poly(coeffs, one)[0]),
            (N / root, _eval_poly_deriv(coeffs, 0.0 * one)[0] / (2.0 * N)),
            (0.0, _eval_poly_deriv(coeffs, one)[0] / (2.0 * N)),
        ]
        for want, got in checks:
            if abs(want - got) > 1e-10 * max(1.0, N):
                raise ValueError(
                    f"blend junction mismatch for cap={N}: {got!r} != {want!r}")
        object.__setattr__(self, "max_slope", max_slope)
        object.__setattr__(self, "max_slope_ratio", ratio)

    def _slope(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.zeros_like(ax)
        inner = ax <= self.cap
        out[inner] = ax[inner] / np.hypot(1.0, ax[inner])
        mid = (ax > self.cap) & (ax < 3.0 * self.cap)
        s = (ax[mid] - self.cap) / (2.0 * self.cap)
        out[mid] = _eval_poly_deriv(self.blend, s) / (2.0 * self.cap)
        return out


def truncated_weight_raw(spec: WeightSpec, x):
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.full_like(ax, 2.0 * spec.cap)
    inner = ax <= spec.cap
    out[inner] = np.hypot(1.0, ax[inner])
    mid = (ax > spec.cap) & (ax < 3.0 * spec.cap)
    s = (ax[mid] - spec.cap) / (2.0 * spec.cap)
    out[mid] = _eval_poly(spec.blend, s)
    return out


def truncated_weight(spec: WeightSpec, x):
    """Evaluate the truncated weight at x (scalar or array)."""
    arr = truncated_weight_raw(spec, np.atleast_1d(x))
    return float(arr[0]) if np.isscalar(x) else arr


def windowed_coordinate(x, cap: float) -> np.ndarray:
    """Odd coordinate surrogate: equals x for |x| <= cap, saturates
    smoothly to sign(x)*2*cap by |x| = 3*cap (quintic blend, zero slope
    and curvature at the outer end)."""
    N = float(cap)
    if not N > 0:
        raise ValueError("cap must be positive")
    coeffs = _hermite_quintic(v0=N, d0=1.0, c0=0.0,
                              v1=2.0 * N, d1=0.0, c1=0.0, h=2.0 * N)
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.full_like(ax, 2.0 * N)
    inner = ax <= N
    out[inner] = ax[inner]
    mid = (ax > N) & (ax < 3.0 * N)
    s = (ax[mid] - N) / (2.0 * N)
    out[mid] = _eval_poly(coeffs, s)
    return np.sign(np.asarray(x, dtype=float)) * out


@dataclass(frozen=True)
class NormReport:
    """Smoothness-plus-decay norm split: z^2 = hs^2 + weight^2."""

    s: float
    r: float
    hs_norm: float
    weight_norm: float
    z_norm: float
    trusted_window: float
    weighted_reliable: bool


def boundary_contamination(u: Field) -> float:
    """Ratio max|u| over the outer 5% of the cell to max|u| overall."""
    return _boundary_ratio(u.values)


def _window_mask(grid, half_width):
    return np.abs(grid.x) <= half_width


def z_norm(u: Field, s: float, r: float) -> NormReport:
    """Report the H^s part (spectral), the |x|^r-weighted part (trusted
    window quadrature), and their root-sum-square."""
    if not 0.0 <= s <= 8.0:
        raise ValueError(f"s must lie in [0, 8], got {s}")
    if r < 0:
        raise ValueError(f"r must be non-negative, got {r}")
    grid = u.grid
    spec = forward(u)
    hs2 = (grid.dxi / (2.0 * np.pi)) * float(
        np.sum((1.0 + grid.xi ** 2) ** s * np.abs(spec.coeffs) ** 2))
    window = TRUSTED_FRACTION * grid.length
    mask = _window_mask(grid, window)
    w2 = grid.dx * float(np.sum(np.abs(grid.x[mask]) ** (2.0 * r) * u.values[mask] ** 2))
    reliable = boundary_contamination(u) <= WEIGHT_RELIABLE_RATIO
    hs = np.sqrt(hs2)
    wn = np.sqrt(w2)
    return NormReport(s=s, r=r, hs_norm=hs, weight_norm=wn,
                      z_norm=float(np.hypot(hs, wn)),
                      trusted_window=window, weighted_reliable=reliable)


def weighted_l2_truncated(u: Field, spec: WeightSpec, power: int) -> float:
    """Quadrature of (w_N^power * u)^2 over the full cell; finite by
    construction because the weight is bounded."""
    if power not in (1, 2, 3):
        raise ValueError(f"power must be 1, 2 or 3, got {power}")
    w = truncated_weight_raw(spec, u.grid.x)
    return float(np.sqrt(u.grid.dx * np.sum((w ** power * u.values) ** 2)))


@dataclass(frozen=True)
class TailFit:
    """Power-law tail fit |u(x)| ~ amplitude * (|x| / x_ref)^(-exponent),
    anchored at the geometric center x_ref of the window so steep decays
    report a vanishing amplitude instead of a wild extrapolation to x=1."""

    amplitude: float
    exponent: float
    residual: float
    x_ref: float
    reliable: bool

    def at_one(self) -> float:
        """Conventional coefficient C of C/|x|^q (may overflow for junk fits)."""
        return self.amplitude * self.x_ref ** self.exponent


def tail_amplitude(u: Field, window: tuple) -> TailFit:
    """Fit |u(x)| ~ C / |x|^q on the window by log-log least squares.

    The window is a signed interval (lo, hi) that must not straddle the
    origin; pass a negative window to probe the left tail.  A poor fit
    (large log-residual) is flagged, not asserted.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    if lo < 0.0 < hi:
        raise ValueError("window must not contain the origin")
    grid = u.grid
    mask = (grid.x >= lo) & (grid.x <= hi)
    xs = np.abs(grid.x[mask])
    vals = np.abs(u.values[mask])
    if xs.size < 8 or np.max(xs) < 2.0 * np.min(xs):
        raise ValueError(
            "window too small: need at least 8 grid points spanning an octave")
    x_ref = float(np.sqrt(abs(lo * hi)))
    positive = vals > 0.0
    if np.count_nonzero(positive) < 8:
        return TailFit(amplitude=0.0, exponent=0.0, residual=np.inf,
                       x_ref=x_ref, reliable=False)
    lx = np.log(xs[positive] / x_ref)
    lv = np.log(vals[positive])
    design = np.column_stack([np.ones_like(lx), -lx])
    (logc, q), *_ = np.linalg.lstsq(design, lv, rcond=None)
    resid = float(np.sqrt(np.mean((design @ np.array([logc, q]) - lv) ** 2)))
    amp = float(np.exp(logc)) if logc < 700.0 else np.inf
    return TailFit(amplitude=amp, exponent=float(q), residual=resid,
                   x_ref=x_ref, reliable=resid <= 0.15)
