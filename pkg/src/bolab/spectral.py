"""Fourier infrastructure on a uniform periodic grid.

Conventions, fixed once for the whole package:

* the cell is [-L/2, L/2) sampled at n points, x_j = -L/2 + j*L/n;
* spectra are stored against frequencies xi_k = 2*pi*k/L with
  k = -n/2 .. n/2-1 in ascending order, so xi = 0 sits at index n//2;
* coefficients approximate the line transform
      uhat(xi) = integral of e^{-i xi x} u(x) dx
  (a DFT scaled by L/n), hence Parseval reads
      (dxi / 2 pi) * sum |uhat|^2  ==  dx * sum |u|^2;
* the inverse is u(x) = (1/2 pi) integral of e^{+i xi x} uhat(xi) dxi.

With this choice d/dxi uhat is the transform of (-i x) u, and the free
propagator of the dispersive part is exp(-i t xi |xi|).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContaminationError

__all__ = [
    "Grid",
    "Field",
    "Spectrum",
    "make_grid",
    "forward",
    "inverse",
    "hilbert",
    "derivative",
    "linear_propagator",
    "dealias",
    "commutator",
    "hermitian_defect",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid and its dual frequency grid.

    All operations treat instances as immutable; share freely across
    workers.
    """

    n: int
    length: float
    x: np.ndarray
    xi: np.ndarray

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def zero_mode(self) -> int:
        """Index of xi = 0 in the ascending frequency layout."""
        return self.n // 2

    def modes(self) -> np.ndarray:
        """Integer mode numbers k = -n/2 .. n/2-1."""
        return np.arange(self.n) - self.n // 2


@dataclass(frozen=True)
class Field:
    """Real samples of a function at the grid nodes."""

    grid: Grid
    values: np.ndarray


@dataclass(frozen=True)
class Spectrum:
    """Complex line-normalized Fourier coefficients, ascending in xi."""

    grid: Grid
    coeffs: np.ndarray


def make_grid(n: int, length: float) -> Grid:
    """Build the spatial grid [-L/2, L/2) and its frequency dual.

    n must be even (and is happiest as a product of small primes) so the
    frequency grid is symmetric about 0 apart from the single Nyquist mode.
    """
    if n != int(n) or n % 2 != 0:
        raise ValueError(f"n must be even, got {n}")
    n = int(n)
    if n < 16:
        raise ValueError(f"n must be >= 16, got {n}")
    if not length > 0:
        raise ValueError(f"length must be positive, got {length}")
    length = float(length)
    dx = length / n
    x = -length / 2.0 + dx * np.arange(n)
    xi = (2.0 * np.pi / length) * (np.arange(n) - n // 2)
    return Grid(n=n, length=length, x=x, xi=xi)


# Raw kernels shared with the integrator's hot loop.  The ifftshift on
# input re-indexes samples so x = 0 leads, which realizes the e^{-i xi x}
# phase of the centered cell exactly.

def _forward_raw(grid: Grid, values: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft(np.fft.ifftshift(values))) * grid.dx


def _inverse_raw(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(coeffs))) / grid.dx


def _boundary_ratio(values: np.ndarray) -> float:
    """max |u| over the outer 5% of the cell divided by max |u|."""
    n = values.shape[0]
    edge = max(n // 40, 1)  # 2.5% of points at each end
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        return 0.0
    rim = max(float(np.max(np.abs(values[:edge]))),
              float(np.max(np.abs(values[-edge:]))))
    return rim / peak


def forward(field: Field) -> Spectrum:
    """Transform samples to line-normalized coefficients."""
    if not np.all(np.isfinite(field.values)):
        raise ValueError("field contains NaN or Inf")
    return Spectrum(field.grid, _forward_raw(field.grid, field.values))


def hermitian_defect(spec: Spectrum) -> float:
    """Relative departure from conjugate symmetry coeffs[-k] = conj(coeffs[k])."""
    c = spec.coeffs
    scale = float(np.max(np.abs(c)))
    if scale == 0.0:
        return 0.0
    body = float(np.max(np.abs(c[1:] - np.conj(c[1:][::-1]))))
    nyq = abs(float(c[0].imag))
    return max(body, nyq) / scale


def inverse(spec: Spectrum) -> Field:
    """Transform coefficients back to real samples.

    Requires Hermitian symmetry; the residual imaginary part is checked,
    not silently dropped.
    """
    if not np.all(np.isfinite(spec.coeffs)):
        raise ValueError("spectrum contains NaN or Inf")
    if hermitian_defect(spec) > 1e-9:
        raise ValueError("spectrum is not Hermitian; inverse would not be real")
    u = _inverse_raw(spec.grid, spec.coeffs)
    return Field(spec.grid, u.real.copy())


def hilbert(spec: Spectrum) -> Spectrum:
    """Apply the -i*sgn(xi) multiplier; sgn(0) = 0 kills the mean mode."""
    mult = -1j * np.sign(spec.grid.xi)
    return Spectrum(spec.grid, mult * spec.coeffs)


def derivative(spec: Spectrum, order: int) -> Spectrum:
    """Multiply by (i xi)^order; odd orders zero the Nyquist mode so real
    fields stay real."""
    if order < 0 or order != int(order):
        raise ValueError(f"order must be a non-negative integer, got {order}")
    if order > 8:
        raise ValueError(f"derivative order {order} exceeds the supported 8")
    order = int(order)
    if order == 0:
        return Spectrum(spec.grid, spec.coeffs.copy())
    mult = (1j * spec.grid.xi) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[0] = 0.0  # Nyquist sits at index 0 in ascending layout
    return Spectrum(spec.grid, mult * spec.coeffs)


def linear_propagator(spec: Spectrum, t: float) -> Spectrum:
    """Advance by the free dispersive group exp(-i t xi |xi|) (unitary)."""
    if not np.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    xi = spec.grid.xi
    phase = np.exp(-1j * t * xi * np.abs(xi))
    return Spectrum(spec.grid, phase * spec.coeffs)


def dealias_mask(grid: Grid, keep_fraction: float) -> np.ndarray:
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    k = grid.modes()
    return np.abs(k) <= keep_fraction * (grid.n / 2.0)


def dealias(spec: Spectrum, keep_fraction: float = 2.0 / 3.0) -> Spectrum:
    """Zero modes with |k| > keep_fraction * n/2."""
    mask = dealias_mask(spec.grid, keep_fraction)
    return Spectrum(spec.grid, np.where(mask, spec.coeffs, 0.0))


def commutator(a: Field, f: Field, l: int, m: int, *,
               dealias_fraction: float = 2.0 / 3.0,
               edge_guard: float = 1e-9) -> Field:
    """Discrete d^l/dx^l ( a * H(d^m f/dx^m) - H(a * d^m f/dx^m) ).

    Products are formed pointwise after dealiasing.  f must be effectively
    supported inside the cell; a may saturate to a constant near the
    boundary, so the guard is applied to f directly and to a through its
    derivative.
    """
    if a.grid is not f.grid and (a.grid.n != f.grid.n or a.grid.length != f.grid.length):
        raise ValueError("a and f must share a grid")
    total = l + m
    if total < 1 or total > 6:
        raise ValueError(f"l + m must lie in [1, 6], got {total}")
    grid = f.grid
    rf = _boundary_ratio(f.values)
    if rf > edge_guard:
        raise ContaminationError(
            f"f reaches the boundary (ratio {rf:.3e} > {edge_guard:.1e})",
            ratio=rf, threshold=edge_guard)
    da = inverse(derivative(forward(a), 1)).values
    ra = _boundary_ratio(da)
    if ra > edge_guard:
        raise ContaminationError(
            f"da/dx reaches the boundary (ratio {ra:.3e} > {edge_guard:.1e})",
            ratio=ra, threshold=edge_guard)

    fm = derivative(forward(f), m)
    h_fm = inverse(dealias(hilbert(fm), dealias_fraction)).values
    fm_phys = inverse(dealias(fm, dealias_fraction)).values
    first = forward(Field(grid, a.values * h_fm))
    second = hilbert(forward(Field(grid, a.values * fm_phys)))
    inner = Spectrum(grid, first.coeffs - second.coeffs)
    out = derivative(dealias(inner, dealias_fraction), l)
    return inverse(out)
