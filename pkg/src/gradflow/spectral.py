"""Periodic rectangular grids and Fourier-multiplier differential operators.

Everything downstream (models, steppers, diagnostics) works on plain
float64 arrays of shape ``(ny, nx)`` -- row-major with x varying fastest --
paired with a :class:`Grid2D` that owns the wavenumber tables and the
transforms.  All derivatives are exact Fourier multipliers on the periodic
domain ``[x0, x1) x [y0, y1)``.

Conventions:

* forward transform is unnormalized (``numpy.fft.fft2``); the inverse
  divides by ``nx*ny``;
* first-derivative multipliers are zeroed at the Nyquist mode so gradients
  of real fields stay real; even-order operators keep the full ``|k|^2``
  there;
* no dealiasing by default; a 2/3-rule low-pass mask is precomputed for
  callers that want it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridMismatchError(ValueError):
    """A field's shape does not match the grid it is used with."""


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Uniform periodic grid with precomputed spectral machinery.

    Instances are immutable and safe to share between simulations; build
    them with :func:`make_grid`.
    """

    nx: int
    ny: int
    x0: float
    x1: float
    y0: float
    y1: float
    kx: np.ndarray          # (nx,) angular wavenumbers, FFT ordering
    ky: np.ndarray          # (ny,)
    dA: float               # cell area (Lx/nx)*(Ly/ny)
    x: np.ndarray           # (nx,) cell coordinates x0 + i*Lx/nx
    y: np.ndarray           # (ny,)
    k2: np.ndarray          # (ny, nx): kx^2 + ky^2, full value at Nyquist
    k4: np.ndarray          # (ny, nx): k2^2
    dx_mult: np.ndarray     # (1, nx) complex: i*kx, zero at Nyquist
    dy_mult: np.ndarray     # (ny, 1) complex
    dealias_mask: np.ndarray  # (ny, nx) bool, 2/3-rule keep mask

    # -- basic geometry -------------------------------------------------

    @property
    def lx(self) -> float:
        return self.x1 - self.x0

    @property
    def ly(self) -> float:
        return self.y1 - self.y0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def area(self) -> float:
        return self.lx * self.ly

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcast cell coordinates as (X, Y), each of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def _check(self, f: np.ndarray) -> None:
        if f.shape != self.shape:
            raise GridMismatchError(
                f"field of shape {f.shape} does not live on a "
                f"{self.ny}x{self.nx} grid"
            )

    # -- transforms ------------------------------------------------------

    def fft(self, f: np.ndarray) -> np.ndarray:
        self._check(f)
        return np.fft.fft2(f)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        """Inverse transform, real part.

        For real input and real multipliers the imaginary residue is
        roundoff-level (<= 1e-12 of the field norm) and is discarded.
        """
        self._check(fh)
        return np.fft.ifft2(fh).real

    # -- quadrature ------------------------------------------------------

    def integral(self, f: np.ndarray) -> float:
        self._check(f)
        return float(f.sum() * self.dA)

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """Discrete L2 inner product (f, g) = sum f*g*dA."""
        self._check(f)
        self._check(g)
        return float((f * g).sum() * self.dA)

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.inner(f, f)))

    def mean(self, f: np.ndarray) -> float:
        self._check(f)
        return float(f.mean())

    # -- multiplier operators ---------------------------------------------

    def apply_symbol(self, f: np.ndarray, symbol: np.ndarray) -> np.ndarray:
        """Apply a per-mode real multiplier: ifft(symbol * fft(f))."""
        if np.shape(symbol) != self.shape:
            raise GridMismatchError(
                f"symbol of shape {np.shape(symbol)} does not match grid "
                f"layout {self.shape}"
            )
        return self.ifft(symbol * self.fft(f))

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        return self.apply_symbol(f, -self.k2)

    def biharmonic(self, f: np.ndarray) -> np.ndarray:
        return self.apply_symbol(f, self.k4)

    def gradient(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        fh = self.fft(f)
        fx = np.fft.ifft2(self.dx_mult * fh).real
        fy = np.fft.ifft2(self.dy_mult * fh).real
        return fx, fy

    def divergence(self, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
        self._check(fx)
        self._check(fy)
        wh = self.dx_mult * np.fft.fft2(fx) + self.dy_mult * np.fft.fft2(fy)
        return np.fft.ifft2(wh).real

    def lowpass(self, f: np.ndarray) -> np.ndarray:
        """Zero the top third of the spectrum (2/3-rule dealiasing)."""
        return self.ifft(self.fft(f) * self.dealias_mask)


def make_grid(nx: int, ny: int, x0: float, x1: float, y0: float, y1: float) -> Grid2D:
    """Build a periodic grid with nx x ny Fourier modes on [x0,x1]x[y0,y1].

    Mode counts must be even and at least 4 (keeps Nyquist handling
    simple); bounds must be strictly increasing.
    """
    for n, name in ((nx, "nx"), (ny, "ny")):
        if n < 4:
            raise ValueError(f"{name}={n}: need at least 4 modes")
        if n % 2 != 0:
            raise ValueError(f"{name}={n}: mode count must be even")
    if not (x1 > x0) or not (y1 > y0):
        raise ValueError(f"degenerate domain bounds [{x0},{x1}]x[{y0},{y1}]")

    lx = float(x1 - x0)
    ly = float(y1 - y0)
    kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=lx / nx)
    ky = 2.0 * np.pi * np.fft.fftfreq(ny, d=ly / ny)

    k2 = kx[None, :] ** 2 + ky[:, None] ** 2
    k4 = k2 * k2

    # First derivatives drop the Nyquist mode (odd operator on a real field).
    kx_d = kx.copy()
    kx_d[nx // 2] = 0.0
    ky_d = ky.copy()
    ky_d[ny // 2] = 0.0
    dx_mult = 1j * kx_d[None, :]
    dy_mult = 1j * ky_d[:, None]

    jx = np.fft.fftfreq(nx) * nx
    jy = np.fft.fftfreq(ny) * ny
    dealias_mask = (np.abs(jx[None, :]) <= nx // 3) & (np.abs(jy[:, None]) <= ny // 3)

    x = x0 + (lx / nx) * np.arange(nx)
    y = y0 + (ly / ny) * np.arange(ny)

    return Grid2D(
        nx=nx, ny=ny, x0=float(x0), x1=float(x1), y0=float(y0), y1=float(y1),
        kx=kx, ky=ky, dA=(lx / nx) * (ly / ny), x=x, y=y,
        k2=k2, k4=k4, dx_mult=dx_mult, dy_mult=dy_mult,
        dealias_mask=dealias_mask,
    )
