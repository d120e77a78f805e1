"""Deterministic initial conditions.

The seeded-noise field uses a fixed, fully documented 64-bit generator so
identical seeds give bitwise-identical fields on every platform:

counter-based splitmix64
    state_i = (seed + i * 0x9E3779B97F4A7C15) mod 2^64 for i = 1, 2, ...
    (one increment of the golden-ratio constant per drawn value), with
    output mixing

        z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
        z ^= z >> 27;  z *= 0x94D049BB133111EB
        z ^= z >> 31

    The top 53 bits of the mixed word, scaled by 2^-53, give a uniform in
    [0, 1); values are drawn one per cell in row-major order (x fastest)
    and mapped to [-1, 1).
"""

from __future__ import annotations

import numpy as np

from .spectral import Grid2D

GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of splitmix64 from ``seed`` (uint64 array)."""
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(seed & _MASK) + idx * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def uniform_pm1(seed: int, count: int) -> np.ndarray:
    """Uniform floats in [-1, 1) from the documented generator."""
    u = (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return 2.0 * u - 1.0


def seeded_random(grid: Grid2D, offset: float = 0.25, amplitude: float = 0.4,
                  seed: int = 42) -> np.ndarray:
    """offset + amplitude * uniform(-1, 1), one draw per cell (row-major)."""
    r = uniform_pm1(seed, grid.nx * grid.ny).reshape(grid.shape)
    return offset + amplitude * r


def tanh_star(grid: Grid2D, a: float = 1.5, b: float = 1.2,
              c: float = 2.0 * np.pi, eps: float = 0.01) -> np.ndarray:
    """Six-lobed star interface: tanh((a + b cos 6theta - c r)/(sqrt2 eps))."""
    X, Y = grid.coords()
    theta = np.arctan2(Y, X)      # 0 at the origin by convention
    r = np.sqrt(X * X + Y * Y)
    return np.tanh((a + b * np.cos(6.0 * theta) - c * r) / (np.sqrt(2.0) * eps))


def ellipse_circle(grid: Grid2D, eps: float = 0.01,
                   ellipse_center: tuple[float, float] = (-0.1, -0.1),
                   ellipse_axes: tuple[float, float] = (np.sqrt(2.0) / 5.0,
                                                        np.sqrt(2.0) / 10.0),
                   circle_center: tuple[float, float] = (0.25, 0.25),
                   circle_radius: float = 0.1) -> np.ndarray:
    """tanh profile around the union of an ellipse and a circle.

    The circle distance is exact; the ellipse uses the normalized implicit
    function g/|grad g| as an approximate signed distance (positive
    inside), which is O(eps)-accurate near the interface where it matters.
    """
    X, Y = grid.coords()
    ex, ey = ellipse_center
    ea, eb = ellipse_axes
    g = ((X - ex) / ea) ** 2 + ((Y - ey) / eb) ** 2 - 1.0
    gn = np.hypot(2.0 * (X - ex) / ea ** 2, 2.0 * (Y - ey) / eb ** 2)
    d_ell = -g / np.maximum(gn, 1e-12)
    cx, cy = circle_center
    d_circ = circle_radius - np.hypot(X - cx, Y - cy)
    return np.tanh(np.maximum(d_ell, d_circ) / (np.sqrt(2.0) * eps))


def polycrystal(grid: Grid2D, centers=None, radius: float | None = None,
                angles=(-np.pi / 4.0, 0.0, np.pi / 4.0), mean: float = 0.285,
                amplitude: float = 0.446, wavenumber: float = 1.0) -> np.ndarray:
    """Crystallites with different orientations in a constant background.

    Inside each circular patch the one-mode triangular-lattice ansatz

        phi = mean + A*(cos(k x')cos(k y'/sqrt3) - cos(2k y'/sqrt3)/2)

    is stamped in patch-rotated coordinates (x', y'); outside, phi = mean.
    """
    X, Y = grid.coords()
    if centers is None:
        centers = [
            (grid.x0 + 0.25 * grid.lx, grid.y0 + 0.25 * grid.ly),
            (grid.x0 + 0.75 * grid.lx, grid.y0 + 0.25 * grid.ly),
            (grid.x0 + 0.50 * grid.lx, grid.y0 + 0.75 * grid.ly),
        ]
    if radius is None:
        radius = 0.125 * min(grid.lx, grid.ly)
    phi = np.full(grid.shape, float(mean))
    k = wavenumber
    for (cx, cy), ang in zip(centers, angles):
        dx, dy = X - cx, Y - cy
        inside = dx * dx + dy * dy <= radius * radius
        xr = np.cos(ang) * dx + np.sin(ang) * dy
        yr = -np.sin(ang) * dx + np.cos(ang) * dy
        lattice = (np.cos(k * xr) * np.cos(k * yr / np.sqrt(3.0))
                   - 0.5 * np.cos(2.0 * k * yr / np.sqrt(3.0)))
        phi[inside] = mean + amplitude * lattice[inside]
    return phi


def mbe_benchmark(grid: Grid2D) -> np.ndarray:
    """0.1 (sin 3x sin 3y + cos 5x cos 5y), the standard epitaxy benchmark."""
    X, Y = grid.coords()
    return 0.1 * (np.sin(3.0 * X) * np.sin(3.0 * Y)
                  + np.cos(5.0 * X) * np.cos(5.0 * Y))


_BUILDERS = {
    "tanh_star": tanh_star,
    "random": seeded_random,
    "ellipse_circle": ellipse_circle,
    "polycrystal": polycrystal,
    "mbe_bench": mbe_benchmark,
}


def make_field(name: str, grid: Grid2D, **params) -> np.ndarray:
    """Build a named initial condition; parameters vary per kind."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown initial condition {name!r}")
    return _BUILDERS[name](grid, **params)
