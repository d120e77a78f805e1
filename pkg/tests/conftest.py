import numpy as np
import pytest

from gradflow import make_grid


def smooth_field(grid, seed, amp=1.0, offset=0.0, kfrac=0.125):
    """Seeded random field low-passed to |j| <= kfrac*n (no Nyquist content)."""
    rng = np.random.default_rng(seed)
    fh = np.fft.fft2(rng.standard_normal(grid.shape))
    jx = np.abs(np.fft.fftfreq(grid.nx) * grid.nx)[None, :]
    jy = np.abs(np.fft.fftfreq(grid.ny) * grid.ny)[:, None]
    fh *= np.exp(-0.5 * ((jx / (kfrac * grid.nx)) ** 2
                         + (jy / (kfrac * grid.ny)) ** 2))
    f = np.fft.ifft2(fh).real
    return offset + amp * f / np.abs(f).max()


@pytest.fixture
def unit_grid32():
    return make_grid(32, 32, -0.5, 0.5, -0.5, 0.5)


@pytest.fixture
def pi_grid32():
    return make_grid(32, 32, -np.pi, np.pi, -np.pi, np.pi)
