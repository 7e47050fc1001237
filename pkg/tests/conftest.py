import numpy as np
import pytest

from phasebell.grids import Axis, Field4D, dual_axis, integrate_4d


@pytest.fixture
def axes16():
    ax = Axis(16, -8.0, 8.0)
    return (ax, ax)


@pytest.fixture
def axes64():
    ax = Axis(64, -10.0, 10.0)
    return (ax, ax)


def phase_space_axes(axes):
    return (axes[0], axes[1], dual_axis(axes[0]), dual_axis(axes[1]))


def random_density_4d(axes, rng, sparse=False):
    """Random nonnegative normalized density on the phase-space grid."""
    shape = tuple(a.n for a in axes) + tuple(a.n for a in axes)
    shape = (axes[0].n, axes[1].n, axes[0].n, axes[1].n)
    full = phase_space_axes(axes)
    if sparse:
        vals = np.zeros(shape)
        k = rng.integers(1, 9)
        idx = tuple(rng.integers(0, s, size=k) for s in shape)
        vals[idx] = rng.random(k) + 0.1
    else:
        vals = rng.random(shape)
    rho = Field4D(full, vals)
    return Field4D(full, vals / integrate_4d(rho))
