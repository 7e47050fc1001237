"""Grid, quadrature, transform, and serialization contracts."""

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from phasebell.grids import (
    AtomicDistribution2D,
    Axis,
    Field1D,
    Field2D,
    Field4D,
    dual_axis,
    fine_samples,
    integrate_2d,
    integrate_4d,
    load_field,
    marginalize_4d,
    save_field,
    to_momentum,
    to_position,
)
from fractions import Fraction

from conftest import phase_space_axes


# ---------------------------------------------------------------------------
# axes
# ---------------------------------------------------------------------------


def test_axis_rejects_bad_sizes():
    for n in (0, 3, 6, 17, 100):
        with pytest.raises(ValueError):
            Axis(n, -1.0, 1.0)
    with pytest.raises(ValueError):
        Axis(8, 1.0, 1.0)


def test_axis_midpoint_layout():
    ax = Axis(8, -2.0, 2.0)
    assert ax.step == pytest.approx(0.5)
    assert np.all(ax.points > ax.x_min) and np.all(ax.points < ax.x_max)
    # symmetric box: no sample at 0, points symmetric in pairs
    assert np.abs(ax.points).min() > 0
    assert np.allclose(ax.points, -ax.points[::-1])


def test_dual_axis_invariants():
    ax = Axis(64, -7.0, 9.0)
    mo = dual_axis(ax)
    assert mo.is_momentum and mo.source is ax
    # symmetric about zero and no sample at zero
    assert np.allclose(mo.points, -mo.points[::-1])
    assert np.abs(mo.points).min() > 0
    # step product is 2*pi/n exactly
    assert ax.step * mo.step == pytest.approx(2 * np.pi / ax.n, rel=1e-15)
    with pytest.raises(ValueError):
        dual_axis(mo)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def test_integrate_2d_constant_exact():
    for n in (4, 16, 64):
        ax = Axis(n, 0.0, 1.0)
        f = Field2D((ax, ax), np.ones((n, n)))
        assert integrate_2d(f) == pytest.approx(1.0, abs=1e-14)


def test_integrate_2d_zero():
    ax = Axis(8, 0.0, 1.0)
    assert integrate_2d(Field2D((ax, ax), np.zeros((8, 8)))) == 0.0


def test_integrate_2d_gaussian_against_quadrature_oracle():
    # oracle: adaptive 2D quadrature of the same normalized density
    density = lambda y, x: np.exp(-(x**2 + y**2) / 2.0) / (2 * np.pi)
    oracle, err = dblquad(density, -8, 8, -8, 8, epsabs=1e-12)
    assert err < 1e-10
    ax = Axis(64, -8.0, 8.0)
    xx, yy = np.meshgrid(ax.points, ax.points, indexing="ij")
    f = Field2D((ax, ax), density(yy, xx))
    assert integrate_2d(f) == pytest.approx(oracle, abs=1e-6)


def test_integrate_4d_constant_and_zero():
    ax = Axis(4, 0.0, 1.0)
    axes = (ax, ax, ax, ax)
    ones = Field4D(axes, np.ones((4, 4, 4, 4)))
    assert integrate_4d(ones) == pytest.approx(1.0, abs=1e-14)
    assert integrate_4d(Field4D(axes, np.zeros((4, 4, 4, 4)))) == 0.0


def test_integrate_4d_gaussian_product_against_1d_oracle():
    # oracle: separability; each 1D factor integrated adaptively
    g = lambda x: np.exp(-(x**2)) / np.sqrt(np.pi)
    oracle_1d, _ = quad(g, -8, 8, epsabs=1e-13)
    oracle = oracle_1d**4
    ax = Axis(32, -8.0, 8.0)
    x = ax.points
    vals = g(x)[:, None, None, None] * g(x)[None, :, None, None] \
        * g(x)[None, None, :, None] * g(x)[None, None, None, :]
    f = Field4D((ax, ax, ax, ax), vals)
    assert integrate_4d(f) == pytest.approx(oracle, abs=1e-6)


def test_positivity_and_linearity():
    ax = Axis(8, -1.0, 3.0)
    rng = np.random.default_rng(0)
    a = Field2D((ax, ax), rng.random((8, 8)))
    b = Field2D((ax, ax), rng.random((8, 8)))
    assert integrate_2d(a) >= 0
    lin = integrate_2d(Field2D((ax, ax), 2.0 * a.values + 3.0 * b.values))
    assert lin == pytest.approx(2 * integrate_2d(a) + 3 * integrate_2d(b), rel=1e-13)


# ---------------------------------------------------------------------------
# marginalization
# ---------------------------------------------------------------------------


def test_marginalize_product_structure(axes16):
    rng = np.random.default_rng(1)
    full = phase_space_axes(axes16)
    A = rng.random((16, 16))
    B = rng.random((16, 16))
    rho = Field4D(full, A[:, :, None, None] * B[None, None, :, :])
    kept = marginalize_4d(rho, "qq")
    scale = B.sum() * full[2].step * full[3].step
    assert np.allclose(kept.values, A * scale, atol=1e-13)


def test_marginalize_total_mass_equal_all_selectors(axes16):
    rng = np.random.default_rng(2)
    from conftest import random_density_4d

    rho = random_density_4d(axes16, rng)
    totals = [integrate_2d(marginalize_4d(rho, k)) for k in ("qq", "qp", "pq", "pp")]
    assert max(totals) - min(totals) < 1e-12
    assert totals[0] == pytest.approx(integrate_4d(rho), abs=1e-12)


def test_marginalize_against_direct_summation_oracle(axes16):
    rng = np.random.default_rng(3)
    from conftest import random_density_4d

    rho = random_density_4d(axes16, rng)
    d = rho.steps
    # oracle: explicit einsum over the dropped axes
    oracle = {
        "qq": np.einsum("ijkl->ij", rho.values) * d[2] * d[3],
        "qp": np.einsum("ijkl->il", rho.values) * d[1] * d[2],
        "pq": np.einsum("ijkl->kj", rho.values) * d[0] * d[3],
        "pp": np.einsum("ijkl->kl", rho.values) * d[0] * d[1],
    }
    for k, expected in oracle.items():
        got = marginalize_4d(rho, k)
        assert np.abs(got.values - expected).max() < 1e-14
        assert integrate_2d(got) == pytest.approx(1.0, abs=1e-12)


def test_marginalize_rejects_bad_selector(axes16):
    from conftest import random_density_4d

    rho = random_density_4d(axes16, np.random.default_rng(0))
    with pytest.raises(ValueError):
        marginalize_4d(rho, "q1p1")


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def test_gaussian_is_transform_fixed_point():
    ax = Axis(128, -10.0, 10.0)
    x = ax.points
    f = Field1D(ax, (np.pi**-0.25) * np.exp(-(x**2) / 2.0) + 0j)
    ft = to_momentum(f)
    p = ft.axis.points
    expected = (np.pi**-0.25) * np.exp(-(p**2) / 2.0)
    assert np.abs(ft.values - expected).max() < 1e-8


def test_parseval_and_round_trip_random_fields():
    ax = Axis(64, -6.0, 6.0)
    rng = np.random.default_rng(5)
    for _ in range(100):
        v = rng.normal(size=64) + 1j * rng.normal(size=64)
        f = Field1D(ax, v)
        ft = to_momentum(f)
        n_x = np.sum(np.abs(v) ** 2) * ax.step
        n_p = np.sum(np.abs(ft.values) ** 2) * ft.axis.step
        assert abs(n_x - n_p) < 1e-12 * max(1.0, n_x)
        back = to_position(ft)
        assert np.abs(back.values - v).max() < 1e-12


def test_shifted_gaussian_picks_up_phase():
    # oracle: analytic transform exp(-(q-a)^2/2) -> exp(-i p a) exp(-p^2/2)
    ax = Axis(128, -10.0, 10.0)
    a = 1.5
    x = ax.points
    f = Field1D(ax, (np.pi**-0.25) * np.exp(-((x - a) ** 2) / 2.0) + 0j)
    ft = to_momentum(f)
    p = ft.axis.points
    expected = (np.pi**-0.25) * np.exp(-(p**2) / 2.0) * np.exp(-1j * p * a)
    assert np.abs(ft.values - expected).max() < 1e-8


def test_transform_along_each_2d_axis():
    ax1, ax2 = Axis(32, -8.0, 8.0), Axis(64, -9.0, 9.0)
    rng = np.random.default_rng(6)
    v = rng.normal(size=(32, 64)) + 1j * rng.normal(size=(32, 64))
    f = Field2D((ax1, ax2), v)
    for k in (0, 1):
        ft = to_momentum(f, k)
        assert ft.axes[k].is_momentum and not ft.axes[1 - k].is_momentum
        back = to_position(ft, k)
        assert np.abs(back.values - v).max() < 1e-12
    with pytest.raises(ValueError):
        to_position(f, 0)
    with pytest.raises(ValueError):
        to_momentum(to_momentum(f, 0), 0)


def test_fine_samples_interleave_and_edge_values():
    ax = Axis(128, -10.0, 10.0)
    x = ax.points
    v = (np.pi**-0.25) * np.exp(-(x**2) / 2.0) + 0j
    fine = fine_samples(v, ax)
    # odd fine indices are the original samples, exactly
    assert np.abs(fine[1::2] - v).max() < 1e-12
    # even fine indices are the band-limited edge values; for a well-resolved
    # Gaussian they match the analytic values to high accuracy
    edges = ax.x_min + np.arange(128) * ax.step
    expected = (np.pi**-0.25) * np.exp(-(edges**2) / 2.0)
    assert np.abs(fine[0::2] - expected).max() < 1e-10


# ---------------------------------------------------------------------------
# atomic distributions
# ---------------------------------------------------------------------------


def test_atomic_validation():
    h = Fraction(1, 2)
    with pytest.raises(ValueError):
        AtomicDistribution2D((((0.0, 0.0), h), ((0.0, 0.0), h)))
    with pytest.raises(ValueError):
        AtomicDistribution2D((((0.0, 0.0), h), ((1.0, 1.0), Fraction(1, 3))))
    with pytest.raises(ValueError):
        AtomicDistribution2D((((0.0, 0.0), Fraction(3, 2)), ((1.0, 1.0), Fraction(-1, 2))))


def test_atomic_marginal_groups_weights():
    h = Fraction(1, 4)
    d = AtomicDistribution2D(
        (((0.0, 0.0), h), ((0.0, 1.0), h), ((1.0, 0.0), Fraction(1, 2)))
    )
    m0 = d.marginal(0)
    assert m0[0.0] == Fraction(1, 2) and m0[1.0] == Fraction(1, 2)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_field_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(7)
    ax = Axis(16, -3.0, 5.0)
    cases = [
        Field1D(ax, rng.normal(size=16)),
        Field2D((ax, dual_axis(ax)), rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))),
        Field4D((ax, ax, dual_axis(ax), dual_axis(ax)), rng.normal(size=(16,) * 4)),
    ]
    for i, f in enumerate(cases):
        base = tmp_path / f"field{i}"
        save_field(f, base)
        g = load_field(base)
        assert type(g) is type(f)
        assert np.array_equal(g.values, f.values)  # binary round trip: bit exact
        for a, b in zip(
            (f.axis,) if isinstance(f, Field1D) else f.axes,
            (g.axis,) if isinstance(g, Field1D) else g.axes,
        ):
            assert a.same_grid(b) and a.is_momentum == b.is_momentum
