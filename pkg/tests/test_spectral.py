"""Tests for the spectral core: transforms, calculus, splits, norms."""

import math

import numpy as np
import pytest

from hydrocint import container
from hydrocint.errors import DimensionMismatch, NonZeroMean
from hydrocint.grid import (
    TorusField,
    TorusGrid,
    diff,
    diff_z,
    div_h,
    field_means,
    grid1d,
    grid2d_mikado,
    grid2d_scheme,
    grid3d,
    hs_norm,
    inv_laplace_h,
    l2_norm_spectral,
    laplace_h,
    lp_norm,
    multiply,
    random_band_limited,
    shift,
    split_modes,
    transform,
)


def rng(seed=0):
    return np.random.default_rng(np.random.Philox(seed))


class TestGrid:
    def test_power_of_two_enforced(self):
        with pytest.raises(DimensionMismatch):
            TorusGrid((48, 32), ("x1", "z"))
        with pytest.raises(DimensionMismatch):
            TorusGrid((4,), ("x1",))

    def test_axis_roles(self):
        g = grid3d(16, 16, 8)
        assert g.horizontal_axes == (0, 1)
        assert g.vertical_axis == 2
        assert grid2d_mikado(16, 16).vertical_axis is None
        with pytest.raises(DimensionMismatch):
            TorusGrid((16, 16), ("z", "z"))


class TestTransform:
    def test_constant_field_spectrum(self):
        g = grid2d_mikado(32, 32)
        f = TorusField.constant(g, 1.0)
        spec = f.spec[0]
        assert abs(spec[0, 0] - g.npoints) < 1e-12
        spec2 = spec.copy()
        spec2[0, 0] = 0.0
        assert np.abs(spec2).max() < 1e-12

    def test_single_cosine_mode(self):
        g = grid2d_mikado(32, 32)
        f = TorusField.from_function(g, lambda x1, x2: np.cos(2 * np.pi * x1))
        coef = f.spec[0] / g.npoints
        assert abs(coef[1, 0] - 0.5) < 1e-13
        assert abs(coef[-1, 0] - 0.5) < 1e-13
        coef[1, 0] = coef[-1, 0] = 0.0
        assert np.abs(coef).max() < 1e-13

    def test_round_trip(self):
        g = grid3d(16, 16, 16)
        f = random_band_limited(g, rng(1))
        back = transform(transform(f, "to-spectral"), "to-physical")
        scale = np.abs(f.data).max()
        assert np.abs(back.data - f.data).max() < 1e-13 * scale


class TestDiff:
    def test_single_mode_derivative(self):
        g = grid1d(64)
        f = TorusField.from_function(g, lambda x: np.sin(2 * np.pi * x))
        want = TorusField.from_function(g, lambda x: 2 * np.pi * np.cos(2 * np.pi * x))
        assert diff(f, 0).allclose(want, atol=1e-12)

    def test_laplacian_eigenfunction(self):
        g = grid2d_mikado(32, 32)
        f = TorusField.from_function(
            g, lambda x1, x2: np.cos(2 * np.pi * x1) * np.cos(2 * np.pi * x2)
        )
        lap = laplace_h(f)
        assert lap.allclose(f * (-8 * np.pi**2), atol=1e-10)

    def test_dz_of_z_independent(self):
        g = grid2d_scheme(32, 32)
        f = TorusField.from_function(g, lambda x, z: np.cos(2 * np.pi * x))
        assert np.abs(diff_z(f).data).max() < 1e-12

    def test_axis_out_of_range(self):
        g = grid1d(16)
        f = TorusField.constant(g, 1.0)
        with pytest.raises(DimensionMismatch):
            diff(f, 1)

    def test_commutes_with_transform(self):
        g = grid2d_mikado(64, 64)
        f = random_band_limited(g, rng(2), bw=20)
        d1 = diff(f, 0)
        d2 = transform(diff(transform(f, "to-spectral"), 0), "to-physical")
        assert np.abs(d1.data - d2.data).max() < 1e-11 * np.abs(d1.data).max()


class TestInvLaplace:
    def test_eigenfunction(self):
        g = grid2d_mikado(32, 32)
        f = TorusField.from_function(g, lambda x1, x2: np.cos(2 * np.pi * x1))
        out = inv_laplace_h(f)
        want = f * (-1.0 / (4 * np.pi**2))
        assert out.allclose(want, atol=1e-12)

    def test_zero_field(self):
        g = grid2d_mikado(16, 16)
        out = inv_laplace_h(TorusField.zeros(g))
        assert np.abs(out.data).max() == 0.0

    def test_forward_inverse(self):
        g = grid2d_mikado(64, 64)
        f = random_band_limited(g, rng(3), zero_mean=True)
        out = inv_laplace_h(f)
        back = laplace_h(out)
        assert np.abs(back.data - f.data).max() < 1e-11 * np.abs(f.data).max()
        assert abs(out.data.mean()) < 1e-13

    def test_nonzero_mean_rejected(self):
        g = grid2d_mikado(16, 16)
        with pytest.raises(NonZeroMean):
            inv_laplace_h(TorusField.constant(g, 1.0))


class TestSplitModes:
    def test_z_independent(self):
        g = grid2d_scheme(32, 32)
        f = TorusField.from_function(g, lambda x, z: np.sin(2 * np.pi * x))
        bar, tilde = split_modes(f)
        assert bar.allclose(f, atol=1e-14)
        assert np.abs(tilde.data).max() < 1e-14

    def test_mean_free_mode(self):
        g = grid2d_scheme(32, 32)
        f = TorusField.from_function(g, lambda x, z: np.cos(2 * np.pi * z))
        bar, tilde = split_modes(f)
        assert np.abs(bar.data).max() < 1e-14
        assert tilde.allclose(f, atol=1e-14)

    def test_direct_split(self):
        g = grid2d_scheme(32, 32)
        f = TorusField.from_function(
            g, lambda x, z: 2.0 + np.sin(2 * np.pi * z) * np.cos(2 * np.pi * x)
        )
        bar, tilde = split_modes(f)
        assert bar.allclose(TorusField.constant(g, 2.0), atol=1e-13)
        assert (bar + tilde).allclose(f, atol=0)

    def test_projection_idempotent_and_orthogonal(self):
        g = grid3d(16, 16, 16)
        f = random_band_limited(g, rng(4))
        bar, tilde = split_modes(f)
        bar2, rem = split_modes(bar)
        assert bar2.allclose(bar, atol=1e-13)
        assert np.abs(rem.data).max() < 1e-13
        inner = float(np.mean(bar.values * tilde.values))
        assert abs(inner) < 1e-12

    def test_field_means(self):
        g = grid2d_scheme(16, 16)
        f = TorusField.from_function(g, lambda x, z: 3.0 + np.cos(2 * np.pi * z))
        md = field_means(f)
        assert abs(md.spatial_mean[0] - 3.0) < 1e-13
        assert np.abs(diff_z(md.z_mean_field).data).max() < 1e-12


class TestNorms:
    def test_constant(self):
        g = grid1d(32)
        f = TorusField.constant(g, -2.5)
        for p in (1, 2, 4, math.inf):
            assert abs(lp_norm(f, p) - 2.5) < 1e-14

    def test_sine_l2(self):
        g = grid1d(128)
        f = TorusField.from_function(g, lambda x: np.sin(2 * np.pi * x))
        assert abs(lp_norm(f, 2) - 1.0 / math.sqrt(2)) < 1e-13

    def test_sine_linf(self):
        g = grid1d(128)
        f = TorusField.from_function(g, lambda x: np.sin(2 * np.pi * x))
        assert abs(lp_norm(f, math.inf) - 1.0) < 1e-3

    def test_parseval(self):
        g = grid2d_mikado(64, 64)
        f = random_band_limited(g, rng(5))
        assert abs(lp_norm(f, 2) - l2_norm_spectral(f)) < 1e-12 * lp_norm(f, 2)

    def test_hs_zero_is_l2(self):
        g = grid2d_mikado(32, 32)
        f = random_band_limited(g, rng(6))
        assert abs(hs_norm(f, 0.0) - lp_norm(f, 2)) < 1e-12


class TestProducts:
    def test_pointwise_vs_dealiased_resolved(self):
        g = grid2d_mikado(64, 64)
        a = random_band_limited(g, rng(7), bw=15)
        b = random_band_limited(g, rng(8), bw=15)
        p1 = multiply(a, b)
        p2 = multiply(a, b, dealias=True)
        assert np.abs(p1.data - p2.data).max() < 1e-12 * np.abs(p1.data).max()

    def test_grid_mismatch(self):
        a = TorusField.constant(grid1d(16), 1.0)
        b = TorusField.constant(grid1d(32), 1.0)
        with pytest.raises(DimensionMismatch):
            multiply(a, b)


class TestShift:
    def test_exact_translation(self):
        g = grid2d_mikado(32, 32)
        f = TorusField.from_function(
            g, lambda x1, x2: np.cos(2 * np.pi * x1) + np.sin(4 * np.pi * x2)
        )
        s = shift(f, [0.2, 0.3])
        want = TorusField.from_function(
            g,
            lambda x1, x2: np.cos(2 * np.pi * (x1 + 0.2)) + np.sin(4 * np.pi * (x2 + 0.3)),
        )
        assert s.allclose(want, atol=1e-12)


class TestContainer:
    def test_round_trip(self, tmp_path):
        g = grid2d_scheme(16, 16)
        f = random_band_limited(g, rng(9), rank="vector", ncomp=1)
        path = tmp_path / "f.hcf1"
        container.write_field(path, f)
        f2 = container.read_field(path)
        assert f2.grid == g and f2.rank == f.rank
        assert np.array_equal(f2.data, f.data)

    def test_header_padding(self, tmp_path):
        g = grid1d(8)
        path = tmp_path / "f.hcf1"
        container.write_field(path, TorusField.constant(g, 1.0))
        raw = path.read_bytes()
        import struct

        hlen = struct.unpack("<I", raw[4:8])[0]
        assert (8 + hlen) % 64 == 0
