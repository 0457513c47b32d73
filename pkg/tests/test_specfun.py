import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harvestsim.specfun import damped_im_erfi, ediff, faddeeva_w, sinc

# frozen high-precision reference values (mpmath, 60 digits)
SIN_1 = 0.8414709848078965066525023
E_ERFC_1 = 0.4275835761558070044107503           # w(i)
W_10_10I = 0.02827946745423245665957827 + 0.02813843327633689563087072j
DIM_ERFI_50_1 = -0.002173146248612544798274937    # e^{-2500} Im Erfi(50+i), 200 digits


class TestSinc:
    def test_removable_singularity(self):
        assert sinc(0.0) == 1.0

    def test_at_pi(self):
        assert abs(sinc(math.pi)) < 1e-16

    def test_at_one(self):
        assert sinc(1.0) == pytest.approx(SIN_1, rel=1e-15)

    def test_taylor_seam(self):
        # both branches must agree with sin(x)/x across the switch point
        xs = np.linspace(1e-3, 2e-2, 211)
        exact = np.sin(xs) / xs
        assert np.max(np.abs(sinc(xs) - exact)) < 3e-16

    @given(st.floats(min_value=-1e8, max_value=1e8))
    @settings(max_examples=300, deadline=None)
    def test_even_bounded_sin_identity(self, x):
        v = sinc(x)
        assert v == sinc(-x)
        assert abs(v) <= 1.0 + 1e-16
        assert abs(v * x - math.sin(x)) <= 4e-16 * max(1.0, abs(x) * 0.0 + 1.0)

    def test_vectorized(self):
        xs = np.array([0.0, 1.0, math.pi])
        out = sinc(xs)
        assert out.shape == (3,)
        assert out[0] == 1.0

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            sinc(float("nan"))


class TestEdiff:
    def test_mu_zero_limit(self):
        assert ediff(0.0, 1.0, 0.0) == 1j

    def test_empty_interval(self):
        assert ediff(2.0, 2.0, 3.7) == 0.0

    def test_full_period(self):
        # (e^{2 pi i} - 1)/pi = 0
        assert abs(ediff(0.0, 2.0, math.pi)) < 1e-15

    def test_continuity_at_zero(self):
        h = 1e-8
        lim = 1j * 1.0
        assert abs(ediff(0.0, 1.0, h) - lim) < 1e-7
        assert abs(ediff(0.0, 1.0, h) - ediff(0.0, 1.0, -h)) < 3e-8

    @given(
        st.floats(min_value=-5.0, max_value=5.0),
        st.floats(min_value=1e-3, max_value=10.0),
        st.floats(min_value=0.5, max_value=50.0),
        st.booleans(),
    )
    @settings(max_examples=200, deadline=None)
    def test_matches_direct_quotient(self, a, width, mu, flip):
        b = a + width
        mu = -mu if flip else mu
        direct = (np.exp(1j * mu * b) - np.exp(1j * mu * a)) / mu
        assert abs(ediff(a, b, mu) - direct) <= 1e-13 * max(1.0, abs(direct))

    def test_vectorized_over_mu(self):
        mus = np.array([0.0, 1.0, -2.0])
        out = ediff(0.0, 1.0, mus)
        assert out.shape == (3,)
        assert out[0] == 1j

    def test_rejects_reversed_interval(self):
        with pytest.raises(ValueError):
            ediff(1.0, 0.0, 1.0)


class TestFaddeevaW:
    def test_at_zero(self):
        assert faddeeva_w(0.0) == pytest.approx(1.0, abs=1e-15)

    def test_at_i(self):
        assert faddeeva_w(1j) == pytest.approx(E_ERFC_1, rel=1e-13)

    def test_far_point(self):
        w = faddeeva_w(10.0 + 10.0j)
        assert abs(w) <= 1.0
        assert w == pytest.approx(W_10_10I, rel=1e-12)

    def test_oracle_grid(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40
        rng = np.random.default_rng(42)
        pts = rng.uniform(-30.0, 30.0, size=(100, 2))
        pts[:, 1] = np.abs(pts[:, 1])
        for re, im in pts:
            z = mp.mpc(re, im)
            ref = complex(mp.e ** (-z * z) * mp.erfc(-1j * z))
            got = faddeeva_w(complex(re, im))
            assert abs(got - ref) <= 1e-12 * abs(ref)

    def test_bounded_on_upper_half_plane(self):
        rng = np.random.default_rng(1234)
        scales = 10.0 ** rng.uniform(-3, 3, size=10_000)
        angles = rng.uniform(0.0, math.pi, size=10_000)
        z = scales * np.exp(1j * angles)
        assert np.all(np.abs(faddeeva_w(z)) <= 1.0)

    def test_rejects_lower_half_plane(self):
        with pytest.raises(ValueError):
            faddeeva_w(1.0 - 0.1j)


class TestDampedImErfi:
    def test_real_axis_is_zero(self):
        for x in (0.0, 0.5, 3.0, 50.0, 500.0):
            assert damped_im_erfi(x, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_imaginary_axis_is_erf(self):
        for y in (0.1, 0.9, 2.5):
            assert damped_im_erfi(0.0, y) == pytest.approx(math.erf(y), rel=1e-13)

    def test_large_x_matches_high_precision(self):
        assert damped_im_erfi(50.0, 1.0) == pytest.approx(DIM_ERFI_50_1, rel=1e-10)

    def test_identity_against_mpmath(self):
        # the overflow-safe identity must reproduce the direct definition
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 60
        rng = np.random.default_rng(5)
        for _ in range(40):
            x = 10.0 ** rng.uniform(-2, 2.2)
            y = 10.0 ** rng.uniform(-2, 1)
            ref = float(mp.e ** (-mp.mpf(x) ** 2)
                        * mp.im(mp.erfi(mp.mpf(x) + 1j * mp.mpf(y))))
            got = damped_im_erfi(x, y)
            assert got == pytest.approx(ref, rel=1e-11, abs=1e-15)

    def test_boundedness_envelope(self):
        rng = np.random.default_rng(6)
        x = 10.0 ** rng.uniform(-3, 3, size=2000)
        y = 10.0 ** rng.uniform(-3, 2, size=2000)
        v = damped_im_erfi(x, y)
        assert np.all(np.abs(v) <= np.exp(-x * x) + np.exp(-y * y) + 1e-12)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            damped_im_erfi(-0.1, 1.0)
        with pytest.raises(ValueError):
            damped_im_erfi(1.0, -0.1)
