import math

import numpy as np
import pytest
from scipy.integrate import quad

from cforge import (
    CornerGapQuery,
    FourierCurve,
    corner_gap_F,
    curvature,
    derivative_curve,
    eval_curve,
    fit_from_samples,
    load_curve,
    save_curve,
    unwrap_arg,
)
from cforge.errors import FitError, InputError, WindingError

from contours import three_semicircle_contour


class TestEvalCurve:
    def test_unit_circle(self, unit_circle):
        assert eval_curve(unit_circle, np.pi / 2) == pytest.approx(1j, abs=1e-15)

    def test_sum_at_zero(self):
        curve = FourierCurve((-1, 1), (0.5, 1.0))
        assert eval_curve(curve, 0.0) == pytest.approx(1.5)

    def test_ellipse_quarter_turn(self):
        a, b = 1.0, 0.25
        curve = FourierCurve((-1, 1), ((a - b) / 2, (a + b) / 2))
        expect = a * math.cos(np.pi / 4) + 1j * b * math.sin(np.pi / 4)
        assert eval_curve(curve, np.pi / 4) == pytest.approx(expect, abs=1e-15)

    def test_periodic(self, quadratic_curve):
        t = 1.234
        assert eval_curve(quadratic_curve, t) == pytest.approx(
            eval_curve(quadratic_curve, t + 2 * np.pi), abs=1e-12
        )

    def test_array_input(self, quadratic_curve):
        t = np.linspace(0, 2 * np.pi, 7)
        vals = eval_curve(quadratic_curve, t)
        assert vals.shape == (7,)
        assert vals[0] == pytest.approx(eval_curve(quadratic_curve, 0.0))


class TestDerivative:
    def test_first_order(self, unit_circle):
        d = derivative_curve(unit_circle, 1)
        assert d.coeffs == {1: 1j}

    def test_second_order(self):
        d = derivative_curve(FourierCurve((2,), (1.0,)), 2)
        assert d.coeffs == {2: -4.0 + 0j}

    def test_negative_index(self):
        d = derivative_curve(FourierCurve((-1, 1), (1.0, 0.5)), 1)
        assert d.coeff(-1) == pytest.approx(-1j)

    def test_constant_dropped(self):
        d = derivative_curve(FourierCurve((0, 1), (3.0, 1.0)), 1)
        assert 0 not in d.coeffs

    def test_matches_finite_differences(self, rng):
        ks = tuple(range(-5, 9))
        cs = tuple(rng.normal(size=len(ks)) + 1j * rng.normal(size=len(ks)))
        curve = FourierCurve(ks, cs)
        d = derivative_curve(curve, 1)
        t = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
        h = 1e-6
        fd = (eval_curve(curve, t + h) - eval_curve(curve, t - h)) / (2 * h)
        assert np.max(np.abs(fd - eval_curve(d, t))) < 1e-7


class TestFit:
    def test_circle_recovery(self):
        t = 2 * np.pi * np.arange(16) / 16
        curve = fit_from_samples(np.exp(1j * t), 0, 1)
        assert curve.coeff(1) == pytest.approx(1.0, abs=1e-14)
        assert curve.coeff(0) == pytest.approx(0.0, abs=1e-14)

    def test_band_limited_exact(self):
        t = 2 * np.pi * np.arange(32) / 32
        z = 1.5 * np.exp(1j * t) + 0.25 * np.exp(-1j * t)
        curve = fit_from_samples(z, 1, 1)
        assert curve.coeff(1) == pytest.approx(1.5, abs=1e-14)
        assert curve.coeff(-1) == pytest.approx(0.25, abs=1e-14)

    def test_random_band_limited_roundtrip(self, rng):
        m, n = 3, 5
        ks = tuple(range(-m, n + 1))
        cs = tuple(rng.normal(size=len(ks)) + 1j * rng.normal(size=len(ks)))
        curve = FourierCurve(ks, cs)
        t = 2 * np.pi * np.arange(m + n + 1) / (m + n + 1)
        refit = fit_from_samples(eval_curve(curve, t), m, n)
        for k in ks:
            assert refit.coeff(k) == pytest.approx(curve.coeff(k), abs=1e-12)

    def test_three_semicircle_deviation_reported(self):
        t = 2 * np.pi * np.arange(256) / 256
        samples = three_semicircle_contour(t)
        curve = fit_from_samples(samples, 10, 10)
        dev = np.max(np.abs(eval_curve(curve, t) - samples))
        # tangent-junction contour: degree-10 fit is decent but not exact
        assert 1e-6 < dev < 0.1

    def test_underdetermined(self):
        with pytest.raises(FitError):
            fit_from_samples(np.array([1.0, 1j, -1.0]), 4, 4)


class TestUnwrapArg:
    def test_unit_circle_grid8(self, unit_circle):
        got = unwrap_arg(unit_circle, 8)
        assert np.allclose(got, np.pi / 4 * np.arange(8), atol=1e-12)

    def test_total_increase(self):
        curve = FourierCurve((1, 2), (2.0, 0.3))
        a = np.asarray(unwrap_arg(curve, 64))
        assert np.all(np.abs(np.diff(a)) < np.pi)
        closing = (np.angle(eval_curve(curve, 0.0)) - a[-1] + np.pi) % (
            2 * np.pi
        ) - np.pi
        assert a[-1] + closing - a[0] == pytest.approx(2 * np.pi, abs=1e-9)

    def test_not_enclosing_origin(self):
        curve = FourierCurve((0, 1), (3.0, 0.5))
        with pytest.raises(WindingError):
            unwrap_arg(curve, 64)

    def test_origin_on_curve(self):
        curve = FourierCurve((0, 1), (1.0, 1.0))  # passes through 0 at t=pi
        with pytest.raises(WindingError):
            unwrap_arg(curve, 64)


def _gap_oracle(n, eps, alpha):
    """Independent quadrature of the corner-gap integrand after u = n t."""

    def g(u):
        if u == 0.0:
            return 0.0
        return (
            math.sin(u / (2 * n)) ** alpha
            * math.cos(alpha * (u / n - math.pi) / 2)
            * math.sin(u)
            / u
        )

    val, _ = quad(g, 0.0, n * eps, epsrel=1e-13, limit=800)
    return 2.0 ** (alpha + 1) * val


class TestCornerGap:
    def test_vanishing_interval(self):
        assert corner_gap_F(CornerGapQuery(5, 1e-9, 1.5)) == pytest.approx(
            0.0, abs=1e-12
        )

    @pytest.mark.parametrize("n", [4, 16, 64])
    def test_bound_above_one(self, n):
        F = corner_gap_F(CornerGapQuery(n, np.pi / (2 * n), 1.5))
        assert F <= np.pi**2 / (4 * n)

    @pytest.mark.parametrize(
        "n,expected",
        [
            (10**3, 0.9042239295145061),
            (10**6, 0.9589182850903566),
            (10**9, 0.9760360921394123),
        ],
    )
    def test_log_exponent_values(self, n, expected):
        # frozen from a 30-digit tanh-sinh quadrature of the same integral
        alpha = 1.0 / math.log(n)
        F = corner_gap_F(CornerGapQuery(n, np.pi / (2 * n), alpha))
        assert F == pytest.approx(expected, abs=1e-10)
        assert F == pytest.approx(_gap_oracle(n, np.pi / (2 * n), alpha), abs=1e-8)

    def test_log_exponent_stays_large(self):
        for n in (10**3, 10**4, 10**6):
            F = corner_gap_F(
                CornerGapQuery(n, np.pi / (2 * n), 1.0 / math.log(n))
            )
            assert F >= 0.5

    def test_decay_for_exponent_above_one(self):
        vals = [
            abs(corner_gap_F(CornerGapQuery(n, np.pi / (2 * n), 1.5)))
            for n in (4, 16, 64, 256)
        ]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-3

    def test_query_validation(self):
        with pytest.raises(InputError):
            CornerGapQuery(0, 0.1, 1.5)
        with pytest.raises(InputError):
            CornerGapQuery(4, 0.0, 1.5)
        with pytest.raises(InputError):
            CornerGapQuery(4, 0.1, 2.0)


class TestCurvature:
    def test_unit_circle(self, unit_circle):
        assert curvature(unit_circle, 0.7) == pytest.approx(1.0)

    def test_circle_radius(self):
        assert curvature(FourierCurve((1,), (5.0,)), 1.3) == pytest.approx(0.2)

    def test_ellipse_end(self):
        a, b = 1.0, 0.25
        curve = FourierCurve((-1, 1), ((a - b) / 2, (a + b) / 2))
        assert curvature(curve, 0.0) == pytest.approx(a / b**2)

    def test_cusp_rejected(self):
        # z = e^{it} + e^{-it} = 2 cos t has z' = 0 at t = 0
        curve = FourierCurve((-1, 1), (1.0, 1.0))
        with pytest.raises(InputError):
            curvature(curve, 0.0)


class TestInvariants:
    def test_parseval(self, rng):
        m, n = 4, 7
        ks = tuple(range(-m, n + 1))
        cs = tuple(rng.normal(size=len(ks)) + 1j * rng.normal(size=len(ks)))
        curve = FourierCurve(ks, cs)
        grid = 2 * (m + n) + 1
        t = 2 * np.pi * np.arange(grid) / grid
        mean_sq = np.mean(np.abs(eval_curve(curve, t)) ** 2)
        assert mean_sq == pytest.approx(sum(abs(c) ** 2 for c in cs), abs=1e-12)

    def test_point_curve_rejected(self):
        with pytest.raises(InputError):
            FourierCurve((0,), (2.0,))

    def test_support_from_keys(self):
        curve = FourierCurve((-3, 0, 2), (1.0, 0.5, 0.25))
        assert curve.m == 3 and curve.n == 2

    def test_zero_inside_support_allowed(self):
        curve = FourierCurve((-2, 1), (0.0, 1.0))
        assert curve.m == 2  # stored key defines the support


class TestPersistence:
    def test_csv_roundtrip(self, tmp_path, quadratic_curve):
        path = tmp_path / "curve.csv"
        save_curve(quadratic_curve, str(path))
        again = load_curve(str(path))
        assert again.coeffs == quadratic_curve.coeffs

    def test_json_roundtrip(self, tmp_path):
        curve = FourierCurve((-2, 1, 5), (0.5j, 1.0, 0.125 - 0.25j))
        path = tmp_path / "curve.json"
        save_curve(curve, str(path))
        again = load_curve(str(path))
        for k in curve.ks:
            assert again.coeff(k) == pytest.approx(curve.coeff(k), abs=1e-16)

    def test_malformed_csv(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(InputError):
            load_curve(str(path))


def test_derivative_high_degree_grid_bound(rng):
    # degree-32 curve with decaying coefficients: coefficient-wise derivative
    # matches central differences to 1e-8 on a 1024-point grid
    ks = tuple(range(-32, 33))
    cs = tuple(
        (0.5 ** abs(k)) * np.exp(2j * np.pi * rng.uniform()) for k in ks
    )
    curve = FourierCurve(ks, cs)
    d = derivative_curve(curve, 1)
    t = 2 * np.pi * np.arange(1024) / 1024
    h = 1e-5
    fd = (eval_curve(curve, t + h) - eval_curve(curve, t - h)) / (2 * h)
    assert np.max(np.abs(fd - eval_curve(d, t))) <= 1e-8
