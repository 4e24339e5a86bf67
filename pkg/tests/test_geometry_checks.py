import numpy as np
import pytest

from cforge import (
    FourierCurve,
    PipelineConfig,
    PlaneTransform,
    boundary_deviation,
    render_polar_net,
    smooth_map,
    univalence_check,
)
from cforge.errors import InputError
from cforge.pipelines import ComposedMap
from cforge.reparam_solver import PolynomialMap


def identity_map():
    return ComposedMap(
        stages=(), core=PolynomialMap(coeffs=[0.0, 1.0], neg_residual=0.0)
    )


class TestBoundaryDeviation:
    def test_identity_on_circle(self, unit_circle):
        rep = boundary_deviation(identity_map(), unit_circle, grid=256)
        assert rep.sup_deviation < 1e-12
        assert rep.mean_deviation <= rep.sup_deviation
        assert rep.univalence_winding == 0

    def test_quadratic_self_consistency(self, quadratic_curve):
        cm = smooth_map(PipelineConfig(boundary=quadratic_curve, M=32, P=256, D=8))
        rep = boundary_deviation(cm, quadratic_curve, grid=512)
        assert rep.sup_deviation < 1e-8
        assert rep.monotone_theta

    def test_callable_target(self, unit_circle):
        rep = boundary_deviation(
            identity_map(), lambda s: np.exp(1j * np.asarray(s)), grid=256
        )
        assert rep.sup_deviation < 1e-3  # parametric target: grid-limited only

    def test_known_offset(self):
        # map = circle of radius 1.1 vs unit circle target: deviation 0.1
        cm = ComposedMap(
            stages=(), core=PolynomialMap(coeffs=[0.0, 1.1], neg_residual=0.0)
        )
        rep = boundary_deviation(cm, FourierCurve((1,), (1.0,)), grid=256)
        assert rep.sup_deviation == pytest.approx(0.1, abs=1e-10)
        assert rep.mean_deviation == pytest.approx(0.1, abs=1e-10)

    def test_grid_minimum(self, unit_circle):
        with pytest.raises(InputError):
            boundary_deviation(identity_map(), unit_circle, grid=128)

    def test_threads_env(self, unit_circle, monkeypatch):
        monkeypatch.setenv("CFORGE_THREADS", "2")
        rep = boundary_deviation(identity_map(), unit_circle, grid=2048)
        assert rep.sup_deviation < 1e-12


class TestUnivalence:
    def test_identity(self):
        core = PolynomialMap(coeffs=[0.0, 1.0], neg_residual=0.0)
        assert univalence_check(core, 256) == 0

    def test_zero_inside(self):
        core = PolynomialMap(coeffs=[0.0, 1.0, 0.6], neg_residual=0.0)
        assert univalence_check(core, 256) == 1

    def test_zero_outside(self):
        core = PolynomialMap(coeffs=[0.0, 1.0, 0.3], neg_residual=0.0)
        assert univalence_check(core, 256) == 0

    def test_zero_on_circle_inconclusive(self):
        # Z' = 1 + 2 zeta + zeta^2 vanishes at zeta = -1 exactly
        core = PolynomialMap(
            coeffs=[0.0, 1.0, 1.0, 1.0 / 3.0], neg_residual=0.0
        )
        with pytest.raises(InputError):
            univalence_check(core, 256)

    def test_grid_guard(self):
        core = PolynomialMap(coeffs=[0.0, 1.0, 0.0, 0.0, 0.5], neg_residual=0.0)
        with pytest.raises(InputError):
            univalence_check(core, 16)


class TestRenderer:
    def test_path_count(self):
        svg = render_polar_net(identity_map(), spokes=8, circles=4, samples=64)
        assert svg.count("<polyline") == 8 + 4 + 1

    def test_deterministic(self, quadratic_curve):
        cm = smooth_map(PipelineConfig(boundary=quadratic_curve, M=16, P=128, D=8))
        a = render_polar_net(cm, spokes=6, circles=3, samples=128)
        b = render_polar_net(cm, spokes=6, circles=3, samples=128)
        assert a == b

    def test_viewbox_covers_image(self):
        svg = render_polar_net(identity_map(), spokes=4, circles=2, samples=64)
        header = svg.split('viewBox="')[1].split('"')[0]
        x0, y0, w, h = (float(v) for v in header.split())
        assert x0 <= -1.0 and x0 + w >= 1.0
        assert y0 <= -1.0 and y0 + h >= 1.0

    def test_truncated_path_annotation(self):
        # second stage rejects points left of Re=4, so most paths truncate
        cm = ComposedMap(
            stages=(
                PlaneTransform("affine", (1.0, -4.0)),
                PlaneTransform("cf_root", (1, 2, 3)),
            ),
            core=PolynomialMap(coeffs=[0.0, 1.0], neg_residual=0.0),
        )
        svg = render_polar_net(cm, spokes=4, circles=2, samples=32)
        assert "data-warning" in svg

    def test_validation(self):
        with pytest.raises(InputError):
            render_polar_net(identity_map(), spokes=0, circles=4)


class TestFigureRegressions:
    """Pinned-config polar nets: any change to solver, renderer or float
    formatting shows up as a hash change here."""

    def test_piecewise_circular_smooth_figure(self):
        import hashlib

        from cforge import PipelineConfig, fit_from_samples, smooth_map

        from contours import three_semicircle_contour

        t = 2 * np.pi * np.arange(8192) / 8192
        samples = three_semicircle_contour(t)[::32]
        curve = fit_from_samples(samples, 10, 10)
        cm = smooth_map(PipelineConfig(boundary=curve, M=64, P=512, D=50))
        svg = render_polar_net(cm, spokes=8, circles=4, samples=256)
        digest = hashlib.sha256(svg.encode()).hexdigest()
        assert digest == (
            "89d7a198094d6a4158445f851f1883f46f304215ad482390b294806f4f44e35d"
        )

    def test_sector_fraction_figure(self):
        import hashlib

        from cforge import PipelineConfig, corner_map

        from contours import corner_contour

        t = 2 * np.pi * np.arange(4096) / 4096
        cfg = PipelineConfig(
            samples=corner_contour(t, 1, 3),
            corner={"t0": 0.0, "k": 1, "N": 3},
            M=96,
            P=768,
            D=50,
            n_iter=6,
            refit_degree=48,
        )
        cm = corner_map(cfg)
        svg = render_polar_net(cm, spokes=8, circles=4, samples=256)
        digest = hashlib.sha256(svg.encode()).hexdigest()
        assert digest == (
            "dd1a4c94bda1ad9863ef8b3c74850065f45dfb38ddab69dd6e1a93c66ac8f5f0"
        )


def test_deviation_decreases_with_resolution():
    from cforge import PipelineConfig, smooth_map
    from cforge.suites import planted_oracle_curve

    # planted oracle sits at the distance-measurement floor from M=16 on:
    # doubling resolution never degrades it beyond factor-2 noise
    curve = planted_oracle_curve()
    devs = []
    for M, D in ((16, 8), (32, 16), (64, 32)):
        cm = smooth_map(PipelineConfig(boundary=curve, M=M, P=8 * M, D=D))
        devs.append(boundary_deviation(cm, curve, grid=512).sup_deviation)
    for d0, d1 in zip(devs, devs[1:]):
        assert d1 <= 2.0 * d0

    # the slender ellipse is resolution-limited, so there the decrease
    # is strict
    from contours import ellipse_curve

    ell = ellipse_curve()
    devs = []
    for M in (32, 64, 128):
        cm = smooth_map(PipelineConfig(boundary=ell, M=M, P=8 * M, D=4 * M))
        devs.append(boundary_deviation(cm, ell, grid=512).sup_deviation)
    assert devs[2] < devs[1] < devs[0]
