import numpy as np
import pytest

from scatter_lab.src.control import adt_ground_truth
from scatter_lab.src.experiments import build_experiment
from scatter_lab.src.geometry import Disk, DomainChain, Grid, Interval, homogeneous_model, shrink_sequence
from scatter_lab.src.recon import (
    HarmonicPair,
    ReconstructedChart,
    build_chart,
    reconstruct_point,
    reconstruct_speed,
    redatum,
    two_stage_reconstruction,
)
from scatter_lab.src.recon.kappa import (
    ChartSample,
    check_harmonic,
    coordinate_probes,
    kappa,
    source_density,
)
from scatter_lab.src.recon.redatum import redatum_experiment, speed_patch_from_chart
from scatter_lab.src.packets.packets import bump
from scatter_lab.src.wave import CauchyPair, Experiment
from scatter_lab.src.wave.cauchy import kinetic_form
from scatter_lab.validation.exceptions import (
    ChainContainmentError,
    GridMismatch,
    GridTooCoarse,
    InsufficientSamples,
    NotHarmonic,
    ReconstructionError,
    SpeedMissing,
)


class TestHarmonicFields:
    def test_coordinate_fields_are_harmonic(self, grid_2d):
        probes = coordinate_probes(grid_2d)
        assert len(probes) == 3
        for f in probes:
            check_harmonic(grid_2d, f)

    def test_quadratic_is_rejected(self, grid_2d):
        x, y = grid_2d.coords
        check_harmonic(grid_2d, x * x - y * y)
        with pytest.raises(NotHarmonic):
            HarmonicPair.velocity(grid_2d, x * x + y * y)

    def test_kappa_checks_harmonicity(self, homogeneous_experiment_1d):
        x = homogeneous_experiment_1d.grid.coords[0]
        g = np.zeros_like(x)
        with pytest.raises(NotHarmonic):
            kappa(homogeneous_experiment_1d, Interval(-0.2, 1.0), g, x ** 2, 0.1)
        assert kappa(homogeneous_experiment_1d, Interval(-0.2, 1.0), g, x, 0.1) == 0.0


class TestSourceDensity:
    def test_supported_between_omega_and_theta_j(self, homogeneous_chain_1d):
        theta_j = Interval(-0.2, 1.0)
        g = source_density(homogeneous_chain_1d, theta_j)
        x = homogeneous_chain_1d.grid.coords[0]
        assert g.max() == pytest.approx(1.0)
        assert not np.any(g[(x > 0.0) | (x <= -0.2)])
        assert np.all(g >= 0.0)


class TestSpeedProfile:
    def test_straight_ray_speed(self):
        times = np.linspace(0.1, 0.4, 4)
        points = np.stack([1.5 * times * np.cos(0.3), 1.5 * times * np.sin(0.3)], axis=-1)
        profile = reconstruct_speed(times, points, 1.0, 2.0)
        np.testing.assert_allclose(profile.speeds, 1.5)
        assert not profile.flagged.any()

    def test_out_of_bounds_speeds_flagged(self):
        times = [0.1, 0.2, 0.3]
        profile = reconstruct_speed(times, [[0.2], [0.4], [0.6]], 1.0, 1.5)
        np.testing.assert_allclose(profile.speeds, 2.0)
        assert profile.flagged.all()

    def test_sample_straddling_interface_flagged(self):
        times = np.linspace(0.1, 0.6, 11)
        depth = np.where(times <= 0.3, times, 0.3 + 2.0 * (times - 0.3))
        profile = reconstruct_speed(times, depth[:, None], 1.0, 2.0)
        np.testing.assert_allclose(profile.speeds[:4], 1.0)
        np.testing.assert_allclose(profile.speeds[5:], 2.0)
        assert np.flatnonzero(profile.flagged).tolist() == [4]

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamples):
            reconstruct_speed([0.1, 0.2], [[0.1], [0.2]])

    def test_times_must_increase(self):
        with pytest.raises(ReconstructionError):
            reconstruct_speed([0.1, 0.3, 0.2], [[0.1], [0.3], [0.2]])

    def test_chart_rows_and_profiles(self):
        chart = ReconstructedChart([
            ChartSample(p_index=0, p=np.zeros(1), T=t, y=np.array([t]), c_est=1.0, j_max=3, K=8)
            for t in (0.3, 0.1, 0.2)
        ])
        assert chart.header() == ["p_index", "T", "y0", "c_est", "flagged", "j_max", "K", "residual"]
        assert [row[1] for row in chart.rows()] == [0.1, 0.2, 0.3]
        np.testing.assert_allclose(chart.profiles()[0].times, [0.1, 0.2, 0.3])


class TestPointReconstruction:
    def test_homogeneous_depth_below_boundary_point(self, homogeneous_experiment_1d):
        T = 0.1
        estimate = reconstruct_point(homogeneous_experiment_1d, [0.0], T, j_max=3, K=6)
        assert estimate.j_max == 3
        errors = [abs(float(y[0]) - T) for y in estimate.points]
        assert errors[-1] < errors[0]
        assert errors[-1] < 0.05

    def test_grid_too_coarse_for_shrinking(self, homogeneous_experiment_1d):
        with pytest.raises(GridTooCoarse):
            reconstruct_point(homogeneous_experiment_1d, [0.0], 0.1, j_max=8)


class TestRedatum:
    def test_missing_speed_between_regions(self, homogeneous_experiment_1d):
        with pytest.raises(SpeedMissing):
            redatum_experiment(homogeneous_experiment_1d, Interval(0.3, 1.0), None)

    def test_region_must_lie_inside_omega(self, homogeneous_experiment_1d):
        with pytest.raises(ChainContainmentError):
            redatum_experiment(homogeneous_experiment_1d, Interval(-0.4, 1.4), None)

    def test_redatumed_experiment_keeps_model(self, two_layer_experiment_1d, two_layer_1d):
        experiment = two_layer_experiment_1d
        second = redatum_experiment(experiment, Interval(0.5, 1.5), experiment.truth.speed)
        assert second.model is two_layer_1d
        assert (second.model.c_min, second.model.c_max) == (1.0, 2.0)
        assert second.chain.hidden_mask.sum() < experiment.chain.hidden_mask.sum()

    def test_patch_shape_checked(self, homogeneous_experiment_1d):
        with pytest.raises(GridMismatch):
            redatum_experiment(homogeneous_experiment_1d, Interval(0.3, 1.0), np.ones(5))

    def test_redatumed_view_agrees_with_original(self, homogeneous_experiment_1d):
        experiment = homogeneous_experiment_1d
        x = experiment.grid.coords[0]
        profile = bump(np.abs(x + 0.25) / 0.15)
        h = CauchyPair(profile, np.zeros_like(profile), experiment.truth)
        original = experiment.observe(h, 0.2)
        shifted = redatum(experiment, Interval(0.3, 1.0), experiment.truth.speed, h, 0.2)
        visible = ~experiment.chain.hidden_mask
        np.testing.assert_array_equal(shifted.read(-1).h0[visible], original.read(-1).h0[visible])
        assert shifted.hidden.sum() < original.hidden.sum()

    def test_speed_patch_skips_flagged_samples(self):
        grid = Grid.from_extent([[0.0, 1.0]], 0.1)
        chart = ReconstructedChart([
            ChartSample(p_index=0, p=np.zeros(1), T=0.1, y=np.array([0.2]), c_est=1.0),
            ChartSample(p_index=0, p=np.zeros(1), T=0.2, y=np.array([0.6]), c_est=9.0, flagged=True),
            ChartSample(p_index=0, p=np.zeros(1), T=0.3, y=np.array([0.9]), c_est=1.0),
        ])
        mask = grid.coords[0] > 0.45
        patch = speed_patch_from_chart(chart, grid, mask)
        np.testing.assert_allclose(patch[mask], 1.0)
        assert np.all(np.isnan(patch[~mask]))


@pytest.fixture
def interface_experiment(layered_experiment):
    """Slow layer down to 0.3 over a fast half-line, all of it below the boundary point 0."""
    return layered_experiment([0.3], [1.0, 2.0], (-1.3, 3.9), 0.005,
                              omega=(0.0, 1.6), theta=(-0.2, 1.8), t_max=0.5)


def fit_line(samples):
    slope, intercept = np.polyfit([s.T for s in samples], [float(s.y[0]) for s in samples], 1)
    return slope, intercept


class TestKappa:
    def test_kappa_is_linear_in_source(self, homogeneous_experiment_1d):
        experiment = homogeneous_experiment_1d
        theta_j = Interval(-0.1, 1.0)
        x = experiment.grid.coords[0]
        g1 = source_density(experiment.chain, theta_j)
        g2 = np.where(g1 > 0.0, bump(np.abs(x + 0.05) / 0.03), 0.0)
        values = [
            kappa(experiment, theta_j, g, x, 0.1, K=4, early_stop=False)
            for g in (g1, g2, 2.0 * g1 - 3.0 * g2)
        ]
        assert values[2] == pytest.approx(2.0 * values[0] - 3.0 * values[1], rel=1e-8, abs=1e-12)

    def test_kappa_matches_glass_box_transmission(self, homogeneous_experiment_1d):
        experiment = homogeneous_experiment_1d
        theta_j = Interval(-0.1, 1.0)
        g = bump(np.abs(experiment.grid.coords[0] + 0.05) / 0.03)
        ones = np.ones(experiment.grid.shape)
        local = experiment.with_theta(theta_j)
        h0 = CauchyPair(experiment.grid.zeros(), g, experiment.truth)
        transmitted = adt_ground_truth(local, h0, 0.1)
        direct = kinetic_form(transmitted.medium, transmitted.h1, ones)
        assert direct > 0.0
        assert kappa(experiment, theta_j, g, ones, 0.1) == pytest.approx(direct, rel=0.02)


class TestLayeredReconstruction:
    def test_chart_through_interface(self, interface_experiment):
        times = np.round(np.arange(0.1, 0.451, 0.05), 10)
        chart = build_chart(interface_experiment, [[0.0]], times, j_max=1, eps_1=0.05)
        samples = chart.along(0)
        assert [s.T for s in samples] == pytest.approx(times.tolist())
        flagged = [s.T for s in samples if s.flagged]
        assert flagged == pytest.approx([0.3, 0.35])

        slow = [s for s in samples if not s.flagged and s.T < 0.3]
        fast = [s for s in samples if not s.flagged and s.T > 0.35]
        assert len(slow) == 4 and len(fast) == 2
        for s in slow:
            assert s.c_est == pytest.approx(1.0, rel=0.07)
        for s in fast:
            assert s.c_est == pytest.approx(2.0, rel=0.07)

        (a1, b1), (a2, b2) = fit_line(slow), fit_line(fast)
        crossing = (b1 - b2) / (a2 - a1)
        assert a1 * crossing + b1 == pytest.approx(0.3, abs=3 * interface_experiment.grid.spacing)

    def test_two_stage_recovers_deep_layer(self, interface_experiment):
        result = two_stage_reconstruction(
            interface_experiment, [0.0], [0.1, 0.15, 0.2, 0.25],
            Interval(0.3, 1.6), [0.3], [0.05, 0.1, 0.15, 0.2],
            j_max=1, eps_1=0.05,
        )
        shell = interface_experiment.chain.omega_mask & ~Interval(0.3, 1.6).mask(interface_experiment.grid)
        np.testing.assert_allclose(result.patch[shell], 1.0, rtol=0.07)
        deep = [s for s in result.deep.along(0) if not s.flagged]
        assert len(deep) >= 3
        for s in deep:
            assert s.c_est == pytest.approx(2.0, rel=0.07)
            assert s.y[0] > 0.3


@pytest.mark.slow
class TestDiskReconstruction:
    def test_point_below_disk_boundary(self):
        extent = [[-2.2, 2.2], [-2.2, 2.2]]
        model = homogeneous_model(2, 1.0, extent=extent)
        grid = Grid.from_extent(extent, 0.02)
        chain = DomainChain(omega=Disk([0.0, 0.0], 1.0), theta=Disk([0.0, 0.0], 1.2), grid=grid, t_max=0.45)
        experiment = Experiment.from_model(model, chain.validate(model))

        chart = build_chart(experiment, [[1.0, 0.0]], [0.15, 0.3, 0.45], j_max=3, eps_1=0.25)
        middle = chart.along(0)[1]
        assert middle.j_max == 3
        np.testing.assert_allclose(middle.y, [0.7, 0.0], atol=2 * grid.spacing + 0.0625)
        assert middle.c_est == pytest.approx(1.0, rel=0.05)


class TestBundledReconstructConfig:
    def test_shrinking_fits_the_grid(self, bundled):
        config = bundled('reconstruct_homogeneous_2d.yaml')
        experiment = build_experiment(config)
        section = config.reconstruct
        regions = shrink_sequence(experiment.chain, section.points[0], section.j_max, eps_1=section.eps_1)
        assert len(regions) == section.j_max
