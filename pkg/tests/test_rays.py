import numpy as np
import pytest

from scatter_lab.src.experiments import build_chain, load_model
from scatter_lab.src.geometry import Box, Disk, DomainChain, Grid, Union, build_speed_model, homogeneous_model
from scatter_lab.src.rays import (
    Crossing,
    LayeredMedium,
    Pulse,
    broken_exponential,
    dt_symbol,
    interface_coefficients,
    regularity_check,
    trace_geodesic,
    trace_normal_geodesic,
    transmission_factor,
)
from scatter_lab.src.rays.ray_path import COMPLETE, TIR
from scatter_lab.src.rays.regularity import DEMI_TANGENT, FOCAL, FOCAL_TOLERANCE, MULTIPATH, ON_INTERFACE, REGULAR
from scatter_lab.src.wave import CauchyPair, Medium, propagate
from scatter_lab.validation.exceptions import ConfigSchemaError, GrazingAngle, TIRTermination


def normal_incidence(c1, c2):
    return 2.0 * np.sqrt(c1 * c2) / (c1 + c2)


class TestTracer:
    def test_snell_law_at_flat_interface(self, two_layer_2d):
        path = trace_geodesic(two_layer_2d, [0.0, 0.5], [0.3, -1.0], 1.2)
        assert path.termination == COMPLETE
        assert len(path.crossings) == 1
        crossing = path.crossings[0]
        assert crossing.point[1] == pytest.approx(-0.3)
        assert crossing.snell_residual() < 1e-12
        assert crossing.beta > crossing.alpha
        assert path.duration == pytest.approx(1.2)

    def test_normal_incidence_times(self, two_layer_2d):
        path = trace_geodesic(two_layer_2d, [0.0, 0.5], [0.0, -1.0], 1.2)
        assert path.crossing_times() == [pytest.approx(0.8)]
        np.testing.assert_allclose(path.endpoint, [0.0, -1.1], atol=1e-12)
        assert dt_symbol(path) == pytest.approx(normal_incidence(1.0, 2.0))

    def test_total_internal_reflection(self, two_layer_2d):
        path = trace_geodesic(two_layer_2d, [0.0, 0.5], [1.0, -1.0], 1.2)
        assert path.termination == TIR
        with pytest.raises(TIRTermination):
            dt_symbol(path)

    def test_oblique_transmission_factor(self, two_layer_2d):
        path = trace_geodesic(two_layer_2d, [0.0, 0.5], [0.3, -1.0], 1.2)
        a, b = path.crossings[0].alpha, path.crossings[0].beta
        cot_a, cot_b = 1.0 / np.tan(a), 1.0 / np.tan(b)
        assert dt_symbol(path) == pytest.approx(2.0 * np.sqrt(cot_a * cot_b) / (cot_a + cot_b))
        assert dt_symbol(path) < normal_incidence(1.0, 2.0)

    def test_inclusion_crossed_twice(self, disk_inclusion_2d):
        path = trace_geodesic(disk_inclusion_2d, [0.0, 0.5], [0.0, -1.0], 1.5)
        assert path.crossing_times() == [pytest.approx(0.8), pytest.approx(1.2)]
        assert dt_symbol(path) == pytest.approx(normal_incidence(1.0, 1.5) ** 2)

    def test_grazing_crossing_rejected(self):
        crossing = Crossing(0, np.zeros(2), 0.5, np.pi / 2 - 1e-5, np.pi / 2 - 1e-5, 1.0, 1.0)
        with pytest.raises(GrazingAngle):
            transmission_factor(crossing)

    def test_normal_geodesic_and_exponential(self, two_layer_2d):
        omega = Box((-1.0, -1.0), (1.0, 0.0))
        path = trace_normal_geodesic(two_layer_2d, omega, [0.0, 0.0], 0.5)
        assert path.crossing_times() == [pytest.approx(0.3)]
        np.testing.assert_allclose(broken_exponential(two_layer_2d, omega, [0.0, 0.0], 0.5), [0.0, -0.7], atol=1e-9)

    def test_reversed_path_swaps_angles(self, two_layer_2d):
        path = trace_geodesic(two_layer_2d, [0.0, 0.5], [0.3, -1.0], 1.2)
        back = path.reversed()
        assert back.crossings[0].alpha == path.crossings[0].beta
        np.testing.assert_allclose(back.endpoint, path.vertices[0][0])


class TestLayeredMedium:
    def test_coefficients_conserve_energy(self):
        coeff = interface_coefficients(1.0, 2.0)
        assert coeff.transmission == pytest.approx(4.0 / 3.0)
        assert coeff.reflection == pytest.approx(1.0 / 3.0)
        assert coeff.energy_transmission == pytest.approx(8.0 / 9.0)
        assert coeff.energy_transmission + coeff.energy_reflection == pytest.approx(1.0)

    def test_from_model_and_travel_time(self, two_layer_1d):
        layers = LayeredMedium.from_model(two_layer_1d)
        assert layers.interfaces == [0.3]
        assert layers.speeds == [1.0, 2.0]
        assert layers.travel_time(0.0, 1.3) == pytest.approx(0.8)

    def test_pulse_splits_at_interface(self, two_layer_1d):
        layers = LayeredMedium.from_model(two_layer_1d)
        reflected, transmitted = layers.propagate([Pulse(0.0, 1, 1.0)], 0.5)
        assert reflected.position == pytest.approx(0.1)
        assert reflected.amplitude == pytest.approx(1.0 / 3.0)
        assert transmitted.position == pytest.approx(0.7)
        assert transmitted.amplitude == pytest.approx(4.0 / 3.0)
        energy = reflected.amplitude ** 2 / 1.0 + transmitted.amplitude ** 2 / 2.0
        assert energy == pytest.approx(1.0)

    def test_finite_differences_match_pulse_amplitudes(self, two_layer_1d):
        grid = Grid.from_extent([[-0.2, 0.8]], 1.0 / 512)
        medium = Medium.from_model(two_layer_1d, grid)
        x = grid.coords[0]
        sigma, x0, t = 0.02, 0.1, 0.35
        g = np.where(np.abs(x - x0) < 6.0 * sigma, np.exp(-0.5 * ((x - x0) / sigma) ** 2), 0.0)
        u = propagate(medium, CauchyPair(g, (x - x0) / sigma ** 2 * g, medium), t).h0
        pulses = LayeredMedium.from_model(two_layer_1d).propagate([Pulse(x0, 1, 1.0)], t)
        assert [p.history for p in pulses] == [("R",), ("T",)]
        for pulse in pulses:
            window = np.abs(x - pulse.position) < 0.1
            peak = np.argmax(np.abs(u[window]))
            assert u[window][peak] == pytest.approx(pulse.amplitude, rel=0.02)
            assert x[window][peak] == pytest.approx(pulse.position, abs=0.01)

    def test_arrivals(self, two_layer_1d):
        layers = LayeredMedium.from_model(two_layer_1d)
        time, amplitude, history = layers.arrivals(0.0, 1, 1.3, 1.0)[0]
        assert time == pytest.approx(0.8)
        assert amplitude == pytest.approx(4.0 / 3.0)
        assert history == ("T",)

    def test_speed_count_checked(self):
        with pytest.raises(ConfigSchemaError):
            LayeredMedium(interfaces=[0.3], speeds=[1.0])


class TestRegularity:
    @pytest.fixture
    def disk_setup(self, bundled):
        config = bundled('regularity_disk_2d.yaml')
        model = load_model(config)
        return model, build_chain(config, model)

    def test_point_above_inclusion_is_regular(self, disk_setup):
        model, chain = disk_setup
        report = regularity_check(model, chain, [0.0, -0.15])
        assert report.classification == REGULAR
        assert report.depth == pytest.approx(0.15, abs=0.03)
        assert abs(report.determinant) > 0.1

    def test_point_on_rim(self, disk_setup):
        model, chain = disk_setup
        assert regularity_check(model, chain, [0.0, -0.3]).classification == ON_INTERFACE

    def test_disk_centre_is_multipath(self):
        extent = [[-1.5, 1.5], [-1.5, 1.5]]
        model = homogeneous_model(2, 1.0, extent=extent)
        chain = regularity_chain(model, Disk([0.0, 0.0], 0.5), Disk([0.0, 0.0], 0.8), extent)
        report = regularity_check(model, chain, [0.0, 0.0], max_samples=512)
        assert report.classification == MULTIPATH
        assert len(report.arrivals) > 10
        for arrival in report.arrivals:
            assert arrival.time == pytest.approx(0.5, abs=1e-6)

    def test_centre_of_short_arc_is_focal(self):
        # a cap of the circle |x| = 0.5 narrower than 5h is the only part of the boundary at distance 0.5
        extent = [[-1.5, 1.5], [-1.5, 1.5]]
        model = homogeneous_model(2, 1.0, extent=extent)
        half_width = 0.03
        top = float(np.sqrt(0.25 - half_width ** 2))
        omega = Union([Disk([0.0, 0.0], 0.5), Box([-0.8, -0.8], [0.8, top])])
        chain = regularity_chain(model, omega, Box([-1.0, -1.0], [1.0, 0.8]), extent)
        report = regularity_check(model, chain, [0.0, 0.0], max_samples=512)
        assert report.classification == FOCAL
        assert abs(report.determinant) < FOCAL_TOLERANCE
        assert max(abs(a.p[0]) for a in report.arrivals) <= half_width + 1e-9

    def test_point_behind_slow_lens_is_demi_tangent(self):
        # the normal ray crosses the slow disk; first arrivals go around it
        extent = [[-2.0, 2.0], [-3.0, 0.5]]
        model = build_speed_model({
            'dim': 2,
            'extent': extent,
            'bounds': {'c_min': 0.7, 'c_max': 1.0},
            'regions': [
                {'name': 'lens', 'indicator': {'type': 'disk', 'center': [0.0, -0.5], 'radius': 0.4}, 'speed': 0.7},
                {'name': 'background', 'indicator': {'type': 'rest'}, 'speed': 1.0},
            ],
            'interfaces': [{'type': 'circle', 'center': [0.0, -0.5], 'radius': 0.4}],
        })
        omega = Box([-1.6, -2.6], [1.6, 0.0])
        chain = regularity_chain(model, omega, Box([-1.8, -2.8], [1.8, 0.3]), extent, spacing=0.01)
        report = regularity_check(model, chain, [0.0, -1.0], max_samples=512)
        assert report.classification == DEMI_TANGENT
        normal_time = 0.2 + 0.8 / 0.7
        assert min(a.time for a in report.arrivals) == pytest.approx(normal_time, abs=1e-3)
        assert report.depth < normal_time - 0.1


def regularity_chain(model, omega, theta, extent, spacing=0.02):
    grid = Grid.from_extent(extent, spacing)
    return DomainChain(omega=omega, theta=theta, grid=grid).validate(model)
