import numpy as np
import pytest

from scatter_lab.src.geometry import Interval
from scatter_lab.src.packets.packets import bump
from scatter_lab.src.wave import (
    CauchyPair,
    Medium,
    energy,
    energy_inner_product,
    kinetic_energy,
    potential_energy,
    propagate,
    run,
    stable_dt,
    time_reverse,
)
from scatter_lab.src.wave.solver import LeapfrogStepper, time_steps
from scatter_lab.validation.exceptions import (
    AccessViolation,
    CFLViolation,
    GridMismatch,
    SupportViolation,
    WaveError,
)


def bump_pair(medium, center, radius, velocity=False):
    x = medium.grid.coords[0]
    profile = bump(np.abs(x - center) / radius)
    profile[medium.grid.boundary_mask] = 0.0
    zero = np.zeros_like(profile)
    return CauchyPair(zero, profile, medium) if velocity else CauchyPair(profile, zero, medium)


class TestCauchyData:
    def test_displacement_must_vanish_on_boundary(self, grid_1d):
        medium = Medium.constant(grid_1d)
        h0 = np.ones(grid_1d.shape)
        with pytest.raises(SupportViolation):
            CauchyPair(h0, np.zeros(grid_1d.shape), medium)

    def test_grid_mismatch(self, grid_1d, grid_2d):
        with pytest.raises(GridMismatch):
            CauchyPair(np.zeros(grid_2d.shape), np.zeros(grid_2d.shape), Medium.constant(grid_1d))

    def test_energy_splits_over_complementary_windows(self, grid_2d, rng):
        medium = Medium(grid_2d, 1.0 + 0.5 * rng.random(grid_2d.shape))
        h0 = rng.standard_normal(grid_2d.shape)
        h0[grid_2d.boundary_mask] = 0.0
        h = CauchyPair(h0, rng.standard_normal(grid_2d.shape), medium)
        window = grid_2d.coords[0] ** 2 + grid_2d.coords[1] ** 2 < 0.4
        assert energy(h, window) + energy(h, ~window) == pytest.approx(energy(h), rel=1e-12)
        assert energy(h) == pytest.approx(kinetic_energy(h) + potential_energy(h), rel=1e-12)

    def test_inner_product_is_symmetric(self, grid_1d, rng):
        medium = Medium.constant(grid_1d, 1.5)
        pairs = []
        for _ in range(2):
            h0 = rng.standard_normal(grid_1d.shape)
            h0[grid_1d.boundary_mask] = 0.0
            pairs.append(CauchyPair(h0, rng.standard_normal(grid_1d.shape), medium))
        f, g = pairs
        assert energy_inner_product(f, g) == pytest.approx(energy_inner_product(g, f), rel=1e-12)

    def test_kinetic_energy_refuses_hidden_speed(self, grid_1d):
        hidden = np.abs(grid_1d.coords[0]) < 0.2
        medium = Medium.constant(grid_1d).exterior(hidden)
        h = bump_pair(medium, 0.0, 0.3, velocity=True)
        with pytest.raises(AccessViolation):
            kinetic_energy(h)
        assert kinetic_energy(h, ~hidden) > 0.0


class TestLeapfrog:
    def test_dalembert_split(self, grid_1d):
        medium = Medium.constant(grid_1d)
        h = bump_pair(medium, 0.0, 0.3)
        t = 0.4
        final = propagate(medium, h, t)
        x = grid_1d.coords[0]
        exact = 0.5 * (bump(np.abs(x - t) / 0.3) + bump(np.abs(x + t) / 0.3))
        error = np.linalg.norm(final.h0 - exact) / np.linalg.norm(exact)
        assert error < 0.01

    def test_shadow_energy_is_conserved(self, grid_2d):
        medium = Medium(grid_2d, np.where(grid_2d.coords[1] > 0.0, 1.0, 2.0))
        r = np.hypot(grid_2d.coords[0], grid_2d.coords[1] - 0.3)
        h = CauchyPair(bump(r / 0.3), np.zeros(grid_2d.shape), medium)
        field = run(medium, h, 0.5, track_energy=True)
        assert field.relative_drift(shadow=True) <= 1e-6

    def test_time_reversal_recovers_data(self, grid_1d):
        medium = Medium(grid_1d, np.where(grid_1d.coords[0] < 0.2, 1.0, 2.0))
        h = bump_pair(medium, -0.3, 0.2)
        forward = propagate(medium, h, 0.25)
        back = time_reverse(propagate(medium, time_reverse(forward), 0.25))
        np.testing.assert_allclose(back.h0, h.h0, atol=1e-10)
        np.testing.assert_allclose(back.h1, h.h1, atol=1e-8)

    def test_negative_duration_runs_backwards(self, grid_1d):
        medium = Medium.constant(grid_1d)
        h = bump_pair(medium, 0.0, 0.2)
        there = propagate(medium, h, 0.2)
        back = propagate(medium, there, -0.2)
        np.testing.assert_allclose(back.h0, h.h0, atol=1e-10)

    def test_residual_of_stored_steps(self, grid_1d):
        medium = Medium.constant(grid_1d)
        field = run(medium, bump_pair(medium, 0.0, 0.3), 0.1, store_every=1)
        assert field.wave_residual() < 1e-10

    def test_cfl_violation(self, grid_1d):
        medium = Medium.constant(grid_1d)
        with pytest.raises(CFLViolation):
            run(medium, bump_pair(medium, 0.0, 0.3), 0.1, dt=2.0 * stable_dt(medium))

    def test_duration_must_be_a_multiple_of_dt(self, grid_1d):
        medium = Medium.constant(grid_1d)
        with pytest.raises(WaveError):
            time_steps(medium, 0.1, dt=0.003)

    def test_stepper_refuses_hidden_medium(self, grid_1d):
        medium = Medium.constant(grid_1d).exterior(np.abs(grid_1d.coords[0]) < 0.2)
        with pytest.raises(AccessViolation):
            LeapfrogStepper(medium)


class TestObservation:
    def test_data_inside_omega_rejected(self, homogeneous_experiment_1d):
        medium = homogeneous_experiment_1d.truth
        with pytest.raises(SupportViolation):
            homogeneous_experiment_1d.observe(bump_pair(medium, 0.5, 0.1), 0.1)

    def test_outside_view_matches_truth_outside(self, homogeneous_experiment_1d):
        experiment = homogeneous_experiment_1d
        h = bump_pair(experiment.truth, -0.25, 0.15)
        view = experiment.observe(h, 0.3)
        truth = propagate(experiment.truth, h, 0.3)
        visible = ~experiment.chain.hidden_mask
        np.testing.assert_array_equal(view.read(-1).h0[visible], truth.h0[visible])
        assert not np.any(view.read(-1).h0[experiment.chain.hidden_mask])

    def test_snapshots_are_not_public(self, homogeneous_experiment_1d):
        experiment = homogeneous_experiment_1d
        view = experiment.observe(bump_pair(experiment.truth, -0.25, 0.15), 0.1)
        assert not hasattr(view, "snapshots")
        assert "snapshots" not in repr(view)
        assert len(view) == len(view.times)

    def test_outside_view_refuses_hidden_reads(self, homogeneous_experiment_1d):
        experiment = homogeneous_experiment_1d
        view = experiment.observe(bump_pair(experiment.truth, -0.25, 0.15), 0.2)
        with pytest.raises(AccessViolation):
            view.read(-1, np.ones(experiment.grid.shape, dtype=bool))
        with pytest.raises(AccessViolation):
            view.value(-1, [0.5])
        with pytest.raises(AccessViolation):
            view.energy(-1)
        with pytest.raises(AccessViolation):
            view.energy(-1, experiment.chain.theta_mask)

    def test_exterior_energy_is_readable(self, homogeneous_experiment_1d):
        experiment = homogeneous_experiment_1d
        view = experiment.observe(bump_pair(experiment.truth, -0.25, 0.15), 0.0)
        window = Interval(-0.45, -0.05).mask(experiment.grid)
        h = view.read(0)
        assert view.energy(0, window) == pytest.approx(energy(h.with_medium(experiment.truth), window))
