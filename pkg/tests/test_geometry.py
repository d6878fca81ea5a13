import numpy as np
import pytest

from scatter_lab.src.geometry import (
    Box,
    DomainChain,
    Disk,
    Grid,
    Interval,
    build_speed_model,
    eval_speed,
    level_regions,
    region_from_config,
    shrink_sequence,
    solve_depth,
)
from scatter_lab.src.geometry.speed_model import homogeneous_model
from scatter_lab.validation.exceptions import (
    ChainContainmentError,
    ConfigSchemaError,
    GeometryError,
    GridTooCoarse,
    MalformedInterface,
    OverlappingRegions,
    PNotOnBoundary,
    SpeedOutOfBounds,
    UnresolvedBoundary,
    UpsilonTooSmall,
)


def two_layer_config(interface=0.5, speeds=(1.0, 2.0)):
    return {
        'dim': 1,
        'extent': [[-1.0, 2.0]],
        'bounds': {'c_min': min(speeds), 'c_max': max(speeds)},
        'regions': [
            {'name': 'left', 'indicator': {'type': 'interval', 'bounds': [-10.0, interface]}, 'speed': speeds[0]},
            {'name': 'right', 'indicator': {'type': 'rest'}, 'speed': speeds[1]},
        ],
        'interfaces': [{'type': 'point', 'at': interface}],
    }


class TestGrid:
    def test_extent_round_trip(self):
        grid = Grid.from_extent([[-1.0, 1.0], [0.0, 0.5]], 0.25)
        assert grid.shape == (9, 3)
        assert grid.extent == ((-1.0, 1.0), (0.0, 0.5))
        assert grid.size == 27

    def test_boundary_mask_is_outer_layer(self, grid_2d):
        mask = grid_2d.boundary_mask
        assert mask[0].all() and mask[-1].all() and mask[:, 0].all() and mask[:, -1].all()
        assert not mask[1:-1, 1:-1].any()

    def test_nearest_index_clips(self, grid_1d):
        assert grid_1d.nearest_index([5.0]) == (grid_1d.shape[0] - 1,)
        np.testing.assert_allclose(grid_1d.node(grid_1d.nearest_index([0.0])), [0.0])


class TestRegions:
    def test_levelsets_positive_inside(self):
        assert Interval(0.0, 1.0).value([0.25]) == pytest.approx(0.25)
        assert Disk([0.0, 0.0], 1.0).value([0.0, 2.0]) == pytest.approx(-1.0)
        assert Box([0.0, 0.0], [1.0, 1.0]).contains([0.5, 0.5])

    def test_inward_normal_and_projection(self):
        disk = Disk([0.0, 0.0], 0.5)
        np.testing.assert_allclose(disk.inward_normal([0.5, 0.0]), [-1.0, 0.0], atol=1e-6)
        np.testing.assert_allclose(disk.project_to_boundary([0.7, 0.0]), [0.5, 0.0], atol=1e-9)

    def test_config_builders(self):
        union = region_from_config({'type': 'union', 'parts': [
            {'type': 'disk', 'center': [0.0, 0.0], 'radius': 0.5},
            {'type': 'disk', 'center': [1.0, 0.0], 'radius': 0.5},
        ]})
        assert union.contains([1.2, 0.0]) and not union.contains([0.5, 0.8])
        grown = region_from_config({'type': 'dilation', 'radius': 0.1,
                                    'of': {'type': 'interval', 'bounds': [0.0, 1.0]}})
        assert grown.contains([-0.05])

    def test_unknown_region_type(self):
        with pytest.raises(ConfigSchemaError):
            region_from_config({'type': 'torus'})


class TestSpeedModel:
    def test_piecewise_constant_two_layer(self):
        model = build_speed_model(two_layer_config())
        assert eval_speed(model, 0.25) == pytest.approx(1.0)
        assert eval_speed(model, 0.75) == pytest.approx(2.0)
        assert model.is_piecewise_constant()

    def test_expression_speed(self):
        model = build_speed_model({
            'dim': 2,
            'extent': [[-1.0, 1.0], [-1.0, 1.0]],
            'bounds': {'c_min': 0.5, 'c_max': 1.5},
            'regions': [{'name': 'gradient', 'indicator': {'type': 'rest'}, 'speed': '1 + 0.5*y'}],
        })
        assert eval_speed(model, [0.3, 0.5]) == pytest.approx(1.25)

    def test_overlapping_regions_rejected(self):
        config = two_layer_config()
        config['regions'][1]['indicator'] = {'type': 'interval', 'bounds': [0.4, 10.0]}
        with pytest.raises(OverlappingRegions):
            build_speed_model(config)

    def test_speed_outside_bounds_rejected(self):
        config = two_layer_config()
        config['bounds'] = {'c_min': 1.0, 'c_max': 1.5}
        with pytest.raises(SpeedOutOfBounds):
            build_speed_model(config)

    def test_interface_that_separates_nothing(self):
        config = two_layer_config()
        config['interfaces'] = [{'type': 'point', 'at': 0.1}]
        with pytest.raises(MalformedInterface):
            build_speed_model(config)

    def test_missing_keys_listed(self):
        with pytest.raises(ConfigSchemaError) as info:
            build_speed_model({'dim': 1})
        assert set(info.value.keys) == {'regions', 'bounds'}


class TestDepth:
    def test_homogeneous_disk_depth_is_distance(self):
        grid = Grid.from_extent([[-1.0, 1.0], [-1.0, 1.0]], 0.02)
        model = homogeneous_model(2, 1.0, extent=[[-1.0, 1.0], [-1.0, 1.0]])
        theta = Disk([0.0, 0.0], 0.6)
        chain = DomainChain(omega=Disk([0.0, 0.0], 0.3), theta=theta, grid=grid)
        depth = solve_depth(model, chain, theta)
        assert depth.at([0.0, 0.0])[0] == pytest.approx(0.6, abs=3 * grid.spacing)
        assert depth.at([0.0, 0.8])[0] == pytest.approx(-0.2, abs=3 * grid.spacing)

    def test_two_layer_travel_time(self):
        model = build_speed_model(two_layer_config())
        grid = Grid.from_extent([[-1.0, 2.0]], 0.005)
        theta = Interval(0.0, 1.0)
        chain = DomainChain(omega=Interval(0.2, 0.8), theta=theta, grid=grid)
        depth = solve_depth(model, chain, theta)
        assert depth.at([0.75])[0] == pytest.approx(0.125, abs=2 * grid.spacing)
        assert depth.at([0.25])[0] == pytest.approx(0.25, abs=2 * grid.spacing)

    def test_level_regions_partition(self):
        model = homogeneous_model(1)
        grid = Grid.from_extent([[-1.0, 1.0]], 0.01)
        theta = Interval(-0.5, 0.5)
        depth = solve_depth(model, DomainChain(omega=Interval(-0.2, 0.2), theta=theta, grid=grid), theta)
        above, below = level_regions(depth, 0.1)
        assert not np.any(above & below)
        with pytest.raises(GeometryError):
            level_regions(depth, -0.1)

    def test_unresolved_boundary(self):
        model = homogeneous_model(1)
        grid = Grid.from_extent([[-1.0, 1.0]], 0.1)
        tiny = Interval(0.0, 0.05)
        with pytest.raises(UnresolvedBoundary):
            solve_depth(model, DomainChain(omega=tiny, theta=tiny, grid=grid), tiny)


class TestDomainChain:
    def test_valid_chain(self, homogeneous_chain_1d):
        chain = homogeneous_chain_1d.validate()
        assert not np.any(chain.omega_mask & ~chain.theta_mask)
        assert np.all(chain.hidden_mask <= chain.omega_mask)

    def test_hidden_region_excludes_its_edge_layer(self, homogeneous_chain_1d):
        chain = homogeneous_chain_1d
        edge = chain.omega_mask & ~chain.hidden_mask
        assert edge.sum() == 2

    def test_omega_must_sit_inside_theta(self):
        grid = Grid.from_extent([[-1.0, 1.0]], 0.01)
        with pytest.raises(ChainContainmentError):
            DomainChain(omega=Interval(-0.1, 0.5), theta=Interval(0.0, 0.6), grid=grid).validate()

    def test_theta_must_avoid_grid_boundary(self):
        grid = Grid.from_extent([[-1.0, 1.0]], 0.01)
        with pytest.raises(ChainContainmentError):
            DomainChain(omega=Interval(0.0, 0.5), theta=Interval(-1.5, 0.6), grid=grid).validate()

    def test_margin_for_t_max(self):
        model = homogeneous_model(1)
        grid = Grid.from_extent([[-1.0, 1.0]], 0.01)
        chain = DomainChain(omega=Interval(-0.2, 0.2), theta=Interval(-0.5, 0.5), grid=grid, t_max=0.3)
        with pytest.raises(UpsilonTooSmall):
            chain.validate(model)
        DomainChain(omega=Interval(-0.2, 0.2), theta=Interval(-0.5, 0.5), grid=grid, t_max=0.2).validate(model)


class TestShrinkSequence:
    def test_radii_halve(self, homogeneous_chain_1d):
        regions = shrink_sequence(homogeneous_chain_1d, [0.0], 3, eps_1=0.2)
        assert [r.contains([-0.15]) for r in regions] == [True, False, False]
        assert all(r.contains([0.5]) for r in regions)

    def test_point_must_lie_on_boundary(self, homogeneous_chain_1d):
        with pytest.raises(PNotOnBoundary):
            shrink_sequence(homogeneous_chain_1d, [0.3], 2)

    def test_grid_too_coarse(self, homogeneous_chain_1d):
        with pytest.raises(GridTooCoarse):
            shrink_sequence(homogeneous_chain_1d, [0.0], 6, eps_1=0.2)
