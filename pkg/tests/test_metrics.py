import numpy as np
import pytest

from levelsets import (
    BoundaryPoints,
    EmptySetError,
    GridMismatchError,
    GridSpec,
    LevelSetMask,
    ParameterError,
    ScalarField,
    band_volume,
    band_volume_bound,
    cdf_field,
    compute_constants,
    hausdorff,
    make_model,
    sym_diff_volume,
)


def pts(*rows):
    return BoundaryPoints(np.array(rows, dtype=float), resolution=0.0)


def random_pts(rng, k, dim=2, spread=10.0):
    return BoundaryPoints(rng.uniform(0, spread, size=(k, dim)), resolution=0.0)


class TestHausdorff:
    def test_three_four_five(self):
        assert hausdorff(pts((0.0, 0.0)), pts((3.0, 4.0))) == pytest.approx(5.0)

    def test_identity(self):
        a = random_pts(np.random.default_rng(1), 50)
        assert hausdorff(a, a) == 0.0

    def test_directed_asymmetry_resolved_by_max(self):
        assert hausdorff(pts((0.0, 0.0), (10.0, 0.0)), pts((0.0, 0.0))) == pytest.approx(10.0)

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        a, b = random_pts(rng, 40), random_pts(rng, 60)
        assert hausdorff(a, b) == hausdorff(b, a)

    def test_zero_iff_equal_point_sets(self):
        rng = np.random.default_rng(3)
        a = random_pts(rng, 30)
        shuffled = BoundaryPoints(a.points[::-1].copy(), resolution=0.0)
        assert hausdorff(a, shuffled) == 0.0
        nudged = BoundaryPoints(a.points + np.array([1e-9, 0.0]), resolution=0.0)
        assert hausdorff(a, nudged) > 0.0

    def test_triangle_inequality(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a, b, c = (random_pts(rng, rng.integers(3, 30)) for _ in range(3))
            assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12

    @pytest.mark.parametrize("dim", [2, 3])
    def test_bucketed_equals_brute_exactly(self, dim):
        rng = np.random.default_rng(5 + dim)
        for _ in range(100):
            a = random_pts(rng, rng.integers(1, 500), dim)
            b = random_pts(rng, rng.integers(1, 500), dim)
            assert hausdorff(a, b, method="grid") == hausdorff(a, b, method="brute")

    def test_bucketed_handles_degenerate_spread(self):
        a = pts((1.0, 1.0), (1.0, 1.0))
        b = pts((4.0, 5.0))
        assert hausdorff(a, b, method="grid") == hausdorff(a, b, method="brute")

    def test_empty_rejected(self):
        empty = BoundaryPoints(np.empty((0, 2)), resolution=0.0)
        with pytest.raises(EmptySetError):
            hausdorff(empty, pts((0.0, 0.0)))
        with pytest.raises(EmptySetError):
            hausdorff(pts((0.0, 0.0)), empty)

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            hausdorff(pts((0.0, 0.0)), pts((1.0, 1.0, 1.0)))

    def test_unknown_method_rejected(self):
        with pytest.raises(ParameterError):
            hausdorff(pts((0.0, 0.0)), pts((1.0, 1.0)), method="fancy")


def random_mask(rng, grid):
    return LevelSetMask(grid, rng.random(grid.cell_shape) < 0.5)


class TestSymDiffVolume:
    def test_identical_masks(self):
        grid = GridSpec(2, 1.0, 16)
        m = random_mask(np.random.default_rng(6), grid)
        assert sym_diff_volume(m, m) == 0.0

    def test_complementary_masks_cover_box(self):
        grid = GridSpec(2, 1.0, 10)
        m = random_mask(np.random.default_rng(7), grid)
        inv = LevelSetMask(grid, ~m.inside)
        assert sym_diff_volume(m, inv) == pytest.approx(1.0)

    def test_single_cell(self):
        grid = GridSpec(2, 1.0, 10)  # h = 0.1
        a = np.zeros(grid.cell_shape, bool)
        b = a.copy()
        b[3, 4] = True
        assert sym_diff_volume(LevelSetMask(grid, a), LevelSetMask(grid, b)) == pytest.approx(
            0.01
        )

    def test_metric_axioms(self):
        grid = GridSpec(2, 1.0, 16)
        rng = np.random.default_rng(8)
        for _ in range(50):
            a, b, c = (random_mask(rng, grid) for _ in range(3))
            ab, bc, ac = (
                sym_diff_volume(a, b),
                sym_diff_volume(b, c),
                sym_diff_volume(a, c),
            )
            assert ab == sym_diff_volume(b, a)
            assert ac <= ab + bc + 1e-12

    def test_grid_mismatch(self):
        a = LevelSetMask(GridSpec(2, 1.0, 8), np.zeros((8, 8), bool))
        b = LevelSetMask(GridSpec(2, 2.0, 8), np.zeros((8, 8), bool))
        with pytest.raises(GridMismatchError):
            sym_diff_volume(a, b)


class TestBandVolume:
    def test_no_values_near_level(self):
        grid = GridSpec(2, 1.0, 8)
        field = ScalarField(grid, np.full(grid.vertex_shape, 0.9))
        assert band_volume(field, 0.2, 0.05) == 0.0

    def test_constant_field_fills_box(self):
        grid = GridSpec(2, 3.0, 8)
        field = ScalarField(grid, np.full(grid.vertex_shape, 0.25))
        assert band_volume(field, 0.25, 0.01) == pytest.approx(9.0)

    def test_half_open_interval(self):
        grid = GridSpec(2, 1.0, 2)
        lower = ScalarField(grid, np.full(grid.vertex_shape, 0.2))  # = c - eps
        upper = ScalarField(grid, np.full(grid.vertex_shape, 0.4))  # = c + eps
        assert band_volume(lower, 0.3, 0.1) == pytest.approx(1.0)
        assert band_volume(upper, 0.3, 0.1) == 0.0

    def test_monotone_in_eps(self):
        field = cdf_field(make_model("indep_exponential", 2, (1, 1)), GridSpec(2, 3.0, 64))
        vols = [band_volume(field, 0.25, e) for e in (0.005, 0.01, 0.02, 0.05)]
        assert np.all(np.diff(vols) >= 0)

    def test_nonpositive_eps_rejected(self):
        field = cdf_field(make_model("indep_exponential", 2, (1, 1)), GridSpec(2, 3.0, 16))
        with pytest.raises(ParameterError):
            band_volume(field, 0.25, 0.0)

    def test_band_volume_under_analytic_bound(self):
        # the gradient-infimum bound 2 eps A d T^(d-1) dominates the measured
        # band volume for this model
        model = make_model("indep_exponential", 2, (1.0, 1.0))
        constants = compute_constants(model, 0.25, 0.05, 0.05, scan_cells=256)
        field = cdf_field(model, GridSpec(2, 3.0, 256))
        measured = band_volume(field, 0.25, 0.01)
        assert measured <= band_volume_bound(constants, 0.01, 2, 3.0)
