import time

import numpy as np
import pytest

from levelsets import (
    GridMismatchError,
    GridSpec,
    ParameterError,
    Sample,
    ScalarField,
    cdf_field,
    ecdf_eval,
    ecdf_eval_grid,
    load_sample_csv,
    lp_distance,
    make_model,
    sample,
    sup_distance,
)


def small_sample():
    return Sample(np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]))


class TestSampleType:
    def test_rejects_negative(self):
        with pytest.raises(ParameterError):
            Sample(np.array([[1.0, -0.5]]))

    def test_rejects_empty(self):
        with pytest.raises(ParameterError):
            Sample(np.empty((0, 2)))

    def test_csv_roundtrip(self, tmp_path):
        path = tmp_path / "sample.csv"
        pts = np.random.default_rng(0).uniform(0, 2, size=(40, 3))
        np.savetxt(path, pts, delimiter=",", fmt="%.17g")
        loaded = load_sample_csv(path)
        assert np.array_equal(loaded.points, pts)

    def test_csv_rejects_negative(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n-1.0,0.5\n")
        with pytest.raises(ParameterError):
            load_sample_csv(path)


class TestPointEval:
    def test_direct_count(self):
        assert ecdf_eval(small_sample(), (2.0, 2.0)) == pytest.approx(2.0 / 3.0)

    def test_zero_below_all_points(self):
        assert ecdf_eval(small_sample(), (0.0, 0.0)) == 0.0

    def test_one_above_all_points(self):
        assert ecdf_eval(small_sample(), (3.0, 3.0)) == 1.0

    def test_tie_is_closed(self):
        assert ecdf_eval(small_sample(), (1.0, 1.0)) == pytest.approx(1.0 / 3.0)

    def test_dim_mismatch(self):
        with pytest.raises(ParameterError):
            ecdf_eval(small_sample(), (1.0, 1.0, 1.0))

    def test_monotone_along_chains(self):
        rng = np.random.default_rng(21)
        s = Sample(rng.uniform(0, 3, size=(200, 3)))
        base = rng.uniform(0, 1, size=3)
        steps = rng.uniform(0, 0.05, size=(100, 3))
        chain = base + np.cumsum(steps, axis=0)
        values = [ecdf_eval(s, x) for x in chain]
        assert np.all(np.diff(values) >= 0)


class TestGridEval:
    @pytest.mark.parametrize("dim,cells", [(2, 16), (3, 7)])
    def test_matches_pointwise_exactly(self, dim, cells):
        # definitional oracle: independent per-vertex evaluation
        rng = np.random.default_rng(31 + dim)
        s = Sample(rng.uniform(0, 3.5, size=(60, dim)))
        grid = GridSpec(dim, 3.0, cells)
        field = ecdf_eval_grid(s, grid)
        verts = grid.axis_vertices()
        mesh = np.stack(
            [g.ravel() for g in np.meshgrid(*([verts] * dim), indexing="ij")], axis=-1
        )
        expected = np.array([ecdf_eval(s, x) for x in mesh]).reshape(grid.vertex_shape)
        assert np.array_equal(field.values, expected)

    def test_points_on_vertices_match_pointwise(self):
        # ties sit exactly on the lattice; grid and pointwise must agree
        grid = GridSpec(2, 3.0, 6)
        s = Sample(np.array([[0.5, 0.5], [1.0, 1.0], [1.5, 2.0], [3.0, 3.0]]))
        field = ecdf_eval_grid(s, grid)
        verts = grid.axis_vertices()
        for i, x in enumerate(verts):
            for j, y in enumerate(verts):
                assert field.values[i, j] == ecdf_eval(s, (x, y))

    def test_single_point_upper_quadrant(self):
        grid = GridSpec(2, 2.0, 8)
        p = np.array([0.7, 1.1])
        field = ecdf_eval_grid(Sample(p[None, :]), grid)
        verts = grid.axis_vertices()
        expected = (verts[:, None] >= p[0]) & (verts[None, :] >= p[1])
        assert np.array_equal(field.values, expected.astype(float))

    def test_dim_mismatch(self):
        with pytest.raises(ParameterError):
            ecdf_eval_grid(small_sample(), GridSpec(3, 3.0, 4))

    def test_performance_budget(self):
        # 1e6 points on a 512^2 grid must come in far under 5 s
        model = make_model("indep_exponential", 2, (1.0, 1.0))
        s = sample(model, 1_000_000, seed=2)
        grid = GridSpec(2, 3.0, 512)
        start = time.perf_counter()
        ecdf_eval_grid(s, grid)
        assert time.perf_counter() - start < 5.0


class TestSupDistance:
    def test_identity(self):
        f = cdf_field(make_model("indep_exponential", 2, (1, 1)), GridSpec(2, 3.0, 16))
        assert sup_distance(f, f) == 0.0

    def test_constant_offset(self):
        grid = GridSpec(2, 3.0, 16)
        a = ScalarField(grid, np.zeros(grid.vertex_shape))
        b = ScalarField(grid, np.full(grid.vertex_shape, 0.05))
        assert sup_distance(a, b) == pytest.approx(0.05)

    def test_grid_mismatch(self):
        a = ScalarField(GridSpec(2, 3.0, 16), np.zeros((17, 17)))
        b = ScalarField(GridSpec(2, 3.0, 8), np.zeros((9, 9)))
        with pytest.raises(GridMismatchError):
            sup_distance(a, b)

    def test_ecdf_close_to_cdf_with_high_frequency(self):
        # 1e4-point samples land within 0.05 of the truth in >= 99 runs of 100
        model = make_model("indep_exponential", 2, (1.0, 1.0))
        grid = GridSpec(2, 3.0, 64)
        truth = cdf_field(model, grid)
        hits = sum(
            sup_distance(ecdf_eval_grid(sample(model, 10_000, seed=s), grid), truth) < 0.05
            for s in range(100)
        )
        assert hits >= 99

    def test_median_sup_decreases_with_n(self):
        model = make_model("indep_exponential", 2, (1.0, 1.0))
        grid = GridSpec(2, 3.0, 64)
        truth = cdf_field(model, grid)
        medians = []
        for n in (100, 1000, 10_000, 100_000):
            sups = [
                sup_distance(ecdf_eval_grid(sample(model, n, seed=s), grid), truth)
                for s in range(50)
            ]
            medians.append(np.median(sups))
        assert np.all(np.diff(medians) < 0)


class TestLpDistance:
    def test_identity(self):
        f = cdf_field(make_model("indep_exponential", 2, (1, 1)), GridSpec(2, 3.0, 16))
        assert lp_distance(f, f, 2.0) == 0.0

    def test_constant_integrand(self):
        # |A - B| = 0.1 on [0, 2]^2 with p = 2: 0.01 * 4
        grid = GridSpec(2, 2.0, 10)
        a = ScalarField(grid, np.zeros(grid.vertex_shape))
        b = ScalarField(grid, np.full(grid.vertex_shape, 0.1))
        assert lp_distance(a, b, 2.0) == pytest.approx(0.04, abs=1e-15)

    def test_jensen_ordering_on_unit_box(self):
        grid = GridSpec(2, 1.0, 20)
        rng = np.random.default_rng(4)
        a = ScalarField(grid, rng.uniform(0, 1, grid.vertex_shape))
        b = ScalarField(grid, rng.uniform(0, 1, grid.vertex_shape))
        assert lp_distance(a, b, 1.0) >= lp_distance(a, b, 2.0)

    def test_p_below_one_rejected(self):
        f = cdf_field(make_model("indep_exponential", 2, (1, 1)), GridSpec(2, 3.0, 8))
        with pytest.raises(ParameterError):
            lp_distance(f, f, 0.5)

    def test_grid_mismatch(self):
        a = ScalarField(GridSpec(2, 3.0, 16), np.zeros((17, 17)))
        b = ScalarField(GridSpec(2, 2.0, 16), np.zeros((17, 17)))
        with pytest.raises(GridMismatchError):
            lp_distance(a, b, 1.0)


class TestScalarField:
    def test_shape_validated(self):
        with pytest.raises(ParameterError):
            ScalarField(GridSpec(2, 1.0, 4), np.zeros((4, 4)))

    def test_center_values_are_corner_means(self):
        grid = GridSpec(2, 1.0, 2)
        field = ScalarField(grid, np.arange(9.0).reshape(3, 3))
        centers = field.cell_center_values()
        assert centers[0, 0] == pytest.approx((0 + 1 + 3 + 4) / 4)
        assert centers[1, 1] == pytest.approx((4 + 5 + 7 + 8) / 4)
