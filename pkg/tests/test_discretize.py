import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pidq import (
    ArgumentError,
    Cardinalities,
    DiscretizeConfig,
    SampleTable,
    ValidationError,
    auto_bin_count,
    bin_scalar_features,
    discretize_table,
    empirical_joint,
    kmeans_discretize,
    pid_from_samples,
)
from pidq.discretize import discretize_modality

from conftest import DIS_XOR_ROWS, dis_xor

# 1-d fixture with three loose groups; the optimum over all 3**12 labelings
# (oracles.kmeans_exhaustive) has within-cluster sum of squares 3.17
KMEANS_FIXTURE = np.array([0.0, 0.4, 0.9, 1.3, 2.6, 3.0, 3.3, 3.9, 6.1, 6.4, 7.2, 7.5])
KMEANS_OPTIMUM = 3.17


class TestAutoBins:
    @pytest.mark.parametrize("n,k", [(1, 2), (8, 2), (9, 3), (27, 3), (28, 4), (1000, 10), (1001, 11), (10**4, 22)])
    def test_cube_root_ceiling(self, n, k):
        assert auto_bin_count(n) == k

    def test_clamped_at_100(self):
        assert auto_bin_count(10**7) == 100


class TestHistogram:
    def test_midpoint_split(self):
        codes, edges = bin_scalar_features([0, 1, 2, 3], DiscretizeConfig(bins_or_k=2))
        np.testing.assert_array_equal(codes, [0, 0, 1, 1])
        assert edges[0] == -np.inf and edges[-1] == np.inf
        assert edges[1] == 1.5

    def test_thousand_samples_ten_bins(self, rng):
        codes, edges = bin_scalar_features(rng.normal(size=1000))
        assert len(edges) == 11
        assert codes.min() == 0 and codes.max() == 9

    def test_twenty_seven_uniform(self):
        v = np.random.default_rng(3).uniform(size=27)
        codes, edges = bin_scalar_features(v)
        assert len(edges) == 4
        # bins counted directly against the interior edges
        lo, hi = v.min(), v.max()
        cuts = [lo + (hi - lo) / 3, lo + 2 * (hi - lo) / 3]
        direct = [sum(1 for x in v if x < cuts[0]), sum(1 for x in v if cuts[0] <= x < cuts[1]), sum(1 for x in v if x >= cuts[1])]
        np.testing.assert_array_equal(np.bincount(codes, minlength=3), direct)
        assert all(abs(c - 9) <= 6 for c in direct)

    def test_open_ended_outer_bins(self):
        codes, edges = bin_scalar_features([0.0, 10.0, 5.0], DiscretizeConfig(bins_or_k=4))
        assert codes.tolist() == [0, 3, 2]

    def test_constant_input_warns(self):
        with pytest.warns(RuntimeWarning, match="identical"):
            codes, edges = bin_scalar_features([2.0, 2.0, 2.0])
        np.testing.assert_array_equal(codes, 0)

    def test_rejects_nan(self):
        with pytest.raises(ValidationError, match="row 1"):
            bin_scalar_features([0.0, np.nan])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=60), st.integers(2, 12))
    def test_monotone_and_in_range(self, values, bins):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            codes, _ = bin_scalar_features(values, DiscretizeConfig(bins_or_k=bins))
        order = np.argsort(values, kind="stable")
        assert np.all(np.diff(codes[order]) >= 0)
        assert codes.min() >= 0 and codes.max() < bins


class TestKMeans:
    def test_matches_exhaustive_optimum(self):
        res = kmeans_discretize(KMEANS_FIXTURE, 3, seed=7)
        assert res.inertia == pytest.approx(KMEANS_OPTIMUM, abs=1e-9)
        groups = {tuple(np.flatnonzero(res.labels == j)) for j in range(3)}
        assert groups == {(0, 1, 2, 3), (4, 5, 6, 7), (8, 9, 10, 11)}

    def test_separated_clouds(self, rng):
        a = rng.normal(0, 0.1, size=(30, 2))
        b = rng.normal(5, 0.1, size=(20, 2))
        res = kmeans_discretize(np.vstack([a, b]), 2, seed=1)
        assert len(set(res.labels[:30])) == 1 and len(set(res.labels[30:])) == 1
        assert res.labels[0] != res.labels[-1]

    def test_k_equals_n(self, rng):
        x = rng.normal(size=(6, 2))
        res = kmeans_discretize(x, 6, seed=0)
        assert sorted(res.labels) == list(range(6))
        assert res.inertia == pytest.approx(0.0, abs=1e-24)

    def test_duplicate_points_fill_all_clusters(self):
        x = np.array([0.0, 0.0, 0.0, 1.0])
        res = kmeans_discretize(x, 3, seed=0)
        assert res.labels.max() < 3
        assert res.inertia == pytest.approx(0.0)

    def test_k_too_large(self):
        with pytest.raises(ArgumentError):
            kmeans_discretize([0.0, 1.0], 3)

    def test_deterministic(self, rng):
        x = rng.normal(size=(200, 3))
        a = kmeans_discretize(x, 4, seed=5)
        b = kmeans_discretize(x, 4, seed=5)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.centroids, b.centroids)

    def test_objective_non_increasing(self, rng):
        x = rng.normal(size=(300, 2))
        res = kmeans_discretize(x, 5, seed=2, config=DiscretizeConfig(method="kmeans", kmeans_restarts=1))
        assert np.all(np.diff(res.history) <= 1e-9)


class TestConfigAndTable:
    @pytest.mark.parametrize("kw", [{"method": "quantile"}, {"bins_or_k": 1}, {"bins_or_k": "many"}, {"bins_or_k": 2.5}, {"kmeans_restarts": 0}])
    def test_config_rejects(self, kw):
        with pytest.raises(ArgumentError):
            DiscretizeConfig(**kw)

    def test_row_count_mismatch(self):
        with pytest.raises(ValidationError, match="row counts"):
            SampleTable([0, 1], [0, 1, 2], [0, 1])

    def test_label_range(self):
        with pytest.raises(ValidationError):
            SampleTable([0, 1], [0, 1], [0, 2], ny=2)

    def test_non_integer_label(self):
        with pytest.raises(ValidationError, match="row 1"):
            SampleTable([0, 1], [0, 1], [0.0, 0.5])

    def test_missing_feature(self):
        with pytest.raises(ValidationError, match="row 0"):
            SampleTable([np.nan, 1], [0, 1], [0, 1])


class TestEmpiricalJoint:
    def test_xor_samples(self):
        j = empirical_joint([0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0])
        expect = np.zeros((2, 2, 2))
        for a, b, y in [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]:
            expect[a, b, y] = 0.25
        np.testing.assert_array_equal(j.probs, expect)

    def test_point_mass(self):
        j = empirical_joint([1, 1, 1], [0, 0, 0], [2, 2, 2], Cardinalities(2, 1, 3))
        assert j.probs[1, 0, 2] == 1.0

    def test_out_of_range_names_row(self):
        with pytest.raises(ValidationError, match="row 2"):
            empirical_joint([0, 1, 2], [0, 0, 0], [0, 0, 0], Cardinalities(2, 1, 1))

    def test_weighted_expansion_of_dis_xor(self):
        counts = [round(p * 100) for *_, p in DIS_XOR_ROWS]
        assert sum(counts) == 99
        rows = [r[:3] for r, c in zip(DIS_XOR_ROWS, counts) for _ in range(c)]
        a, b, y = zip(*rows)
        j = empirical_joint(a, b, y, Cardinalities(2, 2, 2))
        np.testing.assert_allclose(j.probs, dis_xor().probs, atol=1e-12)


class TestPipeline:
    def test_compacts_empty_bins(self):
        t = SampleTable([0, 1, 0, 1] * 10, [0, 0, 1, 1] * 10, [0, 1, 1, 0] * 10)
        joint, meta = discretize_table(t, DiscretizeConfig(bins_or_k=5))
        assert joint.shape == (2, 2, 2)
        assert meta["x1"]["occupied"] == [0, 4]
        assert meta["x1"]["bins"] == 5

    def test_multidimensional_histogram(self, rng):
        x1 = rng.integers(0, 2, size=(50, 2)).astype(float)
        codes, meta = discretize_modality(x1, DiscretizeConfig(bins_or_k=2))
        assert codes.max() < 4
        assert meta["bins"] == [2, 2]
        cells = np.array(meta["cells"])
        np.testing.assert_array_equal(cells[codes], x1.astype(int))

    def test_kmeans_metadata(self, rng):
        t = SampleTable(rng.normal(size=(40, 2)), rng.normal(size=40), rng.integers(0, 2, 40))
        _, meta = discretize_table(t, DiscretizeConfig(method="kmeans", bins_or_k=3, seed=4))
        assert meta["x1"]["k"] == 3
        assert np.array(meta["x1"]["centroids"]).shape == (3, 2)

    def test_and_samples_recover_pid(self):
        rng = np.random.default_rng(0)
        x1, x2 = rng.integers(0, 2, 10**4), rng.integers(0, 2, 10**4)
        res = pid_from_samples(SampleTable(x1, x2, x1 & x2))
        np.testing.assert_allclose(res.as_tuple(), (0.311278, 0, 0, 0.5), atol=0.02)

    def test_bit_for_bit_determinism(self, rng):
        t = SampleTable(rng.normal(size=(100, 2)), rng.normal(size=100), rng.integers(0, 3, 100))
        cfg = DiscretizeConfig(method="kmeans", bins_or_k=4, seed=9)
        a, _ = discretize_table(t, cfg)
        b, _ = discretize_table(t, cfg)
        assert a.probs.tobytes() == b.probs.tobytes()
