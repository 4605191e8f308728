import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pidq import (
    ArgumentError,
    JointDist,
    PairwiseMarginals,
    SolverConfig,
    StaleSolutionError,
    ValidationError,
    compute_pid,
    co_information,
    mutual_info,
    pairwise_marginals,
    pid,
    solve_q_star,
)
from pidq.solver import (
    conditional_entropy_objective,
    feasible_init,
    ipf_project,
    marginal_violation,
    objective_gradient,
    scale_matrix,
)

from conftest import all_equal, copy_x1, dis_xor, random_joint
import oracles

# exact PIDs of fixed 2x2x2 tables, from the zooming grid search over the
# feasible box (tests/oracles.py::grid_pid)
ORACLE_TABLES = [
    (
        [0.074, 0.107, 0.059, 0.093, 0.022, 0.352, 0.001, 0.292],
        (0.0019873239, 0.1551205511, 0.0, 0.0140969969),
    ),
    (
        [0.099, 0.052, 0.093, 0.054, 0.155, 0.185, 0.324, 0.038],
        (0.0009819359, 0.0, 0.0753550143, 0.0443487484),
    ),
    (
        [0.434, 0.102, 0.048, 0.122, 0.01, 0.008, 0.169, 0.107],
        (0.0036012233, 0.0, 0.076147317, 0.0381120002),
    ),
]
DIS_XOR_PID = (0.4407206956, 0.0156575990, 0.0109110258, 0.1601457204)


def interior_point(rng, shape):
    return rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape) + 1e-3


class TestSolverConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            {"step_size": 0.0},
            {"step_size": 1.5},
            {"tol_obj": 0.0},
            {"tol_marginal": -1.0},
            {"max_iters": 0},
            {"init_jitter": -0.1},
            {"method": "newton"},
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ArgumentError):
            SolverConfig(**kw)

    def test_default_method(self):
        assert SolverConfig().method == "barrier"


class TestObjective:
    def test_value_for_independent_uniform(self):
        assert conditional_entropy_objective(np.full((2, 2, 2), 0.125)) == pytest.approx(1.0)

    def test_zero_cells_allowed(self):
        q = np.zeros((2, 2, 2))
        q[0, 0, 0] = 1.0
        assert conditional_entropy_objective(q) == 0.0

    def test_gradient_matches_central_differences(self, rng):
        for _ in range(5):
            q = interior_point(rng, (3, 2, 3))
            g = objective_gradient(q)
            eps = 1e-6
            fd = np.zeros_like(q)
            for idx in np.ndindex(q.shape):
                e = np.zeros_like(q)
                e[idx] = eps
                fd[idx] = (conditional_entropy_objective(q + e) - conditional_entropy_objective(q - e)) / (2 * eps)
            np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-7)

    def test_gradient_is_finite_at_zero(self):
        q = np.zeros((2, 2, 2))
        q[0, 0, 0] = 1.0
        assert np.all(np.isfinite(objective_gradient(q)))


class TestProjection:
    def test_scale_matrix_hits_targets(self, rng):
        k = rng.random((4, 3)) + 0.1
        a = rng.dirichlet(np.ones(4))
        b = rng.dirichlet(np.ones(3))
        x = scale_matrix(k, a, b, 1e-12)
        np.testing.assert_allclose(x.sum(1), a, atol=1e-11)
        np.testing.assert_allclose(x.sum(0), b, atol=1e-11)
        # a diagonal scaling preserves cross ratios
        ratio = lambda m: m[0, 0] * m[1, 1] / (m[0, 1] * m[1, 0])
        assert ratio(x) == pytest.approx(ratio(k), rel=1e-8)

    def test_scale_matrix_near_block_diagonal(self):
        # plain alternating scaling crawls here
        k = np.array([[1.0, 1e-9], [1e-9, 1.0]])
        x = scale_matrix(k, np.array([0.3, 0.7]), np.array([0.7, 0.3]), 1e-12)
        np.testing.assert_allclose(x.sum(1), [0.3, 0.7], atol=1e-11)
        np.testing.assert_allclose(x.sum(0), [0.7, 0.3], atol=1e-11)

    def test_ipf_project_feasible(self, rng):
        p = random_joint(rng, (3, 2, 2))
        m = pairwise_marginals(p)
        q, _ = ipf_project(interior_point(rng, (3, 2, 2)), m.m1y, m.m2y, 1e-12)
        np.testing.assert_allclose(q.sum(1), m.m1y, atol=1e-11)
        np.testing.assert_allclose(q.sum(0), m.m2y, atol=1e-11)

    def test_feasible_init_is_conditionally_independent(self, rng):
        p = random_joint(rng, (2, 3, 2))
        m = pairwise_marginals(p)
        q = feasible_init(m).probs
        py = m.py
        expect = m.m1y[:, None, :] * m.m2y[None, :, :] / py
        np.testing.assert_allclose(q, expect, atol=1e-14)

    def test_label_mismatch_rejected_up_front(self):
        with pytest.raises(ValidationError):
            PairwiseMarginals([[0.5, 0.0], [0.0, 0.5]], [[0.5 - 1e-4, 0.0], [0.0, 0.5 + 1e-4]])

    def test_forced_zero_cells_stay_zero(self, and_gate):
        q, _ = solve_q_star(and_gate)
        # p(x1=0, y=1) = 0 forces q[0, :, 1] = 0
        np.testing.assert_array_equal(q.probs[0, :, 1], 0.0)


class TestKnownDecompositions:
    @pytest.mark.parametrize("table,expect", ORACLE_TABLES)
    def test_matches_grid_oracle(self, table, expect):
        d = JointDist.from_array(np.array(table).reshape(2, 2, 2))
        np.testing.assert_allclose(pid(d).as_tuple(), expect, atol=1e-6)

    @pytest.mark.parametrize("method", ["barrier", "mirror"])
    def test_dis_xor(self, method):
        np.testing.assert_allclose(pid(dis_xor(), SolverConfig(method=method)).as_tuple(), DIS_XOR_PID, atol=1e-6)

    def test_copy_of_x1_is_unique(self):
        np.testing.assert_allclose(pid(copy_x1()).as_tuple(), (0, 1, 0, 0), atol=1e-6)

    def test_all_equal_is_redundant(self):
        np.testing.assert_allclose(pid(all_equal()).as_tuple(), (1, 0, 0, 0), atol=1e-6)

    def test_single_label_is_all_zero(self):
        d = JointDist.from_array(np.full((2, 3, 1), 1 / 6))
        res = pid(d)
        assert res.as_tuple() == (0.0, 0.0, 0.0, 0.0)
        assert res.converged

    def test_live_oracle_on_one_table(self):
        p = np.array(ORACLE_TABLES[0][0]).reshape(2, 2, 2)
        np.testing.assert_allclose(oracles.grid_pid(p), ORACLE_TABLES[0][1], atol=1e-9)


class TestSolverBehaviour:
    def test_barrier_and_mirror_agree(self, rng):
        for shape in [(2, 2, 2), (3, 3, 2), (2, 3, 3)]:
            d = random_joint(rng, shape)
            a = pid(d, SolverConfig(method="barrier"))
            b = pid(d, SolverConfig(method="mirror"))
            np.testing.assert_allclose(a.as_tuple(), b.as_tuple(), atol=1e-5)

    def test_jittered_restarts_agree(self, rng):
        d = random_joint(rng, (3, 2, 2))
        runs = [pid(d, SolverConfig(method="mirror", init_jitter=0.5, seed=s)).as_tuple() for s in (1, 2)]
        np.testing.assert_allclose(runs[0], runs[1], atol=1e-5)

    @pytest.mark.parametrize("method", ["barrier", "mirror"])
    def test_trace_monotone_and_feasible(self, rng, method):
        d = random_joint(rng, (3, 3, 2))
        q, trace = solve_q_star(d, SolverConfig(method=method))
        assert trace.converged
        assert np.all(np.diff(trace.objective_per_sweep) >= -1e-9)
        assert trace.max_marginal_violation <= 1e-8
        assert marginal_violation(q, pairwise_marginals(d)) <= 1e-8

    def test_iteration_cap_reports_non_convergence(self, and_gate):
        res = pid(and_gate, SolverConfig(max_iters=1))
        assert not res.converged
        assert res.iterations == 1

    def test_stale_solution_rejected(self, and_gate, xor_gate):
        q, _ = solve_q_star(and_gate)
        with pytest.raises(StaleSolutionError):
            compute_pid(xor_gate, q)

    def test_shape_mismatch_rejected(self, and_gate, rng):
        q, _ = solve_q_star(random_joint(rng, (3, 2, 2)))
        with pytest.raises(StaleSolutionError):
            compute_pid(and_gate, q)

    def test_marginals_only_source(self, and_gate):
        res = pid(pairwise_marginals(and_gate, include_m12=False))
        assert res.s is None and res.total_mi is None
        assert res.r == pytest.approx(0.311278, abs=1e-5)

    def test_swap_exchanges_uniqueness(self, rng):
        d = random_joint(rng, (3, 2, 2))
        a, b = pid(d), pid(d.swap_modalities())
        np.testing.assert_allclose([a.r, a.u1, a.u2, a.s], [b.r, b.u2, b.u1, b.s], atol=1e-6)

    def test_deterministic(self, rng):
        d = random_joint(rng, (3, 3, 2))
        assert pid(d).as_tuple() == pid(d).as_tuple()


class TestIdentities:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.sampled_from([(2, 2, 2), (3, 2, 2), (2, 3, 3)]))
    def test_consistency_equations(self, seed, shape):
        d = random_joint(np.random.default_rng(seed), shape)
        res = pid(d)
        total = mutual_info(d, ("x1", "x2"), "y")
        assert res.r + res.u1 + res.u2 + res.s == pytest.approx(total, abs=1e-9)
        assert res.r + res.u1 == pytest.approx(mutual_info(d, "x1", "y"), abs=1e-7)
        assert res.r + res.u2 == pytest.approx(mutual_info(d, "x2", "y"), abs=1e-7)
        assert res.s == pytest.approx(res.r - co_information(d), abs=1e-7)
        assert min(res.r, res.u1, res.u2, res.s) >= -1e-7
