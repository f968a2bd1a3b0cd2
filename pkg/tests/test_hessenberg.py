import numpy as np
import pytest

from lslu import (BREAKDOWN_EXACT, BREAKDOWN_NONE, BREAKDOWN_RANK,
                  BreakdownError, PivotStrategy, hess_init, hess_run,
                  hess_step, make_dense_operator)

A22 = np.array([[1.0, 2.0], [3.0, 4.0]])


class TestInit:
    def test_worked_example_no_pivot(self):
        op = make_dense_operator(A22)
        state = hess_init(op, [1.0, 1.0], strategy=PivotStrategy.none())
        assert state.beta == 1.0
        np.testing.assert_array_equal(state.D[:, 0], [1.0, 1.0])
        np.testing.assert_array_equal(state.t, [0, 1])

    def test_full_pivot_tie_takes_first(self):
        op = make_dense_operator(A22)
        state = hess_init(op, [1.0, 1.0], strategy=PivotStrategy.full())
        assert state.beta == 1.0
        np.testing.assert_array_equal(state.t, [0, 1])

    def test_exact_data_breakdown(self):
        op = make_dense_operator(A22)
        x0 = np.array([1.0, 0.5])
        state = hess_init(op, A22 @ x0, x0=x0)
        assert state.breakdown == BREAKDOWN_EXACT
        assert state.k == 0

    def test_zero_leading_entry_without_pivoting(self):
        op = make_dense_operator(A22)
        with pytest.raises(BreakdownError):
            hess_init(op, [0.0, 1.0], strategy=PivotStrategy.none())

    def test_full_pivot_takes_infnorm_entry(self):
        op = make_dense_operator(np.eye(2))
        state = hess_init(op, [1.0, 2.0], strategy=PivotStrategy.full())
        assert state.beta == 2.0
        np.testing.assert_array_equal(state.D[:, 0], [0.5, 1.0])


class TestStep:
    def test_worked_example_step1(self):
        op = make_dense_operator(A22)
        state = hess_init(op, [1.0, 1.0], strategy=PivotStrategy.none())
        hess_step(state, op)
        assert state.W[0, 0] == 4.0
        np.testing.assert_array_equal(state.L[:, 0], [1.0, 1.5])
        assert state.H[0, 0] == 4.0 and state.H[1, 0] == 5.0
        np.testing.assert_array_equal(state.D[:, 1], [0.0, 1.0])

    def test_identity_full_pivot_exact_breakdown(self):
        op = make_dense_operator(np.eye(2))
        state = hess_init(op, [1.0, 2.0], strategy=PivotStrategy.full())
        hess_step(state, op)
        assert state.W[0, 0] == 1.0
        np.testing.assert_array_equal(state.L[:, 0], [0.5, 1.0])
        assert state.H[0, 0] == 1.0
        assert state.breakdown == BREAKDOWN_EXACT
        assert state.k == 1 and state.d_count == 1

    def test_post_step_exact_unit_and_zero(self):
        op = make_dense_operator(A22)
        state = hess_init(op, [1.0, 1.0], strategy=PivotStrategy.none())
        hess_step(state, op)
        assert state.D[state.t[1], 1] == 1.0
        assert state.D[state.t[0], 1] == 0.0

    def test_step_on_broken_state_rejected(self):
        op = make_dense_operator(np.eye(2))
        state = hess_init(op, [1.0, 2.0])
        hess_step(state, op)
        with pytest.raises(ValueError):
            hess_step(state, op)


class TestRun:
    def test_worked_example_exhaustion(self):
        op = make_dense_operator(A22)
        state = hess_run(op, [1.0, 1.0], strategy=PivotStrategy.none(), maxiter=2)
        assert state.k == 2
        assert state.H.shape == (3, 2)
        assert state.D.shape == (2, 2)
        assert state.H[2, 1] == 0.0
        assert state.breakdown == BREAKDOWN_RANK

    def test_maxiter_beyond_dimension_bound(self, gravity32):
        state = hess_run(gravity32.op, gravity32.b, maxiter=500)
        assert state.breakdown != BREAKDOWN_NONE
        assert state.k <= 32

    def test_gravity16_relation_residuals(self):
        from lslu import make_gravity_problem
        prob = make_gravity_problem(16, noise_level=1e-2, seed=0)
        state = hess_run(prob.op, prob.b, maxiter=10)
        assert state.k == 10
        _assert_relations(prob.op.to_dense(), state)

    def test_tall_matrix_exhausts_solution_space(self):
        # m > n: the adjoint image runs out of fresh coordinates at k = n
        rng = np.random.default_rng(31)
        op = make_dense_operator(rng.standard_normal((6, 3)))
        state = hess_run(op, rng.standard_normal(6), maxiter=10)
        assert state.k == 3
        assert state.d_count == 4
        assert state.breakdown == BREAKDOWN_RANK

    def test_wide_matrix_exhausts_residual_space(self):
        # m < n: no d_{m+1} exists; the final column keeps a zero H row
        rng = np.random.default_rng(32)
        op = make_dense_operator(rng.standard_normal((3, 6)))
        state = hess_run(op, rng.standard_normal(3), maxiter=10)
        assert state.k == 3
        assert state.d_count == 3
        assert state.H.shape == (4, 3)
        assert state.H[3, 2] == 0.0
        assert state.breakdown in (BREAKDOWN_RANK, BREAKDOWN_EXACT)


def _strategies(m, n):
    return (PivotStrategy.none(), PivotStrategy.full(),
            PivotStrategy.sampled(min(25, max(m, n)), seed=5))


def _assert_unit_triangular(state):
    for j in range(state.k):
        assert state.L[state.g[j], j] == 1.0
        for i in range(j):
            assert state.L[state.g[i], j] == 0.0
    for j in range(state.d_count):
        assert state.D[state.t[j], j] == 1.0
        for i in range(j):
            assert state.D[state.t[i], j] == 0.0


def _assert_relations(matrix, state):
    k, dk = state.k, state.d_count
    scale = np.linalg.norm(matrix, "fro")
    rho1 = np.linalg.norm(matrix @ state.L - state.D @ state.H[:dk, :], "fro")
    assert rho1 <= 1e-10 * scale * np.linalg.norm(state.L, "fro")
    rho2 = np.linalg.norm(matrix.T @ state.D[:, :k] - state.L @ state.W, "fro")
    assert rho2 <= 1e-10 * scale * np.linalg.norm(state.D[:, :k], "fro")


class TestStructuralInvariants:
    @pytest.mark.parametrize("kind", ["none", "full", "sampled"])
    def test_random_dense(self, kind, random_100x80):
        matrix, b = random_100x80
        op = make_dense_operator(matrix)
        strategy = {"none": PivotStrategy.none(), "full": PivotStrategy.full(),
                    "sampled": PivotStrategy.sampled(25, seed=5)}[kind]
        state = hess_run(op, b, strategy=strategy, maxiter=15)
        _assert_unit_triangular(state)
        _assert_relations(matrix, state)

    def test_gravity_all_strategies(self, gravity64):
        for strategy in _strategies(64, 64):
            state = hess_run(gravity64.op, gravity64.b, strategy=strategy,
                             maxiter=15)
            _assert_unit_triangular(state)
            _assert_relations(gravity64.op.to_dense(), state)

    def test_tomo_all_strategies(self, tomo16):
        dense = tomo16.op.to_dense()
        m, n = tomo16.op.shape
        for strategy in _strategies(m, n):
            state = hess_run(tomo16.op, tomo16.b, strategy=strategy, maxiter=15)
            _assert_unit_triangular(state)
            _assert_relations(dense, state)


def test_span_matches_explicit_krylov_matrices():
    # the L/D columns span the same spaces as the normal-equation Krylov
    # matrices built by explicit repeated application
    rng = np.random.default_rng(3)
    matrix = rng.standard_normal((12, 10))
    op = make_dense_operator(matrix)
    b = rng.standard_normal(12)
    state = hess_run(op, b, maxiter=50)
    assert state.k >= 10

    P = [matrix.T @ b]
    C = [b.copy()]
    for _ in range(state.k):
        P.append(matrix.T @ (matrix @ P[-1]))
        C.append(matrix @ (matrix.T @ C[-1]))
    for k in range(1, state.k + 1):
        Pk = np.column_stack(P[:k])
        Ck = np.column_stack(C[:k])
        Pk = Pk / np.linalg.norm(Pk, axis=0)
        Ck = Ck / np.linalg.norm(Ck, axis=0)
        assert np.linalg.matrix_rank(Pk) == k
        assert np.linalg.matrix_rank(np.hstack([state.L[:, :k], Pk])) == k
        assert np.linalg.matrix_rank(Ck) == k
        assert np.linalg.matrix_rank(np.hstack([state.D[:, :k], Ck])) == k


def test_sampled_full_window_reproduces_full_pivoting(random_100x80):
    matrix, b = random_100x80
    op = make_dense_operator(matrix)
    full = hess_run(op, b, strategy=PivotStrategy.full(), maxiter=12)
    sampled = hess_run(op, b, strategy=PivotStrategy.sampled(100, seed=42),
                       maxiter=12)
    np.testing.assert_array_equal(full.t, sampled.t)
    np.testing.assert_array_equal(full.g, sampled.g)
    np.testing.assert_array_equal(full.L, sampled.L)
    np.testing.assert_array_equal(full.D, sampled.D)
    np.testing.assert_array_equal(full.H, sampled.H)
    np.testing.assert_array_equal(full.W, sampled.W)


def test_sampled_window_shrinks_below_sample_size():
    # late iterations leave eligible windows smaller than the sample size;
    # the draw clamps to the window and the run still completes
    rng = np.random.default_rng(44)
    matrix = rng.standard_normal((10, 8))
    op = make_dense_operator(matrix)
    state = hess_run(op, rng.standard_normal(10),
                     strategy=PivotStrategy.sampled(8, seed=1), maxiter=20)
    assert state.k >= 7
    _assert_unit_triangular(state)
    _assert_relations(matrix, state)


def test_sampled_seed_reproducible(tomo16):
    a = hess_run(tomo16.op, tomo16.b, strategy=PivotStrategy.sampled(25, seed=8),
                 maxiter=8)
    b = hess_run(tomo16.op, tomo16.b, strategy=PivotStrategy.sampled(25, seed=8),
                 maxiter=8)
    np.testing.assert_array_equal(a.L, b.L)
    np.testing.assert_array_equal(a.t, b.t)


def test_sample_size_validation():
    op = make_dense_operator(np.eye(4))
    with pytest.raises(ValueError):
        hess_init(op, np.ones(4), strategy=PivotStrategy.sampled(9, seed=0))
    with pytest.raises(ValueError):
        PivotStrategy.sampled(0, seed=0)
    with pytest.raises(ValueError):
        PivotStrategy(kind="diagonal")
