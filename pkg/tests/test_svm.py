import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hrvsvm import kernels
from hrvsvm.errors import (
    ConflictingLabelsError,
    DimensionError,
    SingleClassError,
    UnsupportedKernelError,
)
from hrvsvm.svm import (
    DualSolution,
    KernelSpec,
    Model,
    TrainingSet,
    build_model,
    classify,
    compute_bias,
    decision_value,
    gram_matrix,
    kernel_eval,
    linear_margin,
    primal_weights,
    solve_dual,
)

GAUSS = KernelSpec("gaussian", sigma=1.0)
LINEAR = KernelSpec("linear")
XOR_X = [[0, 0], [1, 1], [0, 1], [1, 0]]
XOR_Y = [1, 1, -1, -1]


def random_set(rng, max_l=6):
    l = int(rng.integers(2, max_l + 1))
    pts = rng.uniform(-2, 2, (l, 2))
    y = rng.choice([-1.0, 1.0], l)
    y[0], y[1] = 1.0, -1.0
    return pts, y


def full_decision(sol, ts, x):
    row = np.array([kernel_eval(sol.kernel, p, x) for p in ts.points])
    return float(np.sum(sol.alphas * ts.labels * row) + sol.bias)


# kernels


def test_kernel_values():
    assert kernel_eval(GAUSS, [0.3, -1.2], [0.3, -1.2]) == 1.0
    assert kernel_eval(GAUSS, [0, 0], [1, 1]) == pytest.approx(math.exp(-1), abs=1e-12)
    assert kernel_eval(LINEAR, [1, 2], [3, 4]) == 11
    assert kernel_eval(KernelSpec("polynomial", degree=2, coef0=1.0), [1, 2], [3, 4]) == 144


def test_gaussian_sigma_scales_distance():
    assert kernel_eval(KernelSpec(sigma=2.0), [0, 0], [2, 2]) == pytest.approx(math.exp(-1), abs=1e-12)


def test_kernel_dimension_mismatch():
    with pytest.raises(DimensionError):
        kernel_eval(GAUSS, [1, 2], [1, 2, 3])


@pytest.mark.parametrize("kwargs", [{"kind": "sigmoid"}, {"sigma": 0}, {"sigma": -1}, {"kind": "polynomial", "degree": 0}])
def test_kernel_spec_validation(kwargs):
    with pytest.raises(ValueError):
        KernelSpec(**kwargs)


@pytest.mark.parametrize("kspec", [GAUSS, LINEAR, KernelSpec("polynomial", degree=3, coef0=0.5), KernelSpec(sigma=0.3)])
def test_gram_matches_pairwise(kspec):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(9, 2))
    G = gram_matrix(kspec, pts)
    ref = oracles.gram(pts.tolist(), lambda a, b: kernel_eval(kspec, a, b))
    np.testing.assert_allclose(G, ref, rtol=1e-12, atol=1e-12)
    assert np.array_equal(G, G.T)


@pytest.mark.parametrize("code", [kernels.LINEAR, kernels.GAUSSIAN, kernels.POLYNOMIAL])
def test_gram_backends_agree(code):
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(12, 3))
    py = kernels.gram_py(pts, code, 0.7, 2, 1.0)
    assert np.array_equal(py, py.T)
    if kernels.gram_jit is not None:
        jit = kernels.gram_jit(pts, code, 0.7, 2, 1.0)
        assert np.array_equal(jit, jit.T)
        np.testing.assert_allclose(py, jit, rtol=1e-12, atol=1e-12)


def test_gaussian_gram_unit_diagonal_and_psd():
    rng = np.random.default_rng(5)
    for _ in range(200):
        pts = rng.uniform(-3, 3, (3, 2))
        G = gram_matrix(GAUSS, pts)
        assert np.all(np.diag(G) == 1.0)
        assert min(oracles.leading_minors(G)) >= -1e-9
        assert np.linalg.eigvalsh(G).min() >= -1e-9


def test_gram_dimension_mismatch():
    with pytest.raises(DimensionError):
        gram_matrix(GAUSS, [[1, 2], [1]])


# training set


def test_training_set_requires_both_classes():
    with pytest.raises(SingleClassError):
        TrainingSet([[0, 0], [1, 1]], [1, 1])


def test_training_set_rejects_conflicting_duplicates():
    with pytest.raises(ConflictingLabelsError):
        TrainingSet([[0, 0], [1, 1], [0, 0]], [1, -1, -1])
    TrainingSet([[0, 0], [1, 1], [0, 0]], [1, -1, 1])


def test_training_set_validation():
    with pytest.raises(ValueError):
        TrainingSet([[0, 0], [1, 1]], [1, 0])
    with pytest.raises(DimensionError):
        TrainingSet([[0, 0], [1, 1]], [1, -1, 1])
    with pytest.raises(ValueError):
        TrainingSet([], [])


# analytic solutions


@pytest.fixture(scope="module")
def two_point():
    ts = TrainingSet([[0, 0], [2, 0]], [1, -1])
    return ts, solve_dual(ts, LINEAR, c_bound=1000)


def test_two_point_solution(two_point):
    ts, sol = two_point
    assert sol.converged
    np.testing.assert_allclose(sol.alphas, [0.5, 0.5], atol=1e-6)
    assert sol.bias == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(primal_weights(sol, ts), [-1, 0], atol=1e-6)
    assert linear_margin(sol, ts) == pytest.approx(2.0, abs=1e-6)
    assert compute_bias(sol, ts) == pytest.approx(1.0, abs=1e-6)
    assert sol.objective_value == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("x, expected", [([0, 0], 1.0), ([1, 0], 0.0), ([3, 0], -2.0)])
def test_two_point_decision(two_point, x, expected):
    ts, sol = two_point
    assert decision_value(build_model(sol, ts), x) == pytest.approx(expected, abs=1e-6)


def test_wider_pair_margin():
    ts = TrainingSet([[0, 0], [4, 0]], [1, -1])
    sol = solve_dual(ts, LINEAR)
    np.testing.assert_allclose(primal_weights(sol, ts), [-0.5, 0], atol=1e-6)
    assert linear_margin(sol, ts) == pytest.approx(4.0, abs=1e-6)


def test_symmetric_pair_bias_zero():
    ts = TrainingSet([[-1], [1]], [1, -1])
    sol = solve_dual(ts, LINEAR)
    assert sol.bias == pytest.approx(0.0, abs=1e-9)
    assert compute_bias(sol, ts) == pytest.approx(0.0, abs=1e-9)


def test_margin_requires_linear_kernel():
    ts = TrainingSet(XOR_X, XOR_Y)
    with pytest.raises(UnsupportedKernelError):
        linear_margin(solve_dual(ts, GAUSS), ts)


def test_single_class_rejected():
    with pytest.raises(SingleClassError):
        solve_dual(TrainingSet([[0, 0], [1, 1]], [1, 1]), GAUSS)


def test_xor_gaussian_symmetric_optimum():
    ts = TrainingSet(XOR_X, XOR_Y)
    sol = solve_dual(ts, GAUSS)
    assert sol.converged
    model = build_model(sol, ts)
    assert [classify(model, x) for x in XOR_X] == XOR_Y
    assert np.ptp(sol.alphas) < 1e-6
    # grid over (a1, a2, a3) with a4 fixed by the equality constraint
    grid = np.linspace(0, 12, 121)
    a1, a2, a3 = np.meshgrid(grid, grid, grid, indexing="ij")
    a4 = a1 + a2 - a3
    A = np.stack([a1, a2, a3, a4], axis=-1)[a4 >= 0]
    y = np.array(XOR_Y, dtype=float)
    Q = np.outer(y, y) * oracles.gram(XOR_X, oracles.gaussian)
    values = A.sum(axis=1) - 0.5 * np.einsum("ni,ij,nj->n", A, Q, A)
    best = A[np.argmax(values)]
    assert np.ptp(best) == 0
    assert np.abs(best - sol.alphas).max() <= 0.1
    exact, _ = oracles.brute_force_dual(XOR_X, XOR_Y, oracles.gaussian, 1000.0)
    assert values.max() <= exact + 1e-12
    assert sol.objective_value == pytest.approx(exact, abs=1e-4)


@pytest.mark.parametrize("c", [0.01, 1.0, 100.0, 1e6])
def test_xor_not_linearly_separable(c):
    ts = TrainingSet(XOR_X, XOR_Y)
    model = build_model(solve_dual(ts, LINEAR, c_bound=c, max_passes=2000), ts)
    assert sum(classify(model, x) == y for x, y in zip(XOR_X, XOR_Y)) <= 3


def test_bias_fallback_midpoint():
    # 1-D interleaved classes with a tiny box: every multiplier ends at C
    pts = [[0.0], [0.3], [0.1], [0.4]]
    y = [1, 1, -1, -1]
    ts = TrainingSet(pts, y)
    sol = solve_dual(ts, LINEAR, c_bound=0.01)
    assert np.all(sol.alphas == 0.01)
    f0 = [full_decision(sol, ts, p) - sol.bias for p in pts]

    def worst_violation(b):
        return max(max(f0[i] + b for i in range(4) if y[i] < 0), max(-(f0[i] + b) for i in range(4) if y[i] > 0))

    grid = np.linspace(-1, 1, 200001)
    best_b = grid[np.argmin([worst_violation(b) for b in grid])]
    assert compute_bias(sol, ts) == pytest.approx(best_b, abs=1e-5)
    assert sol.bias == compute_bias(sol, ts)


def test_compute_bias_averages_margin_vectors():
    ts = TrainingSet([[0, 0], [2, 0]], [1, -1])
    sol = DualSolution(np.array([0.5, 0.5]), 0.0, 0.5, LINEAR, 1000.0, 1, True)
    assert compute_bias(sol, ts) == pytest.approx(1.0)


# random suite


def random_suite(n=60, seed=2024):
    rng = np.random.default_rng(seed)
    for i in range(n):
        pts, y = random_set(rng)
        kspec, kern, c = (GAUSS, oracles.gaussian, 1000.0) if i % 3 else (LINEAR, oracles.linear, 10.0)
        yield pts, y, kspec, kern, c


def test_objective_matches_enumeration_oracle():
    for pts, y, kspec, kern, c in random_suite():
        sol = solve_dual(TrainingSet(pts, y), kspec, c_bound=c)
        best, _ = oracles.brute_force_dual(pts.tolist(), y, kern, c)
        assert sol.objective_value == pytest.approx(best, abs=1e-4)


def test_enumeration_oracle_agrees_with_coordinate_search():
    rng = np.random.default_rng(9)
    for _ in range(5):
        pts, y = random_set(rng, max_l=4)
        exact, _ = oracles.brute_force_dual(pts.tolist(), y, oracles.gaussian, 5.0)
        approx, _ = oracles.coordinate_search_dual(pts.tolist(), y, oracles.gaussian, 5.0)
        assert approx == pytest.approx(exact, abs=1e-6)


def test_feasibility_and_kkt():
    tol = 1e-3
    for pts, y, kspec, _, c in random_suite():
        ts = TrainingSet(pts, y)
        sol = solve_dual(ts, kspec, c_bound=c, kkt_tol=tol)
        assert np.all(sol.alphas >= 0) and np.all(sol.alphas <= c + 1e-8)
        assert abs(sol.alphas @ y) <= 1e-6 * max(1.0, sol.alphas.sum())
        assert np.any(sol.alphas > 0)
        if sol.converged:
            for i in np.flatnonzero((sol.alphas > 1e-8) & (sol.alphas < c - 1e-8)):
                assert abs(y[i] * full_decision(sol, ts, pts[i]) - 1) <= 2 * tol


def test_feasible_without_convergence():
    rng = np.random.default_rng(4)
    pts, y = rng.normal(size=(30, 2)), rng.choice([-1.0, 1.0], 30)
    y[:2] = [1, -1]
    sol = solve_dual(TrainingSet(pts, y), GAUSS, max_passes=1)
    assert not sol.converged
    assert np.all((sol.alphas >= 0) & (sol.alphas <= 1000))
    assert abs(sol.alphas @ y) <= 1e-6 * max(1.0, sol.alphas.sum())


def test_objective_non_decreasing():
    for pts, y, kspec, _, c in random_suite(30, seed=77):
        sol = solve_dual(TrainingSet(pts, y), kspec, c_bound=c, trace=True)
        tr = sol.trace
        assert tr.size == sol.updates
        slack = 1e-9 * max(1.0, float(np.abs(tr).max(initial=0)))
        assert np.all(np.diff(tr) >= -slack)


def test_smo_backends_agree():
    if kernels.smo_jit is None:
        pytest.skip("numba not available")
    for pts, y, kspec, _, c in random_suite(20, seed=5):
        G = gram_matrix(kspec, pts)
        a = kernels.smo_py(G, y, c, 1e-3, 10000, 1e-12, True)
        b = kernels.smo_jit(G, y, c, 1e-3, 10000, 1e-12, True)
        np.testing.assert_allclose(a[0], b[0], rtol=1e-9, atol=1e-9)
        assert a[2:5] == b[2:5]


def test_permutation_invariance():
    rng = np.random.default_rng(8)
    probes = rng.uniform(-2, 2, (20, 2))
    for _ in range(20):
        pts, y = random_set(rng)
        perm = rng.permutation(len(y))
        m1 = build_model(s := solve_dual(TrainingSet(pts, y), GAUSS, kkt_tol=1e-9), TrainingSet(pts, y))
        ts2 = TrainingSet(pts[perm], y[perm])
        m2 = build_model(solve_dual(ts2, GAUSS, kkt_tol=1e-9), ts2)
        assert s.converged
        for p in probes:
            assert decision_value(m1, p) == pytest.approx(decision_value(m2, p), abs=1e-6)


def test_pruning_invariance():
    rng = np.random.default_rng(12)
    for pts, y, kspec, _, c in random_suite(30, seed=12):
        ts = TrainingSet(pts, y)
        sol = solve_dual(ts, kspec, c_bound=c)
        model = build_model(sol, ts)
        assert np.all(model.support_alphas > 1e-8)
        for p in rng.uniform(-3, 3, (10, 2)):
            assert decision_value(model, p) == pytest.approx(full_decision(sol, ts, p), abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=2, max_size=8, unique=True),
    st.lists(st.sampled_from([-1.0, 1.0]), min_size=8, max_size=8),
    st.floats(0.01, 1e4),
)
def test_feasibility_property(points, labels, c):
    y = np.array(labels[: len(points)])
    y[0], y[1] = 1.0, -1.0
    sol = solve_dual(TrainingSet(points, y), GAUSS, c_bound=c, max_passes=200)
    assert np.all(sol.alphas >= 0) and np.all(sol.alphas <= c + 1e-8)
    assert abs(sol.alphas @ y) <= 1e-6 * max(1.0, sol.alphas.sum())


def test_classify_sign_rule():
    model = Model(np.array([[1.0, 0.0]]), np.array([1.0]), np.array([1.0]), 0.0, LINEAR)
    assert classify(model, [0.999, 0]) == 1
    assert classify(model, [-0.646, 0]) == -1
    assert classify(model, [0.0, 0]) == -1


def test_decision_dimension_mismatch():
    model = Model(np.array([[1.0, 0.0]]), np.array([1.0]), np.array([1.0]), 0.0, LINEAR)
    with pytest.raises(DimensionError):
        decision_value(model, [1.0, 2.0, 3.0])
