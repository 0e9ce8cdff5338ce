"""Matrix kernel: SVD, Schatten norms, polar factors, projections, prox."""

import numpy as np
import pytest

import cstar_approx as ca
from cstar_approx.matrix_core import rank_tolerance

from util import crandn

# 3x3 block reused across the suite (head of the finite-rank companion in
# the shipped isometry-tail example)
BLOCK_A = np.array([[1.0, 0.5, 0.0], [0.0, 0.5, 1.0], [1.0, 0.0, 0.0]])

# frozen output of the characteristic-polynomial oracle below
BLOCK_A_SVALS = np.array([1.47358798, 1.11145927, 0.30528143])


def _cubic_singular_values(a):
    """Independent oracle: singular values from the characteristic
    polynomial of the 3x3 Gram matrix, via a cubic root finder."""
    g = a.conj().T @ a
    c2 = -np.trace(g).real
    minors = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            minors += (g[i, i] * g[j, j] - g[i, j] * g[j, i]).real
    c0 = -np.linalg.det(g).real
    roots = np.roots([1.0, c2, minors, c0])
    return np.sort(np.sqrt(np.clip(roots.real, 0.0, None)))[::-1]


def test_svd_diagonal_psd():
    res = ca.svd(np.diag([3.0, 1.0]))
    assert np.allclose(res.s, [3.0, 1.0])
    assert np.allclose(res.u, np.eye(2))
    assert np.allclose(res.v, np.eye(2))


def test_svd_zero_matrix():
    res = ca.svd(np.zeros((2, 2)))
    assert np.allclose(res.s, [0.0, 0.0])


def test_svd_example_block_matches_cubic_oracle():
    oracle = _cubic_singular_values(BLOCK_A)
    assert np.allclose(oracle, BLOCK_A_SVALS, atol=1e-8)
    res = ca.svd(BLOCK_A)
    assert np.allclose(res.s, oracle, atol=1e-10)


def test_svd_rejects_nonfinite():
    with pytest.raises(ca.NonFinite):
        ca.svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ca.NonFinite):
        ca.svd(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_svd_reconstruction_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = int(rng.integers(1, 13))
        n = int(rng.integers(1, 13))
        a = crandn(rng, m, n)
        res = ca.svd(a)
        rebuilt = (res.u * res.s) @ res.v.conj().T
        assert np.linalg.norm(rebuilt - a) <= 1e-10 * np.linalg.norm(a)
        r = min(m, n)
        assert np.allclose(res.u.conj().T @ res.u, np.eye(r), atol=1e-11)
        assert np.allclose(res.v.conj().T @ res.v, np.eye(r), atol=1e-11)
        assert np.all(np.diff(res.s) <= 1e-14)
        assert np.all(res.s >= 0)


def test_schatten_identity():
    assert ca.schatten_norm(np.eye(2), "operator") == pytest.approx(1.0)
    assert ca.schatten_norm(np.eye(2), "trace") == pytest.approx(2.0)


def test_schatten_rank_one():
    rng = np.random.default_rng(1)
    xi = crandn(rng, 4)
    zeta = crandn(rng, 4)
    xi /= np.linalg.norm(xi)
    zeta /= np.linalg.norm(zeta)
    dyad = np.outer(xi, zeta.conj())
    assert ca.schatten_norm(dyad, "operator") == pytest.approx(1.0, abs=1e-12)
    assert ca.schatten_norm(dyad, "trace") == pytest.approx(1.0, abs=1e-12)


def test_schatten_nilpotent():
    m = np.array([[0.0, 2.0], [0.0, 0.0]])
    assert ca.schatten_norm(m, "operator") == pytest.approx(2.0)
    assert ca.schatten_norm(m, "trace") == pytest.approx(2.0)


def test_schatten_kind_validation():
    with pytest.raises(ValueError):
        ca.schatten_norm(np.eye(2), "frobenius")


def test_holder_and_ordering_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(1, 8))
        a = crandn(rng, n, n)
        b = crandn(rng, n, n)
        lhs = abs(np.trace(a @ b))
        assert lhs <= ca.schatten_norm(a, "trace") * ca.schatten_norm(b, "operator") + 1e-10
        assert ca.schatten_norm(a, "operator") <= ca.schatten_norm(a, "trace") + 1e-14


def test_polar_diagonal_with_sign():
    res = ca.polar_decompose(np.diag([2.0, -1.0]))
    assert np.allclose(res.v, np.diag([1.0, -1.0]), atol=1e-12)
    assert np.allclose(res.absx, np.diag([2.0, 1.0]), atol=1e-12)


def test_polar_zero_matrix():
    res = ca.polar_decompose(np.zeros((3, 3)))
    assert np.allclose(res.v, 0.0)
    assert np.allclose(res.absx, 0.0)


def test_polar_shift_residual():
    # residual of the banded shift example after subtracting the half-sum
    # of its companions: a pure subdiagonal with weights (1, 1/2, 1/4, 1/4)
    n = 6
    weights = [1.0, 0.5, 0.25, 0.25]
    resid = np.zeros((n, n))
    for i, w in enumerate(weights):
        resid[i + 1, i] = w
    res = ca.polar_decompose(resid)
    expected_v = np.zeros((n, n))
    for i in range(len(weights)):
        expected_v[i + 1, i] = 1.0
    assert np.allclose(res.v, expected_v, atol=1e-12)
    val = np.trace(res.v.conj().T @ resid).real
    assert val == pytest.approx(2.0, abs=1e-12)
    assert val == pytest.approx(ca.schatten_norm(resid, "trace"), abs=1e-12)


def test_polar_invariants_random():
    rng = np.random.default_rng(3)
    for _ in range(40):
        m = int(rng.integers(1, 9))
        n = int(rng.integers(1, 9))
        a = crandn(rng, m, n)
        res = ca.polar_decompose(a)
        assert np.linalg.norm(res.v @ res.absx - a) <= 1e-10 * np.linalg.norm(a)
        # partial isometry law and PSD factor
        assert np.linalg.norm(res.v @ res.v.conj().T @ res.v - res.v) <= 1e-10
        assert np.linalg.norm(res.absx - res.absx.conj().T) <= 1e-10
        assert np.min(np.linalg.eigvalsh((res.absx + res.absx.conj().T) / 2)) >= -1e-10
        # support functional identity
        val = np.trace(res.v.conj().T @ a)
        assert abs(val.imag) <= 1e-9
        assert val.real == pytest.approx(ca.schatten_norm(a, "trace"), abs=1e-9)


def test_nuclear_ball_noop_inside():
    a = np.diag([0.25, 0.25])
    assert np.allclose(ca.project_nuclear_ball(a, 1.0), a)


def test_nuclear_ball_two_point_kkt():
    # 1-D KKT oracle on the two-point simplex: the projection of (3, 1)
    # onto {s >= 0, s1 + s2 <= 1} is max(s - theta, 0) with the smallest
    # theta enforcing the budget
    s = np.array([3.0, 1.0])
    thetas = np.linspace(0.0, 3.0, 300001)
    sums = np.maximum(s[0] - thetas, 0) + np.maximum(s[1] - thetas, 0)
    theta = thetas[np.argmax(sums <= 1.0)]
    oracle = np.maximum(s - theta, 0)
    assert np.allclose(oracle, [1.0, 0.0], atol=1e-4)
    assert np.allclose(ca.project_nuclear_ball(np.diag(s), 1.0), np.diag([1.0, 0.0]), atol=1e-12)


def test_nuclear_ball_symmetric():
    assert np.allclose(ca.project_nuclear_ball(np.diag([2.0, 2.0]), 2.0), np.eye(2))


def test_nuclear_ball_is_frobenius_projection():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a = crandn(rng, 4, 4)
        proj = ca.project_nuclear_ball(a, 1.0)
        assert ca.schatten_norm(proj, "trace") <= 1.0 + 1e-10
        d0 = np.linalg.norm(proj - a)
        for _ in range(20):
            q = crandn(rng, 4, 4)
            q *= 0.01 / np.linalg.norm(q)
            other = ca.project_nuclear_ball(proj + q, 1.0)
            assert d0 <= np.linalg.norm(other - a) + 1e-12


def test_prox_trace_soft_threshold():
    out = ca.prox_schatten(np.diag([3.0, 1.0]), "trace", 1.0)
    assert np.allclose(out, np.diag([2.0, 0.0]), atol=1e-12)


def test_prox_operator_zero():
    assert np.allclose(ca.prox_schatten(np.zeros((3, 3)), "operator", 1.0), 0.0)


def test_prox_operator_diagonal_grid_oracle():
    # grid over diagonal candidates certifies diag(2, 1) as the minimizer of
    # max(t) + 0.5 * ||t - (3, 1)||^2
    grid = np.linspace(0.0, 3.5, 351)
    best = (np.inf, None)
    for t1 in grid:
        f = np.maximum(t1, grid) + 0.5 * ((t1 - 3.0) ** 2 + (grid - 1.0) ** 2)
        i = int(np.argmin(f))
        if f[i] < best[0]:
            best = (f[i], (t1, grid[i]))
    assert np.allclose(best[1], (2.0, 1.0), atol=1e-8)
    out = ca.prox_schatten(np.diag([3.0, 1.0]), "operator", 1.0)
    assert np.allclose(out, np.diag([2.0, 1.0]), atol=1e-12)


@pytest.mark.parametrize("kind", ["trace", "operator"])
def test_prox_optimality_random(kind):
    rng = np.random.default_rng(5)
    step = 0.7
    for _ in range(5):
        a = crandn(rng, 4, 4)
        p = ca.prox_schatten(a, kind, step)
        obj = step * ca.schatten_norm(p, kind) + 0.5 * np.linalg.norm(p - a) ** 2
        for _ in range(100):
            q = crandn(rng, 4, 4)
            q *= 1e-3 / np.linalg.norm(q)
            trial = p + q
            obj_trial = step * ca.schatten_norm(trial, kind) + 0.5 * np.linalg.norm(trial - a) ** 2
            assert obj <= obj_trial + 1e-12


def test_rank_tolerance_scaling():
    assert rank_tolerance((4, 3), 2.0) == pytest.approx(4 * 2.0 * 1e-11)
