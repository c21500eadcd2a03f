import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from saddlepred.problems import (GapUnavailableError, NoisyGradientConfig, SaddleProblem,
                                 finite_diff_check, make_bilinear, make_regularized, make_rng,
                                 primal_dual_gap, spawn_rngs, with_noise)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_bilinear_loss_examples():
    assert make_bilinear([[1.0]]).loss(np.array([2.0]), np.array([3.0])) == 6.0
    p = make_bilinear(np.eye(3))
    assert p.loss(np.eye(3)[0], np.eye(3)[1]) == 0.0
    p = make_bilinear([[1, 2], [3, 4]])
    assert p.loss(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == 3.0


def test_bilinear_gradients_and_saddle():
    K = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    p = make_bilinear(K)
    u, v = np.array([0.5, -1.0]), np.array([1.0, 2.0, -0.5])
    np.testing.assert_array_equal(p.grad_u(u, v), K.T @ v)
    np.testing.assert_array_equal(p.grad_v(u, v), K @ u)
    us, vs = p.saddle
    assert np.linalg.norm(p.grad_u(us, vs)) <= 1e-10
    assert np.linalg.norm(p.grad_v(us, vs)) <= 1e-10
    assert (p.dim_u, p.dim_v) == (2, 3)


def test_bilinear_rejects_nonfinite():
    with pytest.raises(ValueError):
        make_bilinear([[np.nan]])
    with pytest.raises(ValueError):
        make_bilinear([[1.0, np.inf]])


def test_problem_is_immutable():
    p = make_bilinear([[1.0]])
    with pytest.raises(Exception):
        p.dim_u = 3


def test_gap_examples():
    p = make_bilinear([[1.0]])
    assert primal_dual_gap(p, np.zeros(1), np.zeros(1)) == 0.0
    assert primal_dual_gap(p, np.array([1.0]), np.array([0.5])) == 0.0
    p = make_bilinear([[2.0], [0.0]])
    assert primal_dual_gap(p, np.array([1.0]), np.array([1.0, 1.0])) == 0.0


def test_gap_unavailable_without_saddle():
    p = SaddleProblem(1, 1, lambda u, v: 0.0, lambda u, v: u, lambda u, v: v)
    with pytest.raises(GapUnavailableError, match="gap unavailable"):
        primal_dual_gap(p, np.zeros(1), np.zeros(1))


@given(arrays(np.float64, 2, elements=finite), arrays(np.float64, 3, elements=finite),
       st.floats(0, 5))
def test_regularized_gap_closed_form(u, v, mu):
    p = make_regularized(np.arange(6.0).reshape(3, 2), mu)
    expected = 0.5 * mu * (u @ u + v @ v)
    assert primal_dual_gap(p, u, v) == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert primal_dual_gap(p, u, v) >= -1e-12


@given(arrays(np.float64, 2, elements=finite), arrays(np.float64, 2, elements=finite))
def test_bilinear_coupling_symmetry(u, v):
    p = make_bilinear([[1.0, -2.0], [0.5, 3.0]])
    lhs = p.grad_u(u, v) @ u
    rhs = p.grad_v(u, v) @ v
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)
    assert lhs == pytest.approx(p.loss(u, v), rel=1e-12, abs=1e-9)


def test_finite_diff_examples():
    p = make_bilinear([[1.0]])
    eu, ev = finite_diff_check(p, np.array([0.3]), np.array([-1.7]), h=1e-5)
    assert eu <= 1e-9 and ev <= 1e-9
    eu, ev = finite_diff_check(p, np.zeros(1), np.zeros(1), h=1e-5)
    assert np.isfinite(eu) and np.isfinite(ev)


def test_finite_diff_rejects_bad_step():
    with pytest.raises(ValueError):
        finite_diff_check(make_bilinear([[1.0]]), np.zeros(1), np.zeros(1), h=0.0)


def test_gradient_consistency_many_points():
    rng = make_rng(7)
    problems = [make_bilinear(rng.standard_normal((3, 2))),
                make_regularized(rng.standard_normal((2, 4)), 0.7)]
    for p in problems:
        for _ in range(100):
            u = rng.standard_normal(p.dim_u) * 3
            v = rng.standard_normal(p.dim_v) * 3
            eu, ev = finite_diff_check(p, u, v, h=1e-5)
            assert eu <= 1e-6 and ev <= 1e-6


def test_finite_diff_catches_wrong_gradient():
    good = make_regularized([[1.0]], 1.0)
    bad = SaddleProblem(1, 1, good.loss, lambda u, v: 2 * good.grad_u(u, v), good.grad_v)
    eu, ev = finite_diff_check(bad, np.array([1.0]), np.array([0.5]))
    assert eu > 0.1 and ev < 1e-8


def test_noise_zero_is_exact_bitwise():
    p = make_bilinear([[1.0, 2.0]])
    q = with_noise(p, NoisyGradientConfig(0.0, 3))
    u, v = np.array([0.1, 0.2]), np.array([0.3])
    rng = make_rng(0)
    state = rng.bit_generator.state
    assert np.array_equal(q.sample_grad_u(u, v, rng), p.grad_u(u, v))
    assert np.array_equal(q.sample_grad_v(u, v, rng), p.grad_v(u, v))
    assert rng.bit_generator.state == state


def test_noise_determinism():
    q = with_noise(make_bilinear([[1.0]]), NoisyGradientConfig(0.5, 11))
    u, v = np.ones(1), np.ones(1)
    a, b = q.gradient_rng(), q.gradient_rng()
    first = q.sample_grad_u(u, v, a)
    assert np.array_equal(first, q.sample_grad_u(u, v, b))
    assert not np.array_equal(first, q.sample_grad_u(u, v, a))


def test_noise_unbiased():
    sigma = 0.3
    q = with_noise(make_bilinear([[1.0]]), NoisyGradientConfig(sigma, 1))
    rng = q.gradient_rng()
    n = 100_000
    draws = np.array([q.sample_grad_u(np.ones(1), np.ones(1), rng)[0] for _ in range(n)])
    assert abs(draws.mean() - 1.0) <= 3 * sigma / np.sqrt(n)
    assert draws.std() == pytest.approx(sigma, rel=0.02)


def test_noise_config_validation():
    with pytest.raises(ValueError):
        NoisyGradientConfig(-0.1, 0)
    with pytest.raises(ValueError):
        NoisyGradientConfig(0.1, -1)


def test_rng_streams_are_reproducible():
    a = make_rng(5).standard_normal(4)
    b = make_rng(5).standard_normal(4)
    assert np.array_equal(a, b)
    s1, s2 = spawn_rngs(5, 2)
    assert not np.array_equal(s1.standard_normal(4), s2.standard_normal(4))
