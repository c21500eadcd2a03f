import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from saddlepred.dynamics import (JacobiConvergenceError, damped_solution, decompose,
                                 discrete_iterates, discrete_map, discrete_map_matrix,
                                 jacobi_eigh, rk4_reference, trajectory_vs_ode,
                                 undamped_solution)
from saddlepred.problems import make_rng

T = np.linspace(0.0, 10.0, 501)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-5, 5)))
def test_jacobi_matches_lapack(B):
    A = B + B.T
    w, V = jacobi_eigh(A)
    np.testing.assert_allclose(w, np.sort(np.linalg.eigvalsh(A))[::-1], atol=1e-9)
    np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-10)
    np.testing.assert_allclose(V @ np.diag(w) @ V.T, A, atol=1e-9)


def test_jacobi_errors():
    with pytest.raises(ValueError):
        jacobi_eigh([[1.0, 2.0], [0.0, 1.0]])
    B = make_rng(0).standard_normal((6, 6))
    with pytest.raises(JacobiConvergenceError):
        jacobi_eigh(B + B.T, max_sweeps=1, tol=1e-300)


def test_decompose_examples():
    d = decompose([[1.0]], 0.1, 0.1)
    np.testing.assert_allclose(d.sigma, [1.0])
    np.testing.assert_allclose(np.abs(d.U), [[1.0]])
    assert decompose([[2.0]], 0.1, 0.2).sigma[0] == pytest.approx(8.0, rel=1e-14)
    d = decompose(np.diag([1.0, 3.0]), 0.1, 0.1)
    np.testing.assert_allclose(d.sigma, [9.0, 1.0])
    np.testing.assert_allclose(np.abs(d.U), [[0.0, 1.0], [1.0, 0.0]])


def test_decompose_invariants_random():
    K = make_rng(4).standard_normal((5, 3))
    d = decompose(K, 0.05, 0.2)
    np.testing.assert_allclose(d.U.T @ d.U, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(d.matrix, 4.0 * K.T @ K, atol=1e-10)
    assert np.all(np.diff(d.sigma) <= 0)
    with pytest.raises(ValueError):
        decompose(K, 0.0, 0.1)


def test_undamped_examples():
    s = undamped_solution([[1.0]], 0.1, 0.1, [1.0], [0.0])
    np.testing.assert_allclose(s(T)[:, 0], np.cos(T), atol=1e-12)
    s = undamped_solution([[1.0]], 0.1, 0.1, [0.0], [1.0])
    np.testing.assert_allclose(s(T)[:, 0], -np.sin(T), atol=1e-12)
    s = undamped_solution([[1.0]], 0.1, 0.1, [0.0], [0.0])
    assert np.all(s(T) == 0.0)


def test_damped_examples():
    s = damped_solution([[1.0]], 0.1, 0.1, [1.0], [0.0])
    assert s.damping[0] == pytest.approx(0.05, rel=1e-14)
    assert s.frequency[0] == pytest.approx(math.sqrt(1 - 0.0025), rel=1e-14)
    assert s.frequency[0] == pytest.approx(0.99875, abs=1e-5)
    s = damped_solution([[1.0]], 0.1, 0.1, [0.0], [0.0])
    assert np.all(s(T) == 0.0)


def test_damped_tends_to_undamped():
    errs = []
    for a in (1e-2, 1e-3):
        d = damped_solution([[1.0]], a, a, [1.0], [0.5])(T)
        u = undamped_solution([[1.0]], a, a, [1.0], [0.5])(T)
        errs.append(np.max(np.abs(d - u)))
    assert errs[1] < errs[0] / 5
    assert errs[1] <= 0.02


@pytest.mark.parametrize("damped", [False, True])
def test_initial_conditions(damped):
    K = make_rng(1).standard_normal((3, 3))
    u0, v0 = np.array([0.5, -1.0, 0.2]), np.array([1.0, 0.3, -0.4])
    sol = (damped_solution if damped else undamped_solution)(K, 0.01, 0.02, u0, v0)
    np.testing.assert_allclose(sol(np.array([0.0]))[0], u0, atol=1e-10)
    h = 1e-6
    deriv = (sol(np.array([h]))[0] - sol(np.array([-h]))[0]) / (2 * h)
    np.testing.assert_allclose(deriv, -K.T @ v0, atol=1e-8)


@pytest.mark.parametrize("damped", [False, True])
def test_closed_form_against_rk4(damped):
    K = make_rng(2).standard_normal((3, 3))
    u0, v0 = np.array([1.0, 0.0, -0.5]), np.array([0.2, 0.4, 0.1])
    a, b = 0.05, 0.05
    t, u_rk = rk4_reference(K, a, b, u0, v0, 10.0, dt=1e-4, damped=damped)
    sol = (damped_solution if damped else undamped_solution)(K, a, b, u0, v0)
    idx = slice(None, None, 500)
    np.testing.assert_allclose(sol(t[idx]), u_rk[idx], atol=1e-6)


def test_overdamped_and_zero_modes():
    # alpha * sigma large enough to overdamp one mode, rank deficient K
    K = np.array([[30.0, 0.0], [0.0, 0.0]])
    u0, v0 = np.array([1.0, 2.0]), np.array([0.5, 0.3])
    sol = damped_solution(K, 0.1, 0.1, u0, v0)
    assert "overdamped" in sol.kind and sol.affine_modes == [1]
    t, u_rk = rk4_reference(K, 0.1, 0.1, u0, v0, 1.0, dt=1e-5, damped=True)
    np.testing.assert_allclose(sol(t[::1000]), u_rk[::1000], atol=1e-6)
    und = undamped_solution(K, 0.1, 0.1, u0, v0)
    np.testing.assert_allclose(und(np.array([3.0]))[0, 1], 2.0, atol=1e-12)


def test_discrete_map_examples():
    p = discrete_map("plain", 1.0, 0.1, 0.1)
    assert p.det[0] == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(p.moduli, 1.0, atol=1e-12)
    assert p.trace[0] == pytest.approx(1.99, abs=1e-15)
    q = discrete_map("predict", 1.0, 0.1, 0.1)
    assert q.det[0] == pytest.approx(0.99, abs=1e-12)
    assert q.spectral_radius == pytest.approx(math.sqrt(0.99), abs=1e-12)
    for m in ("plain", "predict"):
        z = discrete_map(m, 1.0, 0.0, 0.1)
        np.testing.assert_allclose(z.moduli, 1.0)
    with pytest.raises(ValueError):
        discrete_map("adam", 1.0, 0.1, 0.1)


def test_discrete_map_matches_numpy_eig():
    for m in ("plain", "predict"):
        for kappa in (0.1, 1.0, 10.0):
            s = discrete_map(m, kappa, 0.01, 0.03)
            ref = np.linalg.eigvals(s.matrices[0])
            np.testing.assert_allclose(np.sort_complex(s.eigenvalues[0]), np.sort_complex(ref),
                                       atol=1e-12)


def test_area_preservation_and_contraction_grid():
    for kappa in (0.1, 1.0, 10.0):
        for a in (1e-3, 1e-2, 1e-1):
            for b in (1e-3, 1e-2, 1e-1):
                p = discrete_map("plain", kappa, a, b)
                assert abs(p.det[0] - 1) <= 1e-12
                q = discrete_map("predict", kappa, a, b)
                assert q.det[0] == pytest.approx(1 - a * b * kappa ** 2, abs=1e-12)
                if abs(q.eigenvalues[0][0].imag) > 0:
                    assert q.spectral_radius == pytest.approx(
                        math.sqrt(1 - a * b * kappa ** 2), abs=1e-12)
                if a * b * kappa ** 2 < 4:
                    np.testing.assert_allclose(p.moduli, 1.0, atol=1e-12)


def test_map_matches_solver_step():
    K = np.array([[2.0]])
    for m in ("plain", "predict"):
        us, vs = discrete_iterates(m, K, 0.1, 0.05, [0.7], [-0.2], 1)
        M = discrete_map_matrix(m, K, 0.1, 0.05).matrices[0]
        x1 = M @ np.array([0.7, -0.2])
        np.testing.assert_allclose([us[1, 0], vs[1, 0]], x1, atol=1e-14)


def test_plain_orbit_radius_constant():
    a = b = 0.1
    us, vs = discrete_iterates("plain", [[1.0]], a, b, [1.0], [0.0], 10_000)
    M = discrete_map("plain", 1.0, a, b).matrices[0]
    w, V = np.linalg.eig(M)
    coords = np.linalg.solve(V, np.vstack([us[:, 0], vs[:, 0]]))
    radius = np.abs(coords[0])
    assert np.max(np.abs(radius - radius[0])) <= 1e-9


def test_predict_envelope():
    a = b = 0.1
    us, vs = discrete_iterates("predict", [[1.0]], a, b, [1.0], [0.0], 2000)
    M = discrete_map("predict", 1.0, a, b).matrices[0]
    _, V = np.linalg.eig(M)
    c = np.linalg.cond(V)
    rho = math.sqrt(0.99)
    norms = np.hypot(us[:, 0], vs[:, 0])
    assert np.all(norms <= c * rho ** np.arange(norms.size) * 1.0 + 1e-15)


def test_orbit_period():
    a = 1e-2
    us, _ = discrete_iterates("plain", [[1.0]], a, a, [1.0], [0.0], 20_000)
    signs = np.sign(us[:, 0])
    crossings = np.count_nonzero(signs[1:] != signs[:-1])
    t_total = a * 20_000
    period = 2 * t_total / crossings
    assert period == pytest.approx(2 * math.pi, rel=0.02)


def test_trajectory_vs_ode_first_order():
    for m in ("plain", "predict"):
        e1 = trajectory_vs_ode(m, [[1.0]], 1e-2, 1e-2, [1.0], [0.0], 10.0)
        e2 = trajectory_vs_ode(m, [[1.0]], 5e-3, 5e-3, [1.0], [0.0], 10.0)
        assert e1 <= 0.1
        assert 1.6 <= e1 / e2 <= 2.6
    one = trajectory_vs_ode("plain", [[1.0]], 1e-2, 1e-2, [1.0], [0.0], 1e-2)
    assert one <= 1e-3
    with pytest.raises(ValueError):
        trajectory_vs_ode("plain", [[1.0]], 1e-2, 1e-2, [1.0], [0.0], 0.0)
