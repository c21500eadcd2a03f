"""Exact reference dynamics for bilinear saddles ``L(u, v) = v^T K u``.

With step sizes ``alpha`` (primal) and ``beta`` (dual) and time ``t = k * alpha``,
the plain method tracks the undamped oscillator

    u'' = -S u,            S = (beta / alpha) K^T K,

and the prediction method tracks the damped oscillator

    u'' = -S u - alpha S u'.

Both decouple in the eigenbasis of ``S``; each mode is solved in closed form
from its characteristic equation. The discrete update maps are also
available per mode as explicit 2x2 matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from ._validation import as_matrix, as_vector
from .optim import Schedule, init_state, step_plain, step_predict


class JacobiConvergenceError(ArithmeticError):
    pass


def jacobi_eigh(A, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues sorted descending and orthonormal
    eigenvectors as columns of ``V``. Iterates until the off-diagonal
    Frobenius norm is below ``tol * max(1, ||A||_F)``.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(A)))

    def off(M):
        return float(np.linalg.norm(M - np.diag(np.diag(M))))

    for _ in range(max_sweeps):
        if off(A) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) Givens rotation
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        if off(A) > tol * scale:
            raise JacobiConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True)
class ModeDecomposition:
    """``(beta/alpha) K^T K = U diag(sigma) U^T`` with ``sigma`` descending."""

    U: np.ndarray
    sigma: np.ndarray
    alpha: float
    beta: float

    @property
    def matrix(self):
        return self.U @ np.diag(self.sigma) @ self.U.T


def decompose(K, alpha, beta) -> ModeDecomposition:
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    K = as_matrix(K)
    S = (beta / alpha) * (K.T @ K)
    w, U = jacobi_eigh(S)
    # K^T K is PSD; clip rounding noise below zero
    w = np.where(w < 0, 0.0, w)
    return ModeDecomposition(U=U, sigma=w, alpha=float(alpha), beta=float(beta))


# per-mode regimes
UNDAMPED, UNDERDAMPED, CRITICAL, OVERDAMPED, AFFINE = (
    "undamped", "underdamped", "critical", "overdamped", "affine")


@dataclass(frozen=True)
class OscillatorSolution:
    """Closed-form ``u(t) = U z(t)`` with independent modes ``z_i``.

    Oscillating modes follow ``a e^{-d t} cos(w t + phi)`` (undamped, ``d = 0``)
    or ``a e^{-d t} sin(w t + phi)`` (underdamped). Overdamped modes use
    ``c1 e^{r1 t} + c2 e^{r2 t}``, critical ones ``(c1 + c2 t) e^{r1 t}``, and
    zero modes ``c1 + c2 t``.
    """

    U: np.ndarray
    kind: List[str]
    amplitude: np.ndarray
    phase: np.ndarray
    frequency: np.ndarray
    damping: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    @property
    def affine_modes(self):
        return [i for i, kd in enumerate(self.kind) if kd == AFFINE]

    def modes(self, t):
        t = np.asarray(t, dtype=np.float64)
        z = np.empty(t.shape + (len(self.kind),))
        for i, kd in enumerate(self.kind):
            a, ph, w, d = self.amplitude[i], self.phase[i], self.frequency[i], self.damping[i]
            if kd == UNDAMPED:
                z[..., i] = a * np.cos(w * t + ph)
            elif kd == UNDERDAMPED:
                z[..., i] = a * np.exp(-d * t) * np.sin(w * t + ph)
            elif kd == OVERDAMPED:
                z[..., i] = self.c1[i] * np.exp(self.r1[i] * t) + self.c2[i] * np.exp(self.r2[i] * t)
            elif kd == CRITICAL:
                z[..., i] = (self.c1[i] + self.c2[i] * t) * np.exp(self.r1[i] * t)
            else:
                z[..., i] = self.c1[i] + self.c2[i] * t
        return z

    def __call__(self, t):
        return self.modes(t) @ self.U.T


def _initial_modes(K, dec, u0, v0):
    K = as_matrix(K)
    u0 = as_vector(u0, "u0", K.shape[1])
    v0 = as_vector(v0, "v0", K.shape[0])
    z0 = dec.U.T @ u0
    zdot0 = -dec.U.T @ (K.T @ v0)
    return z0, zdot0


def _empty(n):
    return {name: np.zeros(n) for name in
            ("amplitude", "phase", "frequency", "damping", "c1", "c2", "r1", "r2")}


def _zero_mode(sigma, dec):
    return sigma <= 1e-14 * max(1.0, float(dec.sigma.max()))


def undamped_solution(K, alpha, beta, u0, v0) -> OscillatorSolution:
    dec = decompose(K, alpha, beta)
    z0, zd0 = _initial_modes(K, dec, u0, v0)
    n = z0.size
    p = _empty(n)
    kind = []
    for i, s in enumerate(dec.sigma):
        if _zero_mode(s, dec):
            kind.append(AFFINE)
            p["c1"][i], p["c2"][i] = z0[i], zd0[i]
            continue
        w = math.sqrt(s)
        kind.append(UNDAMPED)
        # a cos(phi) = z0, -a w sin(phi) = zdot0
        p["amplitude"][i] = math.hypot(z0[i], zd0[i] / w)
        p["phase"][i] = math.atan2(-zd0[i] / w, z0[i])
        p["frequency"][i] = w
    return OscillatorSolution(U=dec.U, kind=kind, **p)


def damped_solution(K, alpha, beta, u0, v0) -> OscillatorSolution:
    """Solve ``z'' + alpha*sigma z' + sigma z = 0`` per mode."""
    dec = decompose(K, alpha, beta)
    z0, zd0 = _initial_modes(K, dec, u0, v0)
    n = z0.size
    p = _empty(n)
    kind = []
    for i, s in enumerate(dec.sigma):
        if _zero_mode(s, dec):
            kind.append(AFFINE)
            p["c1"][i], p["c2"][i] = z0[i], zd0[i]
            continue
        c = alpha * s
        d = c / 2.0
        disc = s - d * d
        p["damping"][i] = d
        if disc > 1e-14 * s:
            w = math.sqrt(disc)
            kind.append(UNDERDAMPED)
            # a sin(phi) = z0, a (w cos(phi) - d sin(phi)) = zdot0
            sin_part = z0[i]
            cos_part = (zd0[i] + d * z0[i]) / w
            p["amplitude"][i] = math.hypot(sin_part, cos_part)
            p["phase"][i] = math.atan2(sin_part, cos_part)
            p["frequency"][i] = w
        elif disc < -1e-14 * s:
            root = math.sqrt(-disc)
            r1, r2 = -d + root, -d - root
            kind.append(OVERDAMPED)
            p["r1"][i], p["r2"][i] = r1, r2
            p["c2"][i] = (zd0[i] - r1 * z0[i]) / (r2 - r1)
            p["c1"][i] = z0[i] - p["c2"][i]
        else:
            kind.append(CRITICAL)
            p["r1"][i] = p["r2"][i] = -d
            p["c1"][i] = z0[i]
            p["c2"][i] = zd0[i] + d * z0[i]
    return OscillatorSolution(U=dec.U, kind=kind, **p)


@dataclass(frozen=True)
class UpdateMapSpectrum:
    """2x2 update matrices acting on ``(u_i, v_i)`` for each singular mode of ``K``."""

    matrices: np.ndarray
    eigenvalues: np.ndarray
    det: np.ndarray
    trace: np.ndarray

    @property
    def moduli(self):
        return np.abs(self.eigenvalues)

    @property
    def spectral_radius(self):
        return float(self.moduli.max())


def _map_matrix(method, kappa, alpha, beta):
    ak, bk = alpha * kappa, beta * kappa
    if method == "plain":
        return np.array([[1.0, -ak], [bk, 1.0 - alpha * beta * kappa * kappa]])
    if method == "predict":
        return np.array([[1.0, -ak], [bk, 1.0 - 2.0 * alpha * beta * kappa * kappa]])
    raise ValueError(f"unknown method {method!r}")


def _eig2(M):
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    half = tr / 2.0
    disc = half * half - det
    if disc < 0:
        im = math.sqrt(-disc)
        lam = (complex(half, im), complex(half, -im))
    else:
        r = math.sqrt(disc)
        lam = (complex(half + r, 0.0), complex(half - r, 0.0))
    return lam, det, tr


def discrete_map(method, kappa, alpha, beta) -> UpdateMapSpectrum:
    """Update map of one step on ``L = v kappa u``; ``kappa`` may be a vector of modes."""
    kappas = np.atleast_1d(np.asarray(kappa, dtype=np.float64))
    mats, eigs, dets, trs = [], [], [], []
    for kp in kappas:
        M = _map_matrix(method, float(kp), alpha, beta)
        lam, det, tr = _eig2(M)
        mats.append(M)
        eigs.append(lam)
        dets.append(det)
        trs.append(tr)
    return UpdateMapSpectrum(np.array(mats), np.array(eigs), np.array(dets), np.array(trs))


def discrete_map_matrix(method, K, alpha, beta) -> UpdateMapSpectrum:
    """Per-mode maps of a matrix problem, one for each eigenvalue of ``K^T K``."""
    dec = decompose(K, alpha, beta)
    kappa = np.sqrt(dec.sigma * alpha / beta)
    return discrete_map(method, kappa, alpha, beta)


def discrete_iterates(method, K, alpha, beta, u0, v0, n_steps):
    """``(u_k, v_k)`` for ``k = 0..n_steps`` under exact-gradient SGD steps."""
    from .problems import make_bilinear

    problem = make_bilinear(K)
    sched_u, sched_v = Schedule("constant", alpha), Schedule("constant", beta)
    step = step_plain if method == "plain" else step_predict
    state = init_state(as_vector(u0, "u0", problem.dim_u), as_vector(v0, "v0", problem.dim_v))
    us = [state.u]
    vs = [state.v]
    for _ in range(n_steps):
        state = step(problem, state, sched_u, sched_v)
        us.append(state.u)
        vs.append(state.v)
    return np.array(us), np.array(vs)


def trajectory_vs_ode(method, K, alpha, beta, u0, v0, horizon_T) -> float:
    """Max ``||u_k - u(k alpha)||`` over ``k = 0..ceil(T / alpha)``.

    The plain method is compared with the undamped solution, prediction
    with the damped one.
    """
    if not horizon_T > 0:
        raise ValueError("horizon_T must be positive")
    n = int(math.ceil(horizon_T / alpha - 1e-9))
    us, _ = discrete_iterates(method, K, alpha, beta, u0, v0, n)
    sol = (undamped_solution if method == "plain" else damped_solution)(K, alpha, beta, u0, v0)
    t = alpha * np.arange(n + 1)
    return float(np.max(np.linalg.norm(us - sol(t), axis=1)))


def rk4_reference(K, alpha, beta, u0, v0, t_end, dt=1e-4, damped=False):
    """Integrate the first-order ``(u, v)`` system by classical RK4.

    ``u' = -K^T v`` and ``v' = (beta/alpha) K (u + alpha u')`` (the ``alpha u'``
    term only when ``damped``). Returns times and ``u`` samples.
    """
    K = as_matrix(K)
    ratio = beta / alpha

    def f(y):
        u, v = y[:K.shape[1]], y[K.shape[1]:]
        du = -K.T @ v
        target = u + alpha * du if damped else u
        return np.concatenate([du, ratio * (K @ target)])

    n = int(round(t_end / dt))
    y = np.concatenate([as_vector(u0, "u0", K.shape[1]), as_vector(v0, "v0", K.shape[0])])
    out = np.empty((n + 1, K.shape[1]))
    out[0] = y[:K.shape[1]]
    for i in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y[:K.shape[1]]
    return dt * np.arange(n + 1), out
