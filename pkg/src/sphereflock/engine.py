"""Compiled inner loops for time integration.

Mirrors the reference right-hand sides in `dynamics` with scalar loops so
that million-step runs finish in seconds. Pair contributions are summed in
ascending-j order, which makes runs bitwise reproducible. The test suite
pins this path against the reference implementations.

Status codes threaded through the loops instead of exceptions:
  0 ok, 1 collision (repulsive kernel at ~zero distance), 2 speed blowup.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

OK = 0
SINGULAR = 1
BLOWUP = 2

KIND_MAIN = 0
KIND_BOOSTED = 1
KIND_TWO_AGENT = 2
KIND_LS = 3

SCHEME_EULER = 0
SCHEME_HEUN = 1
SCHEME_RK4 = 2

PSI_NONE = -1.0
PSI_EXP_DECAY = 0.0
PSI_CONSTANT = 1.0

# params vector layout (float64, length 12)
P_PSI_KIND = 0
P_PSI_VALUE = 1
P_SIGMA_A = 2
P_SIGMA_R = 3
P_BETA = 4
P_EPS_ANTI = 5
P_DIST_SQ_FLOOR = 6
P_A = 7   # boost b | two-agent n | k_v
P_B = 8   # two-agent N_total | k_a
P_C = 9   # k_r
P_D = 10  # k_0
N_PARAMS = 12


@njit(cache=True)
def _psi(kind: float, value: float, dist: float) -> float:
    if kind == PSI_EXP_DECAY:
        return value * (math.exp(2.0 - dist) - 1.0)
    if kind == PSI_CONSTANT:
        return value
    return 0.0


@njit(cache=True)
def _sigma(sigma_a: float, sigma_r: float, beta: float, dist_sq: float) -> float:
    if sigma_r == 0.0:
        return sigma_a
    if beta == 0.0:
        return sigma_a - sigma_r
    if beta == 1.0:
        return sigma_a - sigma_r / dist_sq
    return sigma_a - sigma_r * dist_sq ** (-beta)


@njit(cache=True)
def _eval_rhs(kind: int, X, V, p, dX, dV) -> int:
    n = X.shape[0]
    for i in range(n):
        for c in range(3):
            dX[i, c] = V[i, c]

    sigma_a = p[P_SIGMA_A]
    sigma_r = p[P_SIGMA_R]
    beta = p[P_BETA]
    eps_anti = p[P_EPS_ANTI]
    floor = p[P_DIST_SQ_FLOOR]
    psi_kind = p[P_PSI_KIND]
    psi_value = p[P_PSI_VALUE]
    sigma_singular = sigma_r > 0.0 and beta > 0.0

    if kind == KIND_LS:
        k_v = p[P_A]
        k_a = p[P_B]
        k_r = p[P_C]
        k_0 = p[P_D]
        ls_singular = k_r > 0.0
        for i in range(n):
            vv = V[i, 0] * V[i, 0] + V[i, 1] * V[i, 1] + V[i, 2] * V[i, 2]
            u0 = 0.0
            u1 = 0.0
            u2 = 0.0
            for j in range(n):
                if j == i:
                    continue
                d0 = X[i, 0] - X[j, 0]
                d1 = X[i, 1] - X[j, 1]
                d2 = X[i, 2] - X[j, 2]
                dist_sq = d0 * d0 + d1 * d1 + d2 * d2
                if ls_singular and dist_sq <= floor:
                    return SINGULAR
                s = _sigma(k_a, k_r, 1.0, dist_sq)
                dot = X[i, 0] * X[j, 0] + X[i, 1] * X[j, 1] + X[i, 2] * X[j, 2]
                u0 += s * (X[j, 0] - dot * X[i, 0])
                u1 += s * (X[j, 1] - dot * X[i, 1])
                u2 += s * (X[j, 2] - dot * X[i, 2])
            nx = math.sqrt(X[i, 0] * X[i, 0] + X[i, 1] * X[i, 1] + X[i, 2] * X[i, 2])
            dV[i, 0] = -vv * X[i, 0] - k_v * V[i, 0] + u0 - k_0 * (X[i, 0] - X[i, 0] / nx)
            dV[i, 1] = -vv * X[i, 1] - k_v * V[i, 1] + u1 - k_0 * (X[i, 1] - X[i, 1] / nx)
            dV[i, 2] = -vv * X[i, 2] - k_v * V[i, 2] + u2 - k_0 * (X[i, 2] - X[i, 2] / nx)
        return OK

    if kind == KIND_TWO_AGENT:
        w_n = p[P_A]
        w_total = p[P_B]
        d0 = X[0, 0] - X[1, 0]
        d1 = X[0, 1] - X[1, 1]
        d2 = X[0, 2] - X[1, 2]
        dist_sq = d0 * d0 + d1 * d1 + d2 * d2
        if sigma_singular and dist_sq <= floor:
            return SINGULAR
        s = _sigma(sigma_a, sigma_r, beta, dist_sq)
        dot = X[0, 0] * X[1, 0] + X[0, 1] * X[1, 1] + X[0, 2] * X[1, 2]
        c1 = w_n * s / w_total
        c2 = (w_total - w_n) * s / w_total
        for i in range(2):
            xx = X[i, 0] * X[i, 0] + X[i, 1] * X[i, 1] + X[i, 2] * X[i, 2]
            vv = V[i, 0] * V[i, 0] + V[i, 1] * V[i, 1] + V[i, 2] * V[i, 2]
            coef = c1 if i == 0 else c2
            other = 1 - i
            for c in range(3):
                dV[i, c] = -(vv / xx) * X[i, c] + coef * (xx * X[other, c] - dot * X[i, c])
        return OK

    # main / boosted
    norms = np.empty(n)
    Xn = np.empty((n, 3))
    for i in range(n):
        nx = math.sqrt(X[i, 0] * X[i, 0] + X[i, 1] * X[i, 1] + X[i, 2] * X[i, 2])
        norms[i] = nx
        Xn[i, 0] = X[i, 0] / nx
        Xn[i, 1] = X[i, 1] / nx
        Xn[i, 2] = X[i, 2] / nx

    for i in range(n):
        xx = X[i, 0] * X[i, 0] + X[i, 1] * X[i, 1] + X[i, 2] * X[i, 2]
        vv = V[i, 0] * V[i, 0] + V[i, 1] * V[i, 1] + V[i, 2] * V[i, 2]
        a0 = -(vv / xx) * X[i, 0]
        a1 = -(vv / xx) * X[i, 1]
        a2 = -(vv / xx) * X[i, 2]

        # velocity alignment over normalized positions (Lipschitz-safe form)
        f0 = 0.0
        f1 = 0.0
        f2 = 0.0
        for j in range(n):
            if j == i:
                continue
            s0 = Xn[i, 0] - Xn[j, 0]
            s1 = Xn[i, 1] - Xn[j, 1]
            s2 = Xn[i, 2] - Xn[j, 2]
            dist = math.sqrt(s0 * s0 + s1 * s1 + s2 * s2)
            if dist > 2.0:
                dist = 2.0
            w = _psi(psi_kind, psi_value, dist) / n
            p0 = Xn[i, 0] + Xn[j, 0]
            p1 = Xn[i, 1] + Xn[j, 1]
            p2 = Xn[i, 2] + Xn[j, 2]
            if math.sqrt(p0 * p0 + p1 * p1 + p2 * p2) <= eps_anti:
                f0 += w * (0.0 - V[i, 0])
                f1 += w * (0.0 - V[i, 1])
                f2 += w * (0.0 - V[i, 2])
                continue
            if dist <= 1e-12:
                t0 = V[j, 0]
                t1 = V[j, 1]
                t2 = V[j, 2]
            else:
                d = Xn[j, 0] * Xn[i, 0] + Xn[j, 1] * Xn[i, 1] + Xn[j, 2] * Xn[i, 2]
                ax0 = Xn[j, 1] * Xn[i, 2] - Xn[j, 2] * Xn[i, 1]
                ax1 = Xn[j, 2] * Xn[i, 0] - Xn[j, 0] * Xn[i, 2]
                ax2 = Xn[j, 0] * Xn[i, 1] - Xn[j, 1] * Xn[i, 0]
                an = math.sqrt(ax0 * ax0 + ax1 * ax1 + ax2 * ax2)
                u0 = ax0 / an
                u1 = ax1 / an
                u2 = ax2 / an
                alpha = Xn[i, 0] * V[j, 0] + Xn[i, 1] * V[j, 1] + Xn[i, 2] * V[j, 2]
                beta_d = Xn[j, 0] * V[j, 0] + Xn[j, 1] * V[j, 1] + Xn[j, 2] * V[j, 2]
                gamma = (1.0 - d) * (u0 * V[j, 0] + u1 * V[j, 1] + u2 * V[j, 2])
                t0 = d * V[j, 0] - alpha * Xn[j, 0] + beta_d * Xn[i, 0] + gamma * u0
                t1 = d * V[j, 1] - alpha * Xn[j, 1] + beta_d * Xn[i, 1] + gamma * u1
                t2 = d * V[j, 2] - alpha * Xn[j, 2] + beta_d * Xn[i, 2] + gamma * u2
            scale = norms[j] / norms[i]
            f0 += w * (scale * t0 - V[i, 0])
            f1 += w * (scale * t1 - V[i, 1])
            f2 += w * (scale * t2 - V[i, 2])

        # attraction/repulsion control
        c0 = 0.0
        c1 = 0.0
        c2 = 0.0
        for j in range(n):
            if j == i:
                continue
            s0 = X[i, 0] - X[j, 0]
            s1 = X[i, 1] - X[j, 1]
            s2 = X[i, 2] - X[j, 2]
            dist_sq = s0 * s0 + s1 * s1 + s2 * s2
            if sigma_singular and dist_sq <= floor:
                return SINGULAR
            w = _sigma(sigma_a, sigma_r, beta, dist_sq) / n
            dot = X[i, 0] * X[j, 0] + X[i, 1] * X[j, 1] + X[i, 2] * X[j, 2]
            c0 += w * (xx * X[j, 0] - dot * X[i, 0])
            c1 += w * (xx * X[j, 1] - dot * X[i, 1])
            c2 += w * (xx * X[j, 2] - dot * X[i, 2])

        dV[i, 0] = a0 + f0 + c0
        dV[i, 1] = a1 + f1 + c1
        dV[i, 2] = a2 + f2 + c2

        if kind == KIND_BOOSTED:
            b = p[P_A]
            speed = math.sqrt(vv)
            if speed < b:
                fb = -(2.0 / b) * speed + 2.0
                dV[i, 0] += fb * V[i, 0]
                dV[i, 1] += fb * V[i, 1]
                dV[i, 2] += fb * V[i, 2]
    return OK


@njit(cache=True)
def _project(X, V) -> None:
    n = X.shape[0]
    for i in range(n):
        nx = math.sqrt(X[i, 0] * X[i, 0] + X[i, 1] * X[i, 1] + X[i, 2] * X[i, 2])
        X[i, 0] /= nx
        X[i, 1] /= nx
        X[i, 2] /= nx
        d = X[i, 0] * V[i, 0] + X[i, 1] * V[i, 1] + X[i, 2] * V[i, 2]
        V[i, 0] -= d * X[i, 0]
        V[i, 1] -= d * X[i, 1]
        V[i, 2] -= d * X[i, 2]


@njit(cache=True)
def _step_once(kind: int, scheme: int, X, V, dt: float, p, project: int) -> int:
    """Advance (X, V) in place by one step of the chosen scheme."""
    n = X.shape[0]
    k1x = np.empty((n, 3))
    k1v = np.empty((n, 3))
    st = _eval_rhs(kind, X, V, p, k1x, k1v)
    if st != OK:
        return st

    if scheme == SCHEME_EULER:
        X += dt * k1x
        V += dt * k1v
    elif scheme == SCHEME_HEUN:
        k2x = np.empty((n, 3))
        k2v = np.empty((n, 3))
        st = _eval_rhs(kind, X + dt * k1x, V + dt * k1v, p, k2x, k2v)
        if st != OK:
            return st
        X += (dt / 2.0) * (k1x + k2x)
        V += (dt / 2.0) * (k1v + k2v)
    else:  # rk4
        k2x = np.empty((n, 3))
        k2v = np.empty((n, 3))
        k3x = np.empty((n, 3))
        k3v = np.empty((n, 3))
        k4x = np.empty((n, 3))
        k4v = np.empty((n, 3))
        half = dt / 2.0
        st = _eval_rhs(kind, X + half * k1x, V + half * k1v, p, k2x, k2v)
        if st != OK:
            return st
        st = _eval_rhs(kind, X + half * k2x, V + half * k2v, p, k3x, k3v)
        if st != OK:
            return st
        st = _eval_rhs(kind, X + dt * k3x, V + dt * k3v, p, k4x, k4v)
        if st != OK:
            return st
        X += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        V += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

    if project == 1:
        _project(X, V)
    return OK


@njit(cache=True)
def _speeds_ok(V, speed_cap: float) -> bool:
    cap_sq = speed_cap * speed_cap
    for i in range(V.shape[0]):
        s = V[i, 0] * V[i, 0] + V[i, 1] * V[i, 1] + V[i, 2] * V[i, 2]
        if not (s <= cap_sq):  # also catches NaN
            return False
    return True


@njit(cache=True)
def _config_energy(X, sigma_a: float, sigma_r: float, beta: float, floor: float) -> float:
    """Configuration energy over ordered pairs; +inf at a collision so the
    line search naturally rejects steps into the singularity."""
    n = X.shape[0]
    attract = 0.0
    repel = 0.0
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            d0 = X[i, 0] - X[j, 0]
            d1 = X[i, 1] - X[j, 1]
            d2 = X[i, 2] - X[j, 2]
            d_sq = d0 * d0 + d1 * d1 + d2 * d2
            attract += d_sq
            if sigma_r > 0.0 and beta > 0.0:
                if d_sq <= floor:
                    return np.inf
                if beta == 1.0:
                    repel += math.log(d_sq)
                else:
                    repel += d_sq ** (-(beta - 1.0))
    total = sigma_a / (4.0 * n * n) * attract
    if sigma_r > 0.0:
        if beta == 0.0:
            total -= sigma_r / (4.0 * n * n) * attract
        elif beta == 1.0:
            total -= sigma_r / (4.0 * n * n) * repel
        else:
            total += sigma_r / (4.0 * n * n * (beta - 1.0)) * repel
    return total


@njit(cache=True)
def _config_grad_projected(X, sigma_a: float, sigma_r: float, beta: float, G) -> None:
    """Riemannian gradient of the configuration energy: ambient gradient
    (1/n^2) sum sigma_ij (x_i - x_j), projected to each tangent plane."""
    n = X.shape[0]
    for i in range(n):
        g0 = 0.0
        g1 = 0.0
        g2 = 0.0
        for j in range(n):
            if j == i:
                continue
            d0 = X[i, 0] - X[j, 0]
            d1 = X[i, 1] - X[j, 1]
            d2 = X[i, 2] - X[j, 2]
            d_sq = d0 * d0 + d1 * d1 + d2 * d2
            s = _sigma(sigma_a, sigma_r, beta, d_sq)
            g0 += s * d0
            g1 += s * d1
            g2 += s * d2
        nsq = float(n * n)
        g0 /= nsq
        g1 /= nsq
        g2 /= nsq
        dot = g0 * X[i, 0] + g1 * X[i, 1] + g2 * X[i, 2]
        G[i, 0] = g0 - dot * X[i, 0]
        G[i, 1] = g1 - dot * X[i, 1]
        G[i, 2] = g2 - dot * X[i, 2]


STOP_GRAD_NORM = 0
STOP_FORCE_RESIDUAL = 1


@njit(cache=True)
def _descend_config_energy(
    X,
    sigma_a: float,
    sigma_r: float,
    beta: float,
    floor: float,
    max_iters: int,
    tol: float,
    step0: float,
    stop_mode: int,
) -> int:
    """Projected gradient descent with Armijo backtracking, in place.

    The trial step each iteration is the Barzilai-Borwein estimate (step0
    on the first iteration), halved until sufficient decrease holds; the
    decrease test carries a roundoff slack so progress does not stall once
    energy differences fall below double-precision resolution of E itself,
    which happens around gradient norm sqrt(eps).

    stop_mode selects the convergence test: Frobenius norm of the
    Riemannian gradient (energy minimization) or n * max row norm, which
    equals the cooperative-force residual (equilibrium search).
    Returns 1 on convergence, 0 otherwise.
    """
    n = X.shape[0]
    G = np.empty((n, 3))
    Gp = np.empty((n, 3))
    Xp = np.empty((n, 3))
    Xt = np.empty((n, 3))
    e0 = _config_energy(X, sigma_a, sigma_r, beta, floor)
    s_bb = step0
    have_prev = False
    for _ in range(max_iters):
        _config_grad_projected(X, sigma_a, sigma_r, beta, G)
        g_sq = 0.0
        max_row = 0.0
        for i in range(n):
            row = G[i, 0] * G[i, 0] + G[i, 1] * G[i, 1] + G[i, 2] * G[i, 2]
            g_sq += row
            if row > max_row:
                max_row = row
        if stop_mode == STOP_FORCE_RESIDUAL:
            measure = n * math.sqrt(max_row)
        else:
            measure = math.sqrt(g_sq)
        if measure <= tol:
            return 1

        if have_prev:
            dx_dx = 0.0
            dx_dg = 0.0
            for i in range(n):
                for c in range(3):
                    dx = X[i, c] - Xp[i, c]
                    dg = G[i, c] - Gp[i, c]
                    dx_dx += dx * dx
                    dx_dg += dx * dg
            if dx_dg > 1e-300:
                s_bb = dx_dx / dx_dg
            else:
                s_bb = step0
            if s_bb < 1e-12:
                s_bb = 1e-12
            elif s_bb > 1e3:
                s_bb = 1e3

        slack = 1e-15 * (1.0 + abs(e0))
        s = s_bb
        accepted = False
        e1 = e0
        while s > 1e-18:
            for i in range(n):
                t0 = X[i, 0] - s * G[i, 0]
                t1 = X[i, 1] - s * G[i, 1]
                t2 = X[i, 2] - s * G[i, 2]
                nr = math.sqrt(t0 * t0 + t1 * t1 + t2 * t2)
                Xt[i, 0] = t0 / nr
                Xt[i, 1] = t1 / nr
                Xt[i, 2] = t2 / nr
            e1 = _config_energy(Xt, sigma_a, sigma_r, beta, floor)
            if e1 <= e0 - 1e-4 * s * g_sq + slack:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            # line search exhausted before the gradient test passed
            return 0
        for i in range(n):
            Xp[i, 0] = X[i, 0]
            Xp[i, 1] = X[i, 1]
            Xp[i, 2] = X[i, 2]
            Gp[i, 0] = G[i, 0]
            Gp[i, 1] = G[i, 1]
            Gp[i, 2] = G[i, 2]
            X[i, 0] = Xt[i, 0]
            X[i, 1] = Xt[i, 1]
            X[i, 2] = Xt[i, 2]
        have_prev = True
        e0 = e1
    return 0


@njit(cache=True)
def _simulate_loop(
    kind: int,
    scheme: int,
    X,
    V,
    dt: float,
    n_full: int,
    rem: float,
    out_every: int,
    project: int,
    speed_cap: float,
    p,
    TS,
    XS,
    VS,
):
    """Run the fixed-step loop, logging into preallocated snapshot buffers.

    Returns (status, n_logged, steps_done).
    """
    s = 0
    TS[s] = 0.0
    XS[s] = X
    VS[s] = V
    s += 1
    for k in range(1, n_full + 1):
        st = _step_once(kind, scheme, X, V, dt, p, project)
        if st != OK:
            return st, s, k - 1
        if not _speeds_ok(V, speed_cap):
            return BLOWUP, s, k - 1
        if k % out_every == 0:
            TS[s] = k * dt
            XS[s] = X
            VS[s] = V
            s += 1
    if rem > 0.0:
        st = _step_once(kind, scheme, X, V, rem, p, project)
        if st != OK:
            return st, s, n_full
        if not _speeds_ok(V, speed_cap):
            return BLOWUP, s, n_full
        TS[s] = n_full * dt + rem
        XS[s] = X
        VS[s] = V
        s += 1
    elif n_full % out_every != 0:
        TS[s] = n_full * dt
        XS[s] = X
        VS[s] = V
        s += 1
    return OK, s, n_full + (1 if rem > 0.0 else 0)
