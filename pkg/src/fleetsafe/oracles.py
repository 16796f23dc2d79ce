"""Independent oracles for validating the analytic modules.

These deliberately avoid the formula code in :mod:`fleetsafe.barriers` and
:mod:`fleetsafe.qp`: Lie derivatives are recovered by finite-differencing a
barrier along numerically integrated flows, and the QP is checked against a
zooming grid search. They exist for the test suite; nothing in the simulator
calls them.
"""

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


def _rk4(deriv: Callable, state: tuple, dt: float) -> tuple:
    k1 = deriv(state)
    s2 = tuple(x + 0.5 * dt * k for x, k in zip(state, k1))
    k2 = deriv(s2)
    s3 = tuple(x + 0.5 * dt * k for x, k in zip(state, k2))
    k3 = deriv(s3)
    s4 = tuple(x + dt * k for x, k in zip(state, k3))
    k4 = deriv(s4)
    return tuple(x + dt / 6.0 * (a + 2.0 * (b + c) + d)
                 for x, a, b, c, d in zip(state, k1, k2, k3, k4))


def flow_unicycle(state: tuple, r: float, a: float, dt: float) -> tuple:
    """Advance one unicycle state (x, y, psi, u) by dt under constant inputs.

    Local RK4, independent of the package integrator.
    """
    def deriv(s):
        x, y, psi, u = s
        return (u * math.cos(psi), u * math.sin(psi), r, a)
    return _rk4(deriv, state, dt)


def flow_ballistic(p, v, acc, dt: float):
    """Exact constant-acceleration obstacle flow."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    acc = np.asarray(acc, dtype=float)
    return p + v * dt + 0.5 * acc * dt * dt, v + acc * dt


def fd_lie_derivatives(h: Callable[[float], float], n_inputs: int,
                       flow: Callable, dt_fd: float = 1e-5):
    """Drift and input gains of dh/dt by Richardson-extrapolated central
    differences along the flow.

    ``flow(u, t)`` must return the state advanced by time t under the
    constant input vector u; ``h`` maps that state to a scalar. Because the
    system is control-affine, each input gain is the difference between
    dh/dt at a unit input and the drift.
    """
    def hdot(u):
        def central(e):
            return (h(flow(u, e)) - h(flow(u, -e))) / (2.0 * e)
        return (4.0 * central(0.5 * dt_fd) - central(dt_fd)) / 3.0

    zero = (0.0,) * n_inputs
    lf = hdot(zero)
    gains = np.empty(n_inputs)
    for k in range(n_inputs):
        u = [0.0] * n_inputs
        u[k] = 1.0
        gains[k] = hdot(tuple(u)) - lf
    return lf, gains


@dataclass
class GridOracleResult:
    r: np.ndarray
    objective: float
    feasible_found: bool


def qp_grid_oracle(r_desired, g_matrix, bounds, r_max, rounds: int = 10,
                   base: int = 7, tol: float = 1e-9):
    """Zooming grid search for min ||r - r_desired||^2 s.t. G r <= b, |r| <= r_max.

    Starts from a coarse grid over the actuation box, shrinks a window around
    the best feasible point, then polishes with exact coordinatewise
    projections. Reports feasible_found=False when no grid point satisfies
    the constraints (grid too coarse or problem infeasible).
    """
    r_desired = np.asarray(r_desired, dtype=float)
    n = r_desired.size
    g_matrix = np.asarray(g_matrix, dtype=float).reshape(-1, n)
    bounds = np.asarray(bounds, dtype=float).reshape(-1)
    r_max = np.asarray(r_max, dtype=float).reshape(-1)

    lo = -r_max.copy()
    hi = r_max.copy()
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo[k], hi[k], base) for k in range(n)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        if g_matrix.size:
            feas = np.all(mesh @ g_matrix.T <= bounds + tol, axis=1)
        else:
            feas = np.ones(len(mesh), dtype=bool)
        if not feas.any():
            break
        pts = mesh[feas]
        obj = np.sum((pts - r_desired) ** 2, axis=1)
        cand = pts[int(np.argmin(obj))]
        best = cand
        span = (hi - lo) / (base - 1) * 1.5
        lo = np.maximum(cand - span, -r_max)
        hi = np.minimum(cand + span, r_max)
    if best is None:
        return GridOracleResult(r=np.clip(r_desired, -r_max, r_max),
                                objective=math.inf, feasible_found=False)

    r = best.copy()
    for _ in range(200):
        moved = 0.0
        for k in range(n):
            lo_k = -r_max[k]
            hi_k = r_max[k]
            if g_matrix.size:
                rest = bounds - g_matrix @ r + g_matrix[:, k] * r[k]
                for gk, bk in zip(g_matrix[:, k], rest):
                    if gk > tol:
                        hi_k = min(hi_k, bk / gk)
                    elif gk < -tol:
                        lo_k = max(lo_k, bk / gk)
            if lo_k > hi_k:
                continue  # roundoff; keep the current coordinate
            new = min(max(r_desired[k], lo_k), hi_k)
            moved = max(moved, abs(new - r[k]))
            r[k] = new
        if moved < 1e-13:
            break
    return GridOracleResult(r=r, objective=float(np.sum((r - r_desired) ** 2)),
                            feasible_found=True)


@dataclass
class SafetyViolation:
    t: float
    pair: str
    distance: float
    deficit: float


def safety_audit(trace, tolerance: float = 0.01) -> list:
    """Scan a trace for pairwise distances below (1 - tolerance) * d_min.

    Checks every agent-agent pair and every agent-obstacle pair against the
    configured safety distances, regardless of which constraint families the
    scenario enabled.
    """
    cfg = trace.config
    n_a = trace.agent_xy.shape[1]
    violations = []
    d_min_aa = cfg.d_min_agents
    for k, t in enumerate(trace.t):
        axy = trace.agent_xy[k]
        for i in range(n_a):
            for j in range(i + 1, n_a):
                d = math.hypot(axy[i, 0] - axy[j, 0], axy[i, 1] - axy[j, 1])
                if d < d_min_aa * (1.0 - tolerance):
                    violations.append(SafetyViolation(
                        t=float(t), pair=f"a{i + 1}_a{j + 1}", distance=d,
                        deficit=d_min_aa - d))
        for m, ob in enumerate(cfg.obstacles):
            oxy = trace.obstacle_xy[k, m]
            for i in range(n_a):
                d = math.hypot(axy[i, 0] - oxy[0], axy[i, 1] - oxy[1])
                if d < ob.d_min * (1.0 - tolerance):
                    violations.append(SafetyViolation(
                        t=float(t), pair=f"a{i + 1}_o{ob.id}", distance=d,
                        deficit=ob.d_min - d))
    return violations
