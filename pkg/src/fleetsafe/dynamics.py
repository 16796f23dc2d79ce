"""Nonholonomic agent model, scripted obstacles, and fixed-step integration.

Agents are unicycles with state [x, y, psi, u] and inputs [r, a] (heading
rate, forward acceleration). Speeds are restricted to a strictly positive
interval [u_min, u_max]; the integrator clamps u into that interval after
every step. Obstacles follow scripted piecewise-constant-velocity paths and
are not influenced by the agents.
"""

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import wrap_angle


@dataclass(frozen=True)
class AgentLimits:
    """Actuation and speed bounds of one agent."""

    r_max: float = 0.5   # rad/s
    a_max: float = 0.25  # m/s^2
    u_min: float = 0.3   # m/s
    u_max: float = 0.8   # m/s

    def __post_init__(self):
        if not self.r_max > 0.0:
            raise ValueError("r_max must be positive")
        if self.a_max < 0.0:
            raise ValueError("a_max must be nonnegative")
        if not (self.u_max >= self.u_min > 0.0):
            raise ValueError("speed bounds must satisfy u_max >= u_min > 0")


@dataclass
class AgentState:
    """Planar pose, heading, and forward speed of one agent."""

    x: float
    y: float
    psi: float  # heading, wrapped to (-pi, pi]
    u: float    # forward speed, m/s

    def __post_init__(self):
        self.psi = wrap_angle(float(self.psi))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.u * math.cos(self.psi), self.u * math.sin(self.psi)])


@dataclass(frozen=True)
class AgentInput:
    """Heading rate and acceleration command."""

    r: float  # rad/s
    a: float  # m/s^2


@dataclass
class ObstacleState:
    """Position, velocity, and acceleration of one obstacle at some time."""

    p: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.a = np.asarray(self.a, dtype=float)


@dataclass
class ObstacleScript:
    """Piecewise-constant-velocity obstacle path.

    ``segments`` is a time-ordered list of (t_start, velocity) with the first
    segment starting at t = 0. Velocity changes at segment switches are
    instantaneous; the reported acceleration is zero everywhere.
    """

    p0: np.ndarray
    segments: list = field(default_factory=list)

    def __post_init__(self):
        self.p0 = np.asarray(self.p0, dtype=float)
        if not self.segments:
            raise ValueError("obstacle script needs at least one segment")
        segs = [(float(t), np.asarray(v, dtype=float)) for t, v in self.segments]
        if segs[0][0] != 0.0:
            raise ValueError("first obstacle segment must start at t = 0")
        times = [t for t, _ in segs]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("obstacle segments must be strictly time-ordered")
        self.segments = segs
        # Exact positions at segment starts, so lookups are O(log n) and
        # independent of the query order.
        knots = [self.p0.copy()]
        for (t0, v0), (t1, _) in zip(segs, segs[1:]):
            knots.append(knots[-1] + v0 * (t1 - t0))
        self._knot_times = times
        self._knot_positions = knots

    @classmethod
    def constant(cls, p0, v) -> "ObstacleScript":
        return cls(p0=np.asarray(p0, dtype=float), segments=[(0.0, np.asarray(v, dtype=float))])


def obstacle_at(script: ObstacleScript, t: float) -> ObstacleState:
    """Exact obstacle state at time t >= 0."""
    if t < 0.0:
        raise ValueError(f"obstacle state requested before script start: t={t}")
    k = bisect.bisect_right(script._knot_times, t) - 1
    t0 = script._knot_times[k]
    v = script.segments[k][1]
    p = script._knot_positions[k] + v * (t - t0)
    return ObstacleState(p=p, v=v.copy(), a=np.zeros(2))


def agent_derivative(s: AgentState, inp: AgentInput):
    """Time derivative (xdot, ydot, psidot, udot) of the unicycle state."""
    return (s.u * math.cos(s.psi), s.u * math.sin(s.psi), inp.r, inp.a)


def step_agent(s: AgentState, inp: AgentInput, dt: float, lim: AgentLimits) -> AgentState:
    """One classical RK4 step with zero-order-hold inputs.

    The heading is re-wrapped and the speed clamped to [u_min, u_max] after
    the step.
    """
    r, a = inp.r, inp.a
    x, y, psi, u = s.x, s.y, s.psi, s.u

    k1x = u * math.cos(psi)
    k1y = u * math.sin(psi)

    psi2 = psi + 0.5 * dt * r
    u2 = u + 0.5 * dt * a
    k2x = u2 * math.cos(psi2)
    k2y = u2 * math.sin(psi2)

    # Stage 3 sees the same (psi, u) values as stage 2: the pose substates
    # do not feed back into the heading/speed dynamics.
    k3x = k2x
    k3y = k2y

    psi4 = psi + dt * r
    u4 = u + dt * a
    k4x = u4 * math.cos(psi4)
    k4y = u4 * math.sin(psi4)

    sixth = dt / 6.0
    x_new = x + sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
    y_new = y + sixth * (k1y + 2.0 * (k2y + k3y) + k4y)
    u_new = min(max(u4, lim.u_min), lim.u_max)
    return AgentState(x=x_new, y=y_new, psi=wrap_angle(psi4), u=u_new)
