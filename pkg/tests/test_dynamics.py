import math

import numpy as np
import pytest

from fleetsafe.dynamics import (
    AgentInput,
    AgentLimits,
    AgentState,
    ObstacleScript,
    agent_derivative,
    obstacle_at,
    step_agent,
)

LIM = AgentLimits(r_max=0.5, a_max=0.25, u_min=0.3, u_max=0.8)
WIDE = AgentLimits(r_max=10.0, a_max=10.0, u_min=1e-6, u_max=1e6)


def test_agent_derivative_straight():
    d = agent_derivative(AgentState(0, 0, 0, 1.0), AgentInput(0.0, 0.0))
    assert d == pytest.approx((1.0, 0.0, 0.0, 0.0))


def test_agent_derivative_heading_north():
    d = agent_derivative(AgentState(0, 0, math.pi / 2, 2.0), AgentInput(0.1, -0.2))
    assert d == pytest.approx((0.0, 2.0, 0.1, -0.2), abs=1e-15)


def test_agent_derivative_diagonal():
    d = agent_derivative(AgentState(5, -3, math.pi / 4, 0.5), AgentInput(0.5, 0.25))
    c = 0.5 * math.sqrt(2) / 2
    assert d == pytest.approx((c, c, 0.5, 0.25))


def test_step_straight_line_exact():
    s = step_agent(AgentState(0, 0, 0, 1.0), AgentInput(0.0, 0.0), 1.0, WIDE)
    assert (s.x, s.y, s.psi, s.u) == pytest.approx((1.0, 0.0, 0.0, 1.0))


def _arc_error(dt: float, t_end: float = 1.0):
    """Position error against the closed-form circular arc."""
    r = math.pi / 2
    u = 1.0
    s = AgentState(0, 0, 0, u)
    inp = AgentInput(r, 0.0)
    steps = int(round(t_end / dt))
    for _ in range(steps):
        s = step_agent(s, inp, dt, WIDE)
    radius = u / r
    x_exact = radius * math.sin(r * t_end)
    y_exact = radius * (1 - math.cos(r * t_end))
    return math.hypot(s.x - x_exact, s.y - y_exact)


def test_step_converges_to_circular_arc():
    assert _arc_error(1e-4, t_end=0.1) < 1e-12


def test_rk4_order():
    e1 = _arc_error(0.02)
    e2 = _arc_error(0.01)
    assert 12.0 < e1 / e2 < 20.0


def test_speed_clamped_at_u_min():
    s = step_agent(AgentState(0, 0, 0, 0.3), AgentInput(0.0, -0.25), 1.0, LIM)
    assert s.u == LIM.u_min


def test_speed_stays_in_bounds_under_random_inputs():
    rng = np.random.RandomState(2)
    s = AgentState(0, 0, 0, 0.5)
    for _ in range(500):
        inp = AgentInput(rng.uniform(-0.5, 0.5), rng.uniform(-0.25, 0.25))
        s = step_agent(s, inp, 0.05, LIM)
        assert LIM.u_min <= s.u <= LIM.u_max
        assert -math.pi < s.psi <= math.pi


def test_velocity_norm_equals_speed():
    rng = np.random.RandomState(4)
    for _ in range(100):
        s = AgentState(rng.randn(), rng.randn(), rng.uniform(-4, 4), rng.uniform(0.3, 0.8))
        assert np.linalg.norm(s.velocity) == pytest.approx(s.u, rel=1e-14)


def test_obstacle_constant_velocity():
    script = ObstacleScript.constant((100.0, 0.0), (-0.5, 0.0))
    ob = obstacle_at(script, 10.0)
    assert ob.p == pytest.approx([95.0, 0.0])
    assert ob.v == pytest.approx([-0.5, 0.0])
    assert ob.a == pytest.approx([0.0, 0.0])


def test_obstacle_at_time_zero():
    script = ObstacleScript.constant((3.0, -7.0), (1.0, 1.0))
    assert obstacle_at(script, 0.0).p == pytest.approx([3.0, -7.0])


def test_obstacle_position_continuous_at_switch():
    script = ObstacleScript(p0=(0.0, 0.0),
                            segments=[(0.0, (1.0, 0.0)), (5.0, (0.0, -2.0))])
    before = obstacle_at(script, 5.0 - 1e-9).p
    after = obstacle_at(script, 5.0 + 1e-9).p
    assert np.max(np.abs(before - after)) < 1e-8
    exact = obstacle_at(script, 5.0).p
    assert exact == pytest.approx([5.0, 0.0], abs=1e-12)
    assert obstacle_at(script, 7.0).p == pytest.approx([5.0, -4.0])


def test_obstacle_before_start_raises():
    script = ObstacleScript.constant((0.0, 0.0), (1.0, 0.0))
    with pytest.raises(ValueError):
        obstacle_at(script, -0.1)


def test_obstacle_script_validation():
    with pytest.raises(ValueError):
        ObstacleScript(p0=(0, 0), segments=[(1.0, (1, 0))])  # must start at 0
    with pytest.raises(ValueError):
        ObstacleScript(p0=(0, 0), segments=[(0.0, (1, 0)), (0.0, (0, 1))])


def test_limits_validation():
    with pytest.raises(ValueError):
        AgentLimits(r_max=-1.0)
    with pytest.raises(ValueError):
        AgentLimits(u_min=0.0)
    with pytest.raises(ValueError):
        AgentLimits(u_min=0.5, u_max=0.4)
