"""Switched barrier functions for pairwise and fleet-level collision avoidance.

Safety of a pair at distance d with safety radius d_min is encoded by

    h0 = d_min^2 - d^2        (h0 <= 0 is safe; the usual sign is reversed)

The first-order extension h1 = dh0/dt + gamma0*h0 has relative degree one in
the heading rate, but its heading-rate gain vanishes when the agent points
straight along the line of sight. The switched extension

    h2(x, q) = 2 p^T R(q*vartheta) v_own - 2 p^T v_partner
               + gamma0*h0 + 4*d*u_own*sin(vartheta)

rotates the own-velocity term by a discrete mode q in {-1, +1} and adds a
penalty so that h2 >= h1 pointwise. At any configuration where one mode's
heading-rate gain vanishes, the opposite mode sits lower by at least the
synergy gap 2*u*d*(1 - cos(2*vartheta)), so switching q strictly decreases
h2. Jumps fire when the headroom h2(x,q) - min_q h2 exceeds the hysteresis
width delta < gap, which keeps the mode from chattering near symmetric
geometries.

Three pair variants share the same algebra:

* agent-obstacle: own disk is the agent, partner moves exogenously,
* agent-agent:    both ends are controlled; the partner's heading-rate gain
                  is filled in as well (and is independent of q),
* barycenter-obstacle: the own disk is the fleet barycenter; every agent
                  contributes a heading-rate and acceleration gain.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dynamics import AgentState, ObstacleState
from .geometry import DegenerateGeometryError

log = logging.getLogger(__name__)

AGENT_OBSTACLE = "agent-obstacle"
AGENT_AGENT = "agent-agent"
BARYCENTER_OBSTACLE = "barycenter-obstacle"

PAIR_KINDS = (AGENT_OBSTACLE, AGENT_AGENT, BARYCENTER_OBSTACLE)

# Ties between the two modes below this gap keep the current mode.
MODE_TIE_TOL = 1e-12

HYSTERESIS_RULES = ("product", "constant")


@dataclass
class ScbfParams:
    """Parameters of the switched barrier family.

    ``hysteresis_rule`` selects the width delta: "product" is the
    state-dependent u*d*(1 - cos(2*vartheta)) (half the synergy gap),
    "constant" uses ``hysteresis_value`` directly.
    """

    vartheta: float = math.pi / 4
    gamma0: float = 1.0
    gamma2: float = 0.1
    eps_ball: float = 0.1
    hysteresis_rule: str = "product"
    hysteresis_value: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.vartheta < 0.5 * math.pi:
            raise ValueError("vartheta must lie in (0, pi/2)")
        if self.gamma0 <= 0.0 or self.gamma2 <= 0.0:
            raise ValueError("gamma0 and gamma2 must be positive")
        if self.eps_ball <= 0.0:
            raise ValueError("eps_ball must be positive")
        if self.hysteresis_rule not in HYSTERESIS_RULES:
            raise ValueError(f"unknown hysteresis rule {self.hysteresis_rule!r}")
        if self.hysteresis_rule == "constant" and self.hysteresis_value <= 0.0:
            raise ValueError("constant hysteresis width must be positive")


@dataclass
class SafetyPair:
    """One barrier relationship and its discrete mode.

    ``i`` and ``j`` are agent/obstacle indices; fleet-level pairs use
    i = -1. ``d_min_latch`` is the nonincreasing latched safety distance of
    barycenter pairs (None while the obstacle is outside the activation
    radius).
    """

    kind: str
    i: int
    j: int
    d_min: float
    q: int = 1
    d_min_latch: Optional[float] = None

    def __post_init__(self):
        if self.kind not in PAIR_KINDS:
            raise ValueError(f"unknown pair kind {self.kind!r}")
        if self.q not in (-1, 1):
            raise ValueError("mode q must be -1 or +1")
        if self.d_min <= 0.0:
            raise ValueError("d_min must be positive")
        if self.kind == AGENT_AGENT and not self.i < self.j:
            raise ValueError("agent-agent pairs must be ordered i < j")

    @property
    def effective_d_min(self) -> float:
        return self.d_min_latch if self.d_min_latch is not None else self.d_min

    def label(self) -> str:
        if self.kind == AGENT_AGENT:
            return f"a{self.i + 1}_a{self.j + 1}"
        if self.kind == AGENT_OBSTACLE:
            return f"a{self.i + 1}_o{self.j}"
        return f"b_o{self.j}"


@dataclass
class BarrierEval:
    """Barrier values and the exact input gains of dh2/dt for one pair.

    ``r_i_coef``/``a_i_coef`` multiply the own agent's heading rate and
    acceleration; ``r_j_coef``/``a_j_coef`` are filled for agent-agent pairs
    only. ``headroom`` is h2(x, q) - min_q' h2(x, q') >= 0.
    """

    d: float
    h0: float
    h1: float
    h2: float
    lf: float
    r_i_coef: float
    a_i_coef: float
    headroom: float
    r_j_coef: Optional[float] = None
    a_j_coef: Optional[float] = None


@dataclass
class BarycenterEval:
    """Barrier values and per-agent input gains of the fleet-level pair."""

    d: float
    h0: float
    h1: float
    h2: float
    lf: float
    r_coefs: np.ndarray
    a_coefs: np.ndarray
    headroom: float
    u_b: float


@dataclass
class BarycenterGeometry:
    """Instantaneous fleet geometry used by the barycenter barrier."""

    p_b: np.ndarray
    v_b: np.ndarray
    u_b: float
    d_f: float
    d_f_d: float
    d_bj_min_raw: float


def h0_pair(p_i, p_j, d_min: float) -> float:
    """Squared-distance barrier d_min^2 - ||p_j - p_i||^2 (<= 0 is safe)."""
    dx = float(p_j[0]) - float(p_i[0])
    dy = float(p_j[1]) - float(p_i[1])
    return d_min * d_min - (dx * dx + dy * dy)


def h1_pair(p_i, v_i, p_j, v_j, d_min: float, params: ScbfParams) -> float:
    """First-order extension dh0/dt + gamma0*h0 with dh0/dt = 2 p^T (v_i - v_j)."""
    px = float(p_j[0]) - float(p_i[0])
    py = float(p_j[1]) - float(p_i[1])
    relx = float(v_i[0]) - float(v_j[0])
    rely = float(v_i[1]) - float(v_j[1])
    h0 = d_min * d_min - (px * px + py * py)
    return 2.0 * (px * relx + py * rely) + params.gamma0 * h0


def _h2_values(px, py, vox, voy, u_own, vjx, vjy, d_min, q, params):
    """Value-level evaluation shared by all variants.

    (px, py) is partner minus own position; (vox, voy) the own velocity with
    speed u_own; (vjx, vjy) the partner velocity. Returns
    (d, h0, h1, h2_q, h2_other) where h2_other is the opposite mode's value.
    """
    d2 = px * px + py * py
    d = math.sqrt(d2)
    if d < params.eps_ball:
        raise DegenerateGeometryError(
            f"pair separation {d:.3g} m inside excluded ball ({params.eps_ball} m)"
        )
    h0 = d_min * d_min - d2
    relx = vox - vjx
    rely = voy - vjy
    hdot0 = 2.0 * (px * relx + py * rely)
    h1 = hdot0 + params.gamma0 * h0
    c = math.cos(params.vartheta)
    s = math.sin(params.vartheta)
    sq = s if q > 0 else -s
    rot_q = px * (c * vox - sq * voy) + py * (sq * vox + c * voy)
    rot_o = px * (c * vox + sq * voy) + py * (-sq * vox + c * voy)
    pv_j = px * vjx + py * vjy
    base = -2.0 * pv_j + params.gamma0 * h0 + 4.0 * d * u_own * s
    return d, h0, h1, 2.0 * rot_q + base, 2.0 * rot_o + base


def h2_value(p_own, v_own, u_own, p_j, v_j, d_min: float, q: int, params: ScbfParams) -> float:
    """Scalar h2 for any variant, given the own disk's velocity and speed."""
    px = float(p_j[0]) - float(p_own[0])
    py = float(p_j[1]) - float(p_own[1])
    _, _, _, h2_q, _ = _h2_values(
        px, py, float(v_own[0]), float(v_own[1]), u_own, float(v_j[0]), float(v_j[1]),
        d_min, q, params,
    )
    return h2_q


def min_mode(p_own, v_own, u_own, p_j, v_j, d_min: float, params: ScbfParams,
             current_q: int = 1):
    """Minimum of h2 over both modes and its argmin.

    Ties within MODE_TIE_TOL report the current mode, so exactly symmetric
    geometries do not jitter.
    """
    px = float(p_j[0]) - float(p_own[0])
    py = float(p_j[1]) - float(p_own[1])
    _, _, _, h2_cur, h2_other = _h2_values(
        px, py, float(v_own[0]), float(v_own[1]), u_own, float(v_j[0]), float(v_j[1]),
        d_min, current_q, params,
    )
    if abs(h2_cur - h2_other) < MODE_TIE_TOL:
        return min(h2_cur, h2_other), current_q
    if h2_other < h2_cur:
        return h2_other, -current_q
    return h2_cur, current_q


def synergy_gap_lower_bound(u_own: float, d: float, params: ScbfParams) -> float:
    """Guaranteed headroom 2*u*d*(1 - cos(2*vartheta)) at critical configurations."""
    return 2.0 * u_own * d * (1.0 - math.cos(2.0 * params.vartheta))


def hysteresis_width(u_own: float, d: float, params: ScbfParams) -> float:
    """Jump threshold delta; the product rule is exactly half the synergy gap."""
    if params.hysteresis_rule == "product":
        return u_own * d * (1.0 - math.cos(2.0 * params.vartheta))
    return params.hysteresis_value


@dataclass
class JumpResult:
    pair: SafetyPair
    jumped: bool
    h2_pre: float
    h2_post: float
    delta: float
    headroom: float
    d: float


def jump_update(pair: SafetyPair, p_own, v_own, u_own, p_j, v_j,
                params: ScbfParams) -> JumpResult:
    """Apply the hysteresis jump law once.

    If the headroom h2(x, q) - min_q h2 reaches the width delta, the mode
    flips to the argmin, strictly decreasing h2 by at least delta. With two
    modes a single jump always lands in the flow set.
    """
    px = float(p_j[0]) - float(p_own[0])
    py = float(p_j[1]) - float(p_own[1])
    d, _, _, h2_cur, h2_other = _h2_values(
        px, py, float(v_own[0]), float(v_own[1]), u_own, float(v_j[0]), float(v_j[1]),
        pair.effective_d_min, pair.q, params,
    )
    delta = hysteresis_width(u_own, d, params)
    headroom = max(h2_cur - min(h2_cur, h2_other), 0.0)
    if headroom >= delta:
        new_pair = replace(pair, q=-pair.q)
        return JumpResult(new_pair, True, h2_cur, h2_other, delta, headroom, d)
    return JumpResult(pair, False, h2_cur, h2_cur, delta, headroom, d)


def h2_pair(state_i: AgentState, obstacle: ObstacleState, d_min: float, q: int,
            params: ScbfParams) -> BarrierEval:
    """Full evaluation of the agent-obstacle barrier, gains included."""
    u_i = state_i.u
    cpsi = math.cos(state_i.psi)
    spsi = math.sin(state_i.psi)
    vix = u_i * cpsi
    viy = u_i * spsi
    return _eval_agent_pair(
        state_i.x, state_i.y, vix, viy, u_i,
        float(obstacle.p[0]), float(obstacle.p[1]),
        float(obstacle.v[0]), float(obstacle.v[1]),
        float(obstacle.a[0]), float(obstacle.a[1]),
        d_min, q, params, partner_is_agent=False,
    )


def h2_agents(state_i: AgentState, state_j: AgentState, d_min: float, q: int,
              params: ScbfParams) -> BarrierEval:
    """Agent-agent barrier; additionally fills the partner's input gains.

    The partner's heading-rate gain is independent of the mode q.
    """
    u_i = state_i.u
    vix = u_i * math.cos(state_i.psi)
    viy = u_i * math.sin(state_i.psi)
    u_j = state_j.u
    vjx = u_j * math.cos(state_j.psi)
    vjy = u_j * math.sin(state_j.psi)
    ev = _eval_agent_pair(
        state_i.x, state_i.y, vix, viy, u_i,
        state_j.x, state_j.y, vjx, vjy, 0.0, 0.0,
        d_min, q, params, partner_is_agent=True,
    )
    px = state_j.x - state_i.x
    py = state_j.y - state_i.y
    ev.r_j_coef = 2.0 * (px * vjy - py * vjx)          # -2 p . S v_j
    ev.a_j_coef = -2.0 * (px * vjx + py * vjy) / u_j   # -2 p . n_j
    return ev


def _eval_agent_pair(xi, yi, vix, viy, u_i, xj, yj, vjx, vjy, ajx, ajy,
                     d_min, q, params, partner_is_agent):
    px = xj - xi
    py = yj - yi
    d, h0, h1, h2_q, h2_other = _h2_values(
        px, py, vix, viy, u_i, vjx, vjy, d_min, q, params)

    c = math.cos(params.vartheta)
    s = math.sin(params.vartheta)
    sq = s if q > 0 else -s
    rvx = c * vix - sq * viy
    rvy = sq * vix + c * viy
    rot_dot = px * rvx + py * rvy

    r_i_coef = 2.0 * (py * rvx - px * rvy)             # 2 p . R S v_i
    a_i_coef = 2.0 * rot_dot / u_i + 4.0 * d * s       # 2 p . R n_i + 4 d sin(vt)

    relx = vix - vjx
    rely = viy - vjy
    hdot0 = 2.0 * (px * relx + py * rely)
    ddot = -(px * relx + py * rely) / d
    lf = (-2.0 * (relx * rvx + rely * rvy)
          + 2.0 * (relx * vjx + rely * vjy)
          + params.gamma0 * hdot0
          + 4.0 * u_i * s * ddot)
    if not partner_is_agent:
        lf -= 2.0 * (px * ajx + py * ajy)

    headroom = max(h2_q - min(h2_q, h2_other), 0.0)
    return BarrierEval(d=d, h0=h0, h1=h1, h2=h2_q, lf=lf,
                       r_i_coef=r_i_coef, a_i_coef=a_i_coef, headroom=headroom)


def barycenter_geometry(states: Sequence[AgentState], offsets,
                        d_min_per_agent) -> BarycenterGeometry:
    """Fleet barycenter, mean velocity, and the raw latched safety distance.

    ``d_min_per_agent`` holds each agent's pairwise safety distance to the
    obstacle under consideration; the raw fleet radius is their maximum plus
    the larger of the actual and desired formation radii.
    """
    n = len(states)
    if n == 0:
        raise ValueError("barycenter undefined for an empty fleet")
    sx = sy = svx = svy = 0.0
    for st in states:
        sx += st.x
        sy += st.y
        svx += st.u * math.cos(st.psi)
        svy += st.u * math.sin(st.psi)
    p_b = np.array([sx / n, sy / n])
    v_b = np.array([svx / n, svy / n])
    u_b = math.hypot(v_b[0], v_b[1])
    d_f = max(math.hypot(st.x - p_b[0], st.y - p_b[1]) for st in states)
    offs = np.asarray(offsets, dtype=float)
    d_f_d = max(math.hypot(ox, oy) for ox, oy in offs) if len(offs) else 0.0
    raw = max(float(dm) for dm in d_min_per_agent) + max(d_f, d_f_d)
    return BarycenterGeometry(p_b=p_b, v_b=v_b, u_b=u_b, d_f=d_f, d_f_d=d_f_d,
                              d_bj_min_raw=raw)


def latch_d_bj_min(pair: SafetyPair, raw: float, d_bj: float,
                   activation_factor: float = 2.0) -> Optional[float]:
    """Nonincreasing latch of the fleet safety distance during an encounter.

    While the obstacle sits within ``activation_factor * raw`` of the
    barycenter the latch only ratchets downward; outside it resets to the
    raw value (returned as None, meaning "track raw").
    """
    if raw <= 0.0:
        raise ValueError("raw safety distance must be positive")
    if d_bj > activation_factor * raw:
        return None
    if pair.d_min_latch is None:
        return raw
    return min(pair.d_min_latch, raw)


def h2_barycenter(states: Sequence[AgentState], obstacle: ObstacleState,
                  d_min: float, q: int, params: ScbfParams) -> BarycenterEval:
    """Fleet-level barrier on the barycenter, with per-agent input gains.

    The gains include the exact derivative of the speed penalty
    4*u_b*d*sin(vartheta): the barycenter speed responds to every agent's
    heading rate, so each r_k gain carries an extra
    (4*d*sin(vartheta)/n) * n_b . S v_k term on top of the rotated-velocity
    part.
    """
    n = len(states)
    geo_px = float(obstacle.p[0])
    geo_py = float(obstacle.p[1])
    sx = sy = svx = svy = 0.0
    vxs = []
    vys = []
    for st in states:
        vx = st.u * math.cos(st.psi)
        vy = st.u * math.sin(st.psi)
        vxs.append(vx)
        vys.append(vy)
        sx += st.x
        sy += st.y
        svx += vx
        svy += vy
    pbx = sx / n
    pby = sy / n
    vbx = svx / n
    vby = svy / n
    u_b = math.hypot(vbx, vby)
    if u_b <= 0.0:
        raise DegenerateGeometryError("barycenter speed is zero")
    px = geo_px - pbx
    py = geo_py - pby
    vjx = float(obstacle.v[0])
    vjy = float(obstacle.v[1])
    d, h0, h1, h2_q, h2_other = _h2_values(
        px, py, vbx, vby, u_b, vjx, vjy, d_min, q, params)

    c = math.cos(params.vartheta)
    s = math.sin(params.vartheta)
    sq = s if q > 0 else -s
    rvx = c * vbx - sq * vby
    rvy = sq * vbx + c * vby
    nbx = vbx / u_b
    nby = vby / u_b

    r_coefs = np.empty(n)
    a_coefs = np.empty(n)
    pen = 4.0 * d * s
    for k in range(n):
        vkx = vxs[k]
        vky = vys[k]
        u_k = states[k].u
        # p . R S v_k and n_b . S v_k, with S v = (-vy, vx)
        p_rs = py * (c * vkx - sq * vky) - px * (sq * vkx + c * vky)
        nb_s = -nbx * vky + nby * vkx
        r_coefs[k] = (2.0 * p_rs + pen * nb_s) / n
        p_rn = (px * (c * vkx - sq * vky) + py * (sq * vkx + c * vky)) / u_k
        nb_n = (nbx * vkx + nby * vky) / u_k
        a_coefs[k] = (2.0 * p_rn + pen * nb_n) / n

    relx = vbx - vjx
    rely = vby - vjy
    hdot0 = 2.0 * (px * relx + py * rely)
    ddot = -(px * relx + py * rely) / d
    lf = (-2.0 * (relx * rvx + rely * rvy)
          + 2.0 * (relx * vjx + rely * vjy)
          - 2.0 * (px * float(obstacle.a[0]) + py * float(obstacle.a[1]))
          + params.gamma0 * hdot0
          + 4.0 * u_b * s * ddot)

    headroom = max(h2_q - min(h2_q, h2_other), 0.0)
    return BarycenterEval(d=d, h0=h0, h1=h1, h2=h2_q, lf=lf,
                          r_coefs=r_coefs, a_coefs=a_coefs,
                          headroom=headroom, u_b=u_b)


def initial_mode(p_own, v_own, u_own, p_j, v_j, d_min: float,
                 params: ScbfParams) -> int:
    """Mode assignment at t = 0: the argmin of h2, ties resolved to +1."""
    _, q = min_mode(p_own, v_own, u_own, p_j, v_j, d_min, params, current_q=1)
    return q
