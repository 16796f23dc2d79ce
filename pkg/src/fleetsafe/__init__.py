"""Safety filtering for fleets of positive-speed nonholonomic agents.

Hybrid (switched) control barrier functions turn pairwise and fleet-level
collision-avoidance requirements into linear heading-rate constraints; a
min-norm quadratic program filters the nominal formation-following commands
through them. The package ships a scenario simulator, a constraint
feasibility analyzer, and a command-line interface.
"""

__version__ = "0.1.0"

from .barriers import (  # noqa: F401
    AGENT_AGENT,
    AGENT_OBSTACLE,
    BARYCENTER_OBSTACLE,
    BarrierEval,
    BarycenterEval,
    SafetyPair,
    ScbfParams,
)
from .dynamics import (  # noqa: F401
    AgentInput,
    AgentLimits,
    AgentState,
    ObstacleScript,
    ObstacleState,
)
from .geometry import DegenerateGeometryError, bearing, rot, wrap_angle  # noqa: F401
