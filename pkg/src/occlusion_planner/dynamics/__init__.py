"""运动学模块"""

from occlusion_planner.dynamics.bicycle import (
    Control,
    ControlBounds,
    State,
    Trajectory,
    dynamics_rate,
    linearize,
    rollout,
    step,
    wrap_angle,
)

__all__ = [
    "Control",
    "ControlBounds",
    "State",
    "Trajectory",
    "dynamics_rate",
    "linearize",
    "rollout",
    "step",
    "wrap_angle",
]
