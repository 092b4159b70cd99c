"""遮挡概率与代理约束模块"""

from occlusion_planner.occlusion.surrogate import (
    SurrogateBatch,
    SurrogateConstraint,
    build_occlusion_constraints,
    build_surrogate_batch,
    theta,
    theta_gradient,
    theta_linearized,
)
from occlusion_planner.occlusion.target import GaussianTarget, SampleSet, WeightMode, draw_samples
from occlusion_planner.occlusion.visibility import (
    occluded,
    occlusion_mask,
    occlusion_probability,
    xi_tight,
)

__all__ = [
    "GaussianTarget",
    "SampleSet",
    "SurrogateBatch",
    "SurrogateConstraint",
    "WeightMode",
    "build_occlusion_constraints",
    "build_surrogate_batch",
    "draw_samples",
    "occluded",
    "occlusion_mask",
    "occlusion_probability",
    "theta",
    "theta_gradient",
    "theta_linearized",
    "xi_tight",
]
