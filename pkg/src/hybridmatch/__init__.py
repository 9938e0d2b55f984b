"""Global dynamics of planar hybrid systems with a broken switching line."""

from .analysis import (
    Case,
    StabilityVerdict,
    classify_normal_form,
    classify_system,
    displacement,
    displacement_derivative,
    displacement_params,
    limit_cycle,
)
from .model import (
    Branch,
    CrossingError,
    HurwitzError,
    HurwitzMatrix,
    HybridSpecError,
    HybridSystemSpec,
    JumpMap,
    Side,
    SigmaPoint,
    SwitchingLine,
    jump_apply,
    jump_invert,
)
from .normal_form import NormalFormError, normalize
from .simulate import SimConfig, Termination, run

__all__ = [
    "Branch", "Case", "CrossingError", "HurwitzError", "HurwitzMatrix", "HybridSpecError",
    "HybridSystemSpec", "JumpMap", "NormalFormError", "Side", "SigmaPoint", "SimConfig",
    "StabilityVerdict", "SwitchingLine", "Termination", "classify_normal_form", "classify_system",
    "displacement", "displacement_derivative", "displacement_params", "jump_apply", "jump_invert",
    "limit_cycle", "normalize", "run",
]
