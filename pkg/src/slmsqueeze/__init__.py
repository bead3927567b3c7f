"""slmsqueeze: squeezed-light spatial mode conversion simulator.

Library plus CLI covering mode synthesis, phase-only hologram compilation,
scalar angular-spectrum diffraction with first-order selection, and the
squeezing loss budget of the conversion chain.
"""

from .config import ExperimentConfig, parse_config, parse_config_file
from .grids import (ComplexField, GridMismatchError, GridSpec, intensity_image,
                    mode_overlap, normalize, power)
from .hologram import Hologram, PhaseMap, SlmGeometry
from .modes import ModeSpec, evaluate_mode
from .pipeline import run_pipeline, simulate_mode
from .propagation import PropagationPlan, SlmModel, angular_spectrum
from .quantumnoise import LossStage, NoiseBudget, SqueezingLevel, budget, loss_variance

__version__ = "0.1.0"

__all__ = [
    "ComplexField",
    "ExperimentConfig",
    "GridMismatchError",
    "GridSpec",
    "Hologram",
    "LossStage",
    "ModeSpec",
    "NoiseBudget",
    "PhaseMap",
    "PropagationPlan",
    "SlmGeometry",
    "SlmModel",
    "SqueezingLevel",
    "angular_spectrum",
    "budget",
    "evaluate_mode",
    "intensity_image",
    "loss_variance",
    "mode_overlap",
    "normalize",
    "parse_config",
    "parse_config_file",
    "power",
    "run_pipeline",
    "simulate_mode",
    "__version__",
]
