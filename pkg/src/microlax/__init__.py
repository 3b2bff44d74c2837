"""Phase-field dynamics with relaxed laminate elastic energies."""

from .errors import MicrolaxError
from .phase_energy import ChemParams, LinearTheoryParams, PhaseParams
from .relaxed_energy import (
    RegimeLabel,
    RelaxedEval,
    classify_regime,
    eval_1d,
    eval_2d,
    eval_extended,
    eval_scalar3d,
    gamma_star,
)
from .tensor_core import ElasticModulus, SymTensor

__version__ = "0.1.0"

__all__ = [
    "MicrolaxError",
    "ChemParams",
    "LinearTheoryParams",
    "PhaseParams",
    "RegimeLabel",
    "RelaxedEval",
    "classify_regime",
    "eval_1d",
    "eval_2d",
    "eval_extended",
    "eval_scalar3d",
    "gamma_star",
    "ElasticModulus",
    "SymTensor",
]
