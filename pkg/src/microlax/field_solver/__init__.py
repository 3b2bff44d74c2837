"""Grids, elastic equilibrium and time stepping for the phase-field system."""

from .elastic import Elastic1D, ElasticFE, ElasticResult, make_elastic
from .grid import (
    Grid,
    face_gradients,
    flux_divergence,
    gradient_energy,
    green_apply,
    laplacian_neumann,
    m_norm_sq,
)
from .models import BatchEval, LinearModel, RelaxedModel, make_model
from .simulation import (
    Diagnostics,
    SimConfig,
    SimState,
    Simulation,
    clip_to_range,
    elastic_equilibrium,
    energy_at,
    flux_field,
    step_minimizing_movement,
    step_semi_implicit,
    total_free_energy,
)

__all__ = [
    "BatchEval",
    "Diagnostics",
    "Elastic1D",
    "ElasticFE",
    "ElasticResult",
    "Grid",
    "LinearModel",
    "RelaxedModel",
    "SimConfig",
    "SimState",
    "Simulation",
    "clip_to_range",
    "elastic_equilibrium",
    "energy_at",
    "face_gradients",
    "flux_divergence",
    "flux_field",
    "gradient_energy",
    "green_apply",
    "laplacian_neumann",
    "m_norm_sq",
    "make_elastic",
    "make_model",
    "step_minimizing_movement",
    "step_semi_implicit",
    "total_free_energy",
]
