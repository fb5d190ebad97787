"""Engagement maximization: optimal stopping-belief design and simulation."""

from .beliefs import SHANNON, DecisionProblem, EntropyModel
from .errors import (AuditFailure, CapabilityError, EngagemaxError, InputError, NumericalError,
                     PropertyViolation)
from .principal import PrincipalSolution, solve_principal, sweep_prior
from .static_ri import PosteriorDistribution, agent_benchmark, solve_static_ri, static_ri

__version__ = "0.1.0"

__all__ = [
    "SHANNON", "DecisionProblem", "EntropyModel", "AuditFailure", "CapabilityError", "EngagemaxError",
    "InputError", "NumericalError", "PropertyViolation", "PrincipalSolution", "solve_principal",
    "sweep_prior", "PosteriorDistribution", "agent_benchmark", "solve_static_ri", "static_ri",
]
