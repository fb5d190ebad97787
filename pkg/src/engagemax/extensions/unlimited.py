"""Time maximization without a capacity constraint.

With unlimited capacity the agent would learn the state at once.  The
principal can still hold attention by revealing the state at a Poisson time,
with the rate chosen so the agent is just willing to wait:
``kappa E[tau] = E^{pi_max}[u_hat - u_hat(prior)]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..beliefs import DecisionProblem, vertex
from ..errors import NumericalError
from ..static_ri import PosteriorDistribution

BOUND_TOL = 1e-12


@dataclass(frozen=True)
class UnlimitedCapacitySolution:
    pi_max: PosteriorDistribution
    alpha: float
    expected_tau: float
    value_of_information: float
    degenerate: bool
    bound_gap: float = 0.0


def full_information(problem: DecisionProblem) -> PosteriorDistribution:
    """Atoms at the vertices ``e_x`` with weights ``prior_x``."""
    q0 = problem.prior
    xs = np.flatnonzero(q0 > 0)
    B = np.array([vertex(problem.n_states, int(x)) for x in xs])
    return PosteriorDistribution(B, q0[xs] / q0[xs].sum())


def unlimited_capacity_solve(problem: DecisionProblem) -> UnlimitedCapacitySolution:
    pi = full_information(problem)
    voi = pi.action_value(problem) - problem.payoff(problem.prior)
    if pi.size < 2 or voi <= 0.0:
        return UnlimitedCapacitySolution(PosteriorDistribution.point(problem.prior), float("inf"), 0.0,
                                         max(voi, 0.0), True)
    alpha = problem.kappa / voi
    tau = voi / problem.kappa
    gap = abs(problem.kappa * tau - voi)
    if gap > BOUND_TOL * max(1.0, voi):
        raise NumericalError("waiting-time bound is not attained", residual=gap)
    return UnlimitedCapacitySolution(pi, alpha, tau, voi, False, gap)
