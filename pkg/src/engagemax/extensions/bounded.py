"""Engagement when belief jumps are bounded by ``d`` (Euclidean norm, two states).

Stopping beliefs must lie within ``d`` of the agent's continuation region.
With two states the relevant region is the continuation interval
``(q1, q2)`` around the prior, so stopping beliefs are confined to
``[q1 - d/sqrt(2), q2 + d/sqrt(2)]``.  The principal's relaxed problem is
then solved with the support restricted to that interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..beliefs import DecisionProblem
from ..errors import CapabilityError, InputError, NumericalError
from ..principal import BRACKET_EPS, MAX_BISECTIONS, solve_principal
from ..static_ri import BinaryConcavifier, PosteriorDistribution, agent_benchmark, net_participation

SIMPLEX_DIAMETER_2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BoundedJumpSolution:
    d: float
    engagement: float
    posterior: PosteriorDistribution
    support_bound: tuple[float, float] | None
    method: str
    residual: float = 0.0

    @property
    def support(self) -> tuple[float, float]:
        return self.posterior.binary_support()


def reachable_interval(q1: float, q2: float, d: float) -> tuple[float, float]:
    """Binary beliefs within Euclidean distance ``d`` of ``[q1, q2]``."""
    r = d / SIMPLEX_DIAMETER_2
    return max(0.0, q1 - r), min(1.0, q2 + r)


def _restricted(problem, c, lo, hi):
    cv = BinaryConcavifier(problem, c, domain=(lo, hi))
    return cv.posterior(float(problem.prior[1]))


def bounded_jump_solve(problem: DecisionProblem, d: float) -> BoundedJumpSolution:
    if problem.n_states != 2:
        raise CapabilityError("bounded jumps are only resolved for two states")
    d = float(d)
    if not d >= 0.0:
        raise InputError(f"d: must be nonnegative, got {d}")
    bench = agent_benchmark(problem)
    if not bench.continuation:
        return BoundedJumpSolution(d, 0.0, PosteriorDistribution.point(problem.prior), None, "stop")
    q1, q2 = bench.boundaries
    if d == 0.0:
        return BoundedJumpSolution(d, bench.engagement, bench.posterior, (q1, q2), "benchmark")
    if d >= SIMPLEX_DIAMETER_2:
        sol = solve_principal(problem, bench)
        return BoundedJumpSolution(d, sol.engagement, sol.pi_star, (0.0, 1.0), "unrestricted", sol.residual)

    lo, hi = reachable_interval(q1, q2, d)
    rho = problem.rho
    # the widest two-point support is optimal whenever the agent accepts it
    t0 = float(problem.prior[1])
    w = (t0 - lo) / (hi - lo)
    wide = PosteriorDistribution([[1 - lo, lo], [1 - hi, hi]], [1 - w, w])
    g_wide = net_participation(problem, wide)
    if g_wide >= 0.0:
        return BoundedJumpSolution(d, rho * wide.information(problem), wide, (lo, hi), "extreme", g_wide)

    k = problem.cost_ratio
    a, b = BRACKET_EPS, k - BRACKET_EPS
    pi_b = _restricted(problem, b, lo, hi)
    g_b = net_participation(problem, pi_b)
    if g_b < 0.0:
        raise NumericalError("restricted problem has no participation-feasible point", residual=g_b)
    for _ in range(MAX_BISECTIONS):
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        pi_m = _restricted(problem, m, lo, hi)
        g_m = net_participation(problem, pi_m)
        if g_m > 0.0:
            b, pi_b, g_b = m, pi_m, g_m
        else:
            a = m
        if g_m == 0.0:
            break
    return BoundedJumpSolution(d, rho * pi_b.information(problem), pi_b, (lo, hi), "restricted", g_b)
