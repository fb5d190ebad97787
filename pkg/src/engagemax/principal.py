"""The principal's relaxed problem: maximize expected information subject to
the agent's participation constraint.

The Lagrangian reduces the problem to a static RI problem with effective cost
coefficient ``c' = kappa/chi - rho/lambda``.  The solver bisects on ``c'`` in
``(eps, kappa/chi)`` until the participation constraint binds and then
recovers the multiplier.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .beliefs import DecisionProblem, is_vertex, vertex
from .errors import CapabilityError, NumericalError, PropertyViolation
from .static_ri import (
    BenchmarkSolution,
    PosteriorDistribution,
    agent_benchmark,
    net_participation,
    static_ri,
)

log = logging.getLogger(__name__)

BRACKET_EPS = 1e-8
RESIDUAL_TOL = 1e-10
NONBINDING_TOL = 1e-8
MAX_BISECTIONS = 200
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class PrincipalSolution:
    pi_star: PosteriorDistribution
    lam: float
    cost_coeff: float
    alpha_star: float
    engagement: float
    agent_value: float
    degenerate: bool
    residual: float = 0.0
    binding: bool = True
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def information(self) -> float:
        """``E^pi*[H(q) - H(prior)]``."""
        return self.diagnostics.get("information", 0.0)

    @property
    def expected_tau(self) -> float:
        return 0.0 if self.degenerate else 1.0 / self.alpha_star


def check_assumption(problem: DecisionProblem) -> bool:
    """Full information is too costly at the benchmark cost.

    ``u_hat(prior) - k H(prior) > sum_x prior_x (u_hat(e_x) - k H(e_x))`` with
    ``k = kappa/chi``.
    """
    k = problem.cost_ratio
    q0 = problem.prior
    lhs = problem.payoff(q0) - k * problem.H(q0)
    n = problem.n_states
    rhs = sum(q0[x] * (problem.payoff(vertex(n, x)) - k * problem.H(vertex(n, x))) for x in range(n))
    return bool(lhs > rhs)


def _degenerate(problem: DecisionProblem, reason: str, **diag) -> PrincipalSolution:
    u0 = float(problem.payoff(problem.prior))
    diag = {"reason": reason, "information": 0.0, **diag}
    return PrincipalSolution(PosteriorDistribution.point(problem.prior), float("nan"), float("nan"),
                             float("inf"), 0.0, u0, True, diagnostics=diag)


def solve_principal(problem: DecisionProblem, benchmark: BenchmarkSolution | None = None) -> PrincipalSolution:
    """Engagement-maximizing stopping-belief distribution and its multiplier."""
    if is_vertex(problem.prior):
        return _degenerate(problem, "prior is a vertex")
    if not check_assumption(problem):
        raise CapabilityError("full information is not prohibitively costly at this prior "
                              "(the participation-constrained problem has no interior multiplier)")
    k = problem.cost_ratio
    bench = benchmark if benchmark is not None else agent_benchmark(problem)
    if not bench.continuation:
        return _degenerate(problem, "agent benchmark stops immediately")

    curve = []
    warm = None

    def g(c):
        nonlocal warm
        sol = static_ri(problem, c, warm=warm)
        if sol.action_probs is not None:
            warm = sol.action_probs
        val = net_participation(problem, sol.posterior)
        curve.append((c, val))
        return val, sol

    lo, hi = BRACKET_EPS, k - BRACKET_EPS
    g_lo, s_lo = g(lo)
    g_hi, s_hi = g(hi)
    if g_hi <= 0.0:
        return _degenerate(problem, "no improvement over the agent benchmark", curve=curve)
    if g_lo >= 0.0:
        raise NumericalError("participation slack has no sign change on the bracket",
                             residual=g_lo, diagnostics={"curve": curve})
    it = 0
    while it < MAX_BISECTIONS:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        g_mid, s_mid = g(mid)
        it += 1
        if g_mid < g_lo - MONOTONE_SLACK or g_mid > g_hi + MONOTONE_SLACK:
            raise NumericalError("participation slack is not monotone in the cost coefficient",
                                 residual=g_mid, diagnostics={"curve": sorted(curve)})
        if g_mid > 0.0:
            hi, g_hi, s_hi = mid, g_mid, s_mid
        else:
            lo, g_lo, s_lo = mid, g_mid, s_mid
        if g_mid == 0.0:
            break

    # the feasible side, unless the other is strictly closer to binding
    c, res, sol = hi, g_hi, s_hi
    if abs(g_lo) < abs(g_hi) and abs(g_lo) <= RESIDUAL_TOL:
        c, res, sol = lo, g_lo, s_lo
    binding = abs(res) <= NONBINDING_TOL
    if not binding:
        log.warning("participation constraint does not bind (residual %.3g)", res)
    pi = sol.posterior
    if pi.is_degenerate(problem.prior):
        return _degenerate(problem, "inner solution is degenerate", curve=curve)
    info = pi.information(problem)
    lam = problem.rho / (k - c)
    agent_value = pi.action_value(problem) - problem.kappa * info / problem.chi
    return PrincipalSolution(
        pi, lam, c, problem.chi / info, problem.rho * info, agent_value, False,
        residual=float(res), binding=binding, iterations=it,
        diagnostics={"information": info, "curve": curve, "richer_support": sol.richer_support},
    )


# ---------------------------------------------------------------------------
# Extreme beliefs
# ---------------------------------------------------------------------------

def hull_distance(points, q) -> float:
    """Euclidean distance from ``q`` to the convex hull of the rows of ``points``.

    Exact for small point sets: every face is tried through its affine hull.
    """
    P = np.array(points, dtype=float, ndmin=2)
    q = np.asarray(q, dtype=float)
    best = np.inf
    m = P.shape[0]
    for r in range(1, m + 1):
        for sub in itertools.combinations(range(m), r):
            S = P[list(sub)]
            if r == 1:
                w = np.ones(1)
            else:
                base = S[0]
                D = (S[1:] - base).T
                coef = np.linalg.lstsq(D, q - base, rcond=None)[0]
                w = np.concatenate([[1.0 - coef.sum()], coef])
            if np.any(w < -1e-13):
                continue
            best = min(best, float(np.linalg.norm(w @ S - q)))
    return best


@dataclass(frozen=True)
class ExtremeBeliefReport:
    passed: bool
    vacuous: bool
    margins: tuple[float, ...]
    principal_support: np.ndarray
    agent_support: np.ndarray

    def __bool__(self):
        return self.passed

    def raise_if_failed(self):
        if not self.passed:
            raise PropertyViolation(
                "principal stopping beliefs are not more extreme than the agent's "
                f"(margins {self.margins})", report=self)


def verify_extreme_beliefs(problem: DecisionProblem, solution: PrincipalSolution | None = None,
                           benchmark: BenchmarkSolution | None = None, margin: float = 1e-8) -> ExtremeBeliefReport:
    """Every principal atom lies outside the hull of the agent-optimal support."""
    bench = benchmark if benchmark is not None else agent_benchmark(problem)
    sol = solution if solution is not None else solve_principal(problem, bench)
    if sol.degenerate:
        return ExtremeBeliefReport(True, True, (), sol.pi_star.beliefs, bench.posterior.beliefs)
    agent = bench.posterior.beliefs
    margins = tuple(hull_distance(agent, b) for b in sol.pi_star.beliefs)
    return ExtremeBeliefReport(all(m > margin for m in margins), False, margins,
                               sol.pi_star.beliefs, agent)


# ---------------------------------------------------------------------------
# Prior sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    prior: float
    agent_lo: float
    agent_hi: float
    principal_lo: float
    principal_hi: float
    agent_engagement: float
    principal_engagement: float
    V_B: float
    J: float

    FIELDS = ("prior", "agent_lo", "agent_hi", "principal_lo", "principal_hi",
              "agent_engagement", "principal_engagement", "V_B", "J")

    def as_tuple(self):
        return tuple(getattr(self, f) for f in self.FIELDS)


def sweep_prior(problem: DecisionProblem, priors) -> list[SweepRow]:
    """Agent and principal solutions along a grid of binary priors.

    ``priors`` are probabilities of the second state.  Supports are reported
    as the smallest and largest second-state probability over the atoms.
    """
    if problem.n_states != 2:
        raise CapabilityError("prior sweeps are implemented for two states")
    rows = []
    for t in np.asarray(priors, dtype=float):
        P = problem.with_prior(float(t))
        bench = agent_benchmark(P)
        sol = solve_principal(P, bench)
        a_lo, a_hi = bench.posterior.binary_support()
        p_lo, p_hi = sol.pi_star.binary_support()
        rows.append(SweepRow(float(t), a_lo, a_hi, p_lo, p_hi, bench.engagement,
                             sol.engagement, bench.value, sol.engagement))
    return rows
