"""Teacher and student on a four-state problem.

States are ``(t1, t2)`` with ``t1 in {L, R}`` relevant to a single test
question and ``t2 in {0, 1}`` irrelevant to it; the order is
``L0, R0, L1, R1``.  The student answers ``l`` or ``r`` for a payoff of +1 or
-1 and pays Shannon mutual information about the full state.

Engagement maximization: averaging the conditional choice rule over ``t2``
never hurts, so the problem collapses to the two-state problem.

Knowledge maximization: the teacher values ``2|q_t2 - 1/2|``.  With the
student's multiplier ``lambda`` the teacher solves a static RI problem with
four actions (guess ``t1`` and ``t2``), payoff ``+-1`` for ``t2`` plus
``+-lambda`` for ``t1`` and cost ``2 lambda``, whose solution is logit:
``P(a | t) = exp(u(a, t) / (2 lambda)) / Z`` with a uniform default rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from ..beliefs import DecisionProblem
from ..errors import NumericalError
from ..principal import PrincipalSolution, solve_principal
from ..static_ri import _choice_kernel, agent_benchmark, static_ri

STATES = ("L0", "R0", "L1", "R1")
T1 = np.array([0, 1, 0, 1])  # 0 = L, 1 = R
T2 = np.array([0, 0, 1, 1])
KAPPA, CHI, RHO = 2.0, 1.0, 1.0


def binary_problem(kappa=KAPPA, chi=CHI, rho=RHO) -> DecisionProblem:
    return DecisionProblem(utility=[[1.0, -1.0], [-1.0, 1.0]], prior=[0.5, 0.5], kappa=kappa, chi=chi,
                           rho=rho, states=("L", "R"), actions=("l", "r"))


def four_state_problem(kappa=KAPPA, chi=CHI, rho=RHO) -> DecisionProblem:
    u = np.where(T1[None, :] == np.array([[0], [1]]), 1.0, -1.0)
    return DecisionProblem(utility=u, prior=np.full(4, 0.25), kappa=kappa, chi=chi, rho=rho,
                           states=STATES, actions=("l", "r"))


def _mutual_information(P, prior):
    """``I(a; t)`` for a conditional rule ``P[a, t]``."""
    joint = P * prior[None, :]
    pa = joint.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * np.log(P / pa[:, None]), 0.0)
    return float(terms.sum())


def rule_objective(P, utility, prior, C) -> float:
    """``E[u] - C I(a; t)`` for a conditional choice rule ``P[a, t]``."""
    return float(np.sum(prior[None, :] * utility * P)) - C * _mutual_information(P, prior)


def average_over_t2(P) -> np.ndarray:
    """Replace ``P(a | t1, t2)`` by its average over ``t2``."""
    out = np.empty_like(P)
    for t1 in (0, 1):
        cols = T1 == t1
        out[:, cols] = P[:, cols].mean(axis=1, keepdims=True)
    return out


@dataclass(frozen=True)
class EngagementReport:
    four_state: PrincipalSolution
    binary: PrincipalSolution
    engagement_gap: float
    t2_marginal_error: float
    reduced_table_error: float
    compression_worst: float
    compression_trials: int

    @property
    def pi_star(self):
        return self.four_state.pi_star


def teacher_engagement_max(costs=(0.5, 1.0, 2.0), trials: int = 200, seed: int = 0) -> EngagementReport:
    """Check the collapse of the four-state engagement problem to two states.

    ``costs`` are the free cost coefficients at which t2-averaging is applied
    to random rules; ``compression_worst`` is the largest objective loss seen
    (nonpositive when averaging always helps).
    """
    rng = np.random.default_rng(seed)
    P4 = four_state_problem()
    worst = -np.inf
    for C in costs:
        for _ in range(trials):
            P = rng.dirichlet(np.ones(2), size=4).T
            gain = rule_objective(average_over_t2(P), P4.utility, P4.prior, C) - \
                rule_objective(P, P4.utility, P4.prior, C)
            worst = max(worst, -gain)

    sol4 = solve_principal(P4)
    sol2 = solve_principal(binary_problem())
    B = sol4.pi_star.beliefs
    t2_err = float(np.max(np.abs(B[:, T2 == 1].sum(axis=1) - 0.5)))
    # reduced posteriors: project onto t1
    red = np.column_stack([B[:, T1 == 0].sum(axis=1), B[:, T1 == 1].sum(axis=1)])
    ref = sol2.pi_star.beliefs
    table_err = max(float(np.min(np.max(np.abs(ref - r), axis=1))) for r in red)
    return EngagementReport(sol4, sol2, abs(sol4.engagement - sol2.engagement), t2_err, table_err,
                            float(worst), len(costs) * trials)


# ---------------------------------------------------------------------------
# Knowledge maximization
# ---------------------------------------------------------------------------

KNOWLEDGE_ACTIONS = ("a1", "a2", "a3", "a4")
# guesses (t1, t2) behind each action
_GUESS = np.array([[0, 0], [1, 0], [0, 1], [1, 1]])


def auxiliary_utility(lam: float) -> np.ndarray:
    """``u[a, t]``: +-1 for the t2 guess plus +-lambda for the t1 guess."""
    g1 = np.where(_GUESS[:, [0]] == T1[None, :], 1.0, -1.0)
    g2 = np.where(_GUESS[:, [1]] == T2[None, :], 1.0, -1.0)
    return g2 + lam * g1


def logit_table(lam: float) -> np.ndarray:
    """Closed-form logit rule ``P[a, t]`` at cost ``2 lambda`` and uniform default."""
    z = auxiliary_utility(lam) / (2.0 * lam)
    z -= z.max(axis=0, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=0, keepdims=True)


def _binary_delta_h(p: float) -> float:
    """``H(p) - H(1/2)`` for the binary belief ``(p, 1 - p)``."""
    return float(xlogy(p, p) + xlogy(1.0 - p, 1.0 - p)) + math.log(2.0)


def knowledge_ic(lam: float, benchmark_value: float | None = None) -> float:
    """Student's net participation value at multiplier ``lambda``.

    The rule is a product of a t1 guess with precision ``e/(1+e)`` and a t2
    guess with precision ``sigmoid(1/lambda)``; the t2 information carries
    cost but no payoff.
    """
    if benchmark_value is None:
        P2 = binary_problem()
        benchmark_value = agent_benchmark(P2).value - P2.payoff(P2.prior)
    p2 = 1.0 / (1.0 + math.exp(-1.0 / lam))
    return benchmark_value - (KAPPA / CHI) * _binary_delta_h(p2)


@dataclass(frozen=True)
class KnowledgeReport:
    lam: float
    table: np.ndarray
    marginal: np.ndarray
    student_table: np.ndarray
    default_rule: np.ndarray
    ic_residual: float
    marginal_error: float
    solver_table_error: float

    def rows(self):
        for a, name in enumerate(KNOWLEDGE_ACTIONS):
            yield (name, *self.table[a])


def _student_table() -> np.ndarray:
    P2 = binary_problem()
    c = P2.cost_ratio
    sol = static_ri(P2, c)
    E = _choice_kernel(P2, c, P2.prior > 0)
    p = sol.action_probs
    cond = E * p[None, :] / (E @ p)[:, None]
    return cond.T  # [a, x]


def teacher_knowledge_max(tol: float = 1e-14) -> KnowledgeReport:
    """Solve for ``lambda`` from the student's binding participation constraint."""
    P2 = binary_problem()
    vb = agent_benchmark(P2).value - P2.payoff(P2.prior)
    f = lambda log_lam: knowledge_ic(math.exp(log_lam), vb)
    lo, hi = math.log(1e-2), math.log(1e3)
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0.0 < f_hi):
        raise NumericalError("student's participation constraint has no binding root",
                             diagnostics={"f_lo": f_lo, "f_hi": f_hi})
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or hi - lo < tol:
            break
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    lam = math.exp(hi)
    table = logit_table(lam)

    # cross-check against the generic solver on the auxiliary four-action problem
    aux = DecisionProblem(utility=auxiliary_utility(lam), prior=np.full(4, 0.25), kappa=KAPPA, chi=CHI,
                          rho=RHO, states=STATES, actions=KNOWLEDGE_ACTIONS)
    sol = static_ri(aux, 2.0 * lam)
    E = _choice_kernel(aux, 2.0 * lam, aux.prior > 0)
    p = sol.action_probs
    solver_table = (E * p[None, :] / (E @ p)[:, None]).T

    marg = np.empty((2, 2))  # [t1 guess, t1]
    for g in (0, 1):
        rows = _GUESS[:, 0] == g
        for t1 in (0, 1):
            marg[g, t1] = table[rows][:, T1 == t1].sum(axis=0).mean()
    student = _student_table()
    return KnowledgeReport(
        lam=lam, table=table, marginal=marg, student_table=student, default_rule=p,
        ic_residual=abs(knowledge_ic(lam, vb)),
        marginal_error=float(np.max(np.abs(marg - student))),
        solver_table_error=float(np.max(np.abs(solver_table - table))),
    )
