"""Built-in scenarios.

``binary_guess`` is the two-state guessing problem: states ``L, R``, actions
``l, r``, payoff +1 for a match and -1 otherwise, uniform prior, delay cost 2,
capacity 1 and unit revenue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .beliefs import DecisionProblem
from .static_ri import PosteriorDistribution, agent_benchmark


def binary_guess(prior: float = 0.5, kappa: float = 2.0, chi: float = 1.0, rho: float = 1.0) -> DecisionProblem:
    return DecisionProblem(utility=[[1.0, -1.0], [-1.0, 1.0]], prior=[1.0 - prior, prior], kappa=kappa,
                           chi=chi, rho=rho, states=("L", "R"), actions=("l", "r"))


def symmetric_posterior(p: float) -> PosteriorDistribution:
    """Equal-weight atoms at ``p`` and ``1 - p`` (probability of ``R``)."""
    return PosteriorDistribution([[p, 1.0 - p], [1.0 - p, p]], [0.5, 0.5])


def net_value(problem: DecisionProblem, pi: PosteriorDistribution) -> tuple[float, float]:
    """``(V, 1/alpha)`` of a dilution that binds capacity and stops on ``pi``.

    ``V`` is utility from actions minus the expected cost of delay, measured
    relative to acting at the prior.
    """
    wait = pi.information(problem) / problem.chi
    v = pi.action_value(problem) - problem.payoff(problem.prior) - problem.kappa * wait
    return float(v), float(wait)


@dataclass(frozen=True)
class ExampleNumbers:
    V_B: float
    V_B_alt: float
    inv_alpha: float
    inv_alpha_alt: float
    p: float
    p_alt: float
    V_B_solver: float

    def rows(self):
        return [("V_B", self.V_B), ("V_B_alt", self.V_B_alt), ("inv_alpha", self.inv_alpha),
                ("inv_alpha_alt", self.inv_alpha_alt), ("p", self.p), ("p_alt", self.p_alt),
                ("V_B_solver", self.V_B_solver)]


def example_1_1() -> ExampleNumbers:
    """Agent-optimal signal versus the more precise, rarer alternative."""
    P = binary_guess()
    e = math.e
    p, p_alt = e / (1 + e), 4 * e / (1 + 4 * e)
    v, w = net_value(P, symmetric_posterior(p))
    v_alt, w_alt = net_value(P, symmetric_posterior(p_alt))
    bench = agent_benchmark(P)
    return ExampleNumbers(v, v_alt, w, w_alt, p, p_alt, float(bench.value - P.payoff(P.prior)))


BUILTIN = {"binary-guess": binary_guess}


def builtin_problem(name: str) -> DecisionProblem:
    return BUILTIN[name]()

