"""Beliefs on the probability simplex, decision problems and entropy models.

Beliefs are plain 1-D float arrays whose entries are nonnegative and sum to
one.  Entropy is measured in nats and ``H(q) = sum_x q_x ln q_x`` is the
*negative* Shannon entropy, so it is convex; classical entropy ``H^S`` used in
the worked examples is ``-H``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import xlogy

from .errors import InputError

SUM_TOL = 1e-12
# gradients of H blow up at the boundary of the simplex
GRADIENT_FLOOR = 1e-12


def as_belief(q, n: int | None = None, name: str = "belief") -> np.ndarray:
    """Validate ``q`` and return it as a read-only float array."""
    arr = np.array(q, dtype=float).reshape(-1)
    if n is not None and arr.size != n:
        raise InputError(f"{name}: expected {n} entries, got {arr.size}")
    if arr.size < 2:
        raise InputError(f"{name}: a belief needs at least two states")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: entries must be finite")
    if np.any(arr < 0.0):
        raise InputError(f"{name}: entries must be nonnegative, got {arr.tolist()}")
    total = float(arr.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise InputError(f"{name}: entries must sum to 1 (got {total:.12g})")
    arr.setflags(write=False)
    return arr


def binary_belief(p: float) -> np.ndarray:
    """Belief ``(1 - p, p)`` on a two-state problem; ``p`` is P(second state)."""
    return as_belief([1.0 - p, p])


def vertex(n: int, x: int) -> np.ndarray:
    e = np.zeros(n)
    e[x] = 1.0
    e.setflags(write=False)
    return e


def is_vertex(q, tol: float = 1e-12) -> bool:
    return bool(np.max(q) >= 1.0 - tol)


def require_interior(q, name: str = "belief") -> None:
    if np.min(q) < GRADIENT_FLOOR:
        raise InputError(f"{name}: gradient undefined on the simplex boundary (min entry {np.min(q):.3g})")


def shannon_negentropy(q) -> float | np.ndarray:
    """``sum q ln q`` along the last axis, with ``0 ln 0 = 0``."""
    q = np.asarray(q, dtype=float)
    return np.sum(xlogy(q, q), axis=-1)


def shannon_negentropy_gradient(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    require_interior(q)
    return 1.0 + np.log(q)


@dataclass(frozen=True)
class EntropyModel:
    """A strictly convex generalized entropy with its gradient.

    ``value`` and ``gradient`` must accept a single belief.  Shannon's model
    is also vectorized over a leading batch axis.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"

    @classmethod
    def shannon(cls) -> "EntropyModel":
        return SHANNON

    @property
    def is_shannon(self) -> bool:
        return self.kind == "shannon-negentropy"

    def __call__(self, q) -> float:
        return float(self.value(np.asarray(q, dtype=float)))

    def batch(self, beliefs) -> np.ndarray:
        """Evaluate H on every row of a 2-D array of beliefs."""
        beliefs = np.atleast_2d(np.asarray(beliefs, dtype=float))
        if self.is_shannon:
            return shannon_negentropy(beliefs)
        return np.array([float(self.value(row)) for row in beliefs])

    def grad(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return np.asarray(self.gradient(q), dtype=float)


SHANNON = EntropyModel(shannon_negentropy, shannon_negentropy_gradient, "shannon-negentropy")


def quadratic_entropy() -> EntropyModel:
    """``H(q) = sum q^2``: strongly convex, finite gradient on the boundary."""
    return EntropyModel(lambda q: float(np.dot(q, q)), lambda q: 2.0 * np.asarray(q), "quadratic")


def entropy_gap(model: EntropyModel, q, q0) -> float:
    """``H(q) - H(q0)`` in nats. Negative when ``q`` is more uniform than ``q0``."""
    q = as_belief(q, name="q")
    q0 = as_belief(q0, n=q.size, name="q0")
    return model(q) - model(q0)


@dataclass(frozen=True)
class DecisionProblem:
    """The agent's decision problem and the environment parameters.

    ``utility[a, x]`` is the payoff of action ``a`` in state ``x``.  ``kappa``
    is the flow cost of delay, ``chi`` the processing capacity and ``rho`` the
    principal's revenue per nat of attention.
    """

    utility: np.ndarray
    prior: np.ndarray
    kappa: float = 2.0
    chi: float = 1.0
    rho: float = 1.0
    states: tuple = ()
    actions: tuple = ()
    entropy: EntropyModel = field(default=SHANNON)

    def __post_init__(self):
        u = np.array(self.utility, dtype=float)
        if u.ndim != 2:
            raise InputError("utility: expected a matrix u[action][state]")
        n_actions, n_states = u.shape
        if n_states < 2 or n_actions < 2:
            raise InputError("utility: need at least two states and two actions")
        if not np.all(np.isfinite(u)):
            raise InputError("utility: entries must be finite")
        u.setflags(write=False)
        object.__setattr__(self, "utility", u)
        object.__setattr__(self, "prior", as_belief(self.prior, n=n_states, name="prior"))
        for name in ("kappa", "chi", "rho"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0.0:
                raise InputError(f"{name}: must be a positive finite number, got {v}")
            object.__setattr__(self, name, v)
        states = tuple(self.states) or tuple(f"x{i}" for i in range(n_states))
        actions = tuple(self.actions) or tuple(f"a{i}" for i in range(n_actions))
        if len(states) != n_states:
            raise InputError(f"states: expected {n_states} labels, got {len(states)}")
        if len(actions) != n_actions:
            raise InputError(f"actions: expected {n_actions} labels, got {len(actions)}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)

    @property
    def n_states(self) -> int:
        return self.utility.shape[1]

    @property
    def n_actions(self) -> int:
        return self.utility.shape[0]

    @property
    def cost_ratio(self) -> float:
        """``kappa / chi``: the agent's shadow cost of one nat of information."""
        return self.kappa / self.chi

    def payoff(self, beliefs) -> float | np.ndarray:
        """Vectorized ``u_hat``: best expected action payoff at each belief."""
        beliefs = np.asarray(beliefs, dtype=float)
        if beliefs.shape[-1] != self.n_states:
            raise InputError(f"belief has {beliefs.shape[-1]} entries, problem has {self.n_states} states")
        vals = np.max(beliefs @ self.utility.T, axis=-1)
        return float(vals) if vals.ndim == 0 else vals

    def H(self, q) -> float:
        return self.entropy(q)

    def replace(self, **changes) -> "DecisionProblem":
        kw = dict(
            utility=self.utility, prior=self.prior, kappa=self.kappa, chi=self.chi, rho=self.rho,
            states=self.states, actions=self.actions, entropy=self.entropy,
        )
        kw.update(changes)
        return DecisionProblem(**kw)

    def with_prior(self, prior) -> "DecisionProblem":
        if np.ndim(prior) == 0 and self.n_states == 2:
            prior = [1.0 - float(prior), float(prior)]
        return self.replace(prior=prior)


def u_hat(problem: DecisionProblem, q) -> tuple[float, tuple[int, ...]]:
    """Value of acting now at belief ``q`` and the set of optimal actions.

    The first entry of the action tuple is the lowest-index maximizer.
    """
    q = as_belief(q, n=problem.n_states, name="q")
    vals = problem.utility @ q
    best = float(vals.max())
    tol = 1e-12 * max(1.0, abs(best))
    return best, tuple(int(a) for a in np.flatnonzero(vals >= best - tol))


@dataclass(frozen=True)
class Rotation:
    """A stochastic, full-rank matrix with ``R^order = I``."""

    matrix: np.ndarray
    order: int

    def __post_init__(self):
        R = np.array(self.matrix, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise InputError("rotation: matrix must be square")
        if np.any(R < -1e-15) or np.any(np.abs(R.sum(axis=0) - 1.0) > 1e-12):
            raise InputError("rotation: columns must be probability vectors")
        if np.linalg.matrix_rank(R) < R.shape[0]:
            raise InputError("rotation: matrix must be full rank")
        order = int(self.order)
        if order < 1:
            raise InputError("rotation: order must be a positive integer")
        if np.max(np.abs(np.linalg.matrix_power(R, order) - np.eye(R.shape[0]))) > 1e-10:
            raise InputError(f"rotation: R^{order} is not the identity")
        R.setflags(write=False)
        object.__setattr__(self, "matrix", R)
        object.__setattr__(self, "order", order)

    @classmethod
    def from_permutation(cls, perm: Sequence[int]) -> "Rotation":
        """Rotation sending state ``x`` to state ``perm[x]``."""
        n = len(perm)
        R = np.zeros((n, n))
        R[list(perm), range(n)] = 1.0
        order, P = 1, R.copy()
        while not np.array_equal(P, np.eye(n)):
            P = R @ P
            order += 1
        return cls(R, order)

    def apply(self, q) -> np.ndarray:
        return self.matrix @ np.asarray(q, dtype=float)


@dataclass(frozen=True)
class SymmetryReport:
    symmetric: bool
    max_entropy_deviation: float
    max_payoff_deviation: float
    samples: int

    def __bool__(self):
        return self.symmetric


def check_rotational_symmetry(
    model: EntropyModel, problem: DecisionProblem, rotation: Rotation, samples: int = 256, seed: int = 0
) -> SymmetryReport:
    """Check ``H(Rq) = H(q)`` and ``u_hat(Rq) = u_hat(q)`` at random beliefs."""
    if not isinstance(rotation, Rotation):
        rotation = Rotation(*rotation)
    if rotation.matrix.shape[0] != problem.n_states:
        raise InputError("rotation: dimension does not match the number of states")
    rng = np.random.default_rng(seed)
    Q = rng.dirichlet(np.ones(problem.n_states), size=samples)
    RQ = Q @ rotation.matrix.T
    dH = np.abs(model.batch(Q) - model.batch(RQ))
    du = np.abs(problem.payoff(Q) - problem.payoff(RQ))
    ok = bool(dH.max() < 1e-9 and du.max() < 1e-9)
    return SymmetryReport(ok, float(dH.max()), float(du.max()), samples)
