"""Static rational-inattention problems with a scaled posterior-separable cost.

The generic problem is

    max_pi  E^pi[u_hat(q) - c (H(q) - H(prior))]   s.t.  E^pi[q] = prior.

With Shannon entropy it is solved through the logit characterization: a
Blahut-Arimoto fixed point on the unconditional action probabilities,
polished by Newton's method on the active set and checked against the
first-order conditions of the inactive actions.  Two-state problems with a
general entropy are solved by concavifying ``u_hat - c H`` on a grid and
refining each bitangent to full precision.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .beliefs import GRADIENT_FLOOR, DecisionProblem, as_belief
from .errors import CapabilityError, InfeasibleError, InputError, NumericalError
from .simplex import solve_lp

log = logging.getLogger(__name__)

BA_TOL = 1e-12
BA_MAXITER = 100_000
PRUNE_TOL = 1e-10
DEGENERATE_TOL = 1e-7
MERGE_TOL = 1e-9
GRID_STEP = 1e-4


@dataclass(frozen=True)
class PosteriorDistribution:
    """Finite-support distribution over beliefs: ``beliefs[j]`` has mass ``weights[j]``."""

    beliefs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        B = np.array(self.beliefs, dtype=float, ndmin=2)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if B.shape[0] != w.size:
            raise InputError("posterior: one weight per atom required")
        if np.any(w <= 0.0):
            raise InputError("posterior: weights must be positive")
        if abs(w.sum() - 1.0) > 1e-10:
            raise InputError(f"posterior: weights must sum to 1 (got {w.sum():.12g})")
        if np.any(B < 0.0) or np.max(np.abs(B.sum(axis=1) - 1.0)) > 1e-12:
            raise InputError("posterior: every atom must be a valid belief")
        B.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "beliefs", B)
        object.__setattr__(self, "weights", w)

    @classmethod
    def point(cls, q) -> "PosteriorDistribution":
        return cls(np.asarray(q, dtype=float)[None, :], np.ones(1))

    @classmethod
    def from_atoms(cls, atoms) -> "PosteriorDistribution":
        beliefs, weights = zip(*atoms)
        return cls(np.array(beliefs, dtype=float), np.array(weights, dtype=float))

    @property
    def atoms(self) -> list[tuple[np.ndarray, float]]:
        return [(b, float(w)) for b, w in zip(self.beliefs, self.weights)]

    @property
    def size(self) -> int:
        return self.weights.size

    def __len__(self):
        return self.size

    def mean(self) -> np.ndarray:
        return self.weights @ self.beliefs

    def expect(self, values) -> float:
        return float(self.weights @ np.asarray(values, dtype=float))

    def barycenter_error(self, prior) -> float:
        return float(np.max(np.abs(self.mean() - np.asarray(prior, dtype=float))))

    def is_degenerate(self, prior, tol: float = DEGENERATE_TOL) -> bool:
        return bool(np.max(np.abs(self.beliefs - np.asarray(prior, dtype=float))) <= tol)

    def contains(self, q, tol: float = 1e-8) -> bool:
        return bool(np.any(np.max(np.abs(self.beliefs - np.asarray(q, dtype=float)), axis=1) <= tol))

    def sorted_binary(self) -> "PosteriorDistribution":
        """Atoms ordered by the probability of the second state."""
        order = np.argsort(self.beliefs[:, 1], kind="stable")
        return PosteriorDistribution(self.beliefs[order], self.weights[order])

    def binary_support(self) -> tuple[float, float]:
        """``(min, max)`` probability of the second state over the atoms."""
        t = self.beliefs[:, 1]
        return float(t.min()), float(t.max())

    def information(self, problem: DecisionProblem) -> float:
        """``E^pi[H(q)] - H(prior)``: expected entropy reduction in nats."""
        return self.expect(problem.entropy.batch(self.beliefs)) - problem.H(problem.prior)

    def action_value(self, problem: DecisionProblem) -> float:
        """``E^pi[u_hat(q)]``."""
        return self.expect(problem.payoff(self.beliefs))


@dataclass(frozen=True)
class RISolution:
    """Output of :func:`static_ri` with solver diagnostics."""

    posterior: PosteriorDistribution
    value: float
    cost: float
    method: str
    action_probs: np.ndarray | None = None
    iterations: int = 0
    kkt_residual: float = 0.0
    richer_support: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.posterior.size == 1


def ri_objective(problem: DecisionProblem, pi: PosteriorDistribution, c: float) -> float:
    """``E^pi[u_hat(q) - c (H(q) - H(prior))]``."""
    return pi.action_value(problem) - c * pi.information(problem)


def net_participation(problem: DecisionProblem, pi: PosteriorDistribution) -> float:
    """The relaxed participation slack ``E[u_hat - u_hat(prior)] - (kappa/chi) E[H - H(prior)]``."""
    return pi.action_value(problem) - problem.payoff(problem.prior) - problem.cost_ratio * pi.information(problem)


# ---------------------------------------------------------------------------
# Shannon: logit fixed point
# ---------------------------------------------------------------------------

def _choice_kernel(problem: DecisionProblem, c: float, support: np.ndarray):
    """``E[x, a] = exp((u[a, x] - max_a u[a, x]) / c)`` on states with positive prior."""
    L = problem.utility.T[support] / c
    L = L - L.max(axis=1, keepdims=True)
    return np.exp(L)


def _gradient(E, q0, p):
    D = np.maximum(E @ p, 1e-300)
    return (q0 / D) @ E


def _newton_polish(E, q0, p, active, tol=1e-15, maxiter=100):
    """Newton's method for ``max sum_x q0_x ln (E p)_x`` over the active face."""
    p = p.copy()
    p[~active] = 0.0
    p /= p.sum()
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        D = np.maximum(E @ p, 1e-300)
        G = (q0 / D) @ E
        if np.max(np.abs(G[idx] - 1.0)) < tol:
            break
        W = E[:, idx] * (np.sqrt(q0) / D)[:, None]
        Hs = -(W.T @ W)
        k = idx.size
        K = np.zeros((k + 1, k + 1))
        K[:k, :k] = Hs
        K[:k, k] = 1.0
        K[k, :k] = 1.0
        rhs = np.concatenate([-(G[idx] - 1.0), [0.0]])
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        dp = sol[:k]
        step = 1.0
        neg = dp < 0
        if np.any(neg):
            step = min(1.0, float(np.min(-p[idx][neg] / dp[neg])))
        p_new = p.copy()
        p_new[idx] = p[idx] + step * dp
        if step < 1.0:
            # an action hit zero: leave the face
            hit = idx[np.argmin(np.where(neg, p_new[idx], np.inf))]
            p_new[hit] = 0.0
            active = active.copy()
            active[hit] = False
        p_new = np.maximum(p_new, 0.0)
        p = p_new / p_new.sum()
    return p, active


def _shannon_ri(problem: DecisionProblem, c: float, warm=None) -> RISolution:
    q0 = problem.prior
    support = q0 > 0.0
    E = _choice_kernel(problem, c, support)
    qs = q0[support]
    n_actions = problem.n_actions
    p = np.full(n_actions, 1.0 / n_actions)
    if warm is not None and np.size(warm) == n_actions:
        p = 0.999 * np.asarray(warm, float) + 0.001 * p
    p, iterations, delta = kernels.blahut_arimoto(E, qs, p, BA_TOL, BA_MAXITER)

    active = p > PRUNE_TOL
    richer = False
    for _ in range(n_actions + 1):
        p, active = _newton_polish(E, qs, p, active)
        G = _gradient(E, qs, p)
        viol = np.where(~active, G - 1.0, -np.inf)
        b = int(np.argmax(viol))
        if viol[b] <= 1e-10:
            break
        # a pruned action violates its first-order condition: reactivate it
        richer = True
        active[b] = True
        p = 0.99 * p
        p[b] = 0.01
    G = _gradient(E, qs, p)
    kkt = float(max(np.max(np.abs(G[active] - 1.0)), np.max(G[~active] - 1.0, initial=0.0)))
    if kkt > 1e-8:
        raise NumericalError(f"logit fixed point did not converge (KKT residual {kkt:.3g})", residual=kkt)
    if iterations >= BA_MAXITER and delta >= BA_TOL:
        log.debug("Blahut-Arimoto hit the iteration cap (delta %.3g); Newton polish took over", delta)

    D = E @ p
    cond = E * p[None, :] / D[:, None]  # P(a | x) on the prior's support
    cond = cond[:, active]
    joint = qs[:, None] * cond
    weights = joint.sum(axis=0)
    posts = np.zeros((weights.size, problem.n_states))
    posts[:, support] = (joint / weights[None, :]).T
    posts /= posts.sum(axis=1, keepdims=True)
    pi = _merge_atoms(posts, weights)
    if pi.is_degenerate(q0):
        pi = PosteriorDistribution.point(q0)
    value = ri_objective(problem, pi, c)
    return RISolution(pi, value, c, "logit", action_probs=p, iterations=int(iterations),
                      kkt_residual=kkt, richer_support=richer)


def _merge_atoms(beliefs, weights, tol=MERGE_TOL) -> PosteriorDistribution:
    B, w = [], []
    for b, wt in zip(beliefs, weights):
        if wt <= 0.0:
            continue
        for j, bj in enumerate(B):
            if np.max(np.abs(bj - b)) <= tol:
                tot = w[j] + wt
                B[j] = (w[j] * bj + wt * b) / tot
                w[j] = tot
                break
        else:
            B.append(np.array(b, dtype=float))
            w.append(float(wt))
    w = np.array(w)
    return PosteriorDistribution(np.array(B), w / w.sum())


# ---------------------------------------------------------------------------
# Two states, general entropy: concavification
# ---------------------------------------------------------------------------

def payoff_pieces(problem: DecisionProblem) -> list[tuple[float, float, int]]:
    """Linear pieces ``(t_start, t_end, action)`` of ``u_hat`` on a two-state problem.

    ``t`` is the probability of the second state.
    """
    if problem.n_states != 2:
        raise CapabilityError("payoff pieces are only defined for two states")
    icpt = problem.utility[:, 0]
    slope = problem.utility[:, 1] - problem.utility[:, 0]
    t = 0.0
    vals = icpt
    a = int(np.lexsort((-slope, -vals))[0])  # best at 0, steepest among ties
    pieces = []
    while True:
        cand = slope > slope[a] + 1e-15
        if not np.any(cand):
            pieces.append((t, 1.0, a))
            return pieces
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = (icpt[a] - icpt) / (slope - slope[a])
        cross = np.where(cand & (cross > t + 1e-15), cross, np.inf)
        t_next = float(cross.min())
        if t_next >= 1.0:
            pieces.append((t, 1.0, a))
            return pieces
        ties = np.flatnonzero(np.abs(cross - t_next) <= 1e-15)
        b = int(ties[np.argmax(slope[ties])])
        pieces.append((t, t_next, a))
        t, a = t_next, b


@dataclass(frozen=True)
class Bitangent:
    """A linear piece of the concave envelope bridging ``[left, right]``."""

    left: float
    right: float
    slope: float

    def contains(self, t: float) -> bool:
        return self.left < t < self.right


class BinaryConcavifier:
    """Concave envelope of ``u_hat(q) - c H(q)`` on a two-state problem.

    ``domain`` restricts the beliefs (probability of the second state) to an
    interval, which the bounded-jump extension uses.
    """

    def __init__(self, problem: DecisionProblem, c: float, domain=(0.0, 1.0), grid_step: float = GRID_STEP):
        if problem.n_states != 2:
            raise CapabilityError("concavification is implemented for two states only")
        self.problem = problem
        self.c = float(c)
        lo, hi = float(domain[0]), float(domain[1])
        if not 0.0 <= lo < hi <= 1.0:
            raise InputError(f"domain: invalid interval ({lo}, {hi})")
        self.domain = (lo, hi)
        self.pieces = payoff_pieces(problem)
        n = max(2, int(np.ceil((hi - lo) / grid_step)) + 1)
        grid = np.linspace(lo, hi, n)
        self.grid = grid
        vals = self.U(grid)
        hull = kernels.upper_hull(grid, vals)
        self.bitangents = [self._refine(grid[i], grid[j]) for i, j in zip(hull[:-1], hull[1:]) if j - i > 1]

    # U and its derivative along t
    def U(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        Q = np.column_stack([1.0 - t, t])
        out = self.problem.payoff(Q) - self.c * self.problem.entropy.batch(Q)
        return out if out.size > 1 else out.reshape(-1)

    def _piece_at(self, t):
        for p in self.pieces:
            if p[0] <= t <= p[1]:
                return p
        return self.pieces[-1]

    def dU(self, t, action):
        t = min(max(t, GRADIENT_FLOOR), 1.0 - GRADIENT_FLOOR)
        u = self.problem.utility[action]
        g = self.problem.entropy.grad(np.array([1.0 - t, t]))
        return (u[1] - u[0]) - self.c * (g[1] - g[0])

    def _argmax(self, s, lo, hi, action):
        """Maximizer of ``U(t) - s t`` on ``[lo, hi]`` where U is concave."""
        if self.dU(lo, action) <= s:
            return lo
        if self.dU(hi, action) >= s:
            return hi
        a, b = lo, hi
        for _ in range(200):
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            if self.dU(m, action) > s:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    def _window(self, t0):
        h = 3.0 * (self.grid[1] - self.grid[0])
        p0, p1, a = self._piece_at(t0)
        lo = max(self.domain[0], p0, t0 - h)
        hi = min(self.domain[1], p1, t0 + h)
        return lo, hi, a

    def _refine(self, t_left, t_right) -> Bitangent:
        Lw = self._window(t_left)
        Rw = self._window(t_right)

        def f(s):
            a = self._argmax(s, *Lw)
            b = self._argmax(s, *Rw)
            return float(self.U(a)[0] - s * a - (self.U(b)[0] - s * b)), a, b

        s0 = float((self.U(t_right)[0] - self.U(t_left)[0]) / (t_right - t_left))
        width = 1e-3 * max(1.0, abs(s0))
        lo, hi = s0 - width, s0 + width
        for _ in range(60):
            if f(lo)[0] < 0.0 < f(hi)[0]:
                break
            width *= 2.0
            lo, hi = s0 - width, s0 + width
        val, a, b = f(0.5 * (lo + hi))
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            val, a, b = f(mid)
            if val == 0.0:
                break
            if val > 0.0:
                hi = mid
            else:
                lo = mid
        s = 0.5 * (lo + hi)
        _, a, b = f(s)
        return Bitangent(float(a), float(b), float(s))

    def segment_at(self, t) -> Bitangent | None:
        for seg in self.bitangents:
            if seg.contains(t):
                return seg
        return None

    def envelope(self, t) -> float:
        seg = self.segment_at(t)
        if seg is None:
            return float(self.U(t)[0])
        ua, ub = self.U([seg.left, seg.right])
        return float(ua + (ub - ua) * (t - seg.left) / (seg.right - seg.left))

    def posterior(self, t0) -> PosteriorDistribution:
        seg = self.segment_at(t0)
        if seg is None:
            return PosteriorDistribution.point([1.0 - t0, t0])
        w_right = (t0 - seg.left) / (seg.right - seg.left)
        return PosteriorDistribution(
            np.array([[1.0 - seg.left, seg.left], [1.0 - seg.right, seg.right]]),
            np.array([1.0 - w_right, w_right]),
        )


def _binary_ri(problem: DecisionProblem, c: float, domain=(0.0, 1.0)) -> RISolution:
    cv = BinaryConcavifier(problem, c, domain=domain)
    t0 = float(problem.prior[1])
    pi = cv.posterior(t0)
    if pi.is_degenerate(problem.prior):
        pi = PosteriorDistribution.point(problem.prior)
    return RISolution(pi, ri_objective(problem, pi, c), c, "concavification",
                      extra={"bitangents": cv.bitangents})


def static_ri(problem: DecisionProblem, c: float, warm=None, method: str | None = None) -> RISolution:
    """Solve the scaled-cost static RI problem; see :func:`solve_static_ri`."""
    c = float(c)
    if not np.isfinite(c) or c <= 0.0:
        raise InputError(f"cost_scale: must be positive, got {c}")
    if method is None:
        method = "logit" if problem.entropy.is_shannon else "concavification"
    if method == "logit":
        if not problem.entropy.is_shannon:
            raise CapabilityError("the logit solver requires Shannon entropy")
        return _shannon_ri(problem, c, warm)
    if method == "concavification":
        if problem.n_states != 2:
            raise CapabilityError("non-Shannon entropy is supported for two states only")
        return _binary_ri(problem, c)
    raise InputError(f"unknown static RI method {method!r}")


def solve_static_ri(problem: DecisionProblem, cost_scale: float) -> PosteriorDistribution:
    """Optimal posterior distribution for ``max E[u_hat - c (H - H(prior))]``.

    A single atom at the prior is returned when acquiring no information is
    optimal.
    """
    return static_ri(problem, cost_scale).posterior


# ---------------------------------------------------------------------------
# Agent-optimal benchmark
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkSolution:
    value: float
    posterior: PosteriorDistribution
    continuation: bool
    boundaries: tuple[float, float] | None
    information: float
    chi: float
    rho: float

    @property
    def engagement(self) -> float:
        """``rho * E[H - H(prior)]``: attention paid under the agent's own policy."""
        return self.rho * self.information

    @property
    def expected_tau(self) -> float:
        return self.information / self.chi

    @property
    def alpha(self) -> float:
        return self.chi / self.information if self.information > 0 else float("inf")


def continuation_region(problem: DecisionProblem) -> list[Bitangent]:
    """Open intervals of the benchmark continuation region (two states).

    These are the bridging pieces of the concave envelope of
    ``u_hat - (kappa/chi) H``; their endpoints are the tangent points.
    """
    return BinaryConcavifier(problem, problem.cost_ratio).bitangents


def agent_benchmark(problem: DecisionProblem) -> BenchmarkSolution:
    """Agent-optimal policy: the static RI problem at cost ``kappa / chi``."""
    sol = static_ri(problem, problem.cost_ratio)
    pi = sol.posterior
    u0 = problem.payoff(problem.prior)
    cont = bool(sol.value > u0 + 1e-10)
    if not cont:
        pi = PosteriorDistribution.point(problem.prior)
    bounds = None
    if problem.n_states == 2:
        t0 = float(problem.prior[1])
        region = continuation_region(problem)
        seg = next((s for s in region if s.contains(t0)), None)
        if seg is None and region:
            seg = min(region, key=lambda s: min(abs(s.left - t0), abs(s.right - t0)))
        if seg is not None:
            bounds = (seg.left, seg.right)
        if cont and pi.size == 2:
            # the logit support is exact where it exists
            bounds = pi.binary_support()
    value = sol.value if cont else u0
    return BenchmarkSolution(value, pi, cont, bounds, pi.information(problem), problem.chi, problem.rho)


# ---------------------------------------------------------------------------
# Restricted value and belief classification
# ---------------------------------------------------------------------------

def restricted_value(problem: DecisionProblem, q, pi: PosteriorDistribution) -> float:
    """Best net value from posteriors in ``Supp(pi)`` with barycenter ``q``.

    Solved as a linear program over the atom weights; raises
    :class:`InfeasibleError` when ``q`` lies outside the convex hull.
    """
    q = as_belief(q, n=problem.n_states, name="q")
    k = problem.cost_ratio
    B = pi.beliefs
    c = problem.payoff(B) - k * problem.entropy.batch(B)
    res = solve_lp(c, B.T, q)
    return res.value - problem.payoff(q) + k * problem.H(q)


class BeliefClass(enum.Enum):
    DECISIVE = "decisive"
    SUSPENSIVE = "suspensive"
    STOP = "stop"


def classify_belief(problem: DecisionProblem, q, pi: PosteriorDistribution,
                    atom_tol: float = 1e-8, value_tol: float = 1e-9) -> BeliefClass:
    """Decisive on ``Supp(pi)``, suspensive inside its hull with ``V_R >= 0``, else stop."""
    q = as_belief(q, n=problem.n_states, name="q")
    if pi.contains(q, atom_tol):
        return BeliefClass.DECISIVE
    try:
        v = restricted_value(problem, q, pi)
    except InfeasibleError:
        return BeliefClass.STOP
    return BeliefClass.SUSPENSIVE if v >= -value_tol else BeliefClass.STOP
