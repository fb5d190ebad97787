"""Multi-jump implementations that pass through suspensive beliefs.

For a symmetric two-state problem with prior ``q0 != 1/2`` both ``q0`` and
``1 - q0`` are suspensive under the principal's ``pi*``.  The composed
process jumps at Poisson times: with probability ``theta`` to the other
suspensive belief, otherwise straight to ``Supp(pi*) = {q1, q2}`` with the
split that keeps the jump mean-preserving.  The jump rate makes the expected
entropy flow equal ``chi``.  Optional stopping fixes the terminal law to
``pi*``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..beliefs import DecisionProblem, Rotation, check_rotational_symmetry
from ..dynamics import MC_SIGMAS, AuditReport, mean_se
from ..errors import CapabilityError, InputError, PropertyViolation
from ..static_ri import BeliefClass, PosteriorDistribution, classify_belief

SYMMETRIC_TOL = 1e-12
MAX_ROUNDS = 10_000


@dataclass(frozen=True)
class JumpLaw:
    """Transition law from each suspensive belief (probability of the second state)."""

    suspensive: tuple[float, float]
    decisive: tuple[float, float]
    theta: float
    rate: float

    def decisive_split(self, b: float) -> float:
        """Probability of landing on the upper decisive atom when leaving ``b`` decisively."""
        q1, q2 = self.decisive
        other = self.suspensive[1] if b == self.suspensive[0] else self.suspensive[0]
        m = (b - self.theta * other) / (1.0 - self.theta)
        return (m - q1) / (q2 - q1)


def jump_law(problem: DecisionProblem, pi_star: PosteriorDistribution, theta_fraction: float = 0.5) -> JumpLaw:
    if problem.n_states != 2:
        raise CapabilityError("the suspensive-path composer handles two states")
    swap = Rotation.from_permutation([1, 0])
    if not check_rotational_symmetry(problem.entropy, problem, swap):
        raise CapabilityError("the suspensive-path composer needs a symmetric problem")
    if pi_star.size != 2:
        raise InputError("pi_star: expected a two-atom distribution")
    if not 0.0 <= theta_fraction < 1.0:
        raise InputError("theta_fraction: must lie in [0, 1)")
    q1, q2 = pi_star.binary_support()
    t0 = float(problem.prior[1])
    pair = (min(t0, 1.0 - t0), max(t0, 1.0 - t0))
    if not q1 < pair[0] <= pair[1] < q2:
        raise InputError("suspensive beliefs must lie strictly inside the decisive support")
    if pair[1] - pair[0] <= SYMMETRIC_TOL:
        theta = 0.0
    else:
        # largest switching probability that keeps the decisive mean inside [q1, q2]
        theta_max = (pair[0] - q1) / (pair[1] - q1)
        theta = theta_fraction * theta_max
    H = problem.entropy
    h_b = H(np.array([1.0 - t0, t0]))
    m = (t0 - theta * (1.0 - t0)) / (1.0 - theta) if theta > 0 else t0
    w_hi = (m - q1) / (q2 - q1)
    h_dec = (1.0 - w_hi) * H(np.array([1.0 - q1, q1])) + w_hi * H(np.array([1.0 - q2, q2]))
    dH_jump = (1.0 - theta) * (h_dec - h_b)
    rate = problem.chi / dH_jump
    return JumpLaw(pair, (q1, q2), theta, rate)


@dataclass
class SuspensiveEnsemble:
    """Composed paths in ragged form: events sorted by path then time."""

    law: JumpLaw
    prior: float
    seed: int
    tau: np.ndarray
    terminal: np.ndarray
    event_path: np.ndarray
    event_time: np.ndarray
    event_belief: np.ndarray
    chi: float

    def __len__(self):
        return self.tau.size

    def beliefs_at(self, t: float) -> np.ndarray:
        out = np.full(len(self), self.prior)
        sel = np.flatnonzero(self.event_time <= t)
        if sel.size:
            p = self.event_path[sel]
            last = sel[np.r_[p[1:] != p[:-1], True]]
            out[self.event_path[last]] = self.event_belief[last]
        return out

    def path(self, i: int):
        """``(times, beliefs)`` of path ``i`` including the start at the prior."""
        sel = self.event_path == i
        times = np.concatenate([[0.0], self.event_time[sel]])
        beliefs = np.concatenate([[self.prior], self.event_belief[sel]])
        return times, beliefs

    def pre_stop_beliefs(self) -> np.ndarray:
        """Every belief held before stopping (the prior and all intermediate jumps)."""
        inter = self.event_belief[self.event_time < self.tau[self.event_path]]
        return np.unique(np.concatenate([[self.prior], inter]))

    def info_at(self, t: float) -> np.ndarray:
        return self.chi * np.minimum(t, self.tau)


def compose_suspensive_paths(problem: DecisionProblem, pi_star: PosteriorDistribution, n: int,
                             seed: int = 0, theta_fraction: float = 0.5) -> SuspensiveEnsemble:
    law = jump_law(problem, pi_star, theta_fraction)
    n = int(n)
    if n < 1:
        raise InputError("samples: must be at least 1")
    lo, hi = law.suspensive
    q1, q2 = law.decisive
    t0 = float(problem.prior[1])
    split = {lo: law.decisive_split(lo), hi: law.decisive_split(hi)}

    cur = np.full(n, t0)
    clock = np.zeros(n)
    alive = np.arange(n)
    tau = np.zeros(n)
    terminal = np.zeros(n)
    ev_p, ev_t, ev_b = [], [], []
    for k in range(MAX_ROUNDS):
        if alive.size == 0:
            break
        ids = alive.astype(np.uint64)
        u_t = kernels.uniforms(seed, ids, 3 * k)
        u_c = kernels.uniforms(seed, ids, 3 * k + 1)
        u_d = kernels.uniforms(seed, ids, 3 * k + 2)
        clock[alive] += -np.log(u_t) / law.rate
        b = cur[alive]
        switch = u_c < law.theta
        other = np.where(b == lo, hi, lo)
        p_hi = np.where(b == lo, split[lo], split[hi])
        dest = np.where(switch, other, np.where(u_d < p_hi, q2, q1))
        ev_p.append(alive.copy())
        ev_t.append(clock[alive].copy())
        ev_b.append(dest)
        cur[alive] = dest
        done = ~switch
        tau[alive[done]] = clock[alive[done]]
        terminal[alive[done]] = dest[done]
        alive = alive[switch]
    else:
        raise InputError("suspensive paths did not terminate; theta is too close to one")
    P = np.concatenate(ev_p)
    T = np.concatenate(ev_t)
    B = np.concatenate(ev_b)
    order = np.lexsort((T, P))
    return SuspensiveEnsemble(law, t0, int(seed), tau, terminal, P[order], T[order], B[order], problem.chi)


def compose_suspensive_path(problem: DecisionProblem, pi_star: PosteriorDistribution, seed: int = 0):
    """A single composed path: ``(times, beliefs)`` with the terminal belief last."""
    return compose_suspensive_paths(problem, pi_star, 1, seed).path(0)


def audit_suspensive(problem: DecisionProblem, pi_star: PosteriorDistribution, ens: SuspensiveEnsemble,
                     probe_times=None) -> AuditReport:
    """Classification, martingale and capacity checks on composed paths."""
    rep = AuditReport("suspensive-paths")
    binb = lambda t: np.array([1.0 - t, t])
    pre = ens.pre_stop_beliefs()
    n_susp = sum(classify_belief(problem, binb(b), pi_star) is BeliefClass.SUSPENSIVE for b in pre)
    rep.add("pre-stop-suspensive", n_susp / pre.size, 1.0, 0.0, n_susp == pre.size,
            f"distinct pre-stop beliefs {pre.tolist()}")
    term = np.unique(ens.terminal)
    n_dec = sum(classify_belief(problem, binb(b), pi_star) is BeliefClass.DECISIVE for b in term)
    rep.add("terminal-decisive", n_dec / term.size, 1.0, 0.0, n_dec == term.size,
            f"distinct terminal beliefs {term.tolist()}")

    mean_tau = float(np.mean(ens.tau))
    if probe_times is None:
        probe_times = (0.25 * mean_tau, mean_tau, 4.0 * mean_tau)
    for t in probe_times:
        m, se = mean_se(ens.beliefs_at(t))
        dev = abs(m - ens.prior)
        rep.add(f"martingale@{t:.6g}", dev, 0.0, MC_SIGMAS * se, dev <= MC_SIGMAS * se + 1e-15)

    H = problem.entropy
    dH = H.batch(np.column_stack([1.0 - ens.terminal, ens.terminal])) - H(binb(ens.prior))
    m, se = mean_se(dH - problem.chi * ens.tau)
    rep.add("capacity", m, 0.0, MC_SIGMAS * se, m <= MC_SIGMAS * se)
    return rep


def raise_on_violation(rep: AuditReport):
    rep.raise_if_failed(PropertyViolation)
