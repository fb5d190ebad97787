"""Alpha-dilution belief processes: sampling, information accounting and
incentive audits.

Under an alpha-dilution of ``pi`` the belief stays at the prior until the
first arrival of a Poisson clock with rate ``alpha`` and then jumps once to a
draw from ``pi``.  Sampling uses a counter-based SplitMix64 generator: path
``i`` of seed ``s`` always sees the same two uniforms, so ensembles are
reproducible bit-for-bit and any slice can be regenerated independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .beliefs import DecisionProblem
from .errors import AuditFailure, InputError
from .static_ri import PosteriorDistribution
from .tabular import write_csv

MC_SIGMAS = 4.0
DEFAULT_SAMPLES = 100_000


def fsum_mean(x) -> float:
    x = np.asarray(x, dtype=float)
    return math.fsum(x) / x.size


def mean_se(x) -> tuple[float, float]:
    """Sample mean and its standard error (compensated sums)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    m = fsum_mean(x)
    if n < 2:
        return m, 0.0
    var = math.fsum((x - m) ** 2) / (n - 1)
    return m, math.sqrt(var / n)


@dataclass(frozen=True)
class SeedRecord:
    seed: int
    path_index: int


@dataclass(frozen=True)
class DilutionPath:
    jump_time: float
    terminal_belief: np.ndarray
    pre_jump_belief: np.ndarray
    info_total: float
    seed: SeedRecord
    terminal_index: int
    chi: float

    def belief_at(self, t: float) -> np.ndarray:
        return self.terminal_belief if t >= self.jump_time else self.pre_jump_belief

    def info_at(self, t: float) -> float:
        """Cumulative information ``I_t = chi * min(t, tau)``."""
        return self.chi * min(max(t, 0.0), self.jump_time)


class PathEnsemble:
    """Sampled alpha-dilution paths stored column-wise.

    ``paths`` materializes :class:`DilutionPath` objects lazily; the array
    attributes are what the audits use.
    """

    def __init__(self, pi: PosteriorDistribution, alpha: float, chi: float, seed: int,
                 tau: np.ndarray, index: np.ndarray, start: int = 0):
        self.pi = pi
        self.alpha = float(alpha)
        self.chi = float(chi)
        self.seed = int(seed)
        self.start = int(start)
        self.tau = tau
        self.index = index
        self.prior = pi.mean()
        tau.setflags(write=False)
        index.setflags(write=False)

    def __len__(self):
        return self.tau.size

    @property
    def paths(self) -> Sequence[DilutionPath]:
        return _LazyPaths(self)

    def path(self, i: int) -> DilutionPath:
        t = float(self.tau[i])
        j = int(self.index[i])
        return DilutionPath(t, self.pi.beliefs[j], self.prior, self.chi * t,
                            SeedRecord(self.seed, self.start + i), j, self.chi)

    @property
    def info_total(self) -> np.ndarray:
        return self.chi * self.tau

    @property
    def terminal_beliefs(self) -> np.ndarray:
        return self.pi.beliefs[self.index]

    def beliefs_at(self, t: float) -> np.ndarray:
        out = self.terminal_beliefs.copy()
        out[self.tau > t] = self.prior
        return out

    def frequencies(self) -> np.ndarray:
        return np.bincount(self.index, minlength=self.pi.size) / len(self)

    def to_csv(self, path, states: Sequence[str] | None = None):
        """Columns: path_id, jump_time, terminal_<state>..., info_total."""
        n_states = self.pi.beliefs.shape[1]
        states = list(states) if states is not None else [str(x) for x in range(n_states)]
        header = ["path_id", "jump_time"] + [f"terminal_{s}" for s in states] + ["info_total"]
        B = self.terminal_beliefs
        info = self.info_total
        rows = ([self.start + i, self.tau[i], *B[i], info[i]] for i in range(len(self)))
        return write_csv(path, header, rows)


class _LazyPaths(Sequence):
    def __init__(self, ens):
        self._ens = ens

    def __len__(self):
        return len(self._ens)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._ens.path(j) for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return self._ens.path(i)


def sample_dilution(pi: PosteriorDistribution, alpha: float, n: int, seed: int = 0,
                    chi: float = 1.0, start: int = 0) -> PathEnsemble:
    """Sample ``n`` alpha-dilution paths of ``pi``."""
    if pi.size < 2:
        raise InputError("sample_dilution: pi is degenerate (no jump to sample)")
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha <= 0.0:
        raise InputError(f"alpha: must be a positive finite rate, got {alpha}")
    n = int(n)
    if n < 1:
        raise InputError("samples: must be at least 1")
    if int(seed) < 0:
        raise InputError("seed: must be nonnegative")
    cumw = np.cumsum(pi.weights)
    cumw[-1] = 1.0
    tau, idx = kernels.sample_dilution(int(seed), int(start), n, alpha, cumw)
    return PathEnsemble(pi, alpha, chi, seed, np.asarray(tau), np.asarray(idx), start)


def exact_dilution_rate(pi: PosteriorDistribution, problem: DecisionProblem) -> float:
    """The rate ``chi / E^pi[H - H(prior)]`` at which capacity binds."""
    return problem.chi / pi.information(problem)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    value: float
    bound: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class AuditReport:
    name: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self):
        return self.passed

    def add(self, name, value, bound, tolerance, passed, detail=""):
        self.checks.append(Check(name, float(value), float(bound), float(tolerance), bool(passed), detail))

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def raise_if_failed(self, cls=AuditFailure):
        bad = self.failures()
        if bad:
            names = ", ".join(c.name for c in bad)
            raise cls(f"{self.name} audit failed: {names}", report=self)

    def rows(self):
        return [(self.name, c.name, c.value, c.bound, c.tolerance, c.passed) for c in self.checks]


REPORT_HEADER = ("audit", "check", "value", "bound", "tolerance", "passed")


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------

def audit_feasibility(ensemble: PathEnsemble, problem: DecisionProblem,
                      probe_times: Sequence[float] | None = None) -> AuditReport:
    """Participation, capacity and martingale checks at ``MC_SIGMAS`` standard errors."""
    if len(ensemble) == 0:
        raise InputError("audit_feasibility: empty ensemble")
    rep = AuditReport("feasibility")
    u0 = float(problem.payoff(problem.prior))
    B = ensemble.terminal_beliefs
    tau = ensemble.tau

    net = problem.payoff(B) - problem.kappa * tau
    m, se = mean_se(net)
    tol = MC_SIGMAS * se
    rep.add("participation", m, u0, tol, m >= u0 - tol, "E[u_hat(q_tau)] - kappa E[tau] >= u_hat(prior)")

    dH = problem.entropy.batch(B) - problem.H(problem.prior)
    gap = dH - problem.chi * tau
    m, se = mean_se(gap)
    tol = MC_SIGMAS * se
    rep.add("capacity", m, 0.0, tol, m <= tol, "E[H(q_tau) - H(prior)] - chi E[tau] <= 0")

    if probe_times is None:
        mean_tau = 1.0 / ensemble.alpha
        probe_times = (0.25 * mean_tau, mean_tau, 4.0 * mean_tau)
    for t in probe_times:
        Q = ensemble.beliefs_at(t)
        devs, tols = [], []
        for x in range(Q.shape[1]):
            m, se = mean_se(Q[:, x])
            devs.append(abs(m - problem.prior[x]))
            tols.append(MC_SIGMAS * se)
        ok = all(dv <= tl + 1e-15 for dv, tl in zip(devs, tols))
        rep.add(f"martingale@{t:.6g}", max(devs), 0.0, max(tols), ok, "max_x |E[q_t,x] - prior_x|")
    return rep


# ---------------------------------------------------------------------------
# Stopping deviations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StopImmediately:
    name = "stop-immediately"

    def utility(self, u_jump, tau, u0, kappa):
        return np.full(tau.shape, u0)

    def closed_form(self, Eu, alpha, u0, kappa):
        return u0


@dataclass(frozen=True)
class StopAtFirstJump:
    name = "first-jump"

    def utility(self, u_jump, tau, u0, kappa):
        return u_jump - kappa * tau

    def closed_form(self, Eu, alpha, u0, kappa):
        return Eu - kappa / alpha


@dataclass(frozen=True)
class FixedDeadline:
    """Stop at the jump or at ``T0`` if no jump has arrived by then."""

    T0: float

    @property
    def name(self):
        return f"deadline-{self.T0:.6g}"

    def utility(self, u_jump, tau, u0, kappa):
        return np.where(tau <= self.T0, u_jump - kappa * tau, u0 - kappa * self.T0)

    def closed_form(self, Eu, alpha, u0, kappa):
        p = -math.expm1(-alpha * self.T0)
        return p * Eu + (1.0 - p) * u0 - kappa * p / alpha


DEFAULT_DEVIATIONS = (StopImmediately(), StopAtFirstJump(), FixedDeadline(0.5))


def audit_stopping(pi: PosteriorDistribution, alpha: float, problem: DecisionProblem,
                   deviations=DEFAULT_DEVIATIONS, n: int = DEFAULT_SAMPLES, seed: int = 0) -> AuditReport:
    """Compare stopping rules against stopping at the first jump.

    Each check is on the paired per-path difference ``deviation - recommended``.
    The closed-form value of every rule is reported alongside.
    """
    ens = sample_dilution(pi, alpha, n, seed, chi=problem.chi)
    u0 = float(problem.payoff(problem.prior))
    u_jump = problem.payoff(ens.terminal_beliefs)
    Eu = pi.action_value(problem)
    rec = StopAtFirstJump().utility(u_jump, ens.tau, u0, problem.kappa)
    rec_exact = StopAtFirstJump().closed_form(Eu, alpha, u0, problem.kappa)
    rep = AuditReport("stopping")
    rep.add("recommended", fsum_mean(rec), rec_exact, 0.0, True, "empirical vs closed form")
    for dev in deviations:
        vals = dev.utility(u_jump, ens.tau, u0, problem.kappa)
        m, se = mean_se(vals - rec)
        tol = MC_SIGMAS * se
        exact = dev.closed_form(Eu, alpha, u0, problem.kappa)
        ok = m <= tol
        if isinstance(dev, StopImmediately):
            ok = ok and bool(np.all(vals == u0))
        rep.add(dev.name, fsum_mean(vals), exact, tol, ok,
                f"paired difference {m:.6g}; closed-form difference {exact - rec_exact:.6g}")
    return rep


# ---------------------------------------------------------------------------
# Garbling
# ---------------------------------------------------------------------------

def garble(pi: PosteriorDistribution, M) -> PosteriorDistribution:
    """Apply a signal garbling ``M[j, k] = P(new atom k | old atom j)``.

    The result is a mean-preserving contraction of ``pi``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape[0] != pi.size or np.any(M < 0) or np.max(np.abs(M.sum(axis=1) - 1.0)) > 1e-12:
        raise InputError("garbling matrix must be row-stochastic with one row per atom")
    joint = pi.weights[:, None] * M
    W = joint.sum(axis=0)
    keep = W > 0
    B = (joint[:, keep].T @ pi.beliefs) / W[keep, None]
    B /= B.sum(axis=1, keepdims=True)
    return PosteriorDistribution(B, W[keep] / W[keep].sum())


def merge_pair(pi: PosteriorDistribution, i: int, j: int) -> PosteriorDistribution:
    M = np.eye(pi.size)
    M[j] = 0.0
    M[j, i] = 1.0
    return garble(pi, M)


def garbling_value(problem: DecisionProblem, pi_hat: PosteriorDistribution, alpha: float) -> float:
    """Agent value of acting on ``pi_hat`` after an Exponential(alpha) wait."""
    return pi_hat.action_value(problem) - problem.kappa / alpha


def audit_garbling(pi: PosteriorDistribution, alpha: float, problem: DecisionProblem,
                   n_garbles: int = 200, seed: int = 0, tol: float = 1e-9) -> AuditReport:
    """Mean-preserving contractions never beat the prior payoff at the waiting cost."""
    if pi.size < 2:
        raise InputError("audit_garbling: pi is degenerate")
    rng = np.random.default_rng(seed)
    u0 = float(problem.payoff(problem.prior))
    rep = AuditReport("garbling")
    k = pi.size
    cases = [("identity", np.eye(k)), ("full", np.ones((k, 1)))]
    for g in range(int(n_garbles)):
        if g % 2 == 0:
            i, j = rng.choice(k, size=2, replace=False)
            M = np.eye(k)
            M[j] = 0.0
            M[j, i] = 1.0
            cases.append((f"merge-{i}-{j}", M))
        else:
            cols = int(rng.integers(1, k + 2))
            M = rng.dirichlet(np.full(cols, 0.5), size=k)
            cases.append((f"matrix-{g}", M))
    worst, worst_case = -np.inf, None
    for name, M in cases:
        pi_hat = garble(pi, M)
        mean_err = float(np.max(np.abs(pi_hat.mean() - pi.mean())))
        v = garbling_value(problem, pi_hat, alpha)
        if v - u0 > worst:
            worst, worst_case = v - u0, name
        if name in ("identity", "full") or v > u0 + tol or mean_err > 1e-10:
            rep.add(name, v, u0, tol, v <= u0 + tol and mean_err <= 1e-10,
                    f"mean error {mean_err:.3g}")
    rep.add("worst", worst + u0, u0, tol, worst <= tol, f"worst contraction: {worst_case}")
    return rep
