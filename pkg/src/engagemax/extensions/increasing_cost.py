"""Increasing delay costs.

The policy is built from frozen-cost principal solutions: at time ``t`` the
belief jumps to the support of ``pi*(kappa(t))`` after a time change.  The
multiplier ``Gamma(t)`` on the agent's continuation constraints solves the
linear ODE

    Gamma' = (chi/E + Gamma_t c'_dot / rho) Gamma - chi Gamma_t / E,

where ``E(t)`` is the expected entropy reduction of ``pi*(kappa(t))``,
``Gamma_t = lambda(kappa(t))`` is the frozen-cost multiplier and ``c'_dot``
is the time derivative of the frozen effective cost coefficient.  It is
integrated backward from ``Gamma(T) = Gamma_T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.integrate import cumulative_trapezoid

from .. import kernels
from ..beliefs import DecisionProblem, Rotation, check_rotational_symmetry
from ..errors import CapabilityError, InputError, NumericalError
from ..principal import solve_principal

BAND_TOL = 1e-9
T0_TOL = 1e-10
REFINE_TOL = 1e-8


@dataclass(frozen=True)
class CostSchedule:
    """Continuous piecewise-linear, nondecreasing delay cost; constant after ``T``.

    ``times`` are the knots ``0 = t_0 < ... < t_m = T`` and ``values`` the cost
    at each knot.
    """

    times: tuple
    values: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.size != v.size or t.size < 2:
            raise InputError("schedule: need matching times and values with at least two knots")
        if t[0] != 0.0:
            raise InputError("schedule: the first knot must be at t = 0")
        if np.any(np.diff(t) <= 0):
            raise InputError("schedule: knot times must be strictly increasing")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise InputError("schedule: costs must be positive and finite")
        if np.any(np.diff(v) < 0):
            raise InputError("schedule: cost must be nondecreasing")
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @classmethod
    def constant(cls, kappa: float, T: float = 1.0) -> "CostSchedule":
        return cls((0.0, T), (kappa, kappa))

    @classmethod
    def linear(cls, k0: float, k1: float, T: float) -> "CostSchedule":
        return cls((0.0, T), (k0, k1))

    @property
    def T(self) -> float:
        return self.times[-1]

    @property
    def is_constant(self) -> bool:
        return self.values[0] == self.values[-1]

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.times)

    def slope_at(self, t):
        """Right derivative; zero at and after ``T``."""
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.times, t, side="right") - 1
        s = np.concatenate([self.slopes(), [0.0]])
        return s[np.clip(k, 0, len(s) - 1)]

    def integral(self, t):
        """``P(t) = int_0^t kappa``."""
        t = np.asarray(t, dtype=float)
        knots = np.asarray(self.times)
        vals = np.asarray(self.values)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(knots))])
        k = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, knots.size - 1)
        base = cum[k]
        dt = t - knots[k]
        return base + dt * vals[k] + 0.5 * dt * dt * self.slope_at(t)

    def grid(self, counts) -> np.ndarray:
        """Union of uniform grids with ``counts[i]`` steps on knot interval ``i``."""
        pieces = [np.linspace(a, b, n + 1)[:-1] for a, b, n in zip(self.times[:-1], self.times[1:], counts)]
        return np.concatenate(pieces + [[self.T]])

    def perturbed(self, eps: float) -> "CostSchedule":
        return CostSchedule(self.times, tuple(v + eps for v in self.values))


class FrozenCostTable:
    """Chebyshev interpolants of the frozen-cost principal solution in ``kappa``.

    Tabulated: the effective cost coefficient ``c'``, the expected entropy
    reduction ``E`` and the coordinates of each atom (atoms sorted by the
    probability of the last state).
    """

    def __init__(self, problem: DecisionProblem, k_lo: float, k_hi: float, nodes: int = 24):
        self.problem = problem
        self.k_lo, self.k_hi = float(k_lo), float(k_hi)
        self.constant = self.k_hi - self.k_lo <= 1e-14
        if self.constant:
            kap = np.array([self.k_lo])
        else:
            j = np.arange(nodes)
            x = np.cos(np.pi * (j + 0.5) / nodes)
            kap = 0.5 * (self.k_lo + self.k_hi) + 0.5 * (self.k_hi - self.k_lo) * x
        cs, Es, atoms = [], [], []
        for k in kap:
            sol = solve_principal(problem.replace(kappa=float(k)))
            if sol.degenerate:
                raise CapabilityError(f"frozen-cost solution at kappa={k:.6g} is degenerate "
                                      "(interior support assumption fails)")
            B = sol.pi_star.beliefs
            B = B[np.lexsort(B.T)]
            if atoms and B.shape != atoms[0].shape:
                raise CapabilityError("frozen-cost support size changes with kappa")
            if np.min(B) <= 0.0:
                raise CapabilityError(f"frozen-cost support at kappa={k:.6g} touches the boundary")
            cs.append(sol.cost_coeff)
            Es.append(sol.information)
            atoms.append(B)
        self.nodes_kappa = kap
        self._c = np.array(cs)
        self._E = np.array(Es)
        self._atoms = np.array(atoms)
        if not self.constant:
            dom = [self.k_lo, self.k_hi]
            deg = nodes - 1
            self.c_fit = Chebyshev.fit(kap, self._c, deg, domain=dom)
            self.dc_fit = self.c_fit.deriv()
            self.E_fit = Chebyshev.fit(kap, self._E, deg, domain=dom)
            n_atoms, n_states = self._atoms.shape[1:]
            self.atom_fits = [[Chebyshev.fit(kap, self._atoms[:, a, x], deg, domain=dom)
                               for x in range(n_states)] for a in range(n_atoms)]

    def _eval(self, fit, const, k):
        k = np.asarray(k, dtype=float)
        return np.full(k.shape, const) if self.constant else fit(k)

    def c(self, k):
        return self._eval(getattr(self, "c_fit", None), self._c[0], k)

    def dc(self, k):
        return np.zeros(np.shape(k)) if self.constant else self.dc_fit(np.asarray(k, dtype=float))

    def E(self, k):
        return self._eval(getattr(self, "E_fit", None), self._E[0], k)

    def lam(self, k):
        """Frozen multiplier ``rho / (kappa/chi - c'(kappa))``."""
        k = np.asarray(k, dtype=float)
        return self.problem.rho / (k / self.problem.chi - self.c(k))

    def atoms(self, k) -> np.ndarray:
        """Atoms at each ``k``: shape ``(len(k), n_atoms, n_states)``."""
        k = np.atleast_1d(np.asarray(k, dtype=float))
        if self.constant:
            return np.repeat(self._atoms[:1], k.size, axis=0)
        n_atoms, n_states = self._atoms.shape[1:]
        out = np.empty((k.size, n_atoms, n_states))
        for a in range(n_atoms):
            for x in range(n_states):
                out[:, a, x] = self.atom_fits[a][x](k)
        out /= out.sum(axis=2, keepdims=True)
        return out


@dataclass(frozen=True)
class IncreasingCostSolution:
    t: np.ndarray
    t0: float
    kappa: np.ndarray
    support: np.ndarray
    time_change: np.ndarray
    Gamma: np.ndarray
    gamma: np.ndarray
    Gamma_frozen: np.ndarray
    Gamma_T: float
    Lambda: np.ndarray
    cost_coeff: np.ndarray
    information: np.ndarray
    foc_residual: float
    nu: float
    alpha: float
    step: float
    refinements: int
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def i0(self) -> int:
        return int(np.searchsorted(self.t, self.t0))

    def support_distance(self) -> np.ndarray:
        """Largest distance of an atom from the prior along the grid."""
        q0 = self.diagnostics["prior"]
        return np.max(np.abs(self.support - q0), axis=(1, 2))

    def rows(self):
        """``t, kappa, atoms..., Gamma, gamma, s`` for CSV export."""
        n_atoms, n_states = self.support.shape[1:]
        for i in range(self.t.size):
            yield (self.t[i], self.kappa[i], *self.support[i].reshape(-1),
                   self.Gamma[i], self.gamma[i], self.time_change[i])

    def header(self, states):
        n_atoms = self.support.shape[1]
        cols = [f"atom{a}_{s}" for a in range(n_atoms) for s in states]
        return ["t", "kappa", *cols, "Gamma", "gamma", "s"]


def _coefficients(schedule, table, times, slope, chi, rho):
    k = schedule(times)
    E = table.E(k)
    lam_t = table.lam(k)
    a = chi / E + lam_t * table.dc(k) * slope / rho
    b = -chi * lam_t / E
    return a, b


def _integrate(schedule, table, counts, chi, rho):
    t = schedule.grid(counts)
    mid = 0.5 * (t[:-1] + t[1:])
    slope = schedule.slope_at(mid)
    a1, b1 = _coefficients(schedule, table, t[1:], slope, chi, rho)
    a2, b2 = _coefficients(schedule, table, mid, slope, chi, rho)
    a3, b3 = _coefficients(schedule, table, t[:-1], slope, chi, rho)
    G_T = float(table.lam(schedule.values[-1]))
    G = kernels.rk4_linear_backward(t, a1, a2, a3, b1, b2, b3, G_T)
    # gamma on the grid with right derivatives of kappa (zero at T)
    a, b = _coefficients(schedule, table, t, schedule.slope_at(t), chi, rho)
    g = a * G + b
    return t, np.asarray(G), g, G_T


def _find_t0(t, G):
    ok = G >= -T0_TOL
    dif = np.concatenate([np.diff(G) >= -T0_TOL, [True]])
    good = ok & dif
    # last index where the property fails; t0 is the next grid time
    bad = np.flatnonzero(~good)
    return 0 if bad.size == 0 else int(bad[-1]) + 1


def solve_increasing_cost(problem: DecisionProblem, schedule: CostSchedule, ode_step: float | None = None,
                          alpha: float = 1.0, rotation: Rotation | None = None, nodes: int = 24,
                          max_refinements: int = 6) -> IncreasingCostSolution:
    """Optimal policy under a nondecreasing delay-cost schedule."""
    n = problem.n_states
    if np.max(np.abs(problem.prior - 1.0 / n)) > 1e-12:
        raise CapabilityError("increasing-cost solver requires the uniform prior")
    if rotation is None:
        rotation = Rotation.from_permutation([(x + 1) % n for x in range(n)])
    sym = check_rotational_symmetry(problem.entropy, problem, rotation)
    if not sym:
        raise CapabilityError("entropy and payoff must be rotationally symmetric "
                              f"(deviations {sym.max_entropy_deviation:.3g}, {sym.max_payoff_deviation:.3g})")
    if alpha <= 0:
        raise InputError("alpha: must be positive")
    chi, rho = problem.chi, problem.rho
    T = schedule.T
    h0 = 1e-4 * T if ode_step is None else float(ode_step)
    if h0 <= 0:
        raise InputError("ode_step: must be positive")
    table = FrozenCostTable(problem, schedule.values[0], schedule.values[-1], nodes=nodes)
    base = [max(1, math.ceil((b - a) / h0 - 1e-9)) for a, b in zip(schedule.times[:-1], schedule.times[1:])]

    prev = None
    for r in range(max_refinements + 1):
        counts = [c << r for c in base]
        t, G, g, G_T = _integrate(schedule, table, counts, chi, rho)
        if prev is not None:
            change = max(np.max(np.abs(G[::2] - prev[0])), np.max(np.abs(g[::2] - prev[1])))
            if change < REFINE_TOL:
                break
        prev = (G, g)
    else:
        raise NumericalError("multiplier ODE did not settle under step refinement", residual=change)

    kap = schedule(t)
    G_frozen = table.lam(kap)
    i0 = _find_t0(t, G)
    band = G[i0:] - G_frozen[i0:]
    if np.min(G[i0:]) < -BAND_TOL or np.max(band) > BAND_TOL * max(1.0, G_T):
        raise NumericalError("multiplier left the band [0, Gamma_t] on [t0, T]",
                             residual=float(max(-np.min(G[i0:]), np.max(band))))

    c = table.c(kap)
    E = table.E(kap)
    Lam = rho + c * G
    atoms = table.atoms(kap)
    t0 = float(t[i0])

    # time change: s = t before t0, ds/dt = chi / (alpha E) after
    rate = chi / (alpha * E)
    s = t.copy()
    s[i0:] = t0 + cumulative_trapezoid(rate[i0:], t[i0:], initial=0.0)

    # first-order condition along the support, normalized so H and u_hat vanish at the prior.
    # The delay-cost term Gamma(t0) K_{t0}(t) + int gamma(s) K_s(t) ds equals int Gamma kappa ds
    # after integrating by parts.
    tt = t[i0:]
    int_Lam = cumulative_trapezoid(Lam[i0:], tt, initial=0.0)
    int_Gk = cumulative_trapezoid(G[i0:] * kap[i0:], tt, initial=0.0)
    q0 = problem.prior
    H0, u0 = problem.H(q0), problem.payoff(q0)
    phis = []
    for a in range(atoms.shape[1]):
        B = atoms[i0:, a, :]
        dH = problem.entropy.batch(B) - H0
        du = problem.payoff(B) - u0
        phis.append(rho * dH + chi * int_Lam - Lam[i0:] * dH + G[i0:] * du - int_Gk)
    phi = np.array(phis)
    nu = float(phi[:, 0].mean())
    resid = float(np.max(np.abs(phi - nu)))

    return IncreasingCostSolution(
        t=t, t0=t0, kappa=kap, support=atoms, time_change=s, Gamma=G, gamma=g, Gamma_frozen=G_frozen,
        Gamma_T=G_T, Lambda=Lam, cost_coeff=c, information=E, foc_residual=resid, nu=nu, alpha=float(alpha),
        step=float(h0 / 2 ** r), refinements=r,
        diagnostics={"prior": q0, "table": table, "rate": rate},
    )
