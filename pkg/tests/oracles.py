"""Independent reference computations used by the tests.

Nothing here imports the package: every oracle works from first principles
(brute-force grids, scalar bisection, closed forms) so agreement with the
solvers is evidence rather than tautology.
"""

import math

import numpy as np

E = math.e
LN2 = math.log(2.0)


def negentropy(t):
    """``sum q ln q`` for the binary belief ``(1 - t, t)``; 0 ln 0 = 0."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(t > 0, t * np.log(t), 0.0)
        b = np.where(t < 1, (1 - t) * np.log1p(-t), 0.0)
    return a + b


def gap(t):
    """``H(t) - H(1/2)``."""
    return negentropy(t) + LN2


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def guess_payoff(t):
    """Best payoff for the +-1 guessing problem at belief ``t`` on R."""
    return np.abs(2.0 * np.asarray(t, dtype=float) - 1.0)


def bisect(f, lo, hi, tol=1e-15, maxit=400):
    flo = f(lo)
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol or not lo < mid < hi:
            break
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def qstar_oracle(kappa=2.0, chi=1.0):
    """Upper principal atom at the uniform prior: ``2q - 1 = (kappa/chi) gap(q)``."""
    f = lambda q: (2 * q - 1) - (kappa / chi) * float(gap(q))
    return bisect(f, E / (1 + E), 1 - 1e-15)


def example_numbers():
    """Closed forms for the built-in example."""
    p, p_alt = E / (1 + E), 4 * E / (1 + 4 * E)
    g, g_alt = float(gap(p)), float(gap(p_alt))
    return {
        "V_B": (E - 1) / (1 + E) - 2 * g,
        "V_B_alt": (4 * E - 1) / (1 + 4 * E) - 2 * g_alt,
        "inv_alpha": g,
        "inv_alpha_alt": g_alt,
    }


def grid_envelope(f_vals, t, t0):
    """Concave envelope of grid samples at ``t0`` by brute force over chords.

    Returns ``(value, t_lo, t_hi)`` for the best chord through ``t0``.
    """
    t = np.asarray(t)
    left = np.flatnonzero(t <= t0)
    right = np.flatnonzero(t >= t0)
    i = left[:, None]
    j = right[None, :]
    span = t[j] - t[i]
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(span > 0, (t0 - t[i]) / span, 0.0)
    vals = (1 - w) * f_vals[i] + w * f_vals[j]
    k = np.unravel_index(np.argmax(vals), vals.shape)
    return float(vals[k]), float(t[left[k[0]]]), float(t[right[k[1]]])


def agent_oracle(t0, kappa=2.0, chi=1.0, n=4001):
    """Agent value ``max E[u_hat] - (kappa/chi) E[gap]`` on a grid (guessing problem)."""
    t = np.linspace(0, 1, n)
    f = guess_payoff(t) - (kappa / chi) * negentropy(t)
    v, lo, hi = grid_envelope(f, t, t0)
    return v + (kappa / chi) * float(negentropy(t0)), lo, hi


def principal_oracle(t0, kappa=2.0, chi=1.0, n=2001):
    """Max ``E[gap]`` over two-point supports subject to participation, on a grid."""
    t = np.linspace(0, 1, n)
    u, h = guess_payoff(t), negentropy(t)
    u0, h0 = float(guess_payoff(t0)), float(negentropy(t0))
    lo = t[t < t0][:, None]
    hi = t[t > t0][None, :]
    ulo, uhi = u[t < t0][:, None], u[t > t0][None, :]
    hlo, hhi = h[t < t0][:, None], h[t > t0][None, :]
    w = (t0 - lo) / (hi - lo)
    info = (1 - w) * hlo + w * hhi - h0
    net = (1 - w) * ulo + w * uhi - u0 - (kappa / chi) * info
    info = np.where(net >= 0, info, -np.inf)
    k = np.unravel_index(np.argmax(info), info.shape)
    best = float(info[k])
    return max(best, 0.0), float(lo[k[0], 0]), float(hi[0, k[1]])


def restricted_value_oracle(t, atoms, kappa=2.0, chi=1.0):
    """Best chord value through ``t`` using only the given atoms, net of acting at ``t``."""
    k = kappa / chi
    a = np.asarray(atoms, dtype=float)
    f = guess_payoff(a) - k * negentropy(a)
    best = -np.inf
    for i in range(a.size):
        for j in range(a.size):
            if a[i] <= t <= a[j]:
                if a[j] == a[i]:
                    v = f[i]
                else:
                    w = (t - a[i]) / (a[j] - a[i])
                    v = (1 - w) * f[i] + w * f[j]
                best = max(best, v)
    if best == -np.inf:
        return None
    return float(best - guess_payoff(t) + k * negentropy(t))


def logit_entry(lam, g1, g2):
    """Conditional probability of the action guessing (g1, g2) correctly or not.

    ``g1, g2`` are +1 when the guess matches and -1 otherwise.
    """
    z = lambda a, b: math.exp((b + lam * a) / (2 * lam))
    total = z(1, 1) + z(1, -1) + z(-1, 1) + z(-1, -1)
    return z(g1, g2) / total


def deadline_value(Eu, alpha, u0, kappa, T0):
    """Stop at the jump or at ``T0``: closed form under an Exponential(alpha) jump."""
    p = 1 - math.exp(-alpha * T0)
    return p * Eu + (1 - p) * u0 - kappa * p / alpha


def splitmix64(x):
    """Reference SplitMix64 finalizer on Python ints."""
    m = (1 << 64) - 1
    z = x & m
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & m
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & m
    return z ^ (z >> 31)


def counter_uniform(seed, path, draw):
    """Uniform of the counter-based generator, computed with Python ints."""
    g = 0x9E3779B97F4A7C15
    m = (1 << 64) - 1
    key = splitmix64((seed + (path + 1) * g) & m)
    v = splitmix64((key + (draw + 1) * g) & m)
    return ((v >> 11) + 0.5) * 2.0 ** -53
