"""Pure-Python (numpy) versions of the hot kernels.

Each function here has a twin with an identical signature in the compiled
``_ckernels`` extension; :mod:`engagemax.kernels` picks one at import time.
"""

import numpy as np

BACKEND = "python"

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0 ** -53


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed, paths, draw):
    """Uniforms in (0, 1) for draw number ``draw`` of each path in ``paths``.

    Counter-based SplitMix64: the path key is the ``path``-th output of a
    SplitMix64 stream seeded with ``seed``, and the draw is the ``draw``-th
    output of the stream seeded with that key.
    """
    paths = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        s = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        key = _mix64(s + (paths + np.uint64(1)) * GOLDEN)
        v = _mix64(key + np.uint64(int(draw) + 1) * GOLDEN)
    return ((v >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def sample_dilution(seed, start, n, alpha, cumw):
    """Jump times ``-ln(U0)/alpha`` and atom indices drawn from ``cumw``."""
    cumw = np.asarray(cumw, dtype=np.float64)
    paths = np.arange(start, start + n, dtype=np.uint64)
    u0 = uniforms(seed, paths, 0)
    u1 = uniforms(seed, paths, 1)
    tau = -np.log(u0) / alpha
    idx = np.searchsorted(cumw, u1, side="right")
    np.minimum(idx, cumw.size - 1, out=idx)
    return tau, idx.astype(np.int64)


def blahut_arimoto(expu, prior, p0, tol, maxiter):
    """Fixed-point iteration on unconditional action probabilities.

    ``expu[x, a]`` is ``exp(u[a, x] / c)`` (row-shifted for stability).
    Returns ``(p, iterations, last_max_update)``.
    """
    E = np.asarray(expu, dtype=np.float64)
    prior = np.asarray(prior, dtype=np.float64)
    p = np.array(p0, dtype=np.float64)
    delta = np.inf
    it = 0
    while it < maxiter:
        D = E @ p
        r = np.divide(prior, D, out=np.zeros_like(D), where=D > 0)
        p_new = p * (r @ E)
        p_new /= p_new.sum()
        delta = float(np.max(np.abs(p_new - p)))
        p = p_new
        it += 1
        if delta < tol:
            break
    return p, it, delta


def upper_hull(x, y):
    """Indices of the upper convex hull of points sorted by ``x``."""
    hull = []
    for i in range(len(x)):
        xi, yi = x[i], y[i]
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            # drop k if it lies on or below the chord j -> i
            if (x[k] - x[j]) * (yi - y[j]) - (y[k] - y[j]) * (xi - x[j]) >= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=np.int64)


def rk4_linear_backward(t, a_end, a_mid, a_start, b_end, b_mid, b_start, y_end):
    """Integrate ``y' = a(t) y + b(t)`` backward over the grid ``t``.

    For step ``i`` (from ``t[i+1]`` down to ``t[i]``) the coefficient arrays
    hold the values at ``t[i+1]``, the midpoint and ``t[i]``.
    """
    t = np.asarray(t, dtype=np.float64)
    m = t.size
    y = np.empty(m)
    y[m - 1] = y_end
    yi = float(y_end)
    for i in range(m - 2, -1, -1):
        h = t[i] - t[i + 1]
        k1 = a_end[i] * yi + b_end[i]
        k2 = a_mid[i] * (yi + 0.5 * h * k1) + b_mid[i]
        k3 = a_mid[i] * (yi + 0.5 * h * k2) + b_mid[i]
        k4 = a_start[i] * (yi + h * k3) + b_start[i]
        yi = yi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y[i] = yi
    return y
