"""Independent reference computations used by the test suite.

These deliberately avoid the package internals: plain numpy on the
regressor matrix, brute force where the instance is small enough.
"""

import itertools

import numpy as np


def crit_value(M, crit):
    """log det / m for D, -tr(M^-1) for A; -inf when singular."""
    M = np.asarray(M, dtype=float)
    m = M.shape[-1]
    if crit == "D":
        s, ld = np.linalg.slogdet(M)
        return np.where(s > 0, ld / m, -np.inf)
    ev = np.linalg.eigvalsh(M)
    ok = ev[..., 0] > 1e-12 * np.maximum(ev[..., -1], 1.0)
    with np.errstate(divide="ignore"):
        tr = np.where(ok, (1.0 / np.where(ok[..., None], ev, 1.0)).sum(-1), np.inf)
    return -tr


def efficiency_vs(v, vref, crit):
    """Positive-scale efficiency of value ``v`` against ``vref``."""
    if crit == "D":
        return float(np.exp(v - vref))
    return float(vref / v)


def exchange_best(F, N, crit, starts=20, seed=0):
    """Multi-start best-improvement exchange over size-N exact designs."""
    F = np.asarray(F, dtype=float)
    n, m = F.shape
    H = F[:, :, None] * F[:, None, :]
    rng = np.random.default_rng(seed)
    best_v, best_x = -np.inf, None
    for _ in range(starts):
        x = np.bincount(rng.choice(n, N), minlength=n).astype(float)
        v = float(crit_value(F.T @ (x[:, None] * F), crit))
        while True:
            M = F.T @ (x[:, None] * F)
            sup = np.flatnonzero(x)
            cand = M[None, None] - H[sup][:, None] + H[None, :]
            vals = crit_value(cand, crit)
            k = np.unravel_index(np.argmax(vals), vals.shape)
            if vals[k] <= v + 1e-12:
                break
            x[sup[k[0]]] -= 1
            x[k[1]] += 1
            v = float(vals[k])
        if v > best_v:
            best_v, best_x = v, x.copy()
    return best_v, best_x


def enumerate_integer(lower, upper):
    """All integer vectors in a box (small boxes only)."""
    ranges = [range(int(a), int(b) + 1) for a, b in zip(lower, upper)]
    return np.array(list(itertools.product(*ranges)), dtype=float)
