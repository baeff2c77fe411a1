"""Efficient rounding of approximate designs (the classical apportionment baseline)."""

import numpy as np

from .errors import BadParams, TooFewTrials


def efficient_rounding(w, N):
    """Apportion ``N`` trials to the support points of ``w``.

    Starts from ``ceil((N - s/2) w_i / sum(w))`` and then adds a trial where
    ``n_j / w_j`` is smallest, or removes one where ``(n_j - 1) / w_j`` is
    largest, until the total is ``N``. Every support point keeps at least
    one trial, so ``N`` must be at least the support size ``s``.
    """
    w = np.asarray(w, dtype=float).ravel()
    s = w.size
    if s == 0 or np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise BadParams("weights must be finite and positive")
    N = int(N)
    if N < s:
        raise TooFewTrials(f"N={N} is smaller than the support size {s}")
    n = np.ceil((N - s / 2) * w / w.sum()).astype(np.int64)
    n = np.maximum(n, 1)
    while n.sum() < N:
        n[np.argmin(n / w)] += 1
    while n.sum() > N:
        score = np.where(n > 1, (n - 1) / w, -np.inf)
        n[np.argmax(score)] -= 1
    return n
