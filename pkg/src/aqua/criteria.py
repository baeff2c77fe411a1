"""Kiefer's Phi_p criteria, their log-det and blended versions, and I-optimality."""

from dataclasses import dataclass

import numpy as np

from . import symlin
from .errors import SingularMatrix, UndefinedEfficiency

FAMILIES = ("positive", "negative", "blend", "logdet", "I")


@dataclass(frozen=True, eq=False)
class Criterion:
    """A concave information criterion.

    ``family`` is one of ``positive``, ``negative``, ``blend``, ``logdet`` or
    ``I``. ``p`` is a non-negative integer (0 is D, 1 is A); it is ignored for
    ``logdet`` and ``I``. ``gamma`` mixes the two versions for ``blend``.
    ``L`` is the prediction moment matrix of the ``I`` criterion.
    """

    family: str = "positive"
    p: int = 0
    gamma: float = 0.0
    L: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown criterion family {self.family!r}")
        if int(self.p) != self.p or self.p < 0:
            raise ValueError("p must be a non-negative integer")
        object.__setattr__(self, "p", int(self.p))
        if not -1.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [-1, 1]")
        if self.family == "I":
            if self.L is None:
                raise ValueError("I criterion needs a moment matrix L")
            L = symlin.as_sym(self.L)
            w = np.linalg.eigvalsh(L)
            if w[0] <= symlin.SINGULAR_TOL * abs(w[-1]):
                raise ValueError("L must be positive definite")
            object.__setattr__(self, "L", L)

    @property
    def name(self):
        if self.family == "logdet":
            return "logdet"
        if self.family == "I":
            return "I"
        letter = {0: "D", 1: "A"}.get(self.p, f"phi{self.p}")
        if self.family == "blend":
            return f"{letter}(gamma={self.gamma:g})"
        return f"{letter}{'+' if self.family == 'positive' else '-'}"

    @classmethod
    def D(cls, version="positive"):
        return cls(family=version, p=0)

    @classmethod
    def A(cls, version="positive"):
        return cls(family=version, p=1)


def _eig(M):
    return np.linalg.eigvalsh(symlin.as_sym(M))


def _is_singular(w):
    lmax = np.max(np.abs(w)) if w.size else 0.0
    return lmax == 0 or w[0] <= symlin.SINGULAR_TOL * lmax


def _phi_pm(w, p, m):
    """(positive, negative) values from eigenvalues of a nonsingular matrix."""
    if p == 0:
        logd = float(np.sum(np.log(w))) / m
        return np.exp(logd), -np.exp(-logd)
    # tr(M^-p)/m, computed on a scale that avoids overflow for small eigenvalues
    lmin = w[0]
    t = np.mean((lmin / w) ** p)
    plus = lmin * t ** (-1.0 / p)
    return plus, -1.0 / plus


def phi(c, M):
    """Criterion value; singular matrices map to 0 (positive) or -inf."""
    w = _eig(M)
    m = len(w)
    singular = _is_singular(w)
    fam = c.family
    if fam == "logdet":
        return -np.inf if singular else float(np.sum(np.log(w)))
    if fam == "I":
        if singular:
            return -np.inf
        return -float(np.trace(np.linalg.solve(symlin.as_sym(M), c.L)))
    if singular:
        plus, minus = 0.0, -np.inf
    else:
        plus, minus = _phi_pm(w, c.p, m)
    if fam == "positive":
        return float(plus)
    if fam == "negative":
        return float(minus)
    # blend with the convention 0 * inf = 0
    wp, wm = (1 + c.gamma) / 2, (1 - c.gamma) / 2
    total = wp * plus
    if wm != 0:
        total = total + wm * minus
    return float(total)


def phi_plus_equivalent(c, M):
    """Value on a positive, positively homogeneous scale inducing the same order."""
    w = _eig(M)
    m = len(w)
    if _is_singular(w):
        return 0.0
    if c.family == "logdet":
        return float(np.exp(np.sum(np.log(w)) / m))
    if c.family == "I":
        return 1.0 / float(np.trace(np.linalg.solve(symlin.as_sym(M), c.L)))
    return float(_phi_pm(w, c.p, m)[0])


def phi_gradient(c, M):
    """Gradient with respect to ``M`` (a symmetric matrix)."""
    M = symlin.as_sym(M)
    w, U = np.linalg.eigh(M)
    if _is_singular(w):
        raise SingularMatrix("gradient undefined at a singular matrix", ratio=w[0] / np.max(np.abs(w)))
    m = len(w)
    if c.family == "logdet":
        return symlin.as_sym((U / w) @ U.T)
    if c.family == "I":
        Minv = (U / w) @ U.T
        return symlin.as_sym(Minv @ c.L @ Minv)
    p = c.p
    # grad Phi^+ = Phi^+ / tr(M^-p) * M^-p-1 ; grad Phi^- = -Phi^- / tr(M^-p) * M^-p-1
    # both equal (scalar) * U diag(w^-p-1) U^T; compute the scalars in scaled form
    lmin = w[0]
    r = lmin / w
    mean_r = np.mean(r**p)
    plus, minus = _phi_pm(w, p, m)
    D = (U * (r ** (p + 1))) @ U.T  # lmin^(p+1) M^-p-1
    # Phi^+/tr(M^-p) = plus / (m * mean_r * lmin^-p)
    coef_plus = plus / (m * mean_r) / lmin
    coef_minus = -minus / (m * mean_r) / lmin
    if c.family == "positive":
        G = coef_plus * D
    elif c.family == "negative":
        G = coef_minus * D
    else:
        G = ((1 + c.gamma) / 2 * coef_plus + (1 - c.gamma) / 2 * coef_minus) * D
    return symlin.as_sym(G)


def efficiency(c, M, Mstar):
    """Efficiency of ``M`` relative to ``Mstar`` on the positive (homogeneous) scale."""
    ref = phi_plus_equivalent(c, Mstar)
    if not ref > 0:
        raise UndefinedEfficiency("reference matrix has zero criterion value")
    return phi_plus_equivalent(c, M) / ref
