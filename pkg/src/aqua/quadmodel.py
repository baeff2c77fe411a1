"""Quadratic surrogates of Kiefer's criteria in low-rank form.

Around an anchor ``M*`` the second-order Taylor polynomial of a criterion is
written as ``a * (h~ . vech(M) - vech(M)^T Q~ vech(M)) + c``. With
``H`` the ``n x s`` matrix of ``vech(H_i)`` rows and ``Q~ = C C^T`` this
becomes ``a * phi(xi) + c`` where ``phi(xi) = h^T xi - |S^T xi|^2``,
``h = H h~`` and ``S = H C``. The ``n x n`` matrix ``S S^T`` is never formed
outside the ``q_entry`` oracle.
"""

from dataclasses import dataclass, field

import numpy as np

from . import symlin
from .criteria import Criterion, phi
from .errors import DimensionMismatch, EmptyPoint
from .model import Design, DesignProblem, i_to_a, transform_matrix


def f_pair(Mstar, Hi, Hj, p):
    """``sum_{r=1}^{p+1} tr(M*^-r H_i M*^(r-p-2) H_j)``."""
    pw = symlin.neg_powers(Mstar, p + 1)
    Hi = np.asarray(Hi, dtype=float)
    Hj = np.asarray(Hj, dtype=float)
    total = 0.0
    for r in range(1, p + 2):
        total += np.trace(pw[r - 1] @ Hi @ pw[p + 1 - r] @ Hj)
    return float(total)


def gamma_d(Mstar):
    """Blend weight at which the D-criterion blend matches log det around ``Mstar``."""
    w = np.linalg.eigvalsh(symlin.as_sym(Mstar))
    symlin.check_nonsingular(w)
    d2 = np.exp(2.0 * np.mean(np.log(w)))
    return float((1.0 - d2) / (1.0 + d2))


def _version_parts(Mstar, p):
    """Scales, offsets and vech-space matrices of both versions at ``Mstar``."""
    m = Mstar.shape[0]
    pw = symlin.neg_powers(Mstar, p + 1)
    T = float(np.trace(pw[p - 1])) if p > 0 else float(m)
    h_t = symlin.trace_vech(pw[p])
    K = np.zeros((len(h_t), len(h_t)))
    for r in range(1, p + 2):
        K += symlin.kron_sandwich(pw[p + 1 - r], pw[r - 1])
    outer = np.outer(h_t, h_t) / T
    Qp = -(1 + p) / 2 * outer + 0.5 * K
    Qm = (1 - p) / 6 * outer + K / 6
    phi_plus = phi(Criterion("positive", p), Mstar)
    phi_minus = phi(Criterion("negative", p), Mstar)
    a_plus = phi_plus / T
    a_minus = -3.0 * phi_minus / T
    c_minus = 3.0 * phi_minus
    # magnitude of the cancelling terms, for the PSD cut-off
    ref = float(np.max(np.abs(np.linalg.eigvalsh(K)))) + float(np.max(np.abs(np.diag(outer))))
    return dict(h=h_t, Qp=Qp, Qm=Qm, a_plus=a_plus, a_minus=a_minus, c_minus=c_minus, ref=ref)


@dataclass(frozen=True, eq=False)
class QuadModel:
    """``phi(xi) = h^T xi - |S^T xi|^2``; ``a * phi + c`` approximates the criterion."""

    anchor: np.ndarray
    a: float
    c: float
    h: np.ndarray
    S: np.ndarray
    criterion: Criterion
    h_vech: np.ndarray = field(repr=False, default=None)
    Q_vech: np.ndarray = field(repr=False, default=None)
    C_vech: np.ndarray = field(repr=False, default=None)
    gamma: float | None = None

    @property
    def n(self):
        return self.h.shape[0]

    @property
    def t(self):
        return self.S.shape[1]

    @property
    def m(self):
        return self.anchor.shape[0]

    def phi(self, xi):
        w = xi.weights if isinstance(xi, Design) else np.asarray(xi, dtype=float)
        if w.shape[-1] != self.n:
            raise DimensionMismatch(f"design has length {w.shape[-1]}, model has n={self.n}")
        v = w @ self.S
        return w @ self.h - np.sum(v * v, axis=-1)

    def value(self, xi):
        """Approximate criterion value ``a * phi + c``."""
        return self.a * self.phi(xi) + self.c

    def gradient(self, xi):
        w = xi.weights if isinstance(xi, Design) else np.asarray(xi, dtype=float)
        return self.h - 2.0 * (self.S @ (self.S.T @ w))

    def exchange_state(self, xi):
        return ExchangeState(self, xi)


def build(P, c, Mstar, tol=symlin.FACTOR_TOL):
    """Build the low-rank quadratic surrogate of criterion ``c`` around ``Mstar``."""
    Mstar = symlin.as_sym(Mstar)
    if Mstar.shape != (P.m, P.m):
        raise DimensionMismatch(f"anchor has shape {Mstar.shape}, model has m={P.m}")
    if c.family == "I":
        Pt = i_to_a(P, c.L)
        inner = build(Pt, Criterion("negative", 1), transform_matrix(Mstar, c.L), tol)
        # Phi_I(M) = m * Phi_1^-(S^-1 M S^-T)
        m = P.m
        return QuadModel(
            anchor=Mstar, a=m * inner.a, c=m * inner.c, h=inner.h, S=inner.S,
            criterion=c, h_vech=inner.h_vech, Q_vech=inner.Q_vech, C_vech=inner.C_vech,
        )
    p = c.p
    gamma = None
    if c.family == "logdet":
        p = 0
        gamma = gamma_d(Mstar)
    elif c.family == "blend":
        gamma = c.gamma
    parts = _version_parts(Mstar, p)
    if c.family == "positive":
        a, off, Q = parts["a_plus"], 0.0, parts["Qp"]
    elif c.family == "negative":
        a, off, Q = parts["a_minus"], parts["c_minus"], parts["Qm"]
    else:
        wp = (1 + gamma) / 2 * parts["a_plus"]
        wm = (1 - gamma) / 2 * parts["a_minus"]
        a = wp + wm
        Q = (wp * parts["Qp"] + wm * parts["Qm"]) / a
        off = (1 - gamma) / 2 * parts["c_minus"]
    if c.family == "logdet":
        # same h~ and Q~; rescale so a*phi + c is the Taylor polynomial of log det
        a = 2.0
        w = np.linalg.eigvalsh(Mstar)
        off = float(np.sum(np.log(w))) - 1.5 * P.m
    fac = symlin.psd_factor(Q, tol, scale=parts["ref"])
    H = P.vech_rows
    h = H @ parts["h"]
    S = H @ fac.C
    return QuadModel(
        anchor=Mstar, a=float(a), c=float(off), h=h, S=S, criterion=c,
        h_vech=parts["h"], Q_vech=Q, C_vech=fac.C, gamma=gamma,
    )


def q_entry(P, c, Mstar, i, j):
    """Entry ``Q_ij`` computed elementwise; a test oracle for ``S S^T``.

    Uses the sign convention under which ``phi`` is concave and reproduces
    the Taylor polynomial.
    """
    Mstar = symlin.as_sym(Mstar)
    if c.family == "I":
        Pt = i_to_a(P, c.L)
        return q_entry(Pt, Criterion("negative", 1), transform_matrix(Mstar, c.L), i, j)
    Hi, Hj = P.elem[i], P.elem[j]
    p = 0 if c.family == "logdet" else c.p
    pw = symlin.neg_powers(Mstar, p + 1)
    T = float(np.trace(pw[p - 1])) if p > 0 else float(Mstar.shape[0])
    hi = float(np.trace(pw[p] @ Hi))
    hj = float(np.trace(pw[p] @ Hj))
    F = f_pair(Mstar, Hi, Hj, p)
    q_plus = 0.5 * F - (p + 1) / 2 * hi * hj / T
    q_minus = F / 6 + (1 - p) / 6 * hi * hj / T
    if c.family == "positive":
        return q_plus
    if c.family == "negative":
        return q_minus
    gamma = gamma_d(Mstar) if c.family == "logdet" else c.gamma
    parts = _version_parts(Mstar, p)
    wp = (1 + gamma) / 2 * parts["a_plus"]
    wm = (1 - gamma) / 2 * parts["a_minus"]
    return (wp * q_plus + wm * q_minus) / (wp + wm)


def phi_quad(Q, xi):
    return float(Q.phi(xi))


class ExchangeState:
    """Cached ``S^T xi`` and row norms for O(t) exchange updates."""

    def __init__(self, Q, xi):
        w = xi.weights if isinstance(xi, Design) else np.asarray(xi, dtype=float)
        if w.shape != (Q.n,):
            raise DimensionMismatch(f"design has length {w.size}, model has n={Q.n}")
        self.Q = Q
        self.xi = w.astype(float).copy()
        self.v = Q.S.T @ self.xi
        self.row_norms = np.einsum("ij,ij->i", Q.S, Q.S)
        self.value = float(self.xi @ Q.h - self.v @ self.v)

    def delta(self, l, k):
        """``phi(xi + e_l - e_k) - phi(xi)``."""
        if l == k:
            return 0.0
        S = self.Q.S
        sl, sk = S[l], S[k]
        return float(
            self.Q.h[l] - self.Q.h[k] - 2.0 * self.v @ (sl - sk)
            - self.row_norms[l] + 2.0 * sl @ sk - self.row_norms[k]
        )

    def apply(self, l, k):
        if self.xi[k] < 1:
            raise EmptyPoint(f"point {k} has weight {self.xi[k]} < 1")
        d = self.delta(l, k)
        if l != k:
            self.xi[l] += 1
            self.xi[k] -= 1
            self.v += self.Q.S[l] - self.Q.S[k]
            self.value += d
        return d

    def add(self, l, step=1.0):
        """Change weight ``l`` by ``step``; returns the change of ``phi``."""
        sl = self.Q.S[l]
        d = float(step * (self.Q.h[l] - 2.0 * self.v @ sl) - step * step * self.row_norms[l])
        self.xi[l] += step
        self.v += step * sl
        self.value += d
        return d

    def resync(self):
        self.v = self.Q.S.T @ self.xi
        self.value = float(self.xi @ self.Q.h - self.v @ self.v)


def exchange_delta(st, l, k):
    """Apply the exchange ``xi + e_l - e_k`` in place; returns ``(delta, st)``."""
    d = st.apply(l, k)
    return d, st
