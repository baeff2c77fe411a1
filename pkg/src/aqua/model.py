"""Linear models as lists of elementary information matrices."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import symlin
from .errors import DimensionMismatch, EmptyRegion, NotPsd, SingularL

PSD_TOL = 1e-9


def _clip_psd(H, tol=PSD_TOL):
    w, U = np.linalg.eigh(H)
    lmax = max(float(w[-1]), 0.0)
    if w[0] < -tol * lmax and w[0] < 0:
        raise NotPsd(f"elementary matrix has eigenvalue {w[0]:.3g}", min_eig=float(w[0]))
    if w[0] >= 0:
        return H
    w = np.clip(w, 0.0, None)
    return (U * w) @ U.T


@dataclass(frozen=True, eq=False)
class DesignProblem:
    """Design points described by their elementary information matrices.

    ``elem`` has shape ``(n, m, m)``. ``regressors`` is kept when the model
    was built from rows ``f_i`` (then ``elem[i] == outer(f_i, f_i)``) and is
    used only for reporting and file output.
    """

    elem: np.ndarray
    points: np.ndarray | None = None
    labels: tuple | None = None
    regressors: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        E = np.array(self.elem, dtype=float)
        if E.ndim != 3 or E.shape[1] != E.shape[2]:
            raise DimensionMismatch(f"elem must have shape (n, m, m), got {E.shape}")
        E = 0.5 * (E + np.transpose(E, (0, 2, 1)))
        if self.regressors is None:
            E = np.stack([_clip_psd(H) for H in E]) if len(E) else E
        E.setflags(write=False)
        object.__setattr__(self, "elem", E)
        if self.points is not None:
            pts = np.array(self.points, dtype=float)
            if pts.ndim == 1:
                pts = pts[:, None]
            if len(pts) != len(E):
                raise DimensionMismatch("points and elem have different lengths")
            object.__setattr__(self, "points", pts)
        if self.labels is not None:
            if len(self.labels) != len(E):
                raise DimensionMismatch("labels and elem have different lengths")
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def n(self):
        return self.elem.shape[0]

    @property
    def m(self):
        return self.elem.shape[1]

    @cached_property
    def vech_rows(self):
        """``(n, s)`` matrix whose i-th row is ``vech(H_i)``."""
        return symlin.vech(self.elem)

    def subset(self, idx):
        idx = np.asarray(idx)
        return DesignProblem(
            elem=self.elem[idx],
            points=None if self.points is None else self.points[idx],
            labels=None if self.labels is None else tuple(self.labels[i] for i in idx),
            regressors=None if self.regressors is None else self.regressors[idx],
        )


@dataclass(frozen=True)
class Design:
    weights: np.ndarray
    integral: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel() + 0.0  # drop negative zeros
        if np.any(w < 0):
            raise ValueError("design weights must be non-negative")
        if self.integral and np.any(np.abs(w - np.round(w)) > 1e-9):
            raise ValueError("integral design has non-integer weights")
        object.__setattr__(self, "weights", w)

    @property
    def size(self):
        return float(self.weights.sum())

    @property
    def support(self):
        return np.flatnonzero(self.weights > 0)


def _weights(d):
    return d.weights if isinstance(d, Design) else np.asarray(d, dtype=float)


def from_regressors(F, points=None, labels=None):
    F = np.array(F, dtype=float, ndmin=2)
    if F.shape[0] < 1 or F.shape[1] < 1:
        raise DimensionMismatch("regressor matrix must be non-empty")
    elem = np.einsum("ni,nj->nij", F, F)
    return DesignProblem(elem=elem, points=points, labels=labels, regressors=F)


def info_matrix(P, d):
    """``M(xi) = sum_i xi_i H_i``."""
    w = _weights(d)
    if w.shape != (P.n,):
        raise DimensionMismatch(f"design has length {w.size}, problem has n={P.n}")
    return symlin.unvech(w @ P.vech_rows, P.m)


def info_vech(P, w):
    return np.asarray(w, dtype=float) @ P.vech_rows


def directional_scores(P, G):
    """``tr(G H_i)`` for every design point."""
    return P.vech_rows @ symlin.trace_vech(G)


def moment_matrix(V, eta):
    """``L = sum_j eta_j V_j`` for a finite prediction region."""
    V = np.array(V, dtype=float)
    eta = np.array(eta, dtype=float).ravel()
    if V.ndim == 2:
        V = V[None]
    if len(V) != len(eta):
        raise DimensionMismatch("V and eta lengths differ")
    if np.any(eta < 0):
        raise ValueError("eta must be non-negative")
    if not np.any(eta > 0):
        raise EmptyRegion("all region weights are zero")
    return symlin.as_sym(np.einsum("j,jab->ab", eta, V))


def sqrt_factor(L, tol=symlin.SINGULAR_TOL):
    """Symmetric square root ``S`` with ``L = S S^T``; rejects singular ``L``."""
    L = symlin.as_sym(L)
    w, U = np.linalg.eigh(L)
    lmax = float(np.max(np.abs(w)))
    if lmax == 0 or w[0] <= tol * lmax:
        raise SingularL(f"L is not positive definite (eigenvalue ratio {w[0] / lmax if lmax else 0:.3g})")
    S = (U * np.sqrt(w)) @ U.T
    S_inv = (U / np.sqrt(w)) @ U.T
    return 0.5 * (S + S.T), 0.5 * (S_inv + S_inv.T)


def i_to_a(P, L):
    """Transform elementary matrices so A-optimality reproduces I-optimality for ``L``."""
    L = symlin.as_sym(L)
    if L.shape != (P.m, P.m):
        raise DimensionMismatch(f"L has shape {L.shape}, model has m={P.m}")
    _, S_inv = sqrt_factor(L)
    elem = np.einsum("ab,nbc,dc->nad", S_inv, P.elem, S_inv)
    F = None if P.regressors is None else P.regressors @ S_inv.T
    return DesignProblem(elem=elem, points=P.points, labels=P.labels, regressors=F)


def transform_matrix(M, L):
    """Information matrix in the transformed model, ``S^-1 M S^-T``."""
    _, S_inv = sqrt_factor(L)
    return symlin.as_sym(S_inv @ np.asarray(M, dtype=float) @ S_inv)


def uniform_moment(P):
    """``L`` for the standard I-criterion: uniform measure over the design points."""
    return moment_matrix(P.elem, np.full(P.n, 1.0 / P.n))
