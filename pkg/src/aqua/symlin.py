"""Dense kernels for small symmetric matrices.

Symmetric matrices are plain ``(m, m)`` float arrays. ``vech`` stacks the
lower triangle column by column: (1,1), (2,1), ..., (m,1), (2,2), ..., (m,m).
Every routine that maps between ``vech`` space and matrices uses that order.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, NotPsd, SingularMatrix

SINGULAR_TOL = 1e-12
FACTOR_TOL = 1e-10


def as_sym(M):
    """Return ``M`` as a float array, symmetrized exactly.

    Raises ``DimensionMismatch`` for non-square input.
    """
    M = np.array(M, dtype=float, ndmin=2)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    return 0.5 * (M + M.T)


def vech_size(m):
    return m * (m + 1) // 2


@lru_cache(maxsize=64)
def _tril_index(m):
    rows, cols = [], []
    for j in range(m):
        for i in range(j, m):
            rows.append(i)
            cols.append(j)
    return np.array(rows), np.array(cols)


def vech(M):
    M = np.asarray(M, dtype=float)
    rows, cols = _tril_index(M.shape[-1])
    return M[..., rows, cols]


def unvech(v, m=None):
    v = np.asarray(v, dtype=float)
    if m is None:
        m = int(round((np.sqrt(8 * v.shape[-1] + 1) - 1) / 2))
    rows, cols = _tril_index(m)
    M = np.zeros(v.shape[:-1] + (m, m))
    M[..., rows, cols] = v
    M[..., cols, rows] = v
    return M


def vech_weights(m):
    """Weights ``w`` with ``tr(A B) == vech(A) @ (w * vech(B))`` for symmetric A, B."""
    rows, cols = _tril_index(m)
    return np.where(rows == cols, 1.0, 2.0)


def trace_vech(N):
    """``G_m^T vec(N)``, i.e. the vector ``x`` with ``tr(N M) == x @ vech(M)``."""
    N = np.asarray(N, dtype=float)
    return vech_weights(N.shape[-1]) * vech(N)


@lru_cache(maxsize=32)
def _duplication(m):
    s = vech_size(m)
    G = np.zeros((m * m, s))
    rows, cols = _tril_index(m)
    for k, (i, j) in enumerate(zip(rows, cols)):
        # vec is column stacking: entry (i, j) sits at j*m + i
        G[j * m + i, k] = 1.0
        G[i * m + j, k] = 1.0
    G.setflags(write=False)
    return G


def duplication_matrix(m):
    """0/1 matrix ``G`` of shape ``(m*m, m(m+1)/2)`` with ``vec(M) = G @ vech(M)``."""
    if m < 1:
        raise ValueError("m must be positive")
    return _duplication(int(m)).copy()


def vec(M):
    return np.asarray(M, dtype=float).reshape(-1, order="F")


def sym_eig(M):
    return np.linalg.eigh(as_sym(M))


def check_nonsingular(eigvals, tol=SINGULAR_TOL):
    lmax = np.max(np.abs(eigvals))
    lmin = np.min(eigvals)
    ratio = lmin / lmax if lmax > 0 else 0.0
    if lmax == 0 or ratio <= tol:
        raise SingularMatrix(
            f"matrix is numerically singular (eigenvalue ratio {ratio:.3g})", ratio=ratio
        )


def neg_powers(M, k, tol=SINGULAR_TOL):
    """Return ``[M^-1, ..., M^-k]`` from one symmetric eigendecomposition."""
    w, U = sym_eig(M)
    check_nonsingular(w, tol)
    out = []
    inv = 1.0 / w
    scale = np.ones_like(w)
    for _ in range(k):
        scale = scale * inv
        P = (U * scale) @ U.T
        out.append(0.5 * (P + P.T))
    return out


def kron_sandwich(A, B):
    """``G^T (A kron B) G``; the quadratic form of ``M -> tr(B M A M)`` on vech."""
    A = as_sym(A)
    B = as_sym(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"orders differ: {A.shape} vs {B.shape}")
    m = A.shape[0]
    rows, cols = _tril_index(m)
    # (A kron B)[(j*m+i), (l*m+k)] = A[j,l] * B[i,k]; G^T adds the (i,j) and (j,i) copies
    Ajl = A[np.ix_(cols, cols)]
    Ail = A[np.ix_(rows, cols)]
    Ajk = A[np.ix_(cols, rows)]
    Aik = A[np.ix_(rows, rows)]
    Bik = B[np.ix_(rows, rows)]
    Bjk = B[np.ix_(cols, rows)]
    Bil = B[np.ix_(rows, cols)]
    Bjl = B[np.ix_(cols, cols)]
    R = Ajl * Bik + Ail * Bjk + Ajk * Bil + Aik * Bjl
    diag_r = rows == cols
    R[diag_r, :] *= 0.5
    R[:, diag_r] *= 0.5
    return 0.5 * (R + R.T)


@dataclass(frozen=True)
class PsdFactor:
    C: np.ndarray
    residual: float

    @property
    def rank(self):
        return self.C.shape[1]

    @property
    def order(self):
        return self.C.shape[0]


def psd_factor(Q, tol=FACTOR_TOL, scale=None):
    """Factor an (approximately) PSD matrix as ``C C^T`` by clipped eigendecomposition.

    Eigenvalues below ``tol * lambda_max`` are dropped; an eigenvalue below
    ``-tol * lambda_max`` raises ``NotPsd``. ``scale`` overrides ``lambda_max``
    as the reference magnitude when it is larger (useful when ``Q`` is a
    difference of terms that cancel).
    """
    Q = as_sym(Q)
    w, U = np.linalg.eigh(Q)
    lmax = max(float(w[-1]), 0.0, 0.0 if scale is None else float(scale))
    if w[0] < 0 and w[0] < -tol * lmax:
        raise NotPsd(f"eigenvalue {w[0]:.3g} below -tol*lambda_max", min_eig=float(w[0]))
    keep = w > tol * lmax if lmax > 0 else np.zeros(w.shape, dtype=bool)
    C = U[:, keep] * np.sqrt(w[keep])
    resid = float(np.max(np.abs(Q - C @ C.T)))
    return PsdFactor(C=C, residual=resid)
