"""Optimal approximate designs and continuous surrogate relaxations.

Both solvers are away-step Frank-Wolfe methods driven by the LP vertex
oracle of :mod:`aqua.polytope`. The criterion solver uses golden-section
line search; the quadratic solver uses the exact step of a 1-D quadratic.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import symlin
from .criteria import phi, phi_gradient
from .errors import NotConverged, SingularMatrix, SingularStart
from .model import Design, directional_scores, info_matrix
from .polytope import lp_max

log = logging.getLogger(__name__)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class AdOptions:
    gap_tol: float = 1e-6
    max_iter: int = 5000
    seed: int = 0
    start_attempts: int = 50
    away_steps: bool = True
    line_search_iters: int = 40
    strict: bool = False


@dataclass
class AdSolution:
    design: Design
    M: np.ndarray
    value: float
    gap: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


class _ActiveSet:
    """Vertices of the current convex combination, with cached images.

    Vertices live in a preallocated buffer so that ``away`` is one
    matrix-vector product.
    """

    def __init__(self, n):
        self.V = np.empty((8, n))
        self.w = np.empty(8)
        self.count = 0
        self.keys = {}
        self.images = []

    def __len__(self):
        return self.count

    def add(self, v, image, weight):
        key = v.tobytes()
        idx = self.keys.get(key)
        if idx is not None:
            self.w[idx] += weight
            return idx
        if self.count == len(self.w):
            self.V = np.vstack([self.V, np.empty_like(self.V)])
            self.w = np.concatenate([self.w, np.empty_like(self.w)])
        idx = self.count
        self.V[idx] = v
        self.w[idx] = weight
        self.keys[key] = idx
        self.images.append(image)
        self.count += 1
        return idx

    def scale(self, factor):
        self.w[: self.count] *= factor

    def prune(self, tol=1e-14):
        w = self.w[: self.count]
        keep = np.flatnonzero(w > tol)
        if len(keep) == self.count:
            return
        k = len(keep)
        self.V[:k] = self.V[keep]
        self.w[:k] = w[keep] / w[keep].sum()
        self.images = [self.images[i] for i in keep]
        self.count = k
        self.keys = {self.V[i].tobytes(): i for i in range(k)}

    def reset(self, v, image):
        self.count = 0
        self.keys = {}
        self.images = []
        self.add(v, image, 1.0)

    def point(self):
        x = self.w[: self.count] @ self.V[: self.count]
        # round-off below zero from away steps
        return np.where((x < 0) & (x > -1e-12 * max(1.0, float(np.abs(x).max()))), 0.0, x)

    def away(self, g):
        vals = self.V[: self.count] @ g
        i = int(np.argmin(vals))
        return i, float(vals[i])


def _golden_max(f, hi, iters, f0):
    """Maximize a concave 1-D function on ``[0, hi]``; never returns a worse point than 0."""
    a, b = 0.0, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    best_x, best_f = (x1, f1) if f1 >= f2 else (x2, f2)
    fh = f(hi)
    if fh >= best_f:
        best_x, best_f = hi, fh
    if best_f < f0:
        return 0.0, f0
    return best_x, best_f


def _start_design(P, C, solver, rng, attempts):
    verts = []
    count = C.k + 1
    for attempt in range(count + attempts):
        v, _ = solver.maximize(rng.standard_normal(C.n))
        verts.append(v)
        if len(verts) < count:
            continue
        x = np.mean(verts, axis=0)
        M = info_matrix(P, x)
        w = np.linalg.eigvalsh(M)
        if w[-1] > 0 and w[0] > 1e-9 * w[-1]:
            return verts
    raise SingularStart(f"no nonsingular information matrix among {len(verts)} random vertices")


def solve_ad(P, c, C, opts=None, start=None):
    """Maximize ``Phi(M(xi))`` over the continuous relaxation of ``C``."""
    opts = opts or AdOptions()
    rng = np.random.default_rng(opts.seed)
    solver = C.solver()
    H = P.vech_rows
    m = P.m
    act = _ActiveSet(C.n)
    if start is not None:
        x0 = np.asarray(start.weights if isinstance(start, Design) else start, dtype=float)
        act.add(x0.copy(), x0 @ H, 1.0)
    else:
        verts = _start_design(P, C, solver, rng, opts.start_attempts)
        for v in verts:
            act.add(v, v @ H, 1.0 / len(verts))
    x = act.point()
    mv = x @ H

    def crit(vh):
        return phi(c, symlin.unvech(vh, m))

    val = crit(mv)
    if not np.isfinite(val) or (c.family == "positive" and val <= 0):
        raise SingularStart("start design has a singular information matrix")
    history = [val]
    converged = False
    gap = np.inf
    stalls = 0
    it = 0
    for it in range(1, opts.max_iter + 1):
        G = phi_gradient(c, symlin.unvech(mv, m))
        g = H @ symlin.trace_vech(G)
        s, _ = solver.maximize(g)
        gx = g @ x
        gap = float(g @ s - gx)
        scale = max(abs(val), 1.0) if c.family == "logdet" else max(abs(val), 1e-300)
        if gap <= opts.gap_tol * scale:
            converged = True
            break
        use_away = False
        if opts.away_steps and len(act) > 1:
            ia, ga = act.away(g)
            if gx - ga > gap:
                use_away = True
        if use_away:
            wa = act.w[ia]
            hi = wa / (1.0 - wa) if wa < 1.0 else 1e12
            dM = mv - act.images[ia]
        else:
            s_img = s @ H
            hi = 1.0
            dM = s_img - mv
        gamma, new_val = _golden_max(lambda t: crit(mv + t * dM), hi, opts.line_search_iters, val)
        if gamma <= 0.0:
            stalls += 1
            if stalls >= 3:
                log.debug("Frank-Wolfe stalled at gap %.3g", gap)
                break
            continue
        stalls = 0
        if use_away:
            act.scale(1.0 + gamma)
            act.w[ia] -= gamma
            if gamma >= hi * (1 - 1e-12):
                act.w[ia] = 0.0
            act.prune()
        else:
            if gamma >= 1.0:
                act.reset(s, s_img)
            else:
                act.scale(1.0 - gamma)
                act.add(s, s_img, gamma)
                act.prune()
        x = act.point()
        mv = x @ H
        val = crit(mv)
        history.append(val)
    M = symlin.unvech(mv, m)
    sol = AdSolution(
        design=Design(x), M=M, value=val, gap=gap, iterations=it,
        converged=converged, history=history,
    )
    if not converged and opts.strict:
        raise NotConverged(f"Frank-Wolfe stopped after {it} iterations (gap {gap:.3g})", best=sol)
    return sol


IPM_LIMIT = 5000  # free variables above which "auto" uses Frank-Wolfe


@dataclass
class QpOptions:
    """Options of the relaxed surrogate solver.

    ``method`` is ``"ipm"`` (interior point via clarabel, followed by one LP
    for the certified bound), ``"fw"`` (away-step Frank-Wolfe) or ``"auto"``
    (interior point up to ``IPM_LIMIT`` free variables, Frank-Wolfe beyond).
    """

    gap_tol: float = 1e-7
    method: str = "auto"
    max_iter: int = 20000
    away_steps: bool = True
    pairwise: bool = True
    cutoff: float | None = None


@dataclass
class RelaxResult:
    design: Design
    value: float
    upper_bound: float
    gap: float
    iterations: int
    converged: bool
    gradient: np.ndarray = field(repr=False, default=None)
    lp_state: object = field(repr=False, default=None)


def _qp_ipm(Q, C, lo, hi, tol):
    """Interior-point solution of the relaxed surrogate; ``None`` if the solver fails.

    Variables ``(xi_free, v)`` with ``v = S^T xi``; fixed variables are
    substituted out so every remaining bound has a strict interior.
    """
    import clarabel
    from scipy import sparse

    n, t = C.n, Q.t
    fixed = lo == hi
    free = np.flatnonzero(~fixed)
    xf = np.where(fixed, lo, 0.0)
    if free.size == 0:
        return xf
    nf = free.size
    A = C.A[:, free]
    b = C.b - C.A @ xf
    Sf = Q.S[free]
    v0 = Q.S.T @ xf
    blocks, rhs, cones = [], [], []
    # v - S_free^T xi_free = S_fixed^T xi_fixed
    blocks.append(sparse.hstack([sparse.csc_matrix(-Sf.T), sparse.identity(t)]))
    rhs.append(v0)
    eq = C.eq
    if eq.any():
        blocks.append(sparse.hstack([sparse.csc_matrix(A[eq]), sparse.csc_matrix((eq.sum(), t))]))
        rhs.append(b[eq])
    nz = int(t + eq.sum())
    cones.append(clarabel.ZeroConeT(nz))
    ineq = [sparse.csc_matrix(A[~eq])]
    irhs = [b[~eq]]
    up = np.isfinite(hi[free])
    low = np.isfinite(lo[free])
    eye = sparse.identity(nf, format="csr")
    ineq += [eye[up], -eye[low]]
    irhs += [hi[free][up], -lo[free][low]]
    G = sparse.vstack(ineq)
    blocks.append(sparse.hstack([G, sparse.csc_matrix((G.shape[0], t))]))
    rhs += irhs
    cones.append(clarabel.NonnegativeConeT(G.shape[0]))
    Acl = sparse.vstack(blocks).tocsc()
    bcl = np.concatenate(rhs)
    Pcl = sparse.block_diag([sparse.csc_matrix((nf, nf)), 2.0 * sparse.identity(t)]).tocsc()
    qcl = np.concatenate([-Q.h[free], np.zeros(t)])
    st = clarabel.DefaultSettings()
    st.verbose = False
    st.tol_gap_rel = st.tol_gap_abs = max(tol, 1e-10)
    st.tol_feas = 1e-10
    sol = clarabel.DefaultSolver(Pcl, qcl, Acl, bcl, cones, st).solve()
    if str(sol.status) not in ("Solved", "AlmostSolved"):
        return None
    x = xf.copy()
    x[free] = np.asarray(sol.x)[:nf]
    return np.clip(x, lo, hi)


def solve_relaxed_qp(Q, C, lower=None, upper=None, opts=None, solver=None, warm=None, start=None):
    """Maximize ``h^T xi - |S^T xi|^2`` over the relaxation of ``C`` (with bound overrides).

    The returned ``upper_bound`` is ``phi(xi) + FW gap``, which bounds the
    maximum over the relaxation (and hence over integer designs) for any
    iterate, converged or not; by concavity it stays valid for an inexact
    interior-point solution.
    """
    opts = opts or QpOptions()
    if solver is None:
        solver = C.solver(lower, upper)
    h, S = Q.h, Q.S
    g0 = h if start is None else Q.gradient(start)
    x, _ = solver.maximize(g0, warm=warm)  # also detects an empty relaxation
    if Q.t == 0:
        val = float(h @ x)
        return RelaxResult(Design(x), val, val, 0.0, 1, True, h, solver.state)
    lo = C.lower if lower is None else np.asarray(lower, dtype=float)
    hi = C.upper if upper is None else np.asarray(upper, dtype=float)
    if opts.method not in ("auto", "ipm", "fw"):
        raise ValueError(f"unknown method {opts.method!r}")
    if opts.method == "ipm" or (opts.method == "auto" and np.count_nonzero(lo < hi) <= IPM_LIMIT):
        xi = _qp_ipm(Q, C, lo, hi, opts.gap_tol)
        if xi is not None:
            v = S.T @ xi
            val = float(h @ xi - v @ v)
            g = h - 2.0 * (S @ v)
            s, _ = solver.maximize(g)
            gap = max(float(g @ s - g @ xi), 0.0)
            conv = gap <= opts.gap_tol * max(abs(val), 1e-12)
            return RelaxResult(Design(xi), val, val + gap, gap, 1, conv, g, solver.state)
        log.info("interior-point node solve failed, using Frank-Wolfe")
    act = _ActiveSet(C.n)
    v = S.T @ x
    act.add(x, (v.copy(), float(h @ x)), 1.0)
    hx = float(h @ x)
    val = hx - v @ v
    best_ub = np.inf
    gap = np.inf
    converged = False
    g = None
    it = 0
    for it in range(1, opts.max_iter + 1):
        g = h - 2.0 * (S @ v)
        s, _ = solver.maximize(g)
        gx = float(g @ x)
        gap = max(float(g @ s) - gx, 0.0)
        best_ub = min(best_ub, val + gap)
        if gap <= opts.gap_tol * max(abs(val), 1e-12):
            converged = True
            break
        if opts.cutoff is not None and best_ub <= opts.cutoff:
            break
        mode = "fw"
        if opts.away_steps and len(act) > 1:
            ia, ga = act.away(g)
            if opts.pairwise:
                mode = "pair"
            elif gx - ga > gap:
                mode = "away"
        if mode == "away":
            wa = act.w[ia]
            hi = wa / (1.0 - wa) if wa < 1.0 else 1e12
            av, ah = act.images[ia]
            dv = v - av
            dh = hx - ah
            dx = x - act.V[ia]
            gd = gx - ga
        else:
            sv = S.T @ s
            sh = float(h @ s)
            if mode == "pair":
                # move weight from the worst active vertex to the new one
                av, ah = act.images[ia]
                hi = act.w[ia]
                dv = sv - av
                dh = sh - ah
                dx = s - act.V[ia]
                gd = float(g @ s) - ga
            else:
                hi = 1.0
                dv = sv - v
                dh = sh - hx
                dx = s - x
                gd = gap
        curv = float(dv @ dv)
        gamma = hi if curv <= 0 else min(hi, gd / (2.0 * curv))
        if gamma <= 0:
            break
        if mode == "away":
            act.scale(1.0 + gamma)
            act.w[ia] -= gamma
            if gamma >= hi * (1 - 1e-12):
                act.w[ia] = 0.0
            act.prune()
        elif mode == "pair":
            act.w[ia] = 0.0 if gamma >= hi * (1 - 1e-12) else act.w[ia] - gamma
            act.add(s, (sv, sh), gamma)
            act.prune()
        else:
            if gamma >= 1.0:
                act.reset(s, (sv, sh))
            else:
                act.scale(1.0 - gamma)
                act.add(s, (sv, sh), gamma)
                act.prune()
        if it % 100 == 0 or len(act) == 1:
            x = act.point()
            v = S.T @ x
            hx = float(h @ x)
        else:
            x = x + gamma * dx
            v = v + gamma * dv
            hx = hx + gamma * dh
        val = hx - v @ v
    ub = min(best_ub, val + gap)
    x = act.point() if len(act) > 1 else x
    return RelaxResult(Design(x), float(val), float(ub), float(gap), it, converged, g, solver.state)


def equivalence_gap(P, c, xi, C):
    """Frank-Wolfe duality gap of ``c`` at ``xi`` over ``C``, on a scale-free footing.

    For ``logdet`` this is ``max_s tr(M^-1 M(s)) - m``; for the other families
    the gap is divided by ``|Phi(M(xi))|``. Zero exactly at the optimum.
    """
    w = xi.weights if isinstance(xi, Design) else np.asarray(xi, dtype=float)
    M = info_matrix(P, w)
    G = phi_gradient(c, M)  # raises SingularMatrix
    g = directional_scores(P, G)
    _, best = lp_max(g, C)
    gap = float(best - g @ w)
    if c.family == "logdet":
        return gap
    val = phi(c, M)
    if val == 0 or not np.isfinite(val):
        raise SingularMatrix("criterion value is degenerate")
    return gap / abs(val)
