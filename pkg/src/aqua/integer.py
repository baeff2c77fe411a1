"""Integer maximization of the quadratic surrogate.

Best-first branch-and-bound on concave-QP relaxations, a rounding-and-repair
heuristic for incumbents, and a constraint-respecting exchange heuristic.
"""

import heapq
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .approx import QpOptions, solve_relaxed_qp
from .errors import Infeasible, InfeasibleStart, ResourceExhausted
from .model import Design
from .polytope import feasible, violation

log = logging.getLogger(__name__)

INT_TOL = 1e-6


# ----------------------------------------------------------------------------
# rounding


def round_incumbent(xi_rel, C, gradient=None, max_moves=None):
    """Floor, then repair by greedy unit moves. Returns an integral ``Design`` or None.

    Each repair move is the +/-1 change that most reduces total row
    violation; ties go to the variable whose relaxed value is farthest
    beyond its current integer value, then to the better gradient entry.
    """
    x = np.asarray(xi_rel.weights if isinstance(xi_rel, Design) else xi_rel, dtype=float)
    isint = C.integer
    w = x.copy()
    w[isint] = np.floor(x[isint] + 1e-9)
    lo = np.where(isint, np.ceil(C.lower - 1e-9), C.lower)
    hi = np.where(isint, np.floor(C.upper + 1e-9), C.upper)
    w = np.clip(w, lo, hi)
    if C.k == 0:
        return Design(w, integral=bool(isint.all())) if feasible(w, C, integral=True) else None
    A, b, eq = C.A, C.b, C.eq
    tol = 1e-9 * np.maximum(1.0, np.abs(b))
    g = np.zeros(C.n) if gradient is None else np.asarray(gradient, dtype=float)
    gscale = max(float(np.max(np.abs(g))), 1e-300)
    r = A @ w - b
    if max_moves is None:
        max_moves = int(4 * (np.sum(np.abs(x - w)) + C.k)) + 100

    def row_viol(rr, e=eq, t=tol):
        return np.where(e, np.maximum(np.abs(rr) - t, 0.0), np.maximum(rr - t, 0.0))

    # nonzeros of A by column: the change of total violation for a unit move
    # on column j only involves the rows that column touches
    col, row = np.nonzero(A.T)
    val = A[row, col]
    eq_nz, tol_nz = eq[row], tol[row]
    movable = isint & (lo < hi)
    cur = row_viol(r)
    for _ in range(max_moves):
        if not np.any(cur > 0):
            break
        base = cur[row]
        up = np.bincount(col, row_viol(r[row] + val, eq_nz, tol_nz) - base, minlength=C.n)
        dn = np.bincount(col, row_viol(r[row] - val, eq_nz, tol_nz) - base, minlength=C.n)
        d_up = np.where(movable & (w + 1 <= hi), up, np.inf)
        d_dn = np.where(movable & (w - 1 >= lo), dn, np.inf)
        best = min(d_up.min(), d_dn.min())
        if not best < -1e-12:
            return None
        tie = 1e-12 * max(1.0, abs(best))
        sec_up = np.where(d_up <= best + tie, (x - w) + 1e-3 * g / gscale, -np.inf)
        sec_dn = np.where(d_dn <= best + tie, (w - x) - 1e-3 * g / gscale, -np.inf)
        ju, jd = int(np.argmax(sec_up)), int(np.argmax(sec_dn))
        if sec_up[ju] >= sec_dn[jd]:
            w[ju] += 1
            r = r + A[:, ju]
        else:
            w[jd] -= 1
            r = r - A[:, jd]
        cur = row_viol(r)
    if feasible(w, C, integral=True):
        return Design(w, integral=bool(isint.all()))
    return None


# ----------------------------------------------------------------------------
# exchange heuristic


@dataclass
class KlOptions:
    K: int = 16
    L: int = 16
    max_moves: int = 100000
    match_equalities: bool = True


def _equality_classes(C):
    """Group variables whose columns agree on every equality row."""
    if not C.eq.any():
        return None
    cols = C.A[C.eq].T
    _, inv = np.unique(cols, axis=0, return_inverse=True)
    inv = np.asarray(inv).ravel()
    order = np.argsort(inv, kind="stable")
    bounds = np.flatnonzero(np.diff(inv[order])) + 1
    groups = np.split(order, bounds)
    return inv, [groups[i] for i in range(len(groups))]


def kl_exchange(Q, C, start, opts=None, trace=None):
    """Local search by single-point exchanges, additions and removals.

    Exchange candidates are the ``opts.K`` points with the largest gradient
    entries that can gain a trial, crossed with the ``opts.L`` points with
    the smallest entries that can lose one. With ``match_equalities`` every
    point sharing a loser's equality-row pattern is also tried, so exchanges
    that keep equality rows satisfied are never missed. Only improving
    moves that keep the design in ``C`` are accepted, so the sequence of
    surrogate values is strictly increasing; ``trace`` (a list) receives it.
    """
    opts = opts or KlOptions()
    w0 = np.asarray(start.weights if isinstance(start, Design) else start, dtype=float)
    if not feasible(w0, C, integral=True):
        raise InfeasibleStart("exchange start is not a feasible integral design")
    st = Q.exchange_state(w0)
    S, h = Q.S, Q.h
    rn = st.row_norms
    A, b, eq = C.A, C.b, C.eq
    Aext = np.hstack([A, np.zeros((C.k, 1))])  # column -1 is "no point"
    Sext = np.vstack([S, np.zeros((1, Q.t))])
    lo, hi = C.lower, C.upper
    movable = C.integer
    lhs = A @ st.xi
    tol = 1e-9 * np.maximum(1.0, np.abs(b))
    classes = _equality_classes(C) if opts.match_equalities else None
    has_ub = bool((~eq).any())
    if trace is not None:
        trace.append(st.value)
    scale = max(1.0, abs(st.value))
    for _ in range(opts.max_moves):
        xi = st.xi
        g = h - 2.0 * (S @ st.v)
        can_up = movable & (xi + 1 <= hi + 1e-9)
        can_dn = movable & (xi - 1 >= lo - 1e-9)
        up_all = np.flatnonzero(can_up)
        dn_all = np.flatnonzero(can_dn)
        up_idx, dn_idx = up_all, dn_all
        if len(up_idx) > opts.K:
            up_idx = up_idx[np.argpartition(-g[up_idx], opts.K)[: opts.K]]
        if len(dn_idx) > opts.L:
            dn_idx = dn_idx[np.argpartition(g[dn_idx], opts.L)[: opts.L]]
        ls_parts, ks_parts = [], []
        if len(up_idx) and len(dn_idx):
            ls, ks = np.meshgrid(up_idx, dn_idx, indexing="ij")
            ls_parts.append(ls.ravel())
            ks_parts.append(ks.ravel())
            if classes is not None:
                inv, groups = classes
                for k in dn_idx:
                    grp = groups[inv[k]]
                    grp = grp[can_up[grp]]
                    ls_parts.append(grp)
                    ks_parts.append(np.full(len(grp), k))
        if has_ub:
            ls_parts += [up_idx, np.full(len(dn_idx), -1)]
            ks_parts += [np.full(len(up_idx), -1), dn_idx]
        if not ls_parts:
            break
        ls = np.concatenate(ls_parts).astype(int)
        ks = np.concatenate(ks_parts).astype(int)
        keep = ls != ks
        ls, ks = ls[keep], ks[keep]
        gext = np.append(g, 0.0)
        rext = np.append(rn, 0.0)
        d = gext[ls] - gext[ks] - rext[ls] - rext[ks] + 2.0 * np.einsum("ij,ij->i", Sext[ls], Sext[ks])
        good = d > 1e-12 * scale
        if not good.any():
            break
        ls, ks, d = ls[good], ks[good], d[good]
        new = lhs[:, None] + Aext[:, ls] - Aext[:, ks]
        ok = ~np.any(np.where(eq[:, None], np.abs(new - b[:, None]) > tol[:, None],
                              new - b[:, None] > tol[:, None]), axis=0)
        if not ok.any():
            break
        i = int(np.flatnonzero(ok)[np.argmax(d[ok])])
        l, k = int(ls[i]), int(ks[i])
        if l >= 0 and k >= 0:
            st.apply(l, k)
        elif l >= 0:
            st.add(l, 1.0)
        else:
            st.add(k, -1.0)
        lhs = new[:, i]
        if trace is not None:
            trace.append(st.value)
    st.resync()
    return Design(st.xi.copy(), integral=True)


# ----------------------------------------------------------------------------
# branch and bound


@dataclass
class BnbOptions:
    gap: float = 1e-6
    node_cap: int = 100000
    time_cap: float | None = None
    threads: int = 1
    kl: KlOptions = field(default_factory=KlOptions)
    qp: QpOptions = field(default_factory=QpOptions)
    raise_on_cap: bool = False
    dive_every: int = 50  # run the diving heuristic at the root and every this many nodes (0: never)


@dataclass
class SolveReport:
    design: Design
    value: float
    upper_bound: float
    gap: float
    nodes: int
    improvements: int
    wall_time: float
    termination: str
    incumbents: list = field(default_factory=list, repr=False)


@dataclass
class BnbNode:
    lower: np.ndarray
    upper: np.ndarray
    bound: float
    depth: int
    parent: int
    id: int
    xi: np.ndarray = field(repr=False, default=None)
    grad: np.ndarray = field(repr=False, default=None)
    lp_state: object = field(repr=False, default=None)

    def key(self):
        return (-self.bound, -self.depth, self.id)


@dataclass
class _NodeRelax:
    """Adapter exposing a node's stored relaxation like a ``RelaxResult``."""

    node: BnbNode

    @property
    def design(self):
        return Design(self.node.xi)

    @property
    def lp_state(self):
        return self.node.lp_state


def _is_integral(x, C):
    frac = np.abs(x - np.round(x))
    return not np.any(C.integer & (frac > INT_TOL))


def _branch_variable(node, C, h):
    x = node.xi
    frac = np.abs(x - np.round(x))
    cand = C.integer & (frac > INT_TOL)
    if cand.any():
        dist = np.where(cand, np.minimum(x - np.floor(x), np.ceil(x) - x), -1.0)
        best = dist.max()
        ties = np.flatnonzero(dist >= best - 1e-12)
        j = int(ties[np.argmax(np.abs(h[ties]))])
        return j, float(np.floor(x[j])), float(np.ceil(x[j]))
    # integral relaxed point that did not close the node: split at its value
    free = np.flatnonzero(C.integer & (node.upper > node.lower))
    if not len(free):
        return None
    g = node.grad if node.grad is not None else h
    j = int(free[np.argmax(np.abs(g[free]))])
    v = float(np.round(x[j]))
    if v + 1 <= node.upper[j]:
        return j, v, v + 1
    return j, v - 1, v


def branch_and_bound(Q, C, opts=None, start=None):
    """Maximize ``phi`` over the integer points of ``C``."""
    opts = opts or BnbOptions()
    t0 = time.perf_counter()
    qp = replace(opts.qp, gap_tol=min(opts.qp.gap_tol, opts.gap / 10), cutoff=None)
    inc = {"x": None, "val": -np.inf, "improvements": 0}
    visited = []

    def abs_tol(val):
        return opts.gap * max(abs(val), 1e-12)

    def offer(w):
        if w is None:
            return
        w = np.asarray(w.weights if isinstance(w, Design) else w, dtype=float)
        w = np.where(C.integer, np.round(w), w)
        if not feasible(w, C, integral=True):
            return
        val = float(Q.phi(w))
        if val > inc["val"] + 1e-12 * max(1.0, abs(val)):
            improved = kl_exchange(Q, C, w, opts.kl).weights
            val2 = float(Q.phi(improved))
            if val2 > val:
                w, val = improved, val2
            if val > inc["val"]:
                inc["x"], inc["val"] = w.copy(), val
                inc["improvements"] += 1
                visited.append((w.copy(), val))

    def heuristics(res, solver):
        offer(round_incumbent(res.design, C, res.gradient))
        if res.gradient is not None:
            try:
                vert, _ = solver.maximize(res.gradient)
                offer(round_incumbent(vert, C, res.gradient))
            except Exception:  # a failed heuristic never stops the search
                log.debug("vertex rounding failed", exc_info=True)

    if start is not None:
        offer(start)

    def dive(lower, upper, res):
        """Fix the most nearly-integral-from-below variable up, re-solve, repeat."""
        lower, upper = lower.copy(), upper.copy()
        for _ in range(4 * C.n):
            x = res.design.weights
            frac = x - np.floor(x)
            cand = C.integer & (frac > INT_TOL) & (frac < 1 - INT_TOL)
            if not cand.any():
                offer(x)
                return
            j = int(np.flatnonzero(cand)[np.argmax(frac[cand])])
            nxt = None
            for side in ("up", "down"):
                lo, up = lower.copy(), upper.copy()
                if side == "up":
                    lo[j] = np.ceil(x[j])
                else:
                    up[j] = np.floor(x[j])
                nxt, _ = relax(lo, up, res.lp_state, x, None)
                if nxt is not None:
                    lower, upper = lo, up
                    break
            if nxt is None:
                return
            res = nxt

    def relax(lower, upper, warm, xstart, cutoff):
        solver = C.solver(lower, upper)
        q = replace(qp, cutoff=cutoff)
        try:
            res = solve_relaxed_qp(Q, C, lower, upper, q, solver=solver, warm=warm, start=xstart)
        except Infeasible:
            return None, None
        return res, solver

    root_res, root_solver = relax(C.lower.copy(), C.upper.copy(), None, None, None)
    if root_res is None:
        raise Infeasible("relaxation is infeasible")
    heuristics(root_res, root_solver)
    if opts.dive_every:
        dive(C.lower, C.upper, root_res)
    counter = 0
    root = BnbNode(C.lower.copy(), C.upper.copy(), root_res.upper_bound, 0, -1, counter,
                   root_res.design.weights, root_res.gradient, root_res.lp_state)
    heap = [(root.key(), root)]
    nodes = 0
    pruned_ub = -np.inf  # largest bound among discarded nodes
    termination = "optimal"
    pool = ThreadPoolExecutor(opts.threads) if opts.threads > 1 else None
    try:
        while heap:
            top = heap[0][1].bound
            gub = max(top, inc["val"])
            if inc["x"] is not None and gub - inc["val"] <= abs_tol(gub):
                termination = "optimal" if gub <= inc["val"] + 1e-12 * max(1, abs(gub)) else "gap_reached"
                break
            if nodes >= opts.node_cap:
                termination = "node_cap"
                break
            if opts.time_cap is not None and time.perf_counter() - t0 > opts.time_cap:
                termination = "time_cap"
                break
            _, node = heapq.heappop(heap)
            if inc["x"] is not None and node.bound <= inc["val"] + abs_tol(inc["val"]):
                pruned_ub = max(pruned_ub, node.bound)
                continue
            nodes += 1
            if opts.dive_every and nodes % opts.dive_every == 0:
                dive(node.lower, node.upper, _NodeRelax(node))
            if _is_integral(node.xi, C):
                offer(node.xi)
                if node.bound - float(Q.phi(np.round(node.xi))) <= abs_tol(node.bound):
                    pruned_ub = max(pruned_ub, node.bound)
                    continue
            br = _branch_variable(node, C, Q.h)
            if br is None:
                continue
            j, down, up = br
            children = []
            if down >= node.lower[j]:
                u = node.upper.copy()
                u[j] = down
                children.append((node.lower, u))
            if up <= node.upper[j]:
                lo = node.lower.copy()
                lo[j] = up
                children.append((lo, node.upper))
            cutoff = inc["val"] + abs_tol(inc["val"]) if inc["x"] is not None else None
            jobs = [(lo, u, node.lp_state, node.xi, cutoff) for lo, u in children]
            results = list(pool.map(lambda a: relax(*a), jobs)) if pool else [relax(*a) for a in jobs]
            for (lo, u), (res, solver) in zip(children, results):
                if res is None:
                    continue
                bound = min(node.bound, res.upper_bound)
                if inc["x"] is None or bound > inc["val"] + abs_tol(inc["val"]):
                    heuristics(res, solver)
                if inc["x"] is not None and bound <= inc["val"] + abs_tol(inc["val"]):
                    pruned_ub = max(pruned_ub, bound)
                    continue
                counter += 1
                child = BnbNode(lo, u, bound, node.depth + 1, node.id, counter,
                                res.design.weights, res.gradient, res.lp_state)
                heapq.heappush(heap, (child.key(), child))
    finally:
        if pool:
            pool.shutdown()
    if inc["x"] is None:
        if termination in ("node_cap", "time_cap"):
            raise ResourceExhausted("no integer-feasible design found before the cap")
        raise Infeasible("no integer-feasible design exists")
    ub = max(inc["val"], pruned_ub, heap[0][1].bound if heap else -np.inf)
    gap = (ub - inc["val"]) / max(abs(ub), 1e-12)
    report = SolveReport(
        design=Design(inc["x"], integral=bool(C.integer.all())), value=inc["val"], upper_bound=ub,
        gap=gap, nodes=nodes, improvements=inc["improvements"],
        wall_time=time.perf_counter() - t0, termination=termination, incumbents=visited,
    )
    if opts.raise_on_cap and termination in ("node_cap", "time_cap"):
        raise ResourceExhausted(f"branch-and-bound stopped by {termination}", report=report)
    return report
