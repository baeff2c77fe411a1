"""The AQuA pipeline: anchor, surrogate, integer solve, re-scoring.

``aqua_solve`` runs the pipeline once around a given or computed anchor.
``iterative_aqua`` re-anchors at the information matrix of each result,
starting from a rough anchor computed on a random subsample of points.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .approx import AdOptions, QpOptions, solve_ad, solve_relaxed_qp
from .criteria import efficiency, phi
from .errors import Infeasible, SingularMatrix, SingularStart, UndefinedEfficiency
from .integer import BnbOptions, branch_and_bound
from .model import info_matrix
from .quadmodel import build
from .symlin import unvech

log = logging.getLogger(__name__)


@dataclass
class AquaOptions:
    anchor: np.ndarray | None = None
    ad: AdOptions = field(default_factory=AdOptions)
    bnb: BnbOptions = field(default_factory=BnbOptions)


@dataclass
class AquaResult:
    """Outcome of an AQuA run.

    ``efficiency`` is ``Phi(M(xi)) / Phi(M*)`` on the positive scale, where
    ``M*`` is the approximate optimum; it is ``None`` when no approximate
    optimum is known (iterative mode without a reference).
    """

    design: object
    M: np.ndarray
    value: float
    surrogate_value: float
    anchor: np.ndarray
    anchor_value: float
    efficiency: float | None
    report: object = None
    history: list = field(default_factory=list)
    iterations: int = 1
    stop_reason: str = "single"


def _efficiency(c, M, Mstar):
    try:
        return float(efficiency(c, M, Mstar))
    except UndefinedEfficiency:
        return 0.0


def aqua_solve(P, c, C, opts=None):
    """Anchor at the optimal approximate design (or ``opts.anchor``) and solve exactly."""
    opts = opts or AquaOptions()
    if opts.anchor is None:
        anchor = solve_ad(P, c, C, opts.ad).M
    else:
        anchor = np.asarray(opts.anchor, dtype=float)
    Q = build(P, c, anchor)
    report = branch_and_bound(Q, C, opts.bnb)
    M = info_matrix(P, report.design.weights)
    return AquaResult(
        design=report.design, M=M, value=float(phi(c, M)), surrogate_value=report.value,
        anchor=anchor, anchor_value=float(phi(c, anchor)),
        efficiency=_efficiency(c, M, anchor), report=report,
    )


@dataclass
class IterOptions:
    subsample_size: int = 1500
    max_iter: int = 10
    relax_intermediate: bool = False
    anchor_tol: float = 1e-9
    seed: int = 0
    reference: np.ndarray | None = None  # optional approximate optimum for efficiency
    ad: AdOptions = field(default_factory=AdOptions)
    bnb: BnbOptions = field(default_factory=BnbOptions)


def _rough_anchor(P, c, C, opts, rng):
    """Approximate optimum on a random subsample of the points."""
    n = P.n
    k = min(opts.subsample_size, n)
    idx = np.sort(rng.choice(n, size=k, replace=False))
    ad = AdOptions(**{**opts.ad.__dict__, "seed": int(rng.integers(2**31))})
    try:
        return solve_ad(P.subset(idx), c, C.subset(idx), ad).M
    except (Infeasible, SingularStart):
        log.info("subsample relaxation unusable, falling back to a scaled uniform moment")
    # a feasible size for the full problem, spread uniformly over the subsample
    x0, _ = C.solver().maximize(rng.standard_normal(n))
    H = P.vech_rows[idx]
    return unvech(float(x0.sum()) / k * H.sum(axis=0), P.m)


def iterative_aqua(P, c, C, opts=None):
    """Successive AQuA solves, each anchored at the previous result.

    Stops when a design repeats, when the anchor moves by less than
    ``opts.anchor_tol`` (relative Frobenius), or after ``opts.max_iter``
    solves. The best integral iterate by the true criterion is returned;
    ``history`` holds ``(anchor value, design value)`` per solve.
    """
    opts = opts or IterOptions()
    rng = np.random.default_rng(opts.seed)
    anchor = _rough_anchor(P, c, C, opts, rng)
    history = []
    seen = []
    best = None
    reason = "max_iter"
    j = 0
    relaxed = opts.relax_intermediate
    while j < opts.max_iter:
        j += 1
        try:
            Q = build(P, c, anchor)
        except SingularMatrix:
            reason = "singular_anchor"
            break
        last = j == opts.max_iter
        if relaxed and not last:
            res = solve_relaxed_qp(Q, C, opts=QpOptions(gap_tol=opts.bnb.gap / 10))
            w, sval, report = res.design.weights, res.value, None
        else:
            report = branch_and_bound(Q, C, opts.bnb)
            w, sval = report.design.weights, report.value
        M = info_matrix(P, w)
        val = float(phi(c, M))
        history.append((float(phi(c, anchor)), val))
        if report is not None and (best is None or val > best[2]):
            best = (report, M, val, sval, anchor)
        change = np.linalg.norm(M - anchor) / max(np.linalg.norm(anchor), 1e-300)
        repeat = any(np.array_equal(w, s) for s in seen)
        seen.append(w.copy())
        if repeat or change < opts.anchor_tol:
            if report is None:
                # converged on the relaxation: finish with one integral solve
                relaxed = False
                anchor = M
                continue
            reason = "repeat" if repeat else "anchor_stable"
            break
        if np.linalg.eigvalsh(M)[0] <= 0:
            reason = "singular_anchor"
            break
        anchor = M
    if best is None:
        # only relaxed iterates so far; solve once around the current anchor
        report = branch_and_bound(build(P, c, anchor), C, opts.bnb)
        M = info_matrix(P, report.design.weights)
        best = (report, M, float(phi(c, M)), report.value, anchor)
        history.append((float(phi(c, anchor)), best[2]))
    report, M, val, sval, anc = best
    eff = None if opts.reference is None else _efficiency(c, M, opts.reference)
    return AquaResult(
        design=report.design, M=M, value=val, surrogate_value=sval, anchor=anc,
        anchor_value=float(phi(c, anc)), efficiency=eff, report=report,
        history=history, iterations=j, stop_reason=reason,
    )
