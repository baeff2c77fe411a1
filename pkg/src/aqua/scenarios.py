"""Generators for the benchmark problems: spring balance weighing, the
quadratic Scheffe mixture model with marginal and symmetry restrictions, and
a synthetic tall dataset for constrained subsampling.

Each generator returns ``(P, C, info)`` where ``info`` records parameters and,
where relevant, the symmetry orbits.
"""

import itertools

import numpy as np

from .errors import BadParams
from .model import from_regressors
from .polytope import ConstraintSet, add_symmetry_orbits


def spring_balance(m=6, N=None):
    """All ``2^m`` 0/1 regressors of the weighing model without intercept."""
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= 20:
        raise BadParams("spring balance needs an integer 1 <= m <= 20")
    F = np.array(list(itertools.product((0.0, 1.0), repeat=m)))
    labels = ["".join(str(int(v)) for v in row) for row in F]
    P = from_regressors(F, points=F.copy(), labels=labels)
    N = m + 1 if N is None else int(N)
    if N < 1:
        raise BadParams("N must be positive")
    C = ConstraintSet.size(P.n, N)
    return P, C, {"name": "spring-balance", "m": m, "N": N}


def neighbor_vertex(m, s, N=1.0):
    """Neighbor vertex design of size ``N`` for real ``s`` in ``[0, m]``.

    A ``j``-vertex design spreads ``N`` evenly over the cube vertices with
    ``j`` ones; ``xi_s`` mixes the ``floor(s)`` and ``floor(s) + 1`` vertex
    designs with weights ``1 - frac(s)`` and ``frac(s)``.
    """
    if not 0 <= s <= m:
        raise BadParams("s must lie in [0, m]")
    F = np.array(list(itertools.product((0, 1), repeat=m)))
    ones = F.sum(axis=1)
    j = int(np.floor(s))
    frac = s - j
    w = np.zeros(len(F))
    for jj, share in ((j, 1.0 - frac), (j + 1, frac)):
        if share > 0 and jj <= m:
            on = ones == jj
            w[on] += share * N / on.sum()
    return w


def _grid_steps(step):
    if not np.isfinite(step) or step <= 0 or step > 1:
        raise BadParams("step must lie in (0, 1]")
    k = int(round(1.0 / step))
    if abs(k * step - 1.0) > 1e-9:
        raise BadParams(f"step {step} does not divide 1")
    return k


def scheffe_default_size(k):
    """Largest ``N = 3 q`` admitting ``q`` cyclic orbits with distinct factor levels.

    ``q`` orbits use ``3q`` distinct levels from ``0..k`` whose sum is ``q k``,
    which needs ``3q (3q - 1) / 2 <= q k``.
    """
    q = int(np.floor((2 * k / 3 + 1) / 3))
    return 3 * max(q, 1)


def scheffe(step=0.1, N=None, marginal=True, symmetric=True):
    """Quadratic Scheffe mixture model on the three-component simplex grid.

    ``N`` defaults to :func:`scheffe_default_size`. Marginal rows allow each
    level of each factor at most once; orbits force
    ``xi(x1, x2, x3) = xi(x2, x3, x1) = xi(x3, x1, x2)``.
    """
    k = _grid_steps(step)
    ijk = np.array([(i, j, k - i - j) for i in range(k + 1) for j in range(k + 1 - i)])
    X = ijk / k
    F = np.column_stack([X[:, 0], X[:, 1], X[:, 2], X[:, 0] * X[:, 1], X[:, 0] * X[:, 2], X[:, 1] * X[:, 2]])
    labels = [f"{a}/{b}/{c}" for a, b, c in ijk]
    P = from_regressors(F, points=X, labels=labels)
    n = P.n
    N = scheffe_default_size(k) if N is None else int(N)
    if N < 1:
        raise BadParams("N must be positive")
    rows, rhs = [np.ones(n)], [float(N)]
    eq = [True]
    if marginal:
        for f in range(3):
            for lev in range(k + 1):
                r = (ijk[:, f] == lev).astype(float)
                if r.sum() > 1:
                    rows.append(r)
                    rhs.append(1.0)
                    eq.append(False)
    C = ConstraintSet(A=np.array(rows), b=rhs, eq=eq, validate=False)
    orbits = []
    if symmetric:
        index = {tuple(t): i for i, t in enumerate(ijk)}
        done = set()
        for i, (a, b, c) in enumerate(ijk):
            if i in done:
                continue
            orb = sorted({i, index[(b, c, a)], index[(c, a, b)]})
            done.update(orb)
            if len(orb) > 1:
                orbits.append(orb)
        C = add_symmetry_orbits(C, orbits)
    C.check_feasible()
    return P, C, {"name": "scheffe", "step": step, "k": k, "N": N, "orbits": orbits}


def synthetic_tall(n=20000, m=3, seed=0, strata=10, min_quality=90.0, budget=None):
    """A tall dataset mimicking reviews with quality points and prices.

    Columns are an intercept, centred quality and centred log price, plus
    ``m - 3`` further random covariates. Constraints: exactly one point per
    stratum, total price at most ``budget`` (default 20 per stratum),
    average quality at least ``min_quality``, and each point used at most once.
    """
    if m < 3:
        raise BadParams("synthetic-tall needs m >= 3")
    if n < 10 * strata or strata < 1:
        raise BadParams("need at least ten points per stratum")
    rng = np.random.default_rng(seed)
    stratum = rng.integers(strata, size=n)
    stratum[:strata] = np.arange(strata)  # every stratum non-empty
    quality = np.clip(np.round(rng.normal(88.0, 3.0, size=n)), 80, 100)
    logp = 3.0 + 0.08 * (quality - 88.0) + rng.normal(0.0, 0.5, size=n)
    price = np.round(np.exp(logp), 2)
    cols = [np.ones(n), (quality - 88.0) / 3.0, (np.log(price) - 3.0) / 0.5]
    cols += [rng.standard_normal(n) for _ in range(m - 3)]
    F = np.column_stack(cols)
    X = np.column_stack([stratum, quality, price])
    P = from_regressors(F, points=X, labels=[f"s{s}-{i}" for i, s in enumerate(stratum)])
    budget = 20.0 * strata if budget is None else float(budget)
    A = [(stratum == s).astype(float) for s in range(strata)]
    b = [1.0] * strata
    eq = [True] * strata
    A += [price, -quality]
    b += [budget, -min_quality * strata]
    eq += [False, False]
    C = ConstraintSet(A=np.array(A), b=b, eq=eq, upper=np.ones(n))
    info = {"name": "synthetic-tall", "n": n, "m": m, "seed": seed, "strata": strata,
            "budget": budget, "min_quality": min_quality}
    return P, C, info


SCENARIOS = {"spring-balance": spring_balance, "scheffe": scheffe, "synthetic-tall": synthetic_tall}


def scenario(name, **params):
    try:
        gen = SCENARIOS[name]
    except KeyError:
        raise BadParams(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    try:
        return gen(**params)
    except TypeError as exc:
        raise BadParams(str(exc)) from None


def perturbed_anchor(P, c, C, Mstar, target=0.95, tol=0.005, seed=0, vertices=None):
    """Mix ``Mstar`` with the matrix of a random feasible design until the efficiency is ``target``.

    The random design is a Dirichlet-weighted combination of ``vertices``
    (default ``4 m``) relaxation vertices for random objectives. Efficiency
    along the mixing segment is non-increasing, so the mixing weight is found
    by bisection.
    """
    from .criteria import efficiency
    from .model import info_matrix

    rng = np.random.default_rng(seed)
    k = 4 * P.m if vertices is None else int(vertices)
    if k < 1:
        raise BadParams("vertices must be positive")
    solver = C.solver()
    for _ in range(100):
        V = np.array([solver.maximize(rng.standard_normal(C.n))[0] for _ in range(k)])
        Mr = info_matrix(P, rng.dirichlet(np.ones(k)) @ V)
        if efficiency(c, Mr, Mstar) < target - tol:
            break
    else:
        raise BadParams("no random design is inefficient enough to reach the target")
    lo, hi = 0.0, 1.0
    for _ in range(100):
        a = 0.5 * (lo + hi)
        M = (1 - a) * Mstar + a * Mr
        e = efficiency(c, M, Mstar)
        if abs(e - target) <= tol / 10:
            break
        lo, hi = (a, hi) if e > target else (lo, a)
    return M, float(e)
