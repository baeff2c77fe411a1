"""Command-line interface: ``aqua approx|exact|iter|round|export|eval|scenario``.

Exit codes: 0 success, 1 parse or validation error, 2 infeasible,
3 resource cap reached (the partial result is still written).
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import io
from .approx import AdOptions, equivalence_gap, solve_ad
from .criteria import Criterion, efficiency, phi
from .errors import AquaError, Infeasible, ResourceExhausted
from .export import export_micqp
from .integer import BnbOptions, SolveReport
from .model import info_matrix, uniform_moment
from .pipeline import AquaOptions, IterOptions, aqua_solve, iterative_aqua
from .polytope import ConstraintSet, feasible
from .quadmodel import build
from .rounding import efficient_rounding
from .scenarios import scenario

log = logging.getLogger("aqua")

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_CAP = 0, 1, 2, 3
COMMANDS = ("approx", "exact", "iter", "round", "export", "eval", "scenario")
VERSIONS = {"pos": "positive", "neg": "negative", "blend": "blend", "logdet": "logdet"}


@dataclass
class RunConfig:
    command: str = ""
    model: str | None = None
    constraints: str | None = None
    criterion: str = "D"
    p: int | None = None
    gamma: float = 0.0
    version: str = "pos"
    N: int | None = None
    gap: float = 1e-6
    node_cap: int = 100000
    time_cap: float | None = None
    seed: int = 0
    threads: int = 1
    out: str | None = None
    design: str | None = None
    anchor: str | None = None
    points_csv: str | None = None
    name: str | None = None
    params: dict | None = None
    max_iter: int = 10
    subsample: int = 1500
    relax_intermediate: bool = False


CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


class UsageError(AquaError):
    pass


def _parser():
    ap = argparse.ArgumentParser(prog="aqua", description="Efficient exact designs by quadratic approximation.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("name", nargs="?", help="scenario name (for 'scenario')")
    ap.add_argument("--config", help="JSON file with option values; unknown keys are rejected")
    ap.add_argument("--model")
    ap.add_argument("--constraints")
    ap.add_argument("--criterion", choices=("D", "A", "I"))
    ap.add_argument("--p", type=int)
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--version", choices=tuple(VERSIONS))
    ap.add_argument("--N", type=int, help="add the size row 1^T xi = N")
    ap.add_argument("--gap", type=float)
    ap.add_argument("--node-cap", dest="node_cap", type=int)
    ap.add_argument("--time-cap", dest="time_cap", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out")
    ap.add_argument("--design", help="design weights (JSON document, JSON list or plain numbers)")
    ap.add_argument("--anchor", help="anchor matrix as a JSON nested list")
    ap.add_argument("--points-csv", dest="points_csv", help="also write the selected points as CSV")
    ap.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                    help="scenario parameter, repeatable")
    ap.add_argument("--max-iter", dest="max_iter", type=int)
    ap.add_argument("--subsample", type=int)
    ap.add_argument("--relax-intermediate", dest="relax_intermediate", action="store_true", default=None)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _scalar(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def load_config(args):
    cfg = RunConfig(command=args.command)
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(doc) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for k, v in doc.items():
            setattr(cfg, k, v)
    for k in CONFIG_KEYS - {"params", "name"}:
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    if args.name is not None:
        cfg.name = args.name
    if args.param:
        params = dict(cfg.params or {})
        for item in args.param:
            if "=" not in item:
                raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            params[k.replace("-", "_")] = _scalar(v)
        cfg.params = params
    if cfg.version not in VERSIONS:
        raise UsageError(f"version must be one of {sorted(VERSIONS)}")
    if cfg.criterion not in ("D", "A", "I"):
        raise UsageError("criterion must be D, A or I")
    if cfg.threads < 1 or cfg.gap < 0:
        raise UsageError("threads must be >= 1 and gap >= 0")
    return cfg


def make_criterion(cfg, P):
    if cfg.criterion == "I":
        return Criterion("I", L=uniform_moment(P))
    p = cfg.p if cfg.p is not None else {"D": 0, "A": 1}[cfg.criterion]
    family = VERSIONS[cfg.version]
    if family == "logdet" and p != 0:
        raise UsageError("the logdet version exists only for p = 0")
    return Criterion(family, p=p, gamma=cfg.gamma)


def _load(cfg, need_constraints=True):
    if not cfg.model:
        raise UsageError("--model is required")
    P = io.read_model(cfg.model)
    C = None
    if cfg.constraints:
        C = io.read_constraints(cfg.constraints, n=P.n, validate=False)
    if cfg.N is not None:
        row = np.ones((1, P.n))
        if C is None:
            C = ConstraintSet(A=row, b=[cfg.N], eq=[True], validate=False)
        else:
            C = C.add_rows(row, [cfg.N], eq=True, validate=False)
    if C is None and need_constraints:
        raise UsageError("give --constraints and/or --N")
    if C is not None:
        C.check_feasible()
    return P, C


def _bnb(cfg):
    return BnbOptions(gap=cfg.gap, node_cap=cfg.node_cap, time_cap=cfg.time_cap, threads=cfg.threads)


def _report_dict(rep):
    if rep is None:
        return {}
    if isinstance(rep, SolveReport):
        return {
            "surrogate_value": rep.value, "upper_bound": rep.upper_bound, "gap": rep.gap,
            "nodes": rep.nodes, "improvements": rep.improvements, "wall_time": rep.wall_time,
            "termination": rep.termination,
        }
    return rep


def _write(cfg, P, w, c, eff, report):
    M = info_matrix(P, w)
    doc = io.design_document(w, P.labels, phi(c, M), eff, report)
    if cfg.out:
        io.write_json(cfg.out, doc)
    else:
        json.dump(doc, sys.stdout, indent=1)
        sys.stdout.write("\n")
    if cfg.points_csv:
        io.write_points_csv(cfg.points_csv, P, w)
    return doc


def _warn_small(cfg, P):
    if cfg.N is not None and cfg.N <= P.m:
        print(f"warning: N={cfg.N} <= m={P.m}; quadratic approximations can be markedly "
              "suboptimal for such small sizes", file=sys.stderr)


def cmd_approx(cfg):
    P, C = _load(cfg)
    c = make_criterion(cfg, P)
    sol = solve_ad(P, c, C, AdOptions(seed=cfg.seed))
    rep = {"gap": sol.gap, "iterations": sol.iterations, "converged": sol.converged,
           "info_matrix": sol.M.tolist()}
    _write(cfg, P, sol.design.weights, c, 1.0, rep)
    return EXIT_OK


def cmd_exact(cfg):
    P, C = _load(cfg)
    _warn_small(cfg, P)
    c = make_criterion(cfg, P)
    anchor = _read_matrix(cfg.anchor) if cfg.anchor else None
    opts = AquaOptions(anchor=anchor, ad=AdOptions(seed=cfg.seed), bnb=_bnb(cfg))
    res = aqua_solve(P, c, C, opts)
    rep = _report_dict(res.report)
    rep.update(anchor_value=res.anchor_value, anchor=res.anchor.tolist())
    _write(cfg, P, res.design.weights, c, res.efficiency, rep)
    return EXIT_CAP if res.report.termination in ("node_cap", "time_cap") else EXIT_OK


def cmd_iter(cfg):
    P, C = _load(cfg)
    _warn_small(cfg, P)
    c = make_criterion(cfg, P)
    opts = IterOptions(
        subsample_size=cfg.subsample, max_iter=cfg.max_iter, relax_intermediate=cfg.relax_intermediate,
        seed=cfg.seed, ad=AdOptions(seed=cfg.seed), bnb=_bnb(cfg),
    )
    res = iterative_aqua(P, c, C, opts)
    rep = _report_dict(res.report)
    rep.update(iterations=res.iterations, stop_reason=res.stop_reason,
               history=[list(hv) for hv in res.history])
    _write(cfg, P, res.design.weights, c, res.efficiency, rep)
    return EXIT_OK


def cmd_round(cfg):
    if not cfg.design or cfg.N is None:
        raise UsageError("round needs --design and --N")
    w = io.read_design(cfg.design)
    supp = np.flatnonzero(w > 0)
    out = np.zeros(len(w))
    out[supp] = efficient_rounding(w[supp], cfg.N)
    doc = io.design_document(out, report={"method": "efficient_rounding", "N": cfg.N})
    if cfg.model:
        P = io.read_model(cfg.model)
        c = make_criterion(cfg, P)
        doc["criterion_value"] = float(phi(c, info_matrix(P, out)))
        doc["labels"] = list(P.labels) if P.labels else None
    if cfg.out:
        io.write_json(cfg.out, doc)
    else:
        json.dump(doc, sys.stdout, indent=1)
        sys.stdout.write("\n")
    return EXIT_OK


def _read_matrix(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read anchor {path}: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("matrix", doc.get("report", {}).get("info_matrix"))
    M = np.array(doc, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise UsageError("anchor must be a square matrix")
    return M


def cmd_export(cfg):
    if not cfg.out:
        raise UsageError("export needs --out")
    P, C = _load(cfg)
    c = make_criterion(cfg, P)
    anchor = _read_matrix(cfg.anchor) if cfg.anchor else solve_ad(P, c, C, AdOptions(seed=cfg.seed)).M
    export_micqp(build(P, c, anchor), C, cfg.out)
    return EXIT_OK


def cmd_eval(cfg):
    if not cfg.design:
        raise UsageError("eval needs --design")
    P, C = _load(cfg, need_constraints=False)
    c = make_criterion(cfg, P)
    w = io.read_design(cfg.design, n=P.n)
    M = info_matrix(P, w)
    out = {"schema": "aqua/1", "criterion": c.name, "criterion_value": float(phi(c, M))}
    if cfg.anchor:
        out["efficiency"] = float(efficiency(c, M, _read_matrix(cfg.anchor)))
    if C is not None:
        out["feasible"] = bool(feasible(w, C))
        try:
            out["equivalence_gap"] = float(equivalence_gap(P, c, w, C))
        except AquaError as exc:
            out["equivalence_gap"] = None
            out["note"] = str(exc)
    if cfg.out:
        io.write_json(cfg.out, out)
    else:
        json.dump(out, sys.stdout, indent=1)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_scenario(cfg):
    if not cfg.name:
        raise UsageError("scenario needs a name: spring-balance, scheffe or synthetic-tall")
    P, C, info = scenario(cfg.name, **(cfg.params or {}))
    prefix = cfg.out or cfg.name
    d = os.path.dirname(prefix)
    if d:
        os.makedirs(d, exist_ok=True)
    io.write_model(prefix + ".csv", P)
    io.write_constraints(prefix + ".constraints.json", C)
    with open(prefix + ".info.json", "w") as fh:
        json.dump({"schema": "aqua/1", **info}, fh, indent=1)
    print(f"wrote {prefix}.csv, {prefix}.constraints.json (n={P.n}, m={P.m}, rows={C.k})")
    return EXIT_OK


HANDLERS = {
    "approx": cmd_approx, "exact": cmd_exact, "iter": cmd_iter, "round": cmd_round,
    "export": cmd_export, "eval": cmd_eval, "scenario": cmd_scenario,
}


def main(argv=None):
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return HANDLERS[cfg.command](cfg)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ResourceExhausted as exc:
        print(f"resource cap reached: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (AquaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
