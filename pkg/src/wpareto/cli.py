"""Command-line front end.

Exit status: 0 on success, 1 on domain errors (non-convergence, infeasible
input, model build failures), 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .errors import EvaluationError, ModelBuildError, UsageError
from .interference import MonotoneNorm, check_standard_interference, load_affine_model
from .pareto import certify_boundary, sample_boundary
from .solver import SolverOptions, solve_weighted_maxmin

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class DomainFailure(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fmt(x) -> str:
    return repr(float(x))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _norm(args) -> MonotoneNorm:
    return MonotoneNorm(args.norm, args.budget, args.norm_weights)


def _add_norm_args(p):
    p.add_argument("--norm", default="linf", choices=["l1", "linf", "wl1", "wlinf"])
    p.add_argument("--norm-weights", type=_floats, default=None,
                   help="weights for the wl1/wlinf norms, comma separated")
    p.add_argument("--budget", type=float, required=True, help="budget p̄ in watts")


def cmd_si_check(args):
    model = load_affine_model(args.model)
    report = check_standard_interference(model, args.trials, rng_seed=args.seed)
    _emit(_json(report.to_dict()), args.out)
    if not report.passed:
        raise DomainFailure(f"model is not a standard interference mapping ({report.violated})")


def cmd_solve(args):
    model = load_affine_model(args.model)
    weights = args.weights if args.weights is not None else np.ones(model.K)
    sol = solve_weighted_maxmin(model, weights, _norm(args),
                                SolverOptions(tol=args.tol, max_iter=args.max_iter))
    if args.out_format == "json":
        text = _json(sol.to_dict())
    else:
        rows = [[k, _fmt(sol.p_star[k]), _fmt(sol.utilities[k]), _fmt(sol.weights[k])]
                for k in range(model.K)]
        text = _csv(["k", "p_star", "utility", "weight"], rows)
    _emit(text, args.out)
    if not sol.converged:
        raise DomainFailure(f"no convergence within {sol.iterations} iterations")


def cmd_boundary_sample(args):
    model = load_affine_model(args.model)
    samples = sample_boundary(model, _norm(args), args.n, rng_seed=args.seed)
    if args.out_format == "json":
        text = _json([{"sample_id": i, "p": s.p.tolist(), "utility": s.u.tolist()}
                      for i, s in enumerate(samples)])
    else:
        rows = [[i, k, _fmt(s.p[k]), _fmt(s.u[k])]
                for i, s in enumerate(samples) for k in range(model.K)]
        text = _csv(["sample_id", "k", "p", "utility"], rows)
    _emit(text, args.out)


def cmd_boundary_verify(args):
    model = load_affine_model(args.model)
    norm = _norm(args)
    p = np.asarray(args.p)
    if p.shape != (model.K,):
        raise UsageError(f"--p has {p.size} entries, model has K={model.K}")
    if np.any(p < 0):
        raise UsageError("--p entries must be nonnegative")
    if norm(p) > norm.budget * (1.0 + args.tol):
        raise DomainFailure(f"p is infeasible: ‖p‖ = {norm(p)!r} exceeds budget {norm.budget!r}")
    cert = certify_boundary(model, norm, p, tol=args.tol, crosscheck=args.crosscheck)
    _emit(_json(cert.to_dict()), args.out)


def cmd_cellless_run(args):
    from .cellless import PowerPolicy, build_cellless, load_network_config, run_policies

    cfg = load_network_config(args.config)
    if args.seed is not None:
        cfg.rng_seed = args.seed
    kinds = [s.strip() for s in args.policies.split(",") if s.strip()]
    aliases = {"full": "full", "random": "random", "random-box": "random",
               "fractional": "fractional"}
    unknown = [k for k in kinds if k not in aliases]
    if unknown or not kinds:
        raise UsageError(f"--policies: unknown policy names {unknown}; use full,random,fractional")
    policies = [PowerPolicy(aliases[k], seed=cfg.rng_seed, exponent=args.exponent) for k in kinds]
    net, model = build_cellless(cfg)
    norm = MonotoneNorm("linf", cfg.budget_watts)
    outcomes = run_policies(model, net, norm, policies)
    if args.out_format == "json":
        text = _json([{"policy": o.policy, "p_watts": o.p.tolist(), "sinr": o.sinr.tolist(),
                       "rate_bits_per_hz": o.rate.tolist()} for o in outcomes])
    else:
        rows = [[o.policy, k, _fmt(o.p[k]), _fmt(o.sinr[k]), _fmt(o.rate[k])]
                for o in outcomes for k in range(model.K)]
        text = _csv(["policy", "user", "p_watts", "sinr", "rate_bits_per_hz"], rows)
    _emit(text, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wpareto",
        description="Weighted max-min allocation and weak Pareto boundary tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("si-check", help="sampled standard-interference check of an affine model")
    p.add_argument("--model", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_si_check)

    p = sub.add_parser("solve", help="weighted max-min power allocation")
    p.add_argument("--model", required=True)
    _add_norm_args(p)
    p.add_argument("--weights", type=_floats, default=None, help="default: all ones")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--out-format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    bnd = sub.add_parser("boundary", help="weak Pareto boundary tools").add_subparsers(
        dest="action", required=True)
    p = bnd.add_parser("sample", help="sample utilities on the boundary")
    p.add_argument("--model", required=True)
    _add_norm_args(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-format", choices=["json", "csv"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_boundary_sample)

    p = bnd.add_parser("verify", help="certify boundary membership of a power vector")
    p.add_argument("--model", required=True)
    _add_norm_args(p)
    p.add_argument("--p", type=_floats, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--no-crosscheck", dest="crosscheck", action="store_false")
    p.add_argument("--out")
    p.set_defaults(func=cmd_boundary_verify)

    cl = sub.add_parser("cellless", help="cell-less uplink experiment").add_subparsers(
        dest="action", required=True)
    p = cl.add_parser("run", help="evaluate power policies on a simulated network")
    p.add_argument("--config", required=True)
    p.add_argument("--policies", default="full,random,fractional")
    p.add_argument("--exponent", type=float, default=-1.0, help="fractional policy exponent")
    p.add_argument("--seed", type=int, default=None, help="overrides rng_seed in the config")
    p.add_argument("--out-format", choices=["json", "csv"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cellless_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (UsageError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"wpareto: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainFailure, ModelBuildError, EvaluationError) as exc:
        print(f"wpareto: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
