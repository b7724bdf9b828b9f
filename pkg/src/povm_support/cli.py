"""Command line front end.

Exit status is 0 on success, 2 when an input fails validation and 3 when a
numerical procedure fails (singular Fisher matrix, no linear dependence).
"""

import argparse
import logging
import sys

import numpy as np

from . import io
from .bayes import bayes_cost, optimal_bayes_estimator
from .exceptions import NumericalError, OutOfDomain, ValidationError
from .local import classical_fisher, weighted_cost
from .models import sld
from .operators import random_povm
from .optimize import OptimizerConfig, minimize_bayes, minimize_local
from .reduction import reduce_bayes, reduce_improving, reduce_preserving
from .subalgebra import dim_h, sufficiency_residual


SCHEMAS = """\
JSON schemas (every FILE argument also accepts inline JSON):
  matrix      {"dim": n, "re": [[...]], "im": [[...]]}   ("im" optional)
  POVM        {"dim": n, "elements": [matrix, ...]}
  subalgebra  {"ambient_dim": n, "blocks": [{"ring": "R|C|H", "n": .., "m": ..}],
               "basis_change": matrix or null}
  prior       {"d": d, "points": [{"theta": [...], "pi": p, "W": matrix, "rho": matrix}]}
  model       {"hilbert_dim": n, "d": d, "rho": matrix, "drho": [matrix, ...]}
Builtin models / subalgebras: qubit-xz, qubit-xz-2copy.
Builtin priors: qubit-disk[:n], qubit-disk-2copy[:n] (uniform disk, n x n polar grid).
"""


def parse_theta(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValidationError(f"--theta must be comma-separated numbers, got {text!r}") from None


def cmd_dim(args):
    return {"dim_h": dim_h(io.load_subalgebra(args.subalgebra))}


def cmd_sld(args):
    model = io.load_model(args.model)
    res = sld(model, parse_theta(args.theta))
    return {"sld": [io.matrix_to_json(L) for L in res.sld], "J": res.fisher.tolist()}


def cmd_fisher(args):
    model = io.load_model(args.model)
    tangent = model.tangent(parse_theta(args.theta))
    M = io.load_povm(args.povm)
    F = classical_fisher(M, tangent)
    out = {"F": F.tolist(), "J": sld(model, parse_theta(args.theta)).fisher.tolist()}
    if args.weight is not None:
        out["cost"] = weighted_cost(io.load_weight(args.weight, tangent.d), F)
    return out


def cmd_reduce(args):
    M = io.load_povm(args.povm)
    spec = io.load_subalgebra(args.subalgebra)
    if args.mode == "bayes":
        if args.prior is None:
            raise ValidationError("--mode bayes requires --prior")
        return io.reduced_to_json(reduce_bayes(M, spec, io.load_prior(args.prior)))
    if args.model is None or args.theta is None:
        raise ValidationError(f"--mode {args.mode} requires --model and --theta")
    tangent = io.load_model(args.model).tangent(parse_theta(args.theta))
    reducer = reduce_preserving if args.mode == "preserve" else reduce_improving
    return io.reduced_to_json(reducer(M, spec, tangent))


def cmd_bayes_cost(args):
    M = io.load_povm(args.povm)
    prior = io.load_prior(args.prior)
    est = optimal_bayes_estimator(M, prior)
    return {"cost": bayes_cost(M, prior, est), "estimates": est.tolist()}


def _config(args):
    return OptimizerConfig(args.support, args.restarts, args.max_iters, args.grad_tol, args.seed)


def cmd_optimize_local(args):
    model = io.load_model(args.model)
    theta = parse_theta(args.theta)
    W = io.load_weight(args.weight, model.param_dim)
    report = minimize_local(model, theta, W, io.load_subalgebra(args.subalgebra), _config(args))
    return io.report_to_json(report)


def cmd_optimize_bayes(args):
    report = minimize_bayes(io.load_prior(args.prior), io.load_subalgebra(args.subalgebra), _config(args))
    return io.report_to_json(report)


def cmd_check_sufficiency(args):
    model = io.load_model(args.model)
    spec = io.load_subalgebra(args.subalgebra)
    rng = np.random.default_rng(args.seed)
    if args.theta is not None:
        thetas = [parse_theta(args.theta)]
    else:
        thetas = []
        while len(thetas) < args.thetas:
            theta = rng.uniform(-args.radius, args.radius, model.param_dim)
            try:
                model.state(theta)
            except OutOfDomain:
                continue
            thetas.append(theta)
    worst = 0.0
    for theta in thetas:
        tangent = model.tangent(theta)
        ops = [tangent.rho, *tangent.drho]
        worst = max(worst, sufficiency_residual(spec, ops, samples=args.samples, rng=rng))
    return {"max_residual": worst, "thetas": len(thetas), "samples_per_theta": args.samples}


def cmd_random_povm(args):
    M = random_povm(args.dim, args.outcomes, args.seed, real=args.real, rank=args.rank)
    return io.povm_to_json(M)


def _add_optimizer_flags(p):
    p.add_argument("--subalgebra", required=True)
    p.add_argument("--support", type=int, required=True, help="number of outcomes s")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--grad-tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="povm-support",
        description="Support-size reduction and optimization of POVMs for quantum estimation.",
        epilog=SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-o", "--output", help="write JSON here instead of standard output")
    parser.add_argument("-v", "--verbose", action="store_true")
    # also accepted after the subcommand; SUPPRESS keeps the global value otherwise
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=argparse.SUPPRESS, help="write JSON here instead of standard output")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", parents=[common], help="real dimension of the Hermitian part of a subalgebra")
    p.add_argument("--subalgebra", required=True)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("sld", parents=[common], help="SLDs and SLD Fisher matrix at a point")
    p.add_argument("--model", required=True)
    p.add_argument("--theta", required=True)
    p.set_defaults(func=cmd_sld)

    p = sub.add_parser("fisher", parents=[common], help="classical Fisher matrix of a POVM")
    p.add_argument("--model", required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--povm", required=True)
    p.add_argument("--weight")
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("reduce", parents=[common], help="reduce the number of POVM outcomes")
    p.add_argument("--mode", choices=["preserve", "improve", "bayes"], required=True)
    p.add_argument("--model")
    p.add_argument("--theta")
    p.add_argument("--povm", required=True)
    p.add_argument("--subalgebra", required=True)
    p.add_argument("--prior")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("bayes-cost", parents=[common], help="average cost of a POVM with its optimal estimator")
    p.add_argument("--povm", required=True)
    p.add_argument("--prior", required=True)
    p.set_defaults(func=cmd_bayes_cost)

    p = sub.add_parser("optimize-local", parents=[common], help="minimize Tr W F^-1 over POVMs of fixed support")
    p.add_argument("--model", required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--weight")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_optimize_local)

    p = sub.add_parser("optimize-bayes", parents=[common], help="minimize the Bayes cost over POVMs of fixed support")
    p.add_argument("--prior", required=True)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_optimize_bayes)

    p = sub.add_parser("check-sufficiency", parents=[common], help="max residual of the sufficiency identities")
    p.add_argument("--model", required=True)
    p.add_argument("--subalgebra", required=True)
    p.add_argument("--theta", help="check local sufficiency at this point only")
    p.add_argument("--thetas", type=int, default=20, help="number of sampled parameter points")
    p.add_argument("--radius", type=float, default=0.9, help="sampling box half-width")
    p.add_argument("--samples", type=int, default=10, help="random operators per point")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check_sufficiency)

    p = sub.add_parser("random-povm", parents=[common], help="random POVM for experiments")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--outcomes", type=int, required=True)
    p.add_argument("--rank", type=int)
    p.add_argument("--real", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_random_povm)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        result = args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    text = io.dumps(result)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
