"""Command-line entry point.

Subcommands: converge (convergence study), sweep (boundary-weight
exponent sweep), condition (condition-number study), check (property
battery). Exit codes: 0 success, 1 invalid configuration, 2 solver
failure, 3 property-check failure.
"""

import argparse
import sys

from .cases import case_names
from .errors import AccuracyError, ConfigurationError, InvalidParameterError, SolverError
from .harness import (
    FORMULATIONS,
    StudyConfig,
    run_condition_study,
    run_convergence,
    run_penalty_sweep,
    run_property_battery,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_PROPERTY = 3


def _add_common(sub):
    sub.add_argument("--case", required=True, help="case name: " + ", ".join(case_names()))
    sub.add_argument("--form", required=True,
                     help="formulation: " + ", ".join(FORMULATIONS))
    sub.add_argument("--order", type=int, default=0,
                     help="polynomial order k: 0, 1 or 2")
    sub.add_argument("--levels", default="4,8,16,32",
                     help="comma-separated mesh levels, e.g. 4,8,16,32")
    sub.add_argument("--gamma-exp", type=float, default=None,
                     help="boundary weight exponent e in h^(-e); default 1 "
                          "for Nitsche forms, k+1 for penalty")
    sub.add_argument("--out", default=None, help="CSV output path")
    sub.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rtdarcy",
        description="Mixed Raviart-Thomas studies for the Darcy problem "
                    "with weakly imposed Neumann conditions.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, descr in (("converge", "convergence-rate study"),
                        ("sweep", "boundary-weight exponent sweep"),
                        ("condition", "condition-number study")):
        sub = subs.add_parser(name, help=descr)
        _add_common(sub)
    chk = subs.add_parser("check", help="run the property battery")
    chk.add_argument("--out", default=None)
    chk.add_argument("--seed", type=int, default=0)
    return parser


def _config(args):
    levels = tuple(int(tok) for tok in args.levels.split(",") if tok.strip())
    return StudyConfig(args.case, args.form, args.order, levels,
                       gamma_exp=args.gamma_exp, out=args.out, seed=args.seed)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            results = run_property_battery(seed=args.seed, out=args.out)
            failures = 0
            for name, passed, detail in results:
                print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
                failures += not passed
            print(f"{len(results) - failures}/{len(results)} checks passed")
            return EXIT_PROPERTY if failures else EXIT_OK

        config = _config(args)
        if args.command == "converge":
            report = run_convergence(config)
            for row in report.rows:
                print(f"level {row['level']}: h={row['h']:.4e} "
                      f"n_dofs={row['n_dofs']} err_u_l2={row['err_u_l2']:.6e} "
                      f"err_p_l2={row['err_p_l2']:.6e}")
            print(" ".join(f"{k}={v:.4f}" for k, v in report.rates.items()))
        elif args.command == "sweep":
            curves = run_penalty_sweep(config)
            for exp, rep in curves.items():
                final = rep.rows[-1]
                print(f"gamma_exp={exp:g}: final err_u_l2={final['err_u_l2']:.6e} "
                      f"rate_u_l2={rep.rates['rate_u_l2']:.4f}")
        elif args.command == "condition":
            rows, slope = run_condition_study(config)
            for row in rows:
                print(f"level {row['level']}: h={row['h']:.4e} "
                      f"n_dofs={row['n_dofs']} cond={row['cond']:.6e}")
            print(f"slope={slope:.4f}")
        return EXIT_OK
    except (ConfigurationError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, AccuracyError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
