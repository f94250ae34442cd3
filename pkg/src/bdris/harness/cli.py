"""Command-line interface.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from .. import arch
from ..beamform import DEFAULT_P_T, STAGE1_METHODS, two_stage
from ..chanopt import DEFAULT_NOISE_POWER, gen_channels, quasi_newton_gain, ub_sosup, upper_bound
from ..errors import BDRISError, ConfigError
from ..io import read_matrix, write_matrix
from ..network import DEFAULT_Z0, validate_scattering
from ..sosup import project
from .config import OUTPUT_DIR_ENV, load_config
from .sweep import run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _default_out():
    return os.environ.get(OUTPUT_DIR_ENV, ".")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--z0", type=float, default=DEFAULT_Z0, help="reference impedance in ohms")
    p.add_argument("--out", default=None, help="output directory or file")


def _add_arch(p, required=True):
    p.add_argument("--arch", help="architecture as JSON text or a path to a JSON file")
    p.add_argument("--kind", help="architecture kind (single, fully, group, tree, forest, stem, cluster)")
    p.add_argument("--n", type=int, help="number of RIS elements")
    p.add_argument("--g", type=int, help="group count")
    p.add_argument("--q", type=int, help="stem count")
    p.add_argument("--q-g", dest="q_g", type=int, help="stems per group")


def _spec_from_args(args, n_default=None):
    if args.arch:
        text = args.arch
        if os.path.exists(text):
            with open(text) as fh:
                text = fh.read()
        try:
            return arch.ArchSpec.from_json(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--arch is not valid JSON: {exc.msg}", "arch", exc.lineno) from None
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"--arch is missing {exc}", "arch") from None
    if not args.kind:
        raise ConfigError("an architecture is required (--arch or --kind)", "kind")
    n = args.n if args.n is not None else n_default
    if n is None:
        raise ConfigError("--n is required", "n")
    return arch.make_arch(args.kind, n, g=args.g, q=args.q, q_g=args.q_g)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    print(text)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def cmd_complexity(args):
    if args.arch_list:
        specs = [arch.ArchSpec.from_json(t) for t in args.arch_list]
        for spec in specs:
            print(f"{spec.label()}\t{arch.circuit_complexity(spec)}")
    else:
        print(arch.circuit_complexity(_spec_from_args(args)))
    return EXIT_OK


def cmd_project(args):
    x = read_matrix(args.matrix)
    spec = _spec_from_args(args, n_default=x.shape[0])
    res = project(x, spec, args.z0)
    out_dir = args.out or _default_out()
    os.makedirs(out_dir, exist_ok=True)
    b_path = os.path.join(out_dir, "B.csv")
    t_path = os.path.join(out_dir, "theta.csv")
    write_matrix(b_path, res.b.b)
    write_matrix(t_path, res.theta)
    _emit({
        "arch": spec.to_dict(),
        "lower_bound": res.lower_bound,
        "tight_bound": res.tight_bound,
        "achieved": res.achieved,
        "ls_residual": res.ls_residual,
        "rank": res.rank,
        "degenerate": res.degenerate,
        "b_csv": b_path,
        "theta_csv": t_path,
    })
    return EXIT_OK


def _channels(args):
    return gen_channels(args.n, args.l, args.k, seed=args.seed, noise_power=args.noise_power)


def cmd_gain(args):
    spec = _spec_from_args(args)
    ch = _channels(args)
    init = ub_sosup(ch, spec, args.z0)
    out = {"arch": spec.to_dict(), "seed": args.seed, "ub": upper_bound(ch).ub_value,
           "ub_sosup": {"gain": init.gain, "lower_bound": init.projection.lower_bound,
                        "achieved": init.projection.achieved,
                        "ls_residual": init.projection.ls_residual}}
    if args.method in ("sosup_qn", "both"):
        maps = arch.transform_matrix(spec)
        qn = quasi_newton_gain(ch, maps, maps.vec_i(init.b.b), z0=args.z0, max_iter=args.max_iter)
        out["sosup_qn"] = {"gain": qn.objective, "iterations": qn.iterations,
                           "converged": qn.converged, "line_search_failed": qn.line_search_failed}
    if args.method == "sosup_qn":
        out.pop("ub_sosup")
    _emit(out, args.out)
    return EXIT_OK


def cmd_wsr(args):
    spec = _spec_from_args(args)
    ch = _channels(args)
    res = two_stage(ch, spec, args.z0, args.stage1, args.p_t)
    rep = res.report
    _emit({"arch": spec.to_dict(), "seed": args.seed, "stage1": args.stage1,
           "stage1_gain": res.stage1_gain, "rates": rep.rates.tolist(), "wsr": rep.wsr,
           "mmf": rep.mmf, "ee": rep.ee, "power": res.precoder.power,
           "fp_iterations": res.precoder.iterations}, args.out)
    return EXIT_OK


def cmd_validate(args):
    theta = read_matrix(args.matrix)
    rep = validate_scattering(theta, args.tol)
    _emit({"unitarity_defect": rep.unitarity_defect, "symmetry_defect": rep.symmetry_defect,
           "pass": rep.passed}, args.out)
    if args.strict and not rep.passed:
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_sweep(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.realizations is not None:
        overrides["realizations"] = args.realizations
    config = load_config(args.config, overrides)
    if args.z0 is not None:
        from dataclasses import replace
        config = replace(config, physics=replace(config.physics, z0=args.z0))
    result = run_sweep(config, stream=sys.stdout)
    print(f"wrote {result['output']}")
    if result["timing_output"]:
        print(f"wrote {result['timing_output']}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="bdris", description="BD-RIS scattering-matrix design tools")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("complexity", help="circuit complexity of architectures")
    _add_arch(p)
    p.add_argument("--arch-list", nargs="*", default=None, help="several architecture JSON objects")
    _add_common(p)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("project", help="project a matrix onto an architecture")
    p.add_argument("--matrix", required=True, help="CSV of the complex input matrix")
    _add_arch(p)
    _add_common(p)
    p.set_defaults(func=cmd_project)

    for name, func in (("gain", cmd_gain), ("wsr", cmd_wsr)):
        p = sub.add_parser(name, help=f"{name} on one seeded channel realization")
        _add_arch(p)
        p.add_argument("--l", type=int, default=4, help="BS antennas")
        p.add_argument("--k", type=int, default=4, help="users")
        p.add_argument("--noise-power", type=float, default=DEFAULT_NOISE_POWER)
        _add_common(p)
        p.set_defaults(func=func)
        if name == "gain":
            p.add_argument("--method", choices=("ub_sosup", "sosup_qn", "both"), default="both")
            p.add_argument("--max-iter", type=int, default=500)
        else:
            p.add_argument("--stage1", choices=STAGE1_METHODS, default="ub_sosup")
            p.add_argument("--p-t", type=float, default=DEFAULT_P_T, help="transmit power budget (W)")

    p = sub.add_parser("validate", help="check symmetry and unitarity of a scattering matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--strict", action="store_true", help="exit 2 when the check fails")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run a JSON-configured Monte-Carlo sweep")
    p.add_argument("config", help="sweep configuration JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--z0", type=float, default=None)
    p.add_argument("--out", default=None, help="CSV output path (overrides the config)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--realizations", type=int, default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("a subcommand is required: " + ", ".join(
                ["project", "gain", "wsr", "complexity", "sweep", "validate"]))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        if getattr(args, "n", None) is not None and args.command in ("gain", "wsr") and args.n < 1:
            raise ConfigError("--n must be positive", "n")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (arch.InvalidGrouping, arch.InvalidStemCount, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BDRISError, OSError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
