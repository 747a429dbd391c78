"""Command-line entry point: ``edgeworth {expand,simulate,gpcc-check,moments,presets}``.

Exit status is 0 on success, 2 for configuration problems and 3 for
numerical failures; diagnostics are a single line on stderr.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import report as rpt
from .config import PRESETS, gpcc_from_dict, load_json, model_from_any, preset_config
from .errors import (ConfigError, EdgeworthError, InsufficientDataError, NumericalError,
                     UnsupportedConditioningError)
from .expansion import EdgeworthApprox
from .gpcc import estimate_modulus
from .model import covariance_matrix, mean_vector
from .moments import analytic_moments
from .montecarlo import ExperimentConfig, _coefficients_for, simulate

__all__ = ["run", "main", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("EDGEWORTH_THREADS")
    if env:
        try:
            t = int(env)
        except ValueError:
            raise ConfigError(f"EDGEWORTH_THREADS must be an integer, got {env!r}") from None
        if t < 1:
            raise ConfigError("EDGEWORTH_THREADS must be positive")
        return t
    return os.cpu_count() or 1


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a non-negative 64-bit integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(
        prog="edgeworth",
        description="Edgeworth expansions for smooth functions of sample means.")
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--config", help="JSON config file (strict schema)")
        g.add_argument("--preset", choices=sorted(PRESETS), help="bundled experiment")

    def common(p, threads=True):
        p.add_argument("--seed", type=_seed, default=None,
                       help="master seed (default: the config's seed, else 0)")
        if threads:
            p.add_argument("--threads", type=_positive_int, default=None,
                           help="worker cap (default: $EDGEWORTH_THREADS or CPU count)")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("expand", help="print expansion coefficients and curve CSV")
    source(p)
    common(p, threads=False)
    p.add_argument("--n", type=_positive_int, default=None, help="override sample size")
    p.add_argument("--points", type=_positive_int, default=201,
                   help="curve points over +-5 sigma (default 201)")
    p.add_argument("--curve", choices=("pdf", "cdf"), default="pdf",
                   help="which function to tabulate")

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    source(p)
    common(p)
    p.add_argument("--n", type=_positive_int, default=None, help="override sample size")
    p.add_argument("--reps", type=_positive_int, default=None, help="override replications")
    p.add_argument("--no-svg", action="store_true", help="skip the SVG figure")

    p = sub.add_parser("gpcc-check", help="estimate the conditional CF modulus on shells")
    p.add_argument("--config", required=True, help="JSON GPCC config file")
    common(p)

    p = sub.add_parser("moments", help="dump the model's mean and central moment tensors")
    source(p)
    p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("presets", help="list bundled presets or write them as configs")
    p.add_argument("--write", metavar="DIR", default=None,
                   help="write one experiment config per preset and sample size")
    return parser


def _experiment(args):
    if args.preset:
        cfg = preset_config(args.preset)
    else:
        cfg = ExperimentConfig.from_dict(load_json(args.config))
    changes = {}
    if getattr(args, "n", None) is not None:
        changes["n"] = args.n
        if args.preset:
            changes["label"] = f"{args.preset}/n={args.n}"
    if getattr(args, "reps", None) is not None:
        changes["reps"] = args.reps
    if args.seed is not None:
        changes["seed"] = args.seed
    return cfg.replace(**changes) if changes else cfg


def _cmd_expand(args, out):
    cfg = _experiment(args)
    coeffs = _coefficients_for(cfg)
    m = cfg.n_eff
    approx = {name: EdgeworthApprox(coeffs, m, order)
              for order, name in enumerate(("normal", "order1", "order2"))}
    x = np.linspace(-5 * coeffs.sigma, 5 * coeffs.sigma, args.points)
    cols = {name: getattr(a, args.curve)(x) for name, a in approx.items()}
    payload = {"config": cfg.to_dict(), "n_eff": m, "coefficients": coeffs.to_dict(),
               "cumulants": [float(c) for c in coeffs.cumulants(m)]}
    text = rpt.curves_csv(x, cols)
    out.write(rpt.dumps(payload))
    out.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        rpt.write_json(os.path.join(args.out, "coefficients.json"), payload)
        rpt.write_csv(os.path.join(args.out, f"curves_{args.curve}.csv"), text)


def _cmd_simulate(args, out):
    cfg = _experiment(args)
    result = simulate(cfg, _threads(args.threads))
    outdir = args.out or "edgeworth-out"
    paths = rpt.write_simulation(result, outdir, svg=not args.no_svg)
    d = result.distances
    out.write(f"{cfg.label or 'experiment'}: n={cfg.n} reps={cfg.reps} seed={cfg.seed} "
              f"dropped={result.dropped} D_normal={d['normal']:.5f} "
              f"D_order1={d['order1']:.5f} D_order2={d['order2']:.5f} "
              f"({result.runtime_seconds:.1f}s)\n")
    out.write(f"wrote {paths['json']}\n")


def _cmd_gpcc(args, out):
    q, seed = gpcc_from_dict(load_json(args.config))
    if args.seed is not None:
        seed = args.seed
    result = estimate_modulus(q, seed, _threads(args.threads))
    payload = {"query": q.to_dict(), "seed": seed, **result.to_json()}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        rpt.write_json(os.path.join(args.out, "gpcc.json"), payload)
    for r, mx, se in zip(result.shells, result.max_estimate, result.max_se):
        out.write(f"radius {r:g}: max E|v| = {mx:.4f} (se {se:.4f})\n")
    out.write(f"verdict: {result.verdict}\n")


def _cmd_moments(args, out):
    if args.preset:
        model = preset_config(args.preset).model
    else:
        model = model_from_any(load_json(args.config))
    t = analytic_moments(model)
    payload = {"model": model.to_dict(), "mean": mean_vector(model),
               "covariance": covariance_matrix(model), "central_moments": t.to_json()}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        rpt.write_json(os.path.join(args.out, "moments.json"), payload)
    else:
        out.write(rpt.dumps(payload))


def _cmd_presets(args, out):
    for name, p in PRESETS.items():
        out.write(f"{name}: {p.description}; n in {list(p.n_values)}\n")
        if args.write:
            os.makedirs(args.write, exist_ok=True)
            for n in p.n_values:
                rpt.write_json(os.path.join(args.write, f"{name}-n{n}.json"),
                               p.config(n).to_dict())


_COMMANDS = {"expand": _cmd_expand, "simulate": _cmd_simulate, "gpcc-check": _cmd_gpcc,
             "moments": _cmd_moments, "presets": _cmd_presets}


def run(argv=None, out=None, err=None) -> int:
    """Parse ``argv`` and execute; returns the process exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args, out)
    except (ConfigError, UnsupportedConditioningError) as exc:
        err.write(f"edgeworth: config error: {_one_line(exc)}\n")
        return EXIT_CONFIG
    except (NumericalError, InsufficientDataError, FloatingPointError) as exc:
        err.write(f"edgeworth: numerical failure: {_one_line(exc)}\n")
        return EXIT_NUMERIC
    except EdgeworthError as exc:
        err.write(f"edgeworth: {_one_line(exc)}\n")
        return EXIT_CONFIG
    except OSError as exc:
        err.write(f"edgeworth: cannot write output: {_one_line(exc)}\n")
        return EXIT_CONFIG
    return EXIT_OK


def _one_line(exc):
    return " ".join(str(exc).split())


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
