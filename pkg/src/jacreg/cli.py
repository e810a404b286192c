"""Command-line front door for the experiment runners.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys

import numpy as np

from . import tensor as T
from .experiments import (ManifoldSpec, RofProblem, default_denoise_config,
                          default_rof_config, run_matrix_equiv, run_rof,
                          run_shrinkage, run_synthetic_denoise)
from .linalg import SvdConvergenceError
from .regularizers import frob_norm_estimate
from .rng import stream
from .training import TrainingDivergedError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _load_config(path, allowed):
    """Strict JSON config: unknown keys are rejected outright."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as ex:
        raise ConfigError(f"cannot read config {path}: {ex}") from ex
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def _prepare_out(out_dir, force):
    if os.path.exists(out_dir):
        if not force:
            raise ConfigError(f"output directory {out_dir} exists (use --force)")
        shutil.rmtree(out_dir)
    os.makedirs(out_dir)


def _merge(args, keys):
    """Flags override config-file values; either source may supply a key."""
    cfg = {}
    if args.config:
        cfg.update(_load_config(args.config, keys))
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _cmd_rof(args):
    keys = ("n", "eta", "variant", "seed", "iterations", "batch_size",
            "learning_rate", "hutch_sigma", "hutch_samples")
    cfg = _merge(args, keys)
    for req in ("n", "eta", "variant"):
        if req not in cfg:
            raise ConfigError(f"rof requires --{req}")
    problem = RofProblem(n=int(cfg["n"]), eta=float(cfg["eta"]))
    tc = default_rof_config(problem, seed=int(cfg.get("seed", 0)),
                            iterations=int(cfg.get("iterations", 20_000)),
                            batch_size=int(cfg.get("batch_size", 2048)))
    if "learning_rate" in cfg:
        tc.learning_rate = float(cfg["learning_rate"])
    _prepare_out(args.out, args.force)
    report, _ = run_rof(problem, cfg["variant"], tc, out_dir=args.out,
                        hutch_sigma=float(cfg.get("hutch_sigma", 0.05)),
                        hutch_samples=int(cfg.get("hutch_samples", 4)))
    print(json.dumps(report.summary, indent=2))


def _cmd_matrix_equiv(args):
    keys = ("rows", "cols", "eta", "seed")
    cfg = _merge(args, keys)
    rows = int(cfg.get("rows", 8))
    cols = int(cfg.get("cols", 6))
    seed = int(cfg.get("seed", 0))
    rng = stream(seed, "data")
    Y = rng.normal(size=(rows, cols))
    eta = float(cfg["eta"]) if "eta" in cfg else 0.5 * np.sort(
        np.linalg.svd(Y, compute_uv=False))[-3]
    _prepare_out(args.out, args.force)
    report, _ = run_matrix_equiv(Y, eta, seed=seed, out_dir=args.out)
    print(json.dumps(report.summary, indent=2))


def _cmd_shrinkage(args):
    keys = ("D", "N", "rank", "sigma_eps", "seed")
    cfg = _merge(args, keys)
    _prepare_out(args.out, args.force)
    report, _ = run_shrinkage(D=int(cfg.get("D", 16)), N=int(cfg.get("N", 512)),
                              r=int(cfg.get("rank", 3)),
                              sigma_eps=float(cfg.get("sigma_eps", 0.5)),
                              seed=int(cfg.get("seed", 0)), out_dir=args.out)
    print(json.dumps(report.summary, indent=2))


def _cmd_denoise(args):
    keys = ("kind", "ambient_dim", "n_samples", "sigma_eps", "seed",
            "iterations", "batch_size")
    cfg = _merge(args, keys)
    manifold = ManifoldSpec(kind=cfg.get("kind", "circle"),
                            ambient_dim=int(cfg.get("ambient_dim", 10)),
                            n_samples=int(cfg.get("n_samples", 4096)),
                            sigma_eps=float(cfg.get("sigma_eps", 0.3)))
    tc = default_denoise_config(seed=int(cfg.get("seed", 0)),
                                iterations=int(cfg.get("iterations", 4000)),
                                batch_size=int(cfg.get("batch_size", 256)),
                                eta=manifold.sigma_eps)
    _prepare_out(args.out, args.force)
    report, _ = run_synthetic_denoise(manifold, tc, out_dir=args.out)
    print(json.dumps(report.summary, indent=2))


_FNS = {
    "sin": lambda t: T.sin(t),
    "cos": lambda t: T.cos(t),
    "identity": lambda t: t,
}


def _cmd_estimate_frob(args):
    if args.fn not in _FNS:
        raise ConfigError(f"--fn must be one of {sorted(_FNS)}")
    x = np.zeros(args.n)
    est = frob_norm_estimate(_FNS[args.fn], x, args.sigma, args.k,
                             stream(args.seed, "probes"))
    print(f"{est:.6f}")


def _cmd_selftest(args):
    from .selftest import run_selftest
    ok = run_selftest()
    if not ok:
        sys.exit(1)


def build_parser():
    p = argparse.ArgumentParser(prog="jacreg",
                                description="Jacobian nuclear-norm toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add_run_args(sp):
        sp.add_argument("--config", help="JSON config file (strict keys)")
        sp.add_argument("--out", required=True, help="output run directory")
        sp.add_argument("--force", action="store_true",
                        help="overwrite an existing run directory")
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("rof", help="indicator-target regression run")
    add_run_args(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--variant", choices=("exact_penalty", "split_penalty",
                                          "hutchinson"))
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--batch-size", dest="batch_size", type=int)
    sp.add_argument("--learning-rate", dest="learning_rate", type=float)
    sp.add_argument("--hutch-sigma", dest="hutch_sigma", type=float)
    sp.add_argument("--hutch-samples", dest="hutch_samples", type=int)
    sp.set_defaults(func=_cmd_rof)

    sp = sub.add_parser("matrix-equiv", help="three-way matrix objective comparison")
    add_run_args(sp)
    sp.add_argument("--rows", type=int)
    sp.add_argument("--cols", type=int)
    sp.add_argument("--eta", type=float)
    sp.set_defaults(func=_cmd_matrix_equiv)

    sp = sub.add_parser("shrinkage", help="linear shrinkage optimality study")
    add_run_args(sp)
    sp.add_argument("--D", type=int)
    sp.add_argument("--N", type=int)
    sp.add_argument("--rank", type=int)
    sp.add_argument("--sigma-eps", dest="sigma_eps", type=float)
    sp.set_defaults(func=_cmd_shrinkage)

    sp = sub.add_parser("denoise", help="synthetic manifold denoising study")
    add_run_args(sp)
    sp.add_argument("--kind", choices=("circle", "sphere", "swiss_roll"))
    sp.add_argument("--ambient-dim", dest="ambient_dim", type=int)
    sp.add_argument("--n-samples", dest="n_samples", type=int)
    sp.add_argument("--sigma-eps", dest="sigma_eps", type=float)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--batch-size", dest="batch_size", type=int)
    sp.set_defaults(func=_cmd_denoise)

    sp = sub.add_parser("estimate-frob",
                        help="probe estimate of a squared Jacobian Frobenius norm")
    sp.add_argument("--fn", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_estimate_frob)

    sp = sub.add_parser("selftest", help="run the oracle/invariant suite")
    sp.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)
    except (SvdConvergenceError, TrainingDivergedError, FloatingPointError) as ex:
        print(f"numerical failure: {ex}", file=sys.stderr)
        sys.exit(EXIT_NUMERICAL)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
