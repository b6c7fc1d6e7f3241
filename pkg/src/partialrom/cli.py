"""Command-line harness.

Subcommands: ``setup1`` (thermal world run), ``setup2`` (synthetic world run),
``bounds`` (width-bound table), ``sample`` (dump raw posterior samples) and
``selftest`` (quick internal checks).  Exit codes: 0 success, 2 configuration
error, 3 numerical failure.

Configuration values resolve in order: built-in defaults, then a flat
``key = value`` config file (``--config``) or a previous run's manifest
(``--from-manifest``), then same-name command-line flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .bounds import format_extended, posterior_width_bounds
from .errors import ConfigError, ContractViolation, EmptySliceError, InfeasibleGeometry
from .experiment import RunConfig, run_experiment, thermal_defaults, synthetic_defaults
from .geometry import SnapshotSet
from .rng import derived_rng
from .sampling import PiDistribution, sample_posterior

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_NUMERICAL_ERRORS = (
    ContractViolation,
    InfeasibleGeometry,
    EmptySliceError,
    np.linalg.LinAlgError,
    FloatingPointError,
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key = value config file")
    parser.add_argument(
        "--from-manifest", metavar="FILE", help="reuse the 'config' block of a manifest.json"
    )
    for f in dataclasses.fields(RunConfig):
        if f.name == "setup":
            continue
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper())


def _resolve_config(args: argparse.Namespace, setup: int) -> RunConfig:
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(RunConfig)
        if f.name != "setup" and getattr(args, f.name, None) is not None
    }
    if args.config and args.from_manifest:
        raise ConfigError("--config and --from-manifest are mutually exclusive")
    if args.from_manifest:
        cfg = RunConfig.from_manifest(args.from_manifest)
        if cfg.setup != setup:
            raise ConfigError(f"manifest is for setup {cfg.setup}, command expects {setup}")
        data = cfg.to_dict()
        data.update(overrides)
        cfg = RunConfig.from_dict(data)
    elif args.config:
        overrides["setup"] = setup
        cfg = RunConfig.from_config_file(args.config, overrides)
    else:
        base = thermal_defaults() if setup == 1 else synthetic_defaults()
        data = base.to_dict()
        data.update(overrides)
        cfg = RunConfig.from_dict(data)
    cfg.setup = setup
    return cfg


def _cmd_run(args: argparse.Namespace, setup: int) -> int:
    cfg = _resolve_config(args, setup)
    result = run_experiment(cfg)
    csv_path, manifest_path = result.write(args.out)
    print(f"wrote {csv_path} ({len(result.records)} records) and {manifest_path}")
    return EXIT_OK


def _parse_sigma(args: argparse.Namespace) -> np.ndarray:
    n_pairs = min(args.m, args.n)
    if args.sigma:
        vals = np.array([float(tok) for tok in args.sigma.split(",")])
    elif args.sigma_mode == "aligned":
        vals = np.ones(n_pairs)
    elif args.sigma_mode == "orthogonal":
        vals = np.zeros(n_pairs)
    else:  # random
        rng = derived_rng(args.seed, 31)
        vals = np.sort(rng.random(n_pairs))[::-1]
    if vals.shape[0] != n_pairs:
        raise ConfigError(f"expected {n_pairs} sigma values, got {vals.shape[0]}")
    if np.any(vals < 0) or np.any(vals > 1):
        raise ConfigError("sigma values must lie in [0, 1]")
    if np.any(np.diff(vals) > 1e-12):
        raise ConfigError("sigma values must be nonincreasing")
    return vals


def _cmd_bounds(args: argparse.Namespace) -> int:
    sigma = _parse_sigma(args)
    p = int(np.sum(sigma >= 1.0 - 1e-8))
    q = int(np.sum(sigma > 1e-10))
    curve = posterior_width_bounds(
        k=args.k,
        n=args.n,
        ambient_dim=args.ambient,
        eps=args.eps,
        eps_prime=args.eps_prime,
        sigma=sigma,
        p=p,
        q=q,
        m=args.m,
        i_max=args.i_max,
    )
    lines = ["i,d_bar,d_bbar,combined"]
    for i, (a, b, c) in enumerate(zip(curve.d_bar, curve.d_bbar, curve.combined)):
        lines.append(f"{i},{format_extended(a)},{format_extended(b)},{format_extended(c)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bounds.csv").write_text(text)
        manifest = {
            "command": "bounds",
            "k": args.k,
            "n": args.n,
            "ambient": args.ambient,
            "m": args.m,
            "eps": args.eps,
            "eps_prime": args.eps_prime,
            "i_max": args.i_max,
            "seed": args.seed,
            "sigma": [float(s) for s in sigma],
            "p": p,
            "q": q,
            "k_star": curve.k_star,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        print(f"wrote {out / 'bounds.csv'}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_sample(args: argparse.Namespace) -> int:
    from .experiment import _build_bundle  # reuse the world construction

    cfg = _resolve_config(args, args.setup)
    cfg.validate()
    bundle = _build_bundle(cfg)
    cloud = bundle.m_cloud
    if args.max_points and len(cloud) > args.max_points:
        idx = np.linspace(0, len(cloud) - 1, args.max_points).round().astype(int)
        cloud = SnapshotSet(cloud.vectors[np.unique(idx)])
    prior = bundle.prior_multi if (args.multi and bundle.prior_multi is not None) else bundle.prior_single
    samples = sample_posterior(
        cloud,
        bundle.w_subspace,
        prior,
        cfg.per_point,
        pi_dist=PiDistribution.from_name(cfg.pi),
        d_box=cfg.d_box,
        seed=_sample_seed(cfg.seed),
        max_draws_per_point=cfg.max_draw_factor * cfg.per_point,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = "sample," + ",".join(f"c{j}" for j in range(samples.ambient_dim))
    lines = [header]
    for i, row in enumerate(samples):
        lines.append(str(i) + "," + ",".join(format_extended(v) for v in row))
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(samples)} samples, ambient dimension {samples.ambient_dim})")
    return EXIT_OK


def _sample_seed(seed: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(41,)).generate_state(1, np.uint64)[0])


def _cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_selftest

    failures = run_selftest(seed=args.seed, verbose=True)
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="partialrom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("setup1", help="run the thermal-block world")
    p1.add_argument("--out", required=True, metavar="DIR")
    _add_config_flags(p1)
    p1.set_defaults(func=lambda a: _cmd_run(a, 1))

    p2 = sub.add_parser("setup2", help="run the synthetic aligned-basis world")
    p2.add_argument("--out", required=True, metavar="DIR")
    _add_config_flags(p2)
    p2.set_defaults(func=lambda a: _cmd_run(a, 2))

    pb = sub.add_parser("bounds", help="tabulate the posterior width bounds")
    pb.add_argument("--k", type=int, required=True)
    pb.add_argument("--n", type=int, required=True)
    pb.add_argument("--m", type=int, required=True)
    pb.add_argument("--ambient", type=int, required=True)
    pb.add_argument("--eps", type=float, required=True)
    pb.add_argument("--eps-prime", type=float, required=True)
    pb.add_argument("--i-max", type=int, default=None)
    pb.add_argument("--sigma", help="comma-separated nonincreasing values in [0, 1]")
    pb.add_argument(
        "--sigma-mode",
        choices=("aligned", "orthogonal", "random"),
        default="random",
        help="synthetic sigma pattern when --sigma is not given",
    )
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--out", metavar="DIR")
    pb.set_defaults(func=_cmd_bounds)

    ps = sub.add_parser("sample", help="dump raw posterior samples as CSV")
    ps.add_argument("--setup", type=int, choices=(1, 2), required=True)
    ps.add_argument("--out", required=True, metavar="FILE")
    ps.add_argument("--max-points", type=int, default=0, help="subsample the manifold cloud first")
    ps.add_argument("--multi", action="store_true", help="use the intersection prior")
    _add_config_flags(ps)
    ps.set_defaults(func=_cmd_sample)

    pt = sub.add_parser("selftest", help="run quick internal consistency checks")
    pt.add_argument("--seed", type=int, default=0)
    pt.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
