"""Command-line entry point.

Subcommands:
    run <config>      execute an experiment; exit 0 all-pass, 2 on verdict
                      failure, 1 on execution error
    list-problems     print the problem catalog
    list-noise        print the noise-model catalog
    replay <manifest> re-run the configuration stored in a manifest and
                      compare verdicts
    selfcheck         randomized inequality property suite
"""

import argparse
import json
import sys

import numpy as np

from .config import load_config, parse_config
from .errors import RandodeError
from .harness import run_experiment
from .inequalities import (discrete_gronwall_bound, gen_triangle, peter_paul,
                           young)
from .noise import NOISE_NAMES
from .problems import CATALOG_KEYS
from .rng import substream


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="randode",
        description="Randomly perturbed one-step ODE integrator laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("config", help="path to a JSON config file")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--reps", type=int, default=None)
    run_p.add_argument("--out-dir", default="out")
    run_p.add_argument("--threads", type=int, default=1,
                       help="replicate parallelism (never changes results)")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")
    run_p.add_argument("--override-c2", type=float, default=None,
                       help="force the C2 ledger entry (testing hook)")

    sub.add_parser("list-problems", help="print catalog problem keys")
    sub.add_parser("list-noise", help="print noise model names")

    rp = sub.add_parser("replay", help="re-run a stored manifest")
    rp.add_argument("manifest")
    rp.add_argument("--out-dir", default="replay_out")
    rp.add_argument("--threads", type=int, default=1)

    sc = sub.add_parser("selfcheck",
                        help="randomized inequality property suite")
    sc.add_argument("--cases", type=int, default=100_000)
    sc.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        raw = dict(cfg.echo)
        raw["seed"] = args.seed
        cfg = parse_config(raw)
    if args.reps is not None:
        raw = dict(cfg.echo)
        raw["reps"] = args.reps
        cfg = parse_config(raw)
    manifest, verdict = run_experiment(cfg, out_dir=args.out_dir,
                                       threads=args.threads,
                                       fmt=args.format,
                                       override_c2=args.override_c2)
    print(f"verdict: {manifest['verdict']}")
    return 0 if verdict else 2


def _cmd_replay(args):
    with open(args.manifest) as fh:
        stored = json.load(fh)
    cfg = parse_config(stored["config"])
    manifest, verdict = run_experiment(cfg, out_dir=args.out_dir,
                                       threads=args.threads)
    same = manifest["verdict"] == stored["verdict"]
    print(f"stored verdict: {stored['verdict']}; replay verdict: "
          f"{manifest['verdict']}; {'match' if same else 'MISMATCH'}")
    if not same:
        return 1
    return 0 if verdict else 2


def selfcheck(cases=100_000, seed=0):
    """Randomized checks of the inequality toolbox; returns violation count."""
    gen = substream(seed)
    violations = 0
    counted = 0

    a = gen.uniform(0, 10, cases)
    b = gen.uniform(0, 10, cases)
    delta = gen.uniform(0.05, 5.0, cases)
    r = gen.uniform(1.05, 6.0, cases)
    for i in range(0, cases, 10_000):
        sl = slice(i, i + 10_000)
        lhs = a[sl] * b[sl]
        rhs = np.array([young(ai, bi, di, ri) for ai, bi, di, ri in
                        zip(a[sl], b[sl], delta[sl], r[sl])])
        violations += int(np.sum(lhs > rhs * (1 + 1e-12)))
    counted += cases
    print(f"young: {cases} cases")

    x = gen.uniform(0, 5, cases)
    y = gen.uniform(0, 5, cases)
    dl = gen.uniform(0.01, 1.0, cases)
    ns = gen.integers(1, 7, cases)
    for n in range(1, 7):
        mask = ns == n
        lhs = (x[mask] + y[mask]) ** n
        rhs = peter_paul(x[mask], y[mask], n, 1.0)
        rhs2 = np.array([peter_paul(xi, yi, n, di) for xi, yi, di in
                         zip(x[mask], y[mask], dl[mask])])
        violations += int(np.sum(lhs > rhs * (1 + 1e-12)))
        violations += int(np.sum(lhs > rhs2 * (1 + 1e-12)))
    counted += cases
    print(f"peter_paul (n in 1..6): {cases} cases")

    steps = 20
    betas = gen.uniform(0, 0.2, (cases, steps))
    A = gen.uniform(0.1, 5.0, cases)
    xs = np.empty((cases, steps))
    xs[:, 0] = A
    for k in range(1, steps):
        xs[:, k] = A + np.einsum("ij,ij->i", betas[:, :k], xs[:, :k])
    bound = A * np.exp(betas.sum(axis=1))
    check = np.array([discrete_gronwall_bound(A[i], betas[i])
                      for i in range(0, cases, cases // 50)])
    assert np.allclose(check, bound[::cases // 50])
    violations += int(np.sum(xs[:, -1] > bound * (1 + 1e-12)))
    counted += cases
    print(f"discrete_gronwall: {cases} cases")

    vals = gen.uniform(-3, 3, (cases, 8))
    m = gen.uniform(1.0, 5.0, cases)
    lhs = np.abs(vals.sum(axis=1)) ** m
    rhs = 8.0 ** (m - 1.0) * np.sum(np.abs(vals) ** m[:, None], axis=1)
    check = np.array([gen_triangle(vals[i], m[i])
                      for i in range(0, cases, cases // 50)])
    assert np.allclose(check, rhs[::cases // 50])
    violations += int(np.sum(lhs > rhs * (1 + 1e-12)))
    counted += cases
    print(f"gen_triangle: {cases} cases")

    print(f"total: {counted} cases, {violations} violations")
    return violations


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-problems":
            for name in CATALOG_KEYS:
                print(name)
            return 0
        if args.command == "list-noise":
            for name in NOISE_NAMES:
                print(name)
            return 0
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "selfcheck":
            return 0 if selfcheck(args.cases, args.seed) == 0 else 2
    except RandodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
