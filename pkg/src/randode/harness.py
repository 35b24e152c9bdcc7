"""Experiment orchestration: mode dispatch, artifacts, manifests.

Every emitted number is a pure function of (config, seed); the manifest
echoes the full configuration so outputs can be reproduced by `replay`.
"""

import datetime
import json
import math
import os
from dataclasses import asdict

import numpy as np

from . import __version__
from .analysis import (as_path_bound_check, convergence_study,
                       coverage_report, ensemble_sup_errors, fit_order,
                       measure_flow_lipschitz, measure_lte_constant,
                       moment_bound_check, noise_sum_moment_check,
                       theoretical_rate)
from .constants import constants_ledger
from .errors import ConfigError
from .noise import verify_regularity
from .solver import run_ensemble


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else repr(v) if
                              isinstance(v, float) else str(v) for v in row)
                     + "\n")


def _ledger_for(cfg, n=1, override_c2=None):
    """Constants ledger from measured C_phi/C_psi and the model parameters."""
    problem, integ, noise = cfg.problem, cfg.integrator, cfg.noise
    meta = problem.field.regularity
    tau0 = min(cfg.tau_grid)
    c_phi = measure_flow_lipschitz(problem, tau0, samples=50, seed=cfg.seed)
    probe_taus = [2.0 ** -k for k in range(4, 9)]
    c_psi = measure_lte_constant(integ, problem, problem.u0, probe_taus)
    d = problem.dimension
    p = noise.params.p if noise.name != "zero" else 1.0
    diss = meta.dissipativity
    s = meta.poly_growth[1] if meta.poly_growth else None
    from .problems import reference_trajectory
    ref = reference_trajectory(problem, min(cfg.tau_grid))
    u_sup = float(np.linalg.norm(ref, axis=1).max())
    ledger = constants_ledger(
        C_phi=c_phi, C_psi=c_psi,
        C_xiR=noise.moment_scale(max(2, 2 * n), d),
        tau_star=meta.tau_star, T=cfg.horizon_T, p=p, q=integ.order_q,
        n=n, s=s,
        alpha=diss[0] if diss else None,
        beta=diss[1] if diss else None,
        u_sup=u_sup,
        U0_norm=float(np.linalg.norm(problem.u0)))
    if override_c2 is not None:
        ledger.C2 = float(override_c2)
        ledger.inputs["override_c2"] = float(override_c2)
    return ledger


def _mode_convergence(cfg, out_dir, threads, dense):
    reports = []
    for n in cfg.moment_orders:
        rep = convergence_study(
            cfg.problem, cfg.integrator, cfg.noise, cfg.tau_grid, cfg.reps,
            cfg.seed, n=n, threads=threads,
            order_tolerance=cfg.order_tolerance,
            subgrid=cfg.subgrid if dense else None)
        rows = [(t, n, m, lo, hi, r, df) for t, m, lo, hi, r, df in
                zip(rep.taus, rep.empirical, rep.ci_lo, rep.ci_hi, rep.rms,
                    rep.diverged_fraction)]
        _write_csv(os.path.join(out_dir, f"convergence_n{n}.csv"),
                   ["tau", "n", "mean", "ci_lo", "ci_hi", "rms",
                    "diverged_fraction"], rows)
        reports.append(rep)
    verdict = all(r.verdict for r in reports)
    return {"reports": [asdict(r) for r in reports]}, verdict


def _mode_bounds(cfg, out_dir, threads, override_c2):
    if cfg.problem.field.regularity.dissipativity is None:
        raise ConfigError("bounds mode needs a dissipative problem")
    rows, all_pass = [], True
    payload = {"taus": {}}
    for n in cfg.moment_orders:
        ledger = _ledger_for(cfg, n=n, override_c2=override_c2)
        p = cfg.noise.params.p
        c_xir = cfg.noise.moment_scale(2 * n, cfg.problem.dimension)
        for tau in cfg.tau_grid:
            runs = run_ensemble(cfg.problem, cfg.integrator, cfg.noise, tau,
                                cfg.reps, cfg.seed, threads=threads)
            checks = []
            path_fails = sum(
                not as_path_bound_check(r, ledger.C2, n).passed for r in runs)
            checks.append(("as_path_bound", float(path_fails), 0.0,
                           path_fails == 0))
            mb = moment_bound_check(runs, ledger.C2, n, p, c_xir,
                                    cfg.horizon_T)
            checks.append((mb.name, mb.lhs, mb.rhs, mb.passed))
            ns = noise_sum_moment_check(cfg.noise, tau, 2, n, cfg.horizon_T,
                                        min(cfg.reps, 2000), cfg.seed,
                                        d=cfg.problem.dimension)
            checks.append((ns.name, ns.lhs, ns.rhs, ns.passed))
            for name, lhs, rhs, ok in checks:
                rows.append((tau, n, name, lhs, rhs, ok))
                all_pass = all_pass and ok
            payload["taus"].setdefault(str(tau), {})[str(n)] = [
                {"name": c[0], "lhs": c[1], "rhs": c[2], "pass": c[3]}
                for c in checks]
        payload[f"ledger_n{n}"] = ledger.as_dict()
    _write_csv(os.path.join(out_dir, "bounds.csv"),
               ["tau", "n", "check", "lhs", "rhs", "pass"], rows)
    return payload, all_pass


def _mode_noise_check(cfg, out_dir):
    rows, all_pass = [], True
    payload = {}
    for tau in cfg.tau_grid:
        table = verify_regularity(cfg.noise, tau, cfg.problem.dimension,
                                  cfg.r_max, max(cfg.reps, 1000), cfg.seed)
        for row in table:
            rows.append((tau, row.r, row.empirical, row.bound, row.passed,
                         row.empirical_constant))
            if row.passed is False:
                all_pass = False
        payload[str(tau)] = [asdict(r) for r in table]
    _write_csv(os.path.join(out_dir, "noise_check.csv"),
               ["tau", "r", "empirical", "bound", "pass",
                "empirical_constant"], rows)
    return payload, all_pass


def _mode_coverage(cfg, out_dir, threads):
    n = cfg.moment_orders[0]
    rep = convergence_study(cfg.problem, cfg.integrator, cfg.noise,
                            cfg.tau_grid, cfg.reps, cfg.seed, n=n,
                            threads=threads,
                            order_tolerance=cfg.order_tolerance)
    tau = cfg.coverage_tau or cfg.tau_grid[len(cfg.tau_grid) // 2]
    errs, _ = ensemble_sup_errors(cfg.problem, cfg.integrator, cfg.noise,
                                  tau, cfg.reps, cfg.seed, threads=threads)
    rate = 2.0 * theoretical_rate(cfg.noise, cfg.integrator.order_q)
    c_hat = math.exp(2.0 * rep.intercept) if rep.intercept is not None else 1.0
    if cfg.r_grid:
        r_values = [float(r) for r in cfg.r_grid]
    else:
        rms = float(np.sqrt(np.mean(errs ** 2)))
        r_values = list(rms * np.geomspace(0.5, 8.0, 10))
    rows = coverage_report(errs, r_values, c_hat, rate, tau)
    _write_csv(os.path.join(out_dir, "coverage.csv"),
               ["r", "empirical", "bound", "pass"],
               [(r.r, r.empirical, r.bound, r.passed) for r in rows])
    verdict = all(r.passed for r in rows)
    payload = {"tau": tau, "C_hat": c_hat, "rate": rate,
               "fit": {"slope": rep.fitted_order,
                       "intercept": rep.intercept},
               "rows": [asdict(r) for r in rows]}
    return payload, verdict


def run_experiment(cfg, out_dir=".", threads=1, fmt="csv", override_c2=None):
    """Dispatch one experiment; returns (manifest dict, verdict bool)."""
    os.makedirs(out_dir, exist_ok=True)
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if cfg.mode == "convergence":
        payload, verdict = _mode_convergence(cfg, out_dir, threads,
                                             dense=False)
    elif cfg.mode == "convergence_continuous":
        payload, verdict = _mode_convergence(cfg, out_dir, threads,
                                             dense=True)
    elif cfg.mode == "bounds":
        payload, verdict = _mode_bounds(cfg, out_dir, threads, override_c2)
    elif cfg.mode == "noise_check":
        payload, verdict = _mode_noise_check(cfg, out_dir)
    elif cfg.mode == "coverage":
        payload, verdict = _mode_coverage(cfg, out_dir, threads)
    else:  # pragma: no cover - parse_config rejects unknown modes
        raise ConfigError(f"unknown mode {cfg.mode!r}")
    finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    artifacts = sorted(f for f in os.listdir(out_dir)
                       if f.endswith(".csv") or f == "report.json")
    manifest = {
        "tool": "randode",
        "version": __version__,
        "config": cfg.echo,
        "started": started,
        "finished": finished,
        "per_tau_seeds": {str(t): cfg.seed for t in cfg.tau_grid},
        "outputs": artifacts,
        "verdict": "pass" if verdict else "fail",
    }
    report = {"manifest": manifest, "results": payload}
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, default=_json_default)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)
    return manifest, verdict


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return str(obj)
