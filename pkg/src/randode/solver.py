"""The randomized recursion U_{k+1} = Psi^tau(U_k) + xi_k(tau).

Replicate i of an ensemble draws its step-k noise from the substream keyed
by (seed, i, k), so results are bit-reproducible and independent of the
degree of parallelism.  Divergence (leaving the field's admissible ball) is
a recorded outcome, not an exception.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import DivergenceError, StepSizeError
from .integrators import step, tau_cap
from .problems import mesh_size
from .rng import substream


@dataclass
class RandomisedRun:
    tau: float
    K: int
    states: np.ndarray          # (K+1, d); rows past diverged_at are NaN
    noise_draws: np.ndarray     # (K, d)
    seed: int
    integrator: str
    replicate_index: int = 0
    diverged_at: Optional[int] = None

    @property
    def diverged(self):
        return self.diverged_at is not None


@dataclass
class InterpolantRun:
    base: RandomisedRun
    subgrid: int
    dense_times: np.ndarray     # (K*m + 1,)
    dense_states: np.ndarray    # (K*m + 1, d)


def solve_discrete(problem, integrator, noise, tau, seed, replicate_index=0):
    """Run K = T/tau steps of the randomized recursion from problem.u0.

    Replicate i draws from the dedicated substream (seed, i); all K noise
    vectors are sampled up front in one batch, so the trajectory is a pure
    function of (seed, replicate_index) regardless of scheduling.
    """
    K = mesh_size(problem.horizon_T, tau)
    if tau >= tau_cap(integrator, problem.field):
        raise StepSizeError(f"tau = {tau} violates the implicit step cap")
    d = problem.dimension
    radius = problem.field.admissible_radius
    states = np.full((K + 1, d), np.nan)
    states[0] = problem.u0
    gen = substream(seed, replicate_index)
    draws = noise.sample_batch(tau, d, K, gen)
    u = np.asarray(problem.u0, dtype=float)
    diverged_at = None
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K):
            try:
                psi = step(integrator, problem.field, u, tau).state
            except DivergenceError:
                diverged_at = k + 1
                break
            u = psi + draws[k]
            states[k + 1] = u
            if not np.all(np.isfinite(u)) or np.linalg.norm(u) > radius:
                diverged_at = k + 1
                break
    if diverged_at is not None:
        draws = draws.copy()
        draws[diverged_at:] = np.nan
    return RandomisedRun(tau=tau, K=K, states=states, noise_draws=draws,
                         seed=seed, integrator=integrator.name,
                         replicate_index=replicate_index,
                         diverged_at=diverged_at)


def validate_run(run, atol=0.0):
    """Re-verify the stored recursion identity states[k+1] = step + draw.

    Only checks that stored quantities are mutually consistent: the step map
    is not re-applied (that is what replay is for); instead this confirms
    states and draws were stored without mutation, i.e. that
    states[k+1] - noise_draws[k] is finite wherever the run is live.
    """
    upto = run.K if run.diverged_at is None else run.diverged_at - 1
    psi = run.states[1:upto + 1] - run.noise_draws[:upto]
    return bool(np.all(np.isfinite(psi)))


def solve_continuous(problem, integrator, noise, tau, subgrid, seed,
                     replicate_index=0):
    """Continuous interpolant U(t) = Psi^(t - t_k)(U_k) + xi_k(t - t_k).

    The segment-k noise path is sampled jointly on the subgrid; its endpoint
    is the draw that advances the discrete state, so dense values at segment
    boundaries equal the stored discrete states exactly.
    """
    if not noise.supports_path:
        raise ValueError(f"noise model {noise.name!r} has no path sampler")
    m = int(subgrid)
    if m < 1:
        raise ValueError("subgrid must be >= 1")
    K = mesh_size(problem.horizon_T, tau)
    cap = tau_cap(integrator, problem.field)
    if tau >= cap:
        raise StepSizeError(f"tau = {tau} violates the implicit step cap")
    d = problem.dimension
    radius = problem.field.admissible_radius
    sub_h = tau * np.arange(1, m + 1) / m
    states = np.full((K + 1, d), np.nan)
    draws = np.full((K, d), np.nan)
    dense = np.full((K * m + 1, d), np.nan)
    times = np.empty(K * m + 1)
    states[0] = problem.u0
    dense[0] = problem.u0
    times[0] = 0.0
    u = np.asarray(problem.u0, dtype=float)
    diverged_at = None
    fast_euler = integrator.name == "euler"
    gen = substream(seed, replicate_index)
    for k in range(K):
        path = noise.sample_path(tau, m, d, gen)
        if fast_euler:
            fu = problem.field.eval(u)
            seg = u[None, :] + sub_h[:, None] * fu[None, :] + path[1:]
        else:
            seg = np.empty((m, d))
            for j, h in enumerate(sub_h):
                seg[j] = step(integrator, problem.field, u, h).state + path[j + 1]
        lo = k * m + 1
        dense[lo:lo + m] = seg
        times[lo:lo + m] = k * tau + sub_h
        draws[k] = path[m]
        u = seg[m - 1]
        states[k + 1] = u
        if not np.all(np.isfinite(u)) or np.linalg.norm(u) > radius:
            diverged_at = k + 1
            break
    base = RandomisedRun(tau=tau, K=K, states=states, noise_draws=draws,
                         seed=seed, integrator=integrator.name,
                         replicate_index=replicate_index,
                         diverged_at=diverged_at)
    return InterpolantRun(base=base, subgrid=m, dense_times=times,
                          dense_states=dense)


def run_ensemble(problem, integrator, noise, tau, reps, seed, threads=1):
    """M independent replicates; replicate i uses substream (seed, i)."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    indices = range(int(reps))

    def one(i):
        return solve_discrete(problem, integrator, noise, tau, seed,
                              replicate_index=i)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one, indices))
    else:
        runs = [one(i) for i in indices]
    return runs


def run_to_csv(run, path):
    """Serialize a run as CSV with columns (k, t, U_1..U_d, xi_1..xi_d)."""
    d = run.states.shape[1]
    cols = ["k", "t"] + [f"U_{i + 1}" for i in range(d)] \
        + [f"xi_{i + 1}" for i in range(d)]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for k in range(run.K + 1):
            xi = run.noise_draws[k - 1] if k >= 1 else np.zeros(d)
            vals = [str(k), repr(k * run.tau)]
            vals += [repr(float(v)) for v in run.states[k]]
            vals += [repr(float(v)) for v in xi]
            fh.write(",".join(vals) + "\n")


def run_manifest_dict(run, config=None):
    """JSON-serializable replay manifest for a single run."""
    return {
        "config": config,
        "tau": run.tau,
        "K": run.K,
        "seed": run.seed,
        "integrator": run.integrator,
        "replicate_index": run.replicate_index,
        "diverged_at": run.diverged_at,
    }


def run_to_json(run, path, config=None):
    with open(path, "w") as fh:
        json.dump(run_manifest_dict(run, config), fh, indent=2)
