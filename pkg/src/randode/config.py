"""Experiment configuration: a single human-editable JSON file.

Schema (defaults in parentheses):

    mode            one of convergence, convergence_continuous, bounds,
                    noise_check, coverage ("convergence")
    problem         {"name": <catalog key>} or bare string ("linear_decay")
    integrator      {"name": <euler|heun|rk4|implicit_euler>, optional
                    "newton_tol", "max_newton_iters", "fixed_point_fallback"}
                    ("euler")
    noise           {"name": <gauss_endpoint|ibm_path|bounded_uniform|biased|
                    zero>, "p" (1.0), "C_xi" (1.0), "bias_fraction" (0.5),
                    "as_bounded" (null)}
    tau_grid        decreasing positive reals, each dividing horizon_T
                    ([2^-4 .. 2^-9])
    reps            ensemble size M (200)
    moment_orders   list of n values ([1])
    horizon_T       final time (1.0)
    seed            64-bit integer (0)
    subgrid         dense points per step, continuous mode (16)
    order_tolerance verdict tolerance on the fitted slope (0.25)
    r_max           highest moment order for noise_check (4)
    coverage_tau    tau at which coverage is evaluated (middle of tau_grid)
    r_grid          radii for coverage mode (auto from the error scale)

Every key is echoed into the run manifest.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .integrators import get_integrator, tau_cap
from .noise import make_noise
from .problems import builtin_problem, mesh_size

MODES = ("convergence", "convergence_continuous", "bounds", "noise_check",
         "coverage")

_TOP_KEYS = {"mode", "problem", "integrator", "noise", "tau_grid", "reps",
             "moment_orders", "horizon_T", "seed", "subgrid",
             "order_tolerance", "r_max", "coverage_tau", "r_grid"}
_NOISE_KEYS = {"name", "p", "C_xi", "bias_fraction", "as_bounded"}
_INTEGRATOR_KEYS = {"name", "newton_tol", "max_newton_iters",
                    "fixed_point_fallback"}
_PROBLEM_KEYS = {"name"}

DEFAULT_TAU_GRID = [2.0 ** -k for k in range(4, 10)]


@dataclass
class ExperimentConfig:
    mode: str
    problem: object
    integrator: object
    noise: object
    tau_grid: list
    reps: int
    moment_orders: list
    horizon_T: float
    seed: int
    subgrid: int
    order_tolerance: float
    r_max: int
    coverage_tau: Optional[float]
    r_grid: Optional[list]
    echo: dict = field(default_factory=dict)


def _section(raw, key, allowed, default_name):
    sec = raw.get(key, {"name": default_name})
    if isinstance(sec, str):
        sec = {"name": sec}
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{key}' section: "
                          f"{', '.join(sorted(unknown))}")
    return sec


def parse_config(raw):
    """Validate a raw config dict and resolve all objects and defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    mode = raw.get("mode", "convergence")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of "
                          f"{', '.join(MODES)}")
    prob_sec = _section(raw, "problem", _PROBLEM_KEYS, "linear_decay")
    int_sec = _section(raw, "integrator", _INTEGRATOR_KEYS, "euler")
    noise_sec = _section(raw, "noise", _NOISE_KEYS, "gauss_endpoint")

    problem = builtin_problem(prob_sec["name"])
    horizon = float(raw.get("horizon_T", problem.horizon_T))
    problem.horizon_T = horizon
    integrator = get_integrator(
        int_sec["name"],
        **{k: v for k, v in int_sec.items() if k != "name"})
    def _opt(sec, key, default):
        val = sec.get(key)
        return default if val is None else val

    noise = make_noise(
        _opt(noise_sec, "name", "gauss_endpoint"),
        p=float(_opt(noise_sec, "p", 1.0)),
        C_xi=float(_opt(noise_sec, "C_xi", 1.0)),
        bias_fraction=float(_opt(noise_sec, "bias_fraction", 0.5)),
        as_bounded=noise_sec.get("as_bounded"))

    tau_grid = [float(t) for t in raw.get("tau_grid", DEFAULT_TAU_GRID)]
    if any(t <= 0 for t in tau_grid):
        raise ConfigError("tau_grid entries must be positive")
    tau_grid = sorted(tau_grid, reverse=True)
    for tau in tau_grid:
        try:
            mesh_size(horizon, tau)
        except Exception as exc:
            raise ConfigError(f"tau = {tau}: {exc}") from None
        cap = tau_cap(integrator, problem.field)
        if tau >= cap:
            raise ConfigError(
                f"tau = {tau} >= step cap {cap} = min(tau_star, 1/(2|beta|)) "
                f"required for implicit Euler on a dissipative field")

    reps = int(raw.get("reps", 200))
    if reps < 1:
        raise ConfigError("reps must be >= 1")
    moment_orders = [int(n) for n in raw.get("moment_orders", [1])]
    if any(n < 1 for n in moment_orders):
        raise ConfigError("moment orders must be positive integers")

    coverage_tau = raw.get("coverage_tau")
    if coverage_tau is not None:
        coverage_tau = float(coverage_tau)
        if coverage_tau not in tau_grid:
            raise ConfigError("coverage_tau must be one of the tau_grid "
                              "entries")

    cfg = ExperimentConfig(
        mode=mode, problem=problem, integrator=integrator, noise=noise,
        tau_grid=tau_grid, reps=reps, moment_orders=moment_orders,
        horizon_T=horizon, seed=int(raw.get("seed", 0)),
        subgrid=int(raw.get("subgrid", 16)),
        order_tolerance=float(raw.get("order_tolerance", 0.25)),
        r_max=int(raw.get("r_max", 4)), coverage_tau=coverage_tau,
        r_grid=raw.get("r_grid"))
    cfg.echo = echo_dict(cfg, raw)
    return cfg


def echo_dict(cfg, raw):
    """Full config with defaults filled, for the manifest."""
    noise_sec = raw.get("noise", {})
    if isinstance(noise_sec, str):
        noise_sec = {"name": noise_sec}
    return {
        "mode": cfg.mode,
        "problem": {"name": cfg.problem.name},
        "integrator": {"name": cfg.integrator.name,
                       "newton_tol": cfg.integrator.newton_tol,
                       "max_newton_iters": cfg.integrator.max_newton_iters},
        "noise": {"name": cfg.noise.name,
                  "p": cfg.noise.params.p,
                  "C_xi": cfg.noise.params.C_xi,
                  "bias_fraction": getattr(cfg.noise, "bias_fraction", None),
                  "as_bounded": cfg.noise.params.as_bounded},
        "tau_grid": cfg.tau_grid,
        "reps": cfg.reps,
        "moment_orders": cfg.moment_orders,
        "horizon_T": cfg.horizon_T,
        "seed": cfg.seed,
        "subgrid": cfg.subgrid,
        "order_tolerance": cfg.order_tolerance,
        "r_max": cfg.r_max,
        "coverage_tau": cfg.coverage_tau,
        "r_grid": cfg.r_grid,
    }


def load_config(path):
    """Read and validate a JSON config file."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_config(raw)
