"""Deterministic one-step maps of known order, including implicit Euler.

Shipped integrators: euler (order 1), heun (2), rk4 (4), implicit_euler (1).
The implicit solve uses Newton's method with the analytic Jacobian when the
field provides one, a finite-difference Jacobian otherwise, and an optional
damped fixed-point fallback.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (CatalogError, DivergenceError, NonconvergenceError,
                     StepSizeError)
from .problems import flow_oracle

INTEGRATOR_NAMES = ("euler", "heun", "rk4", "implicit_euler")

PRECISION_FLOOR = 1e-13


@dataclass(frozen=True)
class IntegratorSpec:
    name: str
    order_q: int
    kind: str  # "explicit" | "implicit"
    newton_tol: float = 1e-12
    max_newton_iters: int = 50
    fixed_point_fallback: bool = True


@dataclass(frozen=True)
class StepResult:
    state: np.ndarray
    newton_iterations: int = 0
    residual_norm: float = 0.0


_SPECS = {
    "euler": IntegratorSpec("euler", 1, "explicit"),
    "heun": IntegratorSpec("heun", 2, "explicit"),
    "rk4": IntegratorSpec("rk4", 4, "explicit"),
    "implicit_euler": IntegratorSpec("implicit_euler", 1, "implicit"),
}


def get_integrator(name, **overrides):
    try:
        spec = _SPECS[name]
    except KeyError:
        raise CatalogError(
            f"unknown integrator {name!r}; available: "
            f"{', '.join(INTEGRATOR_NAMES)}") from None
    if overrides:
        spec = IntegratorSpec(**{**spec.__dict__, **overrides})
    return spec


def tau_cap(spec, field):
    """Largest admissible step for the spec on the given field.

    Implicit Euler on a field with declared dissipativity (alpha, beta) is
    capped at min(tau_star, 1/(2|beta|)); the second term is dropped when
    beta = 0.  Explicit methods are uncapped.
    """
    if spec.kind != "implicit":
        return math.inf
    meta = field.regularity
    if meta.dissipativity is None:
        return meta.tau_star
    _, beta = meta.dissipativity
    if beta == 0.0:
        return meta.tau_star
    return min(meta.tau_star, 1.0 / (2.0 * abs(beta)))


def _check_finite(x, label):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"non-finite value in {label}")
    return x


def explicit_step(spec, field, x, tau):
    """Apply one explicit step; raises DivergenceError on non-finite stages."""
    if spec.kind != "explicit":
        raise ValueError(f"{spec.name} is not an explicit method")
    if tau <= 0:
        raise ValueError("tau must be positive")
    f = field.eval
    x = np.asarray(x, dtype=float)
    # Non-finite stage values propagate to the output, so one check there
    # suffices and keeps the hot loop cheap.
    if spec.name == "euler":
        out = x + tau * f(x)
    elif spec.name == "heun":
        k1 = f(x)
        k2 = f(x + tau * k1)
        out = x + 0.5 * tau * (k1 + k2)
    elif spec.name == "rk4":
        k1 = f(x)
        k2 = f(x + 0.5 * tau * k1)
        k3 = f(x + 0.5 * tau * k2)
        k4 = f(x + tau * k3)
        out = x + (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:  # pragma: no cover
        raise CatalogError(f"unknown explicit method {spec.name!r}")
    return StepResult(_check_finite(out, f"{spec.name} output"))


def _fd_jacobian(f, x, fx):
    d = x.size
    J = np.empty((d, d))
    h = 1e-7 * (1.0 + np.linalg.norm(x))
    for j in range(d):
        xp = x.copy()
        xp[j] += h
        J[:, j] = (f(xp) - fx) / h
    return J


def implicit_euler_step(spec, field, x, tau, enforce_cap=True):
    """Solve U = x + tau f(U) by Newton's method from the guess x + tau f(x).

    The continuation-from-zero root is targeted: the initial guess is the
    tau -> 0 limit of the solution plus one explicit correction, and no
    other roots are searched for.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if enforce_cap:
        cap = tau_cap(spec, field)
        if tau >= cap:
            raise StepSizeError(
                f"tau = {tau} >= cap {cap} = min(tau_star, 1/(2|beta|)) for "
                f"implicit Euler on this field")
    f = field.eval
    x = np.asarray(x, dtype=float)
    d = x.size
    fx = _check_finite(f(x), "implicit Euler predictor")
    u = x + tau * fx
    eye = np.eye(d)
    resid = math.inf
    for it in range(1, spec.max_newton_iters + 1):
        fu = f(u)
        g = u - x - tau * fu
        resid = float(np.linalg.norm(g))
        if not math.isfinite(resid):
            break
        if resid <= spec.newton_tol:
            return StepResult(u, newton_iterations=it, residual_norm=resid)
        if field.jacobian is not None:
            Jf = field.jacobian(u)
        else:
            Jf = _fd_jacobian(f, u, fu)
        try:
            if d == 1:
                denom = 1.0 - tau * float(Jf[0, 0])
                if denom == 0.0:
                    raise np.linalg.LinAlgError
                delta = g / denom
            else:
                delta = np.linalg.solve(eye - tau * Jf, g)
        except np.linalg.LinAlgError:
            break
        u = u - delta
    # Newton stagnated or blew up: damped fixed-point iteration.
    if spec.fixed_point_fallback:
        u = x + tau * fx
        for it in range(1, 4 * spec.max_newton_iters + 1):
            g = u - x - tau * f(u)
            resid = float(np.linalg.norm(g))
            if not math.isfinite(resid):
                break
            if resid <= spec.newton_tol:
                return StepResult(u, newton_iterations=it, residual_norm=resid)
            u = u - 0.5 * g
    raise NonconvergenceError(
        f"implicit Euler failed to converge (last residual {resid:.3e})",
        residual=resid)


def step(spec, field, x, tau):
    """Dispatch on integrator kind."""
    if spec.kind == "implicit":
        return implicit_euler_step(spec, field, x, tau)
    return explicit_step(spec, field, x, tau)


def local_truncation_probe(spec, problem, x, taus, refinement=1000):
    """Least-squares slope of log |Psi^tau(x) - Phi^tau(x)| against log tau.

    Errors below the precision floor are excluded from the fit with a
    warning.  A method of order q has slope q + 1.
    """
    taus = np.asarray(taus, dtype=float)
    if taus.size < 4:
        raise ValueError("need at least 4 tau values")
    x = np.asarray(x, dtype=float)
    logs_t, logs_e = [], []
    for tau in taus:
        approx = step(spec, problem.field, x, tau).state
        exact = flow_oracle(problem, tau, x, refinement=refinement)
        err = float(np.linalg.norm(approx - exact))
        if err < PRECISION_FLOOR:
            warnings.warn(f"local truncation error {err:.2e} at tau = {tau} "
                          "is below the precision floor; point excluded")
            continue
        logs_t.append(math.log(tau))
        logs_e.append(math.log(err))
    if len(logs_t) < 2:
        raise ValueError("too few points above the precision floor")
    slope = np.polyfit(logs_t, logs_e, 1)[0]
    return float(slope)
