"""Initial value problems: vector fields, regularity metadata, references.

The catalog carries four test problems with verified regularity metadata.
Reference trajectories use the analytic flow when one is available and a
sub-stepped classical RK4 oracle otherwise.
"""

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import CatalogError, DivergenceError, MeshError
from .rng import substream

CATALOG_KEYS = ("linear_decay", "harmonic", "cubic_dissipative", "lorenz63")

# Explicit methods outside this ball are reported as diverged, not NaN.
DEFAULT_ADMISSIBLE_RADIUS = 100.0


@dataclass
class RegularityMeta:
    """Regularity constants attached to a vector field.

    lipschitz_L     global Lipschitz constant, if one exists
    one_sided_mu    one-sided Lipschitz constant (<= lipschitz_L when both set)
    poly_growth     pair (C_growth >= 1, s >= 1) for locally Lipschitz fields
    dissipativity   pair (alpha >= 0, beta) with <f(v), v> <= alpha + beta|v|^2
    tau_star        step-size scale in (0, 1] below which flow estimates hold
    """
    lipschitz_L: Optional[float] = None
    one_sided_mu: Optional[float] = None
    poly_growth: Optional[tuple] = None
    dissipativity: Optional[tuple] = None
    tau_star: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.tau_star <= 1.0):
            raise ValueError(f"tau_star must lie in (0, 1], got {self.tau_star}")
        if self.lipschitz_L is not None:
            if self.one_sided_mu is None:
                raise ValueError("lipschitz_L given without one_sided_mu")
            if self.one_sided_mu > self.lipschitz_L:
                raise ValueError("one_sided_mu must not exceed lipschitz_L")
        if self.poly_growth is not None:
            c, s = self.poly_growth
            if c < 1.0 or s < 1.0:
                raise ValueError("poly_growth requires C >= 1 and s >= 1")
        if self.dissipativity is not None and self.dissipativity[0] < 0.0:
            raise ValueError("dissipativity alpha must be nonnegative")


@dataclass
class VectorField:
    """Right-hand side f of an autonomous ODE with regularity metadata."""
    dimension: int
    eval: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    regularity: RegularityMeta = dc_field(default_factory=RegularityMeta)
    admissible_radius: float = DEFAULT_ADMISSIBLE_RADIUS

    def __call__(self, x):
        return self.eval(x)


@dataclass
class Problem:
    """A vector field together with an initial state and horizon."""
    name: str
    field: VectorField
    u0: np.ndarray
    horizon_T: float
    analytic_flow: Optional[Callable[[float, np.ndarray], np.ndarray]] = None

    @property
    def dimension(self):
        return self.field.dimension


def _linear_decay(lam=1.0):
    def f(u):
        return -lam * u

    def jac(u):
        return np.array([[-lam]])

    meta = RegularityMeta(lipschitz_L=lam, one_sided_mu=-lam, tau_star=1.0)
    fld = VectorField(1, f, jac, meta)

    def flow(t, x):
        return math.exp(-lam * t) * np.asarray(x, dtype=float)

    return Problem("linear_decay", fld, np.array([1.0]), 1.0, flow)


def _harmonic():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])

    def f(u):
        return rot @ u

    def jac(u):
        return rot

    meta = RegularityMeta(lipschitz_L=1.0, one_sided_mu=0.0, tau_star=1.0)
    fld = VectorField(2, f, jac, meta)

    def flow(t, x):
        c, s = math.cos(t), math.sin(t)
        x = np.asarray(x, dtype=float)
        return np.array([c * x[0] - s * x[1], s * x[0] + c * x[1]])

    return Problem("harmonic", fld, np.array([1.0, 0.0]), 1.0, flow)


def _cubic_dissipative():
    def f(u):
        return u - u ** 3

    def jac(u):
        return np.array([[1.0 - 3.0 * float(u[0]) ** 2]])

    # <f(v), v> = v^2 - v^4 <= 1/4, attained at v^2 = 1/2.
    meta = RegularityMeta(one_sided_mu=1.0, poly_growth=(2.0, 2.0),
                          dissipativity=(0.25, 0.0), tau_star=1.0)
    fld = VectorField(1, f, jac, meta)

    def flow(t, x):
        # closed form for u' = u - u^3 (logistic in u^2)
        x = np.asarray(x, dtype=float)
        x0 = float(x[0])
        if x0 == 0.0:
            return np.array([0.0])
        denom = 1.0 + x0 ** 2 * (math.exp(2.0 * t) - 1.0)
        return np.array([x0 * math.exp(t) / math.sqrt(denom)])

    # Start on the fast transient towards the u = 1 equilibrium so that the
    # O(tau) method error is visible against the injected noise.
    return Problem("cubic_dissipative", fld, np.array([2.0]), 1.0, flow)


def _lorenz63(sigma=10.0, rho=28.0, b=8.0 / 3.0):
    def f(u):
        x, y, z = u
        return np.array([sigma * (y - x), x * (rho - z) - y, x * y - b * z])

    def jac(u):
        x, y, z = u
        return np.array([[-sigma, sigma, 0.0],
                         [rho - z, -1.0, -x],
                         [y, x, -b]])

    # beta = (sigma + rho)/2 dominates the cross terms; probe-certified on
    # a radius-100 ball (see tests).
    meta = RegularityMeta(poly_growth=(30.0, 1.0),
                          dissipativity=(0.0, (sigma + rho) / 2.0),
                          tau_star=0.1)
    fld = VectorField(3, f, jac, meta)
    return Problem("lorenz63", fld, np.array([1.0, 1.0, 1.0]), 1.0, None)


_BUILDERS = {
    "linear_decay": _linear_decay,
    "harmonic": _harmonic,
    "cubic_dissipative": _cubic_dissipative,
    "lorenz63": _lorenz63,
}


def builtin_problem(name):
    """Return a fully populated catalog problem."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise CatalogError(
            f"unknown problem {name!r}; available: {', '.join(CATALOG_KEYS)}"
        ) from None
    return builder()


def dissipativity_probe(field, alpha, beta, samples=10_000, radius=10.0,
                        rng_seed=0):
    """Check <f(v), v> <= alpha + beta |v|^2 on sampled states.

    Returns (ok, worst_margin) where worst_margin is the largest value of
    <f(v), v> - alpha - beta |v|^2 over the sample; ok means worst <= 0.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    gen = substream(rng_seed)
    d = field.dimension
    worst = -math.inf
    for _ in range(int(samples)):
        v = gen.standard_normal(d)
        nv = np.linalg.norm(v)
        if nv > 0:
            v *= gen.uniform(0.0, radius) / nv
        fv = field.eval(v)
        if not np.all(np.isfinite(fv)):
            raise DivergenceError(f"non-finite field value at v = {v.tolist()}")
        margin = float(fv @ v) - alpha - beta * float(v @ v)
        worst = max(worst, margin)
    return worst <= 0.0, worst


def mesh_size(horizon_T, tau):
    """Number of steps K with K * tau = T, or a MeshError."""
    ratio = horizon_T / tau
    K = round(ratio)
    if K < 1 or abs(ratio - K) > 1e-9 * max(1.0, ratio):
        raise MeshError(f"horizon {horizon_T} is not an integer multiple of "
                        f"tau = {tau}")
    return K


def rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def flow_oracle(problem, horizon, x, refinement=100):
    """Evaluate the exact flow at the given horizon from state x.

    Uses the analytic flow when available, otherwise RK4 with the given
    number of substeps.
    """
    if problem.analytic_flow is not None:
        return problem.analytic_flow(horizon, x)
    y = np.asarray(x, dtype=float)
    h = horizon / refinement
    for _ in range(int(refinement)):
        y = rk4_step(problem.field.eval, y, h)
    return y


def reference_trajectory(problem, mesh_tau, refinement=100):
    """Exact-solution values on the mesh t_k = k * tau, k = 0..K."""
    if refinement < 1:
        raise ValueError("refinement must be >= 1")
    K = mesh_size(problem.horizon_T, mesh_tau)
    d = problem.dimension
    out = np.empty((K + 1, d))
    out[0] = problem.u0
    if problem.analytic_flow is not None:
        for k in range(1, K + 1):
            out[k] = problem.analytic_flow(k * mesh_tau, problem.u0)
    else:
        f = problem.field.eval
        h = mesh_tau / refinement
        y = np.asarray(problem.u0, dtype=float)
        for k in range(1, K + 1):
            for _ in range(int(refinement)):
                y = rk4_step(f, y, h)
            if not np.all(np.isfinite(y)):
                raise DivergenceError(f"reference trajectory diverged at "
                                      f"index {k}")
            out[k] = y
    return out


def reference_to_csv(problem, trajectory, tau, path):
    """Write a reference trajectory as CSV (k, t, u_1..u_d)."""
    d = trajectory.shape[1]
    header = "k,t," + ",".join(f"u_{i + 1}" for i in range(d))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for k, row in enumerate(trajectory):
            vals = ",".join(repr(float(v)) for v in row)
            fh.write(f"{k},{k * tau!r},{vals}\n")
