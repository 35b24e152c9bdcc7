import numpy as np
import pytest

from randode import (builtin_problem, get_integrator, make_noise,
                     run_ensemble)
from randode.constants import c2_constant

CUBIC_TAUS = [2.0 ** -k for k in range(4, 9)]
CUBIC_SEED = 20260826


@pytest.fixture(scope="session")
def cubic_setup():
    problem = builtin_problem("cubic_dissipative")
    integrator = get_integrator("implicit_euler")
    noise = make_noise("gauss_endpoint", p=1.5)
    return problem, integrator, noise


@pytest.fixture(scope="session")
def cubic_c2(cubic_setup):
    problem, _, _ = cubic_setup
    alpha, beta = problem.field.regularity.dissipativity
    tau_prime = problem.field.regularity.tau_star if beta == 0.0 \
        else min(problem.field.regularity.tau_star, 1.0 / (2.0 * abs(beta)))
    return c2_constant(alpha, beta, tau_prime,
                       float(np.linalg.norm(problem.u0)), problem.horizon_T)


@pytest.fixture(scope="session")
def cubic_ensembles(cubic_setup):
    """2000 implicit-Euler paths of the cubic problem at each dyadic tau.

    Shared by the almost-sure and moment bound checks; replicate-indexed
    substreams make the first 200 paths identical to a 200-path run.
    """
    problem, integrator, noise = cubic_setup
    return {tau: run_ensemble(problem, integrator, noise, tau,
                              reps=2000, seed=CUBIC_SEED, threads=4)
            for tau in CUBIC_TAUS}
