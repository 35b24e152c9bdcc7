"""Laboratory for randomly perturbed one-step ODE integrators.

Implements the recursion U_{k+1} = Psi^tau(U_k) + xi_k(tau) for a catalog
of test problems, deterministic one-step maps (explicit Runge-Kutta family
and implicit Euler), admissible noise models, explicit theorem constants,
and a Monte Carlo harness that verifies the proven mean-square uniform
convergence rates and moment bounds empirically.
"""

__version__ = "0.1.0"

from .analysis import (BoundCheck, ConvergenceReport, as_path_bound_check,
                       convergence_study, coverage_report, fit_order,
                       local_truncation_moment_probe, moment_bound_check,
                       noise_sum_moment_check, sup_error)
from .constants import ConstantsLedger, constants_ledger
from .integrators import (IntegratorSpec, StepResult, explicit_step,
                          get_integrator, implicit_euler_step,
                          local_truncation_probe)
from .noise import (NoiseDraw, NoiseParams, make_noise, verify_regularity)
from .problems import (Problem, RegularityMeta, VectorField, builtin_problem,
                       dissipativity_probe, reference_trajectory)
from .solver import (InterpolantRun, RandomisedRun, run_ensemble,
                     solve_continuous, solve_discrete)

__all__ = [
    "BoundCheck", "ConvergenceReport", "ConstantsLedger", "IntegratorSpec",
    "InterpolantRun", "NoiseDraw", "NoiseParams", "Problem", "RandomisedRun",
    "RegularityMeta", "StepResult", "VectorField", "as_path_bound_check",
    "builtin_problem", "constants_ledger", "convergence_study",
    "coverage_report", "dissipativity_probe", "explicit_step", "fit_order",
    "get_integrator", "implicit_euler_step", "local_truncation_moment_probe",
    "local_truncation_probe", "make_noise", "moment_bound_check",
    "noise_sum_moment_check", "reference_trajectory", "run_ensemble",
    "solve_continuous", "solve_discrete", "sup_error", "verify_regularity",
]
