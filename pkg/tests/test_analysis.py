import math

import numpy as np
import pytest

from randode import (builtin_problem, convergence_study, coverage_report,
                     fit_order, get_integrator, make_noise, run_ensemble,
                     solve_discrete)
from randode.analysis import (as_path_bound_check, ensemble_sup_errors,
                              local_truncation_moment_probe,
                              measure_flow_lipschitz, measure_lte_constant,
                              moment_bound_check, noise_sum_moment_check,
                              sup_error, theoretical_rate)
from randode.constants import (c1_constant, c2_constant, c_odeflow_n,
                               constants_ledger, thm31_constant)
from randode.errors import StatisticalPowerError
from randode.problems import reference_trajectory


def test_fit_order_exact_power_law():
    taus = [2.0 ** -k for k in range(3, 12)]
    for a, c in [(2.0, 0.7), (0.5, 3.0), (4.0, 1e-3)]:
        errors = [c * t ** a for t in taus]
        slope, intercept, residual = fit_order(taus, errors)
        assert abs(slope - a) < 1e-10
        assert abs(intercept - math.log(c)) < 1e-10
        assert residual < 1e-20


def test_fit_order_drops_nonpositive_with_warning():
    taus = [0.5, 0.25, 0.125, 0.0625]
    errors = [0.5, 0.25, 0.125, 0.0]
    with pytest.warns(UserWarning):
        slope, _, _ = fit_order(taus, errors)
    assert abs(slope - 1.0) < 1e-10
    with pytest.raises(ValueError):
        with pytest.warns(UserWarning):
            fit_order(taus, [1.0, 0.0, 0.0, 0.0])


def test_constants_spot_values():
    assert abs(c1_constant(1.0, 1.0) - 7.0) < 1e-12
    assert abs(c_odeflow_n(1, 1.0, 1.0) - 7.0) < 1e-12
    assert abs(c2_constant(0.0, 0.0, 0.5, 0.0, 1.0) - 1.5 * math.e) < 1e-12


def test_constants_ledger_structure():
    led = constants_ledger(C_phi=1.0, C_psi=1.0, C_xiR=1.0, tau_star=1.0,
                           T=1.0, n=1, alpha=0.25, beta=0.0, U0_norm=0.5,
                           s=2.0, u_sup=1.0, p=1.5)
    d = led.as_dict()
    for key in ("C1", "C_thm31", "C_odeflow_n", "C_bar", "C2", "C6", "C7",
                "C7_alt", "C8", "inputs"):
        assert key in d
    assert led.C_thm31 == pytest.approx(
        thm31_constant(1.0, 1.0, 1.0, 1.0, 1.0))
    assert led.C7 != led.C7_alt  # both C* choices are recorded
    # monotonicity sanity: constants grow with the moment order
    led2 = constants_ledger(C_phi=1.0, C_psi=1.0, C_xiR=1.0, tau_star=1.0,
                            T=1.0, n=2, alpha=0.25, beta=0.0, U0_norm=0.5,
                            s=2.0, u_sup=1.0, p=1.5)
    assert led2.C_bar > led.C_bar


def test_theoretical_rate():
    eu, rk = get_integrator("euler"), get_integrator("rk4")
    assert theoretical_rate(make_noise("gauss_endpoint", p=1.0), eu.order_q) == 1.0
    assert theoretical_rate(make_noise("gauss_endpoint", p=5.0), rk.order_q) == 4.0
    assert theoretical_rate(make_noise("biased", p=2.0), eu.order_q) == 1.0
    assert theoretical_rate(make_noise("biased", p=1.0), eu.order_q) == 0.5
    assert theoretical_rate(make_noise("zero"), rk.order_q) == 4.0


def test_sup_error_mesh_mismatch():
    p = builtin_problem("linear_decay")
    run = solve_discrete(p, get_integrator("euler"),
                         make_noise("gauss_endpoint", p=1.0), 0.25, seed=0)
    with pytest.raises(ValueError):
        sup_error(run, reference_trajectory(p, 0.125))


def test_thm31_bound_as_inequality():
    # measured-constant version of the mean-square uniform error bound
    p = builtin_problem("linear_decay")
    eu = get_integrator("euler")
    g = make_noise("gauss_endpoint", p=1.0)
    tau = 2.0 ** -5
    c_phi = measure_flow_lipschitz(p, tau, samples=100, seed=0)
    c_psi = measure_lte_constant(eu, p, p.u0, [2.0 ** -k for k in range(4, 9)])
    C = thm31_constant(c_phi, c_psi, g.moment_scale(2, 1), 1.0, p.horizon_T)
    errs, _ = ensemble_sup_errors(p, eu, g, tau, reps=500, seed=1)
    sq = errs ** 2
    se = sq.std(ddof=1) / math.sqrt(sq.size)
    assert sq.mean() - 3 * se <= C * tau ** 2


def test_moment_check_power_guard():
    p = builtin_problem("cubic_dissipative")
    runs = run_ensemble(p, get_integrator("implicit_euler"),
                        make_noise("gauss_endpoint", p=1.5), 2 ** -4,
                        reps=100, seed=0)
    with pytest.raises(StatisticalPowerError):
        moment_bound_check(runs, 5.0, 1, 1.5, 1.0, 1.0)


def test_as_path_bound_zero_noise_is_tight_regime():
    p = builtin_problem("cubic_dissipative")
    run = solve_discrete(p, get_integrator("implicit_euler"),
                         make_noise("zero"), 2 ** -4, seed=0)
    check = as_path_bound_check(run, C2=5.4366, n=1)
    assert check.passed
    assert check.lhs <= check.rhs


def test_noise_sum_moment_check():
    g = make_noise("gauss_endpoint", p=1.0)
    res = noise_sum_moment_check(g, 2 ** -4, w=2, v=1, T=1.0, reps=2000,
                                 seed=4, d=2)
    assert res.passed


def test_coverage_report_clamps_and_trivial_rows():
    errs = np.array([0.1, 0.2, 0.3, 0.4])
    rows = coverage_report(errs, [1e-6, 10.0], C_hat=1.0, rate=2.0, tau=0.25)
    assert rows[0].bound == 0.0 and rows[0].passed   # clamped at zero
    assert rows[1].empirical == 1.0 and rows[1].passed


def test_convergence_study_zero_noise_deterministic_order():
    p = builtin_problem("linear_decay")
    rep = convergence_study(p, get_integrator("euler"), make_noise("zero"),
                            taus=[2.0 ** -k for k in range(3, 8)], reps=1,
                            seed=0)
    assert rep.verdict
    assert abs(rep.fitted_order - 1.0) < 0.05


def test_lte_moment_probe_runs():
    p = builtin_problem("cubic_dissipative")
    g = make_noise("gauss_endpoint", p=1.5)
    slope, const = local_truncation_moment_probe(
        p, g, taus=[2.0 ** -k for k in range(3, 7)], n=1, reps=50, seed=2)
    assert 3.0 < slope < 5.0
    assert const > 0
