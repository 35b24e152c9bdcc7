"""Explicit convergence-theorem constants, evaluated by direct substitution.

The ledger collects every constant used by the bound checkers, together with
an echo of the inputs it was computed from, and is serialized into every
report.  No attempt is made to tighten any constant.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional


@dataclass
class ConstantsLedger:
    C1: float
    C_thm31: float
    C_odeflow_n: float
    C_bar: float
    C2: float
    C6: Optional[float]
    C7: float
    C7_alt: float
    C8: Optional[float]
    inputs: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def c1_constant(C_phi, tau_star):
    """1 + 2 C_phi + C_phi (2 + C_phi) tau* + C_phi^2 tau*^2."""
    return (1.0 + 2.0 * C_phi + C_phi * (2.0 + C_phi) * tau_star
            + C_phi ** 2 * tau_star ** 2)


def thm31_constant(C_phi, C_psi, C_xiR, tau_star, T):
    """Mean-square uniform convergence prefactor for the Lipschitz regime."""
    c1 = c1_constant(C_phi, tau_star)
    return math.exp(2.0 * T * c1) * max(
        4.0 * (1.0 + T) * C_psi ** 2,
        2.0 * T * C_xiR ** 2
        * (1.0 + 18.0 * (1.0 + tau_star) * (1.0 + C_phi * tau_star) ** 2))


def c_odeflow_n(n, C_phi, tau_star):
    """[(1 + tau* 2^(n-1))^2 (1 + tau* C_phi)^n - 1] / tau*."""
    return (((1.0 + tau_star * 2.0 ** (n - 1)) ** 2
             * (1.0 + tau_star * C_phi) ** n - 1.0) / tau_star)


def c_bar_constant(n, C_phi, C_psi, C_xiR, tau_star, T):
    """2 T max{(4 C_psi)^n, (2 C_xiR)^n} exp(T * C_odeflow_n)."""
    return (2.0 * T * max((4.0 * C_psi) ** n, (2.0 * C_xiR) ** n)
            * math.exp(T * c_odeflow_n(n, C_phi, tau_star)))


def c2_constant(alpha, beta, tau_prime, U0_norm, T):
    """Uniform-bound constant for implicit Euler on dissipative fields."""
    denom = 1.0 - 2.0 * abs(beta) * tau_prime
    if denom <= 0.0:
        raise ValueError("require 1 - 2|beta| tau' > 0")
    return ((1.0 + tau_prime)
            * max(1.0, U0_norm ** 2 + 2.0 * alpha * T / denom)
            * math.exp(T * (1.0 + 2.0 * abs(beta)) / denom))


def c6_constant(n, s, C_phi, u_sup, tau_prime):
    """[(1 + tau' max{2^(2n-1), C_phi (1 + |u|_inf^s)})^(2n+1) - 1] / tau'."""
    c5 = max(2.0 ** (2 * n - 1), C_phi * (1.0 + u_sup ** s))
    return ((1.0 + tau_prime * c5) ** (2 * n + 1) - 1.0) / tau_prime


def c7_constant(n, s, C_phi, c_star):
    """2^(n(4+s)) C_phi^(2n) (C*)^(ns)."""
    return 2.0 ** (n * (4 + s)) * C_phi ** (2 * n) * c_star ** (n * s)


def c8_constant(n, C2, C_xiR, p, tau_prime, T, u_sup):
    """2^(4n) (|u|_inf^(4n) + (2 C2)^(2n) (1 + T C_xiR^2 tau'^(2p-1))^(2n))."""
    return 2.0 ** (4 * n) * (
        u_sup ** (4 * n)
        + (2.0 * C2) ** (2 * n)
        * (1.0 + T * C_xiR ** 2 * tau_prime ** (2.0 * p - 1.0)) ** (2 * n))


def constants_ledger(C_phi=1.0, C_psi=1.0, C_xiR=1.0, tau_star=1.0,
                     tau_prime=None, T=1.0, p=1.0, q=1, n=1, s=None,
                     alpha=None, beta=None, u_sup=None, U0_norm=0.0,
                     c_star="C2"):
    """Evaluate every theorem constant from the assumption parameters.

    The dissipative-regime constants (C2, C6, C8) need alpha, beta, and a
    step cap tau_prime; they are left out (C2 defaults to 1, C6/C8 to None)
    when no dissipativity pair is supplied.  The constant raised to the
    power ns inside C7 is switchable between C1 and C2 via c_star; both
    values are recorded.
    """
    if not 0.0 < tau_star <= 1.0:
        raise ValueError("tau_star must lie in (0, 1]")
    c1 = c1_constant(C_phi, tau_star)
    thm31 = thm31_constant(C_phi, C_psi, C_xiR, tau_star, T)
    cofn = c_odeflow_n(n, C_phi, tau_star)
    cbar = c_bar_constant(n, C_phi, C_psi, C_xiR, tau_star, T)
    dissipative = alpha is not None and beta is not None
    if dissipative:
        if tau_prime is None:
            tau_prime = tau_star if beta == 0.0 \
                else min(tau_star, 1.0 / (2.0 * abs(beta)))
        c2 = c2_constant(alpha, beta, tau_prime, U0_norm, T)
    else:
        tau_prime = tau_prime if tau_prime is not None else tau_star
        c2 = 1.0
    s_eff = s if s is not None else 1.0
    c7_c1 = c7_constant(n, s_eff, C_phi, c1)
    c7_c2 = c7_constant(n, s_eff, C_phi, c2)
    c7 = c7_c2 if c_star == "C2" else c7_c1
    c7_alt = c7_c1 if c_star == "C2" else c7_c2
    c6 = c8 = None
    if u_sup is not None:
        c6 = c6_constant(n, s_eff, C_phi, u_sup, tau_prime)
        if dissipative:
            c8 = c8_constant(n, c2, C_xiR, p, tau_prime, T, u_sup)
    return ConstantsLedger(
        C1=c1, C_thm31=thm31, C_odeflow_n=cofn, C_bar=cbar, C2=c2,
        C6=c6, C7=c7, C7_alt=c7_alt, C8=c8,
        inputs=dict(C_phi=C_phi, C_psi=C_psi, C_xiR=C_xiR, tau_star=tau_star,
                    tau_prime=tau_prime, T=T, p=p, q=q, n=n, s=s, alpha=alpha,
                    beta=beta, u_sup=u_sup, U0_norm=U0_norm, c_star=c_star))
