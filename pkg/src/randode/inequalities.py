"""Elementary inequality bounds used throughout the convergence analysis.

Each function returns the right-hand side of the corresponding inequality;
property tests assert lhs <= rhs on randomized inputs.
"""

import numpy as np


def young(a, b, delta, r):
    """a*b <= (delta/r) a^r + b^r* / (r* delta^(r*/r)) with r* = r/(r-1)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("a, b must be nonnegative")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if r <= 1:
        raise ValueError("r must exceed 1")
    r_conj = r / (r - 1.0)
    rhs = (delta / r) * a ** r + b ** r_conj / (r_conj * delta ** (r_conj / r))
    return rhs if rhs.ndim else float(rhs)


def peter_paul(x, y, n, delta):
    """(x + y)^n <= x^n (1 + delta 2^(n-1)) + y^n (1 + (2/delta)^(n-1)).

    The bound is guaranteed for 0 < delta <= 1 (the binomial cross terms are
    absorbed via delta^(-k/(n-k)) <= delta^(1-n), which needs delta <= 1); it
    is always applied here with delta equal to a step size, so that range is
    the one that matters.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("x, y must be nonnegative")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if n < 1 or int(n) != n:
        raise ValueError("n must be a positive integer")
    rhs = (x ** n * (1.0 + delta * 2.0 ** (n - 1))
           + y ** n * (1.0 + (2.0 / delta) ** (n - 1)))
    return rhs if rhs.ndim else float(rhs)


def discrete_gronwall_bound(A, betas):
    """Bound A * exp(sum betas) for sequences with x_k <= A + sum beta_j x_j."""
    betas = np.asarray(betas, dtype=float)
    if A < 0 or np.any(betas < 0):
        raise ValueError("A and betas must be nonnegative")
    return float(A * np.exp(betas.sum()))


def gen_triangle(values, m):
    """|sum s_j|^m <= N^(m-1) * sum |s_j|^m for m >= 1."""
    values = np.asarray(values, dtype=float)
    if m < 1:
        raise ValueError("m must be >= 1")
    N = values.shape[-1]
    return float(N ** (m - 1.0) * np.sum(np.abs(values) ** m, axis=-1)) \
        if values.ndim == 1 \
        else N ** (m - 1.0) * np.sum(np.abs(values) ** m, axis=-1)
