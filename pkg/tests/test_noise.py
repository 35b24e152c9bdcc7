import math

import numpy as np
import pytest

from randode.errors import CatalogError
from randode.noise import NoiseParams, make_noise, verify_regularity
from randode.rng import substream


def _draws(model, tau, d, count, seed=0):
    return np.stack([model.sample(tau, d, substream(seed, i))
                     for i in range(count)])


def test_unknown_model():
    with pytest.raises(CatalogError):
        make_noise("levy")


def test_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(p=0.25)
    with pytest.raises(ValueError):
        NoiseParams(p=1.0, C_xi=0.5)


def test_zero_noise():
    z = make_noise("zero")
    assert np.array_equal(z.sample(0.1, 3, substream(0)), np.zeros(3))


def test_gauss_endpoint_law():
    p = 1.0
    tau = 0.2
    g = make_noise("gauss_endpoint", p=p)
    x = _draws(g, tau, 2, 40_000)
    sigma2 = tau ** (2 * p + 1) / 3.0
    assert abs(x.mean()) < 4 * math.sqrt(sigma2 / x.size)
    assert np.allclose(x.var(axis=0), sigma2, rtol=0.05)


def test_ibm_path_shape_and_endpoint_law():
    ib = make_noise("ibm_path", p=1.5)
    tau = 0.1
    path = ib.sample_path(tau, 32, 2, substream(5))
    assert path.shape == (33, 2)
    assert np.array_equal(path[0], np.zeros(2))
    ends = np.stack([ib.sample_path(tau, 8, 1, substream(6, i))[-1]
                     for i in range(30_000)])
    assert np.allclose(ends.var(axis=0), tau ** 4 / 3.0, rtol=0.05)


def test_ibm_path_interior_variance():
    # Var xi(t) = tau^(2p-2) t^3 / 3 for every interior time as well
    ib = make_noise("ibm_path", p=1.0)
    tau = 0.08
    mids = np.stack([ib.sample_path(tau, 4, 1, substream(7, i))[2]
                     for i in range(30_000)])
    assert np.allclose(mids.var(axis=0), (tau / 2) ** 3 / 3.0, rtol=0.05)


def test_ibm_endpoint_matches_gauss_endpoint_scale():
    ib = make_noise("ibm_path", p=1.0)
    g = make_noise("gauss_endpoint", p=1.0)
    assert ib.moment_scale(2, 1) == pytest.approx(g.moment_scale(2, 1))


def test_bounded_uniform_support():
    tau = 0.25
    b = make_noise("bounded_uniform", p=1.5, C_xi=1.0, as_bounded=10.0)
    x = _draws(b, tau, 3, 5_000)
    radius = tau ** 2.0  # C_xi tau^(p + 1/2)
    norms = np.linalg.norm(x, axis=1)
    assert norms.max() <= radius + 1e-15
    assert norms.max() > 0.9 * radius  # actually fills the ball
    capped = make_noise("bounded_uniform", p=1.5, C_xi=1.0, as_bounded=0.1)
    y = _draws(capped, tau, 3, 2_000)
    assert np.linalg.norm(y, axis=1).max() <= 0.1 * tau + 1e-15


def test_biased_mean_shift():
    tau = 0.1
    bi = make_noise("biased", p=2.0, bias_fraction=0.5)
    x = _draws(bi, tau, 2, 30_000)
    shift = bi.mean_shift(tau, 2)
    assert shift[0] > 0 and shift[1] == 0
    assert np.allclose(x.mean(axis=0), shift,
                       atol=5 * tau ** 2.5 / math.sqrt(x.shape[0]))
    assert not bi.params.centred


def test_verify_regularity_gauss():
    g = make_noise("gauss_endpoint", p=1.0)
    rows = verify_regularity(g, 0.1, d=1, r_max=4, reps=4_000, seed=2)
    assert [row.r for row in rows] == [1, 2, 3, 4]
    assert all(row.passed for row in rows)


def test_verify_regularity_ibm_high_orders_informational():
    ib = make_noise("ibm_path", p=1.0)
    rows = verify_regularity(ib, 0.1, d=1, r_max=6, reps=2_000, seed=3)
    assert all(row.passed for row in rows if row.r <= 4)
    assert all(row.passed is None for row in rows if row.r > 4)


def test_substream_reproducible_and_split():
    a = substream(9, 4, 2).standard_normal(5)
    b = substream(9, 4, 2).standard_normal(5)
    c = substream(9, 4, 3).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
