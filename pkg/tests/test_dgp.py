import math
from contextlib import nullcontext

import numpy as np
import pytest
from numpy.testing import assert_allclose

from tsfactor.dgp import DgpConfig, g_values, gen_endogenous, gen_nonlinear, gen_nonstationary, simulate
from tsfactor.errors import InputError
from tsfactor.panel import DESIGNS


def same(a, b):
    fields = ("y", "z", "w", "u")
    for name in fields:
        x, y = getattr(a, name), getattr(b, name)
        if (x is None) != (y is None):
            return False
        if x is not None and not np.array_equal(x.data, y.data):
            return False
    return np.array_equal(a.truth.a_true, b.truth.a_true) and np.array_equal(a.truth.x_true, b.truth.x_true)


def test_stationary_shapes():
    data = simulate(DgpConfig("stationary", 8, 20, seed=1))
    assert (data.y.p, data.y.T) == (8, 20)
    assert (data.z.p, data.z.T) == (2, 20)
    assert data.truth.r_true == 3
    assert data.truth.d_true.shape == (8, 2)
    assert_allclose(data.truth.regression_part, data.truth.d_true @ data.z.data)


def test_noise_is_standard_normal():
    data = simulate(DgpConfig("stationary", 200, 300, seed=8))
    eps = data.y.data - data.truth.regression_part - data.truth.common
    assert abs(eps.mean()) < 0.01
    assert abs(eps.var() - 1) < 0.02


@pytest.mark.parametrize("design", DESIGNS)
@pytest.mark.parametrize("p", [9, 50, 100])
def test_weak_loadings_sparsity(design, p):
    with pytest.warns(UserWarning) if design == "nonlinear" and p % 2 else nullcontext():
        data = simulate(DgpConfig(design, p, 30, delta=0.5, seed=4))
    nonzero = np.count_nonzero(data.truth.a_true, axis=0)
    assert np.all(nonzero == math.isqrt(p))


def test_weak_supports_are_independent_per_column():
    data = simulate(DgpConfig("stationary", 100, 30, delta="weak", seed=11))
    supports = [frozenset(np.flatnonzero(col)) for col in data.truth.a_true.T]
    assert len(set(supports)) == 3


@pytest.mark.parametrize("design", DESIGNS)
def test_determinism_and_seed_independence(design):
    a = simulate(DgpConfig(design, 10, 40, seed=123))
    b = simulate(DgpConfig(design, 10, 40, seed=123))
    c = simulate(DgpConfig(design, 10, 40, seed=124))
    assert same(a, b)
    assert not np.array_equal(a.y.data, c.y.data)


def test_endogenous_structure():
    y, z, w, truth = gen_endogenous(DgpConfig("endogenous", 20, 400, seed=2))
    assert_allclose(w.data[1], w.data[0] ** 2)
    for i in range(2):
        corr = np.corrcoef(z.data[i], truth.x_true[i])[0, 1]
        assert abs(corr) > 0.05
    u = w.data[0]
    assert_allclose(z.data[0], 0.3 * truth.x_true[0] + 0.5 * u + 0.5 * u**2)
    assert_allclose(z.data[1], 0.3 * truth.x_true[1] - 0.5 * u + 0.5 * u**2)


def test_nonstationary_factors():
    T = 500
    _, _, truth = gen_nonstationary(DgpConfig("nonstationary", 10, T, seed=9))
    x = truth.x_true
    assert np.array_equal(x[1], 3.0 * np.arange(1, T + 1) / T)
    assert x[1, -1] == 3.0
    steps = np.diff(np.r_[0.0, x[2]])
    assert abs(steps.var(ddof=1) / (10 / T) - 1) < 0.3
    # x1 - 2t/T follows an AR(1) with coefficient 0.8 from zero
    dev = x[0] - 2.0 * np.arange(1, T + 1) / T
    phi = np.dot(dev[1:], dev[:-1]) / np.dot(dev[:-1], dev[:-1])
    assert abs(phi - 0.8) < 0.1


def test_nonlinear_ranges_and_params():
    y, u, truth = gen_nonlinear(DgpConfig("nonlinear", 12, 200, seed=5))
    g = truth.regression_part
    assert np.all((g[:6] > 0) & (g[:6] < 1))
    assert np.all(np.abs(g[6:]) <= 1)
    assert truth.g_params["alpha_logistic"].shape == (6,)
    assert truth.g_params["alpha_sine"].shape == (6,)
    assert np.all(np.abs(truth.g_params["alpha_sine"]) <= 2)
    assert_allclose(g_values(truth.g_params, u.data[0]), g)
    assert truth.d_true is None


def test_nonlinear_odd_p_warns():
    with pytest.warns(UserWarning):
        gen_nonlinear(DgpConfig("nonlinear", 7, 30, seed=1))


def test_chain_burn_in_changes_start():
    a = simulate(DgpConfig("stationary", 6, 30, seed=3, burn_in=0))
    b = simulate(DgpConfig("stationary", 6, 30, seed=3, burn_in=100))
    assert not np.array_equal(a.z.data, b.z.data)


@pytest.mark.parametrize("kwargs", [
    dict(design="ar"), dict(delta=0.3), dict(p=3), dict(t_len=5), dict(seed=-1), dict(burn_in=-2),
])
def test_config_validation(kwargs):
    base = dict(design="stationary", p=10, t_len=20)
    base.update(kwargs)
    with pytest.raises(InputError):
        DgpConfig(**base)
