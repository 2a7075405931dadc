import numpy as np
import pytest
from numpy.testing import assert_allclose

from tsfactor.errors import InputError, NonFinite, ShapeMismatch
from tsfactor.panel import FactorFit, Panel, center_rows, check_same_length


def test_center_constant_row():
    centered, means = center_rows(Panel([[1.0, 1.0, 1.0]]))
    assert_allclose(centered.data, [[0, 0, 0]])
    assert_allclose(means, [1.0])


def test_center_ramp():
    centered, means = center_rows(Panel([[1.0, 2.0, 3.0]]))
    assert_allclose(centered.data, [[-1, 0, 1]])
    assert_allclose(means, [2.0])


def test_center_random_rows_have_zero_mean(rng):
    data = rng.standard_normal((2, 4)) * 10 + 3
    centered, means = center_rows(Panel(data))
    # oracle: recompute the means directly
    for i in range(2):
        assert abs(sum(centered.data[i]) / 4) <= 1e-12
        assert_allclose(means[i], sum(data[i]) / 4, rtol=1e-14)


def test_center_idempotent(rng):
    once, _ = center_rows(Panel(rng.standard_normal((3, 9))))
    twice, means = center_rows(once)
    assert_allclose(twice.data, once.data, atol=1e-14)
    assert np.all(np.abs(means) <= 1e-14)


def test_labels_kept_after_centering():
    panel = Panel([[1.0, 2.0]], series_labels=["a"], time_labels=["t1", "t2"])
    centered, _ = center_rows(panel)
    assert centered.series_labels == panel.series_labels
    assert centered.time_labels == panel.time_labels


def test_panel_validation():
    with pytest.raises(NonFinite):
        Panel([[1.0, np.inf]])
    with pytest.raises(InputError):
        Panel([[1.0]])
    with pytest.raises(InputError):
        Panel([[1.0, 2.0]], series_labels=["a", "b"])


def test_panel_is_immutable():
    panel = Panel([[1.0, 2.0]])
    with pytest.raises(ValueError):
        panel.data[0, 0] = 5.0


def test_check_same_length():
    with pytest.raises(ShapeMismatch):
        check_same_length(Panel(np.zeros((1, 3))), Panel(np.zeros((1, 4))))
    assert check_same_length(Panel(np.zeros((1, 3))), Panel(np.zeros((2, 3)))) == 3


def test_factorfit_r_used():
    fit = FactorFit(
        d_hat=np.zeros((2, 0)), eigenvalues=np.array([2.0, 1.0]), loadings=np.eye(2)[:, :1],
        factors=np.zeros((1, 3)), r_ratio=1, k_bar=1, method="none",
    )
    assert fit.r_used == 1
