import warnings

import numpy as np
import pytest
from scipy.optimize import minimize

from qkcompose import calibration, data, svm
from qkcompose.calibration import EvalSettings, PlattCoefficients
from qkcompose.circuit import CircuitDescriptor


def sigmoid_sample(a, b, n, seed):
    rng = np.random.default_rng(seed)
    f = rng.normal(0, 1.5, n)
    p = 1 / (1 + np.exp(a * f + b))
    return f, (rng.random(n) < p).astype(int)


def nll_oracle(f, t):
    # independent optimiser on the same objective
    def nll(ab):
        z = ab[0] * f + ab[1]
        return np.sum(np.logaddexp(0, z) - (1 - t) * z)
    return minimize(nll, [0.0, 0.0], method="Nelder-Mead",
                    options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 10000}).x


def test_platt_probability_orientation():
    p = calibration.platt_probability([-3.0, 0.0, 3.0], PlattCoefficients(-2.0, 0.0))
    assert p[0] < 0.5 == p[1] < p[2]


def test_fit_matches_independent_optimiser():
    f, y = sigmoid_sample(-1.3, 0.4, 300, 1)
    coef = calibration.fit_platt(f, y)
    np.testing.assert_allclose([coef.a, coef.b], nll_oracle(f, y.astype(float)), atol=1e-5)


def test_fit_with_smoothing_matches_oracle():
    f, y = sigmoid_sample(-1.0, -0.2, 200, 2)
    coef = calibration.fit_platt(f, y, smoothing=True)
    n1, n0 = y.sum(), y.size - y.sum()
    t = np.where(y == 1, (n1 + 1) / (n1 + 2), 1 / (n0 + 2))
    np.testing.assert_allclose([coef.a, coef.b], nll_oracle(f, t), atol=1e-5)


def test_recovers_generating_coefficients():
    f, y = sigmoid_sample(-2.0, 0.5, 10_000, 0)
    coef = calibration.fit_platt(f, y)
    assert abs(coef.a + 2.0) < 0.1 and abs(coef.b - 0.5) < 0.1


def test_constant_scores_give_prior():
    y = np.array([1, 0, 0, 0])
    coef = calibration.fit_platt(np.full(4, 0.7), y)
    assert coef.a == 0.0
    assert coef.b == pytest.approx(np.log(3.0))
    assert calibration.platt_probability(0.7, coef) == pytest.approx(0.25)


def test_positive_slope_warns():
    f, y = sigmoid_sample(2.0, 0.0, 500, 3)
    with pytest.warns(calibration.OrientationWarning):
        calibration.fit_platt(f, y)


@pytest.mark.parametrize("f,y", [([0.1, 0.2], [1, 1]), ([0.1], [0, 1]), ([np.nan, 1.0], [0, 1])])
def test_fit_errors(f, y):
    with pytest.raises(calibration.CalibrationError):
        calibration.fit_platt(np.array(f), np.array(y))


def test_stratified_folds_balanced_and_seeded():
    y = np.array([0] * 13 + [1] * 7)
    a = calibration.stratified_folds(y, 4, seed=5)
    assert np.array_equal(a, calibration.stratified_folds(y, 4, seed=5))
    for k in range(4):
        fold = y[a == k]
        assert abs(len(fold) - 5) <= 1
        assert abs((fold == 1).sum() - 7 / 4) <= 1
    with pytest.raises(ValueError):
        calibration.stratified_folds(y, 1, 0)


def test_out_of_fold_never_sees_own_fold():
    y = np.array([0, 1] * 6)
    seen = []

    def producer(rest, held):
        assert not set(rest) & set(held)
        seen.extend(held)
        return np.zeros(len(held))
    calibration.out_of_fold_scores(producer, y, folds=3, seed=0)
    assert sorted(seen) == list(range(12))


def test_log_likelihood_and_clipping():
    assert calibration.log_likelihood(np.array([0.8, 0.3]), np.array([1, 0])) == pytest.approx(
        np.log(0.8) + np.log(0.7))
    ll = calibration.log_likelihood(np.array([0.0]), np.array([1]))
    assert ll == pytest.approx(np.log(calibration.PROB_EPS))


def test_bic_and_model_probabilities():
    assert calibration.bic(-10.0, 3, 100) == pytest.approx(20 + 3 * np.log(100))
    with pytest.raises(ValueError):
        calibration.bic(-1.0, 1, 0)
    p = calibration.model_probabilities([10.0, 12.0, 10.0])
    assert p.sum() == pytest.approx(1.0)
    assert p[0] == pytest.approx(p[2])
    assert p[0] / p[1] == pytest.approx(np.exp(1.0))
    # shift invariant, no overflow for large BIC
    np.testing.assert_allclose(calibration.model_probabilities([1e4, 1e4 + 2]),
                               calibration.model_probabilities([0, 2]))


@pytest.fixture(scope="module")
def toy():
    ds = data.adhoc_generate(2, 0.3, 120, seed=4, feature_map="zz")
    return data.train_validation(ds, data.split(ds, 60, 40, seed=1))


def test_evaluate_candidate_consistency(toy):
    c = CircuitDescriptor.from_matrix([[1, 2], [2, 0]])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = calibration.evaluate_candidate(c, np.array([0.6, 1.4]), toy)
    assert m.d == 2 and m.n_eval == 40
    assert m.bic == pytest.approx(-2 * m.log_likelihood + 2 * np.log(40), abs=1e-10)
    np.testing.assert_allclose(m.decision(toy.X_valid), m.val_decision, atol=1e-12)
    p = m.predict_proba(toy.X_valid)
    assert m.log_likelihood == pytest.approx(calibration.log_likelihood(p, toy.y_valid), abs=1e-10)
    assert set(m.summary()) >= {"descriptor", "theta", "bic", "d"}


def test_bic_n_train(toy):
    c = CircuitDescriptor(2, ((2, 0),))
    m = calibration.evaluate_candidate(c, np.ones(1), toy, EvalSettings(bic_n="train"))
    assert m.n_eval == 60 and m.bic == pytest.approx(-2 * m.log_likelihood + np.log(60))


def test_training_failure_propagates(toy):
    bad = data.TrainValidation(toy.X_train, np.zeros_like(toy.y_train), toy.X_valid, toy.y_valid)
    with pytest.raises(svm.TrainingError):
        calibration.evaluate_candidate(CircuitDescriptor(2), np.zeros(0), bad)
