import numpy as np
import pytest

from wsn_track.sim import H_MATRIX, MotionModel, step_motion, vehicle_state
from wsn_track.tracking import (FilterFault, FilterState, TargetLost, check_covariance, fuse, gain_form_update,
                                initial_filter_state, predict, select_best, update_covariance)


def random_spd(rng, n, scale=1.0):
    M = rng.standard_normal((n, n))
    return scale * (M @ M.T + n * np.eye(n))


def state(x_post, P_post):
    x_post, P_post = np.asarray(x_post, float), np.asarray(P_post, float)
    return FilterState(x_post, x_post, P_post, P_post)


def test_predict_examples():
    x, P = predict(state([0, 7.84, 0, 7.84], np.zeros((4, 4))), MotionModel(np.zeros((2, 2)), 1.0))
    np.testing.assert_allclose(x, [7.84, 7.84, 7.84, 7.84])
    np.testing.assert_array_equal(P, np.zeros((4, 4)))


def test_predict_covariance_hand_value():
    model = MotionModel(0.03 * np.eye(2), 1.0)
    _, P = predict(state(np.zeros(4), np.eye(4)), model)
    A, D = model.A, model.D
    np.testing.assert_allclose(P, A @ A.T + 0.03 * D @ D.T, rtol=1e-14)


def test_update_covariance_hand_value():
    P = update_covariance(np.eye(4), H_MATRIX, np.diag([400.0, 400.0]))
    np.testing.assert_allclose(P, np.diag([400 / 401, 1, 400 / 401, 1]), rtol=1e-14)


def test_update_covariance_limits():
    rng = np.random.default_rng(1)
    P_prior = random_spd(rng, 4)
    vague = update_covariance(P_prior, H_MATRIX, 1e9 * np.diag([400.0, 400.0]))
    np.testing.assert_allclose(vague, P_prior, rtol=1e-6)
    sharp = update_covariance(P_prior, H_MATRIX, 1e-9 * np.eye(2))
    assert abs(sharp[0, 0]) < 1e-8 and abs(sharp[2, 2]) < 1e-8


def test_select_best_examples():
    mk = lambda tr: np.diag([tr / 4] * 4)
    assert select_best([(0, mk(3.2)), (1, mk(2.9)), (2, mk(3.0))]).selected_sensor == 1
    assert select_best([(7, mk(1.0))]).selected_sensor == 7


def test_select_best_tie_goes_to_nearest_then_lowest_id():
    P = update_covariance(np.eye(4), H_MATRIX, np.diag([400.0, 400.0]))
    cands = [(10, P), (11, P.copy()), (12, P.copy())]
    assert select_best(cands, [12.0, 5.0, 30.0]).selected_sensor == 11
    assert select_best(cands, [5.0, 5.0, 30.0]).selected_sensor == 10
    assert select_best(list(reversed(cands)), [30.0, 5.0, 5.0]).selected_sensor == 10


def test_select_best_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = rng.integers(1, 8)
        traces = rng.choice([1.0, 2.0, 3.0], n)
        dists = rng.choice([5.0, 7.0], n)
        ids = rng.permutation(100)[:n]
        cands = [(int(i), np.diag([t / 4] * 4)) for i, t in zip(ids, traces)]
        want = min(range(n), key=lambda j: (traces[j], dists[j], ids[j]))
        assert select_best(cands, dists).selected_sensor == ids[want]


def test_select_best_empty():
    with pytest.raises(TargetLost):
        select_best([])


def test_fuse_confirming_measurement():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(4)
    x_post, _ = fuse(x, random_spd(rng, 4), H_MATRIX @ x, np.diag([400.0, 400.0]))
    np.testing.assert_allclose(x_post, x, rtol=1e-12, atol=1e-12)


def test_fuse_uninformative_measurement():
    rng = np.random.default_rng(4)
    x = 100 * rng.standard_normal(4)
    x_post, _ = fuse(x, random_spd(rng, 4), [1e3, -1e3], 1e9 * np.diag([400.0, 400.0]))
    np.testing.assert_allclose(x_post, x, rtol=1e-6, atol=1e-6)


def test_fuse_matches_gain_form():
    rng = np.random.default_rng(5)
    for _ in range(200):
        x, P, R = rng.standard_normal(4), random_spd(rng, 4), random_spd(rng, 2)
        z = rng.standard_normal(2)
        x1, P1 = fuse(x, P, z, R)
        x2, P2 = gain_form_update(x, P, z, R)
        np.testing.assert_allclose(x1, x2, rtol=1e-9, atol=1e-9 * np.abs(x2).max())
        np.testing.assert_allclose(P1, P2, rtol=1e-9, atol=1e-9 * np.abs(P2).max())
        assert np.trace(P1) <= np.trace(P)
        assert np.abs(P1 - P1.T).max() <= 1e-10


def test_rejects_indefinite_covariance():
    with pytest.raises(FilterFault):
        check_covariance(np.diag([1.0, 1.0, -1e-3, 1.0]))
    with pytest.raises(FilterFault):
        check_covariance(np.full((4, 4), np.nan))
    P = check_covariance(np.array([[2.0, 1.0 + 1e-12], [1.0, 2.0]]))
    assert P[0, 1] == P[1, 0]


def test_singular_prior_is_a_filter_fault():
    with pytest.raises(FilterFault):
        fuse(np.zeros(4), np.zeros((4, 4)), np.zeros(2), np.eye(2))


def test_initial_state():
    s = initial_filter_state([12.5, 40.0])
    np.testing.assert_array_equal(s.x_post, [12.5, 0, 40.0, 0])
    np.testing.assert_array_equal(np.diag(s.P_post), [400, 100, 400, 100])


def test_noise_free_tracking_is_exact():
    """Zero process and measurement noise with an exact start: the estimate follows the truth."""
    model = MotionModel(np.zeros((2, 2)), 0.5)
    truth = vehicle_state(10, 7.84, 20, 7.84)
    filt = state(truth.copy(), np.diag([400.0, 100.0, 400.0, 100.0]))
    R = np.diag([400.0, 400.0])
    rng = np.random.default_rng(0)
    for _ in range(100):
        truth = step_motion(truth, model, rng)
        x_prior, P_prior = predict(filt, model)
        x_post, P_post = fuse(x_prior, P_prior, H_MATRIX @ truth, R)
        filt = FilterState(x_prior, x_post, P_prior, P_post)
        np.testing.assert_allclose(x_post, truth, rtol=1e-9, atol=1e-9)
