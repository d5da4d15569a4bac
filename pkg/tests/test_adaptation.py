import numpy as np
import pytest

from wireloop.adaptation import (AdaptState, ReferenceError, change_rate,
                                 expert_reference, pinv_mask, trial_error,
                                 update_theta)
from wireloop.arbitration import MASK_W, Theta
from wireloop.geometry import Wrench


def test_pinv_left_inverse():
    np.testing.assert_allclose(pinv_mask() @ MASK_W, np.eye(3), atol=1e-9)


def test_trial_error_inverts_mask_images():
    rng = np.random.default_rng(11)
    for _ in range(100):
        x = rng.normal(size=3)
        w = Wrench.from_vector(MASK_W @ x)
        np.testing.assert_allclose(trial_error(w), x, atol=1e-9)


def test_change_rate_assistance_decreasing_case():
    # error above target and shrinking: hand assistance back to the human
    chi = change_rate(np.array([1.5, 1.5, 1.5]), np.array([2.0, 2.0, 2.0]),
                      np.ones(3), 0.1)
    np.testing.assert_allclose(chi, np.full(3, 0.1), atol=1e-12)


def test_change_rate_assistance_increasing_case():
    # error below target and moving away: pull assistance back up
    chi = change_rate(np.array([0.5, 0.5, 0.5]), np.array([0.75, 0.75, 0.75]),
                      np.ones(3), 0.1)
    np.testing.assert_allclose(chi, np.full(3, -0.1), atol=1e-12)


def test_change_rate_first_trial_unit_ratio():
    chi = change_rate(np.array([2.0, 2.0, 2.0]), None, np.ones(3), 0.1)
    np.testing.assert_allclose(chi, np.full(3, 0.1), atol=1e-12)


def test_change_rate_prev_at_target_unit_ratio():
    chi = change_rate(np.array([1.2, 1.2, 1.2]), np.ones(3), np.ones(3), 0.05)
    # ratio guard fires; chi = chi_nom * (r - r_d) / r_d
    np.testing.assert_allclose(chi, np.full(3, 0.05 * 0.2), atol=1e-12)


def test_change_rate_at_target_is_zero():
    chi = change_rate(np.ones(3), np.array([1.3, 0.8, 2.0]), np.ones(3), 0.1)
    np.testing.assert_allclose(chi, np.zeros(3), atol=1e-15)


def test_change_rate_rejects_zero_target():
    with pytest.raises(ValueError):
        change_rate(np.ones(3), None, np.array([1.0, 0.0, 1.0]), 0.1)


def test_update_theta_multiplicative():
    state = AdaptState(theta=Theta(np.array([0.5, 0.5, 0.5])),
                       r_desired=np.ones(3), chi_nom=0.1)
    # first trial: ratio 1, chi = 0.1 * (1.5 - 1) / 1 = 0.05
    new = update_theta(state, np.array([1.5, 1.5, 1.5]))
    np.testing.assert_allclose(new.theta.values, [0.525, 0.525, 0.525],
                               atol=1e-12)
    assert new.trial_index == 1
    np.testing.assert_allclose(new.r_prev, [1.5, 1.5, 1.5])


def test_update_theta_respects_component_ranges():
    state = AdaptState(theta=Theta(np.array([0.95, 0.85, 0.95])),
                       r_desired=np.ones(3), chi_nom=0.1)
    for _ in range(10):
        state = update_theta(state, np.array([3.0, 3.0, 3.0]))
    np.testing.assert_allclose(state.theta.values, [1.0, 0.9, 1.0], atol=1e-12)
    # and shrinking toward the floors
    state = AdaptState(theta=Theta(np.array([0.15, 0.05, 0.15])),
                       r_desired=np.ones(3), chi_nom=0.1)
    for _ in range(20):
        state = update_theta(state, np.array([0.2, 0.2, 0.2]))
    assert state.theta.values[0] >= 0.1 - 1e-12
    assert state.theta.values[1] >= 0.0 - 1e-12
    assert state.theta.values[2] >= 0.1 - 1e-12


def test_fixed_point_at_target():
    state = AdaptState(theta=Theta(np.array([0.6, 0.4, 0.7])),
                       r_desired=np.array([1.2, -0.5, 0.8]), chi_nom=0.1)
    start = state.theta.values.copy()
    for _ in range(20):
        state = update_theta(state, state.r_desired)
    assert np.array_equal(state.theta.values, start)
    np.testing.assert_allclose(state.last_chi, np.zeros(3), atol=1e-15)


def test_chi_nom_validation():
    with pytest.raises(ValueError):
        AdaptState(theta=Theta(np.array([0.5, 0.5, 0.5])),
                   r_desired=np.ones(3), chi_nom=0.0)


def test_expert_reference_requires_success():
    from wireloop.session import Mode, Outcome, SimParams, TrialLog
    log = TrialLog(mode=Mode.SC, course_name="training", seed=0, dt=0.01,
                   factors={}, sim=SimParams(), outcome=Outcome.FATAL)
    with pytest.raises(ReferenceError):
        expert_reference(log)


def test_expert_reference_is_mean_pullback():
    from wireloop.session import (Mode, Outcome, SimParams, TickRecord,
                                  TrialLog)
    from wireloop.course import ContactReport
    from wireloop.geometry import Pose, Twist
    rng = np.random.default_rng(3)
    wrenches = rng.normal(size=(10, 6))
    records = [
        TickRecord(t=i * 0.01, handle_input=Pose(np.zeros(3)),
                   robot=Pose(np.zeros(3)), u_h=Twist.zero(), u_r=Twist.zero(),
                   u_sc=Twist.zero(), w_a=Wrench.from_vector(w),
                   contact=ContactReport(False, 0.0, 0.0, False), progress=0.0)
        for i, w in enumerate(wrenches)]
    log = TrialLog(mode=Mode.SC, course_name="training", seed=0, dt=0.01,
                   factors={}, sim=SimParams(), records=records,
                   outcome=Outcome.SUCCESS)
    np.testing.assert_allclose(expert_reference(log),
                               pinv_mask() @ wrenches.mean(axis=0), atol=1e-12)
