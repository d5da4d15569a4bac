import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wireloop.apf import FieldParams
from wireloop.arbitration import (FACTOR_NAMES, MASK_W, ArbitrationMatrix,
                                  FactorSet, Theta, alpha_from_factors,
                                  alpha_from_theta, apply_factor_edit,
                                  apply_gain_factors, blend,
                                  theta_from_factors)
from wireloop.geometry import Twist

factor_values = st.integers(min_value=2, max_value=20).map(lambda k: k * 0.05)


def test_mask_shape_and_row_sums():
    assert MASK_W.shape == (6, 3)
    np.testing.assert_allclose(MASK_W.sum(axis=1), np.ones(6), atol=1e-12)
    assert np.all(MASK_W >= 0.0)


def test_alpha_worked_example():
    alpha = alpha_from_theta(Theta(np.array([1.0, 0.9, 0.1]))).alpha
    np.testing.assert_allclose(
        alpha, [1.0, 0.9, 1.0, 0.26, 0.46, 0.28], atol=1e-12)


def test_theta_from_factors_mapping():
    f = FactorSet(speed=1.0, depth_assist=0.1, turnability=0.1)
    np.testing.assert_allclose(theta_from_factors(f).values, [1.0, 0.9, 0.1],
                               atol=1e-12)


def test_max_human_authority_factors():
    # factors pushed to the human-authority extreme; depth assist bottoms
    # out at 0.1, so y and roll keep a sliver of autonomy by design
    f = FactorSet(speed=1.0, depth_assist=0.1, turnability=1.0)
    np.testing.assert_allclose(alpha_from_factors(f).alpha,
                               [1.0, 0.9, 1.0, 0.98, 1.0, 1.0], atol=1e-12)


def test_factor_quantization_enforced():
    with pytest.raises(ValueError):
        FactorSet(speed=0.52)
    with pytest.raises(ValueError):
        FactorSet(safety=0.05)
    with pytest.raises(ValueError):
        FactorSet(depth_assist=1.05)


def test_ui_scale_round_trip():
    f = FactorSet(speed=0.65, depth_assist=0.1, turnability=1.0,
                  safety=0.35, responsiveness=0.5)
    assert f.to_ui_scale() == {"speed": 65, "depth_assist": 10,
                               "turnability": 100, "safety": 35,
                               "responsiveness": 50}


def test_theta_range_validation():
    with pytest.raises(ValueError):
        Theta(np.array([0.0, 0.5, 0.5]))
    with pytest.raises(ValueError):
        Theta(np.array([0.5, 0.95, 0.5]))
    Theta(np.array([0.5, 0.0, 0.5]))  # theta[1] = 0 is legal (full depth assist)


def test_blend_limits():
    u_r = Twist.from_vector(np.arange(6.0))
    u_h = Twist.from_vector(-np.arange(6.0))
    assert np.array_equal(blend(u_r, u_h, ArbitrationMatrix.identity()).as_vector(),
                          u_h.as_vector())
    np.testing.assert_allclose(
        blend(u_r, u_h, ArbitrationMatrix(np.zeros(6))).as_vector(),
        u_r.as_vector(), atol=1e-15)
    np.testing.assert_allclose(
        blend(u_r, u_h, ArbitrationMatrix(np.full(6, 0.5))).as_vector(),
        np.zeros(6), atol=1e-15)


def test_blend_is_per_axis():
    u_r = Twist.from_vector(np.ones(6))
    u_h = Twist.from_vector(np.zeros(6))
    a = ArbitrationMatrix(np.array([1.0, 0.0, 0.5, 1.0, 0.0, 0.25]))
    np.testing.assert_allclose(blend(u_r, u_h, a).as_vector(),
                               [0.0, 1.0, 0.5, 0.0, 1.0, 0.75], atol=1e-15)


def test_factor_edit_step_and_clamp():
    f = FactorSet()
    up = apply_factor_edit(f, "speed", "+")
    assert up.speed == pytest.approx(0.55)
    down = apply_factor_edit(f, "speed", "-")
    assert down.speed == pytest.approx(0.45)
    top = FactorSet(safety=1.0)
    assert apply_factor_edit(top, "safety", "+").safety == 1.0
    bottom = FactorSet(safety=0.1)
    assert apply_factor_edit(bottom, "safety", "-").safety == 0.1


def test_factor_edit_rejects_bad_input():
    with pytest.raises(ValueError):
        apply_factor_edit(FactorSet(), "velocity", "+")
    with pytest.raises(ValueError):
        apply_factor_edit(FactorSet(), "speed", "up")


def test_gain_factors_scale_field_and_stiffness():
    f = FactorSet(safety=0.2, responsiveness=0.5)
    fp, k = apply_gain_factors(f, FieldParams(f_max=2.0), np.full(6, 50.0))
    assert fp.f_max == pytest.approx(0.4)
    np.testing.assert_allclose(k, np.full(6, 25.0))


@settings(max_examples=80, deadline=None)
@given(speed=factor_values, depth=factor_values, turn=factor_values)
def test_alpha_always_valid(speed, depth, turn):
    f = FactorSet(speed=round(speed, 2), depth_assist=round(depth, 2),
                  turnability=round(turn, 2))
    a = alpha_from_factors(f).alpha
    assert np.all(a >= -1e-12) and np.all(a <= 1.0 + 1e-12)
    # axis 0 (x) carries the speed factor directly, axis 1 (y) the depth slack
    assert a[0] == pytest.approx(f.speed, abs=1e-12)
    assert a[1] == pytest.approx(1.0 - f.depth_assist, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(which=st.sampled_from(FACTOR_NAMES),
       direction=st.sampled_from(["+", "-"]), start=factor_values)
def test_factor_edit_stays_on_grid(which, direction, start):
    f = FactorSet(**{which: round(start, 2)})
    out = apply_factor_edit(f, which, direction)
    v = getattr(out, which)
    assert 0.1 - 1e-9 <= v <= 1.0 + 1e-9
    assert abs(v / 0.05 - round(v / 0.05)) < 1e-9
