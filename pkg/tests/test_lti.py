"""Transfer-function algebra: polynomials, reduction, loop closure, placement."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loopinfo import (
    InvalidInputError,
    LoopModel,
    SingularityError,
    close_loop,
    freq_response,
    freq_response_array,
    is_stabilizing,
    pole_placement_controller,
    tf,
    white,
)
from loopinfo.lti import TF_ONE, Polynomial, poly_roots


# ---------------------------------------------------------------------------
# Polynomial


def test_polynomial_strips_trailing_zeros():
    p = Polynomial([1.0, 2.0, 0.0, 0.0])
    assert p.coeffs == (1.0, 2.0)
    assert p.degree == 1


def test_polynomial_zero_normal_form():
    assert Polynomial([0.0, 0.0]).coeffs == (0.0,)
    assert Polynomial([0.0]).is_zero
    assert not Polynomial([0.0, 1.0]).is_zero


def test_polynomial_evaluation():
    # 1 + 2d + 3d^2 at d = 2 -> 17
    p = Polynomial([1.0, 2.0, 3.0])
    assert p(2.0) == pytest.approx(17.0)
    assert p(0.0) == 1.0


def test_polynomial_arithmetic():
    p = Polynomial([1.0, 1.0])
    q = Polynomial([1.0, -1.0])
    assert (p * q).coeffs == (1.0, 0.0, -1.0)
    assert (p + q).coeffs == (2.0,)
    assert (p - q).coeffs == (0.0, 2.0)
    assert p.scaled(3.0).coeffs == (3.0, 3.0)


coeff_lists = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=1, max_size=5
)


@given(coeff_lists, coeff_lists, st.floats(min_value=-2, max_value=2, allow_nan=False))
def test_polynomial_product_evaluates_pointwise(a, b, x):
    p, q = Polynomial(a), Polynomial(b)
    lhs = (p * q)(x)
    rhs = p(x) * q(x)
    assert abs(lhs - rhs) <= 1e-9 * (1.0 + abs(rhs))


def test_poly_roots_quadratic():
    # ascending-d (1 - 3d + 2d^2) reads as z^2 - 3z + 2 -> z-roots {1, 2}
    roots = sorted(poly_roots(Polynomial([1.0, -3.0, 2.0])), key=lambda r: r.real)
    assert roots[0] == pytest.approx(1.0)
    assert roots[1] == pytest.approx(2.0)


def test_poly_roots_constant_and_nonfinite():
    assert poly_roots(Polynomial([5.0])) == []
    with pytest.raises(InvalidInputError):
        poly_roots(Polynomial([1.0, float("inf")]))


# ---------------------------------------------------------------------------
# TransferFunction construction and reduction


def test_tf_normalizes_denominator_constant():
    t = tf([1.0], [2.0, 1.0])
    assert t.den.coeffs[0] == 1.0
    assert t.num.coeffs == (0.5,)
    assert t.den.coeffs == (1.0, 0.5)


def test_tf_cancels_common_factor():
    # (1 - 0.5d)(1 - 0.3d) / (1 - 0.5d)(1 - 0.2d) -> (1 - 0.3d)/(1 - 0.2d)
    num = Polynomial([1.0, -0.5]) * Polynomial([1.0, -0.3])
    den = Polynomial([1.0, -0.5]) * Polynomial([1.0, -0.2])
    t = tf(num.coeffs, den.coeffs)
    assert t.num.coeffs == pytest.approx((1.0, -0.3))
    assert t.den.coeffs == pytest.approx((1.0, -0.2))


def test_tf_cancellation_near_origin_preserves_value():
    """z-roots near 0 sit light-years apart in the delay domain; cancelling
    such a pair must not rescale the function."""
    num = Polynomial([1.0, -2.0]) * Polynomial([1.0, -1e-15])
    den = Polynomial([1.0, -0.5]) * Polynomial([1.0, 1e-15])
    t = tf(num.coeffs, den.coeffs)
    assert t.num.degree == 1 and t.den.degree == 1
    for w in (0.0, 1.0, np.pi):
        z = np.exp(-1j * w)
        expect = (1.0 - 2.0 * z) / (1.0 - 0.5 * z)
        assert freq_response(t, w) == pytest.approx(expect, abs=1e-9)


def test_tf_reduction_preserves_response_on_random_pairs():
    rng = np.random.default_rng(3)
    omegas = np.linspace(-np.pi, np.pi, 17)
    for _ in range(25):
        extra = Polynomial([1.0, float(rng.uniform(-0.9, 0.9))])
        num = Polynomial(list(rng.uniform(-1, 1, 3))) * extra
        den = Polynomial([1.0, float(rng.uniform(-0.7, 0.7))]) * extra
        if num.is_zero or den.coeffs[0] == 0.0:
            continue
        t = tf(num.coeffs, den.coeffs)
        got = freq_response_array(t, omegas)
        z = np.exp(-1j * omegas)
        raw = np.polynomial.polynomial.polyval(z, num.coeffs) / \
            np.polynomial.polynomial.polyval(z, den.coeffs)
        assert np.allclose(got, raw, atol=1e-8)


def test_tf_keeps_delay_zeros_through_reduction():
    # d^2 * (1 - 0.4d) / (1 - 0.4d)(1 - 0.1d) -> d^2 / (1 - 0.1d)
    num = Polynomial([0.0, 0.0, 1.0]) * Polynomial([1.0, -0.4])
    den = Polynomial([1.0, -0.4]) * Polynomial([1.0, -0.1])
    t = tf(num.coeffs, den.coeffs)
    assert t.num.coeffs == pytest.approx((0.0, 0.0, 1.0))
    assert t.den.coeffs == pytest.approx((1.0, -0.1))


def test_tf_rejects_non_causal_or_zero_denominator():
    with pytest.raises(InvalidInputError):
        tf([1.0], [0.0, 1.0])
    with pytest.raises(InvalidInputError):
        tf([1.0], [0.0])


def test_tf_zero_numerator_collapses():
    t = tf([0.0], [1.0, -0.5])
    assert t.is_zero
    assert t.den.coeffs == (1.0,)


def test_tf_product_and_reciprocal():
    a = tf([0.0, 1.0], [1.0, -0.5])
    b = tf([2.0], [1.0, 0.25])
    prod = a * b
    for w in (0.3, 2.0):
        assert freq_response(prod, w) == pytest.approx(
            freq_response(a, w) * freq_response(b, w)
        )
    flipped = b.reciprocal()
    assert freq_response(flipped, 0.7) == pytest.approx(1.0 / freq_response(b, 0.7))
    with pytest.raises(InvalidInputError):
        a.reciprocal()  # inverse of a strict delay is non-causal


def test_poles_and_zeros_with_origin_padding():
    # numerator delay excess shows up as poles at z = 0
    t = tf([0.0, 0.0, 1.0], [1.0, -0.5])
    assert t.relative_degree == 2
    poles = sorted(t.poles(), key=abs)
    assert poles[0] == 0j
    assert poles[1] == pytest.approx(0.5)
    t2 = tf([0.0, 1.0, -0.25], [1.0, -0.5, 0.0, 0.1])
    zs = t2.zeros()
    assert any(abs(z - 0.25) < 1e-9 for z in zs)


def test_freq_response_matches_array_version():
    t = tf([0.0, 1.0], [1.0, -0.5])
    omegas = np.array([0.0, 1.0, np.pi])
    arr = freq_response_array(t, omegas)
    for w, val in zip(omegas, arr):
        assert freq_response(t, float(w)) == pytest.approx(val)


def test_freq_response_pole_on_unit_circle():
    t = tf([1.0], [1.0, -1.0])
    with pytest.raises(SingularityError):
        freq_response(t, 0.0)


# ---------------------------------------------------------------------------
# LoopModel / close_loop


def test_loop_model_requires_strictly_proper_gain():
    with pytest.raises(InvalidInputError):
        LoopModel(TF_ONE, TF_ONE, TF_ONE, white(1.0), white(1.0))


def test_close_loop_worked_example(worked_model):
    cl = close_loop(worked_model)
    assert cl.f_wy.num.coeffs == pytest.approx((1.0, -2.0))
    assert cl.f_wy.den.coeffs == pytest.approx((1.0,))
    assert cl.closed_loop_poles == (0j,)
    assert cl.is_stable
    # H = 1 so both noise paths share the sensitivity function
    assert cl.f_vy.num.coeffs == cl.f_wy.num.coeffs
    assert cl.sensitivity is cl.f_wy


def test_close_loop_unstable_flagged():
    # driven unstable loop: positive feedback with K = -0.1 puts the pole at 1.9
    m = LoopModel(
        tf([0.0, 1.0], [1.0, -2.0]), tf([-0.1]), TF_ONE, white(1.0), white(1.0)
    )
    cl = close_loop(m)
    assert not cl.is_stable
    assert any(abs(p - 1.9) < 1e-9 for p in cl.closed_loop_poles)


def test_open_loop_hides_undriven_unstable_mode():
    """With K = 0 the map w -> y reduces to 1 (the unstable mode is undriven),
    so close_loop reports a stable transfer function while is_stabilizing
    still rejects the interconnection."""
    m = LoopModel(
        tf([0.0, 1.0], [1.0, -2.0]), tf([0.0]), TF_ONE, white(1.0), white(1.0)
    )
    cl = close_loop(m)
    assert cl.f_wy.num.coeffs == (1.0,) and cl.f_wy.den.coeffs == (1.0,)
    assert cl.is_stable
    rep = is_stabilizing(m)
    assert not rep.is_stabilizing
    assert any(abs(p - 2.0) < 1e-9 for p in rep.offending_poles)


def test_is_stabilizing_reports_offenders():
    m = LoopModel(
        tf([0.0, 1.0], [1.0, -2.0]), tf([-0.1]), TF_ONE, white(1.0), white(1.0)
    )
    rep = is_stabilizing(m)
    assert not rep.is_stabilizing and not rep.degenerate
    assert any(abs(p - 1.9) < 1e-9 for p in rep.offending_poles)


def test_is_stabilizing_catches_hidden_cancellation():
    # K cancels the unstable plant pole: closed-loop poles look fine but the
    # loop is internally unstable
    plant = tf([0.0, 1.0], [1.0, -2.0])
    ctrl = tf([-0.1, 0.2])  # -0.1 (1 - 2d)
    rep = is_stabilizing(LoopModel(plant, ctrl, TF_ONE, white(1.0), white(1.0)))
    assert not rep.is_stabilizing
    assert any(abs(p - 2.0) < 1e-6 for p in rep.unstable_cancellations)


def test_is_stabilizing_accepts_worked_example(worked_model):
    rep = is_stabilizing(worked_model)
    assert rep.is_stabilizing
    assert rep.closed_loop_poles == (0j,)
    assert rep.offending_poles == ()


# ---------------------------------------------------------------------------
# Pole placement


def test_placement_recovers_deadbeat_gain():
    plant = tf([0.0, 1.0], [1.0, -2.0])
    k = pole_placement_controller(plant, [0.0])
    assert k.num.coeffs == pytest.approx((-2.0,))
    assert k.den.coeffs == pytest.approx((1.0,))


def test_placement_second_order_lands_targets():
    plant = tf([0.0, 1.0], [1.0, 1.0, -6.0])  # poles {2, -3}
    targets = (0.0, 0.2, -0.2)
    k = pole_placement_controller(plant, targets)
    m = LoopModel(plant, k, TF_ONE, white(1.0), white(1.0))
    rep = is_stabilizing(m)
    assert rep.is_stabilizing
    # a target landing exactly at z = 0 has no delay-polynomial factor, so it
    # may drop the realized order instead of appearing in the pole list
    for p in rep.closed_loop_poles:
        assert min(abs(p - t) for t in targets) < 1e-7
    assert len(rep.closed_loop_poles) >= 2


def test_placement_repeated_pole_plant():
    plant = tf([0.0, 1.0], [1.0, -3.0, 2.25])  # double pole at 1.5
    k = pole_placement_controller(plant, (0.0, 0.2, -0.2))
    assert is_stabilizing(
        LoopModel(plant, k, TF_ONE, white(1.0), white(1.0))
    ).is_stabilizing


def test_placement_input_guards():
    plant = tf([0.0, 1.0], [1.0, -2.0])
    with pytest.raises(InvalidInputError):
        pole_placement_controller(plant, [0.0, 0.1])  # wrong count
    with pytest.raises(InvalidInputError):
        pole_placement_controller(tf([1.0]), [0.0])  # static path
    with pytest.raises(InvalidInputError):
        pole_placement_controller(tf([0.0, 0.0, 1.0], [1.0, -0.5]), [0.0])
    with pytest.raises(InvalidInputError):
        pole_placement_controller(plant, [0.5j])  # not conjugate-closed
