import math

import pytest
from hypothesis import given, strategies as st

from stadia.cam_geometry import NormalizedCentre, TargetEstimate
from stadia.errors import InvalidInput
from stadia.guidance import (BodyTarget, FlightMode, GuidanceConfig, Mode,
                             ZERO_SETPOINT, avoidance_setpoint, body_from_estimate, guidance_step,
                             tracking_setpoint)

AVOID = GuidanceConfig(k1=1.0, k2=0.5, k_net=0.5)
TRACK = GuidanceConfig(k1=1.0, k2=0.5, k_net=0.5, has_net=True)
BODY = BodyTarget(6.0, -1.2, 0.4)


def est(x, y, z, prob=0.9, centre=(0.0, 0.0)):
    return TargetEstimate(x, y, z, 0.01, NormalizedCentre(*centre), prob)


def test_body_permutation():
    assert body_from_estimate(est(0, 0, 6)) == BodyTarget(6, 0, 0)
    assert body_from_estimate(est(-1.2, 0.4, 6.0)) == BodyTarget(6.0, -1.2, 0.4)


def test_body_permutation_cycle():
    def perm(v):
        x, y, z = v
        return (z, x, y)
    v = (1.0, 2.0, 3.0)
    assert perm(perm(v)) != v
    assert perm(perm(perm(v))) == v


@pytest.mark.parametrize("kw", [dict(k1=0), dict(deadband=1.0), dict(deadband=0), dict(T_D=0),
                                dict(t_R=-1), dict(v_cap=0), dict(rotation="euler"), dict(d_sign=2)])
def test_config_validation(kw):
    with pytest.raises(InvalidInput):
        GuidanceConfig(**kw)


def test_deadband_bounds_symmetric():
    assert GuidanceConfig().S_x == (-0.4, 0.4)
    assert GuidanceConfig().S_y == (-0.4, 0.4)


def test_avoidance_left_target_goes_east():
    sp = avoidance_setpoint(BODY, 0.0, AVOID)
    assert sp.as_tuple() == pytest.approx((0.0, 1.2, 0.2), abs=1e-15)


def test_avoidance_heading_east():
    # raw command (6, ~0, 0.2) exceeds v_cap = 3 and is scaled down uniformly
    sp = avoidance_setpoint(BODY, 90.0, AVOID)
    scale = 3.0 / math.hypot(6.0, 0.2)
    assert sp.n == pytest.approx(6.0 * scale)
    assert sp.e == pytest.approx(0.0, abs=1e-15)
    assert sp.norm == pytest.approx(3.0)


def test_avoidance_heading_east_uncapped():
    sp = avoidance_setpoint(BODY, 90.0, GuidanceConfig(v_cap=100))
    assert sp.n == pytest.approx(6.0)
    assert sp.e == pytest.approx(1.2 * math.cos(math.pi / 2), abs=1e-15)
    assert sp.d == pytest.approx(0.2)


def test_avoidance_origin_is_zero():
    assert avoidance_setpoint(BodyTarget(0, 0, 0), 37.0, AVOID).as_tuple() == (0.0, 0.0, 0.0)


def test_tracking_centred_only_vertical():
    sp = tracking_setpoint(BODY, NormalizedCentre(0.0, 0.0), 0.0, TRACK)
    assert sp.as_tuple() == (0.0, 0.0, 0.5 * 0.4)


def test_tracking_both_out_of_band():
    sp = tracking_setpoint(BODY, NormalizedCentre(0.8, 0.8), 0.0, TRACK)
    assert sp.as_tuple() == pytest.approx((0.0, -1.2, 0.2), abs=1e-15)


def test_tracking_x_out_y_in():
    sp = tracking_setpoint(BODY, NormalizedCentre(0.8, 0.0), 0.0, TRACK)
    assert sp.as_tuple() == pytest.approx((0.0, -1.2, 0.0), abs=1e-15)


def test_deadband_edge_counts_as_inside():
    sp = tracking_setpoint(BODY, NormalizedCentre(0.4, -0.4), 0.0, TRACK)
    assert (sp.n, sp.e) == (0.0, 0.0)


def test_d_sign_flips_vertical():
    cfg = GuidanceConfig(d_sign=-1.0)
    assert avoidance_setpoint(BODY, 0.0, cfg).d == -0.2


def test_standard_rotation_matches_verbatim_at_zero_heading_except_forward():
    cfg = GuidanceConfig(rotation="standard", v_cap=100)
    sp = avoidance_setpoint(BODY, 0.0, cfg)
    # away from the target: back off along the camera axis and step right
    assert sp.as_tuple() == pytest.approx((-6.0, 1.2, 0.2))


def test_standard_rotation_heading_east():
    cfg = GuidanceConfig(rotation="standard", v_cap=100)
    # target 6 m ahead while facing east sits 6 m east; avoid by flying west
    sp = avoidance_setpoint(BodyTarget(6.0, 0.0, 0.0), 90.0, cfg)
    assert sp.as_tuple() == pytest.approx((0.0, -6.0, 0.0), abs=1e-12)


def test_approach_gain_closes_on_centred_target():
    cfg = GuidanceConfig(has_net=True, approach_gain=0.5)
    sp = tracking_setpoint(BODY, NormalizedCentre(0.0, 0.0), 0.0, cfg)
    assert sp.as_tuple() == pytest.approx((3.0 * 3.0 / math.hypot(3.0, 0.2), 0.0,
                                           0.2 * 3.0 / math.hypot(3.0, 0.2)))


finite = st.floats(-20, 20, allow_nan=False)
headings = st.floats(0, 360)
centres = st.floats(-1, 1)


@given(finite, finite, finite, headings, centres, centres)
def test_tracking_is_negated_avoidance_out_of_band(x, y, z, phi, cx, cy):
    if abs(cx) <= 0.4 or abs(cy) <= 0.4:
        return
    body = BodyTarget(x, y, z)
    a = avoidance_setpoint(body, phi, AVOID)
    t = tracking_setpoint(body, NormalizedCentre(cx, cy), phi, TRACK)
    assert (t.n, t.e) == (-a.n, -a.e)


@given(finite, finite, finite, headings, centres, centres)
def test_deadband_property(x, y, z, phi, cx, cy):
    sp = tracking_setpoint(BodyTarget(x, y, z), NormalizedCentre(cx, cy), phi, TRACK)
    if abs(cx) <= 0.4:
        assert sp.n == 0 and sp.e == 0
    if abs(cy) <= 0.4 and abs(cx) > 0.4:
        assert sp.d == 0


@given(finite, finite, finite, headings, st.booleans(), centres, centres)
def test_setpoints_respect_speed_cap(x, y, z, phi, net, cx, cy):
    body = BodyTarget(x, y, z)
    cfg = TRACK if net else AVOID
    sp = (tracking_setpoint(body, NormalizedCentre(cx, cy), phi, cfg) if net
          else avoidance_setpoint(body, phi, cfg))
    assert all(math.isfinite(c) for c in sp.as_tuple())
    assert sp.norm <= cfg.v_cap * (1 + 1e-12)


# mode machine

def test_idle_guided():
    r = guidance_step(None, 0.0, 0.0, Mode(), AVOID)
    assert r.mode.mode is FlightMode.GUIDED and r.setpoints == () and not r.zero_setpoint_emitted


def test_detection_enters_offboard_with_zero_first():
    r = guidance_step(est(-1.2, 0.4, 6.0), 0.0, 0.0, Mode(), AVOID)
    assert r.mode.mode is FlightMode.OFFBOARD
    assert r.zero_setpoint_emitted
    assert r.setpoints[0] == ZERO_SETPOINT
    assert r.setpoints[1].as_tuple() == pytest.approx((0.0, 1.2, 0.2))
    assert r.mode.offboard_since == 0.0 and r.mode.last_command == 0.0


def test_offboard_refresh_without_zero():
    m = guidance_step(est(-1.2, 0.4, 6.0), 0.0, 0.0, Mode(), AVOID).mode
    r = guidance_step(est(-1.0, 0.0, 5.0), 0.0, 0.5, m, AVOID)
    assert r.mode.mode is FlightMode.OFFBOARD and not r.zero_setpoint_emitted
    assert len(r.setpoints) == 1 and r.mode.last_command == 0.5
    assert r.mode.offboard_since == 0.0


def test_timeout_returns_to_guided():
    m = guidance_step(est(-1.2, 0.4, 6.0), 0.0, 0.0, Mode(), AVOID).mode
    r = guidance_step(None, 0.0, AVOID.t_R, m, AVOID)
    assert r.mode.mode is FlightMode.OFFBOARD and r.setpoints == ()
    r = guidance_step(None, 0.0, AVOID.t_R + 1e-6, r.mode, AVOID)
    assert r.mode.mode is FlightMode.GUIDED and r.setpoints == ()


def test_low_probability_detection_is_ignored():
    r = guidance_step(est(-1.2, 0.4, 6.0, prob=0.69), 0.0, 0.0, Mode(), AVOID)
    assert r.mode.mode is FlightMode.GUIDED and r.setpoint is None


def test_clock_must_not_go_backwards():
    m = guidance_step(None, 0.0, 1.0, Mode(), AVOID).mode
    with pytest.raises(InvalidInput):
        guidance_step(None, 0.0, 0.5, m, AVOID)


events = st.lists(st.tuples(st.floats(0, 0.3), st.booleans()), max_size=60)


def _drive(seq, cfg=AVOID):
    t, mode, out = 0.0, Mode(), []
    last_cmd = None
    for gap, seen in seq:
        t += gap
        prev = mode.mode
        r = guidance_step(est(-1.0, 0.2, 5.0) if seen else None, 10.0, t, mode, cfg)
        mode = r.mode
        out.append((prev, r))
        if r.setpoints:
            last_cmd = t
        yield t, prev, r, last_cmd


@given(events)
def test_mode_machine_safety(seq):
    for t, prev, r, last_cmd in _drive(seq):
        if r.setpoints:
            assert r.mode.mode is FlightMode.OFFBOARD
        if r.zero_setpoint_emitted:
            assert prev is FlightMode.GUIDED
        if r.mode.mode is FlightMode.OFFBOARD:
            assert last_cmd is not None and t - last_cmd <= AVOID.t_R


@given(events)
def test_mode_machine_deterministic(seq):
    a = [(r.mode, r.setpoints) for _, _, r, _ in _drive(seq)]
    b = [(r.mode, r.setpoints) for _, _, r, _ in _drive(seq)]
    assert a == b
