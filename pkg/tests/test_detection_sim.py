import math

import pytest
from hypothesis import assume, given, strategies as st

from stadia.cam_geometry import BoundingBox, position_from_detection
from stadia.detection_sim import (DetectorModel, RelativeTarget, angular_centre,
                                  detection_probability, relative_in_camera, size_from_depth,
                                  synth_detection)
from stadia.errors import InvalidInput
from stadia.vehicle import VehicleState

RAW = DetectorModel(quantize_px=False)
QUANT = DetectorModel(quantize_px=True)


def ego(heading=0.0, pos=(0.0, 0.0, 0.0)):
    return VehicleState(pos, (0.0, 0.0, 0.0), heading)


def test_relative_heading_north():
    rel = relative_in_camera(ego(), (6, -1.2, -0.4))
    assert (rel.x_D_true, rel.y_D_true, rel.z_D_true) == pytest.approx((-1.2, 0.4, 6.0))


def test_relative_heading_east():
    rel = relative_in_camera(ego(90.0), (1.2, 6, -0.4))
    assert (rel.x_D_true, rel.y_D_true, rel.z_D_true) == pytest.approx((-1.2, 0.4, 6.0), abs=1e-12)


def test_relative_coincident():
    rel = relative_in_camera(ego(33.0, (5, 5, -10)), (5, 5, -10))
    assert (rel.x_D_true, rel.y_D_true, rel.z_D_true) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("kw", [dict(p_far=0.9, p_near=0.8), dict(p_near=1.2), dict(p_far=0),
                                dict(R_det=0)])
def test_model_validation(kw):
    with pytest.raises(InvalidInput):
        DetectorModel(**kw)


@pytest.mark.parametrize("z,s", [(6.0, 0.01), (1.516, 0.2), (2.4, 0.04)])
def test_size_from_depth(z, s):
    assert size_from_depth(z, RAW) == pytest.approx(s, abs=1e-11)


def test_size_from_depth_branch_sides():
    assert size_from_depth(2.4, RAW) <= 0.04
    assert size_from_depth(2.1, RAW) > 0.04
    assert size_from_depth(0.01, RAW) == 0.4


@pytest.mark.parametrize("z", [0.0, -1.0, 7.2, 9.0])
def test_size_from_depth_out_of_range(z):
    assert size_from_depth(z, RAW) is None


def test_dead_ahead_box():
    box, p = synth_detection(RelativeTarget(0.0, 0.0, 6.0), QUANT)
    assert box == BoundingBox(288, 216, 352, 264)
    assert 0.7 <= p <= 0.95


@pytest.mark.parametrize("rel", [RelativeTarget(0, 0, 15.0), RelativeTarget(0, 0, -3.0),
                                 RelativeTarget(0, 0, 0.0), RelativeTarget(5.0, 0, 2.0),
                                 RelativeTarget(0, 11.99, 1.0), RelativeTarget(0, 0, 7.5)])
def test_no_detection_outside_envelope(rel):
    assert synth_detection(rel, QUANT) is None


def test_probability_endpoints():
    assert detection_probability(0.0, RAW) == 0.95
    assert detection_probability(12.0, RAW) == 0.70
    assert detection_probability(50.0, RAW) == 0.70


@given(st.floats(0, 30), st.floats(0, 30))
def test_probability_bounded_and_monotone(r1, r2):
    p1, p2 = detection_probability(r1, RAW), detection_probability(r2, RAW)
    assert 0.70 <= p1 <= 0.95
    if r1 <= r2:
        assert p1 >= p2


def _unclipped(rel, model):
    s = size_from_depth(rel.z_D_true, model)
    x_p, y_p = angular_centre(rel, model.camera)
    return abs(x_p) + math.sqrt(s) < 1 and abs(y_p) + math.sqrt(s) < 1


def _target(z, ax, ay):
    return RelativeTarget(math.tan(math.radians(ax)) * z, math.tan(math.radians(ay)) * z, z)


def _roundtrip(rel, model):
    box, p = synth_detection(rel, model)
    est = position_from_detection(box, model.camera, p, 0.7)
    return max(abs(est.x_D - rel.x_D_true), abs(est.y_D - rel.y_D_true),
               abs(est.z_D - rel.z_D_true))


depths = st.one_of(st.floats(0.9, 2.0632), st.floats(2.4, 7.0))
angles_x = st.floats(-30, 30)
angles_y = st.floats(-24, 24)


@given(depths, angles_x, angles_y)
def test_loop_closure_exact_without_quantization(z, ax, ay):
    rel = _target(z, ax, ay)
    assume(_unclipped(rel, RAW))
    assert _roundtrip(rel, RAW) <= 1e-6


@given(st.one_of(st.floats(0.9, 2.0632), st.floats(2.4, 5.0)), angles_x, angles_y)
def test_loop_closure_with_pixel_quantization(z, ax, ay):
    rel = _target(z, ax, ay)
    assume(_unclipped(rel, QUANT))
    assert _roundtrip(rel, QUANT) <= 0.15


@given(st.floats(2.0633, 2.3999), angles_x, angles_y, st.booleans())
def test_dead_zone_error_bound(z, ax, ay, quant):
    model = QUANT if quant else RAW
    rel = _target(z, ax, ay)
    assume(_unclipped(rel, model))
    box, p = synth_detection(rel, model)
    est = position_from_detection(box, model.camera, p, 0.7)
    assert abs(est.z_D - z) <= 0.35


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20), st.booleans())
def test_deterministic(x, y, z, quant):
    model = QUANT if quant else RAW
    assert synth_detection(RelativeTarget(x, y, z), model) == synth_detection(RelativeTarget(x, y, z), model)


@pytest.mark.parametrize("z", [2.0625, 2.0631, 2.4, 2.401])
def test_quantization_keeps_depth_branch(z):
    assert _roundtrip(RelativeTarget(0.0, 0.0, z), QUANT) <= 0.15


@given(st.floats(0.05, 0.9), st.floats(-5, 5), st.floats(-5, 5))
def test_close_range_depth_never_negative(z, ax, ay):
    rel = _target(z, ax, ay)
    hit = synth_detection(rel, QUANT)
    if hit is None:
        return
    est = position_from_detection(hit[0], QUANT.camera, hit[1], 0.7)
    assert est is not None and est.z_D > 0
