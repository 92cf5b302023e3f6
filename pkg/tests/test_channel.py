"""Optical channel model tests against hand-derived values."""

import math

import pytest

from vlcnoma.channel import (
    ChannelParams,
    LinkGeometry,
    channel_gain,
    concentrator_gain,
    lambertian_order,
)

# standard indoor link: emitter 3.0 m, receiver plane 0.85 m
DZ = 2.15


def test_lambertian_order_60_deg_is_unity():
    assert lambertian_order(math.radians(60.0)) == pytest.approx(1.0, abs=1e-12)


def test_lambertian_order_30_deg():
    # -ln 2 / ln cos(30 deg) = 0.6931472 / 0.1438410
    assert lambertian_order(math.radians(30.0)) == pytest.approx(4.818842, rel=1e-5)


def test_lambertian_order_rejects_out_of_range():
    for bad in (0.0, -0.1, math.pi / 2, 2.0):
        with pytest.raises(ValueError):
            lambertian_order(bad)


def test_default_params_has_unit_lambertian_order():
    assert ChannelParams().lambertian_m == pytest.approx(1.0, abs=1e-12)


def test_concentrator_gain_on_axis():
    # n^2 / sin^2(32 deg) = 2.25 / 0.2808144
    assert concentrator_gain(0.0, ChannelParams()) == pytest.approx(8.012408, rel=1e-5)


def test_concentrator_gain_constant_inside_fov_inclusive():
    p = ChannelParams()
    inside = concentrator_gain(p.fov_semiangle / 2, p)
    at_edge = concentrator_gain(p.fov_semiangle, p)
    assert inside == at_edge == concentrator_gain(0.0, p)


def test_concentrator_gain_zero_outside_fov():
    p = ChannelParams()
    assert concentrator_gain(p.fov_semiangle + 1e-9, p) == 0.0
    assert concentrator_gain(math.pi / 2, p) == 0.0


def test_concentrator_gain_rejects_bad_angle():
    p = ChannelParams()
    with pytest.raises(ValueError):
        concentrator_gain(-0.01, p)
    with pytest.raises(ValueError):
        concentrator_gain(math.pi / 2 + 0.01, p)


def test_geometry_angles_coincide_and_distance_matches():
    g = LinkGeometry((0.3, -1.0, 3.0), (1.1, 0.4, 0.85))
    assert g.irradiance_angle == g.incidence_angle
    expect = math.sqrt(0.8**2 + 1.4**2 + DZ**2)
    assert g.distance == pytest.approx(expect, rel=1e-12)
    assert g.incidence_angle == pytest.approx(math.acos(DZ / expect), rel=1e-12)


def test_geometry_requires_emitter_above_receiver():
    with pytest.raises(ValueError):
        LinkGeometry((0, 0, 1.0), (0, 0, 1.0))
    with pytest.raises(ValueError):
        LinkGeometry((0, 0, 0.5), (0, 0, 0.85))
    with pytest.raises(ValueError):
        LinkGeometry((0, 0, 3.0), (0, 0.85))


def test_nadir_gain_standard_setup():
    # A (m+1) / (2 pi d^2) * g = 1e-4 * 2 / (2 pi * 2.15^2) * 8.012408
    g = LinkGeometry((0, 0, 3.0), (0, 0, 0.85))
    assert channel_gain(g, ChannelParams()) == pytest.approx(5.5174234e-5, rel=1e-6)


def test_gain_follows_inverse_square_at_nadir():
    p = ChannelParams()
    near = channel_gain(LinkGeometry((0, 0, 3.0), (0, 0, 0.85)), p)
    far = channel_gain(LinkGeometry((0, 0, 5.15), (0, 0, 0.85)), p)
    assert near / far == pytest.approx(4.0, rel=1e-12)


def test_off_axis_rolloff_is_cos_to_the_m_plus_3():
    # for m = 1 the gain falls as cos^4 of the common link angle
    p = ChannelParams()
    r = DZ * math.tan(math.radians(30.0))
    nadir = channel_gain(LinkGeometry((0, 0, 3.0), (0, 0, 0.85)), p)
    off = channel_gain(LinkGeometry((0, 0, 3.0), (r, 0, 0.85)), p)
    assert off / nadir == pytest.approx((math.sqrt(3.0) / 2.0) ** 4, rel=1e-9)


def test_gain_zero_beyond_fov():
    p = ChannelParams()
    r = DZ * math.tan(p.fov_semiangle + 0.01)
    assert channel_gain(LinkGeometry((0, 0, 3.0), (r, 0, 0.85)), p) == 0.0


def test_gain_positive_just_inside_fov_edge():
    p = ChannelParams()
    r = DZ * math.tan(p.fov_semiangle - 1e-9)
    h = channel_gain(LinkGeometry((0, 0, 3.0), (r, 0, 0.85)), p)
    assert h > 0.0
    # cell-edge gain in units of 1e-4: nadir 0.5517423 scaled by cos^4(32 deg)
    assert h / 1e-4 == pytest.approx(0.2853766, rel=1e-4)


def test_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(area_m2=0.0)
    with pytest.raises(ValueError):
        ChannelParams(fov_semiangle=0.0)
    with pytest.raises(ValueError):
        ChannelParams(refractive_index=0.9)
    with pytest.raises(ValueError):
        ChannelParams(half_power_semiangle=math.pi / 2)
    with pytest.raises(ValueError):
        ChannelParams(responsivity=-0.4)
