"""Line-of-sight optical channel model for a downlink VLC cell.

A ceiling-mounted LED luminaire (generalized Lambertian emitter, facing
straight down) illuminates photodiode receivers that face straight up.
Under that fixed orientation the irradiance angle at the LED and the
incidence angle at the detector coincide, and the DC channel gain of a
link is

    h = A (m + 1) / (2 pi d^2) * cos(phi)^m * T * g(psi) * cos(psi)

with detector area A, Lambertian order m, link distance d, optical
filter gain T and the concentrator gain g(psi) of a non-imaging lens
with field-of-view semiangle Psi_c.  Outside the field of view the
concentrator blocks the light and the gain is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ChannelParams",
    "LinkGeometry",
    "lambertian_order",
    "concentrator_gain",
    "channel_gain",
]


def lambertian_order(half_power_semiangle: float) -> float:
    """Lambertian mode number of an LED with the given half-power semiangle.

    m = -ln(2) / ln(cos(Phi_1/2)), so a 60 degree semiangle gives m = 1
    and narrower beams give larger orders.

    Parameters
    ----------
    half_power_semiangle : float
        Phi_1/2 in radians, strictly inside (0, pi/2).
    """
    if not 0.0 < half_power_semiangle < math.pi / 2:
        raise ValueError(
            f"half-power semiangle must lie in (0, pi/2) rad, got {half_power_semiangle!r}"
        )
    return -math.log(2.0) / math.log(math.cos(half_power_semiangle))


@dataclass(frozen=True)
class ChannelParams:
    """Fixed physical parameters of the optical front end.

    Defaults are the standard indoor values used throughout: 1 cm^2
    detector, 60 degree half-power semiangle, 32 degree receiver field
    of view, unit optical filter gain, refractive index 1.5 and
    responsivity 0.4 A/W.  Angles are radians.
    """

    area_m2: float = 1e-4
    half_power_semiangle: float = math.radians(60.0)
    fov_semiangle: float = math.radians(32.0)
    filter_gain: float = 1.0
    refractive_index: float = 1.5
    responsivity: float = 0.4
    lambertian_m: float = field(init=False)

    def __post_init__(self) -> None:
        if self.area_m2 <= 0.0:
            raise ValueError(f"detector area must be positive, got {self.area_m2!r}")
        if not 0.0 < self.fov_semiangle <= math.pi / 2:
            raise ValueError(
                f"FOV semiangle must lie in (0, pi/2] rad, got {self.fov_semiangle!r}"
            )
        if self.filter_gain <= 0.0:
            raise ValueError(f"filter gain must be positive, got {self.filter_gain!r}")
        if self.refractive_index < 1.0:
            raise ValueError(
                f"refractive index must be >= 1, got {self.refractive_index!r}"
            )
        if self.responsivity <= 0.0:
            raise ValueError(f"responsivity must be positive, got {self.responsivity!r}")
        # also validates the semiangle range
        object.__setattr__(
            self, "lambertian_m", lambertian_order(self.half_power_semiangle)
        )


@dataclass(frozen=True)
class LinkGeometry:
    """Relative geometry of one LED-to-photodiode link.

    Positions are cartesian (x, y, z) in metres with the LED above the
    receiver plane.  With the LED normal pointing down and the detector
    normal pointing up, both the irradiance and the incidence angle
    equal arccos((z_vap - z_user) / d).
    """

    vap_pos: tuple[float, float, float]
    user_pos: tuple[float, float, float]
    distance: float = field(init=False)
    irradiance_angle: float = field(init=False)
    incidence_angle: float = field(init=False)

    def __post_init__(self) -> None:
        vap = np.asarray(self.vap_pos, dtype=float)
        user = np.asarray(self.user_pos, dtype=float)
        if vap.shape != (3,) or user.shape != (3,):
            raise ValueError("positions must be 3-vectors (x, y, z)")
        dz = vap[2] - user[2]
        if dz <= 0.0:
            raise ValueError(
                f"LED must sit above the receiver plane (z_vap={vap[2]!r}, z_user={user[2]!r})"
            )
        d = float(np.linalg.norm(vap - user))
        angle = math.acos(min(1.0, dz / d))
        object.__setattr__(self, "vap_pos", (float(vap[0]), float(vap[1]), float(vap[2])))
        object.__setattr__(self, "user_pos", (float(user[0]), float(user[1]), float(user[2])))
        object.__setattr__(self, "distance", d)
        object.__setattr__(self, "irradiance_angle", angle)
        object.__setattr__(self, "incidence_angle", angle)


def concentrator_gain(incidence_angle: float, params: ChannelParams) -> float:
    """Gain of the ideal non-imaging concentrator at the given incidence angle.

    n^2 / sin^2(Psi_c) inside the field of view (boundary included),
    zero outside.  The incidence angle must lie in [0, pi/2].
    """
    if not 0.0 <= incidence_angle <= math.pi / 2:
        raise ValueError(
            f"incidence angle must lie in [0, pi/2] rad, got {incidence_angle!r}"
        )
    if incidence_angle > params.fov_semiangle:
        return 0.0
    return params.refractive_index**2 / math.sin(params.fov_semiangle) ** 2


def channel_gain(geometry: LinkGeometry, params: ChannelParams) -> float:
    """DC gain of one LOS link; zero when the LED falls outside the FOV."""
    g = concentrator_gain(geometry.incidence_angle, params)
    if g == 0.0:
        return 0.0
    m = params.lambertian_m
    radial = params.area_m2 * (m + 1.0) / (2.0 * math.pi * geometry.distance**2)
    return (
        radial
        * math.cos(geometry.irradiance_angle) ** m
        * params.filter_gain
        * g
        * math.cos(geometry.incidence_angle)
    )
