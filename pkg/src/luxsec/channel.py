"""Optical channel gains for the direct LED path and the IRS-reflected paths."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import BadHalfAngle, DegenerateGeometry, ShapeMismatch
from .geom import IrsGrid, RoomConfig, as_vec

TRUSTED = 0
UNTRUSTED = 1


class LinkMode(str, Enum):
    LOS_ONLY = "los_only"
    COMBINED = "combined"
    IRS_ONLY = "irs_only"


@dataclass(frozen=True)
class OpticalParams:
    """Photodiode, LED and front-end parameters. Angles in radians."""

    pd_area: float = 1e-4
    fov: float = math.radians(85.0)
    half_intensity: float = math.radians(60.0)
    filter_gain: float = 1.0
    refractive_index: float = 1.5
    responsivity: float = 0.4
    bandwidth: float = 20e6
    # rho**2 rather than rho in the secrecy bound's signal terms
    secrecy_rho_squared: bool = True
    # rho**2 rather than 1 on the trusted signal interfering at the untrusted user
    interference_rho_squared: bool = False

    def __post_init__(self):
        checks = {
            "pd_area": self.pd_area > 0,
            "fov": 0 < self.fov <= math.pi / 2,
            "half_intensity": 0 < self.half_intensity < math.pi / 2,
            "filter_gain": self.filter_gain > 0,
            "refractive_index": self.refractive_index >= 1,
            "responsivity": self.responsivity > 0,
            "bandwidth": self.bandwidth > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise ValueError(f"invalid optical parameter {name}={getattr(self, name)!r}")

    @property
    def lambertian_order(self) -> float:
        return lambertian_order(self.half_intensity)


def lambertian_order(half_intensity: float) -> float:
    """m = -1 / log2(cos(half_intensity))."""
    if not 0 < half_intensity < math.pi / 2:
        raise BadHalfAngle(f"half-intensity angle {half_intensity} rad outside (0, pi/2)")
    m = -1.0 / math.log2(math.cos(half_intensity))
    # cos(pi/3) is 0.5000000000000001 in binary; snap ulp noise at integer orders
    r = round(m)
    if r > 0 and abs(m - r) <= 1e-12 * r:
        return float(r)
    return m


def concentrator_gain(psi, params: OpticalParams):
    """Non-imaging concentrator gain, zero outside the field of view."""
    psi = np.asarray(psi, dtype=float)
    inside = (psi >= 0) & (psi <= params.fov)
    g = np.where(inside, params.refractive_index**2 / math.sin(params.fov) ** 2, 0.0)
    return float(g) if g.ndim == 0 else g


def _lambertian_path(length, cos_phi, cos_psi, params: OpticalParams):
    """Shared Lambertian kernel: total path length plus irradiance/incidence cosines."""
    m = params.lambertian_order
    cos_psi = np.clip(cos_psi, -1.0, 1.0)
    psi = np.arccos(cos_psi)
    gc = concentrator_gain(psi, params)
    v = params.pd_area * (m + 1) / (2 * math.pi * length**2) * params.filter_gain * gc
    h = v * np.clip(cos_phi, 0.0, None) ** m * cos_psi
    return np.where((cos_psi >= 0) & (psi <= params.fov), h, 0.0)


def los_gain(user_pos, room: RoomConfig, params: OpticalParams) -> float:
    """Direct LED-to-photodiode gain."""
    d = as_vec(user_pos) - as_vec(room.led_pos)
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise DegenerateGeometry("user coincides with the LED")
    cos_phi = float(np.dot(d, room.led_normal)) / dist
    cos_psi = float(np.dot(-d, room.pd_normal)) / dist
    return float(_lambertian_path(dist, cos_phi, cos_psi, params))


def reflected_gains(user_pos, grid: IrsGrid, room: RoomConfig, params: OpticalParams) -> np.ndarray:
    """Cascaded LED -> element -> photodiode gain for every element of ``grid``.

    Each element is assumed steered toward the user (unity reflectivity), so
    the path behaves like a direct one over the summed length.
    """
    centers = grid.element_centers
    if len(centers) == 0:
        return np.zeros(0)
    d1 = centers - as_vec(room.led_pos)
    d2 = as_vec(user_pos) - centers
    l1 = np.linalg.norm(d1, axis=1)
    l2 = np.linalg.norm(d2, axis=1)
    if np.any(l1 == 0) or np.any(l2 == 0):
        raise DegenerateGeometry("reflecting element coincides with the LED or the user")
    cos_phi = d1 @ as_vec(room.led_normal) / l1
    cos_psi = -d2 @ as_vec(room.pd_normal) / l2
    return np.asarray(_lambertian_path(l1 + l2, cos_phi, cos_psi, params), dtype=float)


@dataclass(frozen=True)
class ChannelState:
    """Gains of the user pair: row 0 is the trusted user, row 1 the untrusted one."""

    h_los: np.ndarray
    h_tilde: np.ndarray = field(repr=False)

    def __post_init__(self):
        h_los = np.asarray(self.h_los, dtype=float).reshape(2)
        h_tilde = np.asarray(self.h_tilde, dtype=float)
        if h_tilde.ndim != 2 or h_tilde.shape[0] != 2:
            raise ShapeMismatch(f"h_tilde must have shape (2, N), got {h_tilde.shape}")
        if np.any(h_los < 0) or np.any(h_tilde < 0):
            raise ValueError("channel gains must be non-negative")
        h_los.setflags(write=False)
        h_tilde.setflags(write=False)
        object.__setattr__(self, "h_los", h_los)
        object.__setattr__(self, "h_tilde", h_tilde)

    @property
    def n_elements(self) -> int:
        return self.h_tilde.shape[1]

    def for_mode(self, mode: LinkMode | str) -> "ChannelState":
        """Drop the paths a link mode does not use."""
        mode = LinkMode(mode)
        if mode is LinkMode.IRS_ONLY:
            return replace(self, h_los=np.zeros(2))
        if mode is LinkMode.LOS_ONLY:
            return replace(self, h_tilde=np.zeros_like(self.h_tilde))
        return self


def channel_state(trusted_pos, untrusted_pos, grid: IrsGrid, room: RoomConfig,
                  params: OpticalParams) -> ChannelState:
    positions = (trusted_pos, untrusted_pos)
    h_los = [los_gain(p, room, params) for p in positions]
    h_tilde = np.vstack([reflected_gains(p, grid, room, params) for p in positions]).reshape(2, -1)
    return ChannelState(np.array(h_los), h_tilde)


def effective_gain(state: ChannelState, user: int, g) -> float:
    """h_los + h_tilde . g for one user and allocation vector ``g``."""
    g = np.asarray(g)
    if g.shape != (state.n_elements,):
        raise ShapeMismatch(f"allocation length {g.shape} does not match N={state.n_elements}")
    return float(state.h_los[user] + state.h_tilde[user] @ g)
