"""Room geometry: vectors, LED/receiver layout, IRS grid and user placement."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import GridOverflow, ZeroVector


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def __array__(self, dtype=None, copy=None):
        return np.array((self.x, self.y, self.z), dtype=dtype or float)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


def as_vec(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {a.shape}")
    return a


def cos_between(d, n) -> float:
    """Cosine of the angle between direction ``d`` and unit normal ``n``.

    The result is clamped to [-1, 1]. Raises ZeroVector for a zero-length ``d``.
    """
    d = as_vec(d)
    n = as_vec(n)
    length = float(np.linalg.norm(d))
    if length == 0.0:
        raise ZeroVector("direction vector has zero length")
    return float(np.clip(np.dot(d, n) / length, -1.0, 1.0))


def _unit(v, name: str) -> np.ndarray:
    v = as_vec(v)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"{name} must be a unit vector, got {tuple(v)}")
    return v


@dataclass(frozen=True)
class RoomConfig:
    dims: Vec3 = Vec3(3.0, 3.0, 5.0)
    led_pos: Vec3 | None = None
    led_normal: Vec3 = Vec3(0.0, 0.0, -1.0)
    receiver_height: float = 0.85
    pd_normal: Vec3 = Vec3(0.0, 0.0, 1.0)

    def __post_init__(self):
        dims = Vec3(*map(float, self.dims))
        object.__setattr__(self, "dims", dims)
        if min(dims) <= 0:
            raise ValueError("room dimensions must be positive")
        if self.led_pos is None:
            # centre of the ceiling
            object.__setattr__(self, "led_pos", Vec3(dims.x / 2, dims.y / 2, dims.z))
        else:
            object.__setattr__(self, "led_pos", Vec3(*map(float, self.led_pos)))
        object.__setattr__(self, "led_normal", Vec3(*_unit(self.led_normal, "led_normal")))
        object.__setattr__(self, "pd_normal", Vec3(*_unit(self.pd_normal, "pd_normal")))
        if not all(0.0 <= p <= d for p, d in zip(self.led_pos, dims)):
            raise ValueError("led_pos must lie inside the room")
        if not 0.0 <= self.receiver_height < dims.z:
            raise ValueError("receiver_height must satisfy 0 <= h < room height")


@dataclass(frozen=True)
class IrsGrid:
    n_elements: int
    element_centers: np.ndarray = field(repr=False)
    wall_normal: Vec3 = Vec3(1.0, 0.0, 0.0)

    def __post_init__(self):
        centers = np.asarray(self.element_centers, dtype=float).reshape(-1, 3)
        if len(centers) != self.n_elements:
            raise ValueError("element_centers length must equal n_elements")
        centers.setflags(write=False)
        object.__setattr__(self, "element_centers", centers)


def grid_shape(n: int) -> tuple[int, int]:
    """Rows and columns of the near-square layout holding ``n`` elements."""
    if n <= 0:
        return 0, 0
    cols = math.isqrt(n - 1) + 1  # ceil(sqrt(n))
    rows = -(-n // cols)
    return rows, cols


def place_irs_grid(room: RoomConfig, n: int, element_pitch: float = 0.1) -> IrsGrid:
    """Lay ``n`` reflecting elements on the x = 0 wall.

    Elements fill a near-square grid row by row from the top, centred on the
    wall's horizontal midpoint and mid-height. When ``n`` is not a perfect fit
    the trailing cells of the last row stay empty.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if element_pitch <= 0:
        raise ValueError("element_pitch must be positive")
    rows, cols = grid_shape(n)
    dims = room.dims
    if cols * element_pitch > dims.y or rows * element_pitch > dims.z:
        raise GridOverflow(
            f"{rows}x{cols} grid at pitch {element_pitch} m exceeds "
            f"the {dims.y} x {dims.z} m wall"
        )
    yc, zc = dims.y / 2, dims.z / 2
    idx = np.arange(n)
    r, c = np.divmod(idx, cols) if n else (idx, idx)
    ys = yc + (c - (cols - 1) / 2) * element_pitch
    zs = zc + ((rows - 1) / 2 - r) * element_pitch
    centers = np.column_stack([np.zeros(n), ys, zs])
    return IrsGrid(n, centers, Vec3(1.0, 0.0, 0.0))


def sample_user_position(room: RoomConfig, rng: np.random.Generator) -> Vec3:
    x, y = rng.uniform(0.0, 1.0, size=2) * (room.dims.x, room.dims.y)
    return Vec3(float(x), float(y), room.receiver_height)
