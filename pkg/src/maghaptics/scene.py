"""Virtual objects, contact detection, and the rendered force law.

Objects are exact signed distance fields (sphere, axis-aligned cube,
Z-aligned capped cylinder).  Contact uses penalty rendering: the desired
axial force is stiffness times penetration depth projected on the surface
normal, plus a procedural texture term that modulates the force while
sliding over a top surface.  Only F_z is ever commanded; lateral faces
therefore render (correctly) as force-free, which is the device's known
blind spot for sharp-edged shapes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

KINDS = ("sphere", "cube", "cylinder")
TEXTURES = ("none", "L1_glass", "L2_wood", "L3_steel")

NORMAL_STEP = 1e-4        # central-difference step for SDF normals
TEXTURE_RAMP_DEPTH = 1e-3  # texture fades in over the first 1 mm of depth

_WOOD_PERIOD = 0.008
_WOOD_AMPLITUDE = 0.3
_STEEL_PITCH = 0.012


@dataclass(frozen=True)
class SceneObject:
    """One virtual object: geometry plus contact stiffness and texture.

    ``size`` is the sphere/cylinder diameter or the cube edge; cylinders
    take (diameter, length) with the axis along Z.
    """

    kind: str
    center: tuple[float, float, float]
    size: float | tuple[float, float] = 0.100
    stiffness: float = 300.0
    texture: str = "none"
    texture_gain: float = 0.0005

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown object kind {self.kind!r}")
        if self.texture not in TEXTURES:
            raise ValueError(f"unknown texture {self.texture!r}")
        if self.kind == "cylinder":
            diameter, length = self.size
            if diameter <= 0 or length <= 0:
                raise ValueError("cylinder size must be positive")
        elif not np.isscalar(self.size) or self.size <= 0:
            raise ValueError("size must be a positive scalar")
        if self.stiffness <= 0:
            raise ValueError("stiffness must be positive")


@dataclass(frozen=True)
class ContactState:
    in_contact: bool
    depth: float
    normal: tuple[float, float, float]
    f_desired_z: float


def sdf(obj: SceneObject, point) -> float:
    """Signed distance to the object: negative inside, zero on the surface."""
    p = np.asarray(point, dtype=float) - np.asarray(obj.center, dtype=float)
    if obj.kind == "sphere":
        return float(np.linalg.norm(p) - obj.size / 2)
    if obj.kind == "cube":
        q = np.abs(p) - obj.size / 2
        outside = np.linalg.norm(np.maximum(q, 0.0))
        inside = min(float(q.max()), 0.0)
        return float(outside + inside)
    diameter, length = obj.size
    d_radial = math.hypot(p[0], p[1]) - diameter / 2
    d_axial = abs(p[2]) - length / 2
    outside = math.hypot(max(d_radial, 0.0), max(d_axial, 0.0))
    inside = min(max(d_radial, d_axial), 0.0)
    return outside + inside


def sdf_normal(obj: SceneObject, point, step: float = NORMAL_STEP) -> np.ndarray:
    """Outward unit normal from the central-difference SDF gradient."""
    p = np.asarray(point, dtype=float)
    grad = np.zeros(3)
    for axis in range(3):
        offset = np.zeros(3)
        offset[axis] = step
        grad[axis] = sdf(obj, p + offset) - sdf(obj, p - offset)
    norm = np.linalg.norm(grad)
    if norm == 0.0:
        return np.array([0.0, 0.0, 1.0])
    return grad / norm


def texture_height(level: str, x: float, y: float) -> float:
    """Dimensionless surface height of a texture at lateral position (x, y).

    L1 is polished glass (flat).  L2 is wood grain: sinusoidal ridges with
    an 8 mm period across x.  L3 is steel diamond plate: a raised lattice
    on a 12 mm diagonal pitch.  Heights stay within [-1, 1] and are scaled
    by each object's texture_gain when applied.
    """
    if level in ("none", "L1_glass"):
        return 0.0
    if level == "L2_wood":
        return math.sin(2.0 * math.pi * x / _WOOD_PERIOD) * _WOOD_AMPLITUDE
    if level == "L3_steel":
        u = (x / _STEEL_PITCH + y / _STEEL_PITCH) % 1.0
        return max(0.0, 1.0 - (u - 0.5) ** 2 * 8.0)
    raise ValueError(f"unknown texture {level!r}")


def contact_force(scene: Sequence[SceneObject], point) -> ContactState:
    """Contact state and desired axial force at the fingertip position.

    The deepest object wins.  The commanded force is the penalty term
    stiffness * depth * n_z plus the texture modulation; the texture only
    acts on top-facing surfaces (n_z > 0) and ramps in over the first
    millimetre of depth so the total force stays continuous across the
    contact boundary.
    """
    p = np.asarray(point, dtype=float)
    deepest = None
    deepest_d = 0.0
    for obj in scene:
        d = sdf(obj, p)
        if d < deepest_d:
            deepest_d = d
            deepest = obj
    if deepest is None:
        return ContactState(False, 0.0, (0.0, 0.0, 0.0), 0.0)

    depth = -deepest_d
    normal = sdf_normal(deepest, p)
    f_z = deepest.stiffness * depth * normal[2]
    if deepest.texture != "none" and normal[2] > 0.0:
        ramp = min(depth / TEXTURE_RAMP_DEPTH, 1.0)
        height = texture_height(deepest.texture, p[0], p[1])
        f_z += deepest.stiffness * deepest.texture_gain * height * ramp * normal[2]
    return ContactState(True, depth, tuple(normal), f_z)


def with_params(obj: SceneObject, stiffness=None, texture=None) -> SceneObject:
    """Copy of the object with stiffness and/or texture replaced."""
    changes = {}
    if stiffness is not None:
        changes["stiffness"] = float(stiffness)
    if texture is not None:
        changes["texture"] = texture
    return replace(obj, **changes) if changes else obj


def parse_scene(objects) -> list[SceneObject]:
    """Build a scene from its JSON representation (a list of dicts)."""
    if not isinstance(objects, list):
        raise ValueError("scene JSON must be a list of objects")
    parsed = []
    for entry in objects:
        kind = entry["kind"]
        size = entry.get("size", 0.100)
        if kind == "cylinder":
            size = tuple(float(s) for s in size)
        else:
            size = float(size)
        parsed.append(
            SceneObject(
                kind=kind,
                center=tuple(float(c) for c in entry["center"]),
                size=size,
                stiffness=float(entry.get("stiffness", 300.0)),
                texture=entry.get("texture", "none"),
                texture_gain=float(entry.get("texture_gain", 0.0005)),
            )
        )
    return parsed


def scene_to_json(scene: Sequence[SceneObject]) -> list[dict]:
    """Inverse of parse_scene, for telemetry and file output."""
    out = []
    for obj in scene:
        size = list(obj.size) if obj.kind == "cylinder" else obj.size
        out.append(
            {
                "kind": obj.kind,
                "center": list(obj.center),
                "size": size,
                "stiffness": obj.stiffness,
                "texture": obj.texture,
                "texture_gain": obj.texture_gain,
            }
        )
    return out


def load_scene(path) -> list[SceneObject]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scene(json.load(fh))
