"""Magnetostatics of the cascaded disk-electromagnet stack.

The actuator is six identical air-core coils of rectangular cross-section
mounted coaxially.  Fields are computed semi-analytically: each winding
cross-section is discretized into a grid of circular filament loops and
every filament is evaluated with the complete-elliptic-integral solution
for a current loop.  The six-coil field is the plain superposition of the
per-coil fields, so everything here is exactly linear in the drive
currents.

All positions are in metres, currents in amperes, fields in tesla.
``r`` is the cylindrical radius measured from the stack axis and ``z``
runs along it; a single coil is evaluated in its own frame where ``dz``
is the axial offset from the winding midplane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ellipe, ellipk

from .errors import InsideWinding, OutOfWorkspace, SingularPoint

MU_0 = 4e-7 * math.pi

# Geometry of the assembled display (all six coils share one CoilSpec).
STACK_PITCH = 0.039           # axial spacing between neighbouring coil centres
MIDGAP_Z = 0.1125             # z of the gap centre between coils 3 and 4
WORKSPACE_RADIUS = 0.105      # finger workspace: cylinder of diameter 210 mm
WORKSPACE_Z_MARGIN = 0.1      # workspace extends this far beyond the coil span
WINDING_CLEARANCE = 1e-3      # filament model is not trusted closer than this
_AXIS_EPS = 1e-9              # below this radius B_r is taken as its limit, 0
_FILAMENT_EPS2 = 1e-12        # squared distance defining "on the filament"


class FieldSample(NamedTuple):
    """Axisymmetric flux density at a point: radial and axial components."""

    B_r: float | np.ndarray
    B_z: float | np.ndarray

    @property
    def magnitude(self):
        return np.hypot(self.B_r, self.B_z)


@dataclass(frozen=True)
class CoilSpec:
    """One hollow disk electromagnet.

    Defaults are the production winding: 1500 effective turns of 0.67 mm
    wire on a frame with a 230 mm bore, driven up to 1.6 A.
    """

    inner_radius: float = 0.115
    outer_radius: float = 0.145
    axial_length: float = 0.030
    turns: int = 1500
    max_current: float = 1.6
    resistance: float = 17.6
    time_constant: float = 0.0134

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("need 0 < inner_radius < outer_radius")
        if self.axial_length <= 0:
            raise ValueError("axial_length must be positive")
        if self.turns < 1:
            raise ValueError("turns must be at least 1")
        if self.max_current <= 0:
            raise ValueError("max_current must be positive")


@dataclass(frozen=True)
class CoilStack:
    """Six identical coils on a common axis, uniformly spaced.

    ``centers_z[i]`` is the winding midplane of coil ``i`` (EM1 .. EM6 in
    hardware numbering).  The stack is pinned so that the midpoint between
    coils 3 and 4 sits at ``MIDGAP_Z``: that point is the natural null of
    the symmetric push-pull drive and the reference height of the display.
    """

    coil: CoilSpec = CoilSpec()
    centers_z: tuple[float, ...] = tuple(
        MIDGAP_Z + (i - 2.5) * STACK_PITCH for i in range(6)
    )

    def __post_init__(self):
        c = self.centers_z
        if len(c) != 6:
            raise ValueError("a stack has exactly six coils")
        pitches = [c[i + 1] - c[i] for i in range(5)]
        if any(p <= 0 for p in pitches):
            raise ValueError("centers_z must be strictly increasing")
        if any(abs(p - pitches[0]) > 1e-9 for p in pitches):
            raise ValueError("coil spacing must be uniform")
        if abs(0.5 * (c[2] + c[3]) - MIDGAP_Z) > 1e-9:
            raise ValueError(f"midpoint of coils 3/4 must sit at {MIDGAP_Z} m")

    @property
    def z_min(self) -> float:
        return self.centers_z[0] - self.coil.axial_length / 2

    @property
    def z_max(self) -> float:
        return self.centers_z[-1] + self.coil.axial_length / 2

    def in_workspace(self, r, z) -> bool:
        """True if (r, z) lies in the finger workspace cylinder."""
        return bool(
            np.all(np.asarray(r) <= WORKSPACE_RADIUS)
            and np.all(np.asarray(z) >= self.z_min - WORKSPACE_Z_MARGIN)
            and np.all(np.asarray(z) <= self.z_max + WORKSPACE_Z_MARGIN)
        )


def current_vector(values, max_current: float | None = None) -> np.ndarray:
    """Validate and return six coil currents as a float array."""
    currents = np.asarray(values, dtype=float)
    if currents.shape != (6,):
        raise ValueError("expected exactly six currents")
    if not np.all(np.isfinite(currents)):
        raise ValueError("currents must be finite")
    if max_current is not None and np.any(np.abs(currents) > max_current + 1e-12):
        raise ValueError(f"|current| exceeds the {max_current} A drive limit")
    return currents


def loop_field(loop_radius, current, r, z) -> FieldSample:
    """Field of a single circular filament loop.

    The loop of radius ``loop_radius`` lies in the plane z = 0, centred on
    the axis.  Evaluation uses the classical closed form

        k^2 = 4 a r / ((a + r)^2 + z^2)
        B_z = mu0 I / (2 pi sqrt((a+r)^2+z^2))
              * [K(k) + (a^2 - r^2 - z^2) / ((a-r)^2 + z^2) * E(k)]
        B_r = mu0 I z / (2 pi r sqrt((a+r)^2+z^2))
              * [-K(k) + (a^2 + r^2 + z^2) / ((a-r)^2 + z^2) * E(k)]

    with K, E the complete elliptic integrals (scipy's Cephes routines,
    accurate to machine precision).  On the axis B_r is replaced by its
    limit, exactly 0.  All arguments broadcast, so filament grids and
    evaluation grids can be combined in one call.

    Raises:
        SingularPoint: an evaluation point lies on the filament itself.
    """
    a = np.asarray(loop_radius, dtype=float)
    if np.any(a <= 0):
        raise ValueError("loop radius must be positive")
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(r < 0):
        raise ValueError("cylindrical radius must be non-negative")

    beta2 = (a - r) ** 2 + z**2
    if np.any(beta2 <= _FILAMENT_EPS2):
        raise SingularPoint("evaluation point lies on a filament loop")

    alpha2 = (a + r) ** 2 + z**2
    inv_alpha = 1.0 / np.sqrt(alpha2)
    k2 = 4.0 * a * r / alpha2
    K = ellipk(k2)
    E = ellipe(k2)

    scale = MU_0 * current / (2.0 * math.pi)
    B_z = scale * inv_alpha * (K + (a**2 - r**2 - z**2) / beta2 * E)

    on_axis = r < _AXIS_EPS
    r_safe = np.where(on_axis, 1.0, r)
    B_r = np.where(
        on_axis,
        0.0,
        scale * z / r_safe * inv_alpha * (-K + (a**2 + r**2 + z**2) / beta2 * E),
    )

    if np.ndim(B_z) == 0:
        return FieldSample(float(B_r), float(B_z))
    return FieldSample(B_r, B_z)


def _winding_distance(coil: CoilSpec, r, dz):
    """Distance in the (r, z) half-plane from points to the winding rectangle."""
    out_r = np.maximum(
        np.maximum(coil.inner_radius - np.asarray(r), np.asarray(r) - coil.outer_radius),
        0.0,
    )
    out_z = np.maximum(np.abs(np.asarray(dz)) - coil.axial_length / 2, 0.0)
    return np.hypot(out_r, out_z)


def coil_field(coil: CoilSpec, current, r, dz, n_r: int = 6, n_z: int = 7) -> FieldSample:
    """Field of one whole coil at axial offset ``dz`` from its midplane.

    The rectangular cross-section is replaced by an ``n_r`` x ``n_z`` grid
    of filaments at the cell centres, each carrying an equal share of the
    total ampere-turns.  The defaults resolve the field to a fraction of a
    percent everywhere the display operates; raise the counts when testing
    convergence against the on-axis closed form.

    Raises:
        InsideWinding: a point is inside or within 1 mm of the winding.
    """
    r = np.asarray(r, dtype=float)
    dz = np.asarray(dz, dtype=float)
    if np.any(_winding_distance(coil, r, dz) < WINDING_CLEARANCE):
        raise InsideWinding("evaluation point within 1 mm of the winding")
    if current == 0.0:
        shape = np.broadcast(r, dz).shape
        zero = 0.0 if shape == () else np.zeros(shape)
        return FieldSample(zero, zero)

    width = coil.outer_radius - coil.inner_radius
    radii = coil.inner_radius + (np.arange(n_r) + 0.5) * width / n_r
    offsets = (np.arange(n_z) + 0.5) * coil.axial_length / n_z - coil.axial_length / 2
    fil_a = np.repeat(radii, n_z)
    fil_z = np.tile(offsets, n_r)
    fil_current = current * coil.turns / (n_r * n_z)

    # Broadcast filaments against the flattened evaluation grid.
    shape = np.broadcast(r, dz).shape
    r_flat = np.broadcast_to(r, shape).reshape(1, -1)
    dz_flat = np.broadcast_to(dz, shape).reshape(1, -1)
    B_r, B_z = loop_field(
        fil_a[:, None], fil_current, r_flat, dz_flat - fil_z[:, None]
    )
    B_r = B_r.sum(axis=0).reshape(shape)
    B_z = B_z.sum(axis=0).reshape(shape)
    if shape == ():
        return FieldSample(float(B_r), float(B_z))
    return FieldSample(B_r, B_z)


def coil_field_on_axis(coil: CoilSpec, current, dz):
    """Exact on-axis B_z of the uniform-current-density coil model.

    Closed form for a rectangular cross-section carrying current density
    J = N I / ((R2 - R1) L):

        B_z = mu0 J / 2 * [ f(dz + L/2) - f(dz - L/2) ]
        f(zeta) = zeta * ln((R2 + sqrt(R2^2 + zeta^2)) / (R1 + sqrt(R1^2 + zeta^2)))

    Serves as the independent oracle for the filament discretization.
    """
    dz = np.asarray(dz, dtype=float)
    r1, r2, length = coil.inner_radius, coil.outer_radius, coil.axial_length
    density = coil.turns * current / ((r2 - r1) * length)

    def edge_term(zeta):
        return zeta * np.log((r2 + np.hypot(r2, zeta)) / (r1 + np.hypot(r1, zeta)))

    value = 0.5 * MU_0 * density * (edge_term(dz + length / 2) - edge_term(dz - length / 2))
    return float(value) if value.ndim == 0 else value


def stack_field(
    stack: CoilStack,
    currents,
    r,
    z,
    *,
    exploratory: bool = False,
    n_r: int = 6,
    n_z: int = 7,
) -> FieldSample:
    """Superposed field of all six coils at workspace point (r, z).

    Exactly linear in each coil current.  Points outside the finger
    workspace are rejected unless ``exploratory`` is set (survey scans may
    go right up to the coil bores).

    Raises:
        OutOfWorkspace: point outside the workspace and not exploratory.
        InsideWinding: propagated from any coil.
    """
    currents = current_vector(currents)
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if not exploratory and not stack.in_workspace(r, z):
        raise OutOfWorkspace("field point outside the finger workspace")

    shape = np.broadcast(r, z).shape
    B_r = np.zeros(shape)
    B_z = np.zeros(shape)
    for center, current in zip(stack.centers_z, currents):
        if current == 0.0:
            continue
        sample = coil_field(stack.coil, current, r, z - center, n_r=n_r, n_z=n_z)
        B_r += sample.B_r
        B_z += sample.B_z
    if shape == ():
        return FieldSample(float(B_r), float(B_z))
    return FieldSample(B_r, B_z)


def field_gradient_z(
    stack: CoilStack,
    currents,
    r,
    z,
    *,
    step: float = 5e-4,
    exploratory: bool = False,
    n_r: int = 6,
    n_z: int = 7,
):
    """Axial gradient dB_z/dz by central difference with step ``step``.

    The default 0.5 mm step keeps the truncation error orders of magnitude
    below the force tolerances; halving it is a cheap Richardson cross
    check used by the test suite.
    """
    z = np.asarray(z, dtype=float)
    upper = stack_field(stack, currents, r, z + step, exploratory=exploratory, n_r=n_r, n_z=n_z)
    lower = stack_field(stack, currents, r, z - step, exploratory=exploratory, n_r=n_r, n_z=n_z)
    grad = (upper.B_z - lower.B_z) / (2.0 * step)
    return float(grad) if np.ndim(grad) == 0 else grad
