"""Axial electromagnetic force on the fingertip permanent magnet.

The wearable is a disk magnet held with its magnetization along the stack
axis, so the force that matters is F_z.  Two models are provided: a fast
point-dipole evaluation (moment times field gradient at the magnet
centre) used everywhere in the control path, and a volumetric model that
subdivides the magnet body into cells and is used as its accuracy oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coils import (
    CoilSpec,
    CoilStack,
    WORKSPACE_RADIUS,
    WORKSPACE_Z_MARGIN,
    WINDING_CLEARANCE,
    coil_field,
    field_gradient_z,
)
from .errors import OutOfWorkspace

GRADIENT_STEP = 5e-4

# Characterization scan for a single coil: radius limited so the 40 mm
# magnet stays inside the bore, axial range out to where the force tail
# is negligible, 5 mm pitch.
SCAN_R_MAX = 0.090
SCAN_DZ_MAX = 0.215
SCAN_STEP = 0.005


@dataclass(frozen=True)
class MagnetSpec:
    """The fingertip disk magnet, uniformly magnetized along +Z.

    Defaults describe the production N35 disk (40 mm diameter, 4 mm
    thick).  The magnetization is taken equal to the quoted coercivity of
    the grade, 8.59e5 A/m; using the remanence instead would shift the
    moment by under ten percent.
    """

    radius: float = 0.020
    thickness: float = 0.004
    magnetization: float = 8.59e5

    def __post_init__(self):
        if self.radius <= 0 or self.thickness <= 0 or self.magnetization <= 0:
            raise ValueError("magnet dimensions and magnetization must be positive")

    @property
    def moment(self) -> float:
        """Dipole moment in A m^2: magnetization times cylinder volume."""
        return self.magnetization * math.pi * self.radius**2 * self.thickness


@dataclass(frozen=True)
class MagnetPose:
    """Magnet centre position; the dipole axis is fixed along +Z."""

    position: tuple[float, float, float]

    @property
    def r(self) -> float:
        x, y, _ = self.position
        return math.hypot(x, y)

    @property
    def z(self) -> float:
        return self.position[2]


def _check_pose(magnet: MagnetSpec, stack: CoilStack, r: float, z: float):
    """Reject poses outside the workspace or with the magnet near a winding."""
    if r > WORKSPACE_RADIUS:
        raise OutOfWorkspace(f"magnet centre radius {r:.4f} m outside workspace")
    if not (stack.z_min - WORKSPACE_Z_MARGIN <= z <= stack.z_max + WORKSPACE_Z_MARGIN):
        raise OutOfWorkspace(f"magnet centre z {z:.4f} m outside workspace")
    coil = stack.coil
    # Bounding rectangle of the magnet body in the (r, z) half-plane.
    body_r_max = r + magnet.radius
    body_z = magnet.thickness / 2
    for center in stack.centers_z:
        gap_r = max(coil.inner_radius - body_r_max, 0.0)
        gap_z = max(abs(z - center) - coil.axial_length / 2 - body_z, 0.0)
        if body_r_max >= coil.inner_radius and gap_z == 0.0:
            raise OutOfWorkspace("magnet body overlaps a winding annulus")
        if math.hypot(gap_r, gap_z) < WINDING_CLEARANCE:
            raise OutOfWorkspace("magnet body within 1 mm of a winding")


def dipole_force_z(
    magnet: MagnetSpec,
    pose: MagnetPose,
    stack: CoilStack,
    currents,
    *,
    step: float = GRADIENT_STEP,
) -> float:
    """Axial force on the magnet in the point-dipole approximation.

    F_z = m * dB_z/dz evaluated at the magnet centre; linear in every coil
    current.
    """
    _check_pose(magnet, stack, pose.r, pose.z)
    grad = field_gradient_z(stack, currents, pose.r, pose.z, step=step, exploratory=True)
    return magnet.moment * grad


def single_coil_g(
    magnet: MagnetSpec,
    coil: CoilSpec,
    r,
    dz,
    *,
    current: float = 1.0,
    step: float = GRADIENT_STEP,
    n_r: int = 6,
    n_z: int = 7,
):
    """Dipole-model force from one coil, per the given drive current.

    This is the kernel sampled into the offline force tables: with
    ``current=1`` it returns newtons per ampere as a function of the
    magnet position in the coil's own frame.  Broadcasts over (r, dz).
    """
    dz = np.asarray(dz, dtype=float)
    upper = coil_field(coil, current, r, dz + step, n_r=n_r, n_z=n_z)
    lower = coil_field(coil, current, r, dz - step, n_r=n_r, n_z=n_z)
    force = magnet.moment * (upper.B_z - lower.B_z) / (2.0 * step)
    return float(force) if np.ndim(force) == 0 else force


def _magnet_cells(magnet: MagnetSpec, cells: tuple[int, int, int]):
    """Cell-centre offsets and volumes for the subdivided magnet cylinder."""
    n_rad, n_ang, n_ax = cells
    edges = np.linspace(0.0, magnet.radius, n_rad + 1)
    mid_r = 0.5 * (edges[:-1] + edges[1:])
    ring_volume = math.pi * (edges[1:] ** 2 - edges[:-1] ** 2) * (magnet.thickness / n_ax) / n_ang
    mid_ang = (np.arange(n_ang) + 0.5) * 2.0 * math.pi / n_ang
    mid_ax = (np.arange(n_ax) + 0.5) * magnet.thickness / n_ax - magnet.thickness / 2

    rad, ang, ax = np.meshgrid(mid_r, mid_ang, mid_ax, indexing="ij")
    vol = np.broadcast_to(ring_volume[:, None, None], rad.shape)
    return rad.ravel(), ang.ravel(), ax.ravel(), vol.ravel()


def volumetric_force_z(
    magnet: MagnetSpec,
    pose: MagnetPose,
    stack: CoilStack,
    currents,
    cells: tuple[int, int, int] = (4, 12, 2),
    *,
    step: float = GRADIENT_STEP,
) -> float:
    """Axial force with the magnet body resolved into dipole cells.

    The cylinder is split into ``cells`` = (radial, angular, axial) cells;
    each carries a point dipole of moment M * cell_volume at its centre.
    Doubling every count moves the result by well under a percent, so the
    default (4, 12, 2) already stands as the reference for the dipole
    model.
    """
    _check_pose(magnet, stack, pose.r, pose.z)
    rad, ang, ax, vol = _magnet_cells(magnet, cells)
    x0, y0, z0 = pose.position
    x = x0 + rad * np.cos(ang)
    y = y0 + rad * np.sin(ang)
    r_cyl = np.hypot(x, y)
    z = z0 + ax
    grad = field_gradient_z(stack, currents, r_cyl, z, step=step, exploratory=True)
    return float(np.sum(magnet.magnetization * vol * grad))


def max_single_coil_force(
    magnet: MagnetSpec,
    coil: CoilSpec,
    *,
    current: float | None = None,
) -> tuple[float, tuple[float, float]]:
    """Scan one coil's quadrant for the strongest force on the magnet.

    Sweeps the characterization grid r in [0, 90 mm], dz in [0, 215 mm] at
    5 mm pitch with the coil driven at ``current`` (its rated maximum by
    default) and returns the signed force of largest magnitude together
    with its (r, dz) location.
    """
    if current is None:
        current = coil.max_current
    r_axis = np.arange(0.0, SCAN_R_MAX + SCAN_STEP / 2, SCAN_STEP)
    dz_axis = np.arange(0.0, SCAN_DZ_MAX + SCAN_STEP / 2, SCAN_STEP)
    r_grid, dz_grid = np.meshgrid(r_axis, dz_axis, indexing="ij")
    force = single_coil_g(magnet, coil, r_grid, dz_grid, current=current)
    flat = np.argmax(np.abs(force))
    i, j = np.unravel_index(flat, force.shape)
    return float(force[i, j]), (float(r_axis[i]), float(dz_axis[j]))
