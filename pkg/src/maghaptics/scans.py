"""Survey scans over the display volume: flux and force extrema.

These reproduce the characterization sweeps used to size the device: the
six-coil flux map under the symmetric push-pull drive, the corresponding
force map on the reference magnet, and the single-coil force quadrant.
Grids use the standard 5 mm pitch and are aligned so the mid-gap plane
(z = 112.5 mm) is a grid row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coils import MIDGAP_Z, CoilStack, stack_field
from .magnet import MagnetSpec, single_coil_g

SCAN_STEP = 0.005
FLUX_SCAN_R_MAX = 0.110   # field survey runs right up to the coil bore
FORCE_SCAN_R_MAX = 0.090  # magnet-centre range keeping the disk inside the bore


@dataclass(frozen=True)
class ScanResult:
    value: float              # extremal value (T for flux, N for force)
    r: float                  # radius of the extremum
    z: float                  # axial position of the extremum
    r_axis: np.ndarray
    z_axis: np.ndarray
    grid: np.ndarray          # full scanned field, shape (len(r), len(z))


def _axes(r_max: float, stack: CoilStack):
    r_axis = np.arange(0.0, r_max + SCAN_STEP / 2, SCAN_STEP)
    # z rows aligned to the mid-gap plane, covering the full coil span.
    below = int(np.ceil((MIDGAP_Z - stack.z_min) / SCAN_STEP))
    above = int(np.ceil((stack.z_max - MIDGAP_Z) / SCAN_STEP))
    z_axis = MIDGAP_Z + SCAN_STEP * np.arange(-below, above + 1)
    return r_axis, z_axis


def flux_scan(stack: CoilStack, currents) -> ScanResult:
    """Max |B| over the bore volume on the 5 mm grid."""
    r_axis, z_axis = _axes(FLUX_SCAN_R_MAX, stack)
    r_grid, z_grid = np.meshgrid(r_axis, z_axis, indexing="ij")
    sample = stack_field(stack, currents, r_grid, z_grid, exploratory=True)
    magnitude = sample.magnitude
    i, j = np.unravel_index(np.argmax(magnitude), magnitude.shape)
    return ScanResult(
        value=float(magnitude[i, j]), r=float(r_axis[i]), z=float(z_axis[j]),
        r_axis=r_axis, z_axis=z_axis, grid=magnitude,
    )


def force_scan(stack: CoilStack, currents, magnet: MagnetSpec) -> ScanResult:
    """Signed F_z extremum (by magnitude) over the magnet-centre range."""
    r_axis, z_axis = _axes(FORCE_SCAN_R_MAX, stack)
    force = np.zeros((len(r_axis), len(z_axis)))
    r_grid = np.repeat(r_axis, len(z_axis)).reshape(len(r_axis), len(z_axis))
    for center, current in zip(stack.centers_z, currents):
        if current == 0.0:
            continue
        dz_grid = z_axis[None, :] - center
        force += single_coil_g(
            magnet, stack.coil, r_grid, np.broadcast_to(dz_grid, r_grid.shape),
            current=current,
        )
    i, j = np.unravel_index(np.argmax(np.abs(force)), force.shape)
    return ScanResult(
        value=float(force[i, j]), r=float(r_axis[i]), z=float(z_axis[j]),
        r_axis=r_axis, z_axis=z_axis, grid=force,
    )
