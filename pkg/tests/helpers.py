"""Shared numeric helpers for the test suite."""

import numpy as np

from maghaptics import volumetric_force_z


def winding_clearance(stack, r, z):
    """Distance from a point in the (r, z) half-plane to the nearest winding."""
    coil = stack.coil
    best = np.inf
    for center in stack.centers_z:
        dr = max(coil.inner_radius - r, r - coil.outer_radius, 0.0)
        dz = max(abs(z - center) - coil.axial_length / 2, 0.0)
        best = min(best, float(np.hypot(dr, dz)))
    return best


def magnet_body_clearance(stack, magnet, r, z):
    """Distance from the whole magnet body to the nearest winding.

    Uses the body's bounding rectangle in the (r, z) half-plane; this is
    the clearance that governs how well the point-dipole model can stand
    in for the volumetric one.
    """
    coil = stack.coil
    body_r = r + magnet.radius
    z_lo, z_hi = z - magnet.thickness / 2, z + magnet.thickness / 2
    best = np.inf
    for center in stack.centers_z:
        w_lo = center - coil.axial_length / 2
        w_hi = center + coil.axial_length / 2
        dr = max(coil.inner_radius - body_r, 0.0)
        dz = max(w_lo - z_hi, z_lo - w_hi, 0.0)
        best = min(best, float(np.hypot(dr, dz)))
    return best


def per_coil_volumetric(magnet, pose, stack, currents):
    """Volumetric force decomposed by coil (the field is linear in currents)."""
    out = np.zeros(6)
    for i, current in enumerate(currents):
        if current == 0.0:
            continue
        solo = np.zeros(6)
        solo[i] = current
        out[i] = volumetric_force_z(magnet, pose, stack, solo)
    return out


def sample_clear_pose(rng, stack, magnet, min_clearance=0.030, r_max=0.094):
    """Random magnet pose whose whole body keeps the given winding clearance."""
    while True:
        r = rng.uniform(0.0, r_max)
        z = rng.uniform(stack.z_min - 0.05, stack.z_max + 0.05)
        if magnet_body_clearance(stack, magnet, r, z) >= min_clearance:
            angle = rng.uniform(0.0, 2.0 * np.pi)
            return (r * np.cos(angle), r * np.sin(angle), z)
