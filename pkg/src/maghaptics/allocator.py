"""Real-time current allocation: desired axial force to six duty cycles.

The force law is linear,

    F_z = sum_i g(r, z - center_i) * D_i * I_m

with g the tabulated per-coil force per ampere, D_i the signed PWM duty
and I_m the drive current limit.  The inversion follows the display's
minimum-coil strategy: coils are ranked by axial distance to the magnet,
the closest coil is driven first and saturated before the next one is
recruited, so small forces cost one coil and large forces grow a
saturated prefix of the priority order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coils import CoilStack
from .errors import Infeasible
from .forcemap import ForceMapGrid, interpolate_g

# Coils with less leverage than this are skipped rather than asked for
# absurd currents (the magnet sitting exactly on a coil's midplane zeroes
# that coil's authority).
MIN_AUTHORITY = 1e-6

DEFAULT_TOL = 1e-3


@dataclass(frozen=True)
class AllocationResult:
    duties: np.ndarray          # six signed duty cycles in [-1, 1]
    achieved: float             # forward-model force of the duties, N
    residual: float             # requested minus achieved, N
    coils_used: int             # number of nonzero duties

    def __post_init__(self):
        object.__setattr__(self, "duties", np.asarray(self.duties, dtype=float))


def duty_vector(values) -> np.ndarray:
    """Validate six duty cycles in [-1, 1] and return them as an array."""
    duties = np.asarray(values, dtype=float)
    if duties.shape != (6,):
        raise ValueError("expected exactly six duty cycles")
    if not np.all(np.isfinite(duties)):
        raise ValueError("duties must be finite")
    if np.any(np.abs(duties) > 1.0 + 1e-12):
        raise ValueError("duty cycles must lie in [-1, 1]")
    return duties


def _radius(position) -> float:
    x, y, _ = position
    return float(np.hypot(x, y))


def coil_authorities(position, fmap: ForceMapGrid, stack: CoilStack) -> np.ndarray:
    """Per-coil force per ampere at the magnet position.

    Coils whose axial offset falls outside the tabulated range have
    negligible leverage by construction of the table extent and count as
    zero.  Raises OutOfGrid only when the radial coordinate leaves the
    table, where nothing is known at all.
    """
    r = _radius(position)
    z = position[2]
    g = np.zeros(6)
    for i, center in enumerate(stack.centers_z):
        dz = z - center
        if fmap.z0 <= dz <= fmap.z_max:
            g[i] = interpolate_g(fmap, r, dz)
    return g


def forward_force(duties, position, fmap: ForceMapGrid, stack: CoilStack) -> float:
    """Force predicted by the table for the given duties at the position."""
    duties = duty_vector(duties)
    g = coil_authorities(position, fmap, stack)
    return float(np.dot(g, duties) * stack.coil.max_current)


def capacity(position, fmap: ForceMapGrid, stack: CoilStack) -> tuple[float, float]:
    """Force interval reachable at the position with every coil saturated."""
    g = coil_authorities(position, fmap, stack)
    f_max = float(np.sum(np.abs(g)) * stack.coil.max_current)
    return -f_max, f_max


def allocate(
    f_desired: float,
    position,
    fmap: ForceMapGrid,
    stack: CoilStack,
    tol: float = DEFAULT_TOL,
) -> AllocationResult:
    """Invert the force law with the minimum-coil priority strategy.

    Coils are visited in order of |center_z - z_magnet| (ties broken by
    lower index).  Each visited coil takes current residual/g clamped to
    the drive limit, so every used coil except the last is saturated.

    Raises:
        Infeasible: all six coils saturated with residual above ``tol``;
            the exception carries the saturated best-effort duties.
    """
    i_m = stack.coil.max_current
    g = coil_authorities(position, fmap, stack)
    order = sorted(range(6), key=lambda i: (abs(stack.centers_z[i] - position[2]), i))

    duties = np.zeros(6)
    residual = float(f_desired)
    used = 0
    if abs(residual) > tol:
        for i in order:
            if abs(g[i]) < MIN_AUTHORITY:
                continue
            current = np.clip(residual / g[i], -i_m, i_m)
            duties[i] = current / i_m
            residual -= g[i] * current
            used += 1
            if abs(residual) <= tol:
                break

    achieved = forward_force(duties, position, fmap, stack)
    if abs(residual) > tol:
        raise Infeasible(residual, duties=duties, achieved=achieved)
    return AllocationResult(
        duties=duties, achieved=achieved, residual=residual, coils_used=used
    )
