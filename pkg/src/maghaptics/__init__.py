"""Simulation workbench for a contactless 1D magnetic haptic display.

Six cascaded hollow disk electromagnets exert a controllable axial force
on a fingertip-worn permanent magnet.  This package models the stack's
magnetostatics, tabulates the per-coil force maps that make the force law
invertible in real time, allocates drive duty cycles with the
minimum-coil priority strategy, and closes the haptic loop against
virtual objects, batch or live.
"""

from .allocator import AllocationResult, allocate, capacity, duty_vector, forward_force
from .coils import (
    CoilSpec,
    CoilStack,
    FieldSample,
    coil_field,
    coil_field_on_axis,
    current_vector,
    field_gradient_z,
    loop_field,
    stack_field,
)
from .errors import (
    BadChecksum,
    BadLength,
    BadSync,
    EmptyTrajectory,
    FormatError,
    Infeasible,
    InsideWinding,
    MagHapticsError,
    OutOfGrid,
    OutOfWorkspace,
    SingularPoint,
)
from .forcemap import ForceMapGrid, build_map, interpolate_g, load_map, save_map
from .magnet import (
    MagnetPose,
    MagnetSpec,
    dipole_force_z,
    max_single_coil_force,
    single_coil_g,
    volumetric_force_z,
)
from .scene import ContactState, SceneObject, contact_force, sdf, texture_height
from .simloop import (
    CoilDriveState,
    FingerState,
    LoopConfig,
    LoopRecord,
    current_dynamics_step,
    run,
    tracker_playback,
)
from .wire import decode_frame, encode_frame

__version__ = "0.1.0"
