"""Closed haptic-rendering loop with deterministic fixed-timestep execution.

One tick of the loop (at the force update rate, typically 500 or 1000 Hz):
hold the latest tracker sample, evaluate contact against the scene, clamp
the desired force to what the coils can deliver, allocate duty cycles,
advance the first-order coil-current lag, and log the achieved force that
the lagged currents actually produce.  Tracker samples arrive at their own
much lower rate and are bridged by zero-order hold.

Everything is pure computation on immutable inputs plus one explicit
drive-state variable, so a run is bit-reproducible from its seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .allocator import allocate, capacity, forward_force
from .coils import CoilStack
from .errors import EmptyTrajectory, Infeasible, OutOfGrid
from .forcemap import ForceMapGrid
from .scene import contact_force

CSV_HEADER = (
    "t,x,y,z,f_desired,f_commanded,f_achieved,"
    "d1,d2,d3,d4,d5,d6,i1,i2,i3,i4,i5,i6,contact,infeasible"
)


@dataclass(frozen=True)
class FingerState:
    position: tuple[float, float, float]
    timestamp: float


@dataclass(frozen=True)
class CoilDriveState:
    """Commanded versus actual coil currents with the drive lag constant."""

    commanded: np.ndarray
    actual: np.ndarray
    time_constant: float

    @classmethod
    def at_rest(cls, time_constant: float) -> "CoilDriveState":
        return cls(np.zeros(6), np.zeros(6), time_constant)


@dataclass(frozen=True)
class LoopRecord:
    t: float
    finger: tuple[float, float, float]
    f_desired: float
    f_commanded: float
    f_achieved: float
    duties: np.ndarray
    currents_actual: np.ndarray
    in_contact: bool
    infeasible: bool


@dataclass(frozen=True)
class LoopConfig:
    force_rate: float = 1000.0
    tracker_rate: float = 27.0
    clamp_to_capacity: bool = True
    noise_sigma: float = 0.0
    seed: int = 0
    time_constant: float | None = None   # None: use the coil's own constant
    allocate_tol: float = 1e-3


def interpolate_trajectory(keyframes, t: float) -> tuple[float, float, float]:
    """Piecewise-linear position at time t; clamped to the end keyframes."""
    if not keyframes:
        raise EmptyTrajectory("trajectory has no keyframes")
    times = [k[0] for k in keyframes]
    if t <= times[0]:
        return tuple(keyframes[0][1])
    if t >= times[-1]:
        return tuple(keyframes[-1][1])
    j = int(np.searchsorted(times, t, side="right"))
    t0, p0 = keyframes[j - 1]
    t1, p1 = keyframes[j]
    w = (t - t0) / (t1 - t0)
    return tuple((1.0 - w) * np.asarray(p0, float) + w * np.asarray(p1, float))


def tracker_playback(
    keyframes,
    rate: float = 27.0,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> list[FingerState]:
    """Finger positions as the tracking camera would report them.

    Samples the piecewise-linear trajectory at ``rate`` from t = 0 through
    the last keyframe, optionally adding isotropic Gaussian position noise
    (deterministic for a given seed).
    """
    if not keyframes:
        raise EmptyTrajectory("trajectory has no keyframes")
    if sorted(k[0] for k in keyframes) != [k[0] for k in keyframes]:
        raise ValueError("keyframes must be time-sorted")
    duration = keyframes[-1][0]
    n = int(math.floor(duration * rate)) + 1
    rng = np.random.default_rng(seed)
    samples = []
    for j in range(n):
        t = j / rate
        p = np.asarray(interpolate_trajectory(keyframes, t), dtype=float)
        if noise_sigma > 0.0:
            p = p + rng.normal(0.0, noise_sigma, size=3)
        samples.append(FingerState(tuple(p), t))
    return samples


def current_dynamics_step(state: CoilDriveState, dt: float) -> CoilDriveState:
    """Advance the actual currents by dt under the first-order lag.

    Exact discretization of dI/dt = (I_cmd - I) / tau, so it is stable and
    correct for any step size.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    alpha = 1.0 - math.exp(-dt / state.time_constant)
    actual = state.actual + (state.commanded - state.actual) * alpha
    return CoilDriveState(state.commanded, actual, state.time_constant)


class ForcePipeline:
    """One haptic tick: contact -> clamp -> allocate -> lag -> achieved.

    Shared by the batch runner and the live service so both behave
    identically.  Holds the only mutable piece, the coil drive state.
    """

    def __init__(self, scene, fmap: ForceMapGrid, stack: CoilStack,
                 *, clamp_to_capacity: bool = True, tol: float = 1e-3,
                 time_constant: float | None = None):
        self.scene = list(scene)
        self.fmap = fmap
        self.stack = stack
        self.clamp_to_capacity = clamp_to_capacity
        self.tol = tol
        tau = time_constant if time_constant is not None else stack.coil.time_constant
        self.drive = CoilDriveState.at_rest(tau)

    def set_time_constant(self, tau: float):
        if tau <= 0:
            raise ValueError("time constant must be positive")
        self.drive = CoilDriveState(self.drive.commanded, self.drive.actual, tau)

    def tick(self, t: float, position, dt: float) -> LoopRecord:
        contact = contact_force(self.scene, position)
        f_desired = contact.f_desired_z
        i_m = self.stack.coil.max_current

        infeasible = False
        duties = np.zeros(6)
        f_commanded = 0.0
        try:
            f_commanded = f_desired
            if self.clamp_to_capacity:
                f_min, f_max = capacity(position, self.fmap, self.stack)
                clamped = min(max(f_desired, f_min), f_max)
                if clamped != f_desired:
                    infeasible = True
                f_commanded = clamped
            try:
                duties = allocate(
                    f_commanded, position, self.fmap, self.stack, tol=self.tol
                ).duties
            except Infeasible as exc:
                infeasible = True
                duties = exc.duties
        except OutOfGrid:
            # Radially outside the mapped region: no authority, no drive.
            infeasible = f_desired != 0.0
            f_commanded = 0.0
            duties = np.zeros(6)

        self.drive = CoilDriveState(duties * i_m, self.drive.actual, self.drive.time_constant)
        self.drive = current_dynamics_step(self.drive, dt)
        try:
            f_achieved = forward_force(
                self.drive.actual / i_m, position, self.fmap, self.stack
            )
        except OutOfGrid:
            f_achieved = 0.0

        return LoopRecord(
            t=t,
            finger=tuple(float(c) for c in position),
            f_desired=f_desired,
            f_commanded=f_commanded,
            f_achieved=f_achieved,
            duties=duties,
            currents_actual=self.drive.actual.copy(),
            in_contact=contact.in_contact,
            infeasible=infeasible,
        )


def run(
    scene,
    trajectory,
    fmap: ForceMapGrid,
    stack: CoilStack,
    config: LoopConfig = LoopConfig(),
) -> list[LoopRecord]:
    """Batch haptic run over a keyframe trajectory; one record per tick.

    The tick count is duration * force_rate with the duration taken from
    the last keyframe.  Errors from the scene or allocator surface as the
    per-record ``infeasible`` flag rather than aborting the run.
    """
    if config.force_rate <= 0 or config.tracker_rate <= 0:
        raise ValueError("rates must be positive")
    if config.force_rate < config.tracker_rate:
        raise ValueError("force rate must be at least the tracker rate")

    samples = tracker_playback(
        trajectory,
        rate=config.tracker_rate,
        noise_sigma=config.noise_sigma,
        seed=config.seed,
    )
    pipeline = ForcePipeline(
        scene, fmap, stack,
        clamp_to_capacity=config.clamp_to_capacity,
        tol=config.allocate_tol,
        time_constant=config.time_constant,
    )

    duration = trajectory[-1][0]
    n_ticks = int(round(duration * config.force_rate))
    dt = 1.0 / config.force_rate
    records = []
    cursor = 0
    position = samples[0].position
    for k in range(n_ticks):
        t = k * dt
        while cursor + 1 < len(samples) and samples[cursor + 1].timestamp <= t:
            cursor += 1
        position = samples[cursor].position
        records.append(pipeline.tick(t, position, dt))
    return records


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def records_to_csv(records) -> str:
    """Render records as the canonical CSV log (9 significant digits)."""
    lines = [CSV_HEADER]
    for rec in records:
        cells = [
            _fmt(rec.t),
            *(_fmt(c) for c in rec.finger),
            _fmt(rec.f_desired),
            _fmt(rec.f_commanded),
            _fmt(rec.f_achieved),
            *(_fmt(d) for d in rec.duties),
            *(_fmt(i) for i in rec.currents_actual),
            "1" if rec.in_contact else "0",
            "1" if rec.infeasible else "0",
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_log_csv(records, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(records_to_csv(records))


def load_trajectory(path) -> list[tuple[float, tuple[float, float, float]]]:
    """Read a keyframe trajectory: a JSON list of {"t": s, "p": [x, y, z]}."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not data:
        raise EmptyTrajectory("trajectory file holds no keyframes")
    keyframes = [(float(k["t"]), tuple(float(c) for c in k["p"])) for k in data]
    if sorted(t for t, _ in keyframes) != [t for t, _ in keyframes]:
        raise ValueError("trajectory keyframes must be time-sorted")
    return keyframes
