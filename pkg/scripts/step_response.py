"""Coil-current step response and the achieved-force lag it imposes.

Shows the 0 -> 1.6 A step crossing 95% near 40 ms and a haptic run where
the achieved force trails the commanded force by the same first-order lag.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from maghaptics import (
    CoilDriveState,
    CoilStack,
    LoopConfig,
    MagnetSpec,
    build_map,
    current_dynamics_step,
    run,
)
from maghaptics.scene import SceneObject

OUT = pathlib.Path(__file__).resolve().parent.parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    stack = CoilStack()
    tau = stack.coil.time_constant

    drive = CoilDriveState(np.full(6, 1.6), np.zeros(6), tau)
    dt = 1e-4
    times, actual = [0.0], [0.0]
    while times[-1] < 0.1:
        drive = current_dynamics_step(drive, dt)
        times.append(times[-1] + dt)
        actual.append(drive.actual[0])
    times = np.array(times)
    actual = np.array(actual)
    t95 = times[np.argmax(actual >= 0.95 * 1.6)]

    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(times * 1e3, actual, label="actual current")
    ax.axhline(0.95 * 1.6, color="grey", ls=":", label="95%")
    ax.axvline(t95 * 1e3, color="grey", ls=":")
    ax.set_xlabel("t (ms)")
    ax.set_ylabel("I (A)")
    ax.set_title(f"0 to 1.6 A step, tau = {tau * 1e3:.1f} ms: 95% at {t95 * 1e3:.1f} ms")
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT / "current_step.png", dpi=150)

    fmap = build_map(stack.coil, MagnetSpec())
    scene = [SceneObject(kind="sphere", center=(0.05, 0.0, 0.0575), size=0.1)]
    trajectory = [
        (0.00, (0.05, 0.0, 0.120)),
        (0.05, (0.05, 0.0, 0.120)),
        (0.06, (0.05, 0.0, 0.1025)),
        (0.30, (0.05, 0.0, 0.1025)),
    ]
    records = run(scene, trajectory, fmap, stack, LoopConfig(force_rate=1000.0))
    t = np.array([rec.t for rec in records])
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(t * 1e3, [rec.f_commanded for rec in records], label="commanded")
    ax.plot(t * 1e3, [rec.f_achieved for rec in records], label="achieved")
    ax.set_xlabel("t (ms)")
    ax.set_ylabel("F_z (N)")
    ax.set_title("Contact onset: achieved force trails by the coil lag")
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT / "force_step.png", dpi=150)

    print(f"95% crossing at {t95 * 1e3:.2f} ms")
    print(f"wrote {OUT}/current_step.png and force_step.png")


if __name__ == "__main__":
    main()
