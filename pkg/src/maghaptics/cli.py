"""Command-line entry points for the haptic display workbench."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import scans
from .allocator import allocate, capacity
from .coils import CoilStack, stack_field
from .errors import Infeasible, MagHapticsError
from .forcemap import build_map, load_map, save_map
from .magnet import MagnetSpec, max_single_coil_force
from .scene import load_scene
from .simloop import LoopConfig, load_trajectory, run, write_log_csv


def _parse_floats(text: str, n: int, what: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise SystemExit(f"error: {what} needs {n} comma-separated values")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise SystemExit(f"error: {what} must be numeric")


def _default_rig():
    return CoilStack(), MagnetSpec()


def cmd_build_map(args) -> int:
    stack, magnet = _default_rig()
    nr = int(round(0.090 / args.dr)) + 1
    nz = 2 * int(round(0.215 / args.dz)) + 1
    fmap = build_map(
        stack.coil, magnet,
        dr=args.dr, nr=nr, z0=-args.dz * (nz // 2), dz_step=args.dz, nz=nz,
    )
    save_map(fmap, args.out)
    peak = float(np.max(np.abs(fmap.values)))
    print(f"wrote {args.out}: {nr} x {nz} nodes, peak |g| {peak:.6g} N/A")
    return 0


def cmd_field(args) -> int:
    stack, _ = _default_rig()
    currents = _parse_floats(args.currents, 6, "--currents")
    if args.slice:
        if args.out is None:
            raise SystemExit("error: --slice requires --out for the CSV")
        axis = np.arange(-0.105, 0.1051, 0.005)
        z_axis = np.arange(stack.z_min, stack.z_max + 0.0025, 0.005)
        lines = ["u,z,b_u,b_z,b_mag"]
        for u in axis:
            sample = stack_field(stack, currents, abs(u), z_axis, exploratory=True)
            b_u = np.sign(u) * np.asarray(sample.B_r)
            b_z = np.asarray(sample.B_z)
            for zv, bu, bz in zip(z_axis, b_u, b_z):
                lines.append(
                    f"{u:.9g},{zv:.9g},{bu:.9g},{bz:.9g},{np.hypot(bu, bz):.9g}"
                )
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {args.out}: {args.slice} slice, {len(lines) - 1} rows")
        return 0

    point = _parse_floats(args.point, 3, "--point")
    r = float(np.hypot(point[0], point[1]))
    sample = stack_field(stack, currents, r, point[2], exploratory=True)
    print(f"B_r {sample.B_r:.9g} T")
    print(f"B_z {sample.B_z:.9g} T")
    print(f"|B| {sample.magnitude:.9g} T")
    return 0


def cmd_scan_max(args) -> int:
    stack, magnet = _default_rig()
    if args.mode == "single-force":
        force, (r, dz) = max_single_coil_force(magnet, stack.coil, current=args.current)
        print(f"max |F_z| {abs(force):.6g} N (signed {force:+.6g}) "
              f"at r {r:.3f} m, dz {dz:.3f} m from the coil midplane")
        return 0

    if args.currents is None:
        raise SystemExit("error: --currents is required for stack scans")
    currents = _parse_floats(args.currents, 6, "--currents")
    if args.mode == "flux":
        result = scans.flux_scan(stack, currents)
        print(f"max |B| {result.value * 1e3:.4f} mT at r {result.r:.3f} m, z {result.z:.4f} m")
    else:
        result = scans.force_scan(stack, currents, magnet)
        print(f"max |F_z| {abs(result.value):.6g} N (signed {result.value:+.6g}) "
              f"at r {result.r:.3f} m, z {result.z:.4f} m")
    return 0


def cmd_allocate(args) -> int:
    stack, _ = _default_rig()
    fmap = load_map(args.map)
    position = _parse_floats(args.pos, 3, "--pos")
    try:
        result = allocate(args.force, position, fmap, stack, tol=args.tol)
    except Infeasible as exc:
        f_min, f_max = capacity(position, fmap, stack)
        print(
            f"infeasible: residual {exc.residual:+.6g} N, "
            f"capacity [{f_min:.6g}, {f_max:.6g}] N",
            file=sys.stderr,
        )
        return 2
    print(",".join(f"{d:.9g}" for d in result.duties))
    print(
        f"achieved {result.achieved:.9g} N, residual {result.residual:+.3g} N, "
        f"coils used {result.coils_used}",
        file=sys.stderr,
    )
    return 0


def cmd_simulate(args) -> int:
    stack, _ = _default_rig()
    fmap = load_map(args.map)
    scene = load_scene(args.scene)
    trajectory = load_trajectory(args.traj)
    config = LoopConfig(
        force_rate=args.force_rate,
        tracker_rate=args.tracker_rate,
        clamp_to_capacity=not args.no_clamp,
        noise_sigma=args.noise,
        seed=args.seed,
    )
    records = run(scene, trajectory, fmap, stack, config)
    write_log_csv(records, args.out)
    n_contact = sum(1 for r in records if r.in_contact)
    print(f"wrote {args.out}: {len(records)} ticks, {n_contact} in contact")
    return 0


def cmd_serve(args) -> int:
    from .service import HapticService

    stack, _ = _default_rig()
    fmap = load_map(args.map)
    scene = load_scene(args.scene) if args.scene else None
    service = HapticService(
        fmap, stack, scene=scene,
        host=args.host, port=args.port, force_rate=args.force_rate,
    )
    service.start()
    # Flushed eagerly so supervisors watching the pipe learn the bound port.
    print(f"serving on {args.host}:{service.port} (Ctrl-C to stop)", flush=True)
    try:
        service.join()
    except KeyboardInterrupt:
        print("stopping")
        service.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maghaptics",
        description="Simulation workbench for the six-coil magnetic haptic display",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-map", help="tabulate the per-coil force map")
    p.add_argument("--out", required=True)
    p.add_argument("--dr", type=float, default=0.005)
    p.add_argument("--dz", type=float, default=0.005)
    p.set_defaults(func=cmd_build_map)

    p = sub.add_parser("field", help="evaluate the stack field at a point or slice")
    p.add_argument("--currents", required=True, help="six comma-separated amperes")
    p.add_argument("--point", help="x,y,z in metres")
    p.add_argument("--slice", choices=["xz", "yz"], help="write a plane slice CSV")
    p.add_argument("--out", help="CSV path for --slice")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("scan-max", help="survey scans for flux or force extrema")
    p.add_argument("--mode", choices=["flux", "force", "single-force"], required=True)
    p.add_argument("--currents", help="six comma-separated amperes (stack modes)")
    p.add_argument("--current", type=float, default=None,
                   help="drive current for single-force (default: rated max)")
    p.set_defaults(func=cmd_scan_max)

    p = sub.add_parser("allocate", help="invert a desired force into duty cycles")
    p.add_argument("--force", type=float, required=True)
    p.add_argument("--pos", required=True, help="x,y,z in metres")
    p.add_argument("--map", required=True)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("simulate", help="run a batch haptic loop and write the CSV log")
    p.add_argument("--scene", required=True)
    p.add_argument("--traj", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force-rate", type=float, default=1000.0)
    p.add_argument("--tracker-rate", type=float, default=27.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--no-clamp", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="live telemetry/command service for the workbench UI")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--scene", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--force-rate", type=float, default=500.0)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "field" and not args.slice and args.point is None:
        raise SystemExit("error: field needs --point or --slice")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MagHapticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
