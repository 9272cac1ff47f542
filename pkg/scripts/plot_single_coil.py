"""Single-coil characterization maps: flux density and magnet force.

Writes out/single_coil_flux.png and out/single_coil_force.png plus the
scan extrema on stdout.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from maghaptics import CoilSpec, MagnetSpec, coil_field, max_single_coil_force
from maghaptics.magnet import single_coil_g

OUT = pathlib.Path(__file__).resolve().parent.parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    coil = CoilSpec()
    magnet = MagnetSpec()

    r = np.arange(0.0, 0.1101, 0.005)
    dz = np.arange(-0.215, 0.2151, 0.005)
    r_grid, dz_grid = np.meshgrid(r, dz, indexing="ij")
    sample = coil_field(coil, coil.max_current, r_grid, dz_grid)

    fig, ax = plt.subplots(figsize=(7, 4))
    mesh = ax.pcolormesh(dz * 1e3, r * 1e3, sample.magnitude * 1e3, cmap="inferno")
    fig.colorbar(mesh, ax=ax, label="|B| (mT)")
    ax.set_xlabel("z from coil midplane (mm)")
    ax.set_ylabel("r (mm)")
    ax.set_title(f"Single coil at {coil.max_current} A")
    fig.tight_layout()
    fig.savefig(OUT / "single_coil_flux.png", dpi=150)

    r_f = np.arange(0.0, 0.0901, 0.005)
    rf_grid, dzf_grid = np.meshgrid(r_f, dz, indexing="ij")
    force = single_coil_g(magnet, coil, rf_grid, dzf_grid, current=coil.max_current)

    fig, ax = plt.subplots(figsize=(7, 4))
    limit = np.abs(force).max()
    mesh = ax.pcolormesh(dz * 1e3, r_f * 1e3, force, cmap="RdBu_r",
                         vmin=-limit, vmax=limit)
    fig.colorbar(mesh, ax=ax, label="F_z (N)")
    ax.set_xlabel("z from coil midplane (mm)")
    ax.set_ylabel("magnet centre r (mm)")
    ax.set_title("Axial force on the fingertip magnet, one coil")
    fig.tight_layout()
    fig.savefig(OUT / "single_coil_force.png", dpi=150)

    peak, (pr, pdz) = max_single_coil_force(magnet, coil)
    print(f"flux peak {sample.magnitude.max() * 1e3:.2f} mT")
    print(f"force peak {peak:+.3f} N at r={pr * 1e3:.0f} mm, dz={pdz * 1e3:.0f} mm")
    print(f"wrote {OUT}/single_coil_flux.png and single_coil_force.png")


if __name__ == "__main__":
    main()
