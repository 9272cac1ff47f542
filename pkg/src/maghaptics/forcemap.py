"""Offline per-coil force tables and their binary file format.

Real-time current allocation needs the force a coil exerts per ampere as
a cheap lookup.  Because all six coils are identical and the problem is
axisymmetric, a single (r, dz) table sampled on a 5 mm grid covers every
coil: coil i's contribution at workspace point (r, z) is the table read
at (r, z - center_i).  Tables are built once with the dipole force model
and then memory-mapped semantics apply: immutable, shared, interpolated
bilinearly.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .coils import CoilSpec
from .errors import FormatError, OutOfGrid
from .magnet import MagnetSpec, single_coil_g

MAGIC = b"FMAP1\n"
VERSION = 1
_HEADER = struct.Struct("<IddIddId")

# Node-snapping tolerance for interpolation queries, as a fraction of one
# cell: queries this close to a node return the stored value exactly.
_NODE_SNAP = 1e-9


@dataclass(eq=False)
class ForceMapGrid:
    """Axial force per ampere of one coil, tabulated on a uniform grid.

    ``values[i, j]`` is the force in N/A on the reference magnet centred
    at radius ``r0 + i*dr`` and axial offset ``z0 + j*dz_step`` from the
    coil midplane, for positive drive current.
    """

    r0: float
    dr: float
    nr: int
    z0: float
    dz_step: float
    nz: int
    values: np.ndarray
    magnet_moment: float

    def __post_init__(self):
        if self.dr <= 0 or self.dz_step <= 0:
            raise ValueError("grid steps must be positive")
        if self.nr < 2 or self.nz < 2:
            raise ValueError("grid needs at least two nodes per axis")
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.nr, self.nz):
            raise ValueError("values shape must be (nr, nz)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("table values must be finite")

    def __eq__(self, other):
        if not isinstance(other, ForceMapGrid):
            return NotImplemented
        return (
            (self.r0, self.dr, self.nr, self.z0, self.dz_step, self.nz,
             self.magnet_moment)
            == (other.r0, other.dr, other.nr, other.z0, other.dz_step, other.nz,
                other.magnet_moment)
            and np.array_equal(self.values, other.values)
        )

    @property
    def r_max(self) -> float:
        return self.r0 + (self.nr - 1) * self.dr

    @property
    def z_max(self) -> float:
        return self.z0 + (self.nz - 1) * self.dz_step

    def contains(self, r, dz) -> bool:
        return bool(
            np.all(np.asarray(r) >= self.r0)
            and np.all(np.asarray(r) <= self.r_max)
            and np.all(np.asarray(dz) >= self.z0)
            and np.all(np.asarray(dz) <= self.z_max)
        )


def build_map(
    stack_coil: CoilSpec,
    magnet: MagnetSpec,
    *,
    r0: float = 0.0,
    dr: float = 0.005,
    nr: int = 19,
    z0: float = -0.215,
    dz_step: float = 0.005,
    nz: int = 87,
) -> ForceMapGrid:
    """Tabulate the dipole-model force per ampere on the default 5 mm grid.

    The default grid spans magnet radii 0..90 mm and axial offsets
    -215..+215 mm, i.e. both half-planes of the single-coil survey, so the
    stored table carries its up/down antisymmetry explicitly.
    """
    r_axis = r0 + dr * np.arange(nr)
    z_axis = z0 + dz_step * np.arange(nz)
    r_grid, z_grid = np.meshgrid(r_axis, z_axis, indexing="ij")
    values = single_coil_g(magnet, stack_coil, r_grid, z_grid)
    return ForceMapGrid(
        r0=r0, dr=dr, nr=nr, z0=z0, dz_step=dz_step, nz=nz,
        values=values, magnet_moment=magnet.moment,
    )


def interpolate_g(fmap: ForceMapGrid, r, dz):
    """Bilinear table read at (r, dz); exact at nodes, continuous between.

    Broadcasts over array queries.

    Raises:
        OutOfGrid: any query point outside the stored domain.
    """
    r = np.asarray(r, dtype=float)
    dz = np.asarray(dz, dtype=float)
    if not fmap.contains(r, dz):
        raise OutOfGrid("query outside the stored force-map domain")

    def _fractional(x, x0, step, n):
        t = (x - x0) / step
        snapped = np.rint(t)
        t = np.where(np.abs(t - snapped) < _NODE_SNAP, snapped, t)
        idx = np.clip(np.floor(t).astype(int), 0, n - 2)
        return idx, t - idx

    i, fr = _fractional(r, fmap.r0, fmap.dr, fmap.nr)
    j, fz = _fractional(dz, fmap.z0, fmap.dz_step, fmap.nz)
    v = fmap.values
    out = (
        v[i, j] * (1.0 - fr) * (1.0 - fz)
        + v[i + 1, j] * fr * (1.0 - fz)
        + v[i, j + 1] * (1.0 - fr) * fz
        + v[i + 1, j + 1] * fr * fz
    )
    return float(out) if out.ndim == 0 else out


def save_map(fmap: ForceMapGrid, path):
    """Write the table in the FMAP1 format (versioned, CRC-checked)."""
    header = _HEADER.pack(
        VERSION, fmap.r0, fmap.dr, fmap.nr, fmap.z0, fmap.dz_step, fmap.nz,
        fmap.magnet_moment,
    )
    payload = np.ascontiguousarray(fmap.values, dtype="<f8").tobytes()
    crc = zlib.crc32(header + payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(payload)
        fh.write(struct.pack("<I", crc))


def load_map(path) -> ForceMapGrid:
    """Read an FMAP1 file back; bit-exact inverse of save_map.

    Raises:
        FormatError: wrong magic, version, truncation, or CRC mismatch.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + _HEADER.size + 4:
        raise FormatError("file too short for an FMAP1 table")
    if blob[: len(MAGIC)] != MAGIC:
        raise FormatError("bad magic: not an FMAP1 file")

    header = blob[len(MAGIC): len(MAGIC) + _HEADER.size]
    version, r0, dr, nr, z0, dz_step, nz, moment = _HEADER.unpack(header)
    if version != VERSION:
        raise FormatError(f"unsupported FMAP version {version}")

    body_end = len(MAGIC) + _HEADER.size + nr * nz * 8
    if len(blob) != body_end + 4:
        raise FormatError("payload length does not match the header grid size")
    payload = blob[len(MAGIC) + _HEADER.size: body_end]
    (stored_crc,) = struct.unpack("<I", blob[body_end:])
    if zlib.crc32(header + payload) & 0xFFFFFFFF != stored_crc:
        raise FormatError("CRC mismatch: file is corrupted")

    values = np.frombuffer(payload, dtype="<f8").reshape(nr, nz).copy()
    try:
        return ForceMapGrid(
            r0=r0, dr=dr, nr=nr, z0=z0, dz_step=dz_step, nz=nz,
            values=values, magnet_moment=moment,
        )
    except ValueError as exc:
        raise FormatError(f"inconsistent table fields: {exc}") from exc
