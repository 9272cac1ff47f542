"""Serial duty-frame codec for the coil drive electronics.

Frame layout (15 bytes):

    byte 0      sync 0xAA
    byte 1      frame type 0x01 (duty update)
    bytes 2-13  six little-endian signed 16-bit duties, d = round(D * 32767)
    byte 14     checksum: XOR of bytes 1..13

Each duty maps to one H-bridge: PWM channel A carries |D|, channel B is
held at zero, and the pair swaps for negative duties, which is how six
frames fan out to the twelve physical PWM lines.
"""

from __future__ import annotations

import struct

import numpy as np

from .allocator import duty_vector
from .errors import BadChecksum, BadLength, BadSync

FRAME_LENGTH = 15
SYNC = 0xAA
FRAME_TYPE = 0x01
_SCALE = 32767


def encode_frame(duties) -> bytes:
    """Pack six duty cycles into one drive frame."""
    duties = duty_vector(duties)
    quantized = [int(round(d * _SCALE)) for d in duties]
    body = bytes([FRAME_TYPE]) + struct.pack("<6h", *quantized)
    checksum = 0
    for b in body:
        checksum ^= b
    return bytes([SYNC]) + body + bytes([checksum])


def decode_frame(frame: bytes) -> np.ndarray:
    """Unpack a drive frame; verifies length, sync byte, and checksum."""
    if len(frame) != FRAME_LENGTH:
        raise BadLength(f"expected {FRAME_LENGTH} bytes, got {len(frame)}")
    if frame[0] != SYNC:
        raise BadSync(f"bad sync byte 0x{frame[0]:02X}")
    checksum = 0
    for b in frame[1:-1]:
        checksum ^= b
    if checksum != frame[-1]:
        raise BadChecksum("frame checksum mismatch")
    quantized = struct.unpack("<6h", frame[2:14])
    return np.asarray(quantized, dtype=float) / _SCALE
