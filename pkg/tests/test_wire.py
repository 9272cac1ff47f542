"""Bit-exact serial duty-frame codec."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

import maghaptics as mh
from maghaptics.wire import FRAME_LENGTH, FRAME_TYPE, SYNC


def test_zero_duties_frame_layout():
    frame = mh.encode_frame(np.zeros(6))
    assert len(frame) == FRAME_LENGTH
    assert frame[0] == SYNC == 0xAA
    assert frame[1] == FRAME_TYPE == 0x01
    assert frame[2:14] == bytes(12)
    assert frame[14] == 0x01  # checksum covers the type byte


def test_full_scale_duty_encoding():
    frame = mh.encode_frame([1.0, 0, 0, 0, 0, 0])
    assert frame[2] == 0xFF and frame[3] == 0x7F  # 32767 little-endian
    frame = mh.encode_frame([-1.0, 0, 0, 0, 0, 0])
    assert frame[2] == 0x01 and frame[3] == 0x80  # -32767 little-endian


def test_loopback_identity_quantized():
    rng = np.random.default_rng(19)
    for _ in range(1000):
        duties = rng.uniform(-1.0, 1.0, 6)
        recovered = mh.decode_frame(mh.encode_frame(duties))
        assert np.max(np.abs(recovered - duties)) <= 1.0 / 32767 + 1e-12


@given(st.lists(st.floats(-1.0, 1.0), min_size=6, max_size=6))
def test_loopback_property(duties):
    recovered = mh.decode_frame(mh.encode_frame(duties))
    assert np.max(np.abs(recovered - np.asarray(duties))) <= 1.0 / 32767 + 1e-12


def test_decode_rejects_bad_length():
    with pytest.raises(mh.BadLength):
        mh.decode_frame(b"\xaa\x01")
    with pytest.raises(mh.BadLength):
        mh.decode_frame(mh.encode_frame(np.zeros(6)) + b"\x00")


def test_decode_rejects_bad_sync():
    frame = bytearray(mh.encode_frame(np.zeros(6)))
    frame[0] = 0xAB
    with pytest.raises(mh.BadSync):
        mh.decode_frame(bytes(frame))


def test_decode_rejects_corrupted_payload():
    frame = bytearray(mh.encode_frame([0.5, -0.25, 0.1, 0, 0.9, -1.0]))
    for i in range(1, 14):
        corrupt = bytearray(frame)
        corrupt[i] ^= 0x10
        with pytest.raises(mh.BadChecksum):
            mh.decode_frame(bytes(corrupt))
    corrupt = bytearray(frame)
    corrupt[14] ^= 0x01
    with pytest.raises(mh.BadChecksum):
        mh.decode_frame(bytes(corrupt))


def test_encode_rejects_out_of_range():
    with pytest.raises(ValueError):
        mh.encode_frame([1.5, 0, 0, 0, 0, 0])
