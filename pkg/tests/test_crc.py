import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pscl.construction import construct, partition_layout
from pscl.crc import (
    NO_CRC,
    CrcSpec,
    attach_crcs,
    check_partition,
    crc_compute,
    crc_value,
    default_crc,
    extract_payload,
    frame_layout,
    parse_crc,
    parse_crc_list,
)

from oracles import crc_long_division

CHECK = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
# oracle: crc_long_division(CHECK, 0x07, 8) == 0xF4, the catalogued CRC-8 check value
CRC8_CHECK = 0xF4


def test_crc8_check_value_from_oracle():
    assert crc_long_division(CHECK, 0x07, 8) == CRC8_CHECK


def test_crc8_check_value():
    assert crc_value(CrcSpec(8, 0x07), CHECK) == CRC8_CHECK
    assert np.array_equal(crc_compute(CrcSpec(8, 0x07), CHECK), [1, 1, 1, 1, 0, 1, 0, 0])


def test_reflected_crc32_check_value():
    # CRC-32/ISO-HDLC: refin/refout, init and xorout all ones
    spec = CrcSpec(32, 0x04C11DB7, init=0xFFFFFFFF, xor_out=0xFFFFFFFF, reflect=True)
    assert crc_value(spec, CHECK) == 0xCBF43926


def test_zero_payload_zero_crc():
    assert not crc_compute(default_crc(32), np.zeros(100)).any()


specs = st.sampled_from([default_crc(8), default_crc(16), default_crc(32), CrcSpec(5, 0x05, init=0x1F)])
payloads = arrays(np.uint8, st.integers(1, 300), elements=st.integers(0, 1))


@settings(max_examples=80)
@given(spec=specs, payload=payloads)
def test_matches_long_division(spec, payload):
    assert crc_value(spec, payload) == crc_long_division(payload, spec.poly, spec.width, spec.init)


@settings(max_examples=80)
@given(spec=specs, payload=payloads, data=st.data())
def test_single_bit_flip_changes_crc(spec, payload, data):
    i = data.draw(st.integers(0, payload.size - 1))
    flipped = payload.copy()
    flipped[i] ^= 1
    assert crc_value(spec, flipped) != crc_value(spec, payload)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("8:07", CrcSpec(8, 0x07)),
        ("32:04C11DB7", CrcSpec(32, 0x04C11DB7)),
        ("16:1021:FFFF", CrcSpec(16, 0x1021, init=0xFFFF)),
        ("0:0", NO_CRC),
        ("none", NO_CRC),
        ("16", CrcSpec(16, 0x1021)),
    ],
)
def test_parse(text, expected):
    assert parse_crc(text) == expected


def test_spec_string_round_trip():
    for spec in (default_crc(8), CrcSpec(16, 0x1021, init=0xFFFF), CrcSpec(32, 0x04C11DB7, 1, 2, True)):
        assert parse_crc(str(spec)) == spec


@pytest.mark.parametrize("text", ["8:zz", "8:1FF", "x", "8:06", "1:2:3:4:5:6"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_crc(text)


def test_parse_list():
    assert parse_crc_list("8:07", 4) == [CrcSpec(8, 7)] * 4
    assert parse_crc_list("8:07,16:1021", 2) == [CrcSpec(8, 7), CrcSpec(16, 0x1021)]
    with pytest.raises(ValueError):
        parse_crc_list("8:07,8:07", 4)


@pytest.fixture(scope="module")
def p2048():
    return construct(2048, 1024, 2.0)


def _layout(code, P, width):
    return frame_layout(code, partition_layout(code, P, width))


@pytest.mark.parametrize("P, width", [(1, 32), (2, 16), (4, 8)])
def test_rate_conservation(p2048, P, width):
    layout = _layout(p2048, P, width)
    assert layout.payload_length == 992
    assert sum(p.crc_width for p in layout.partitions) == 32


def test_crc_sits_on_last_info_leaves(p2048):
    layout = _layout(p2048, 2, 16)
    for part in layout.partitions:
        info = np.flatnonzero(~p2048.frozen_mask[part.start : part.stop]) + part.start
        assert np.array_equal(part.crc_positions, info[-16:])
        assert np.array_equal(part.payload_positions, info[:-16])


def test_single_partition_frame(p2048):
    layout = _layout(p2048, 1, 32)
    rng = np.random.default_rng(1)
    payload = rng.integers(0, 2, 992, dtype=np.uint8)
    u = attach_crcs(layout, [default_crc(32)], payload)
    assert not u[p2048.frozen_mask].any()
    assert np.array_equal(extract_payload(layout, u), payload)
    assert np.array_equal(u[layout.partitions[0].crc_positions], crc_compute(default_crc(32), payload))


def test_zero_payload_gives_zero_frame(p2048):
    layout = _layout(p2048, 4, 8)
    assert not attach_crcs(layout, [default_crc(8)] * 4, np.zeros(992)).any()


def test_attach_rejects_wrong_payload_length(p2048):
    with pytest.raises(ValueError):
        attach_crcs(_layout(p2048, 2, 16), [default_crc(16)] * 2, np.zeros(991))


@pytest.mark.filterwarnings("ignore:partition .* CRC disabled")
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), logp=st.integers(0, 3), data=st.data())
def test_round_trip_and_single_error_detection(seed, logp, data):
    code = construct(256, 128, 2.0)
    P = 1 << logp
    width = {1: 32, 2: 16, 4: 8, 8: 8}[P]
    layout = _layout(code, P, width)
    spec = [default_crc(w) if w else NO_CRC for w in (p.crc_width for p in layout.partitions)]
    payload = np.random.default_rng(seed).integers(0, 2, layout.payload_length, dtype=np.uint8)
    u = attach_crcs(layout, spec, payload)
    for p in range(P):
        assert check_partition(layout, spec[p], p, u)
    p = data.draw(st.integers(0, P - 1))
    part = layout.partitions[p]
    if part.crc_width:
        covered = np.concatenate([part.payload_positions, part.crc_positions])
        i = data.draw(st.sampled_from(covered.tolist()))
        bad = u.copy()
        bad[i] ^= 1
        assert not check_partition(layout, spec[p], p, bad)
        # partition-local slice works the same way
        assert not check_partition(layout, spec[p], p, bad[part.start : part.stop])


def test_disabled_partition_always_passes():
    code = construct(64, 16, 2.0)
    with pytest.warns(UserWarning):
        layout = _layout(code, 2, 8)
    assert layout.partitions[0].crc_width == 0
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert check_partition(layout, NO_CRC, 0, rng.integers(0, 2, 64))
