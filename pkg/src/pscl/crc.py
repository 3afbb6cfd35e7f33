"""CRC computation and the payload/CRC bit layout of a frame.

Each partition carries its own CRC over its own payload bits.  The CRC
occupies the last ``x_p`` non-frozen leaves of the partition (ascending
index order); the remaining non-frozen leaves carry payload.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import crc_register
from .codec import as_bits

# Non-reflected, zero-init defaults; override through the spec string.
DEFAULT_POLYS = {8: 0x07, 16: 0x1021, 32: 0x04C11DB7}


@dataclass(frozen=True)
class CrcSpec:
    """CRC parameters.  ``poly`` excludes the leading x^width term."""

    width: int
    poly: int
    init: int = 0
    xor_out: int = 0
    reflect: bool = False

    def __post_init__(self):
        if not 0 <= self.width <= 63:
            raise ValueError(f"CRC width must be in 0..63, got {self.width}")
        limit = 1 << self.width
        for name in ("poly", "init", "xor_out"):
            value = getattr(self, name)
            if not 0 <= value < max(limit, 1):
                raise ValueError(f"CRC {name} 0x{value:X} does not fit in {self.width} bits")
        if self.width and not self.poly & 1:
            # without the x^0 term a single error in the CRC tail can go unseen
            raise ValueError("CRC polynomial must include the x^0 term")

    @property
    def enabled(self) -> bool:
        return self.width > 0

    def __str__(self):
        text = f"{self.width}:{self.poly:0{max(1, (self.width + 3) // 4)}X}"
        if self.init or self.xor_out or self.reflect:
            text += f":{self.init:X}:{self.xor_out:X}:{int(self.reflect)}"
        return text


NO_CRC = CrcSpec(0, 0)


def default_crc(width: int) -> CrcSpec:
    if width == 0:
        return NO_CRC
    try:
        return CrcSpec(width, DEFAULT_POLYS[width])
    except KeyError:
        raise ValueError(f"no default polynomial for width {width}; give one explicitly") from None


def parse_crc(text: str) -> CrcSpec:
    """Parse ``width:polyhex[:inithex[:xorouthex[:reflect]]]``.

    ``none``, ``0`` and ``0:0`` disable the CRC; a bare width selects the
    default polynomial of that width.
    """
    text = text.strip()
    if text.lower() in ("none", "", "0"):
        return NO_CRC
    parts = text.split(":")
    try:
        width = int(parts[0])
        if len(parts) == 1:
            return default_crc(width)
        if len(parts) > 5:
            raise ValueError
        poly = int(parts[1], 16)
        init = int(parts[2], 16) if len(parts) > 2 else 0
        xor_out = int(parts[3], 16) if len(parts) > 3 else 0
        reflect = bool(int(parts[4])) if len(parts) > 4 else False
    except ValueError:
        raise ValueError(f"malformed CRC spec {text!r}") from None
    if width == 0:
        return NO_CRC
    return CrcSpec(width, poly, init, xor_out, reflect)


def parse_crc_list(text: str, P: int) -> list[CrcSpec]:
    """One spec for every partition, or a comma-separated list of ``P`` specs."""
    items = [parse_crc(t) for t in text.split(",")]
    if len(items) == 1:
        return items * P
    if len(items) != P:
        raise ValueError(f"expected 1 or {P} CRC specs, got {len(items)}")
    return items


def _reflect_bytes(bits: np.ndarray) -> np.ndarray:
    if bits.size % 8:
        raise ValueError("reflected CRCs need a payload length that is a multiple of 8")
    return bits.reshape(-1, 8)[:, ::-1].reshape(-1)


def crc_value(spec: CrcSpec, payload) -> int:
    """CRC register value after shifting in ``payload`` MSB-first."""
    if not spec.enabled:
        raise ValueError("CRC is disabled")
    bits = as_bits(payload)
    if spec.reflect:
        bits = _reflect_bytes(bits)
    reg = int(crc_register(bits, spec.poly, spec.width, spec.init))
    if spec.reflect:
        reg = int(f"{reg:0{spec.width}b}"[::-1], 2)
    return reg ^ spec.xor_out


def crc_compute(spec: CrcSpec, payload) -> np.ndarray:
    """CRC of ``payload`` as ``spec.width`` bits, most significant first."""
    value = crc_value(spec, payload)
    shifts = np.arange(spec.width - 1, -1, -1, dtype=np.uint64)
    return ((np.uint64(value) >> shifts) & np.uint64(1)).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class PartitionFrame:
    start: int
    stop: int
    payload_positions: np.ndarray
    crc_positions: np.ndarray

    @property
    def crc_width(self) -> int:
        return self.crc_positions.size


@dataclass(frozen=True, eq=False)
class FrameLayout:
    """Where payload and CRC bits sit inside the length-N input vector."""

    N: int
    partitions: tuple[PartitionFrame, ...]

    @property
    def payload_length(self) -> int:
        return sum(p.payload_positions.size for p in self.partitions)

    @property
    def payload_positions(self) -> np.ndarray:
        return np.concatenate([p.payload_positions for p in self.partitions])


def frame_layout(code, playout) -> FrameLayout:
    """Combine a code's frozen set with a :class:`PartitionLayout`."""
    info = ~code.frozen_mask
    parts = []
    for p, width in enumerate(playout.crc_widths):
        rng = playout.leaf_range(p)
        idx = rng.start + np.flatnonzero(info[rng.start:rng.stop])
        cut = idx.size - width
        if cut < 0:
            raise ValueError(f"partition {p} has fewer non-frozen leaves than CRC bits")
        parts.append(PartitionFrame(rng.start, rng.stop, idx[:cut], idx[cut:]))
    return FrameLayout(code.N, tuple(parts))


def _check_specs(layout: FrameLayout, specs) -> list[CrcSpec]:
    specs = list(specs)
    if len(specs) != len(layout.partitions):
        raise ValueError(f"expected {len(layout.partitions)} CRC specs, got {len(specs)}")
    out = []
    for p, (part, spec) in enumerate(zip(layout.partitions, specs)):
        if part.crc_width == 0:
            out.append(NO_CRC)
        elif spec.width != part.crc_width:
            raise ValueError(f"partition {p}: layout reserves {part.crc_width} CRC bits, spec has {spec.width}")
        else:
            out.append(spec)
    return out


def attach_crcs(layout: FrameLayout, specs, payload) -> np.ndarray:
    """Build the length-N input vector: payload, per-partition CRCs, frozen zeros."""
    payload = as_bits(payload, layout.payload_length)
    specs = _check_specs(layout, specs)
    u = np.zeros(layout.N, dtype=np.uint8)
    pos = 0
    for part, spec in zip(layout.partitions, specs):
        chunk = payload[pos : pos + part.payload_positions.size]
        pos += chunk.size
        u[part.payload_positions] = chunk
        if spec.enabled:
            u[part.crc_positions] = crc_compute(spec, chunk)
    return u


def extract_payload(layout: FrameLayout, u) -> np.ndarray:
    return np.asarray(u, dtype=np.uint8)[layout.payload_positions]


def check_partition(layout: FrameLayout, spec: CrcSpec, partition_index: int, leaf_decisions) -> bool:
    """True iff the partition's CRC bits match the CRC of its payload bits.

    ``leaf_decisions`` is either the full length-N vector or just the
    partition's own leaves.
    """
    part = layout.partitions[partition_index]
    if part.crc_width == 0 or not spec.enabled:
        return True
    bits = np.asarray(leaf_decisions, dtype=np.uint8)
    offset = 0
    if bits.size == part.stop - part.start and bits.size != layout.N:
        offset = part.start
    elif bits.size != layout.N:
        raise ValueError("leaf decisions do not cover the partition")
    payload = bits[part.payload_positions - offset]
    received = bits[part.crc_positions - offset]
    return bool(np.array_equal(crc_compute(spec, payload), received))
