"""Polar codes with SC, CRC-aided SCL and partitioned SCL decoding."""

__version__ = "0.1.0"

from .channel import ChannelConfig, RngStream, channel_llrs, modulate, transmit
from .codec import combine_partial_sums, encode, f_update, g_update, polar_transform
from .construction import PartitionLayout, PolarCode, construct, partition_layout
from .crc import CrcSpec, FrameLayout, attach_crcs, check_partition, crc_compute, frame_layout, parse_crc
from .decoders import (
    Path,
    PsclConfig,
    PsclDecoder,
    ScDecoder,
    make_decoder,
    metric_update,
    prune,
    pscl_decode,
    sc_decode,
    scl_decode,
)
from .memory import MemoryReport, QuantSpec, mem_pscl, mem_sc, mem_scl, sweep

__all__ = [
    "ChannelConfig", "CrcSpec", "FrameLayout", "MemoryReport", "PartitionLayout", "Path",
    "PolarCode", "PsclConfig", "PsclDecoder", "QuantSpec", "RngStream", "ScDecoder",
    "attach_crcs", "channel_llrs", "check_partition", "combine_partial_sums", "construct",
    "crc_compute", "encode", "f_update", "frame_layout", "g_update", "make_decoder",
    "mem_pscl", "mem_sc", "mem_scl", "metric_update", "modulate", "parse_crc",
    "partition_layout", "polar_transform", "prune", "pscl_decode", "sc_decode", "scl_decode",
    "sweep", "transmit",
]
