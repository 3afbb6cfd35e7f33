"""SC, CRC-aided SCL and partitioned SCL decoding.

All three decoders walk the same decoder tree.  Partitioned decoding runs
plain SC on the part of the tree above the partition roots and list
decoding inside each partition; a single CRC-selected survivor per
partition feeds its partial sums back to the upper tree.  Path metrics
restart from zero in every partition.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import sc_kernel, scl_kernel
from .codec import f_update, g_update, polar_transform
from .construction import is_power_of_two, partition_layout
from .crc import NO_CRC, CrcSpec, FrameLayout, check_partition, frame_layout


def _as_llrs(llrs, N: int) -> np.ndarray:
    arr = np.ascontiguousarray(llrs, dtype=np.float64)
    if arr.shape != (N,):
        raise ValueError(f"expected {N} LLRs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("LLRs must be finite")
    return arr


def metric_update(pm: float, alpha: float, u_hat: int) -> float:
    """Path metric after deciding ``u_hat`` on a leaf with LLR ``alpha``."""
    likely = 0 if alpha >= 0 else 1
    return pm if u_hat == likely else pm + abs(alpha)


@dataclass
class Path:
    """One list-decoding hypothesis.

    ``parent`` is the index of the path this one forked from and ``bits``
    the leaf decisions so far; ``partial_sums`` is free-form decoder state.
    """

    index: int
    metric: float
    bits: tuple[int, ...] = ()
    parent: int = 0
    partial_sums: object = field(default=None, repr=False)

    @property
    def last_bit(self) -> int:
        return self.bits[-1] if self.bits else 0


def prune(paths, L: int) -> list[Path]:
    """Keep the ``L`` smallest-metric paths.

    Ties go to the smaller parent index, then to the path that decided 0.
    Survivors are re-indexed 0..L-1 in that order.
    """
    if L < 1:
        raise ValueError("list size must be at least 1")
    ranked = sorted(paths, key=lambda p: (p.metric, p.parent, p.last_bit))[:L]
    for i, p in enumerate(ranked):
        p.index = i
    return ranked


@dataclass(frozen=True)
class PsclConfig:
    P: int = 1
    L: int = 1
    crcs: tuple[CrcSpec, ...] | None = None

    def __post_init__(self):
        if not is_power_of_two(self.P):
            raise ValueError(f"partition count must be a power of two, got {self.P}")
        if self.L < 1:
            raise ValueError("list size must be at least 1")
        if self.crcs is not None:
            object.__setattr__(self, "crcs", tuple(self.crcs))
            if len(self.crcs) != self.P:
                raise ValueError(f"expected {self.P} CRC specs, got {len(self.crcs)}")


class ScDecoder:
    """Successive-cancellation decoder bound to one code."""

    def __init__(self, code):
        self.code = code
        self._frozen = np.ascontiguousarray(code.frozen_mask)
        self._u = np.empty(code.N, dtype=np.uint8)

    def decode(self, llrs) -> np.ndarray:
        sc_kernel(_as_llrs(llrs, self.code.N), self._frozen, self._u)
        return self._u.copy()


class _UpperTree:
    """SC walk over the tree above the partition roots.

    Leaves of this walk are partition roots of ``size`` LLRs.  Level ``s``
    holds node vectors of ``2**s`` values, as in the full decoder tree.
    """

    def __init__(self, N: int, size: int):
        self.n = N.bit_length() - 1
        self.m = size.bit_length() - 1
        self.alpha: dict[int, np.ndarray] = {}
        self.beta_left: dict[int, np.ndarray] = {}
        self.root_beta = None

    def reset(self, channel_llrs: np.ndarray) -> None:
        self.alpha = {self.n: channel_llrs}
        self.beta_left = {}
        self.root_beta = None

    def root_llrs(self, p: int) -> np.ndarray:
        if self.n == self.m:
            return self.alpha[self.n]
        if p == 0:
            top = self.n
        else:
            top = (p & -p).bit_length() + self.m
            parent = self.alpha[top]
            h = parent.size // 2
            self.alpha[top - 1] = g_update(parent[:h], parent[h:], self.beta_left[top - 1])
            top -= 1
        for s in range(top, self.m, -1):
            node = self.alpha[s]
            h = node.size // 2
            self.alpha[s - 1] = f_update(node[:h], node[h:])
        return self.alpha[self.m]

    def push(self, p: int, beta: np.ndarray) -> None:
        """Fold the partial sums of partition ``p`` into the upper tree."""
        s = self.m
        while s < self.n:
            if (p >> (s - self.m)) & 1 == 0:
                self.beta_left[s] = beta
                return
            beta = np.concatenate([self.beta_left.pop(s) ^ beta, beta])
            s += 1
        self.root_beta = beta


class PsclDecoder:
    """Partitioned CRC-aided list decoder; ``P = 1`` is conventional SCL.

    The instance owns scratch buffers and is not thread-safe.
    """

    def __init__(self, code, list_size: int, partitions: int = 1, crcs=None):
        if list_size < 1:
            raise ValueError("list size must be at least 1")
        if not is_power_of_two(partitions) or partitions > code.N:
            raise ValueError(f"partition count must be a power of two dividing N, got {partitions}")
        self.code = code
        self.L = int(list_size)
        self.P = int(partitions)
        if crcs is None:
            crcs = [NO_CRC] * self.P
        crcs = list(crcs)
        if len(crcs) == 1 and self.P > 1:
            crcs = crcs * self.P
        self.playout = partition_layout(code, self.P, [c.width for c in crcs])
        self.layout: FrameLayout = frame_layout(code, self.playout)
        self.crcs = [c if w else NO_CRC for c, w in zip(crcs, self.playout.crc_widths)]
        self.size = self.playout.size
        self._frozen = [
            np.ascontiguousarray(code.frozen_mask[r.start : r.stop]) for r in self.playout.ranges
        ]
        self._bits = np.empty((self.L, self.size), dtype=np.uint8)
        self._metrics = np.empty(self.L)
        self._tree = _UpperTree(code.N, self.size)
        self.crc_passed = [True] * self.P
        self.root_partial_sums = None

    def _select(self, p: int, n_live: int) -> np.ndarray:
        spec = self.crcs[p]
        if spec.enabled:
            for j in range(n_live):
                if check_partition(self.layout, spec, p, self._bits[j]):
                    self.crc_passed[p] = True
                    return self._bits[j].copy()
            self.crc_passed[p] = False
        else:
            self.crc_passed[p] = True
        return self._bits[0].copy()

    def decode_partition(self, p: int, root_llrs: np.ndarray):
        """List-decode one partition; returns all survivors and their metrics."""
        n_live = scl_kernel(
            np.ascontiguousarray(root_llrs, dtype=np.float64),
            self._frozen[p],
            self.L,
            self._bits,
            self._metrics,
        )
        return self._bits[:n_live].copy(), self._metrics[:n_live].copy()

    def decode(self, llrs) -> np.ndarray:
        llrs = _as_llrs(llrs, self.code.N)
        tree = self._tree
        tree.reset(llrs)
        out = np.empty(self.code.N, dtype=np.uint8)
        for p in range(self.P):
            root = np.ascontiguousarray(tree.root_llrs(p), dtype=np.float64)
            n_live = scl_kernel(root, self._frozen[p], self.L, self._bits, self._metrics)
            chosen = self._select(p, n_live)
            out[p * self.size : (p + 1) * self.size] = chosen
            tree.push(p, polar_transform(chosen))
        self.root_partial_sums = tree.root_beta
        return out


def sc_decode(code, channel_llrs) -> np.ndarray:
    """Leaf decisions of successive-cancellation decoding."""
    return ScDecoder(code).decode(channel_llrs)


def scl_decode(code, channel_llrs, L: int, crc: CrcSpec | None = None) -> np.ndarray:
    """CRC-aided list decoding; without a CRC the best-metric path wins."""
    return PsclDecoder(code, L, 1, [crc or NO_CRC]).decode(channel_llrs)


def pscl_decode(code, channel_llrs, cfg: PsclConfig) -> np.ndarray:
    """Partitioned list decoding with one CRC-selected survivor per partition."""
    return PsclDecoder(code, cfg.L, cfg.P, cfg.crcs).decode(channel_llrs)


def make_decoder(code, algorithm: str, list_size: int = 1, partitions: int = 1, crcs=None):
    """Decoder instance for ``sc``, ``scl`` or ``pscl``."""
    algorithm = algorithm.lower()
    if algorithm == "sc":
        return ScDecoder(code)
    if algorithm == "scl":
        if partitions != 1:
            raise ValueError("scl decodes a single partition; use pscl")
        return PsclDecoder(code, list_size, 1, crcs)
    if algorithm == "pscl":
        return PsclDecoder(code, list_size, partitions, crcs)
    raise ValueError(f"unknown algorithm {algorithm!r}")
