"""Polar code construction and partition layouts.

Bit-channel reliabilities are estimated for BPSK over AWGN either with
Gaussian-approximation density evolution (default) or with Bhattacharyya
parameters.  Both work in the log domain so that very reliable channels of
long codes do not underflow.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

METHODS = ("ga", "bhattacharyya")


class ConstructionError(ValueError):
    """Invalid code or partition parameters."""


def is_power_of_two(value: int) -> bool:
    return value >= 1 and (value & (value - 1)) == 0


def ebn0_to_sigma2(ebn0_db: float, rate: float) -> float:
    """Noise variance of unit-energy BPSK at the given Eb/N0 and code rate."""
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


@dataclass(frozen=True, eq=False)
class PolarCode:
    """Static description of a polar code P(N, K).

    ``frozen`` holds the sorted frozen indices.  ``reliability_order`` lists
    all bit-channel indices from least to most reliable; it is ``None`` for
    codes loaded from a frozen-set file, where only the frozen set is known.
    """

    N: int
    K: int
    frozen: tuple[int, ...]
    reliability_order: np.ndarray | None = None
    design_snr_db: float = float("nan")
    method: str = "ga"
    frozen_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not is_power_of_two(self.N):
            raise ConstructionError(f"blocklength must be a power of two, got {self.N}")
        if not 0 <= self.K <= self.N:
            raise ConstructionError(f"K={self.K} out of range for N={self.N}")
        frozen = tuple(sorted(int(i) for i in self.frozen))
        if len(set(frozen)) != len(frozen) or len(frozen) != self.N - self.K:
            raise ConstructionError("frozen set must hold N-K distinct indices")
        if frozen and (frozen[0] < 0 or frozen[-1] >= self.N):
            raise ConstructionError("frozen index out of range")
        object.__setattr__(self, "frozen", frozen)
        mask = np.zeros(self.N, dtype=np.bool_)
        mask[list(frozen)] = True
        mask.setflags(write=False)
        object.__setattr__(self, "frozen_mask", mask)
        if self.reliability_order is not None:
            order = np.asarray(self.reliability_order, dtype=np.int64)
            order.setflags(write=False)
            object.__setattr__(self, "reliability_order", order)

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def info_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen_mask)

    def __eq__(self, other):
        if not isinstance(other, PolarCode):
            return NotImplemented
        return (self.N, self.K, self.frozen) == (other.N, other.K, other.frozen)

    def __hash__(self):
        return hash((self.N, self.K, self.frozen))


@dataclass(frozen=True)
class PartitionLayout:
    """Equal, consecutive leaf ranges for partitioned list decoding."""

    P: int
    size: int
    info_counts: tuple[int, ...]
    crc_widths: tuple[int, ...]

    def leaf_range(self, p: int) -> range:
        return range(p * self.size, (p + 1) * self.size)

    @property
    def ranges(self) -> list[range]:
        return [self.leaf_range(p) for p in range(self.P)]

    @property
    def payload_length(self) -> int:
        return sum(self.info_counts) - sum(self.crc_widths)


# Gaussian approximation of the mean-LLR evolution (Chung et al. fit).
_PHI_A, _PHI_B, _PHI_C = -0.4527, 0.86, 0.0218
_PHI_SWITCH = 10.0


def _log_phi(x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x < _PHI_SWITCH:
        return _PHI_A * x**_PHI_B + _PHI_C
    return 0.5 * math.log(math.pi / x) - x / 4.0 + math.log1p(-10.0 / (7.0 * x))


def _log_phi_inv(target: float) -> float:
    # log phi is strictly decreasing on (0, inf)
    if target >= 0.0:
        return 0.0
    hi = max(16.0, -8.0 * target + 16.0)
    return brentq(lambda x: _log_phi(x) - target, 1e-12, hi, xtol=1e-12, rtol=1e-14)


def ga_means(N: int, sigma2: float) -> np.ndarray:
    """Mean LLR of every bit-channel under GA density evolution."""
    n = N.bit_length() - 1
    means = np.array([2.0 / sigma2])
    cache: dict[float, float] = {}
    for _ in range(n):
        nxt = np.empty(2 * means.size)
        for j, m in enumerate(means):
            bad = cache.get(m)
            if bad is None:
                lp = _log_phi(m)
                # 1 - (1 - phi)^2 = phi (2 - phi)
                bad = _log_phi_inv(lp + math.log(2.0 - math.exp(lp)))
                cache[m] = bad
            nxt[2 * j] = bad
            nxt[2 * j + 1] = 2.0 * m
        means = nxt
    return means


def bhattacharyya_log_z(N: int, sigma2: float) -> np.ndarray:
    """Natural log of the Bhattacharyya parameter of every bit-channel."""
    n = N.bit_length() - 1
    log_z = np.array([-1.0 / (2.0 * sigma2)])
    for _ in range(n):
        nxt = np.empty(2 * log_z.size)
        # ln(2z - z^2) = ln z + ln(2 - z)
        nxt[0::2] = log_z + np.log(2.0 - np.exp(log_z))
        nxt[1::2] = 2.0 * log_z
        log_z = nxt
    return log_z


def reliability_order(N: int, design_snr_db: float, rate: float, method: str = "ga") -> np.ndarray:
    """Indices 0..N-1 sorted from least to most reliable; ties by ascending index."""
    sigma2 = ebn0_to_sigma2(design_snr_db, rate)
    if method == "ga":
        score = ga_means(N, sigma2)
    elif method == "bhattacharyya":
        score = -bhattacharyya_log_z(N, sigma2)
    else:
        raise ConstructionError(f"unknown construction method {method!r}")
    return np.argsort(score, kind="stable")


def construct(
    N: int, K: int, design_snr_db: float, method: str = "ga", design_rate: float | None = None
) -> PolarCode:
    """Freeze the N-K least reliable bit-channels at ``design_snr_db`` (Eb/N0).

    Eb/N0 is converted to a noise variance with ``design_rate``, which
    defaults to K/N.  Codes built with the same ``design_rate`` share one
    reliability ordering, so their frozen sets are nested.
    """
    if not isinstance(N, (int, np.integer)) or not is_power_of_two(int(N)):
        raise ConstructionError(f"blocklength must be a power of two, got {N}")
    if not 0 <= K <= N:
        raise ConstructionError(f"K={K} out of range for N={N}")
    N, K = int(N), int(K)
    rate = design_rate if design_rate is not None else (K / N if K else 1.0 / N)
    if not 0.0 < rate <= 1.0:
        raise ConstructionError(f"design rate must be in (0, 1], got {rate}")
    order = reliability_order(N, design_snr_db, rate, method)
    return PolarCode(
        N=N,
        K=K,
        frozen=tuple(int(i) for i in order[: N - K]),
        reliability_order=order,
        design_snr_db=float(design_snr_db),
        method=method,
    )


def partition_layout(code: PolarCode, P: int, crc_widths) -> PartitionLayout:
    """Split the leaves into ``P`` equal consecutive ranges.

    ``crc_widths`` gives one width per partition (a single int is broadcast).
    A partition with no more information bits than its CRC width gets its
    CRC disabled and a warning is issued.
    """
    if not is_power_of_two(P) or P > code.N:
        raise ConstructionError(f"partition count must be a power of two dividing N, got {P}")
    if isinstance(crc_widths, (int, np.integer)):
        crc_widths = [int(crc_widths)] * P
    crc_widths = [int(w) for w in crc_widths]
    if len(crc_widths) != P:
        raise ConstructionError(f"expected {P} CRC widths, got {len(crc_widths)}")
    if any(w < 0 for w in crc_widths):
        raise ConstructionError("CRC widths must be nonnegative")
    size = code.N // P
    info = (~code.frozen_mask).reshape(P, size).sum(axis=1)
    widths = []
    for p, (k_p, w) in enumerate(zip(info, crc_widths)):
        if w and k_p <= w:
            warnings.warn(
                f"partition {p} carries {k_p} information bits, not more than its "
                f"{w}-bit CRC; CRC disabled for this partition",
                stacklevel=2,
            )
            w = 0
        widths.append(w)
    return PartitionLayout(
        P=P, size=size, info_counts=tuple(int(k) for k in info), crc_widths=tuple(widths)
    )


def write_code(code: PolarCode, path) -> None:
    """Write ``N K design_snr_db`` and the sorted frozen indices."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{code.N} {code.K} {code.design_snr_db!r}\n")
        fh.write(" ".join(str(i) for i in code.frozen) + "\n")


def read_code(path) -> PolarCode:
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ConstructionError(f"{path}: empty code file")
    try:
        head = lines[0].split()
        N, K, snr = int(head[0]), int(head[1]), float(head[2])
        frozen = [int(tok) for tok in lines[1].split()] if len(lines) > 1 else []
    except (IndexError, ValueError) as exc:
        raise ConstructionError(f"{path}: malformed code file") from exc
    return PolarCode(N=N, K=K, frozen=tuple(frozen), design_snr_db=snr, method="file")
