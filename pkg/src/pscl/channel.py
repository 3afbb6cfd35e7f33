"""BPSK over AWGN and per-frame random streams."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .construction import ebn0_to_sigma2


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    rate: float

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate must be in (0, 1], got {self.rate}")

    @property
    def sigma2(self) -> float:
        return ebn0_to_sigma2(self.ebn0_db, self.rate)


@dataclass(frozen=True)
class RngStream:
    """Random stream of one frame: a pure function of (seed, frame)."""

    seed: int
    frame: int

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.frame])


def modulate(x) -> np.ndarray:
    """Map bit 0 to +1 and bit 1 to -1."""
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def transmit(symbols, cfg, rng) -> np.ndarray:
    """Add white Gaussian noise of variance ``cfg.sigma2``.

    ``cfg`` may be a :class:`ChannelConfig` or a plain noise variance;
    ``rng`` an :class:`RngStream` or a numpy ``Generator``.
    """
    sigma2 = cfg.sigma2 if isinstance(cfg, ChannelConfig) else float(cfg)
    if isinstance(rng, RngStream):
        rng = rng.generator()
    symbols = np.asarray(symbols, dtype=np.float64)
    return symbols + math.sqrt(sigma2) * rng.standard_normal(symbols.shape)


def channel_llrs(y, cfg) -> np.ndarray:
    sigma2 = cfg.sigma2 if isinstance(cfg, ChannelConfig) else float(cfg)
    if sigma2 <= 0.0:
        raise ValueError("noise variance must be positive")
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma2
