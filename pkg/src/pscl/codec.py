"""Polar encoder and the LLR / partial-sum update rules shared by all decoders.

Sign convention: a positive LLR favours bit 0 and ``sgn(0) = +1``, so an
LLR of exactly zero decides bit 0.
"""
from __future__ import annotations

import numpy as np


def as_bits(bits, length: int | None = None) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError("bit vector must be one-dimensional")
    if length is not None and arr.size != length:
        raise ValueError(f"expected {length} bits, got {arr.size}")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bit vector entries must be 0 or 1")
    return arr.astype(np.uint8)


def polar_transform(u) -> np.ndarray:
    """Return ``u G^{(x)n}`` over GF(2) using the butterfly network.

    Works on the last axis, so a batch of frames can be transformed at once.
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    if N & (N - 1):
        raise ValueError(f"length must be a power of two, got {N}")
    lead = x.shape[:-1]
    half = 1
    while half < N:
        view = x.reshape(*lead, N // (2 * half), 2, half)
        view[..., 0, :] ^= view[..., 1, :]
        half *= 2
    return x


def encode(code, u) -> np.ndarray:
    """Encode a length-N input vector whose frozen positions are zero."""
    u = as_bits(u, code.N)
    if np.any(u[code.frozen_mask]):
        raise ValueError("frozen positions of u must be zero")
    return polar_transform(u)


def generator_matrix(n: int) -> np.ndarray:
    """Explicit n-th Kronecker power of [[1, 0], [1, 1]]."""
    G = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    out = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        out = np.kron(out, G)
    return out


def f_update(a, b):
    """Min-sum check-node update: sign product times minimum magnitude."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sign = np.where((a < 0) ^ (b < 0), -1.0, 1.0)
    out = sign * np.minimum(np.abs(a), np.abs(b))
    return out[()] if out.ndim == 0 else out


def g_update(a, b, beta):
    """Variable-node update ``b + (1 - 2 beta) a``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = b + (1.0 - 2.0 * np.asarray(beta, dtype=np.float64)) * a
    return out[()] if out.ndim == 0 else out


def combine_partial_sums(beta_l, beta_r) -> np.ndarray:
    """Parent partial sums ``[beta_l xor beta_r, beta_r]``."""
    beta_l = as_bits(beta_l)
    beta_r = as_bits(beta_r)
    if beta_l.size != beta_r.size:
        raise ValueError("partial-sum halves differ in length")
    return np.concatenate([beta_l ^ beta_r, beta_r])


def hard_decision(llrs) -> np.ndarray:
    return (np.asarray(llrs) < 0).astype(np.uint8)
