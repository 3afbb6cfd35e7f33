"""Storage requirements of SC, SCL and partitioned SCL decoders, in bits.

Counts are exact rationals.  The partitioned-decoder formula shrinks the
partition by a factor of two per extra partition count, so for
``P > log2(N) + 1`` it yields fractional bit counts; those are kept exact
rather than rounded.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .construction import is_power_of_two


@dataclass(frozen=True)
class QuantSpec:
    q_alpha: int = 6
    q_pm: int = 8

    def __post_init__(self):
        if self.q_alpha < 1 or self.q_pm < 1:
            raise ValueError("quantization widths must be at least 1 bit")


@dataclass(frozen=True)
class MemoryReport:
    algorithm: str
    alpha_bits: Fraction
    pm_bits: Fraction
    beta_bits: Fraction
    N: int
    L: int = 1
    P: int = 1

    @property
    def total_bits(self) -> Fraction:
        return self.alpha_bits + self.pm_bits + self.beta_bits


def _check_n(N: int) -> None:
    if not is_power_of_two(N) or N < 2:
        raise ValueError(f"N must be a power of two >= 2, got {N}")


def mem_sc(N: int, q: QuantSpec = QuantSpec()) -> MemoryReport:
    _check_n(N)
    return MemoryReport(
        "SC",
        alpha_bits=Fraction((2 * N - 1) * q.q_alpha),
        pm_bits=Fraction(0),
        beta_bits=Fraction(N - 1),
        N=N,
    )


def mem_scl(N: int, L: int, q: QuantSpec = QuantSpec()) -> MemoryReport:
    _check_n(N)
    if L < 1:
        raise ValueError("list size must be at least 1")
    return MemoryReport(
        f"SCL({L})",
        alpha_bits=Fraction((N + (N - 1) * L) * q.q_alpha),
        pm_bits=Fraction(L * q.q_pm),
        beta_bits=Fraction((2 * N - 1) * L),
        N=N,
        L=L,
    )


def mem_pscl(N: int, P: int, L: int, q: QuantSpec = QuantSpec()) -> MemoryReport:
    _check_n(N)
    if L < 1:
        raise ValueError("list size must be at least 1")
    if not is_power_of_two(P) or P > N:
        raise ValueError(f"P must be a power of two not exceeding N, got {P}")
    N_ = Fraction(N)
    # upper-tree LLR levels plus L copies of one partition
    alpha = sum((N_ / 2**k for k in range(P)), Fraction(0)) + (N_ / 2 ** (P - 1) - 1) * L
    # empty sum for P <= 2; at P = 1 the last term is (2N - 1) L
    beta = sum((N_ / 2**k for k in range(1, P - 1)), Fraction(0)) + (N_ * Fraction(2) ** (2 - P) - 1) * L
    return MemoryReport(
        f"PSCL({P},{L})",
        alpha_bits=alpha * q.q_alpha,
        pm_bits=Fraction(L * q.q_pm),
        beta_bits=beta,
        N=N,
        L=L,
        P=P,
    )


def sweep(N: int, partitions, list_sizes, q: QuantSpec = QuantSpec()) -> list[MemoryReport]:
    """SC row, one SCL row per list size, then every (P, L) cell."""
    partitions = sorted(set(int(p) for p in partitions))
    list_sizes = sorted(set(int(l) for l in list_sizes))
    if not partitions or not list_sizes:
        raise ValueError("empty sweep grid")
    rows = [mem_sc(N, q)]
    rows += [mem_scl(N, L, q) for L in list_sizes]
    rows += [mem_pscl(N, P, L, q) for L in list_sizes for P in partitions]
    return rows


def format_bits(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else repr(float(value))
