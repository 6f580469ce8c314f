"""Recovery-rate estimators and header-overhead accounting.

A receiver that heard ``l`` packets is modelled as having drawn ``l``
uniform 2-subsets of the ``2k`` session primes; source i is recovered when
both of its identity primes were drawn.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidFieldError
from .primes import count_primes_with_bits

__all__ = [
    "CoverageParams",
    "CoverageEstimate",
    "OverheadComparison",
    "expected_recovery_exact_formula",
    "approx_recovery",
    "coverage_oracle",
    "coverage_exact_small",
    "compare_overhead",
    "pnt_bit_count_estimate",
    "bit_count_table",
    "TABLE1_R",
    "APPROX_INV_E",
]

# (1 - 1/k)^k rounded for three-digit k, as in the published table
APPROX_INV_E = 0.367
TABLE1_R = (1, 1.5, 2, 2.5, 3, 3.5, 4)


@dataclass(frozen=True)
class CoverageParams:
    k: int
    l: int

    def __post_init__(self):
        if self.k < 1 or self.l < 0:
            raise ValueError(f"need k >= 1 and l >= 0, got k={self.k}, l={self.l}")

    @property
    def r(self) -> float:
        return self.l / self.k


def expected_recovery_exact_formula(k: int, l: int) -> float:
    """``(1 - (1 - 1/k)**l)**2``: each identity prime treated as covered independently."""
    CoverageParams(k, l)
    return (1.0 - (1.0 - 1.0 / k) ** l) ** 2


def approx_recovery(r: float) -> float:
    if r < 0:
        raise ValueError("r must be >= 0")
    return (1.0 - APPROX_INV_E**r) ** 2


def coverage_exact_small(k: int, l: int) -> Fraction:
    """Exact expected recovered fraction by inclusion-exclusion.

    By symmetry this is the probability that the pair {1, 2} is covered.
    With ``C = binom(2k, 2)`` equally likely draws, a fixed element is missed
    by ``binom(2k-1, 2)`` of them and both elements of the pair by
    ``binom(2k-2, 2)``, so

        E = 1 - 2 (binom(2k-1,2)/C)**l + (binom(2k-2,2)/C)**l
    """
    CoverageParams(k, l)
    total = math.comb(2 * k, 2)
    miss_one = Fraction(math.comb(2 * k - 1, 2), total)
    miss_both = Fraction(math.comb(2 * k - 2, 2), total)
    return 1 - 2 * miss_one**l + miss_both**l


@dataclass(frozen=True)
class CoverageEstimate:
    mean: float
    stderr: float
    trials: int


def coverage_oracle(
    k: int,
    l: int,
    trials: int,
    rng: np.random.Generator | int | None = None,
    batch: int = 20_000,
) -> CoverageEstimate:
    """Monte Carlo estimate of the expected recovered fraction."""
    CoverageParams(k, l)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng)
    n = 2 * k
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        covered = np.zeros((b, n), dtype=bool)
        if l:
            first = rng.integers(0, n, size=(b, l))
            second = rng.integers(0, n - 1, size=(b, l))
            second += second >= first  # uniform over the other n-1 elements
            rows = np.repeat(np.arange(b), l)
            covered[rows, first.ravel()] = True
            covered[rows, second.ravel()] = True
        frac = (covered[:, 0::2] & covered[:, 1::2]).sum(axis=1) / k
        total += frac.sum()
        total_sq += np.square(frac).sum()
        done += b
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    stderr = math.sqrt(var * trials / (trials - 1) / trials) if trials > 1 else 0.0
    return CoverageEstimate(float(mean), float(stderr), trials)


@dataclass(frozen=True)
class OverheadComparison:
    k: int
    receivers: int
    q: int
    m: int
    frame_bytes: int
    vector_head_bits: int
    vector_head_bytes: int
    crt_head_bytes: int

    @property
    def vector_fraction(self) -> float:
        return self.vector_head_bytes / self.frame_bytes

    @property
    def crt_fraction(self) -> float:
        return self.crt_head_bytes / self.frame_bytes

    @property
    def vector_infeasible(self) -> bool:
        return self.vector_head_bytes > self.frame_bytes

    @property
    def crt_infeasible(self) -> bool:
        return self.crt_head_bytes > self.frame_bytes

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(
            vector_fraction=self.vector_fraction,
            crt_fraction=self.crt_fraction,
            vector_infeasible=self.vector_infeasible,
            crt_infeasible=self.crt_infeasible,
        )
        return d


def compare_overhead(k: int, receivers: int, q: int, m: int, frame_bytes: int) -> OverheadComparison:
    """Header bytes of a length-k coding vector over GF(q) versus a CRT prime pair."""
    if min(k, receivers, q, m, frame_bytes) < 1:
        raise ValueError("all overhead parameters must be positive")
    if q <= receivers:
        raise InvalidFieldError(f"field size q={q} must exceed the receiver count {receivers}")
    symbol_bits = (q - 1).bit_length()  # ceil(log2 q)
    bits = k * symbol_bits
    return OverheadComparison(
        k=k,
        receivers=receivers,
        q=q,
        m=m,
        frame_bytes=frame_bytes,
        vector_head_bits=bits,
        vector_head_bytes=(bits + 7) // 8,
        crt_head_bytes=2 * ((m + 7) // 8),
    )


def pnt_bit_count_estimate(m: int) -> float:
    """Prime-number-theorem estimate x/ln x of how many m-bit primes exist."""
    hi, lo = 2.0**m, 2.0 ** (m - 1)
    est = hi / math.log(hi)
    if m > 1:
        est -= lo / math.log(lo) if lo > 1 else 0.0
    return est


def bit_count_table(max_bits: int = 16) -> list[tuple[int, int, float]]:
    """(m, exact count of m-bit primes, estimate) for m = 2..max_bits."""
    return [(m, count_primes_with_bits(m), pnt_bit_count_estimate(m)) for m in range(2, max_bits + 1)]
