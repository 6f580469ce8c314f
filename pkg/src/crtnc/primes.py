"""Prime pools of a fixed bit length.

Primality is decided by Miller-Rabin over the first twelve prime bases, which
is a deterministic test for every n < 3.3e24 and therefore for all 64-bit
candidates.  Above that range the same test is a strong probable-prime test.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

from .errors import InsufficientPrimesError, UnsupportedSizeError

__all__ = [
    "PrimePool",
    "is_prime",
    "primes_with_bits",
    "count_primes_with_bits",
    "generate_primes",
    "min_bit_length",
    "MAX_SIEVE_BITS",
]

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

# Exact counts come from a bytearray sieve; 2**24 bytes is the ceiling we accept.
MAX_SIEVE_BITS = 24


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def _sieve(limit: int) -> bytearray:
    """flags[i] == 1 iff i is prime, for 0 <= i < limit."""
    flags = bytearray([1]) * limit
    flags[0:2] = b"\x00\x00"
    i = 2
    while i * i < limit:
        if flags[i]:
            flags[i * i :: i] = bytes(len(range(i * i, limit, i)))
        i += 1
    return flags


def _check_sieve_bits(bit_length: int) -> None:
    if bit_length > MAX_SIEVE_BITS:
        raise UnsupportedSizeError(
            f"exact prime enumeration supports at most {MAX_SIEVE_BITS} bits, "
            f"got {bit_length}"
        )


def primes_with_bits(bit_length: int) -> list[int]:
    """All primes p with exactly ``bit_length`` bits, ascending."""
    if bit_length < 2:
        return []
    _check_sieve_bits(bit_length)
    lo, hi = 1 << (bit_length - 1), 1 << bit_length
    flags = _sieve(hi)
    return [p for p in range(lo, hi) if flags[p]]


def count_primes_with_bits(bit_length: int) -> int:
    if bit_length < 2:
        return 0
    _check_sieve_bits(bit_length)
    lo, hi = 1 << (bit_length - 1), 1 << bit_length
    return _sieve(hi)[lo:hi].count(1)


@dataclass(frozen=True)
class PrimePool:
    primes: tuple[int, ...]
    bit_length: int

    def __post_init__(self):
        object.__setattr__(self, "primes", tuple(self.primes))
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("prime pool entries must be distinct")
        for p in self.primes:
            if p.bit_length() != self.bit_length:
                raise ValueError(f"{p} is not a {self.bit_length}-bit number")
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")

    def __len__(self):
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def __getitem__(self, i):
        return self.primes[i]

    def pairs(self) -> list[tuple[int, int]]:
        """Consecutive pairs (p1, p2), (p3, p4), ... as used for source headers."""
        if len(self.primes) % 2:
            raise ValueError("pool size must be even to form pairs")
        return [(self.primes[i], self.primes[i + 1]) for i in range(0, len(self.primes), 2)]


def generate_primes(count: int, bit_length: int, rng: random.Random) -> PrimePool:
    """Draw ``count`` distinct random primes of exactly ``bit_length`` bits.

    Rejection-samples odd candidates in the common case.  When the request
    exceeds half of the available primes the whole range is enumerated and a
    random sample taken instead, so the call is total whenever enough primes
    exist.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if bit_length < 2:
        raise ValueError("bit_length must be >= 2")

    available = count_primes_with_bits(bit_length) if bit_length <= MAX_SIEVE_BITS else None
    if available is not None:
        if count > available:
            raise InsufficientPrimesError(count, bit_length, available)
        if 2 * count > available:
            chosen = rng.sample(primes_with_bits(bit_length), count)
            return PrimePool(tuple(chosen), bit_length)

    lo, hi = 1 << (bit_length - 1), 1 << bit_length
    seen: set[int] = set()
    chosen = []
    while len(chosen) < count:
        # 2 is the only even prime and only 2-bit range holds it alongside 3
        candidate = rng.randrange(lo, hi) | (1 if bit_length > 2 else 0)
        if candidate in seen:
            continue
        if is_prime(candidate):
            seen.add(candidate)
            chosen.append(candidate)
    return PrimePool(tuple(chosen), bit_length)


def min_bit_length(prime_count: int) -> int:
    """Smallest m such that at least ``prime_count`` m-bit primes exist (exact count)."""
    if prime_count < 1:
        raise ValueError("prime_count must be >= 1")
    for m in range(2, MAX_SIEVE_BITS + 1):
        if count_primes_with_bits(m) >= prime_count:
            return m
    raise UnsupportedSizeError(
        f"{prime_count} primes need more than {MAX_SIEVE_BITS} bits"
    )
