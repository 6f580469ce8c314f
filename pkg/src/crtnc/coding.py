"""Per-node coding procedures.

Every edge carries a :class:`Packet` ``[a_1, ..., a_u | p, q]`` where each
``a_j`` is congruent to the j-th hidden message modulo ``p*q``.  Sources reduce
their messages, internal nodes merge what they hear and re-reduce modulo a
freshly picked prime pair, and receivers merge everything they hear.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .crt import CongruenceClass, Incompatible, merge, solve_system
from .errors import ConfigurationError, CorruptionError, MessageTooLargeError
from .primes import PrimePool

__all__ = [
    "Packet",
    "SourceIdentity",
    "SessionConfig",
    "RecodePolicy",
    "RecodePath",
    "Full",
    "PartialMod",
    "Unrecovered",
    "RecoveryOutcome",
    "source_encode_single",
    "source_encode_parallel",
    "source_encode_multi",
    "pick_pair",
    "recode_full",
    "recode_fast",
    "internal_recode",
    "internal_recode_full",
    "internal_recode_fast",
    "receiver_solve",
    "finalize_single",
    "classify_recovery",
]


@dataclass(frozen=True, slots=True)
class Packet:
    residues: tuple[int, ...]
    pair: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "residues", tuple(self.residues))
        object.__setattr__(self, "pair", tuple(self.pair))
        p, q = self.pair
        if p == q:
            raise ValueError(f"header primes must differ, got ({p}, {q})")
        if not self.residues:
            raise ValueError("packet needs at least one residue")
        n = p * q
        for r in self.residues:
            if not 0 <= r < n:
                raise ValueError(f"residue {r} outside [0, {n})")

    @property
    def modulus(self) -> int:
        return self.pair[0] * self.pair[1]

    @property
    def u(self) -> int:
        return len(self.residues)

    def congruence(self, slot: int = 0) -> CongruenceClass:
        return CongruenceClass(self.residues[slot], self.modulus)

    def __str__(self):
        return f"[{','.join(map(str, self.residues))} | {self.pair[0]},{self.pair[1]}]"


@dataclass(frozen=True, slots=True)
class SourceIdentity:
    index: int
    pair: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "pair", tuple(self.pair))
        if self.pair[0] == self.pair[1]:
            raise ValueError("identity primes must differ")


class RecodePolicy(str, Enum):
    PER_NODE = "per-node"
    PER_EDGE = "per-edge"


class RecodePath(str, Enum):
    FULL = "full"
    FAST = "fast"


@dataclass(frozen=True)
class SessionConfig:
    """Parameters of one coding session.

    ``mode`` is ``"multi"`` (one identity pair per source, messages of at
    most ``2m - 1`` bits, ``2m - 2`` by default) or ``"single"`` (one source, ``n``-bit messages split
    over a fresh pool of ``2k`` primes).
    """

    m: int = 16
    u: int = 1
    n: int | None = None
    mode: str = "multi"
    recode_policy: RecodePolicy = RecodePolicy.PER_NODE
    recode_path: RecodePath = RecodePath.FULL
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "recode_policy", RecodePolicy(self.recode_policy))
        object.__setattr__(self, "recode_path", RecodePath(self.recode_path))
        if self.m < 2:
            raise ConfigurationError("m must be >= 2")
        if self.u < 1:
            raise ConfigurationError("u must be >= 1")
        if self.mode not in ("multi", "single"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.mode == "multi":
            # 2m-2 bits always fit below the product of two m-bit primes
            if self.n is None:
                object.__setattr__(self, "n", 2 * self.m - 2)
            elif not 1 <= self.n <= 2 * self.m - 1:
                raise ConfigurationError(
                    f"multi-source messages take at most {2 * self.m - 1} bits for m={self.m}, got n={self.n}"
                )
        elif self.n is None or self.n < 1:
            raise ConfigurationError("single-source mode needs a message bit length n >= 1")


# recovery outcomes


@dataclass(frozen=True, slots=True)
class Full:
    value: int


@dataclass(frozen=True, slots=True)
class PartialMod:
    """Only ``value = residue (mod modulus)`` is known."""

    residue: int
    modulus: int


@dataclass(frozen=True, slots=True)
class Unrecovered:
    pass


RecoveryOutcome = Full | PartialMod | Unrecovered


# sources


def _check_bits(value: int, bits: int) -> None:
    if value < 0 or value >> bits:
        raise MessageTooLargeError(f"message {value} does not fit in {bits} bits")


def source_encode_single(message: int, pool: PrimePool | Sequence[int], n: int) -> list[Packet]:
    """Split one n-bit message across ``len(pool) // 2`` packets, one per prime pair."""
    _check_bits(message, n)
    primes = tuple(pool)
    if len(primes) < 2 or len(primes) % 2:
        raise ConfigurationError("single-source pool must hold 2k primes")
    out = []
    for i in range(0, len(primes), 2):
        p, q = primes[i], primes[i + 1]
        out.append(Packet((message % (p * q),), (p, q)))
    return out


def source_encode_parallel(messages: Sequence[int], pair: tuple[int, int], n: int | None = None) -> Packet:
    if n is not None:
        for x in messages:
            _check_bits(x, n)
    pq = pair[0] * pair[1]
    return Packet(tuple(x % pq for x in messages), pair)


def source_encode_multi(identity: SourceIdentity, message: int | Sequence[int], m: int) -> Packet:
    """The packet a source emits unchanged on every one of its output edges.

    The message goes out unreduced, so it must lie below the identity product
    for receivers to get it back exactly.  A (2m-1)-bit message can exceed the
    product of two m-bit primes; that case is rejected rather than wrapped.
    """
    messages = (message,) if isinstance(message, int) else tuple(message)
    pq = identity.pair[0] * identity.pair[1]
    for x in messages:
        _check_bits(x, 2 * m - 1)
        if x >= pq:
            raise MessageTooLargeError(f"message {x} is not below identity product {pq}")
    return Packet(messages, identity.pair)


# internal nodes


def _header_primes(inputs: Sequence[Packet]) -> list[int]:
    return [p for pkt in inputs for p in pkt.pair]


def pick_pair(inputs: Sequence[Packet], rng: random.Random) -> tuple[int, int] | None:
    """Two distinct primes drawn uniformly from the multiset of input header primes.

    The first is uniform over the multiset; the second uniform over the
    multiset with every copy of the first removed.  Returns ``None`` when
    fewer than two distinct primes are present.
    """
    primes = _header_primes(inputs)
    if len(set(primes)) < 2:
        return None
    return _pick_from(primes, rng)


def _pick_from(primes: Sequence[int], rng: random.Random) -> tuple[int, int]:
    # caller guarantees at least two distinct values, so the loop terminates
    draw = rng.random
    n = len(primes)
    first = primes[int(draw() * n)]
    while True:
        second = primes[int(draw() * n)]
        if second != first:
            break
    return (first, second) if first < second else (second, first)


def _solve_slots(inputs: Sequence[Packet]) -> list[CongruenceClass]:
    u = inputs[0].u
    if any(pkt.u != u for pkt in inputs):
        raise CorruptionError("packets disagree on the number of residues")
    solved = []
    for slot in range(u):
        result = solve_system(pkt.congruence(slot) for pkt in inputs)
        if isinstance(result, Incompatible):
            raise CorruptionError(f"slot {slot}: {result}")
        solved.append(result)
    return solved


def _reduce_solution(solved: Sequence[CongruenceClass], pair: tuple[int, int]) -> Packet:
    pq = pair[0] * pair[1]
    for cls in solved:
        if cls.modulus % pq:
            raise ConfigurationError(f"pair {pair} is not covered by the node's inputs")
    return Packet(tuple(cls.residue % pq for cls in solved), pair)


def recode_full(inputs: Sequence[Packet], pair: tuple[int, int]) -> Packet:
    """Merge every input congruence, then reduce modulo ``pair[0] * pair[1]``."""
    if not inputs:
        raise ValueError("recode needs at least one input packet")
    return _reduce_solution(_solve_slots(inputs), pair)


def recode_fast(inputs: Sequence[Packet], pair: tuple[int, int]) -> Packet:
    """Two-congruence recode: only the packets carrying the picked primes are read."""
    if not inputs:
        raise ValueError("recode needs at least one input packet")
    p, q = pair
    src_p = next((pkt for pkt in inputs if p in pkt.pair), None)
    src_q = next((pkt for pkt in inputs if q in pkt.pair), None)
    if src_p is None or src_q is None:
        raise ConfigurationError(f"pair {pair} is not covered by the node's inputs")
    return _fast_from(src_p, src_q, pair)


def _fast_from(src_p: Packet, src_q: Packet, pair: tuple[int, int]) -> Packet:
    p, q = pair
    if q in src_p.pair:
        return Packet(tuple(r % (p * q) for r in src_p.residues), pair)
    residues = []
    for a_full, b_full in zip(src_p.residues, src_q.residues, strict=True):
        cls = merge(CongruenceClass(a_full % p, p), CongruenceClass(b_full % q, q))
        residues.append(cls.residue)
    return Packet(tuple(residues), pair)


def internal_recode(
    inputs: Sequence[Packet],
    out_degree: int,
    policy: RecodePolicy | str,
    rng: random.Random,
    path: RecodePath | str = RecodePath.FULL,
    pairs: Sequence[tuple[int, int]] | None = None,
) -> list[Packet]:
    """Produce the packets for a node's ``out_degree`` output edges.

    ``pairs`` overrides the random pick (one pair for the whole node, or one
    per edge).  The picks are drawn before any arithmetic so the two paths
    consume the random stream identically.
    """
    if not inputs:
        raise ValueError("internal node received no packets")
    policy = RecodePolicy(policy)
    path = RecodePath(path)
    if out_degree == 0:
        return []

    if pairs is None:
        draws = 1 if policy is RecodePolicy.PER_NODE else out_degree
        primes = _header_primes(inputs)
        if len(set(primes)) < 2:
            pairs = [None]
        else:
            pairs = [_pick_from(primes, rng) for _ in range(draws)]
    else:
        pairs = list(pairs)
    if len(pairs) == 1:
        pairs = pairs * out_degree
    if len(pairs) != out_degree:
        raise ConfigurationError(f"{len(pairs)} pairs supplied for {out_degree} output edges")

    if pairs[0] is None:
        # a single distinct prime pair: nothing to re-pick, forward as is
        if path is RecodePath.FULL:
            _solve_slots(inputs)  # still reject contradictory duplicates
        return [inputs[0]] * out_degree

    if path is RecodePath.FULL:
        solved = _solve_slots(inputs)
        cache: dict[tuple[int, int], Packet] = {}
        out = []
        for pair in pairs:
            if pair not in cache:
                cache[pair] = _reduce_solution(solved, pair)
            out.append(cache[pair])
        return out

    carrier: dict[int, Packet] = {}
    for pkt in inputs:
        for prime in pkt.pair:
            carrier.setdefault(prime, pkt)
    cache = {}
    out = []
    for pair in pairs:
        if pair not in cache:
            cache[pair] = _fast_from(carrier[pair[0]], carrier[pair[1]], pair)
        out.append(cache[pair])
    return out


def internal_recode_full(inputs, out_degree, policy, rng, pairs=None) -> list[Packet]:
    return internal_recode(inputs, out_degree, policy, rng, RecodePath.FULL, pairs)


def internal_recode_fast(inputs, out_degree, policy, rng, pairs=None) -> list[Packet]:
    return internal_recode(inputs, out_degree, policy, rng, RecodePath.FAST, pairs)


# receivers


def receiver_solve(inputs: Sequence[Packet]) -> list[CongruenceClass]:
    """One merged class ``c mod N`` per payload slot, N the lcm of all header products."""
    if not inputs:
        raise ValueError("receiver got no packets")
    return _solve_slots(inputs)


def finalize_single(c: int, N: int, n: int) -> Full | PartialMod:
    """Decide whether ``c mod N`` pins down an n-bit message.

    The class has exactly one member in ``[0, 2**n)`` iff ``c + N >= 2**n``;
    below that, ``c + l*N`` for several ``l`` are all n-bit candidates.
    """
    if not 0 <= c < N:
        raise ValueError(f"residue {c} outside [0, {N})")
    if c >> n:
        raise CorruptionError(f"class {c} mod {N} holds no {n}-bit value")
    if (c + N) >> n:
        return Full(c)
    return PartialMod(c, N)


def classify_recovery(solution: CongruenceClass, identity: SourceIdentity) -> RecoveryOutcome:
    p, q = identity.pair
    has_p = solution.modulus % p == 0
    has_q = solution.modulus % q == 0
    if has_p and has_q:
        return Full(solution.residue % (p * q))
    if has_p:
        return PartialMod(solution.residue % p, p)
    if has_q:
        return PartialMod(solution.residue % q, q)
    return Unrecovered()
