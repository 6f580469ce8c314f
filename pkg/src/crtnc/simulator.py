"""Multicast sessions over a topology, and the layered-network experiment."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from statistics import fmean
from typing import Hashable, Iterable, Sequence

from .coding import (
    Full,
    Packet,
    PartialMod,
    RecodePath,
    RecodePolicy,
    RecoveryOutcome,
    SessionConfig,
    SourceIdentity,
    Unrecovered,
    classify_recovery,
    finalize_single,
    internal_recode,
    receiver_solve,
    source_encode_multi,
    source_encode_parallel,
)
from .crt import CongruenceClass
from .errors import ConfigurationError
from .primes import generate_primes
from .topology import INTERNAL, RECEIVER, SOURCE, Topology, generate_layered

__all__ = [
    "ReceiverReport",
    "RecoveryReport",
    "run_session",
    "recover_rate",
    "r_prime",
    "Table2Row",
    "TABLE2_REFERENCE",
    "table2_session",
    "experiment_table2",
    "average_rows",
]

NodeId = Hashable

# Reference receiver prime-coverage values, keyed by (M, L).
TABLE2_REFERENCE = {
    (200, 5): 0.787,
    (200, 3): 0.785,
    (250, 5): 0.861,
    (250, 3): 0.853,
    (400, 5): 0.965,
    (400, 3): 0.963,
}


@dataclass(frozen=True)
class ReceiverReport:
    node: NodeId
    in_degree: int
    collected_primes: frozenset[int]
    # one merged class per payload slot; None when nothing arrived
    solution: tuple[CongruenceClass, ...] | None
    # outcomes[i][slot] for source i (single-source mode: one source)
    outcomes: tuple[tuple[RecoveryOutcome, ...], ...]

    @property
    def t(self) -> int:
        """Number of distinct session primes this receiver collected."""
        return len(self.collected_primes)

    def fully_recovered(self, source: int) -> bool:
        return all(isinstance(o, Full) for o in self.outcomes[source])


@dataclass(frozen=True)
class RecoveryReport:
    mode: str
    k: int
    u: int
    seed: int | None
    identities: tuple[SourceIdentity, ...]
    receivers: tuple[ReceiverReport, ...]
    edge_packets: tuple[Packet | None, ...] | None = field(default=None, repr=False)

    @property
    def session_primes(self) -> frozenset[int]:
        return frozenset(p for ident in self.identities for p in ident.pair)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "k": self.k,
            "u": self.u,
            "seed": self.seed,
            "identities": [list(i.pair) for i in self.identities],
            "receivers": [_receiver_dict(r) for r in self.receivers],
        }


def _outcome_dict(o: RecoveryOutcome) -> dict:
    if isinstance(o, Full):
        return {"kind": "full", "value": o.value}
    if isinstance(o, PartialMod):
        return {"kind": "partial", "residue": o.residue, "modulus": o.modulus}
    return {"kind": "none"}


def _receiver_dict(r: ReceiverReport) -> dict:
    return {
        "node": r.node,
        "in_degree": r.in_degree,
        "t": r.t,
        "collected_primes": sorted(r.collected_primes),
        # merged moduli run to thousands of bits; strings keep JSON readers safe
        "solution": None
        if r.solution is None
        else [{"residue": str(c.residue), "modulus": str(c.modulus)} for c in r.solution],
        "outcomes": [[_outcome_dict(o) for o in per_src] for per_src in r.outcomes],
    }


def _normalize_messages(messages: Sequence, u: int) -> list[tuple[int, ...]]:
    out = []
    for msg in messages:
        tup = (msg,) if isinstance(msg, int) else tuple(msg)
        if len(tup) != u:
            raise ConfigurationError(f"expected {u} residues per message, got {len(tup)}")
        out.append(tup)
    return out


def run_session(
    topology: Topology,
    config: SessionConfig,
    messages: Sequence,
    rng: random.Random | None = None,
    *,
    pool: Sequence[int] | None = None,
    picks: dict[NodeId, Sequence[tuple[int, int]]] | None = None,
    trace: bool = False,
) -> RecoveryReport:
    """Run one multicast session and report what every receiver recovered.

    Multi-source mode gives each source its own identity pair drawn from
    ``pool`` (or freshly generated ``m``-bit primes) and expects one message
    per source.  Single-source mode expects exactly one source and one
    message, split over ``out_degree(source)`` prime pairs in out-edge order.
    ``picks`` pins the prime pair(s) chosen at given internal nodes.
    """
    if rng is None:
        rng = random.Random(config.seed)
    picks = picks or {}
    sources = topology.sources
    msgs = _normalize_messages(messages, config.u)

    if config.mode == "multi":
        k = len(sources)
        if len(msgs) != k:
            raise ConfigurationError(f"{k} sources but {len(msgs)} messages")
    else:
        if len(sources) != 1:
            raise ConfigurationError(f"single-source mode needs one source, found {len(sources)}")
        if len(msgs) != 1:
            raise ConfigurationError("single-source mode takes exactly one message")
        k = topology.out_degrees[sources[0]]

    if pool is None:
        pool = generate_primes(2 * k, config.m, rng).primes
    pool = tuple(pool)
    if len(pool) != 2 * k or len(set(pool)) != 2 * k:
        raise ConfigurationError(f"need {2 * k} distinct primes, got {len(pool)}")
    identities = tuple(SourceIdentity(i, (pool[2 * i], pool[2 * i + 1])) for i in range(k))

    edge_packets: list[Packet | None] = [None] * len(topology.edges)
    receivers = []
    for node in topology.topological_order:
        role = topology.roles[node]
        out_idx = topology.out_edges[node]
        if role == SOURCE:
            if config.mode == "multi":
                src = sources.index(node)
                pkt = source_encode_multi(identities[src], msgs[src], config.m)
                for e in out_idx:
                    edge_packets[e] = pkt
            else:
                for ident, e in zip(identities, out_idx):
                    edge_packets[e] = source_encode_parallel(msgs[0], ident.pair, config.n)
            continue

        inputs = [edge_packets[e] for e in topology.in_edges[node]]
        inputs = [p for p in inputs if p is not None]
        if role == INTERNAL:
            if not inputs:
                continue  # unreachable node stays silent
            out = internal_recode(
                inputs,
                len(out_idx),
                config.recode_policy,
                rng,
                config.recode_path,
                pairs=picks.get(node),
            )
            for e, pkt in zip(out_idx, out):
                edge_packets[e] = pkt
        elif role == RECEIVER:
            receivers.append(_decode_at(node, inputs, topology, config, identities, k))

    return RecoveryReport(
        mode=config.mode,
        k=k,
        u=config.u,
        seed=config.seed,
        identities=identities,
        receivers=tuple(receivers),
        edge_packets=tuple(edge_packets) if trace else None,
    )


def _decode_at(node, inputs, topology, config, identities, k) -> ReceiverReport:
    collected = frozenset(p for pkt in inputs for p in pkt.pair)
    if not inputs:
        n_src = k if config.mode == "multi" else 1
        outcomes = tuple((Unrecovered(),) * config.u for _ in range(n_src))
        return ReceiverReport(node, topology.in_degrees[node], collected, None, outcomes)

    solution = tuple(receiver_solve(inputs))
    if config.mode == "multi":
        outcomes = tuple(
            tuple(classify_recovery(cls, ident) for cls in solution) for ident in identities
        )
    else:
        outcomes = (tuple(finalize_single(c.residue, c.modulus, config.n) for c in solution),)
    return ReceiverReport(node, topology.in_degrees[node], collected, solution, outcomes)


def recover_rate(report: RecoveryReport) -> tuple[list[float], float]:
    """Per-receiver fraction of sources fully recovered, and their mean."""
    if report.mode != "multi":
        raise ConfigurationError("recover rate is defined for multi-source sessions")
    rates = [
        sum(r.fully_recovered(i) for i in range(report.k)) / report.k for r in report.receivers
    ]
    return rates, fmean(rates) if rates else 0.0


def r_prime(report: RecoveryReport) -> float:
    """Mean number of collected primes per receiver, over the 2k session primes."""
    if not report.receivers:
        return 0.0
    return fmean(r.t for r in report.receivers) / (2 * report.k)


# layered-network experiment


@dataclass(frozen=True)
class Table2Row:
    M: int
    L: int
    seed: int | None  # None marks a seed-averaged row
    t: tuple[float, ...]
    r_prime: float


def table2_session(
    M: int,
    L: int,
    seed: int,
    *,
    policy: RecodePolicy | str = RecodePolicy.PER_NODE,
    path: RecodePath | str = RecodePath.FAST,
    m: int = 16,
    u: int = 1,
    M_0: int = 100,
    M_last: int = 10,
    sigma: float = 0.8,
    trace: bool = False,
) -> tuple[Topology, RecoveryReport]:
    """One session of the experiment: ``M_0`` sources, ``L`` levels of ``M``, ``M_last`` receivers."""
    topo = generate_layered(M_0, M, L, M_last, sigma, random.Random(f"{seed}/topology"))
    config = SessionConfig(m=m, u=u, recode_policy=policy, recode_path=path, seed=seed)
    msg_rng = random.Random(f"{seed}/messages")
    bits = config.n
    messages = [tuple(msg_rng.getrandbits(bits) for _ in range(u)) for _ in range(M_0)]
    report = run_session(topo, config, messages, random.Random(f"{seed}/session"), trace=trace)
    return topo, report


def _row_for(M, L, seed, policy, path, m) -> Table2Row:
    _, report = table2_session(M, L, seed, policy=policy, path=path, m=m)
    return Table2Row(M, L, seed, tuple(r.t for r in report.receivers), r_prime(report))


def experiment_table2(
    M_list: Iterable[int],
    L_list: Iterable[int],
    seeds: Iterable[int],
    *,
    policy: RecodePolicy | str = RecodePolicy.PER_NODE,
    path: RecodePath | str = RecodePath.FAST,
    m: int = 16,
    jobs: int = 1,
) -> list[Table2Row]:
    """Per-seed rows, sorted by (M, L, seed), for every (M, L) combination."""
    tasks = sorted((M, L, s) for M in M_list for L in L_list for s in seeds)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_row_for, M, L, s, policy, path, m) for M, L, s in tasks]
            return [f.result() for f in futures]
    return [_row_for(M, L, s, policy, path, m) for M, L, s in tasks]


def average_rows(rows: Iterable[Table2Row]) -> list[Table2Row]:
    """Collapse per-seed rows into one seed-averaged row per (M, L)."""
    groups: dict[tuple[int, int], list[Table2Row]] = {}
    for row in rows:
        groups.setdefault((row.M, row.L), []).append(row)
    out = []
    for (M, L), group in sorted(groups.items()):
        t = tuple(fmean(col) for col in zip(*(r.t for r in group)))
        out.append(Table2Row(M, L, None, t, fmean(r.r_prime for r in group)))
    return out
