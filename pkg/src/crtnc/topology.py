"""Network models: the butterfly fixture and random layered networks."""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Hashable

from .errors import ConfigurationError

__all__ = [
    "Topology",
    "SOURCE",
    "INTERNAL",
    "RECEIVER",
    "butterfly",
    "generate_layered",
    "fanout",
    "dumps",
    "loads",
    "read_topology",
    "write_topology",
]

SOURCE = "source"
INTERNAL = "internal"
RECEIVER = "receiver"

NodeId = Hashable


@dataclass(frozen=True)
class Topology:
    """A directed acyclic multigraph with role-tagged nodes.

    ``levels`` is set for layered networks, where every edge joins level i to
    level i+1.  Otherwise roles follow degrees: no in-edges means source, no
    out-edges means receiver.
    """

    nodes: tuple[NodeId, ...]
    edges: tuple[tuple[NodeId, NodeId], ...]
    levels: tuple[tuple[NodeId, ...], ...] | None = None
    roles: dict[NodeId, str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple((u, v) for u, v in self.edges))
        if self.levels is not None:
            object.__setattr__(self, "levels", tuple(tuple(lv) for lv in self.levels))
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ConfigurationError("duplicate node ids")
        for u, v in self.edges:
            if u not in known or v not in known:
                raise ConfigurationError(f"edge {u} -> {v} references an unknown node")
            if u == v:
                raise ConfigurationError(f"self-loop at {u}")
        if self.roles is None:
            object.__setattr__(self, "roles", self._derive_roles())
        self._validate()

    def _derive_roles(self) -> dict[NodeId, str]:
        if self.levels is not None:
            last = len(self.levels) - 1
            roles = {}
            for i, level in enumerate(self.levels):
                role = SOURCE if i == 0 else RECEIVER if i == last else INTERNAL
                roles.update((n, role) for n in level)
            return roles
        indeg, outdeg = self.in_degrees, self.out_degrees
        roles = {}
        for n in self.nodes:
            if indeg[n] == 0:
                roles[n] = SOURCE
            elif outdeg[n] == 0:
                roles[n] = RECEIVER
            else:
                roles[n] = INTERNAL
        return roles

    def _validate(self) -> None:
        if self.levels is not None:
            if len(self.levels) < 2:
                raise ConfigurationError("a layered network needs at least two levels")
            flat = [n for lv in self.levels for n in lv]
            if len(flat) != len(self.nodes) or set(flat) != set(self.nodes):
                raise ConfigurationError("levels must partition the node set")
            depth = {n: i for i, lv in enumerate(self.levels) for n in lv}
            for u, v in self.edges:
                if depth[v] != depth[u] + 1:
                    raise ConfigurationError(f"edge {u} -> {v} skips or reverses a level")
        for n in self.sources:
            if self.out_degrees[n] == 0:
                raise ConfigurationError(f"source {n} has no output edge")
        # a sparse random draw may leave a layered receiver unreached; it just recovers nothing
        for n in self.receivers if self.levels is None else ():
            if self.in_degrees[n] == 0:
                raise ConfigurationError(f"receiver {n} has no input edge")
        try:
            self.topological_order
        except CycleError as exc:
            raise ConfigurationError(f"topology has a cycle: {exc.args[1]}") from exc

    @cached_property
    def in_degrees(self) -> Counter:
        c = Counter({n: 0 for n in self.nodes})
        c.update(v for _, v in self.edges)
        return c

    @cached_property
    def out_degrees(self) -> Counter:
        c = Counter({n: 0 for n in self.nodes})
        c.update(u for u, _ in self.edges)
        return c

    @cached_property
    def in_edges(self) -> dict[NodeId, list[int]]:
        """Edge indices entering each node, in edge-list order."""
        out: dict[NodeId, list[int]] = {n: [] for n in self.nodes}
        for i, (_, v) in enumerate(self.edges):
            out[v].append(i)
        return out

    @cached_property
    def out_edges(self) -> dict[NodeId, list[int]]:
        out: dict[NodeId, list[int]] = {n: [] for n in self.nodes}
        for i, (u, _) in enumerate(self.edges):
            out[u].append(i)
        return out

    @cached_property
    def topological_order(self) -> tuple[NodeId, ...]:
        """Level order for layered networks, otherwise a deterministic topological sort."""
        if self.levels is not None:
            return tuple(n for lv in self.levels for n in lv)
        ts = TopologicalSorter({n: [] for n in self.nodes})
        for u, v in self.edges:
            ts.add(v, u)
        ts.prepare()
        rank = {n: i for i, n in enumerate(self.nodes)}
        order = []
        while ts.is_active():
            ready = sorted(ts.get_ready(), key=rank.__getitem__)
            order.extend(ready)
            ts.done(*ready)
        return tuple(order)

    @property
    def sources(self) -> list[NodeId]:
        return [n for n in self.nodes if self.roles[n] == SOURCE]

    @property
    def receivers(self) -> list[NodeId]:
        return [n for n in self.nodes if self.roles[n] == RECEIVER]

    def receiver_in_degrees(self) -> dict[NodeId, int]:
        return {t: self.in_degrees[t] for t in self.receivers}


def butterfly() -> Topology:
    nodes = ("s", "a", "b", "c", "d", "t1", "t2")
    edges = (
        ("s", "a"), ("s", "b"),
        ("a", "c"), ("b", "c"),
        ("a", "t1"), ("b", "t2"),
        ("c", "d"),
        ("d", "t1"), ("d", "t2"),
    )
    return Topology(nodes, edges)


def fanout(sigma: float, size: int) -> int:
    """Out-degree toward a level of ``size`` nodes: sigma*size rounded half up."""
    return math.floor(sigma * size + 0.5)


def generate_layered(
    M_0: int,
    M: int,
    L: int,
    M_last: int,
    sigma: float,
    rng: random.Random,
) -> Topology:
    """Random layered network with levels sized ``M_0, M (L times), M_last``.

    Every node of level i links to ``round(sigma * |V_{i+1}|)`` distinct nodes
    of level i+1, drawn uniformly without replacement.  Node ids are the
    integers ``0 .. total-1`` assigned level by level.
    """
    if not 0 < sigma <= 1:
        raise ConfigurationError(f"sigma must lie in (0, 1], got {sigma}")
    if L < 0:
        raise ConfigurationError("L must be >= 0")
    sizes = [M_0] + [M] * L + [M_last]
    if any(s < 1 for s in sizes):
        raise ConfigurationError(f"level sizes must be >= 1, got {sizes}")
    if any(fanout(sigma, s) < 1 for s in sizes[1:]):
        raise ConfigurationError("sigma too small: some node would have no output edge")

    levels = []
    start = 0
    for s in sizes:
        levels.append(tuple(range(start, start + s)))
        start += s
    edges = []
    for here, nxt in zip(levels, levels[1:]):
        k = fanout(sigma, len(nxt))
        for u in here:
            edges.extend((u, v) for v in sorted(rng.sample(nxt, k)))
    return Topology(tuple(range(start)), tuple(edges), tuple(levels))


# line-oriented text format


def dumps(topo: Topology) -> str:
    """``levels: ...`` header (layered networks only), then one ``u -> v`` per edge."""
    lines = []
    if topo.levels is not None:
        lines.append("levels: " + " ".join(str(len(lv)) for lv in topo.levels))
    lines.extend(f"{u} -> {v}" for u, v in topo.edges)
    return "\n".join(lines) + "\n"


def loads(text: str) -> Topology:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    sizes = None
    if lines and lines[0].startswith("levels:"):
        try:
            sizes = [int(tok) for tok in lines[0].split(":", 1)[1].split()]
        except ValueError as exc:
            raise ConfigurationError(f"bad levels header: {lines[0]!r}") from exc
        lines = lines[1:]

    edges = []
    for ln in lines:
        left, sep, right = ln.partition("->")
        if not sep or not left.strip() or not right.strip():
            raise ConfigurationError(f"bad edge line: {ln!r}")
        edges.append((left.strip(), right.strip()))

    if sizes is None:
        nodes = list(dict.fromkeys(n for e in edges for n in e))
        return Topology(tuple(nodes), tuple(edges))

    total = sum(sizes)
    try:
        int_edges = [(int(u), int(v)) for u, v in edges]
    except ValueError as exc:
        raise ConfigurationError("layered files use integer node ids") from exc
    levels, start = [], 0
    for s in sizes:
        levels.append(tuple(range(start, start + s)))
        start += s
    return Topology(tuple(range(total)), tuple(int_edges), tuple(levels))


def read_topology(path: str | Path) -> Topology:
    return loads(Path(path).read_text(encoding="utf-8"))


def write_topology(topo: Topology, path: str | Path) -> None:
    Path(path).write_text(dumps(topo), encoding="utf-8")
