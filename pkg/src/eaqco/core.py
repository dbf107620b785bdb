"""Shared domain types: node ids, topology, messages, and routing actions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .energy import LinkEnergyParams

NodeId = int


class TopologyError(Exception):
    """Base class for topology construction/validation failures."""


class SelfLinkError(TopologyError):
    pass


class DuplicateLinkError(TopologyError):
    pass


class DisconnectedGraphError(TopologyError):
    pass


@dataclass(frozen=True)
class LinkSpec:
    """Per-link transmission parameters."""

    propagation_delay: float  # seconds
    bandwidth: float  # bits per second
    energy: LinkEnergyParams

    def __post_init__(self):
        if self.propagation_delay < 0:
            raise ValueError("propagation_delay must be >= 0")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be > 0")


class Topology:
    """Undirected graph with per-link parameters.

    Internal node ids are dense 0..n-1. `labels` carries the external node
    names used by configs and trace files; label order fixes the id
    assignment, and "lowest NodeId" tie-breaks follow that order.
    """

    def __init__(self, labels: Sequence[str], links: Iterable[tuple[NodeId, NodeId, LinkSpec]]):
        self.labels: tuple[str, ...] = tuple(str(x) for x in labels)
        if len(set(self.labels)) != len(self.labels):
            raise TopologyError("duplicate node labels")
        self._id_of = {lab: i for i, lab in enumerate(self.labels)}
        self.link_list: list[tuple[NodeId, NodeId, LinkSpec]] = [
            (a, b, spec) for a, b, spec in links
        ]
        self._links: dict[tuple[NodeId, NodeId], LinkSpec] = {}
        adj: dict[NodeId, set[NodeId]] = {i: set() for i in range(len(self.labels))}
        for a, b, spec in self.link_list:
            if a == b:
                continue  # caught by validate_topology
            if a in adj and b in adj:
                adj[a].add(b)
                adj[b].add(a)
            self._links[self._key(a, b)] = spec
        self._adjacency = {n: tuple(sorted(nbrs)) for n, nbrs in adj.items()}

    @staticmethod
    def _key(a: NodeId, b: NodeId) -> tuple[NodeId, NodeId]:
        return (a, b) if a <= b else (b, a)

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def nodes(self) -> range:
        return range(len(self.labels))

    def label(self, node: NodeId) -> str:
        return self.labels[node]

    def id_of(self, label) -> NodeId:
        try:
            return self._id_of[str(label)]
        except KeyError:
            raise TopologyError(f"unknown node label {label!r}") from None

    def neighbors(self, node: NodeId) -> tuple[NodeId, ...]:
        return self._adjacency[node]

    def link(self, a: NodeId, b: NodeId) -> LinkSpec:
        return self._links[self._key(a, b)]

    def has_link(self, a: NodeId, b: NodeId) -> bool:
        return self._key(a, b) in self._links

    def shortest_hop_distances(self, origin: NodeId) -> dict[NodeId, int]:
        """BFS hop counts from origin to every reachable node."""
        dist = {origin: 0}
        frontier = deque([origin])
        while frontier:
            x = frontier.popleft()
            for y in self._adjacency[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    frontier.append(y)
        return dist

    def diameter(self) -> int:
        """Longest shortest route in hops; topology must be connected."""
        best = 0
        for n in self.nodes:
            dist = self.shortest_hop_distances(n)
            if len(dist) != self.n_nodes:
                raise DisconnectedGraphError(f"node {self.label(n)} cannot reach all nodes")
            best = max(best, max(dist.values()))
        return best


def validate_topology(topology: Topology) -> None:
    """Check all topology invariants; raises a TopologyError subclass naming
    the offending element."""
    n = topology.n_nodes
    seen: set[tuple[NodeId, NodeId]] = set()
    for a, b, _spec in topology.link_list:
        if not (0 <= a < n and 0 <= b < n):
            raise TopologyError(f"link endpoint {max(a, b)} is not a node")
        if a == b:
            raise SelfLinkError(f"self-link at node {topology.label(a)}")
        key = Topology._key(a, b)
        if key in seen:
            raise DuplicateLinkError(
                f"duplicate link {topology.label(a)}-{topology.label(b)}"
            )
        seen.add(key)
    if n == 0:
        raise DisconnectedGraphError("empty topology")
    reach = topology.shortest_hop_distances(0)
    if len(reach) != n:
        missing = sorted(set(topology.nodes) - set(reach))
        names = ", ".join(topology.label(m) for m in missing)
        raise DisconnectedGraphError(f"unreachable node(s): {names}")


@dataclass(slots=True)
class Message:
    """A routable unit of sensor data (or a ping probe).

    payload_bits shrinks when the data-reduction computation is applied;
    `computed` flips false->true at most once. hops_taken counts Forward
    actions applied so far.
    """

    id: int
    source: NodeId
    destination: NodeId
    payload_bits: int
    created_at: float
    hops_taken: int = 0
    computed: bool = False
    is_ping: bool = False
    is_measured: bool = False

    def __post_init__(self):
        if self.payload_bits <= 0:
            raise ValueError("payload_bits must be > 0")


@dataclass(frozen=True, slots=True)
class Forward:
    """Route the message to a neighbor."""

    neighbor: NodeId


@dataclass(frozen=True, slots=True)
class ComputeLocally:
    """Run the data reduction here instead of forwarding raw data."""


COMPUTE_LOCALLY = ComputeLocally()

Action = Union[Forward, ComputeLocally]
