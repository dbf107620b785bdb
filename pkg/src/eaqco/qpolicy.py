"""Learning and decision core: Q-table maintenance, the compute-locally
action, energy-weighted updates, epsilon-greedy selection, and the static
baseline policy.

Every estimate is a time in seconds: smaller is better, and action selection
is an argmin. The compute estimate is a single scalar per node (no
destination argument) because local reduction cost does not depend on where
the data is headed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Union

from .core import COMPUTE_LOCALLY, Action, Forward, Message, NodeId


class NoNeighborsError(Exception):
    pass


class NoEligibleActionError(Exception):
    pass


class UnknownDestinationError(Exception):
    pass


class NoRouteError(Exception):
    pass


@dataclass(frozen=True)
class Static:
    """Fixed next-hop table for one node: destination -> neighbor."""

    routes: Mapping[NodeId, NodeId]


@dataclass(frozen=True)
class QRouting:
    """Learned forwarding only; no compute action, no energy weighting."""


@dataclass(frozen=True)
class QCO:
    """Q-routing plus the compute-locally action."""


@dataclass(frozen=True)
class EAQCO:
    """QCO plus the battery-driven energy factor on the local-hop cost."""


PolicyKind = Union[Static, QRouting, QCO, EAQCO]


def allows_compute(policy: PolicyKind) -> bool:
    return isinstance(policy, (QCO, EAQCO))


def is_learned(policy: PolicyKind) -> bool:
    return not isinstance(policy, Static)


@dataclass(frozen=True)
class QAdvertisement:
    """One node's view shared with a neighbor on every ping response or data
    ack: the measured one-way time plus the sender's best estimate per known
    destination (including its own compute estimate where it would choose it)."""

    sender: NodeId
    one_way_time: float
    best_to: Mapping[NodeId, float]

    def __post_init__(self):
        if self.one_way_time < 0:
            raise ValueError("one_way_time must be >= 0")
        for d, v in self.best_to.items():
            if v < 0:
                raise ValueError(f"advertised estimate for {d} must be >= 0")


@dataclass
class QTable:
    """Learned delivery-time estimates owned by a single node.

    entries maps (neighbor, destination) -> estimated seconds to deliver via
    that neighbor; pairs never seen read as initial_q. compute_q is the
    scalar estimate for reducing a payload locally.
    """

    owner: NodeId
    neighbors: tuple[NodeId, ...]
    learning_rate: float = 0.1
    exploration: float = 0.1
    initial_q: float = 0.0
    compute_q: float = 0.0
    entries: dict[tuple[NodeId, NodeId], float] = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 < self.learning_rate <= 1.0):
            raise ValueError("learning_rate must be in (0, 1]")
        if not (0.0 <= self.exploration < 1.0):
            raise ValueError("exploration must be in [0, 1)")
        if self.initial_q < 0 or self.compute_q < 0:
            raise ValueError("estimates must be >= 0")
        self.neighbors = tuple(sorted(self.neighbors))

    # -- reads ------------------------------------------------------------

    def value(self, neighbor: NodeId, destination: NodeId) -> float:
        return self.entries.get((neighbor, destination), self.initial_q)

    def knows(self, destination: NodeId) -> bool:
        """True once any neighbor has an entry for this destination."""
        return any((y, destination) in self.entries for y in self.neighbors)

    def known_destinations(self) -> list[NodeId]:
        return sorted({d for (_, d) in self.entries})

    def lookup_min(self, destination: NodeId) -> tuple[NodeId, float]:
        """Best neighbor for a destination; ties go to the lowest NodeId."""
        if not self.neighbors:
            raise NoNeighborsError(f"node {self.owner} has no neighbors")
        best = min(self.neighbors, key=lambda y: (self.value(y, destination), y))
        return best, self.value(best, destination)

    # -- updates ----------------------------------------------------------

    def update_forward(
        self,
        neighbor: NodeId,
        destination: NodeId,
        adv: QAdvertisement,
        ef: float = 1.0,
    ) -> float:
        """Blend the acknowledged one-way time and the neighbor's advertised
        remainder into the (neighbor, destination) estimate.

        Target is ef * one_way + advertised; with ef = 1 this is the plain
        Q-routing update. A destination the local table has never seen is
        seeded with the target directly instead of blending from initial_q.
        """
        if adv.sender != neighbor:
            raise ValueError("advertisement sender does not match neighbor")
        if destination not in adv.best_to:
            raise UnknownDestinationError(
                f"advertisement from {neighbor} has no estimate for {destination}"
            )
        if ef < 0:
            raise ValueError("ef must be >= 0")
        target = ef * adv.one_way_time + adv.best_to[destination]
        key = (neighbor, destination)
        old = self.entries.get(key)
        if old is None:
            new = max(0.0, target)
        else:
            new = max(0.0, old + self.learning_rate * (target - old))
        self.entries[key] = new
        return new

    def update_compute(self, observed_compute_time: float) -> float:
        """Move the compute estimate toward an observed queue-plus-service time."""
        if observed_compute_time < 0:
            raise ValueError("observed_compute_time must be >= 0")
        self.compute_q += self.learning_rate * (observed_compute_time - self.compute_q)
        return self.compute_q

    def ingest(self, adv: QAdvertisement, ef: float = 1.0) -> None:
        """Fold a full advertisement into the table (ping response or data ack).

        Every advertised destination is applied through update_forward; the
        sender itself counts as an implicitly advertised destination at cost
        zero, which is what lets ping rounds map the network outward from
        empty tables.
        """
        sender = adv.sender
        if sender != self.owner:
            self_adv = QAdvertisement(sender, adv.one_way_time, {sender: 0.0})
            self.update_forward(sender, sender, self_adv, ef)
        for d in sorted(adv.best_to):
            if d == self.owner:
                continue
            self.update_forward(sender, d, adv, ef)

    # -- decisions ----------------------------------------------------------

    def eligible_actions(self, msg: Message, allow_compute: bool) -> list[Action]:
        """Forward to any neighbor; compute only for raw (unreduced) data
        messages under a policy that offers the compute action."""
        actions: list[Action] = [Forward(y) for y in self.neighbors]
        if allow_compute and not msg.computed and not msg.is_ping:
            actions.append(COMPUTE_LOCALLY)
        return actions

    def action_values(self, msg: Message, allow_compute: bool) -> list[tuple[Action, float]]:
        return [
            (a, self.compute_q if a is COMPUTE_LOCALLY else self.value(a.neighbor, msg.destination))
            for a in self.eligible_actions(msg, allow_compute)
        ]

    def select_action(self, msg: Message, rng: random.Random, allow_compute: bool) -> Action:
        """Epsilon-greedy argmin over the eligible actions.

        Ties: compute loses to any forward; forward ties go to the lowest
        NodeId. With exploration 0 the choice is a pure function of the table
        and message flags (no RNG draw is consumed).
        """
        if not self.neighbors:
            raise NoEligibleActionError(f"node {self.owner} is isolated")
        if msg.destination == self.owner:
            raise ValueError("select_action called at the destination")
        actions = self.eligible_actions(msg, allow_compute)
        if self.exploration > 0.0 and rng.random() < self.exploration:
            return actions[rng.randrange(len(actions))]
        best_fwd, best_val = self.lookup_min(msg.destination)
        if actions[-1] is COMPUTE_LOCALLY and self.compute_q < best_val:
            return COMPUTE_LOCALLY
        return Forward(best_fwd)

    def make_advertisement(self, one_way_time: float, allow_compute: bool) -> QAdvertisement:
        """Snapshot this table for a ping response or data ack.

        best_to[d] = min over neighbors of the (neighbor, d) estimate, also
        considering the compute estimate when the policy would offer it —
        the receiver cannot tell whether we would forward or reduce in place.
        """
        best_to: dict[NodeId, float] = {}
        for d in self.known_destinations():
            v = min(self.value(y, d) for y in self.neighbors)
            if allow_compute and self.compute_q < v:
                v = self.compute_q
            best_to[d] = v
        return QAdvertisement(self.owner, one_way_time, best_to)


def static_next_hop(routes: Mapping[NodeId, NodeId], destination: NodeId) -> Action:
    """Next hop from a fixed route table; the static baseline never computes
    in-network."""
    try:
        return Forward(routes[destination])
    except KeyError:
        raise NoRouteError(f"no static route for destination {destination}") from None
