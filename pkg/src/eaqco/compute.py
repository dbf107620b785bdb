"""Per-node computation queue: FIFO in-place data reduction.

The queue-time observation made at enqueue is what feeds the learned
compute estimate; the reduction itself is a parameterized size transform,
not a real signal-processing kernel.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .core import Message


class AlreadyComputedError(Exception):
    """Data reduction may be applied to a message at most once."""


@dataclass(frozen=True)
class ReductionSpec:
    """How much the computation shrinks a payload and how long it takes.

    output bits = max(min_output_bits, ceil(input_bits * reduction_ratio)).
    Service time is constant per message by default; set service_time_per_bit_s
    for a payload-proportional mode.
    """

    reduction_ratio: float = 0.001
    min_output_bits: int = 512
    service_time_s: float = 0.005
    service_time_per_bit_s: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.reduction_ratio <= 1.0):
            raise ValueError("reduction_ratio must be in (0, 1]")
        if self.min_output_bits < 1:
            raise ValueError("min_output_bits must be >= 1")
        if self.service_time_s < 0 or self.service_time_per_bit_s < 0:
            raise ValueError("service times must be >= 0")

    def service_time(self, payload_bits: int) -> float:
        return self.service_time_s + self.service_time_per_bit_s * payload_bits

    def reduced_bits(self, payload_bits: int) -> int:
        return max(self.min_output_bits, math.ceil(payload_bits * self.reduction_ratio))


@dataclass
class ComputeQueue:
    """FIFO single-server computation queue for one node."""

    spec: ReductionSpec
    pending: deque = field(default_factory=deque)  # (message, enqueued_at)
    busy_until: float = 0.0

    def enqueue(self, msg: Message, now: float) -> float:
        """Append a raw message; returns its completion time.

        The observed compute time (completion - now) is the queue-length
        measurement reported to the learned compute estimate.
        """
        if msg.computed:
            raise AlreadyComputedError(f"message {msg.id} already reduced")
        start = max(now, self.busy_until)
        completion = start + self.spec.service_time(msg.payload_bits)
        self.pending.append((msg, now))
        self.busy_until = completion
        return completion

    def complete(self, msg: Message) -> Message:
        """Pop the head of the queue and apply the reduction in place."""
        if not self.pending or self.pending[0][0].id != msg.id:
            raise ValueError(f"message {msg.id} is not at the head of the compute queue")
        if msg.computed:
            raise AlreadyComputedError(f"message {msg.id} already reduced")
        self.pending.popleft()
        msg.payload_bits = self.spec.reduced_bits(msg.payload_bits)
        msg.computed = True
        return msg

    def __len__(self) -> int:
        return len(self.pending)
