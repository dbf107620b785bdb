"""Link energy accounting and per-node battery state.

The transmit-energy model charges the sender the expected cost of getting a
message across an acknowledged wireless link (retransmission expectation is
folded into the reception probability); the energy factor turns the battery
level into a multiplier on forwarding cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LinkEnergyParams:
    """Radio and link parameters for the expected-transmit-energy model.

    reception_probability: probability a single transmission is received.
    xmtr_power_w / rcvr_power_w: transmit and receive power draw, watts.
    data_rate_bps / ack_rate_bps: radio data and acknowledgement rates.
    ack_bits: size of the link-layer acknowledgement packet.
    """

    reception_probability: float
    xmtr_power_w: float
    rcvr_power_w: float
    data_rate_bps: float
    ack_rate_bps: float
    ack_bits: float

    def __post_init__(self):
        if not (0.0 < self.reception_probability <= 1.0):
            raise ValueError("reception_probability must be in (0, 1]")
        for name in ("xmtr_power_w", "rcvr_power_w", "data_rate_bps", "ack_rate_bps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.ack_bits < 0:
            raise ValueError("ack_bits must be >= 0")


# Low-rate, sub-watt radio profile in the LoRaWAN style. Every value is
# config-visible and can be overridden per scenario; nothing downstream
# assumes these numbers.
LORAWAN_LIKE = LinkEnergyParams(
    reception_probability=1.0,
    xmtr_power_w=0.1,
    rcvr_power_w=0.01,
    data_rate_bps=5470.0,
    ack_rate_bps=5470.0,
    ack_bits=96.0,
)

PROFILES = {"lorawan-like": LORAWAN_LIKE}


def expected_transmit_energy(params: LinkEnergyParams, payload_bits: float) -> float:
    """Expected joules to transmit `payload_bits` and collect the link ACK.

    Upper-bound expectation over retransmissions, used as the point estimate:
    (1/p^2) * P_xmtr * bits/r_data + (1/p) * (P_rcvr/r_ack) * ack_bits.
    """
    if payload_bits < 0:
        raise ValueError("payload_bits must be >= 0")
    p = params.reception_probability
    tx = (1.0 / (p * p)) * (params.xmtr_power_w * payload_bits / params.data_rate_bps)
    ack = (1.0 / p) * (params.rcvr_power_w / params.ack_rate_bps * params.ack_bits)
    return tx + ack


@dataclass
class BatteryState:
    """Per-node energy reserve.

    capacity_j may be math.inf for an effectively unlimited battery (the
    fraction used then stays 0). msn_remain is the fraction of planned
    mission time remaining; 1.0 disables mission-time scaling.
    """

    capacity_j: float = math.inf
    consumed_j: float = 0.0
    msn_remain: float = 1.0

    def __post_init__(self):
        if self.capacity_j <= 0:
            raise ValueError("capacity_j must be > 0")
        if not (0.0 <= self.consumed_j <= self.capacity_j):
            raise ValueError("consumed_j must be in [0, capacity_j]")
        if not (0.0 <= self.msn_remain <= 1.0):
            raise ValueError("msn_remain must be in [0, 1]")

    @property
    def batt_used(self) -> float:
        """Fraction of capacity consumed; 0 for an infinite battery."""
        if math.isinf(self.capacity_j):
            return 0.0
        return self.consumed_j / self.capacity_j

    @property
    def depleted(self) -> bool:
        return self.consumed_j >= self.capacity_j

    def drain(self, joules: float) -> None:
        """Consume energy, clamped at capacity. Depleted nodes stay in the
        topology but stop originating and forwarding."""
        if joules < 0:
            raise ValueError("drain amount must be >= 0")
        self.consumed_j = min(self.capacity_j, self.consumed_j + joules)


def energy_factor(battery: BatteryState, floor: float | None = None) -> float:
    """Forwarding-cost multiplier that grows exponentially as the battery
    drains: 0.001 * 10^(4 * batt_used) * msn_remain.

    Spans 0.001 (full battery) to 10.0 (fully consumed) when msn_remain is 1.
    `floor` optionally clamps the factor from below (config `ef_floor`), so a
    fresh battery can be made cost-neutral instead of discounted.
    """
    ef = 0.001 * 10.0 ** (4.0 * battery.batt_used) * battery.msn_remain
    if floor is not None and ef < floor:
        ef = floor
    return ef
