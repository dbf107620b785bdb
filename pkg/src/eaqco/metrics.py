"""Trace collection and aggregation: delivery timings, transmitted-bytes and
joules energy ledgers, Q-value traces, action logs, multi-trial statistics,
and the cross-checking audits every run must satisfy.

All times are seconds (9 decimal places in CSV output); sizes are bits unless
a column name ends in _bytes.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path

TIME_FMT = "{:.9f}"

# Audit tolerances: timeline decomposition is exact at trace precision (1 ns);
# joule sums are compared relatively because the two accounting paths add the
# same terms in different orders.
TIME_AUDIT_TOL = 1e-9
JOULES_REL_TOL = 1e-9


class AuditError(AssertionError):
    """A run violated one of its conservation or decomposition audits."""


@dataclass(slots=True)
class DeliveryRecord:
    """One message's journey from creation to delivery."""

    msg_id: int
    created_at: float
    delivered_at: float
    hops: int
    origin_bits: int
    delivered_bits: int
    compute_nodes: list  # labels of nodes that reduced the payload in-network
    is_measured: bool

    @property
    def processing_time(self) -> float:
        return self.delivered_at - self.created_at


@dataclass(slots=True)
class QTraceSample:
    """Q-values visible at one action selection of an instrumented node."""

    time: float
    node: str
    destination: str
    values: dict  # action label -> estimate (compute absent when ineligible)
    chosen: str


@dataclass(slots=True)
class MessageAudit:
    """Per-message audit trail: every link hop and compute visit in order.

    Segments are ('hop', sent_at, departure, arrival, bits, joules) or
    ('compute', node_label, enqueued, start, done).
    """

    msg_id: int
    created_at: float
    origin_bits: int
    is_measured: bool
    segments: list = field(default_factory=list)
    delivered_at: float | None = None
    dropped: str | None = None  # reason, when the message was dropped


@dataclass
class TraceSet:
    """Everything recorded by one simulation trial."""

    seed: int
    labels: tuple
    qtrace_columns: list = field(default_factory=list)
    deliveries: list = field(default_factory=list)
    qtrace: list = field(default_factory=list)
    actions: list = field(default_factory=list)  # (time, node label, action label)
    audits: dict = field(default_factory=dict)  # msg_id -> MessageAudit
    originated: int = 0
    delivered: int = 0
    dropped: int = 0
    measured_originated: int = 0
    measured_delivered: int = 0
    measured_dropped: int = 0
    drop_reasons: dict = field(default_factory=dict)
    tx_bits_measured: int = 0  # event-path accounting, incremented per transmit
    tx_joules_measured: float = 0.0
    battery_used: dict = field(default_factory=dict)  # node label -> batt_used at end
    energy_rows: list = field(default_factory=list)  # (msg_id, hops, bits, joules)
    e_total_bits: int = 0
    e_total_joules: float = 0.0
    sim_end: float = 0.0

    # -- derived metrics ----------------------------------------------------

    def measured_deliveries(self) -> list:
        return [d for d in self.deliveries if d.is_measured]

    def mean_processing_time(self) -> float:
        recs = self.measured_deliveries()
        if not recs:
            return float("nan")
        return sum(r.processing_time for r in recs) / len(recs)

    @property
    def e_total_bytes(self) -> float:
        return self.e_total_bits / 8.0

    def finish(self) -> None:
        """Build the per-message energy ledger from the audit trails and run
        the two-path accounting check against the event-path totals."""
        self.energy_rows = []
        total_bits = 0
        total_joules = 0.0
        for audit in self.audits.values():
            if not audit.is_measured:
                continue
            hops = 0
            bits = 0
            joules = 0.0
            for seg in audit.segments:
                if seg[0] == "hop":
                    hops += 1
                    bits += seg[4]
                    joules += seg[5]
            self.energy_rows.append((audit.msg_id, hops, bits, joules))
            total_bits += bits
            total_joules += joules
        self.energy_rows.sort()
        self.e_total_bits = total_bits
        self.e_total_joules = total_joules
        verify_trace(self)


# -- audits ------------------------------------------------------------------


def audit_message(audit: MessageAudit) -> None:
    """Walk a message's segment timeline and check it is contiguous and, for
    delivered messages, lands exactly on the recorded delivery time."""
    t = audit.created_at
    for seg in audit.segments:
        if seg[0] == "hop":
            _, sent_at, departure, arrival, _bits, _joules = seg
            if abs(sent_at - t) > TIME_AUDIT_TOL:
                raise AuditError(f"msg {audit.msg_id}: hop starts at {sent_at}, expected {t}")
            if departure < sent_at - TIME_AUDIT_TOL or arrival < departure:
                raise AuditError(f"msg {audit.msg_id}: hop times out of order")
            t = arrival
        else:
            _, _node, enqueued, start, done = seg
            if abs(enqueued - t) > TIME_AUDIT_TOL:
                raise AuditError(f"msg {audit.msg_id}: compute starts at {enqueued}, expected {t}")
            if start < enqueued - TIME_AUDIT_TOL or done < start:
                raise AuditError(f"msg {audit.msg_id}: compute times out of order")
            t = done
    if audit.delivered_at is not None and t != audit.delivered_at:
        raise AuditError(
            f"msg {audit.msg_id}: decomposition ends at {t!r}, delivered at {audit.delivered_at!r}"
        )


def verify_trace(trace: TraceSet) -> None:
    """Conservation, per-message decomposition, and two-path energy accounting."""
    residual = trace.originated - trace.delivered - trace.dropped
    if residual != 0:
        raise AuditError(
            f"conservation violated: originated {trace.originated} != "
            f"delivered {trace.delivered} + dropped {trace.dropped}"
        )
    for audit in trace.audits.values():
        audit_message(audit)
    for rec in trace.deliveries:
        audit = trace.audits[rec.msg_id]
        hops = sum(1 for seg in audit.segments if seg[0] == "hop")
        if hops != rec.hops:
            raise AuditError(f"msg {rec.msg_id}: hops_taken {rec.hops} != {hops} transmit events")
    ledger_bits = sum(row[2] for row in trace.energy_rows)
    if ledger_bits != trace.tx_bits_measured:
        raise AuditError(
            f"energy accounting disagrees: ledger {ledger_bits} bits, "
            f"event path {trace.tx_bits_measured} bits"
        )
    ledger_joules = sum(row[3] for row in trace.energy_rows)
    scale = max(abs(ledger_joules), abs(trace.tx_joules_measured), 1.0)
    if abs(ledger_joules - trace.tx_joules_measured) > JOULES_REL_TOL * scale:
        raise AuditError("energy accounting disagrees on joules")
    for label, used in trace.battery_used.items():
        if not (0.0 <= used <= 1.0):
            raise AuditError(f"node {label}: batt_used {used} outside [0, 1]")


# -- aggregation ---------------------------------------------------------------


def e_total_static(s_bytes: int, h: int, p: int) -> int:
    """Transmitted-bytes total for a fixed route: size x hops x messages."""
    if s_bytes <= 0 or h <= 0 or p < 0:
        raise ValueError("size and hops must be positive, count non-negative")
    return s_bytes * h * p


def aggregate_trials(traces: list) -> dict:
    """Mean and population standard deviation of the headline metrics across
    trials, with the per-trial rows retained."""
    if not traces:
        raise ValueError("aggregate_trials requires at least one trace")
    rows = []
    for t in traces:
        rows.append(
            {
                "seed": t.seed,
                "mean_processing_time": t.mean_processing_time(),
                "e_total_bytes": t.e_total_bytes,
                "e_total_joules": t.e_total_joules,
                "originated": t.originated,
                "delivered": t.delivered,
                "dropped": t.dropped,
                "measured_delivered": t.measured_delivered,
                "measured_dropped": t.measured_dropped,
                "sim_end": t.sim_end,
            }
        )

    def stats(key):
        vals = [r[key] for r in rows]
        return {
            "mean": statistics.fmean(vals),
            "stddev": statistics.pstdev(vals),  # population formula
        }

    return {
        "trials": len(rows),
        "per_trial": rows,
        "processing_time": stats("mean_processing_time"),
        "e_total_bytes": stats("e_total_bytes"),
        "e_total_joules": stats("e_total_joules"),
    }


# -- trace analysis helpers -----------------------------------------------------


def qtrace_samples(traces, node: str, destination: str | None = None) -> list:
    """Pool instrumented-node samples across trials, optionally filtered to one
    destination, in time order per trial."""
    out = []
    for t in traces:
        for s in t.qtrace:
            if s.node != node:
                continue
            if destination is not None and s.destination != destination:
                continue
            out.append(s)
    return out


def qtrace_variance(traces, node: str, destination: str | None = None) -> dict:
    """Per-action sample variance of the pooled Q-trace (population formula)."""
    samples = qtrace_samples(traces, node, destination)
    by_action: dict[str, list[float]] = {}
    for s in samples:
        for action, v in s.values.items():
            by_action.setdefault(action, []).append(v)
    return {
        a: (statistics.pvariance(vals) if len(vals) > 1 else 0.0)
        for a, vals in sorted(by_action.items())
    }


def forward_slope(traces, node: str, destination: str | None = None) -> float:
    """Least-squares slope of all forward-action Q samples over time."""
    xs, ys = [], []
    for s in qtrace_samples(traces, node, destination):
        for action, v in s.values.items():
            if action.startswith("forward_"):
                xs.append(s.time)
                ys.append(v)
    if len(xs) < 2:
        return float("nan")
    return statistics.linear_regression(xs, ys).slope


def quartile_split(samples: list) -> list:
    """Split a time-ordered sample list into four near-equal chunks."""
    n = len(samples)
    bounds = [round(i * n / 4) for i in range(5)]
    return [samples[bounds[i] : bounds[i + 1]] for i in range(4)]


def compute_q_quartile_means(traces, node: str) -> list:
    """Mean of the compute estimate per quartile of compute-eligible samples."""
    samples = [s for s in qtrace_samples(traces, node) if "compute" in s.values]
    samples.sort(key=lambda s: s.time)
    return [
        statistics.fmean(s.values["compute"] for s in chunk) if chunk else float("nan")
        for chunk in quartile_split(samples)
    ]


def compute_share_quartiles(traces, node: str) -> list:
    """Fraction of compute-eligible selections that chose compute, per quartile."""
    samples = [s for s in qtrace_samples(traces, node) if "compute" in s.values]
    samples.sort(key=lambda s: s.time)
    shares = []
    for chunk in quartile_split(samples):
        if not chunk:
            shares.append(float("nan"))
            continue
        shares.append(sum(1 for s in chunk if s.chosen == "compute") / len(chunk))
    return shares


# -- export ---------------------------------------------------------------------


def export(trace: TraceSet, outdir) -> None:
    """Write the per-trial trace files: deliveries.csv (measured stream),
    qtrace.csv, energy.csv, actions.csv."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "deliveries.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            [
                "msg_id",
                "created_at",
                "delivered_at",
                "processing_time",
                "hops",
                "origin_bits",
                "delivered_bits",
                "compute_nodes",
            ]
        )
        for r in sorted(trace.measured_deliveries(), key=lambda r: r.msg_id):
            w.writerow(
                [
                    r.msg_id,
                    TIME_FMT.format(r.created_at),
                    TIME_FMT.format(r.delivered_at),
                    TIME_FMT.format(r.processing_time),
                    r.hops,
                    r.origin_bits,
                    r.delivered_bits,
                    ";".join(r.compute_nodes),
                ]
            )

    with open(out / "qtrace.csv", "w", newline="") as f:
        w = csv.writer(f)
        cols = list(trace.qtrace_columns)
        w.writerow(["time", "node", "destination", "chosen"] + cols)
        for s in trace.qtrace:
            row = [TIME_FMT.format(s.time), s.node, s.destination, s.chosen]
            row += [repr(s.values[c]) if c in s.values else "" for c in cols]
            w.writerow(row)

    with open(out / "energy.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["msg_id", "hops", "transmitted_bits", "transmitted_bytes", "joules"])
        for msg_id, hops, bits, joules in trace.energy_rows:
            w.writerow([msg_id, hops, bits, repr(bits / 8.0), repr(joules)])

    with open(out / "actions.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["time", "node", "action"])
        for t, node, action in trace.actions:
            w.writerow([TIME_FMT.format(t), node, action])


def write_summary(path, payload: dict) -> None:
    """Deterministic JSON dump (sorted keys, stable float repr)."""
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
