"""Request bookkeeping and the two headline metrics, Nb_msg and Rtime."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .radio import MessageLedger


class MetricsError(ValueError):
    """Undefined metric (no measured requests) or inconsistent accounting."""


@dataclass(slots=True)
class RequestRecord:
    request_id: int
    issued_at: float
    warmup: bool
    resolved_at: Optional[float] = None
    failed_at: Optional[float] = None
    units: int = 0
    retries: int = 0
    returned_host: Optional[int] = None
    truth_host: Optional[int] = None

    @property
    def status(self) -> str:
        if self.resolved_at is not None:
            return "resolved"
        if self.failed_at is not None:
            return "failed"
        return "in_flight"

    @property
    def duration(self) -> Optional[float]:
        if self.resolved_at is not None:
            return self.resolved_at - self.issued_at
        if self.failed_at is not None:
            return self.failed_at - self.issued_at
        return None


@dataclass
class MetricsReport:
    protocol: str
    lam: float
    node_mob_target: Optional[float]
    measured_mob: float
    code_band: str
    seed: int
    n_requests: int            # measured (non-warm-up) requests
    n_resolved: int
    n_failed: int
    n_in_flight: int
    n_warmup: int
    total_messages: int        # every unit charged over the whole run
    by_kind: dict
    rtime_s: Optional[float]
    aborted: bool = False
    truth_checked: int = 0
    truth_matches: int = 0

    @property
    def nb_msg(self) -> Optional[float]:
        if self.n_requests == 0:
            return None
        return self.total_messages / self.n_requests


def compute_nb_msg(report: MetricsReport) -> float:
    """Total message units per measured request.

    Counts every unit charged in the run (maintenance, announcements, updates
    and lookups alike) against the measured request population.
    """
    if report.n_requests == 0:
        raise MetricsError("Nb_msg undefined: no measured requests")
    return report.total_messages / report.n_requests


def compute_rtime(records: Sequence[RequestRecord]) -> float:
    """Mean request duration in seconds over measured resolved + failed requests.

    Failed requests contribute the time until their failure was declared;
    requests still in flight at the end of the run are excluded.
    """
    durations = [r.duration for r in records
                 if not r.warmup and r.duration is not None]
    if not durations:
        raise MetricsError("Rtime undefined: no completed measured requests")
    return sum(durations) / len(durations)


def build_report(protocol: str, lam: float, node_mob_target: Optional[float],
                 measured_mob: float, code_band: str, seed: int,
                 records: Sequence[RequestRecord], ledger: MessageLedger,
                 aborted: bool = False) -> MetricsReport:
    measured = [r for r in records if not r.warmup]
    n_resolved = sum(1 for r in measured if r.status == "resolved")
    n_failed = sum(1 for r in measured if r.status == "failed")
    n_in_flight = sum(1 for r in measured if r.status == "in_flight")
    total = ledger.total_units
    recount = ledger.recount()
    if recount != total:
        raise MetricsError(f"ledger total {total} != raw-log recount {recount}")
    truth_checked = sum(1 for r in measured
                        if r.status == "resolved" and r.returned_host is not None)
    truth_matches = sum(1 for r in measured
                        if r.status == "resolved" and r.returned_host is not None
                        and r.returned_host == r.truth_host)
    try:
        rtime = compute_rtime(records)
    except MetricsError:
        rtime = None
    return MetricsReport(
        protocol=protocol,
        lam=lam,
        node_mob_target=node_mob_target,
        measured_mob=measured_mob,
        code_band=code_band,
        seed=seed,
        n_requests=len(measured),
        n_resolved=n_resolved,
        n_failed=n_failed,
        n_in_flight=n_in_flight,
        n_warmup=len(records) - len(measured),
        total_messages=total,
        by_kind=dict(sorted(ledger.by_kind.items())),
        rtime_s=rtime,
        aborted=aborted,
        truth_checked=truth_checked,
        truth_matches=truth_matches,
    )
