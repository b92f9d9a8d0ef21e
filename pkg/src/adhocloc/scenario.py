"""Scenario assembly and execution.

Wires one configuration into a runnable simulation: waypoint mobility, the
radio substrate, one roaming code with its migration process, the chosen
localization protocol and a Poisson stream of localization requests from the
mother station. Requests issued before the warm-up cutoff run normally but
stay out of the metrics. A watchdog aborts the run when the network stays
partitioned longer than partition_grace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .config import ScenarioConfig
from .engine import Engine, EventKind, RngStreams
from .metrics import MetricsReport, RequestRecord, build_report
from .mobility import RandomWaypointModel, network_mobility
from .protocols import (CodeMigrationProcess, LocalizationProtocol, MobileCode,
                        ScenarioContext, make_protocol)
from .radio import MessageLedger, Radio


class ScenarioAborted(RuntimeError):
    """The network stayed partitioned past the configured grace period."""

    def __init__(self, at: float, since: float):
        super().__init__(f"network partitioned since t={since:.3f}, "
                         f"still split at t={at:.3f}")
        self.at = at
        self.since = since


class InvariantViolation(RuntimeError):
    """A cross-cutting simulation invariant failed; results are untrustworthy."""


@dataclass
class ScenarioResult:
    cfg: ScenarioConfig
    report: MetricsReport
    records: list[RequestRecord]
    ledger: MessageLedger
    engine: Engine
    model: RandomWaypointModel
    radio: Radio
    protocol: LocalizationProtocol
    mover: CodeMigrationProcess
    aborted: bool = False
    abort_reason: Optional[str] = None


class _PartitionWatchdog:
    def __init__(self, radio: Radio, engine: Engine, grace: float, duration: float):
        self.radio = radio
        self.engine = engine
        self.grace = grace
        self.duration = duration
        self.split_since: Optional[float] = None

    def start(self) -> None:
        if self.duration >= 1.0:
            self.engine.schedule(1.0, EventKind.TIMER_EXPIRY, self._check)

    def _check(self) -> None:
        t = self.engine.now
        if self.radio.connected(t):
            self.split_since = None
        elif self.split_since is None:
            self.split_since = t
        elif t - self.split_since >= self.grace:
            raise ScenarioAborted(t, self.split_since)
        nxt = t + 1.0
        if nxt <= self.duration:
            self.engine.schedule(nxt, EventKind.TIMER_EXPIRY, self._check)


def _draw_arrivals(streams: RngStreams, lam: float, duration: float) -> list[float]:
    rng = streams.workload
    arrivals = []
    t = 0.0
    while True:
        t += float(rng.exponential(1.0 / lam))
        if t > duration:
            return arrivals
        arrivals.append(t)


def run_scenario(cfg: ScenarioConfig, trace: bool = False) -> ScenarioResult:
    cfg = cfg.replace()  # validate a private copy
    engine = Engine(trace=trace)
    streams = RngStreams(cfg.seed)
    smin, smax = cfg.node_speed
    model = RandomWaypointModel(cfg.n_nodes, cfg.area[0], cfg.area[1],
                                smin, smax, cfg.pause_time,
                                lambda node: streams.substream("mobility", node),
                                horizon=cfg.duration)
    ledger = MessageLedger()
    radio = Radio(model, cfg.range, cfg.per_hop_latency, ledger)
    code = MobileCode(code_id=0, mother=cfg.mother, host=cfg.mother,
                      jump_rate=cfg.jump_rate, band=cfg.code_band)
    ctx = ScenarioContext(cfg, engine, streams, model, radio, ledger, code)
    protocol = make_protocol(cfg.protocol, ctx)
    mover = CodeMigrationProcess(ctx, protocol)

    records: list[RequestRecord] = []
    for i, at in enumerate(_draw_arrivals(streams, cfg.lam, cfg.duration)):
        record = RequestRecord(request_id=i, issued_at=at,
                               warmup=(at < cfg.warmup))
        records.append(record)
        engine.schedule(at, EventKind.REQUEST_ARRIVAL,
                        lambda r=record: protocol.locate(r))

    watchdog = _PartitionWatchdog(radio, engine, cfg.partition_grace, cfg.duration)
    protocol.start()
    mover.start()
    watchdog.start()

    aborted = False
    abort_reason = None
    try:
        engine.run_until(cfg.duration)
    except ScenarioAborted as stop:
        aborted = True
        abort_reason = str(stop)

    for record in records:
        record.units = ledger.units_for_request(record.request_id)

    statuses = {"resolved": 0, "failed": 0, "in_flight": 0}
    for record in records:
        statuses[record.status] += 1
    if sum(statuses.values()) != len(records):
        raise InvariantViolation("request statuses do not partition the workload")
    if ledger.recount() != ledger.total_units:
        raise InvariantViolation(
            f"message accounting drifted: total {ledger.total_units}, "
            f"recount {ledger.recount()}")

    measured_mob = network_mobility(model, cfg.duration, cfg.metric_dt)
    report = build_report(cfg.protocol, cfg.lam, cfg.mob_target, measured_mob,
                          cfg.code_band, cfg.seed, records, ledger,
                          aborted=aborted)
    return ScenarioResult(cfg, report, records, ledger, engine, model, radio,
                          protocol, mover, aborted, abort_reason)
