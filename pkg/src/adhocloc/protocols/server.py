"""Centralized localization: one mobile server agent owns the whole database.

The node closest to the network centroid hosts the agent. Every station
diffuses its position network-wide once per central_report_period, the code's
host unicasts a location update after each jump, and requesters query the
agent, get the database's host entry back, then contact that host; a stale
entry costs a re-query, up to max_retries. A periodic re-election moves the
agent (and its database, charged per hop at one unit per ten entries) to a
better-centered node when the gain clears handoff_threshold, followed by a
network-wide announcement. Queries addressed to an ex-host chase the agent
through the forwarding pointer each ex-host keeps.

The agent serializes everything it ingests through a single FIFO worker with
a fixed per-message service time, so its response latency degrades as report
and query traffic converges on it.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Optional

from ..engine import Engine, EventKind
from ..geometry import centroid, dist, elect_server
from ..metrics import RequestRecord
from ..radio import MessageKind
from .base import LocalizationProtocol, ScenarioContext

#: longest chain of stale-host forwards a message may follow
CHASE_BUDGET = 8


class ServerAgent:
    """One FIFO worker with a fixed per-message service time.

    `process` enqueues a unit of work arriving at `arrival`, schedules
    `action` at its completion instant and returns that instant.
    """

    def __init__(self, engine: Engine, host: int, service_time: float,
                 zone: Optional[int] = None):
        self.engine = engine
        self.host = host
        self.service_time = service_time
        self.zone = zone
        self.busy_until = 0.0
        self.code_db: Dict[int, int] = {}
        self.station_pos: Dict[int, tuple[float, float]] = {}
        self.processed = 0

    def process(self, arrival: float, action: Callable[[], None]) -> float:
        start = max(arrival, self.busy_until)
        done = start + self.service_time
        self.busy_until = done
        self.processed += 1
        self.engine.schedule(done, EventKind.TIMER_EXPIRY, action)
        return done

    def entry_count(self) -> int:
        return len(self.code_db) + len(self.station_pos)


class CentralizedProtocol(LocalizationProtocol):
    name = "centralized"

    def __init__(self, ctx: ScenarioContext):
        super().__init__(ctx)
        self.agent: Optional[ServerAgent] = None
        self.known_server: List[int] = [0] * self.cfg.n_nodes
        self.forward_map: Dict[int, int] = {}
        self.handoffs = 0

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        pos, _ = self.radio.snapshot(0.0)
        ref = centroid(pos)
        host = elect_server(range(self.cfg.n_nodes), pos, ref)
        self.agent = ServerAgent(self.engine, host, self.cfg.server_service_time)
        self.known_server = [host] * self.cfg.n_nodes
        self._announce(0.0)
        self._send_location_update(self.code.host, 0.0)
        period = self.cfg.central_report_period
        for node in range(self.cfg.n_nodes):
            first = period * (node + 1) / self.cfg.n_nodes
            self.engine.schedule(first, EventKind.TIMER_EXPIRY,
                                 lambda v=node: self._report(v))
        self.engine.schedule(self.cfg.reelection_period,
                             EventKind.SERVER_REELECTION_TICK,
                             self._reelection_tick)

    def on_code_jump(self, old_host: int, new_host: int, t: float) -> None:
        self._send_location_update(new_host, t)

    # -- maintenance traffic ---------------------------------------------------

    def _report(self, node: int) -> None:
        t = self.engine.now
        pos, _ = self.radio.snapshot(t)
        payload = (float(pos[node, 0]), float(pos[node, 1]))
        flood = self.radio.flood(node, MessageKind.POSITION_REPORT, t, ttl=None)
        target = self.agent.host
        if flood.depths[target] >= 0:
            arrive = t + int(flood.depths[target]) * self.cfg.per_hop_latency
            self.engine.schedule(
                arrive, EventKind.MESSAGE_DELIVERY,
                lambda: self.agent.process(
                    self.engine.now,
                    lambda: self.agent.station_pos.__setitem__(node, payload)))
        # station clocks drift, so the reporting cadence jitters around the
        # configured period instead of staying phase-locked
        gap = self.cfg.central_report_period * float(
            self.ctx.streams.protocol.uniform(0.75, 1.25))
        self.engine.schedule(t + gap, EventKind.TIMER_EXPIRY,
                             lambda: self._report(node))

    def _send_location_update(self, src: int, t: float) -> None:
        claimed = self.code.host
        code_id = self.code.code_id

        def stored(ok: bool) -> None:
            if ok:
                self.agent.code_db[code_id] = claimed

        self._to_agent(src, MessageKind.SERVER_UPDATE, t, None, stored)

    def _reelection_tick(self) -> None:
        t = self.engine.now
        pos, _ = self.radio.snapshot(t)
        ref = centroid(pos)
        best = elect_server(range(self.cfg.n_nodes), pos, ref)
        incumbent = self.agent.host
        if best != incumbent:
            gain = dist(pos[incumbent], ref) - dist(pos[best], ref)
            if gain > self.cfg.handoff_threshold:
                path = self.radio.route(incumbent, best, t)
                if path is not None:
                    per_hop = math.ceil(self.agent.entry_count() / 10)
                    self.ctx.ledger.charge(MessageKind.AGENT_MIGRATION,
                                           incumbent, best,
                                           (len(path) - 1) * per_hop, t, None)
                    self.forward_map[incumbent] = best
                    self.agent.host = best
                    self.handoffs += 1
                    self._announce(t)
        self.engine.schedule(t + self.cfg.reelection_period,
                             EventKind.SERVER_REELECTION_TICK,
                             self._reelection_tick)

    def _announce(self, t: float) -> None:
        holder = self.agent.host
        flood = self.radio.flood(holder, MessageKind.SERVER_UPDATE, t, ttl=None)
        lat = self.cfg.per_hop_latency
        for v in flood.reached:
            depth = int(flood.depths[v])
            if depth == 0:
                self.known_server[v] = holder
            else:
                self.engine.schedule(
                    t + depth * lat, EventKind.MESSAGE_DELIVERY,
                    lambda v=v: self.known_server.__setitem__(v, holder))

    # -- agent addressing --------------------------------------------------------

    def _to_agent(self, sender: int, kind: MessageKind, t: float,
                  request_id: Optional[int],
                  on_processed: Callable[[bool], None],
                  budget: int = CHASE_BUDGET) -> None:
        """Route a message to wherever the sender believes the agent sits,
        chasing forwarding pointers past stale addresses; on_processed fires
        with True at service completion, False when delivery dies."""
        self._chase_step(sender, self.known_server[sender], kind, t,
                         request_id, on_processed, budget)

    def _chase_step(self, sender: int, target: int, kind: MessageKind, t: float,
                    request_id: Optional[int],
                    on_processed: Callable[[bool], None], budget: int) -> None:
        delivery = self.radio.unicast(sender, target, kind, t, request_id=request_id)
        if delivery is None:
            on_processed(False)
            return

        def arrived() -> None:
            now = self.engine.now
            if target == self.agent.host:
                self.agent.process(now, lambda: on_processed(True))
                return
            successor = self.forward_map.get(target)
            if successor is None or budget <= 0:
                on_processed(False)
                return
            self._chase_step(target, successor, kind, now, request_id,
                             on_processed, budget - 1)

        self.engine.schedule(delivery.arrival, EventKind.MESSAGE_DELIVERY, arrived)

    # -- localization ---------------------------------------------------------------

    def locate(self, record: RequestRecord) -> None:
        if self._local_hit(record):
            return
        self._attempt(record, self.cfg.max_retries)

    def _attempt(self, record: RequestRecord, retries_left: int) -> None:
        t = self.engine.now
        mother = self.code.mother

        def served(ok: bool) -> None:
            if not ok:
                self._retry(record, retries_left)
                return
            now = self.engine.now
            claimed = self.agent.code_db.get(self.code.code_id)
            truth = self.code.host
            if claimed is None:
                self._retry(record, retries_left)
                return
            reply = self.radio.unicast(self.agent.host, mother,
                                       MessageKind.SERVER_REPLY, now,
                                       request_id=record.request_id)
            if reply is None:
                self._retry(record, retries_left)
                return
            self.engine.schedule(
                reply.arrival, EventKind.MESSAGE_DELIVERY,
                lambda: self._reply_received(record, retries_left, claimed, truth))

        self._to_agent(mother, MessageKind.SERVER_QUERY, t,
                       record.request_id, served)

    def _reply_received(self, record: RequestRecord, retries_left: int,
                        claimed: int, truth: int) -> None:
        contact = self.radio.unicast(self.code.mother, claimed, MessageKind.DATA,
                                     self.engine.now, request_id=record.request_id)
        if contact is None:
            self._retry(record, retries_left)
            return
        self.engine.schedule(
            contact.arrival, EventKind.MESSAGE_DELIVERY,
            lambda: self._contact_arrived(record, retries_left, claimed, truth))

    def _contact_arrived(self, record: RequestRecord, retries_left: int,
                         claimed: int, truth: int) -> None:
        if self.code.host == claimed:
            self._resolve(record, self.engine.now, claimed, truth)
        else:
            self._retry(record, retries_left)

    def _retry(self, record: RequestRecord, retries_left: int) -> None:
        if retries_left > 0:
            record.retries += 1
            self._attempt(record, retries_left - 1)
        else:
            self._fail(record, self.engine.now)
