"""Forwarder-chain localization.

Every station the code leaves keeps a forwarding entry (successor, order).
Orders grow along the chain, the mother station is pinned at order zero, so
following entries of strictly increasing order always terminates at the host.
Requests walk the chain over direct radio links; a link whose successor moved
out of range is a break.

Two maintenance disciplines share the machinery:

* reactive: breaks are discovered by the walking request itself and repaired
  in band (search diffusion, replies, pointer rewrite), charged to the request;
  after a resolved request the chain collapses to the single link mother ->
  host and every bypassed station forgets its entry, so the structure carries
  no history between lookups;
* proactive: the chain persists; a periodic tick probes every link with a
  direct check message and repairs breaks as maintenance traffic; a walking
  request that hits a break parks at the broken station and resumes once the
  tick repair rewires it, failing after a bounded number of tick periods.

When the code lands on a station that already holds a pointer, the stretch
past that station is orphaned: no walk can reach it, but its members have no
way to know and keep maintaining (and answering repairs with) their entries.
Walks therefore defend themselves. Each walk remembers the stations it has
forwarded from, so a lap through wrapped-around stale pointers is detected on
the spot, and a walk that reaches a station with no pointer at all cannot
wait for maintenance that will never come. In both cases the walk runs its
own repair immediately, reactive or not, rewiring the station toward the best
answerer (a station with no pointer is grafted in just below its adoptee,
deleting nothing, since it holds no place in the order to bridge from).

A station concludes its successor is gone only after ack_timeout of silence,
so every break costs that much time before repair or parking starts.

A repair diffuses a search around the broken station. The current host and
every station of order higher than the searcher answer (each reply is charged).
The searcher reconnects to the sought successor, or to an answerer that is
nearer in hops than the sought one, preferring the highest order, then the
fewest hops, then the lowest id. Relay nodes on the adopted multi-hop path are
turned into chain members with interpolated orders so the rebuilt stretch stays
walkable over direct links; stations whose order falls inside the bridged
stretch but that are not on the new path drop out of the chain and forget
their entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from ..engine import Event, EventKind
from ..metrics import RequestRecord
from ..radio import MessageKind
from .base import LocalizationProtocol, ProtocolError, ScenarioContext

# A walk that exceeds this many chain steps, or a request that needs more than
# this many in-band repairs, is declared failed instead of looping.
MAX_WALK_FACTOR = 4
MAX_REPAIRS_PER_REQUEST = 8


@dataclass(slots=True)
class ForwarderEntry:
    """One station's pointer along the chain."""
    next_hop: int
    order: float


@dataclass(slots=True)
class _WalkState:
    steps: int = 0
    repairs: int = 0
    # stations this walk has already forwarded from; arriving at one again
    # means the chain wrapped back on itself and needs a repair, not a loop
    seen: set = field(default_factory=set)


class ForwarderProtocol(LocalizationProtocol):
    """Chain walker with pluggable break handling (reactive or proactive)."""

    def __init__(self, ctx: ScenarioContext, proactive: bool):
        super().__init__(ctx)
        self.proactive = proactive
        self.name = "forwarder_proactive" if proactive else "forwarder_reactive"
        self.entries: Dict[int, ForwarderEntry] = {}
        self._walks: Dict[int, _WalkState] = {}
        # station -> list of (record, timeout event) waiting for a tick repair
        self._parked: Dict[int, List[Tuple[RequestRecord, Event]]] = {}
        self._repair_active: set[int] = set()
        self._max_steps = MAX_WALK_FACTOR * ctx.cfg.n_nodes

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        if self.proactive:
            self.engine.schedule(self.cfg.chain_check_period,
                                 EventKind.CHAIN_CHECK_TICK, self._chain_tick)

    def on_code_jump(self, old_host: int, new_host: int, t: float) -> None:
        code = self.code
        order = 0.0 if old_host == code.mother else float(code.jumps - 1)
        self.entries[old_host] = ForwarderEntry(new_host, order)
        # a station hosting the code holds no pointer; if the code landed on
        # a chain member, the stretch past it is orphaned but its stations
        # cannot know that and keep maintaining their entries
        self.entries.pop(new_host, None)
        # walks parked at either end can move again: the old station has a
        # fresh in-range pointer and the new one now hosts the code
        self._release_parked(old_host)
        self._release_parked(new_host)

    # -- request walk ----------------------------------------------------------

    def locate(self, record: RequestRecord) -> None:
        if self._local_hit(record):
            return
        self._walks[record.request_id] = _WalkState()
        self._advance(record, self.code.mother)

    def _advance(self, record: RequestRecord, station: int) -> None:
        if record.resolved_at is not None or record.failed_at is not None:
            self._walks.pop(record.request_id, None)
            return
        t = self.engine.now
        state = self._walks[record.request_id]
        state.steps += 1
        if state.steps > self._max_steps:
            self._give_up(record, t)
            return
        code = self.code
        if station == code.host:
            truth = code.host
            reply = self.radio.unicast(station, code.mother,
                                       MessageKind.LOCATE_REPLY, t,
                                       request_id=record.request_id)
            if reply is None:
                self._give_up(record, t)
                return
            self.engine.schedule(reply.arrival, EventKind.MESSAGE_DELIVERY,
                                 lambda: self._complete(record, station, truth))
            return
        entry = self.entries.get(station)
        if station in state.seen:
            # the chain wrapped back on itself through stale pointers; the
            # walk's own trail proves it, so repair right here
            self._break(record, station, entry, t, force_repair=True)
            return
        if entry is None:
            # a station with no pointer has nothing to wait out: the walk
            # must search for the chain itself
            self._break(record, station, None, t, force_repair=True)
            return
        hop = self.radio.direct(station, entry.next_hop,
                                MessageKind.LOCATE_REQUEST, t,
                                request_id=record.request_id)
        if hop is None:
            self._break_after_timeout(record, station, entry, t)
            return
        state.seen.add(station)
        nxt = entry.next_hop
        self.engine.schedule(hop.arrival, EventKind.MESSAGE_DELIVERY,
                             lambda: self._advance(record, nxt))

    def _complete(self, record: RequestRecord, replier: int, truth: int) -> None:
        self._resolve(record, self.engine.now, replier, truth)
        self._walks.pop(record.request_id, None)
        if not self.proactive:
            # the answered request re-anchors the chain: one link, no history
            self.entries.clear()
            if replier != self.code.mother:
                self.entries[self.code.mother] = ForwarderEntry(replier, 0.0)

    def _give_up(self, record: RequestRecord, t: float) -> None:
        self._fail(record, t)
        self._walks.pop(record.request_id, None)

    # -- break handling --------------------------------------------------------

    def _break_after_timeout(self, record: RequestRecord, station: int,
                             anchor: ForwarderEntry, t: float) -> None:
        self.engine.schedule(t + self.cfg.ack_timeout, EventKind.TIMER_EXPIRY,
                             lambda: self._break(record, station, anchor,
                                                 self.engine.now))

    def _break(self, record: RequestRecord, station: int,
               anchor: Optional[ForwarderEntry], t: float,
               force_repair: bool = False) -> None:
        if record.resolved_at is not None or record.failed_at is not None:
            self._walks.pop(record.request_id, None)
            return
        if self.entries.get(station) is not anchor:
            # the chain was rewired while we waited out the ack; walk again
            self._advance(record, station)
            return
        if self.proactive and not force_repair:
            # an ordinary link break; the periodic check will notice it too,
            # so the walk parks and lets maintenance do the repair
            timeout_at = t + self.cfg.proactive_wait_ticks * self.cfg.chain_check_period
            ev = self.engine.schedule(timeout_at, EventKind.TIMER_EXPIRY,
                                      lambda: self._park_timeout(record, station))
            self._parked.setdefault(station, []).append((record, ev))
            return
        state = self._walks[record.request_id]
        state.repairs += 1
        if state.repairs > MAX_REPAIRS_PER_REQUEST:
            self._give_up(record, t)
            return

        def resume(success: bool) -> None:
            if success or self.entries.get(station) is not anchor:
                # repaired, or rewired underneath the repair by a jump or a
                # concurrent repair; either way the walk can try again, and
                # the station's rewired pointer deserves a fresh attempt even
                # if the walk has been here before (the repairs counter still
                # bounds how often)
                state.seen.discard(station)
                self._advance(record, station)
            else:
                # the widened search drew silence from an unchanged chain:
                # nobody reachable can extend it, so the request is lost
                self._give_up(record, self.engine.now)

        searcher_order = anchor.order if anchor is not None else -1.0
        self._start_repair(station, searcher_order, t,
                           record.request_id, resume)

    def _park_timeout(self, record: RequestRecord, station: int) -> None:
        waiting = self._parked.get(station)
        if waiting:
            self._parked[station] = [(r, e) for r, e in waiting if r is not record]
            if not self._parked[station]:
                del self._parked[station]
        self._give_up(record, self.engine.now)

    def _release_parked(self, station: int) -> None:
        for record, ev in self._parked.pop(station, []):
            ev.cancel()
            self._advance(record, station)

    # -- proactive maintenance ---------------------------------------------------

    def _chain_tick(self) -> None:
        t = self.engine.now
        for station in sorted(self.entries):
            if station in self._repair_active:
                continue
            entry = self.entries.get(station)
            if entry is None:
                continue
            probe = self.radio.direct(station, entry.next_hop,
                                      MessageKind.CHAIN_CHECK, t)
            if probe is None:
                self._repair_active.add(station)
                self.engine.schedule(
                    t + self.cfg.ack_timeout, EventKind.TIMER_EXPIRY,
                    lambda s=station, e=entry: self._tick_repair_start(s, e))
            elif station in self._parked:
                # the link healed on its own; waiting walks can move again
                self._release_parked(station)
        self.engine.schedule(t + self.cfg.chain_check_period,
                             EventKind.CHAIN_CHECK_TICK, self._chain_tick)

    def _tick_repair_start(self, station: int, probed: ForwarderEntry) -> None:
        entry = self.entries.get(station)
        if entry is not probed:
            # rewired while the ack timed out; nothing left to repair here
            self._repair_active.discard(station)
            return
        self._start_repair(station, entry.order, self.engine.now, None,
                           lambda ok: self._tick_repair_done(station, ok))

    def _tick_repair_done(self, station: int, success: bool) -> None:
        self._repair_active.discard(station)
        if success:
            self._release_parked(station)
        # on failure parked walks stay put; the next tick tries again and
        # their own timers bound the wait

    # -- repair ------------------------------------------------------------------

    def _start_repair(self, station: int, searcher_order: float, t: float,
                      request_id: Optional[int],
                      on_done: Callable[[bool], None]) -> None:
        # the searcher's entry object anchors the repair: if it is replaced
        # or dropped while search messages are in flight, the repair is
        # acting on a chain that no longer exists and must stand down
        anchor = self.entries.get(station)
        self._repair_round(station, searcher_order, anchor, t, request_id,
                           on_done, self.cfg.repair_ttl)

    def _repair_round(self, station: int, searcher_order: float,
                      anchor: Optional[ForwarderEntry], t: float,
                      request_id: Optional[int],
                      on_done: Callable[[bool], None],
                      ttl: Optional[int]) -> None:
        if self.entries.get(station) is not anchor:
            on_done(False)
            return
        lat = self.cfg.per_hop_latency
        flood = self.radio.flood(station, MessageKind.CHAIN_REPAIR_FLOOD, t,
                                 ttl=ttl, request_id=request_id)
        code = self.code
        sought = anchor.next_hop if anchor is not None else None

        candidates = []
        for x in flood.reached:
            if x == station:
                continue
            if x == code.host:
                candidates.append(x)
                continue
            e = self.entries.get(x)
            if e is not None and e.order > searcher_order:
                candidates.append(x)
        candidates.sort()

        replies: List[Tuple[float, int]] = []
        for x in candidates:
            sent_at = t + flood.depths[x] * lat
            reply = self.radio.unicast(x, station, MessageKind.CHAIN_REPAIR_REPLY,
                                       sent_at, request_id=request_id)
            if reply is not None:
                replies.append((reply.arrival, x))

        if sought is not None and flood.depths[sought] >= 0:
            sought_depth = int(flood.depths[sought])
        else:
            sought_depth = self.cfg.n_nodes + 1  # effectively unreachable
        pool = [x for _, x in replies
                if x == sought or flood.depths[x] < sought_depth]

        if not pool:
            if ttl is not None:
                # widen the search after a round-trip worth of silence
                retry_at = t + 2 * ttl * lat
                self.engine.schedule(
                    retry_at, EventKind.TIMER_EXPIRY,
                    lambda: self._repair_round(station, searcher_order, anchor,
                                               retry_at, request_id, on_done,
                                               None))
            else:
                give_up_at = t + 2 * max(1, self.radio.diameter(t)) * lat
                self.engine.schedule(give_up_at, EventKind.TIMER_EXPIRY,
                                     lambda: on_done(False))
            return

        def preference(x: int) -> Tuple[float, int, int]:
            e = self.entries.get(x)
            order = e.order if e is not None else float(code.jumps)
            return (-order, int(flood.depths[x]), x)

        best = min(pool, key=preference)
        path = self.radio.flood_path(flood, best)
        resume_at = max(arrival for arrival, _ in replies)
        self.engine.schedule(
            resume_at, EventKind.TIMER_EXPIRY,
            lambda: self._finish_repair(station, searcher_order, anchor, best,
                                        path, on_done))

    def _finish_repair(self, station: int, searcher_order: float,
                       anchor: Optional[ForwarderEntry], best: int,
                       path: Tuple[int, ...],
                       on_done: Callable[[bool], None]) -> None:
        code = self.code
        if path[0] != station or path[-1] != best:
            raise ProtocolError("repair path endpoints do not match")
        if self.entries.get(station) is not anchor:
            on_done(False)
            return
        e_best = self.entries.get(best)
        if e_best is None and best != code.host:
            # the replier was rewired out of the chain while its answer was
            # in flight; grafting onto it would wire in a dead end
            on_done(False)
            return
        start_order = 0.0 if station == code.mother else searcher_order
        end_order = e_best.order if e_best is not None else float(code.jumps)
        if start_order < 0.0:
            # the searcher is off the chain (its entry vanished mid-walk);
            # graft it back in just below the adoptee without cutting
            # anything out of the live chain
            start_order = end_order - 1.0
        # relay nodes become chain members; the mother and the host never
        # carry interior pointers, the rebuilt hop simply spans past them
        interior = [v for v in path[1:-1]
                    if v != code.mother and v != code.host and v != best]
        sequence = [station] + interior + [best]
        span = len(sequence) - 1
        for k in range(span):
            order = start_order + (end_order - start_order) * (k / span)
            self.entries[sequence[k]] = ForwarderEntry(sequence[k + 1], order)
        if searcher_order >= 0.0:
            # stations bridged over by the new stretch are out of the chain
            # now (the mother's anchor entry always survives)
            kept = set(sequence)
            dropped = [v for v, e in self.entries.items()
                       if v not in kept and v != code.mother
                       and start_order < e.order < end_order]
            for v in dropped:
                del self.entries[v]
                if v in self._parked:
                    self._release_parked(v)
        on_done(True)
