"""Forwarder chains: walks, collapse, repairs, grafts, wraps and parking."""

import pytest

from adhocloc.metrics import RequestRecord
from adhocloc.protocols.forwarder import ForwarderEntry, ForwarderProtocol
from conftest import build_ctx, jump_code, scripted_model, static_model

LINE4 = [(0, 0), (200, 0), (400, 0), (600, 0)]


def make_forwarder(model, proactive=False, **overrides):
    ctx = build_ctx(model, **overrides)
    return ForwarderProtocol(ctx, proactive=proactive)


def issue(proto, t, request_id=1):
    record = RequestRecord(request_id=request_id, issued_at=t, warmup=False)
    proto.locate(record)
    return record


class TestChainBookkeeping:
    def test_each_departure_leaves_an_ordered_entry(self):
        proto = make_forwarder(static_model(LINE4))
        proto.start()
        jump_code(proto, 1, 0.0)
        jump_code(proto, 2, 0.0)
        jump_code(proto, 3, 0.0)
        assert proto.entries == {0: ForwarderEntry(1, 0.0),
                                 1: ForwarderEntry(2, 1.0),
                                 2: ForwarderEntry(3, 2.0)}

    def test_the_mother_is_pinned_at_order_zero(self):
        proto = make_forwarder(static_model(LINE4))
        jump_code(proto, 1, 0.0)
        jump_code(proto, 0, 0.0)      # back onto the mother
        jump_code(proto, 1, 0.0)      # and away again
        assert proto.entries[0].order == 0.0

    def test_landing_on_a_member_clears_its_pointer_but_keeps_the_rest(self):
        proto = make_forwarder(static_model(LINE4))
        jump_code(proto, 1, 0.0)
        jump_code(proto, 2, 0.0)
        jump_code(proto, 3, 0.0)
        jump_code(proto, 1, 0.0)      # host lands on a chain member
        assert 1 not in proto.entries
        assert proto.entries[3] == ForwarderEntry(1, 3.0)
        # the stretch beyond the new host is orphaned, not erased: its
        # stations have no way to know the walk will never come
        assert proto.entries[2] == ForwarderEntry(3, 2.0)


class TestWalk:
    def test_request_at_the_mother_resolves_locally_for_free(self):
        proto = make_forwarder(static_model(LINE4))
        record = issue(proto, 0.0)
        assert record.resolved_at == 0.0
        assert record.returned_host == 0 and record.truth_host == 0
        assert proto.ctx.ledger.recount() == 0

    def test_walk_along_an_intact_chain(self):
        proto = make_forwarder(static_model(LINE4))
        for host in (1, 2, 3):
            jump_code(proto, host, 0.0)
        record = issue(proto, 0.0)
        proto.engine.run_until(1.0)
        # three forwards at one hop each, then a three-hop reply
        assert record.resolved_at == pytest.approx(0.06)
        assert record.returned_host == 3 and record.truth_host == 3
        assert proto.ctx.ledger.units_for_request(1) == 6

    def test_reactive_resolution_collapses_the_chain(self):
        proto = make_forwarder(static_model(LINE4))
        for host in (1, 2, 3):
            jump_code(proto, host, 0.0)
        issue(proto, 0.0)
        proto.engine.run_until(1.0)
        assert proto.entries == {0: ForwarderEntry(3, 0.0)}

    def test_proactive_resolution_keeps_the_chain_standing(self):
        proto = make_forwarder(static_model(LINE4), proactive=True)
        proto.start()
        for host in (1, 2, 3):
            jump_code(proto, host, 0.0)
        record = issue(proto, 0.0)
        proto.engine.run_until(0.5)    # resolve before the first tick
        assert record.resolved_at is not None
        assert proto.entries == {0: ForwarderEntry(1, 0.0),
                                 1: ForwarderEntry(2, 1.0),
                                 2: ForwarderEntry(3, 2.0)}


class TestMaintenance:
    def test_reactive_charges_nothing_while_idle(self):
        proto = make_forwarder(static_model(LINE4))
        proto.start()
        jump_code(proto, 1, 0.0)
        jump_code(proto, 2, 0.0)
        proto.engine.run_until(10.0)
        assert proto.ctx.ledger.recount() == 0

    def test_proactive_ticks_probe_every_link_every_period(self):
        proto = make_forwarder(static_model(LINE4), proactive=True)
        proto.start()
        for host in (1, 2, 3):
            jump_code(proto, host, 0.0)
        proto.engine.run_until(5.5)
        # ticks at 1..5 s probe the three standing links
        assert proto.ctx.ledger.by_kind == {"ChainCheck": 15}

    def test_tick_repair_rewires_a_break_without_any_request(self):
        # station 1 walks out of the chain for good; a bystander at (200, 60)
        # bridges the gap for the repair diffusion
        model = scripted_model([
            [(0.0, 0.0, 0.0), (10.0, 0.0, 0.0)],
            [(0.0, 200.0, 0.0), (1.0, 200.0, 0.0), (1.2, 5000.0, 0.0),
             (10.0, 5000.0, 0.0)],
            [(0.0, 400.0, 0.0), (10.0, 400.0, 0.0)],
            [(0.0, 200.0, 60.0), (10.0, 200.0, 60.0)],
        ])
        proto = make_forwarder(model, proactive=True)
        proto.start()
        jump_code(proto, 1, 0.1)
        jump_code(proto, 2, 0.2)
        proto.engine.run_until(4.0)
        assert 1 not in proto.entries
        assert proto.entries == {0: ForwarderEntry(3, 0.0),
                                 3: ForwarderEntry(2, 1.0)}
        # maintenance traffic is not billed to any request
        assert proto.ctx.ledger.units_for_request(None) == proto.ctx.ledger.recount()


class TestWalkRepairs:
    def repair_model(self):
        # 0 -- 1 -- 2 is the chain; 1 deserts at t=1; 3 sits within range of
        # both 0 and 2 and can be drafted as the replacement relay
        return scripted_model([
            [(0.0, 0.0, 0.0), (10.0, 0.0, 0.0)],
            [(0.0, 200.0, 0.0), (1.0, 200.0, 0.0), (1.2, 5000.0, 0.0),
             (10.0, 5000.0, 0.0)],
            [(0.0, 400.0, 0.0), (10.0, 400.0, 0.0)],
            [(0.0, 200.0, 60.0), (10.0, 200.0, 60.0)],
        ])

    def test_reactive_walk_repairs_a_break_in_band(self):
        proto = make_forwarder(self.repair_model())
        jump_code(proto, 1, 0.1)
        jump_code(proto, 2, 0.2)
        proto.engine.run_until(2.0)
        record = issue(proto, 2.0)
        proto.engine.run_until(2.08)
        # silence until the ack timeout, then diffusion, reply and rewire:
        # the drafted relay holds an interpolated order
        assert proto.entries == {0: ForwarderEntry(3, 0.0),
                                 3: ForwarderEntry(2, 1.0)}
        proto.engine.run_until(4.0)
        assert record.resolved_at == pytest.approx(2.11)
        assert record.returned_host == 2 and record.truth_host == 2
        # the resolution then collapsed the repaired chain as usual
        assert proto.entries == {0: ForwarderEntry(2, 0.0)}

    def test_repair_cost_is_charged_to_the_request(self):
        proto = make_forwarder(self.repair_model())
        jump_code(proto, 1, 0.1)
        jump_code(proto, 2, 0.2)
        proto.engine.run_until(2.0)
        record = issue(proto, 2.0, request_id=7)
        proto.engine.run_until(4.0)
        assert record.resolved_at is not None
        # diffusion 3 + reply 2 + two walk hops + two reply hops
        assert proto.ctx.ledger.units_for_request(7) == 9
        kinds = set(proto.ctx.ledger.by_kind)
        assert {"ChainRepairFlood", "ChainRepairReply"} <= kinds

    def test_bypassed_station_is_dropped_from_the_chain(self):
        proto = make_forwarder(self.repair_model())
        jump_code(proto, 1, 0.1)
        jump_code(proto, 2, 0.2)
        proto.engine.run_until(2.0)
        issue(proto, 2.0)
        proto.engine.run_until(2.08)   # after the rewire, before resolution
        assert 1 not in proto.entries

    def test_pointerless_station_is_grafted_just_below_its_adoptee(self):
        proto = make_forwarder(static_model([(0, 0), (200, 0), (400, 0)]))
        proto.entries[0] = ForwarderEntry(1, 0.0)
        proto.code.host = 2
        proto.code.jumps = 5
        record = issue(proto, 0.0)
        proto.engine.run_until(0.05)
        # the dead-end station gets a pointer grafted one order below the
        # host it found, leaving room for the host's future departures
        assert proto.entries[1] == ForwarderEntry(2, 4.0)
        proto.engine.run_until(1.0)
        assert record.resolved_at is not None
        assert record.returned_host == 2

    def test_wrapped_walk_detects_its_own_lap_and_recovers(self):
        # stale pointers loop 1 -> 2 -> 1; the host sits one hop off the
        # loop, and station 2 drifts away so the repair prefers the host
        model = scripted_model([
            [(0.0, 0.0, 0.0), (10.0, 0.0, 0.0)],
            [(0.0, 200.0, 0.0), (10.0, 200.0, 0.0)],
            [(0.0, 400.0, 0.0), (2.025, 400.0, 0.0), (2.035, 650.0, 0.0),
             (10.0, 650.0, 0.0)],
            [(0.0, 450.0, 0.0), (10.0, 450.0, 0.0)],
        ])
        proto = make_forwarder(model)
        proto.entries[0] = ForwarderEntry(1, 0.0)
        proto.entries[1] = ForwarderEntry(2, 1.0)
        proto.entries[2] = ForwarderEntry(1, 1.5)
        proto.code.host = 3
        proto.code.jumps = 3
        proto.engine.run_until(2.0)
        record = issue(proto, 2.0)
        proto.engine.run_until(2.09)
        # the lap was caught at station 1 and the repair bridged it
        # straight to the host, erasing the loop edge
        assert proto.entries[1] == ForwarderEntry(3, 1.0)
        assert 2 not in proto.entries
        proto.engine.run_until(4.0)
        assert record.resolved_at is not None
        assert record.returned_host == 3 and record.truth_host == 3
        assert proto.entries == {0: ForwarderEntry(3, 0.0)}


class TestParking:
    def parking_model(self):
        # station 1 leaves at t=1.5 and returns at t=3.5; nobody can bridge
        # 0 to 2 in the meantime
        return scripted_model([
            [(0.0, 0.0, 0.0), (10.0, 0.0, 0.0)],
            [(0.0, 200.0, 0.0), (1.5, 200.0, 0.0), (1.6, 5000.0, 0.0),
             (3.4, 5000.0, 0.0), (3.5, 200.0, 0.0), (10.0, 200.0, 0.0)],
            [(0.0, 400.0, 0.0), (10.0, 400.0, 0.0)],
        ])

    def test_proactive_walk_parks_and_resumes_when_the_link_heals(self):
        proto = make_forwarder(self.parking_model(), proactive=True)
        proto.start()
        jump_code(proto, 1, 0.1)
        jump_code(proto, 2, 0.2)
        proto.engine.run_until(2.0)
        record = issue(proto, 2.0, request_id=5)
        proto.engine.run_until(6.0)
        # the 4 s tick sees the healed link and releases the walk
        assert record.resolved_at == pytest.approx(4.04)
        assert record.returned_host == 2
        assert proto._parked == {}
        # the wait itself costs the request nothing beyond its own messages
        assert proto.ctx.ledger.units_for_request(5) == 4

    def test_parked_walk_gives_up_after_the_configured_ticks(self):
        model = scripted_model([
            [(0.0, 0.0, 0.0), (10.0, 0.0, 0.0)],
            [(0.0, 200.0, 0.0), (1.5, 200.0, 0.0), (1.6, 5000.0, 0.0),
             (10.0, 5000.0, 0.0)],
            [(0.0, 400.0, 0.0), (10.0, 400.0, 0.0)],
        ])
        proto = make_forwarder(model, proactive=True)
        proto.start()
        jump_code(proto, 1, 0.1)
        jump_code(proto, 2, 0.2)
        proto.engine.run_until(2.0)
        record = issue(proto, 2.0)
        proto.engine.run_until(8.0)
        assert record.status == "failed"
        # parked at 2.03 after the ack timeout, three tick periods of grace
        assert record.failed_at == pytest.approx(5.03)

    def test_a_jump_at_the_broken_station_releases_the_walk(self):
        proto = make_forwarder(self.parking_model(), proactive=True)
        proto.start()
        jump_code(proto, 1, 0.1)
        jump_code(proto, 2, 0.2)
        proto.engine.run_until(2.0)
        record = issue(proto, 2.0)
        proto.engine.run_until(2.5)
        assert 0 in proto._parked
        # the code hops back onto the broken station: the walk is already there
        jump_code(proto, 0, 2.5)
        proto.engine.run_until(3.0)
        assert record.resolved_at is not None
        assert record.returned_host == 0
