"""Shared builders: scripted mobility models and hand-wired protocol contexts."""

from adhocloc.config import ScenarioConfig
from adhocloc.engine import Engine, RngStreams
from adhocloc.mobility import RandomWaypointModel, Trajectory
from adhocloc.protocols.base import MobileCode, ScenarioContext
from adhocloc.radio import MessageLedger, Radio


def static_model(points, width=1000.0, height=500.0):
    """A model whose nodes sit still at the given (x, y) points."""
    trajs = [Trajectory([0.0], [float(x)], [float(y)]) for x, y in points]
    return RandomWaypointModel.from_trajectories(trajs, width, height)


def scripted_model(knot_lists, width=1000.0, height=500.0):
    """A model from explicit per-node knot lists of (t, x, y) tuples."""
    trajs = []
    for knots in knot_lists:
        traj = Trajectory()
        for t, x, y in knots:
            traj.append(float(t), float(x), float(y))
        trajs.append(traj)
    return RandomWaypointModel.from_trajectories(trajs, width, height)


def build_ctx(model, mother=0, host=None, trace=False, **overrides):
    """Assemble a ScenarioContext around a prebuilt model.

    Config overrides are passed straight to ScenarioConfig; the context is
    ready for driving a protocol by hand through its engine.
    """
    cfg = ScenarioConfig(n_nodes=model.n_nodes, mother=mother, **overrides)
    engine = Engine(trace=trace)
    streams = RngStreams(cfg.seed)
    ledger = MessageLedger()
    radio = Radio(model, cfg.range, cfg.per_hop_latency, ledger)
    code = MobileCode(code_id=0, mother=mother,
                      host=mother if host is None else host,
                      jump_rate=cfg.jump_rate, band=cfg.code_band)
    return ScenarioContext(cfg=cfg, engine=engine, streams=streams, model=model,
                           radio=radio, ledger=ledger, code=code)


def jump_code(protocol, new_host, t):
    """Migrate the code by hand: host switch first, protocol hook right after."""
    code = protocol.code
    old_host = code.host
    code.jumps += 1
    code.host = new_host
    protocol.on_code_jump(old_host, new_host, t)
