"""Rank harness: point-to-point delivery, control protocol, collectives, deadlock detection."""
import pytest

from app.runtime import (
    YIELD_ONLY,
    DeadlockError,
    ExecutionMode,
    Message,
    MessageKind,
    MessageTag,
    ProtocolError,
    Runtime,
    Wait,
    run_ranks,
)

MODES = list(ExecutionMode)


def test_run_ranks_returns_results_in_rank_order():
    for mode in MODES:
        assert run_ranks(3, lambda ctx: ctx.rank, mode=mode) == [0, 1, 2]


def test_runtime_rejects_zero_ranks():
    with pytest.raises(ProtocolError):
        Runtime(0)


def test_control_message_cannot_carry_payload():
    with pytest.raises(ProtocolError):
        Message(MessageKind.CONTROL, 0, payload=(1,))
    with pytest.raises(ProtocolError):
        Message(MessageKind.CONTROL, 0, tag=MessageTag.REPLY)
    assert Message.control(1).kind is MessageKind.CONTROL


def test_send_to_self_or_out_of_range_raises():
    rt = Runtime(2, ExecutionMode.INTERLEAVED)
    ctx = rt.contexts[0]
    with pytest.raises(ProtocolError):
        ctx.send(0, Message.control(0))
    with pytest.raises(ProtocolError):
        ctx.send(2, Message.control(0))
    with pytest.raises(ProtocolError):
        ctx.send(1, Message.control(1))


def test_drain_preserves_sender_order_and_counts():
    rt = Runtime(2, ExecutionMode.INTERLEAVED)
    a, b = rt.contexts
    for node in range(4):
        a.send(1, Message.data(0, MessageTag.SURROGATE, node, payload=[node]))
    a.broadcast_control()
    got = b.drain()
    assert [m.node for m in got if m.kind is MessageKind.DATA] == [0, 1, 2, 3]
    assert got[-1].kind is MessageKind.CONTROL
    assert b.all_controls_received
    assert a.stats() == {"dataSent": 4, "dataRecv": 0, "controlSent": 1, "controlRecv": 0}
    assert b.stats()["dataRecv"] == 4
    assert not b.has_messages()


def test_extra_control_message_is_a_protocol_error():
    rt = Runtime(2, ExecutionMode.INTERLEAVED)
    a, b = rt.contexts
    a.broadcast_control()
    a.broadcast_control()
    with pytest.raises(ProtocolError):
        b.drain()


def _exchange(ctx):
    """Each rank sends its id to every peer, then reads until every control arrives."""
    for dst in range(ctx.p):
        if dst != ctx.rank:
            ctx.send(dst, Message.data(ctx.rank, MessageTag.COUNTS, ctx.rank))
    ctx.broadcast_control()
    seen = []
    while not ctx.all_controls_received:
        for msg in ctx.drain():
            if msg.kind is MessageKind.DATA:
                seen.append(msg.node)
        if not ctx.all_controls_received:
            yield ctx.wait_for_messages()
    return sorted(seen)


@pytest.mark.parametrize("mode", MODES)
def test_all_to_all_exchange_terminates(mode):
    results = run_ranks(4, _exchange, mode=mode)
    for rank, seen in enumerate(results):
        assert seen == [r for r in range(4) if r != rank]


@pytest.mark.parametrize("mode", MODES)
def test_broadcast_control_counts(mode):
    rt = Runtime(5, mode)
    rt.run(_exchange)
    for ctx in rt.contexts:
        assert ctx.control_sent == 4
        assert ctx.control_received == 4
        assert ctx.data_sent == ctx.data_received == 4


@pytest.mark.parametrize("mode", MODES)
def test_reduce_sum_returns_total_at_root(mode):
    def program(ctx):
        total = yield from ctx.collective.reduce_sum(ctx, 1)
        return total

    assert run_ranks(2, program, mode=mode) == [2, None]


@pytest.mark.parametrize("mode", MODES)
def test_reduce_sum_is_exact_for_large_integers(mode):
    def program(ctx):
        return (yield from ctx.collective.reduce_sum(ctx, 10**18 + ctx.rank, root=2))

    results = run_ranks(3, program, mode=mode)
    assert results[2] == 3 * 10**18 + 3
    assert results[0] is None and results[1] is None


@pytest.mark.parametrize("mode", MODES)
def test_barrier_and_broadcast(mode):
    def program(ctx):
        yield from ctx.collective.barrier(ctx)
        value = yield from ctx.collective.broadcast(ctx, "plan" if ctx.rank == 1 else None, root=1)
        yield YIELD_ONLY
        again = yield from ctx.collective.reduce_sum(ctx, ctx.rank)
        return value, again

    results = run_ranks(3, program, mode=mode)
    assert [r[0] for r in results] == ["plan"] * 3
    assert results[0][1] == 3


def test_single_rank_collectives_complete_immediately():
    def program(ctx):
        return (yield from ctx.collective.reduce_sum(ctx, 7))

    assert run_ranks(1, program, mode=ExecutionMode.INTERLEAVED) == [7]


def _never_broadcasts(ctx):
    while not ctx.all_controls_received:
        ctx.drain()
        if not ctx.all_controls_received:
            yield ctx.wait_for_messages()


@pytest.mark.parametrize("mode", MODES)
def test_missing_control_is_reported_as_deadlock(mode):
    with pytest.raises(DeadlockError):
        run_ranks(3, _never_broadcasts, mode=mode)


@pytest.mark.parametrize("mode", MODES)
def test_rank_errors_propagate(mode):
    def program(ctx):
        if ctx.rank == 1:
            raise ProtocolError("boom")
        yield from ctx.collective.barrier(ctx)

    with pytest.raises(ProtocolError):
        run_ranks(2, program, mode=mode)


def test_unsatisfiable_wait_is_deadlock():
    def program(ctx):
        yield Wait(lambda: False)

    for mode in MODES:
        with pytest.raises(DeadlockError):
            run_ranks(2, program, mode=mode)
