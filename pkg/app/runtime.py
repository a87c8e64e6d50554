"""In-process message-passing rank harness.

A rank program is a function ``program(ctx)``. Plain functions just return; generator
programs ``yield`` a ``Wait`` whenever they need something another rank has not produced
yet (a message, a collective round) and ``return`` their result. The harness runs p such
programs either interleaved round-robin in the calling thread (deterministic) or one
thread per rank. Delivery is reliable, lossless and FIFO per sender in both modes.
"""
import logging
import threading
from collections import deque
from collections.abc import Callable, Generator
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from app import TrigraphError
from config.config import Config
from config.utils import config_float

logger = logging.getLogger("trigraph")


class ProtocolError(TrigraphError):
    """A rank broke the messaging contract (bad destination, unexpected message)."""


class DeadlockError(TrigraphError):
    """Every live rank is blocked and no message or collective can unblock any of them."""


class ExecutionMode(str, Enum):
    INTERLEAVED = "interleaved"
    CONCURRENT = "concurrent"


class MessageKind(str, Enum):
    DATA = "data"
    CONTROL = "control"


class MessageTag(str, Enum):
    """What a DATA message carries."""

    SURROGATE = "surrogate"  # N_v shipped to the owner of its off-core members
    REQUEST = "request"  # ask the owner of node for N_node
    REPLY = "reply"  # N_node answering a request
    COUNTS = "counts"  # (node, tally) pairs for clustering aggregation


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    src: int
    tag: MessageTag | None = None
    node: int = -1
    payload: tuple[int, ...] = ()
    values: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind is MessageKind.CONTROL and (
            self.tag is not None or self.payload or self.values or self.node != -1
        ):
            raise ProtocolError("control messages carry no payload")

    @classmethod
    def data(
        cls,
        src: int,
        tag: MessageTag,
        node: int = -1,
        payload: tuple[int, ...] | list[int] = (),
        values: tuple[int, ...] | list[int] = (),
    ) -> "Message":
        return cls(MessageKind.DATA, src, tag, node, tuple(payload), tuple(values))

    @classmethod
    def control(cls, src: int) -> "Message":
        return cls(MessageKind.CONTROL, src)


@dataclass(frozen=True)
class Wait:
    """Suspend the yielding rank until ``ready()`` is true; None means reschedule only."""

    ready: Callable[[], bool] | None = None

    def is_ready(self) -> bool:
        return self.ready is None or self.ready()


YIELD_ONLY = Wait()

RankProgram = Callable[["RankContext"], Any]


class _Mailboxes:
    """Per-rank inboxes plus the one condition variable guarding all shared run state."""

    def __init__(self, p: int) -> None:
        self.inboxes: list[deque[Message]] = [deque() for _ in range(p)]
        self.cond = threading.Condition(threading.RLock())

    def deliver(self, dst: int, msg: Message) -> None:
        with self.cond:
            self.inboxes[dst].append(msg)
            self.cond.notify_all()

    def take_all(self, rank: int) -> list[Message]:
        with self.cond:
            inbox = self.inboxes[rank]
            messages = list(inbox)
            inbox.clear()
            return messages

    def pending(self, rank: int) -> bool:
        with self.cond:
            return bool(self.inboxes[rank])


class RankContext:
    """Messaging endpoint owned by one rank for the duration of a run."""

    def __init__(self, rank: int, p: int, mailboxes: _Mailboxes, collective: "Collective") -> None:
        self.rank = rank
        self.p = p
        self.collective = collective
        self._mailboxes = mailboxes
        self.data_sent = 0
        self.data_received = 0
        self.control_sent = 0
        self.control_received = 0

    def send(self, dst: int, msg: Message) -> None:
        if dst == self.rank:
            raise ProtocolError(f"rank {self.rank} cannot send to itself")
        if not 0 <= dst < self.p:
            raise ProtocolError(f"destination rank {dst} outside [0, {self.p})")
        if msg.src != self.rank:
            raise ProtocolError(f"rank {self.rank} cannot send a message stamped src={msg.src}")
        if msg.kind is MessageKind.DATA:
            self.data_sent += 1
        else:
            self.control_sent += 1
        self._mailboxes.deliver(dst, msg)

    def drain(self) -> list[Message]:
        """Remove and return everything queued for this rank, per-sender order preserved."""
        messages = self._mailboxes.take_all(self.rank)
        for msg in messages:
            if msg.kind is MessageKind.DATA:
                self.data_received += 1
            else:
                self.control_received += 1
        if self.control_received > self.p - 1:
            raise ProtocolError(
                f"rank {self.rank} received {self.control_received} controls from {self.p - 1} peers"
            )
        return messages

    def broadcast_control(self) -> None:
        for dst in range(self.p):
            if dst != self.rank:
                self.send(dst, Message.control(self.rank))

    def has_messages(self) -> bool:
        return self._mailboxes.pending(self.rank)

    def wait_for_messages(self) -> Wait:
        return Wait(self.has_messages)

    @property
    def all_controls_received(self) -> bool:
        return self.control_received == self.p - 1

    def stats(self) -> dict[str, int]:
        return {
            "dataSent": self.data_sent,
            "dataRecv": self.data_received,
            "controlSent": self.control_sent,
            "controlRecv": self.control_received,
        }


class Collective:
    """Barrier, reduce and broadcast as rendezvous rounds over all p ranks.

    Every operation is a generator: ``total = yield from ctx.collective.reduce_sum(ctx, x)``.
    """

    def __init__(self, p: int, mailboxes: _Mailboxes) -> None:
        self.p = p
        self._cond = mailboxes.cond
        self._generation = 0
        self._values: dict[int, Any] = {}
        self._results: dict[int, list[Any]] = {}
        self._pickups: dict[int, int] = {}

    def _rendezvous(self, ctx: RankContext, value: Any) -> Generator[Wait, None, list[Any]]:
        with self._cond:
            if ctx.rank in self._values:
                raise ProtocolError(f"rank {ctx.rank} entered collective round twice")
            generation = self._generation
            self._values[ctx.rank] = value
            if len(self._values) == self.p:
                self._results[generation] = [self._values[r] for r in range(self.p)]
                self._pickups[generation] = 0
                self._values = {}
                self._generation += 1
                self._cond.notify_all()
        while True:
            with self._cond:
                if generation in self._results:
                    values = self._results[generation]
                    self._pickups[generation] += 1
                    if self._pickups[generation] == self.p:
                        del self._results[generation]
                        del self._pickups[generation]
                    return values
            yield Wait(lambda: generation < self._generation)

    def barrier(self, ctx: RankContext) -> Generator[Wait, None, None]:
        yield from self._rendezvous(ctx, None)

    def reduce_sum(self, ctx: RankContext, value: int, root: int = 0) -> Generator[Wait, None, int | None]:
        """Exact integer sum of every rank's value, returned at ``root`` (None elsewhere)."""
        values = yield from self._rendezvous(ctx, value)
        return sum(values) if ctx.rank == root else None

    def broadcast(self, ctx: RankContext, value: Any = None, root: int = 0) -> Generator[Wait, None, Any]:
        """Every rank receives ``root``'s value."""
        values = yield from self._rendezvous(ctx, value if ctx.rank == root else None)
        return values[root]


@dataclass
class _ThreadState:
    active: int
    waiting: dict[int, Wait] = field(default_factory=dict)
    progress: int = 0
    deadlocked: bool = False


class Runtime:
    """One run of p rank programs; contexts stay readable afterwards for tallies."""

    def __init__(self, p: int, mode: ExecutionMode | str | None = None) -> None:
        if p < 1:
            raise ProtocolError(f"rank count must be >= 1, got {p}")
        self.p = p
        self.mode = ExecutionMode(mode if mode is not None else Config.RUNTIME_MODE)
        self._mailboxes = _Mailboxes(p)
        self.collective = Collective(p, self._mailboxes)
        self.contexts = [RankContext(i, p, self._mailboxes, self.collective) for i in range(p)]

    def run(self, program: RankProgram) -> list[Any]:
        if self.mode is ExecutionMode.INTERLEAVED:
            return self._run_interleaved(program)
        return self._run_concurrent(program)

    def _run_interleaved(self, program: RankProgram) -> list[Any]:
        results: list[Any] = [None] * self.p
        pending: dict[int, tuple[Generator, Wait | None]] = {}
        for ctx in self.contexts:
            out = program(ctx)
            if isinstance(out, Generator):
                pending[ctx.rank] = (out, None)
            else:
                results[ctx.rank] = out
        try:
            while pending:
                progressed = False
                for rank in sorted(pending):
                    gen, wait = pending[rank]
                    if wait is not None and not wait.is_ready():
                        continue
                    progressed = True
                    try:
                        pending[rank] = (gen, next(gen))
                    except StopIteration as stop:
                        results[rank] = stop.value
                        del pending[rank]
                if not progressed:
                    blocked = sorted(pending)
                    logger.error("Deadlock: ranks %s blocked with nothing in flight", blocked)
                    raise DeadlockError(f"ranks {blocked} are blocked with nothing in flight")
        finally:
            for gen, _ in pending.values():
                gen.close()
        return results

    def _run_concurrent(self, program: RankProgram) -> list[Any]:
        results: list[Any] = [None] * self.p
        errors: dict[int, BaseException] = {}
        cond = self._mailboxes.cond
        state = _ThreadState(active=self.p)
        timeout = config_float(Config, "DEADLOCK_TIMEOUT_SEC", 30.0)

        def block(rank: int, wait: Wait) -> None:
            with cond:
                state.waiting[rank] = wait
                try:
                    while not wait.is_ready():
                        if state.deadlocked:
                            raise DeadlockError(f"rank {rank} aborted: run deadlocked")
                        if len(state.waiting) == state.active and not any(
                            w.is_ready() for w in state.waiting.values()
                        ):
                            state.deadlocked = True
                            cond.notify_all()
                            blocked = sorted(state.waiting)
                            logger.error("Deadlock: ranks %s blocked with nothing in flight", blocked)
                            raise DeadlockError(f"ranks {blocked} are blocked with nothing in flight")
                        seen = state.progress
                        if not cond.wait(timeout=timeout) and state.progress == seen and not wait.is_ready():
                            state.deadlocked = True
                            cond.notify_all()
                            raise DeadlockError(
                                f"rank {rank} stalled: no rank progressed for {timeout}s"
                            )
                finally:
                    del state.waiting[rank]

        def drive(ctx: RankContext) -> None:
            gen = None
            try:
                out = program(ctx)
                if not isinstance(out, Generator):
                    results[ctx.rank] = out
                    return
                gen = out
                wait = next(gen)
                while True:
                    with cond:
                        state.progress += 1
                    block(ctx.rank, wait)
                    wait = next(gen)
            except StopIteration as stop:
                results[ctx.rank] = stop.value
            except BaseException as e:  # re-raised by the caller thread
                errors[ctx.rank] = e
                if gen is not None:
                    gen.close()
            finally:
                with cond:
                    state.active -= 1
                    state.progress += 1
                    cond.notify_all()

        threads = [
            threading.Thread(target=drive, args=(ctx,), name=f"rank-{ctx.rank}", daemon=True)
            for ctx in self.contexts
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if errors:
            primary = [e for e in errors.values() if not isinstance(e, DeadlockError)]
            raise (primary or list(errors.values()))[0]
        return results


def run_ranks(p: int, program: RankProgram, mode: ExecutionMode | str | None = None) -> list[Any]:
    """Run ``program`` on p ranks and return the per-rank results in rank order."""
    return Runtime(p, mode).run(program)
