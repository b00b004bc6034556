"""Minimal actor runtime: mailboxes, actor refs, and the two actor loops.

One thread per actor. The join-pattern ``Actor`` hands its mailbox to a
matching engine; ``SimpleActor`` is the baseline that reacts to one message at
a time with ordinary dispatch and is used to quantify join-matching overhead.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from collections.abc import Callable, Sequence
from typing import Any

from .core import (
    CONTINUE,
    DISCONNECTED,
    Disconnected,
    JoinPattern,
    Message,
    ResultControl,
    Stop,
)
from .kernel import Matcher, MatcherFactory, MatchProbe, factory_instantiate


class ActorClosed(RuntimeError):
    """The actor's mailbox was closed before it stopped on its own."""


class Mailbox:
    """Unbounded FIFO of messages: many senders, one blocking consumer."""

    def __init__(self) -> None:
        self._items: deque[Message] = deque()
        self._cv = threading.Condition()
        self._closed = False

    def send(self, message: Message) -> None:
        """Enqueue without blocking; dropped silently once closed."""
        with self._cv:
            if self._closed:
                return
            self._items.append(message)
            self._cv.notify()

    def take(self) -> Message | Disconnected:
        """Block until a message arrives; DISCONNECTED once closed."""
        with self._cv:
            while not self._items and not self._closed:
                self._cv.wait()
            if self._closed:
                return DISCONNECTED
            return self._items.popleft()

    def close(self) -> None:
        with self._cv:
            self._closed = True
            self._items.clear()
            self._cv.notify_all()

    def __len__(self) -> int:
        with self._cv:
            return len(self._items)


class ActorRef:
    """Shareable send endpoint bound to one mailbox."""

    __slots__ = ("_mailbox", "name")

    def __init__(self, mailbox: Mailbox, name: str | None = None) -> None:
        self._mailbox = mailbox
        self.name = name

    def send(self, message: Message) -> None:
        self._mailbox.send(message)

    def __repr__(self) -> str:
        return f"ActorRef({self.name or hex(id(self._mailbox))})"


class CompletionHandle:
    """One-shot slot for an actor's final value or failure."""

    def __init__(self) -> None:
        self._event = threading.Event()
        self._value: Any = None
        self._error: BaseException | None = None
        self.completed_at: float | None = None

    def complete(self, value: Any) -> None:
        self._value = value
        self.completed_at = time.perf_counter()
        self._event.set()

    def fail(self, error: BaseException) -> None:
        self._error = error
        self.completed_at = time.perf_counter()
        self._event.set()

    def done(self) -> bool:
        return self._event.is_set()

    def result(self, timeout: float | None = None) -> Any:
        if not self._event.wait(timeout):
            raise TimeoutError("actor did not complete in time")
        if self._error is not None:
            raise self._error
        return self._value


class Actor:
    """A join-pattern actor: its matcher decides which message combinations fire."""

    def __init__(
        self,
        patterns: Sequence[JoinPattern],
        factory: MatcherFactory,
        *,
        probe: MatchProbe | None = None,
        name: str | None = None,
    ) -> None:
        self._matcher = factory_instantiate(factory, patterns, probe=probe)
        self._mailbox = Mailbox()
        self.ref = ActorRef(self._mailbox, name)
        self._handle = CompletionHandle()
        self._name = name or f"actor-{id(self):x}"

    @property
    def matcher(self) -> Matcher:
        return self._matcher

    def start(self) -> tuple[CompletionHandle, ActorRef]:
        thread = threading.Thread(target=self._run, name=self._name, daemon=True)
        thread.start()
        return self._handle, self.ref

    def stop_now(self) -> None:
        """Tear the actor down without a Stop pattern (used on timeouts)."""
        self._mailbox.close()

    def _run(self) -> None:
        try:
            while True:
                result = self._matcher.run_until_fire(self._mailbox, self.ref)
                if isinstance(result, Stop):
                    self._handle.complete(result.value)
                    return
                if result is DISCONNECTED:
                    self._handle.fail(ActorClosed(self._name))
                    return
        except BaseException as error:  # rhs failure completes the handle
            self._handle.fail(error)
        finally:
            self._mailbox.close()
            self._matcher.close()


def spawn_actor(
    patterns: Sequence[JoinPattern],
    factory: MatcherFactory,
    *,
    probe: MatchProbe | None = None,
    name: str | None = None,
) -> tuple[CompletionHandle, ActorRef]:
    return Actor(patterns, factory, probe=probe, name=name).start()


Behavior = Callable[[Message], "ResultControl | None"]


def simple_actor_step(
    behavior: Behavior, mailbox: Mailbox, self_ref: ActorRef
) -> ResultControl | Disconnected:
    """Take one message and dispatch it; unmatched messages are dropped."""
    item = mailbox.take()
    if item is DISCONNECTED:
        return DISCONNECTED
    result = behavior(item)
    return CONTINUE if result is None else result


class SimpleActor:
    """Baseline actor: ordinary one-message-at-a-time dispatch, no join matching.

    ``handler`` receives the actor's self reference and returns the behavior
    applied to each message; returning None leaves the actor running.
    """

    def __init__(
        self,
        handler: Callable[[ActorRef], Behavior],
        *,
        name: str | None = None,
    ) -> None:
        self._handler = handler
        self._mailbox = Mailbox()
        self.ref = ActorRef(self._mailbox, name)
        self._handle = CompletionHandle()
        self._name = name or f"simple-{id(self):x}"

    def start(self) -> tuple[CompletionHandle, ActorRef]:
        thread = threading.Thread(target=self._run, name=self._name, daemon=True)
        thread.start()
        return self._handle, self.ref

    def stop_now(self) -> None:
        self._mailbox.close()

    def _run(self) -> None:
        try:
            behavior = self._handler(self.ref)
            while True:
                result = simple_actor_step(behavior, self._mailbox, self.ref)
                if isinstance(result, Stop):
                    self._handle.complete(result.value)
                    return
                if result is DISCONNECTED:
                    self._handle.fail(ActorClosed(self._name))
                    return
        except BaseException as error:
            self._handle.fail(error)
        finally:
            self._mailbox.close()


def spawn_simple_actor(
    handler: Callable[[ActorRef], Behavior], *, name: str | None = None
) -> tuple[CompletionHandle, ActorRef]:
    return SimpleActor(handler, name=name).start()
