"""
Bounded exponential back-off for spin loops.
"""

from typing import Callable

from .clock import Conductor


class Backoff:
    """Doubles the pause between polls up to ``max_ns``."""

    def __init__(self, conductor: Conductor, rank: int, min_ns: int = 16, max_ns: int = 256):
        self._conductor = conductor
        self._rank = rank
        self.min_ns = max(int(min_ns), 1)
        self.max_ns = max(int(max_ns), self.min_ns)
        self._current = self.min_ns

    def pause(self) -> None:
        self._conductor.pause(self._rank, self._current)
        self._current = min(self._current * 2, self.max_ns)

    def reset(self) -> None:
        self._current = self.min_ns


def spin_until(poll: Callable[[], int], done: Callable[[int], bool], backoff: Backoff) -> int:
    """Call ``poll`` until ``done`` accepts its value; return that value."""
    while True:
        value = poll()
        if done(value):
            return value
        backoff.pause()
