"""
Globally ordered event log and critical-section occupancy.
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from typing import Iterator, List, Optional

from ..exceptions import ConfigurationError

logger = logging.getLogger(__name__)

READ_ENTER = 'read-enter'
READ_EXIT = 'read-exit'
WRITE_ENTER = 'write-enter'
WRITE_EXIT = 'write-exit'
COUNTER_RESET = 'counter-reset'
MODE_CHANGE = 'mode-change'
QUEUE_ENTER = 'queue-enter'

EVENT_KINDS = (READ_ENTER, READ_EXIT, WRITE_ENTER, WRITE_EXIT,
               COUNTER_RESET, MODE_CHANGE, QUEUE_ENTER)

MODE_READ = 0
MODE_WRITE = 1


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: int
    rank: int
    kind: str
    level: int = 0
    element: int = 0

    def as_record(self) -> str:
        return f"{self.seq},{self.rank},{self.kind},{self.level},{self.element}"


@dataclass
class OccupancyState:
    """Readers and writers currently inside the critical section."""

    readers: int = 0
    writers: int = 0

    @property
    def valid(self) -> bool:
        if self.writers > 1 or self.readers < 0 or self.writers < 0:
            return False
        return not (self.writers == 1 and self.readers > 0)

    def apply(self, kind: str) -> None:
        if kind == READ_ENTER:
            self.readers += 1
        elif kind == READ_EXIT:
            self.readers -= 1
        elif kind == WRITE_ENTER:
            self.writers += 1
        elif kind == WRITE_EXIT:
            self.writers -= 1


class EventLog:
    """
    Append-only log shared by all ranks.

    ``record`` is safe to call concurrently; every event gets a unique,
    strictly increasing sequence number starting at 1.
    """

    def __init__(self):
        self._mutex = threading.Lock()
        self._seq = itertools.count(1)
        self._events: List[Event] = []
        self.occupancy = OccupancyState()
        self.logger = logging.getLogger(self.__class__.__name__)

    def record(self, rank: int, kind: str, level: int = 0, element: int = 0,
               timestamp: int = 0) -> Event:
        if kind not in EVENT_KINDS:
            raise ConfigurationError(f"Unknown event kind '{kind}'")
        with self._mutex:
            event = Event(next(self._seq), int(timestamp), rank, kind, level, element)
            self._events.append(event)
            self.occupancy.apply(kind)
        return event

    @property
    def events(self) -> List[Event]:
        with self._mutex:
            return list(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def last(self) -> Optional[Event]:
        with self._mutex:
            return self._events[-1] if self._events else None

    def records(self) -> List[str]:
        """Newline-free ``seq,rank,event,level,element`` records."""
        return [event.as_record() for event in self.events]
