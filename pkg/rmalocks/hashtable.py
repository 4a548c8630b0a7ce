"""
Distributed hashtable: one local volume (table plus overflow heap) on an
owner rank, accessed by all ranks through one-sided operations.

Inserts claim the table slot with a CAS. A losing insert takes an overflow
heap entry with a FAO on the next-free index, stores its value, claims the
chain end with a CAS on the slot's last-element cell and links itself
behind it. An entry is marked ready once it is reachable from its slot, and
an insert returns only after its predecessor is ready, so every completed
insert is visible to later lookups.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

from .exceptions import AddressingError, CapacityError, ConfigurationError
from .utils.backoff import Backoff
from .utils.rma import Endpoint, LatencyModel, Window, create_window
from .utils.clock import Conductor

logger = logging.getLogger(__name__)

NONE = 0


@dataclass(frozen=True)
class VolumeLayout:
    """
    Word offsets of one local volume.

    Heap indices stored in ``head``, ``last`` and ``heap_next`` are shifted
    by one so that 0 means "no entry".
    """

    table_size: int
    heap_size: int
    NEXT_FREE: int = 0

    def __post_init__(self):
        if self.table_size < 1 or self.heap_size < 1:
            raise ConfigurationError(
                f"Table and heap sizes must be >= 1, got {self.table_size} / {self.heap_size}")

    def table(self, slot: int) -> int:
        return 1 + slot

    def head(self, slot: int) -> int:
        return 1 + self.table_size + slot

    def last(self, slot: int) -> int:
        return 1 + 2 * self.table_size + slot

    def heap_value(self, index: int) -> int:
        return 1 + 3 * self.table_size + index

    def heap_next(self, index: int) -> int:
        return 1 + 3 * self.table_size + self.heap_size + index

    def heap_ready(self, index: int) -> int:
        return 1 + 3 * self.table_size + 2 * self.heap_size + index

    @property
    def words(self) -> int:
        return 1 + 3 * self.table_size + 3 * self.heap_size


class DistributedHashtable:
    """
    Hashtable stored in the local volume of ``owner``.

    ``hash(v) = v mod table_size``; duplicates are stored; 0 is reserved
    for empty slots and cannot be inserted.
    """

    def __init__(self, window: Window, owner: int = 1,
                 table_size: int = 1024, heap_size: int = 1024,
                 backoff_min_ns: int = 16, backoff_max_ns: int = 256):
        self.layout = VolumeLayout(table_size, heap_size)
        if window.words_per_rank < self.layout.words:
            raise ConfigurationError(
                f"Window has {window.words_per_rank} words per rank, volume needs {self.layout.words}")
        if not 1 <= owner <= window.num_ranks:
            raise AddressingError(f"Owner rank {owner} outside 1..{window.num_ranks}")
        self.window = window
        self.owner = owner
        self.backoff_min_ns = backoff_min_ns
        self.backoff_max_ns = backoff_max_ns
        self.logger = logging.getLogger(self.__class__.__name__)

    @classmethod
    def create(cls, num_ranks: int, owner: int = 1, table_size: int = 1024,
               heap_size: int = 1024, latency: Optional[LatencyModel] = None,
               conductor: Optional[Conductor] = None,
               **kwargs) -> 'DistributedHashtable':
        """Allocate a dedicated window holding one volume per rank."""
        layout = VolumeLayout(table_size, heap_size)
        window = create_window(num_ranks, layout.words, latency=latency, conductor=conductor)
        return cls(window, owner=owner, table_size=table_size, heap_size=heap_size, **kwargs)

    @property
    def table_size(self) -> int:
        return self.layout.table_size

    @property
    def heap_size(self) -> int:
        return self.layout.heap_size

    def hash(self, value: int) -> int:
        return value % self.layout.table_size

    def _check_value(self, value: int) -> None:
        if value == NONE:
            raise ValueError("0 marks empty slots and cannot be stored")

    def _backoff(self, ep: Endpoint) -> Backoff:
        return Backoff(self.window.conductor, ep.rank, self.backoff_min_ns, self.backoff_max_ns)

    @staticmethod
    def _fetch(ep: Endpoint, ticket) -> int:
        ep.flush(ticket.target)
        return ticket.value

    def insert(self, ep: Endpoint, value: int) -> None:
        """
        Insert ``value`` on behalf of ``ep``'s rank.

        Raises:
            ValueError: If ``value`` is 0
            CapacityError: If the overflow heap is exhausted
        """
        self._check_value(value)
        layout, owner = self.layout, self.owner
        slot = self.hash(value)
        if self._fetch(ep, ep.cas(value, NONE, owner, layout.table(slot))) == NONE:
            return

        index = self._fetch(ep, ep.fao(1, owner, layout.NEXT_FREE))
        if index >= layout.heap_size:
            ep.accumulate(-1, owner, layout.NEXT_FREE)
            ep.flush(owner)
            raise CapacityError(f"Overflow heap of rank {owner} is full ({layout.heap_size} entries)")
        ep.put(value, owner, layout.heap_value(index))
        ep.flush(owner)

        # Claim the end of the chain.
        while True:
            last = self._fetch(ep, ep.get(owner, layout.last(slot)))
            if self._fetch(ep, ep.cas(index + 1, last, owner, layout.last(slot))) == last:
                break
        if last == NONE:
            ep.put(index + 1, owner, layout.head(slot))
        else:
            ep.put(index + 1, owner, layout.heap_next(last - 1))
        ep.flush(owner)

        if last != NONE:
            backoff = self._backoff(ep)
            while self._fetch(ep, ep.get(owner, layout.heap_ready(last - 1))) == 0:
                backoff.pause()
        ep.put(1, owner, layout.heap_ready(index))
        ep.flush(owner)

    def lookup(self, ep: Endpoint, value: int) -> bool:
        """Return True if ``value`` is stored in its slot or overflow chain."""
        self._check_value(value)
        layout, owner = self.layout, self.owner
        slot = self.hash(value)
        if self._fetch(ep, ep.get(owner, layout.table(slot))) == value:
            return True
        entry = self._fetch(ep, ep.get(owner, layout.head(slot)))
        while entry != NONE:
            if self._fetch(ep, ep.get(owner, layout.heap_value(entry - 1))) == value:
                return True
            entry = self._fetch(ep, ep.get(owner, layout.heap_next(entry - 1)))
        return False

    def contents(self) -> List[int]:
        """
        Every retrievable value, read directly from the window.

        Raises:
            CapacityError: If a chain is cyclic or longer than the heap
        """
        layout, window, owner = self.layout, self.window, self.owner
        values: List[int] = []
        for slot in range(layout.table_size):
            stored = window.read(owner, layout.table(slot))
            if stored != NONE:
                values.append(stored)
            entry = window.read(owner, layout.head(slot))
            steps = 0
            while entry != NONE:
                steps += 1
                if steps > layout.heap_size:
                    raise CapacityError(f"Chain of slot {slot} does not terminate")
                values.append(window.read(owner, layout.heap_value(entry - 1)))
                entry = window.read(owner, layout.heap_next(entry - 1))
        return values

    @property
    def heap_used(self) -> int:
        return min(self.window.read(self.owner, self.layout.NEXT_FREE), self.layout.heap_size)
