"""
Emulated one-sided RMA window.

A window is a per-rank array of signed 64-bit words addressed by
(rank, offset). The calls put, get, accumulate, fao and cas are applied
atomically to the authoritative store at the instant the conductor lets
them land (see ``clock.py``); flush is a fence that validates the caller's
tickets toward one target.
"""

import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from ..exceptions import AddressingError, ConfigurationError, ContractViolationError
from .clock import Conductor
from .topology import TopologySpec, first_differing_level

logger = logging.getLogger(__name__)

NULL_RANK = 0

_INT64_MIN = -(1 << 63)
_UINT64_RANGE = 1 << 64

ATOMIC_KINDS = frozenset({'accumulate', 'fao', 'cas'})


def wrap_int64(value: int) -> int:
    """Reduce ``value`` to the signed 64-bit range (two's complement)."""
    return (int(value) - _INT64_MIN) % _UINT64_RANGE + _INT64_MIN


class AccumulateOp(Enum):
    SUM = 'sum'
    REPLACE = 'replace'


SUM = AccumulateOp.SUM
REPLACE = AccumulateOp.REPLACE


@dataclass
class LatencyModel:
    """
    Simulated cost of one operation.

    ``per_level_delay[i]`` is charged when origin and target first differ at
    level i; ``intra_element_delay`` when they share the deepest element.
    ``service_ns`` is the time the target needs per put or get;
    ``atomic_service_ns`` (default: ``service_ns``) per accumulate, FAO or
    CAS, which a NIC serialises on its atomic unit.
    """

    per_level_delay: Dict[int, int] = field(default_factory=dict)
    intra_element_delay: int = 0
    service_ns: int = 0
    atomic_service_ns: Optional[int] = None
    topology: Optional[TopologySpec] = None

    def __post_init__(self):
        if self.atomic_service_ns is None:
            self.atomic_service_ns = self.service_ns
        if self.intra_element_delay < 0 or self.service_ns < 0 or self.atomic_service_ns < 0:
            raise ConfigurationError("Latency model delays must be >= 0")
        if any(d < 0 for d in self.per_level_delay.values()):
            raise ConfigurationError(f"Per-level delays must be >= 0: {self.per_level_delay}")
        self._matrix: Optional[np.ndarray] = None

    @classmethod
    def zero(cls) -> 'LatencyModel':
        return cls()

    def delay(self, origin: int, target: int) -> int:
        """Hop delay in nanoseconds from ``origin`` to ``target``."""
        if self._matrix is not None:
            return int(self._matrix[origin, target])
        if self.topology is None:
            if origin == target or not self.per_level_delay:
                return self.intra_element_delay
            return max(self.per_level_delay.values())
        level = first_differing_level(self.topology, origin, target)
        if level is None:
            return self.intra_element_delay
        return int(self.per_level_delay.get(level, self.intra_element_delay))

    def service_for(self, kind: str) -> int:
        """Target-side service time of one operation of ``kind``."""
        if kind in ATOMIC_KINDS:
            return int(self.atomic_service_ns)
        return self.service_ns

    def build(self, num_ranks: int) -> None:
        """Precompute the delay matrix for ranks 1..num_ranks."""
        matrix = np.zeros((num_ranks + 1, num_ranks + 1), dtype=np.int64)
        for origin in range(1, num_ranks + 1):
            for target in range(1, num_ranks + 1):
                matrix[origin, target] = self.delay(origin, target)
        self._matrix = matrix


class OpTicket:
    """Handle of one issued operation; its value is valid after the flush."""

    __slots__ = ('origin', 'target', '_value', '_flushed', '_strict', '_queue')

    def __init__(self, origin: int, target: int, value: Optional[int], strict: bool,
                 queue: Optional[List['OpTicket']] = None):
        self.origin = origin
        self.target = target
        self._value = value
        self._flushed = False
        self._strict = strict
        self._queue = queue

    @property
    def flushed(self) -> bool:
        return self._flushed

    @property
    def value_slot(self) -> Optional[int]:
        if not self._flushed:
            if self._strict:
                raise ContractViolationError(
                    f"Ticket from rank {self.origin} to rank {self.target} read before flush")
            # Consumed without a flush: nothing will wait on it any more.
            queue = self._queue
            self._complete()
            if queue is not None and self in queue:
                queue.remove(self)
        return self._value

    value = value_slot

    def _complete(self) -> None:
        self._flushed = True
        self._queue = None

    def __repr__(self) -> str:
        return (f"OpTicket(origin={self.origin}, target={self.target}, "
                f"flushed={self._flushed})")


class Window:
    """
    Shared window of ``num_ranks`` x ``words_per_rank`` int64 cells.

    Cells are addressed with ranks 1..P; row 0 of the backing array is unused.
    """

    def __init__(self, num_ranks: int, words_per_rank: int,
                 latency: Optional[LatencyModel] = None,
                 conductor: Optional[Conductor] = None,
                 strict: bool = False):
        if num_ranks < 1 or words_per_rank < 1:
            raise ConfigurationError(
                f"Window sizes must be >= 1, got {num_ranks} ranks x {words_per_rank} words")
        self.num_ranks = num_ranks
        self.words_per_rank = words_per_rank
        self.cells = np.zeros((num_ranks + 1, words_per_rank), dtype=np.int64)
        self.latency_model = latency
        self.conductor = conductor
        self.strict = strict
        self.op_count = np.zeros(num_ranks + 1, dtype=np.int64)
        self._mutex = threading.Lock()
        self._pending: Dict[int, Dict[int, List[OpTicket]]] = {}
        if latency is not None:
            latency.build(num_ranks)

    @property
    def num_cells(self) -> int:
        return self.num_ranks * self.words_per_rank

    def read(self, rank: int, offset: int) -> int:
        """Inspect a cell without issuing an operation (no timing, no ticket)."""
        self._check_address(rank, offset)
        return int(self.cells[rank, offset])

    def write(self, rank: int, offset: int, value: int) -> None:
        """Set a cell directly; meant for initialisation and tests."""
        self._check_address(rank, offset)
        self.cells[rank, offset] = wrap_int64(value)

    def endpoint(self, rank: int) -> 'Endpoint':
        if not 1 <= rank <= self.num_ranks:
            raise AddressingError(f"Rank {rank} outside 1..{self.num_ranks}")
        return Endpoint(self, rank)

    def _check_address(self, rank: int, offset: int) -> None:
        if not 1 <= rank <= self.num_ranks:
            raise AddressingError(f"Rank {rank} outside 1..{self.num_ranks}")
        if not 0 <= offset < self.words_per_rank:
            raise AddressingError(f"Offset {offset} outside 0..{self.words_per_rank - 1}")

    def issue(self, origin: int, target: int, offset: int, kind: str,
              operand: int = 0, compare: int = 0,
              op: AccumulateOp = AccumulateOp.SUM) -> OpTicket:
        """Apply one operation atomically and return its ticket."""
        self._check_address(target, offset)
        if not 1 <= origin <= self.num_ranks:
            raise AddressingError(f"Origin rank {origin} outside 1..{self.num_ranks}")
        conductor = self.conductor
        if conductor is not None:
            model = self.latency_model
            delay = model.delay(origin, target) if model is not None else 0
            service = model.service_for(kind) if model is not None else 0
            conductor.schedule_operation(origin, target, delay, service)

        with self._mutex:
            current = int(self.cells[target, offset])
            result: Optional[int] = None
            if kind == 'put':
                self.cells[target, offset] = wrap_int64(operand)
            elif kind == 'get':
                result = current
            elif kind in ('accumulate', 'fao'):
                if op is AccumulateOp.SUM:
                    self.cells[target, offset] = wrap_int64(current + operand)
                else:
                    self.cells[target, offset] = wrap_int64(operand)
                if kind == 'fao':
                    result = current
            elif kind == 'cas':
                if current == wrap_int64(compare):
                    self.cells[target, offset] = wrap_int64(operand)
                result = current
            else:
                raise ValueError(f"Unknown window operation '{kind}'")
            self.op_count[origin] += 1

        queue = self._pending.setdefault(origin, {}).setdefault(target, [])
        ticket = OpTicket(origin, target, result, self.strict, queue)
        queue.append(ticket)
        return ticket

    def flush(self, origin: int, target: int) -> None:
        """Complete every ticket ``origin`` issued toward ``target``."""
        if not 1 <= target <= self.num_ranks:
            raise AddressingError(f"Rank {target} outside 1..{self.num_ranks}")
        tickets = self._pending.get(origin, {}).pop(target, None)
        if tickets:
            for ticket in tickets:
                ticket._complete()

    def pending_count(self, origin: int) -> int:
        """Number of tickets ``origin`` issued that are neither flushed nor read."""
        return sum(len(tickets) for tickets in self._pending.get(origin, {}).values())

    def reset_pending(self) -> None:
        """Complete and forget every outstanding ticket, e.g. after a run."""
        for targets in self._pending.values():
            for tickets in targets.values():
                for ticket in tickets:
                    ticket._complete()
        self._pending.clear()


class Endpoint:
    """One rank's view of a window; every call is issued with this rank as origin."""

    __slots__ = ('window', 'rank')

    def __init__(self, window: Window, rank: int):
        self.window = window
        self.rank = rank

    def put(self, src_data: int, target: int, offset: int) -> OpTicket:
        return self.window.issue(self.rank, target, offset, 'put', operand=src_data)

    def get(self, target: int, offset: int) -> OpTicket:
        return self.window.issue(self.rank, target, offset, 'get')

    def accumulate(self, oprd: int, target: int, offset: int,
                   op: AccumulateOp = AccumulateOp.SUM) -> OpTicket:
        return self.window.issue(self.rank, target, offset, 'accumulate', operand=oprd, op=op)

    def fao(self, oprd: int, target: int, offset: int,
            op: AccumulateOp = AccumulateOp.SUM) -> OpTicket:
        return self.window.issue(self.rank, target, offset, 'fao', operand=oprd, op=op)

    def cas(self, src_data: int, cmp_data: int, target: int, offset: int) -> OpTicket:
        return self.window.issue(self.rank, target, offset, 'cas', operand=src_data, compare=cmp_data)

    def flush(self, target: int) -> None:
        self.window.flush(self.rank, target)

    def __repr__(self) -> str:
        return f"Endpoint(rank={self.rank})"


def create_window(num_ranks: int, words_per_rank: int,
                  latency: Optional[LatencyModel] = None,
                  conductor: Optional[Conductor] = None,
                  strict: bool = False) -> Window:
    """
    Create a zero-initialised window.

    Args:
        num_ranks: Number of ranks P (cells are addressed with ranks 1..P)
        words_per_rank: Words exposed by every rank
        latency: Optional latency model charged on operation issue
        conductor: Clock that times operations (None: untimed)
        strict: Reject ticket reads before the matching flush

    Returns:
        The new window

    Raises:
        ConfigurationError: If a size is zero or negative
    """
    window = Window(num_ranks, words_per_rank, latency=latency, conductor=conductor, strict=strict)
    logger.debug(f"Created window with {num_ranks} ranks x {words_per_rank} words")
    return window


def put(w: Window, src_data: int, target: int, offset: int, origin: int = 1) -> OpTicket:
    return w.issue(origin, target, offset, 'put', operand=src_data)


def get(w: Window, target: int, offset: int, origin: int = 1) -> OpTicket:
    return w.issue(origin, target, offset, 'get')


def accumulate(w: Window, oprd: int, target: int, offset: int,
               op: AccumulateOp = AccumulateOp.SUM, origin: int = 1) -> OpTicket:
    return w.issue(origin, target, offset, 'accumulate', operand=oprd, op=op)


def fao(w: Window, oprd: int, target: int, offset: int,
        op: AccumulateOp = AccumulateOp.SUM, origin: int = 1) -> OpTicket:
    return w.issue(origin, target, offset, 'fao', operand=oprd, op=op)


def cas(w: Window, src_data: int, cmp_data: int, target: int, offset: int,
        origin: int = 1) -> OpTicket:
    return w.issue(origin, target, offset, 'cas', operand=src_data, compare=cmp_data)


def flush(w: Window, target: int, origin: int = 1) -> None:
    w.flush(origin, target)
