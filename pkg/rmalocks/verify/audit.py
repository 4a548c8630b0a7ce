"""
Post-hoc auditors over an event log and over the window after a run.

Audits are pure: they read the log (or the window cells directly, without
issuing operations) and return an ``AuditVerdict``.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set

from ..utils.status import SENTINEL, WAIT
from ..utils.topology import LockParams, TopologySpec, element_of, tail_host
from .events import (
    COUNTER_RESET,
    MODE_CHANGE,
    MODE_READ,
    QUEUE_ENTER,
    READ_ENTER,
    READ_EXIT,
    WRITE_ENTER,
    WRITE_EXIT,
    Event,
    OccupancyState,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AuditVerdict:
    passed: bool
    check: str
    message: str = ''
    seq: Optional[int] = None

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        status = 'PASS' if self.passed else 'FAIL'
        where = f" at seq {self.seq}" if self.seq is not None else ''
        detail = f": {self.message}" if self.message else ''
        return f"[{status}] {self.check}{where}{detail}"


def _passed(check: str) -> AuditVerdict:
    return AuditVerdict(True, check)


def _failed(check: str, message: str, seq: Optional[int] = None) -> AuditVerdict:
    logger.debug(f"{check} failed at seq {seq}: {message}")
    return AuditVerdict(False, check, message, seq)


def audit_mutual_exclusion(events: Iterable[Event]) -> AuditVerdict:
    """
    Replay the log and check the occupancy invariant after every event.

    Also checks that every rank alternates enter and exit events of the
    same kind.
    """
    check = 'mutual-exclusion'
    state = OccupancyState()
    inside: Dict[int, str] = {}
    for event in events:
        kind = event.kind
        if kind in (READ_ENTER, WRITE_ENTER):
            if event.rank in inside:
                return _failed(check, f"rank {event.rank} entered twice without exiting", event.seq)
            inside[event.rank] = kind
        elif kind in (READ_EXIT, WRITE_EXIT):
            expected = READ_ENTER if kind == READ_EXIT else WRITE_ENTER
            if inside.get(event.rank) != expected:
                return _failed(check, f"rank {event.rank} sent {kind} without matching enter", event.seq)
            del inside[event.rank]
        else:
            continue
        state.apply(kind)
        if not state.valid:
            return _failed(check, f"{state.writers} writer(s) and {state.readers} reader(s) "
                                  f"inside the critical section", event.seq)
    return _passed(check)


def audit_writer_batches(events: Sequence[Event], params: LockParams) -> AuditVerdict:
    """
    Writer entries between two hand-overs to readers must not exceed T_W.

    Only applies when readers take part in the run; writer-only runs have
    nobody to hand over to.
    """
    check = 'writer-batch'
    if not any(event.kind == READ_ENTER for event in events):
        return _passed(check)
    bound = params.T_W
    batch = 0
    for event in events:
        if event.kind == READ_ENTER or (event.kind == MODE_CHANGE and event.element == MODE_READ):
            batch = 0
        elif event.kind == WRITE_ENTER:
            batch += 1
            if batch > bound:
                return _failed(check, f"{batch} writer entries exceed T_W={bound}", event.seq)
    return _passed(check)


def audit_reader_batches(events: Sequence[Event], params: LockParams) -> AuditVerdict:
    """Reader entries on one counter between two of its resets must not exceed T_R."""
    check = 'reader-batch'
    bound = params.T_R
    batches: Counter = Counter()
    for event in events:
        if event.kind == COUNTER_RESET:
            batches[event.element] = 0
        elif event.kind == READ_ENTER:
            batches[event.element] += 1
            if batches[event.element] > bound:
                return _failed(check, f"{batches[event.element]} reader entries on counter "
                                      f"{event.element} exceed T_R={bound}", event.seq)
    return _passed(check)


def _parent_of(spec: TopologySpec, level: int, element: int) -> int:
    """Level-(level - 1) element containing ``element`` of ``level``."""
    return element_of(spec, tail_host(spec, level, element), level - 1)


def audit_locality(events: Sequence[Event], params: LockParams, spec: TopologySpec) -> AuditVerdict:
    """
    Consecutive writer entries from one element while another element
    waits in the same parent queue must not exceed prod(T_L,k for k >= level).
    """
    check = 'locality'
    for level in range(2, spec.N + 1):
        bound = params.locality_bound(level)
        waiting: Set[int] = set()
        run_element: Optional[int] = None
        run_length = 0
        for event in events:
            if event.kind == QUEUE_ENTER and event.level == level - 1:
                waiting.add(event.element)
            elif event.kind == WRITE_ENTER:
                element = element_of(spec, event.rank, level)
                waiting.discard(element)
                if element != run_element:
                    run_element = element
                    run_length = 0
                parent = element_of(spec, event.rank, level - 1)
                if any(_parent_of(spec, level, other) == parent for other in waiting):
                    run_length += 1
                    if run_length > bound:
                        return _failed(check, f"element {element} at level {level} entered "
                                              f"{run_length} times while others waited "
                                              f"(bound {bound})", event.seq)
    return _passed(check)


def audit_thresholds(events: Iterable[Event], params: LockParams,
                     spec: Optional[TopologySpec] = None,
                     check_locality: bool = True) -> AuditVerdict:
    """
    Check the writer-batch, reader-batch and per-level locality bounds.

    Returns:
        The first failing verdict, or a passing ``thresholds`` verdict
    """
    events = list(events)
    verdicts = [audit_writer_batches(events, params), audit_reader_batches(events, params)]
    if check_locality and spec is not None:
        verdicts.append(audit_locality(events, params, spec))
    for verdict in verdicts:
        if not verdict.passed:
            return verdict
    return _passed('thresholds')


def audit_quiescence(env: Any) -> AuditVerdict:
    """
    Check the rest state of a lock window after all workers have joined:
    every TAIL and NEXT is empty, no STATUS is WAIT, every counter reads
    (0, 0) and the central word is free.
    """
    check = 'quiescence'
    window, layout, spec = env.window, env.layout, env.topology
    problems: List[str] = []
    for rank in range(1, spec.P + 1):
        for level in range(1, spec.N + 1):
            tail = window.read(rank, layout.tail(level))
            if tail != 0:
                problems.append(f"TAIL{level} of rank {rank} is {tail}")
            nxt = window.read(rank, layout.next_at(level))
            if nxt != 0:
                problems.append(f"NEXT{level} of rank {rank} is {nxt}")
            if window.read(rank, layout.status_at(level)) == WAIT:
                problems.append(f"STATUS{level} of rank {rank} is still WAIT")
    for host in env.counters.hosts():
        arrive = window.read(host, layout.ARRIVE)
        depart = window.read(host, layout.DEPART)
        if (arrive, depart) != (0, 0):
            mode = ' (WRITE mode)' if arrive >= SENTINEL else ''
            problems.append(f"counter at rank {host} reads ({arrive}, {depart}){mode}")
    spin = window.read(1, layout.SPIN)
    if spin != 0:
        problems.append(f"SPIN word is {spin}")
    if problems:
        return _failed(check, '; '.join(problems[:5]) + (' ...' if len(problems) > 5 else ''))
    return _passed(check)


def audit_hashtable_integrity(inserted: Iterable[int], stored: Iterable[int]) -> AuditVerdict:
    """The multiset of inserted values must equal the multiset retrievable afterwards."""
    check = 'hashtable-integrity'
    expected, found = Counter(inserted), Counter(stored)
    if expected == found:
        return _passed(check)
    lost = expected - found
    spurious = found - expected
    return _failed(check, f"{sum(lost.values())} lost and {sum(spurious.values())} "
                          f"unexpected values")


def audit_run(events: Iterable[Event], params: LockParams, spec: TopologySpec,
              env: Optional[Any] = None, check_locality: bool = True) -> List[AuditVerdict]:
    """Run every log audit, plus the quiescence audit when ``env`` is given."""
    events = list(events)
    verdicts = [
        audit_mutual_exclusion(events),
        audit_writer_batches(events, params),
        audit_reader_batches(events, params),
    ]
    if check_locality:
        verdicts.append(audit_locality(events, params, spec))
    if env is not None:
        verdicts.append(audit_quiescence(env))
    for verdict in verdicts:
        if verdict.passed:
            logger.info(f"Audit {verdict.check}: passed")
        else:
            logger.warning(f"Audit {verdict}")
    return verdicts
