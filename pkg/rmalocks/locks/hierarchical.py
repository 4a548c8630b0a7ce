"""
Distributed queues bound into a distributed tree.

Every element of every level owns one MCS queue (a DQ) whose TAIL lives on
the element's lowest rank. The queue at level N orders processes; the queue
at a level k < N orders the child elements of level k + 1, each represented
by a queue node hosted on the child's lowest rank. A writer climbs from
level N towards level 1 and stops as soon as a predecessor hands it the lock
locally; a holder passes the lock inside its element at most T_L,k times
before releasing the parent level.
"""

from typing import Dict

from ..base import DistributedLock, LockEnvironment
from ..exceptions import ProtocolViolationError
from ..utils.rma import NULL_RANK, REPLACE
from ..utils.status import ACQUIRE_PARENT, ACQUIRE_START, MODE_CHANGE, WAIT, status_name, tenure
from ..utils.topology import element_of, tail_host
from ..verify.events import QUEUE_ENTER


class HierarchicalLock(DistributedLock):
    """
    Writer path shared by RMA-MCS and RMA-RW.

    Subclasses decide what happens at level 1: ``_take_root`` runs when the
    level-1 queue was empty, ``_reclaim_from_readers`` when the predecessor
    signalled MODE_CHANGE, and ``_release_root`` releases level 1.
    """

    topology_aware = True

    def __init__(self, env: LockEnvironment, rank: int):
        super().__init__(env, rank)
        spec = env.topology
        self.levels = spec.N
        self._node: Dict[int, int] = {}
        self._tail: Dict[int, int] = {}
        self._tag: Dict[int, int] = {}
        for level in range(1, spec.N + 1):
            if level == spec.N:
                node, tag = rank, rank
            else:
                tag = element_of(spec, rank, level + 1)
                node = tail_host(spec, level + 1, tag)
            self._node[level] = node
            self._tag[level] = tag
            self._tail[level] = tail_host(spec, level, element_of(spec, rank, level))

    def queue_node(self, level: int) -> int:
        """Rank hosting the queue node this rank uses at ``level``."""
        return self._node[level]

    def _acquire_exclusive(self) -> None:
        for level in range(self.levels, 0, -1):
            if not self._acquire_level(level):
                return

    def _acquire_level(self, level: int) -> bool:
        """Join the DQ at ``level``; True when the caller must also take ``level - 1``."""
        layout = self.env.layout
        node = self._node[level]
        status_offset = layout.status_at(level)
        pred = self._fao(node, self._tail[level], layout.tail(level), REPLACE)
        self.env.record(self.rank, QUEUE_ENTER, level, self._tag[level])
        if pred == NULL_RANK:
            if level == 1:
                self._take_root()
                return False
            self._put(ACQUIRE_START, node, status_offset)
            return True

        self._put(WAIT, node, status_offset)
        self._put(node, pred, layout.next_at(level))
        status = self._spin_until(node, status_offset, lambda value: value != WAIT)
        if status == ACQUIRE_PARENT:
            self._put(ACQUIRE_START, node, status_offset)
            return True
        if status == MODE_CHANGE:
            self._reclaim_from_readers()
        return False

    def _take_root(self) -> None:
        self._put(ACQUIRE_START, self._node[1], self.env.layout.status_at(1))

    def _reclaim_from_readers(self) -> None:
        raise ProtocolViolationError(
            f"Rank {self.rank} received {status_name(MODE_CHANGE)} from a {self.lock_name} queue")

    def _release_exclusive(self) -> None:
        self._release_level(self.levels)

    def _release_level(self, level: int) -> None:
        if level == 1:
            self._release_root()
            return
        layout = self.env.layout
        node = self._node[level]
        next_offset = layout.next_at(level)
        status_offset = layout.status_at(level)
        succ = self._get(node, next_offset)
        passes = tenure(self._get(node, status_offset))
        if succ != NULL_RANK and passes < self.env.params.threshold(level):
            self._put(passes + 1, succ, status_offset)
            self._put(NULL_RANK, node, next_offset)
            return

        self._release_level(level - 1)
        if succ == NULL_RANK:
            if self._cas(NULL_RANK, node, self._tail[level], layout.tail(level)) == node:
                return
            succ = self._spin_until(node, next_offset, lambda value: value != NULL_RANK)
        self._put(ACQUIRE_PARENT, succ, status_offset)
        self._put(NULL_RANK, node, next_offset)

    def _release_root(self) -> None:
        """Release level 1, passing the lock on without a threshold."""
        layout = self.env.layout
        node = self._node[1]
        succ = self._get(node, layout.NEXT)
        passes = tenure(self._get(node, layout.STATUS))
        if succ == NULL_RANK:
            if self._cas(NULL_RANK, node, self._tail[1], layout.tail(1)) == node:
                return
            succ = self._spin_until(node, layout.NEXT, lambda value: value != NULL_RANK)
        self._put(passes + 1, succ, layout.STATUS)
        self._put(NULL_RANK, node, layout.NEXT)
