"""
RMA-RW: topology-aware reader-writer lock.

Writers use the distributed queues and tree of ``hierarchical.py``; readers
use the distributed counter: one (ARRIVE, DEPART) pair every T_DC ranks.
A counter is in WRITE mode while SENTINEL is folded into its ARRIVE field.
"""

from ..base import LockEnvironment
from ..utils.rma import NULL_RANK, REPLACE
from ..utils.status import MODE_CHANGE, SENTINEL, ACQUIRE_START, tenure
from ..utils.topology import counter_rank, tail_host
from ..verify.events import COUNTER_RESET, MODE_CHANGE as MODE_CHANGE_EVENT, MODE_READ, MODE_WRITE
from .hierarchical import HierarchicalLock


class RmarwLock(HierarchicalLock):
    """
    Reader-writer lock with per-level locality thresholds.

    At level 1 a writer hands the lock to the next writer until T_L,1
    tenures have passed, so at most T_W writers enter between two
    hand-overs to the readers. A reader enters when its counter's arrival
    count was below T_R in READ mode.
    """

    supports_shared = True

    def __init__(self, env: LockEnvironment, rank: int):
        super().__init__(env, rank)
        self.counter_host = counter_rank(env.counters, rank)
        self.counter_index = env.counters.counter_index(rank)
        self.root_tail = tail_host(env.topology, 1, 1)

    @property
    def lock_name(self) -> str:
        return 'rmarw'

    def _reader_element(self) -> int:
        return self.counter_index

    # Counter manipulation

    def set_counters_to_write(self) -> None:
        """Fold SENTINEL into every ARRIVE field, blocking new readers."""
        for host in self.env.counters.hosts():
            self._accumulate(SENTINEL, host, self.env.layout.ARRIVE)

    def drain_readers(self) -> None:
        """Wait until every reader that entered before the mode switch has left."""
        layout = self.env.layout
        for host in self.env.counters.hosts():
            self.backoff.reset()
            while True:
                arrive = self._get(host, layout.ARRIVE)
                depart = self._get(host, layout.DEPART)
                if arrive - SENTINEL == depart:
                    break
                self.backoff.pause()

    def reset_counter(self, host: int, keep_mode: bool = False) -> None:
        """
        Remove the departed readers from the counter at ``host``.

        DEPART is read and cleared atomically and subtracted from ARRIVE
        together with SENTINEL, if present; ``keep_mode`` leaves the
        sentinel in place.
        """
        layout = self.env.layout
        departed = self._fao(0, host, layout.DEPART, REPLACE)
        arrive = self._get(host, layout.ARRIVE)
        delta = -departed
        if not keep_mode and arrive >= SENTINEL:
            delta -= SENTINEL
        self._accumulate(delta, host, layout.ARRIVE)
        self.env.record(self.rank, COUNTER_RESET, element=self.env.counters.counter_index(host))

    def reset_counters(self) -> None:
        """Reset every counter and hand the lock to the readers."""
        for host in self.env.counters.hosts():
            self.reset_counter(host)
        self.env.record(self.rank, MODE_CHANGE_EVENT, 1, MODE_READ)

    # Writer path, level 1

    def _take_root(self) -> None:
        self._reclaim_from_readers()

    def _reclaim_from_readers(self) -> None:
        self.set_counters_to_write()
        self.drain_readers()
        self.env.record(self.rank, MODE_CHANGE_EVENT, 1, MODE_WRITE)
        self._put(ACQUIRE_START, self._node[1], self.env.layout.status_at(1))

    def _release_root(self) -> None:
        layout = self.env.layout
        node = self._node[1]
        succ = self._get(node, layout.NEXT)
        passes = tenure(self._get(node, layout.STATUS))
        handed_to_readers = False
        if passes >= self.env.params.threshold(1):
            self.reset_counters()
            handed_to_readers = True
            next_status = MODE_CHANGE
        else:
            next_status = passes + 1
        if succ == NULL_RANK:
            if not handed_to_readers:
                self.reset_counters()
            next_status = MODE_CHANGE
            if self._cas(NULL_RANK, node, self._tail[1], layout.tail(1)) == node:
                return
            succ = self._spin_until(node, layout.NEXT, lambda value: value != NULL_RANK)
        self._put(next_status, succ, layout.STATUS)
        self._put(NULL_RANK, node, layout.NEXT)

    # Reader path

    def _writer_waiting(self) -> bool:
        return self._get(self.root_tail, self.env.layout.tail(1)) != NULL_RANK

    def _await_counter(self) -> None:
        """Barrier spin: wait until the counter admits readers again."""
        layout = self.env.layout
        threshold = self.env.params.T_R
        self.backoff.reset()
        while True:
            arrive = self._get(self.counter_host, layout.ARRIVE)
            if arrive < threshold:
                return
            if arrive < SENTINEL and not self._writer_waiting():
                return
            self.backoff.pause()

    def _acquire_shared(self) -> None:
        layout = self.env.layout
        host = self.counter_host
        threshold = self.env.params.T_R
        barrier = False
        while True:
            if barrier:
                self._await_counter()
            arrived = self._fao(1, host, layout.ARRIVE)
            if arrived < threshold:
                return
            barrier = True
            if arrived < SENTINEL and not self._writer_waiting():
                # Reader batch is exhausted and no writer wants the lock.
                # Any reader at or past T_R resets, not only the one that drew
                # exactly T_R; resets only subtract departed readers, so
                # overlapping ones are harmless.
                self.reset_counter(host, keep_mode=True)
                barrier = False
            self._accumulate(-1, host, layout.ARRIVE)
            self.backoff.pause()

    def _release_shared(self) -> None:
        self._accumulate(1, self.counter_host, self.env.layout.DEPART)

    @classmethod
    def quiesce(cls, env: LockEnvironment) -> None:
        """Clear the departed readers of every counter; the mode is left alone."""
        handle = cls(env, 1)
        for host in env.counters.hosts():
            handle.reset_counter(host, keep_mode=True)
