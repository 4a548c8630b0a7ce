"""
D-MCS: the topology-oblivious distributed MCS queue lock.
"""

from ..base import DistributedLock, LockEnvironment
from ..utils.rma import NULL_RANK, REPLACE
from ..utils.status import ACQUIRE_START, WAIT
from ..verify.events import QUEUE_ENTER


class DmcsLock(DistributedLock):
    """
    Distributed MCS lock.

    The queue TAIL lives on rank 1; every rank owns one NEXT and one
    STATUS cell and spins only on its own STATUS. An uncontended
    acquire/release pair costs one FAO, one get and one CAS.
    """

    def __init__(self, env: LockEnvironment, rank: int):
        super().__init__(env, rank)
        self.tail_rank = 1
        self.tail_offset = env.layout.tail(1)

    @property
    def lock_name(self) -> str:
        return 'dmcs'

    def _acquire_exclusive(self) -> None:
        layout = self.env.layout
        pred = self._fao(self.rank, self.tail_rank, self.tail_offset, REPLACE)
        self.env.record(self.rank, QUEUE_ENTER, 1, self.rank)
        if pred == NULL_RANK:
            return
        # WAIT must be in place before the predecessor can see us.
        self._put(WAIT, self.rank, layout.STATUS)
        self._put(self.rank, pred, layout.NEXT)
        self._spin_until(self.rank, layout.STATUS, lambda status: status != WAIT)

    def _release_exclusive(self) -> None:
        layout = self.env.layout
        succ = self._get(self.rank, layout.NEXT)
        if succ == NULL_RANK:
            if self._cas(NULL_RANK, self.rank, self.tail_rank, self.tail_offset) == self.rank:
                return
            # Someone swapped the tail but has not linked in yet.
            succ = self._spin_until(self.rank, layout.NEXT, lambda nxt: nxt != NULL_RANK)
        self._put(ACQUIRE_START, succ, layout.STATUS)
        self._put(NULL_RANK, self.rank, layout.NEXT)
