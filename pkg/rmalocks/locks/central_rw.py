"""
Centralised reader-writer lock on a single word.
"""

from ..base import DistributedLock
from ..utils.rma import NULL_RANK

WRITER_FLAG = 1 << 62


class CentralRwLock(DistributedLock):
    """
    Topology-oblivious reader-writer baseline.

    The SPIN word on rank 1 counts active readers; a writer owns the lock
    while WRITER_FLAG is set. Readers back out and retry when they meet the
    flag.
    """

    supports_shared = True

    @property
    def lock_name(self) -> str:
        return 'crw'

    def _acquire_exclusive(self) -> None:
        spin = self.env.layout.SPIN
        self.backoff.reset()
        while self._cas(WRITER_FLAG, NULL_RANK, 1, spin) != NULL_RANK:
            self.backoff.pause()

    def _release_exclusive(self) -> None:
        self._accumulate(-WRITER_FLAG, 1, self.env.layout.SPIN)

    def _acquire_shared(self) -> None:
        spin = self.env.layout.SPIN
        while True:
            if self._fao(1, 1, spin) < WRITER_FLAG:
                return
            self._accumulate(-1, 1, spin)
            self._spin_until(1, spin, lambda value: value < WRITER_FLAG)

    def _release_shared(self) -> None:
        self._accumulate(-1, 1, self.env.layout.SPIN)
