"""
Test-and-set spin lock on one global word.
"""

from ..base import DistributedLock
from ..utils.rma import NULL_RANK


class SpinLock(DistributedLock):
    """
    Baseline lock: every rank CASes its own rank into the SPIN word on
    rank 1 until the word was free, and releases with a single put.
    """

    @property
    def lock_name(self) -> str:
        return 'spin'

    def _acquire_exclusive(self) -> None:
        spin = self.env.layout.SPIN
        self.backoff.reset()
        while self._cas(self.rank, NULL_RANK, 1, spin) != NULL_RANK:
            self.backoff.pause()

    def _release_exclusive(self) -> None:
        self._put(NULL_RANK, 1, self.env.layout.SPIN)
