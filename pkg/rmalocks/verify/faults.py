"""
Deliberately broken locks used to check that the auditors catch violations.
"""

from ..base import DistributedLock


class BypassLock(DistributedLock):
    """
    A lock that never excludes anybody.

    Acquiring only reads the central word and then yields inside the
    critical section, so other ranks enter concurrently and the
    mutual-exclusion audit must fail.
    """

    @property
    def lock_name(self) -> str:
        return 'bypass'

    def _acquire_exclusive(self) -> None:
        self._get(1, self.env.layout.SPIN)

    def _release_exclusive(self) -> None:
        pass

    def acquire_write(self) -> None:
        super().acquire_write()
        self.env.conductor.elapse(self.rank, 1)
