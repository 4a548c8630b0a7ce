"""
RMA-MCS: topology-aware exclusive lock (distributed queues and tree, no counters).
"""

from .hierarchical import HierarchicalLock


class RmamcsLock(HierarchicalLock):
    """
    Exclusive-only hierarchical MCS lock.

    Levels N..2 pass the lock locally up to T_L,i times; the level-1 queue
    behaves like D-MCS and ignores T_L,1.
    """

    @property
    def lock_name(self) -> str:
        return 'rmamcs'
