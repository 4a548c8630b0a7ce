"""
Distributed lock implementations.
"""

from .spin import SpinLock
from .dmcs import DmcsLock
from .hierarchical import HierarchicalLock
from .rmamcs import RmamcsLock
from .rmarw import RmarwLock
from .central_rw import CentralRwLock

__all__ = [
    'SpinLock',
    'DmcsLock',
    'HierarchicalLock',
    'RmamcsLock',
    'RmarwLock',
    'CentralRwLock'
]
