"""
rmalocks: topology-aware distributed locks over simulated one-sided RMA.
"""

__version__ = "1.0.0"

from .core import LockBenchmark
from .base import DistributedLock, Benchmark, BenchResult, LockEnvironment
from .config import BenchConfig

__all__ = ['LockBenchmark', 'DistributedLock', 'Benchmark', 'BenchResult',
           'LockEnvironment', 'BenchConfig']
