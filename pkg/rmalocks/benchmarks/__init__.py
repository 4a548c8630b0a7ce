"""
Lock microbenchmarks and the hashtable case study.
"""

from .latency import LatencyBenchmark
from .throughput import (
    ThroughputBenchmark,
    EmptyCriticalSectionBenchmark,
    SingleOperationBenchmark,
    WorkloadCriticalSectionBenchmark,
    WaitAfterReleaseBenchmark
)
from .hashtable import HashtableBenchmark, DHT_MODE_LOCKS

__all__ = [
    'LatencyBenchmark',
    'ThroughputBenchmark',
    'EmptyCriticalSectionBenchmark',
    'SingleOperationBenchmark',
    'WorkloadCriticalSectionBenchmark',
    'WaitAfterReleaseBenchmark',
    'HashtableBenchmark',
    'DHT_MODE_LOCKS'
]
