"""
LB: latency of one acquire/release pair.
"""

from functools import partial
from typing import Dict, Optional

import numpy as np

from ..base import Benchmark, BenchResult, DistributedLock, LockEnvironment, LockFactory
from ..config import BenchConfig
from ..exceptions import ConfigurationError


class LatencyBenchmark(Benchmark):
    """
    Every rank acquires and releases the lock ``iterations`` times and
    measures each pair on its own clock. Writers (chosen by the workload
    seed) take the write lock, the others the read lock.

    Emits one ``latency_ns_rank_<r>`` row per rank: the mean of that rank's
    samples after the warm-up.
    """

    @property
    def bench_name(self) -> str:
        return 'lb'

    @property
    def description(self) -> str:
        return 'latency of an acquire/release pair'

    def run(self, env: LockEnvironment, config: BenchConfig,
            lock_factory: Optional[LockFactory]) -> BenchResult:
        if lock_factory is None:
            raise ConfigurationError("The latency benchmark needs a lock")
        roles = config.to_params().workload.assign_roles(config.procs)
        locks: Dict[int, DistributedLock] = {rank: lock_factory(env, rank)
                                             for rank in range(1, config.procs + 1)}
        lock_name = locks[1].lock_name
        self._log_run_start(config, lock_name)
        samples = {rank: np.zeros(config.iterations, dtype=np.int64) for rank in locks}

        def worker(rank: int) -> None:
            lock = locks[rank]
            clock = env.conductor
            out = samples[rank]
            writer = roles[rank]
            for iteration in range(config.iterations):
                start = clock.now(rank)
                if writer:
                    lock.acquire_write()
                    lock.release_write()
                else:
                    lock.acquire_read()
                    lock.release_read()
                out[iteration] = clock.now(rank) - start

        env.run({rank: partial(worker, rank) for rank in locks}, timeout=config.watchdog_s)

        warmup = config.warmup
        kept = {rank: values[warmup:] for rank, values in samples.items()}
        metrics = [(f"latency_ns_rank_{rank}", float(np.mean(values)))
                   for rank, values in sorted(kept.items())]
        result = BenchResult(self.bench_name, config.lock, config, metrics, samples=kept)
        self._log_run_complete(result)
        return result
