"""
Throughput benchmarks: ECSB, SOB, WCSB and WARB.

They share one driver and differ in what happens inside the critical
section and after the release.
"""

from functools import partial
from typing import Dict, Optional

import numpy as np

from ..base import Benchmark, BenchResult, DistributedLock, LockEnvironment, LockFactory
from ..config import BenchConfig
from ..exceptions import ConfigurationError
from ..utils.rma import Endpoint

# Bounds of the random waits of WCSB and WARB, in nanoseconds.
WAIT_MIN_NS = 1000
WAIT_MAX_NS = 4000


class ThroughputBenchmark(Benchmark):
    """
    Every rank runs ``iterations`` lock/unlock rounds. Throughput is the
    number of post-warm-up rounds of all ranks divided by the time from the
    earliest end of a warm-up phase to the latest finish.
    """

    def critical_section(self, env: LockEnvironment, ep: Endpoint, writer: bool,
                         iteration: int, rng: np.random.Generator) -> None:
        pass

    def after_release(self, env: LockEnvironment, ep: Endpoint,
                      rng: np.random.Generator) -> None:
        pass

    @staticmethod
    def random_wait(rng: np.random.Generator) -> int:
        return int(rng.integers(WAIT_MIN_NS, WAIT_MAX_NS + 1))

    def run(self, env: LockEnvironment, config: BenchConfig,
            lock_factory: Optional[LockFactory]) -> BenchResult:
        if lock_factory is None:
            raise ConfigurationError(f"The {self.bench_name} benchmark needs a lock")
        roles = config.to_params().workload.assign_roles(config.procs)
        locks: Dict[int, DistributedLock] = {rank: lock_factory(env, rank)
                                             for rank in range(1, config.procs + 1)}
        self._log_run_start(config, locks[1].lock_name)
        warmup = config.warmup
        warm_end: Dict[int, int] = {}
        finish: Dict[int, int] = {}

        def worker(rank: int) -> None:
            lock = locks[rank]
            clock = env.conductor
            writer = roles[rank]
            rng = np.random.default_rng([config.seed, rank])
            if warmup == 0:
                warm_end[rank] = clock.now(rank)
            for iteration in range(config.iterations):
                if writer:
                    lock.acquire_write()
                    self.critical_section(env, lock.ep, True, iteration, rng)
                    lock.release_write()
                else:
                    lock.acquire_read()
                    self.critical_section(env, lock.ep, False, iteration, rng)
                    lock.release_read()
                self.after_release(env, lock.ep, rng)
                if iteration + 1 == warmup:
                    warm_end[rank] = clock.now(rank)
            finish[rank] = clock.now(rank)

        env.run({rank: partial(worker, rank) for rank in locks}, timeout=config.watchdog_s)

        acquires = (config.iterations - warmup) * config.procs
        elapsed = max(finish.values()) - min(warm_end.values())
        throughput = acquires / elapsed * 1e9 if elapsed > 0 else 0.0
        metrics = [
            ('throughput_ops_per_s', throughput),
            ('acquires', acquires),
            ('elapsed_ns', elapsed),
        ]
        result = BenchResult(self.bench_name, config.lock, config, metrics)
        self._log_run_complete(result)
        return result


class EmptyCriticalSectionBenchmark(ThroughputBenchmark):
    """ECSB: acquire and release an empty critical section."""

    @property
    def bench_name(self) -> str:
        return 'ecsb'

    @property
    def description(self) -> str:
        return 'throughput with an empty critical section'


class SingleOperationBenchmark(ThroughputBenchmark):
    """SOB: one memory access to a random rank inside the critical section."""

    @property
    def bench_name(self) -> str:
        return 'sob'

    @property
    def description(self) -> str:
        return 'throughput with one remote access in the critical section'

    def critical_section(self, env, ep, writer, iteration, rng):
        target = int(rng.integers(1, env.topology.P + 1))
        if writer:
            ep.put(iteration + 1, target, env.layout.DATA)
        else:
            ep.get(target, env.layout.DATA)
        ep.flush(target)


class WorkloadCriticalSectionBenchmark(ThroughputBenchmark):
    """WCSB: update a shared counter on rank 1, then compute for 1-4 us."""

    @property
    def bench_name(self) -> str:
        return 'wcsb'

    @property
    def description(self) -> str:
        return 'throughput with a counter update and local work in the critical section'

    def critical_section(self, env, ep, writer, iteration, rng):
        if writer:
            ep.accumulate(1, 1, env.layout.DATA)
        else:
            ep.get(1, env.layout.DATA)
        ep.flush(1)
        env.conductor.elapse(ep.rank, self.random_wait(rng))


class WaitAfterReleaseBenchmark(ThroughputBenchmark):
    """WARB: empty critical section, then wait 1-4 us before the next round."""

    @property
    def bench_name(self) -> str:
        return 'warb'

    @property
    def description(self) -> str:
        return 'throughput with a random wait after every release'

    def after_release(self, env, ep, rng):
        env.conductor.elapse(ep.rank, self.random_wait(rng))
