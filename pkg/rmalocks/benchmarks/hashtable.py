"""
DHT: mixed insert/lookup workload on one local volume.
"""

from functools import partial
from typing import Dict, List, Optional

import numpy as np

from ..base import Benchmark, BenchResult, DistributedLock, LockEnvironment, LockFactory
from ..config import BenchConfig
from ..exceptions import ConfigurationError
from ..hashtable import DistributedHashtable
from ..verify.audit import audit_hashtable_integrity

# Lock registry names behind each hashtable mode; atomics runs without a lock.
DHT_MODE_LOCKS = {
    'atomics': None,
    'rw': 'rmarw',
    'mcs': 'rmamcs',
    'crw': 'crw',
}


class HashtableBenchmark(Benchmark):
    """
    Ranks 2..P (rank 1 alone when P = 1) run ``iterations`` operations each
    against the volume of rank 1: an insert with probability F_W, a lookup
    otherwise, on values drawn uniformly from 1..value_range.

    Lock modes take the write lock around an insert and the read lock
    around a whole lookup. Reports the total execution time and checks
    afterwards that exactly the inserted multiset is retrievable.
    """

    @property
    def bench_name(self) -> str:
        return 'dht'

    @property
    def description(self) -> str:
        return 'distributed hashtable with inserts and lookups'

    def validate_config(self, config: BenchConfig) -> bool:
        config.validate()
        workers = max(config.procs - 1, 1)
        expected_inserts = workers * config.iterations * config.fw
        capacity = config.table_size + config.heap_size
        if expected_inserts > capacity:
            raise ConfigurationError(
                f"About {expected_inserts:.0f} inserts expected but the volume holds at most "
                f"{capacity}; raise --table-size/--heap-size or lower --iterations/--fw")
        return True

    @staticmethod
    def worker_ranks(procs: int) -> List[int]:
        return list(range(2, procs + 1)) if procs > 1 else [1]

    def run(self, env: LockEnvironment, config: BenchConfig,
            lock_factory: Optional[LockFactory]) -> BenchResult:
        table = DistributedHashtable.create(
            config.procs, owner=1, table_size=config.table_size, heap_size=config.heap_size,
            latency=env.window.latency_model, conductor=env.conductor,
            backoff_min_ns=config.backoff_min_ns, backoff_max_ns=config.backoff_max_ns)
        ranks = self.worker_ranks(config.procs)
        locks: Dict[int, Optional[DistributedLock]] = {
            rank: lock_factory(env, rank) if lock_factory is not None else None for rank in ranks}
        self._log_run_start(config, config.dht_mode)

        inserted: Dict[int, List[int]] = {rank: [] for rank in ranks}
        lookups: Dict[int, int] = {rank: 0 for rank in ranks}
        hits: Dict[int, int] = {rank: 0 for rank in ranks}
        start: Dict[int, int] = {}
        finish: Dict[int, int] = {}

        def worker(rank: int) -> None:
            ep = table.window.endpoint(rank)
            lock = locks[rank]
            rng = np.random.default_rng([config.seed, rank])
            start[rank] = env.conductor.now(rank)
            for _ in range(config.iterations):
                value = int(rng.integers(1, config.value_range + 1))
                if rng.random() < config.fw:
                    if lock is None:
                        table.insert(ep, value)
                    else:
                        with lock.write_locked():
                            table.insert(ep, value)
                    inserted[rank].append(value)
                else:
                    if lock is None:
                        found = table.lookup(ep, value)
                    else:
                        with lock.read_locked():
                            found = table.lookup(ep, value)
                    lookups[rank] += 1
                    hits[rank] += int(found)
            finish[rank] = env.conductor.now(rank)

        env.run({rank: partial(worker, rank) for rank in ranks}, timeout=config.watchdog_s)

        all_inserted = [value for rank in ranks for value in inserted[rank]]
        metrics = [
            ('total_time_ns', max(finish.values()) - min(start.values())),
            ('inserts', len(all_inserted)),
            ('lookups', sum(lookups.values())),
            ('lookup_hits', sum(hits.values())),
        ]
        result = BenchResult(self.bench_name, config.dht_mode, config, metrics,
                             extra={'table': table, 'inserted': all_inserted})
        result.audits.append(audit_hashtable_integrity(all_inserted, table.contents()))
        self._log_run_complete(result)
        return result
