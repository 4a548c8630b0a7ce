"""
Tests for the distributed hashtable and its benchmark.
"""

from functools import partial

import numpy as np
import pytest

from conftest import sweep
from rmalocks import BenchConfig
from rmalocks.benchmarks import HashtableBenchmark
from rmalocks.core import run_dht_bench
from rmalocks.exceptions import CapacityError, ConfigurationError
from rmalocks.hashtable import DistributedHashtable, VolumeLayout
from rmalocks.utils.clock import VirtualClock
from rmalocks.utils.rma import LatencyModel, create_window
from rmalocks.verify.linearizability import (
    MAX_CONTEXTS,
    MAX_OPS_PER_CONTEXT,
    HistoryRecorder,
    MultisetModel,
    linearizability_check,
)


class TestVolume:
    """Test cases for single-rank hashtable operations."""

    def setup_method(self):
        self.table = DistributedHashtable.create(2, owner=1, table_size=8, heap_size=4)
        self.ep = self.table.window.endpoint(2)

    def test_insert_and_lookup(self):
        self.table.insert(self.ep, 3)
        assert self.table.lookup(self.ep, 3)
        assert not self.table.lookup(self.ep, 4)
        assert self.table.contents() == [3]
        assert self.table.heap_used == 0

    def test_collisions_go_to_the_heap(self):
        for value in (3, 11, 19):
            self.table.insert(self.ep, value)
        assert self.table.heap_used == 2
        assert sorted(self.table.contents()) == [3, 11, 19]
        assert self.table.lookup(self.ep, 19)
        assert not self.table.lookup(self.ep, 27)

    def test_duplicates_are_kept(self):
        self.table.insert(self.ep, 5)
        self.table.insert(self.ep, 5)
        assert self.table.contents() == [5, 5]

    def test_heap_exhaustion(self):
        for value in (1, 9, 17, 25, 33):
            self.table.insert(self.ep, value)
        with pytest.raises(CapacityError):
            self.table.insert(self.ep, 41)
        assert self.table.heap_used == 4
        assert len(self.table.contents()) == 5

    def test_zero_is_reserved(self):
        with pytest.raises(ValueError):
            self.table.insert(self.ep, 0)
        with pytest.raises(ValueError):
            self.table.lookup(self.ep, 0)

    def test_volume_layout(self):
        layout = VolumeLayout(table_size=8, heap_size=4)
        assert layout.table(0) == 1
        assert layout.head(0) == 9
        assert layout.last(7) == 24
        assert layout.heap_value(0) == 25
        assert layout.heap_next(0) == 29
        assert layout.heap_ready(3) == 36
        assert layout.words == 37

    def test_window_too_small(self):
        with pytest.raises(ConfigurationError):
            DistributedHashtable(create_window(1, 4), table_size=8, heap_size=4)
        with pytest.raises(ConfigurationError):
            VolumeLayout(table_size=0, heap_size=4)


def random_table_history(seed):
    """Concurrent inserts and lookups on a two-slot table, recorded per rank."""
    rng = np.random.default_rng(seed)
    contexts = int(rng.integers(2, MAX_CONTEXTS + 1))
    clock = VirtualClock(contexts, jitter_ns=80, seed=seed)
    table = DistributedHashtable.create(contexts, owner=1, table_size=2, heap_size=32,
                                        latency=LatencyModel(intra_element_delay=100),
                                        conductor=clock)
    recorder = HistoryRecorder()
    plans = {
        rank: [(str(rng.choice(['insert', 'lookup'])), int(rng.integers(1, 5)))
               for _ in range(int(rng.integers(1, MAX_OPS_PER_CONTEXT + 1)))]
        for rank in range(1, contexts + 1)
    }

    def worker(rank):
        ep = table.window.endpoint(rank)
        delays = np.random.default_rng([seed, rank])
        for kind, value in plans[rank]:
            fn = table.insert if kind == 'insert' else table.lookup
            recorder.call(rank, kind, lambda: fn(ep, value), value)
            clock.elapse(rank, int(delays.integers(0, 150)))

    clock.run({rank: partial(worker, rank) for rank in plans})
    return recorder.history, table


class TestConcurrentTable:
    """Test cases for lock-free concurrent access."""

    @pytest.mark.parametrize("seed", range(sweep(30, 300)))
    def test_histories_are_linearizable(self, seed):
        history, table = random_table_history(seed)
        verdict = linearizability_check(history, MultisetModel())
        assert verdict, verdict.message
        inserted = sorted(op.args[0] for op in history if op.kind == 'insert')
        assert sorted(table.contents()) == inserted


class TestHashtableBenchmark:
    """Test cases for the DHT benchmark."""

    PROCS = 32 if sweep(0, 1) else 8
    ITERATIONS = 400 if sweep(0, 1) else 60

    @pytest.mark.parametrize("mode", ['atomics', 'rw', 'mcs', 'crw'])
    def test_integrity(self, mode):
        config = BenchConfig(bench='dht', dht_mode=mode, procs=self.PROCS, fw=0.2,
                             iterations=self.ITERATIONS, table_size=256, heap_size=4096, seed=2)
        result = run_dht_bench(config)
        assert result.audit_passed
        workers = self.PROCS - 1
        assert result.metric('inserts') + result.metric('lookups') == workers * self.ITERATIONS
        assert result.metric('inserts') == len(result.extra['inserted'])
        assert result.metric('total_time_ns') > 0
        assert result.lock == mode

    def test_single_process(self):
        config = BenchConfig(bench='dht', dht_mode='rw', procs=1, levels=1, fw=0.5,
                             iterations=40, table_size=16, heap_size=64)
        result = run_dht_bench(config)
        assert result.audit_passed
        assert result.metric('inserts') + result.metric('lookups') == 40

    def test_capacity_is_checked_up_front(self):
        config = BenchConfig(bench='dht', procs=4, iterations=1000, fw=1.0,
                             table_size=8, heap_size=8)
        with pytest.raises(ConfigurationError):
            HashtableBenchmark().validate_config(config)

    def test_worker_ranks(self):
        assert HashtableBenchmark.worker_ranks(1) == [1]
        assert HashtableBenchmark.worker_ranks(4) == [2, 3, 4]

    def test_readers_share_the_lock(self):
        def total_time(mode):
            config = BenchConfig(bench='dht', dht_mode=mode, procs=8, fw=0.0, iterations=30,
                                 table_size=64, heap_size=64)
            return run_dht_bench(config).metric('total_time_ns')

        assert total_time('rw') < total_time('mcs')

    def test_thirty_two_readers_finish(self):
        # Readers keep arriving at a counter whose reset is still in flight.
        config = BenchConfig(bench='dht', dht_mode='rw', procs=32, levels=2, fw=0.0,
                             iterations=20, watchdog_s=120.0)
        result = run_dht_bench(config)
        assert result.audit_passed
        assert result.metric('lookups') == 31 * 20
        assert result.metric('inserts') == 0


@pytest.mark.slow
class TestHashtableDirections:
    """Relative orderings of the hashtable modes at P = 32 on a two-level machine."""

    ITERATIONS = sweep(60, 200)

    def _run(self, mode, fw, seed=0):
        config = BenchConfig(bench='dht', dht_mode=mode, procs=32, levels=2, fw=fw, seed=seed,
                             iterations=self.ITERATIONS, table_size=256, heap_size=2048,
                             watchdog_s=300.0)
        result = run_dht_bench(config)
        assert result.audit_passed
        return result.metric('total_time_ns')

    @pytest.mark.parametrize("fw", [0.0, 0.2])
    def test_lock_modes_complete(self, fw):
        for mode in ('atomics', 'rw'):
            assert self._run(mode, fw) > 0

    def test_lookups_without_lock_are_fastest(self):
        assert self._run('atomics', 0.0) < self._run('rw', 0.0)

    def test_readers_share_under_inserts(self):
        assert self._run('rw', 0.2) < self._run('mcs', 0.2)
