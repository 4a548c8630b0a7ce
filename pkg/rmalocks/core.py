"""
Core orchestrator for lock benchmarks.
"""

import logging
from dataclasses import replace
from typing import Dict, List, Optional, Type

from .base import Benchmark, BenchResult, DistributedLock, LockEnvironment
from .benchmarks import (
    DHT_MODE_LOCKS,
    EmptyCriticalSectionBenchmark,
    HashtableBenchmark,
    LatencyBenchmark,
    SingleOperationBenchmark,
    WaitAfterReleaseBenchmark,
    WorkloadCriticalSectionBenchmark,
)
from .config import BenchConfig
from .exceptions import ConfigurationError
from .locks import CentralRwLock, DmcsLock, RmamcsLock, RmarwLock, SpinLock
from .utils.clock import Conductor, VirtualClock, WallClock
from .verify.audit import audit_run
from .verify.events import EventLog
from .verify.faults import BypassLock


class LockBenchmark:
    """
    Main orchestrator for benchmark runs.

    Keeps the registries of locks and benchmarks, assembles the environment
    of a run from its ``BenchConfig``, runs the benchmark and, on request,
    audits the event log and the window afterwards.
    """

    def __init__(self, log_level: int = logging.INFO):
        """
        Initialize the orchestrator.

        Args:
            log_level: Logging level (default: INFO)
        """
        self._setup_logging(log_level)
        self.logger = logging.getLogger(self.__class__.__name__)

        self.locks: Dict[str, Type[DistributedLock]] = {
            'spin': SpinLock,
            'dmcs': DmcsLock,
            'rmamcs': RmamcsLock,
            'rmarw': RmarwLock,
            'crw': CentralRwLock,
        }

        self.benchmarks: Dict[str, Type[Benchmark]] = {
            'lb': LatencyBenchmark,
            'ecsb': EmptyCriticalSectionBenchmark,
            'sob': SingleOperationBenchmark,
            'wcsb': WorkloadCriticalSectionBenchmark,
            'warb': WaitAfterReleaseBenchmark,
            'dht': HashtableBenchmark,
        }

        self.logger.debug(f"Initialized with {len(self.locks)} locks and "
                          f"{len(self.benchmarks)} benchmarks")

    def _setup_logging(self, log_level: int) -> None:
        """Set up logging configuration."""
        logging.basicConfig(
            level=log_level,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

    def list_supported_locks(self) -> List[str]:
        return list(self.locks.keys())

    def list_supported_benchmarks(self) -> List[str]:
        return list(self.benchmarks.keys())

    def get_lock_class(self, name: str) -> Type[DistributedLock]:
        """
        Look up a lock class.

        Raises:
            ConfigurationError: If the lock is not registered
        """
        name = name.lower()
        if name not in self.locks:
            supported = ', '.join(self.locks.keys())
            raise ConfigurationError(f"Unsupported lock '{name}'. Supported locks: {supported}")
        return self.locks[name]

    def get_benchmark(self, name: str) -> Benchmark:
        """
        Instantiate a benchmark.

        Raises:
            ConfigurationError: If the benchmark is not registered
        """
        name = name.lower()
        if name not in self.benchmarks:
            supported = ', '.join(self.benchmarks.keys())
            raise ConfigurationError(f"Unsupported benchmark '{name}'. Supported benchmarks: {supported}")
        return self.benchmarks[name]()

    def register_lock(self, name: str, lock_class: Type[DistributedLock]) -> None:
        if not issubclass(lock_class, DistributedLock):
            raise ConfigurationError("Lock class must inherit from DistributedLock")
        self.locks[name.lower()] = lock_class
        self.logger.info(f"Registered lock: {name.lower()}")

    def register_benchmark(self, name: str, benchmark_class: Type[Benchmark]) -> None:
        if not issubclass(benchmark_class, Benchmark):
            raise ConfigurationError("Benchmark class must inherit from Benchmark")
        self.benchmarks[name.lower()] = benchmark_class
        self.logger.info(f"Registered benchmark: {name.lower()}")

    def resolve_lock(self, config: BenchConfig) -> Optional[Type[DistributedLock]]:
        """Lock class used by ``config`` (None for the lock-free hashtable mode)."""
        if config.inject_fault:
            self.logger.warning("Fault injection enabled: running without mutual exclusion")
            return BypassLock
        if config.bench == 'dht':
            name = DHT_MODE_LOCKS.get(config.dht_mode)
            return self.get_lock_class(name) if name is not None else None
        return self.get_lock_class(config.lock)

    def build_conductor(self, config: BenchConfig) -> Conductor:
        if config.wallclock:
            if not config.inject_latency:
                self.logger.warning("Wall-clock mode without --inject-latency measures "
                                    "shared-memory costs only")
            return WallClock(config.procs, inject_latency=config.inject_latency)
        return VirtualClock(config.procs, jitter_ns=config.jitter_ns, seed=config.seed)

    def build_environment(self, config: BenchConfig,
                          event_log: Optional[EventLog] = None) -> LockEnvironment:
        """Create the lock window, conductor and parameters of one run."""
        params = config.to_params()
        env = LockEnvironment.create(
            params.topology,
            counters=params.counters,
            params=params.params,
            latency=params.latency,
            conductor=self.build_conductor(config),
            event_log=event_log,
            strict=config.strict,
            backoff_min_ns=config.backoff_min_ns,
            backoff_max_ns=config.backoff_max_ns,
        )
        self.logger.debug(f"Built environment: P={config.procs}, N={config.levels}, "
                          f"fanout={config.fanout}, words/rank={env.layout.words_per_rank}")
        return env

    def validate(self, config: BenchConfig) -> bool:
        """
        Validate a configuration against the registries and its benchmark.

        Raises:
            ConfigurationError: If validation fails
        """
        self.get_lock_class(config.lock)
        return self.get_benchmark(config.bench).validate_config(config)

    def run(self, config: BenchConfig, record_events: bool = False) -> BenchResult:
        """
        Run one benchmark.

        Args:
            config: Run configuration
            record_events: Keep the event log even without auditing

        Returns:
            BenchResult with metrics, audit verdicts and (if recorded) the event log

        Raises:
            ConfigurationError: If the configuration is invalid
            WatchdogTimeout: If the run did not finish in time
        """
        self.logger.info(f"Running {config.bench.upper()} with lock {config.lock}, "
                         f"P={config.procs}, seed={config.seed}")
        benchmark = self.get_benchmark(config.bench)
        self.validate(config)
        lock_class = self.resolve_lock(config)

        event_log = EventLog() if (config.audit or record_events) else None
        env = self.build_environment(config, event_log)
        result = benchmark.run(env, config, lock_class)
        if lock_class is not None:
            lock_class.quiesce(env)

        result.event_log = event_log
        if config.audit and event_log is not None:
            topology_aware = lock_class is not None and lock_class.topology_aware
            result.audits.extend(audit_run(event_log.events, env.params, env.topology, env=env,
                                           check_locality=topology_aware))
            if not result.audit_passed:
                for verdict in result.failed_audits:
                    self.logger.error(f"Audit {verdict}")

        self.logger.info(f"{config.bench.upper()} finished with {len(result.metrics)} metrics")
        return result

    def batch_run(self, configs: List[BenchConfig]) -> Dict[str, BenchResult]:
        """
        Run several configurations one after the other.

        Args:
            configs: Configurations to run

        Returns:
            Dictionary mapping run IDs to BenchResults (failed runs are skipped)
        """
        results = {}

        self.logger.info(f"Starting batch of {len(configs)} runs")

        for i, config in enumerate(configs):
            run_id = f"run_{i+1}"

            try:
                self.logger.info(f"Processing {run_id}...")
                results[run_id] = self.run(config)
                self.logger.info(f"{run_id} completed successfully")

            except Exception as e:
                self.logger.error(f"{run_id} failed: {e}")
                continue

        self.logger.info(f"Batch completed: {len(results)}/{len(configs)} successful")

        return results


def seed_sweep(config: BenchConfig, count: int) -> List[BenchConfig]:
    """``count`` copies of ``config`` with consecutive seeds."""
    if count < 1:
        raise ConfigurationError(f"Seed count must be >= 1, got {count}")
    return [config.with_seed(config.seed + k) for k in range(count)]


def _run_as(config: BenchConfig, bench: str) -> BenchResult:
    return LockBenchmark(log_level=logging.WARNING).run(replace(config, bench=bench))


def run_lb(config: BenchConfig) -> BenchResult:
    return _run_as(config, 'lb')


def run_ecsb(config: BenchConfig) -> BenchResult:
    return _run_as(config, 'ecsb')


def run_sob(config: BenchConfig) -> BenchResult:
    return _run_as(config, 'sob')


def run_wcsb(config: BenchConfig) -> BenchResult:
    return _run_as(config, 'wcsb')


def run_warb(config: BenchConfig) -> BenchResult:
    return _run_as(config, 'warb')


def run_dht_bench(config: BenchConfig) -> BenchResult:
    return _run_as(config, 'dht')
