"""
Base abstract classes for distributed locks and benchmarks.
"""

import logging
from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Tuple, Type

import numpy as np

from .exceptions import ProtocolViolationError
from .utils.backoff import Backoff, spin_until
from .utils.clock import Conductor, VirtualClock
from .utils.rma import SUM, AccumulateOp, Endpoint, LatencyModel, Window, create_window
from .utils.topology import (
    CounterMap,
    LockParams,
    TopologySpec,
    WindowLayout,
    layout_window,
    recommend_params,
)
from .verify.events import READ_ENTER, READ_EXIT, WRITE_ENTER, WRITE_EXIT, EventLog

READ = 'read'
WRITE = 'write'


@dataclass
class LockEnvironment:
    """
    Everything the lock handles of one run share: the window, its layout,
    the thresholds, the conductor and (optionally) the event log.
    """

    topology: TopologySpec
    counters: CounterMap
    params: LockParams
    layout: WindowLayout
    window: Window
    conductor: Conductor
    event_log: Optional[EventLog] = None
    backoff_min_ns: int = 16
    backoff_max_ns: int = 256

    @classmethod
    def create(cls,
               topology: TopologySpec,
               counters: Optional[CounterMap] = None,
               params: Optional[LockParams] = None,
               latency: Optional[LatencyModel] = None,
               conductor: Optional[Conductor] = None,
               event_log: Optional[EventLog] = None,
               strict: bool = False,
               jitter_ns: int = 0,
               seed: int = 0,
               backoff_min_ns: int = 16,
               backoff_max_ns: int = 256) -> 'LockEnvironment':
        """
        Lay out and allocate the lock window for ``topology``.

        Missing counter placement or thresholds are taken from
        ``recommend_params``; a missing conductor becomes a ``VirtualClock``.
        """
        if counters is None or params is None:
            recommended_counters, recommended_params = recommend_params(topology)
            counters = counters or recommended_counters
            params = params or recommended_params
        layout = layout_window(topology, counters, params)
        if conductor is None:
            conductor = VirtualClock(topology.P, jitter_ns=jitter_ns, seed=seed)
        window = create_window(topology.P, layout.words_per_rank, latency=latency,
                               conductor=conductor, strict=strict)
        return cls(topology=topology, counters=counters, params=params, layout=layout,
                   window=window, conductor=conductor, event_log=event_log,
                   backoff_min_ns=backoff_min_ns, backoff_max_ns=backoff_max_ns)

    def endpoint(self, rank: int) -> Endpoint:
        return self.window.endpoint(rank)

    def backoff(self, rank: int) -> Backoff:
        return Backoff(self.conductor, rank, self.backoff_min_ns, self.backoff_max_ns)

    def record(self, rank: int, kind: str, level: int = 0, element: int = 0) -> None:
        if self.event_log is not None:
            self.event_log.record(rank, kind, level, element, timestamp=self.conductor.now(rank))

    def run(self, workers: Mapping[int, Callable[[], Any]], timeout: float = 60.0) -> Dict[int, Any]:
        try:
            return self.conductor.run(workers, timeout=timeout)
        finally:
            self.window.reset_pending()


class DistributedLock(ABC):
    """
    Abstract base class for all locks.

    One instance is the handle of one rank. The public acquire/release
    methods check the holding state and record CS events; subclasses
    implement the protocol in ``_acquire_exclusive``/``_release_exclusive``
    and, for reader-writer locks, ``_acquire_shared``/``_release_shared``.
    Locks without a reader path take the exclusive path for readers.
    """

    supports_shared = False
    # Queue-enter events carry hierarchy elements (feeds the locality audit).
    topology_aware = False

    def __init__(self, env: LockEnvironment, rank: int):
        env.topology._check_rank(rank)
        self.env = env
        self.rank = rank
        self.ep = env.endpoint(rank)
        self.backoff = env.backoff(rank)
        self.logger = logging.getLogger(self.__class__.__name__)
        self._held: Optional[str] = None

    @property
    @abstractmethod
    def lock_name(self) -> str:
        """Return the name the lock is registered under."""
        pass

    @property
    def holding(self) -> Optional[str]:
        """``'read'``, ``'write'`` or None."""
        return self._held

    @abstractmethod
    def _acquire_exclusive(self) -> None:
        pass

    @abstractmethod
    def _release_exclusive(self) -> None:
        pass

    def _acquire_shared(self) -> None:
        raise NotImplementedError(f"{self.lock_name} has no reader path")

    def _release_shared(self) -> None:
        raise NotImplementedError(f"{self.lock_name} has no reader path")

    def _reader_element(self) -> int:
        """Element tag stored with this rank's reader events."""
        return 0

    def acquire_write(self) -> None:
        self._check_free()
        self._acquire_exclusive()
        self._held = WRITE
        self.env.record(self.rank, WRITE_ENTER)

    def release_write(self) -> None:
        self._check_held(WRITE)
        self.env.record(self.rank, WRITE_EXIT)
        self._held = None
        self._release_exclusive()

    def acquire_read(self) -> None:
        if not self.supports_shared:
            self.acquire_write()
            self._held = READ
            return
        self._check_free()
        self._acquire_shared()
        self._held = READ
        self.env.record(self.rank, READ_ENTER, element=self._reader_element())

    def release_read(self) -> None:
        self._check_held(READ)
        if not self.supports_shared:
            self._held = WRITE
            self.release_write()
            return
        self.env.record(self.rank, READ_EXIT, element=self._reader_element())
        self._held = None
        self._release_shared()

    @contextmanager
    def write_locked(self) -> Iterator['DistributedLock']:
        self.acquire_write()
        try:
            yield self
        finally:
            self.release_write()

    @contextmanager
    def read_locked(self) -> Iterator['DistributedLock']:
        self.acquire_read()
        try:
            yield self
        finally:
            self.release_read()

    @classmethod
    def quiesce(cls, env: LockEnvironment) -> None:
        """Bring the lock's window cells to their rest values after a run."""
        pass

    def _check_free(self) -> None:
        if self._held is not None:
            raise ProtocolViolationError(
                f"Rank {self.rank} already holds the {self.lock_name} lock ({self._held}); "
                f"locks are not reentrant")

    def _check_held(self, mode: str) -> None:
        if self._held != mode:
            raise ProtocolViolationError(
                f"Rank {self.rank} released a {mode} lock it does not hold "
                f"(holding: {self._held})")

    # Blocking RMA helpers: issue one operation and flush it.

    def _get(self, target: int, offset: int) -> int:
        ticket = self.ep.get(target, offset)
        self.ep.flush(target)
        return ticket.value

    def _put(self, value: int, target: int, offset: int) -> None:
        self.ep.put(value, target, offset)
        self.ep.flush(target)

    def _accumulate(self, value: int, target: int, offset: int, op: AccumulateOp = SUM) -> None:
        self.ep.accumulate(value, target, offset, op)
        self.ep.flush(target)

    def _fao(self, value: int, target: int, offset: int, op: AccumulateOp = SUM) -> int:
        ticket = self.ep.fao(value, target, offset, op)
        self.ep.flush(target)
        return ticket.value

    def _cas(self, value: int, compare: int, target: int, offset: int) -> int:
        ticket = self.ep.cas(value, compare, target, offset)
        self.ep.flush(target)
        return ticket.value

    def _spin_until(self, target: int, offset: int, done: Callable[[int], bool]) -> int:
        """Poll one cell with back-off until ``done`` accepts its value."""
        self.backoff.reset()
        return spin_until(lambda: self._get(target, offset), done, self.backoff)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(rank={self.rank}, holding={self._held})"


LockFactory = Type[DistributedLock]


class Benchmark(ABC):
    """
    Abstract base class for all benchmarks.

    A benchmark drives one worker per rank over a prepared environment and
    returns a ``BenchResult``.
    """

    uses_lock = True

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    @abstractmethod
    def bench_name(self) -> str:
        """Return the name the benchmark is registered under."""
        pass

    @property
    def description(self) -> str:
        return ''

    def validate_config(self, config: Any) -> bool:
        """
        Validate a configuration for this benchmark.

        Raises:
            ConfigurationError: If the configuration is unusable
        """
        return config.validate()

    @abstractmethod
    def run(self, env: LockEnvironment, config: Any,
            lock_factory: Optional[LockFactory]) -> 'BenchResult':
        """
        Run the benchmark.

        Args:
            env: Environment shared by every rank
            config: The run's ``BenchConfig``
            lock_factory: Lock class instantiated once per rank

        Returns:
            BenchResult with the measured metrics
        """
        pass

    def _log_run_start(self, config: Any, lock_name: str) -> None:
        self.logger.info(f"Starting {self.bench_name} with {lock_name}, P={config.procs}, "
                         f"iterations={config.iterations}, seed={config.seed}")

    def _log_run_complete(self, result: 'BenchResult') -> None:
        self.logger.info(f"{self.bench_name} complete: {len(result.metrics)} metrics")


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.3f}"


class BenchResult:
    """
    Container for benchmark results.

    ``metrics`` are (name, value) pairs in emission order; ``samples`` holds
    the per-rank latency samples of latency benchmarks.
    """

    def __init__(self,
                 bench: str,
                 lock: str,
                 config: Any,
                 metrics: List[Tuple[str, Any]],
                 samples: Optional[Dict[int, np.ndarray]] = None,
                 extra: Optional[Dict[str, Any]] = None):
        self.bench = bench
        self.lock = lock
        self.config = config
        self.metrics = list(metrics)
        self.samples = samples or {}
        self.extra = extra or {}
        self.audits: List[Any] = []
        self.event_log: Optional[EventLog] = None

    def metric(self, name: str) -> Any:
        for key, value in self.metrics:
            if key == name:
                return value
        raise KeyError(name)

    @property
    def mean_latency_ns(self) -> Optional[float]:
        """Mean over every post-warm-up latency sample of every rank."""
        if not self.samples:
            return None
        return float(np.mean(np.concatenate(list(self.samples.values()))))

    @property
    def throughput(self) -> Optional[float]:
        for key, value in self.metrics:
            if key == 'throughput_ops_per_s':
                return float(value)
        return None

    @property
    def audit_passed(self) -> bool:
        return all(verdict.passed for verdict in self.audits)

    @property
    def failed_audits(self) -> List[Any]:
        return [verdict for verdict in self.audits if not verdict.passed]

    def csv_rows(self) -> List[List[str]]:
        cfg = self.config
        prefix = [self.bench, self.lock, str(cfg.procs), str(cfg.tdc), cfg.tl_label,
                  str(cfg.tr), format(cfg.fw, 'g'), str(cfg.seed)]
        return [prefix + [name, format_value(value)] for name, value in self.metrics]

    def __repr__(self) -> str:
        return (f"BenchResult(bench='{self.bench}', lock='{self.lock}', "
                f"num_metrics={len(self.metrics)}, "
                f"audits_passed={self.audit_passed})")
