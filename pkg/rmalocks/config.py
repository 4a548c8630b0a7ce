"""
Benchmark configuration.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional

from .exceptions import ConfigurationError
from .utils.rma import LatencyModel
from .utils.topology import (
    CounterMap,
    LockParams,
    TopologySpec,
    WorkloadSpec,
    format_int_list,
)

logger = logging.getLogger(__name__)

# Share of the first measurements of every process that is discarded.
WARMUP_FRACTION = 0.10

DEFAULT_ITERATIONS = 10000
DEFAULT_LOCALITY_THRESHOLD = 16
DEFAULT_READER_THRESHOLD = 64

DHT_MODES = ('atomics', 'rw', 'mcs', 'crw')


def warmup_count(samples: int) -> int:
    """Number of leading samples dropped from ``samples`` measurements."""
    return int(math.floor(samples * WARMUP_FRACTION + 1e-9))


class SimulationParams(NamedTuple):
    topology: TopologySpec
    counters: CounterMap
    params: LockParams
    workload: WorkloadSpec
    latency: LatencyModel


@dataclass
class BenchConfig:
    """
    Every knob of one benchmark run.

    Optional fields are filled from the others in ``__post_init__``: the
    fan-out defaults to 2 per level, T_DC to the processes of one leaf
    element, every T_L,i to 16 and the inter-element delays to 1000 ns per
    level of distance.
    """

    lock: str = 'rmarw'
    bench: str = 'lb'
    procs: int = 4
    levels: int = 2
    fanout: Optional[List[int]] = None
    tdc: Optional[int] = None
    tl: Optional[List[int]] = None
    tr: int = DEFAULT_READER_THRESHOLD
    fw: float = 0.25
    iterations: int = DEFAULT_ITERATIONS
    seed: int = 0
    latency_intra: int = 100
    latency_inter: Optional[List[int]] = None
    service_ns: int = 50
    atomic_service_ns: int = 200
    jitter_ns: int = 0
    no_latency: bool = False
    wallclock: bool = False
    inject_latency: bool = False
    audit: bool = False
    dht_mode: str = 'rw'
    table_size: int = 1024
    heap_size: int = 1024
    value_range: Optional[int] = None
    watchdog_s: float = 60.0
    strict: bool = False
    inject_fault: bool = False
    backoff_min_ns: int = 16
    backoff_max_ns: int = 256

    def __post_init__(self):
        self.lock = str(self.lock).lower()
        self.bench = str(self.bench).lower()
        self.dht_mode = str(self.dht_mode).lower()
        if self.levels >= 1:
            if self.fanout is None:
                self.fanout = [2] * (self.levels - 1)
            if self.tl is None:
                self.tl = [DEFAULT_LOCALITY_THRESHOLD] * self.levels
            if self.latency_inter is None:
                self.latency_inter = [1000 * (self.levels - level + 1)
                                      for level in range(2, self.levels + 1)]
        self.fanout = list(self.fanout or [])
        self.tl = list(self.tl or [])
        self.latency_inter = list(self.latency_inter or [])
        if self.tdc is None and self.levels >= 1 and self.procs >= 1:
            leaves = math.prod(self.fanout) if self.fanout else 1
            self.tdc = max(self.procs // max(leaves, 1), 1)
        if self.value_range is None:
            self.value_range = 4 * self.table_size

    def validate(self) -> bool:
        """
        Check the configuration.

        Returns:
            True if the configuration is usable

        Raises:
            ConfigurationError: On the first invalid field
        """
        if self.procs < 1:
            raise ConfigurationError(f"procs must be >= 1, got {self.procs}")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 <= self.fw <= 1.0:
            raise ConfigurationError(f"fw must be within [0, 1], got {self.fw}")
        if self.levels < 1:
            raise ConfigurationError(f"levels must be >= 1, got {self.levels}")
        if len(self.tl) != self.levels:
            raise ConfigurationError(f"--tl needs {self.levels} values, got {len(self.tl)}")
        if len(self.latency_inter) != self.levels - 1:
            raise ConfigurationError(
                f"--latency-inter needs {self.levels - 1} values, got {len(self.latency_inter)}")
        if (self.latency_intra < 0 or self.service_ns < 0 or self.atomic_service_ns < 0
                or self.jitter_ns < 0):
            raise ConfigurationError("Latencies, service time and jitter must be >= 0")
        if any(d < 0 for d in self.latency_inter):
            raise ConfigurationError(f"Inter-element latencies must be >= 0: {self.latency_inter}")
        if self.dht_mode not in DHT_MODES:
            raise ConfigurationError(
                f"Unsupported dht mode '{self.dht_mode}'. Supported modes: {', '.join(DHT_MODES)}")
        if self.table_size < 1 or self.heap_size < 1:
            raise ConfigurationError("Table and heap sizes must be >= 1")
        if self.value_range is None or self.value_range < 1:
            raise ConfigurationError(f"value_range must be >= 1, got {self.value_range}")
        if self.watchdog_s <= 0:
            raise ConfigurationError(f"watchdog must be positive, got {self.watchdog_s}")
        if self.backoff_min_ns < 1 or self.backoff_max_ns < self.backoff_min_ns:
            raise ConfigurationError("Back-off bounds must satisfy 1 <= min <= max")
        # Building the parameter objects runs their own checks.
        self.to_params()
        return True

    def to_params(self) -> SimulationParams:
        topology = TopologySpec(P=self.procs, N=self.levels, children_per_element=tuple(self.fanout))
        counters = CounterMap(T_DC=int(self.tdc), P=self.procs)
        params = LockParams(T_L=tuple(self.tl), T_R=self.tr)
        params.validate_for(topology)
        workload = WorkloadSpec(F_W=self.fw, seed=self.seed)
        if self.no_latency:
            latency = LatencyModel(topology=topology)
        else:
            per_level = {level: int(delay)
                         for level, delay in zip(range(2, self.levels + 1), self.latency_inter)}
            latency = LatencyModel(per_level_delay=per_level,
                                   intra_element_delay=self.latency_intra,
                                   service_ns=self.service_ns,
                                   atomic_service_ns=self.atomic_service_ns,
                                   topology=topology)
        return SimulationParams(topology, counters, params, workload, latency)

    def with_seed(self, seed: int) -> 'BenchConfig':
        return replace(self, seed=seed)

    @property
    def tl_label(self) -> str:
        return format_int_list(self.tl)

    @property
    def warmup(self) -> int:
        return warmup_count(self.iterations)
