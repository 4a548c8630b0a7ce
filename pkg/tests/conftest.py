"""
Shared fixtures for the rmalocks test-suite.

Set RMALOCKS_FULL_SUITE=1 to run the acceptance sweeps with their full seed
counts; the default is a quick sweep over the same checks.
"""

import os
import sys
from functools import partial

import numpy as np
import pytest

# Add the package to the Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rmalocks.base import LockEnvironment
from rmalocks.utils.rma import LatencyModel
from rmalocks.utils.topology import CounterMap, LockParams, TopologySpec, WorkloadSpec
from rmalocks.verify.events import EventLog

FULL_SUITE = os.environ.get('RMALOCKS_FULL_SUITE', '') not in ('', '0')


def sweep(quick: int, full: int) -> int:
    """Number of seeds for a sweep."""
    return full if FULL_SUITE else quick


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance sweeps")


def build_env(P, N=1, fanout=2, tl=None, tr=64, tdc=None, latency=None, seed=0,
              jitter_ns=0, event_log=True, strict=False):
    spec = TopologySpec.uniform(P, N, fanout)
    counters = CounterMap(T_DC=tdc or spec.procs_per_leaf, P=P)
    params = LockParams(T_L=tuple(tl or [4] * N), T_R=tr)
    return LockEnvironment.create(spec, counters=counters, params=params, latency=latency,
                                  event_log=EventLog() if event_log else None,
                                  strict=strict, jitter_ns=jitter_ns, seed=seed)


def run_workload(lock_cls, env, acquires=20, fw=1.0, seed=0, timeout=60.0, cs_ns=0):
    """Every rank takes the lock ``acquires`` times in its seeded role; returns the locks."""
    P = env.topology.P
    roles = WorkloadSpec(F_W=fw, seed=seed).assign_roles(P)
    locks = {rank: lock_cls(env, rank) for rank in range(1, P + 1)}

    def worker(rank):
        lock = locks[rank]
        rng = np.random.default_rng([seed, rank])
        for _ in range(acquires):
            if roles[rank]:
                lock.acquire_write()
            else:
                lock.acquire_read()
            env.conductor.elapse(rank, cs_ns + int(rng.integers(0, 200)))
            if roles[rank]:
                lock.release_write()
            else:
                lock.release_read()
            env.conductor.elapse(rank, int(rng.integers(0, 500)))

    env.run({rank: partial(worker, rank) for rank in locks}, timeout=timeout)
    lock_cls.quiesce(env)
    return locks


def default_latency(spec):
    per_level = {level: 1000 * (spec.N - level + 1) for level in range(2, spec.N + 1)}
    return LatencyModel(per_level_delay=per_level, intra_element_delay=100,
                        service_ns=50, topology=spec)


@pytest.fixture
def make_env():
    return build_env


@pytest.fixture
def workload():
    return run_workload
