"""
Randomised stress runs of every lock: mutual exclusion, thresholds,
fairness and the rest state of the window.

The quick sweep runs by default; RMALOCKS_FULL_SUITE=1 widens it to the
full acceptance grid.
"""

import itertools

import pytest

from conftest import FULL_SUITE, build_env, default_latency, run_workload, sweep
from rmalocks.locks import CentralRwLock, DmcsLock, RmamcsLock, RmarwLock, SpinLock
from rmalocks.utils.topology import TopologySpec
from rmalocks.verify.audit import (
    audit_mutual_exclusion,
    audit_quiescence,
    audit_run,
    audit_thresholds,
)
from rmalocks.verify.events import QUEUE_ENTER, READ_ENTER, WRITE_ENTER

LOCKS = [SpinLock, DmcsLock, RmamcsLock, RmarwLock, CentralRwLock]
PROCS = [4, 8, 16, 32] if FULL_SUITE else [4, 8]
LEVELS = [1, 2, 3]


def stress_env(P, N, seed, **kwargs):
    spec = TopologySpec.uniform(P, N, 2)
    return build_env(P, N=N, fanout=2, latency=default_latency(spec), jitter_ns=60, seed=seed,
                     **kwargs)


@pytest.mark.slow
@pytest.mark.parametrize("lock_cls,P,N", list(itertools.product(LOCKS, PROCS, LEVELS)))
def test_mutual_exclusion(lock_cls, P, N):
    for seed in range(sweep(1, 100)):
        env = stress_env(P, N, seed)
        run_workload(lock_cls, env, acquires=sweep(8, 20), fw=0.25, seed=seed)
        events = env.event_log.events
        verdict = audit_mutual_exclusion(events)
        assert verdict, f"seed {seed}: {verdict}"
        assert audit_quiescence(env), f"seed {seed}: {audit_quiescence(env)}"
        entries = sum(1 for e in events if e.kind in (READ_ENTER, WRITE_ENTER))
        assert entries == P * sweep(8, 20)


@pytest.mark.slow
@pytest.mark.parametrize("P", [8, 16] if FULL_SUITE else [8])
def test_rmarw_thresholds(P):
    for seed in range(sweep(2, 100)):
        env = stress_env(P, 2, seed, tl=[4, 4], tr=8)
        run_workload(RmarwLock, env, acquires=sweep(10, 20), fw=0.25, seed=seed)
        verdicts = audit_run(env.event_log.events, env.params, env.topology, env=env)
        assert all(verdicts), f"seed {seed}: {[str(v) for v in verdicts if not v]}"


@pytest.mark.slow
@pytest.mark.parametrize("N", [2, 3])
def test_rmamcs_locality(N):
    P = 16
    for seed in range(sweep(2, 20)):
        env = stress_env(P, N, seed, tl=[2] * N)
        run_workload(RmamcsLock, env, acquires=10, seed=seed)
        verdict = audit_thresholds(env.event_log.events, env.params, env.topology)
        assert verdict, f"seed {seed}: {verdict}"


@pytest.mark.slow
def test_dmcs_is_fifo():
    for seed in range(sweep(2, 20)):
        env = stress_env(16, 2, seed)
        run_workload(DmcsLock, env, acquires=10, seed=seed)
        events = env.event_log.events
        assert ([e.rank for e in events if e.kind == QUEUE_ENTER]
                == [e.rank for e in events if e.kind == WRITE_ENTER])


@pytest.mark.slow
@pytest.mark.parametrize("lock_cls", [RmarwLock, CentralRwLock])
def test_readers_only(lock_cls):
    env = stress_env(8, 2, 0, tr=4)
    run_workload(lock_cls, env, acquires=20, fw=0.0)
    assert audit_mutual_exclusion(env.event_log.events)
    assert audit_quiescence(env)
    assert env.event_log.occupancy.readers == 0


@pytest.mark.slow
def test_strict_mode_run():
    env = stress_env(8, 2, 0, strict=True)
    run_workload(RmarwLock, env, acquires=10, fw=0.5)
    assert audit_mutual_exclusion(env.event_log.events)
