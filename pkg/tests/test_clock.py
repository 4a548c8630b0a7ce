"""
Tests for the conductors and spin back-off.
"""

import pytest

from rmalocks.exceptions import WatchdogTimeout
from rmalocks.utils.backoff import Backoff, spin_until
from rmalocks.utils.clock import VirtualClock, WallClock


class TestVirtualClock:
    """Test cases for the deterministic scheduler."""

    def test_elapse_and_pause_advance_time(self):
        clock = VirtualClock(2)
        clock.elapse(1, 500)
        clock.pause(2, 0)
        assert clock.now(1) == 500
        assert clock.now(2) == 1

    def test_runs_in_virtual_time_order(self):
        clock = VirtualClock(3)
        order = []

        def worker(rank, delays):
            for delay in delays:
                clock.elapse(rank, delay)
                order.append((clock.now(rank), rank))

        clock.run({
            1: lambda: worker(1, [30, 30, 30]),
            2: lambda: worker(2, [20, 20, 20]),
            3: lambda: worker(3, [50, 50]),
        })
        assert order == sorted(order)
        assert clock.now(3) == 100

    def test_same_schedule_for_same_seed(self):
        def trace(seed):
            clock = VirtualClock(4, jitter_ns=40, seed=seed)
            events = []

            def worker(rank):
                for _ in range(5):
                    clock.schedule_operation(rank, 1, 10, 5)
                    events.append(rank)

            clock.run({rank: (lambda r=rank: worker(r)) for rank in range(1, 5)})
            return events, [clock.now(rank) for rank in range(1, 5)]

        assert trace(3) == trace(3)

    def test_operations_queue_at_their_target(self):
        clock = VirtualClock(3)
        clock.schedule_operation(1, 3, 100, 50)
        clock.schedule_operation(2, 3, 100, 50)
        assert clock.now(1) == 150
        assert clock.now(2) == 200
        clock.schedule_operation(3, 3, 0, 0)
        assert clock.now(3) == 200
        clock.schedule_operation(3, 2, 0, 0)
        assert clock.now(3) == 201

    def test_target_queue_is_first_come_first_served(self):
        # Rank 1 hammers the target back to back; rank 2 landed before its
        # second operation and must be serviced before it.
        clock = VirtualClock(3)

        def hammer():
            for _ in range(10):
                clock.schedule_operation(1, 3, 0, 50)

        def single():
            clock.schedule_operation(2, 3, 0, 50)

        clock.run({1: hammer, 2: single})
        assert clock.now(2) == 100
        assert clock.now(1) == 550

    def test_results_are_returned(self):
        clock = VirtualClock(2)
        assert clock.run({1: lambda: 'a', 2: lambda: 'b'}) == {1: 'a', 2: 'b'}

    def test_worker_error_propagates(self):
        clock = VirtualClock(2)

        def failing():
            raise KeyError('boom')

        def looping():
            while True:
                clock.elapse(2, 10)

        with pytest.raises(KeyError):
            clock.run({1: failing, 2: looping}, timeout=10)

    def test_watchdog(self):
        clock = VirtualClock(1)

        def looping():
            while True:
                clock.elapse(1, 10)

        with pytest.raises(WatchdogTimeout):
            clock.run({1: looping}, timeout=0.5)
        assert clock.aborted


class TestWallClock:
    """Test cases for the free-running conductor."""

    def test_runs_all_workers(self):
        clock = WallClock(3)
        results = clock.run({rank: (lambda r=rank: r * 2) for rank in range(1, 4)})
        assert results == {1: 2, 2: 4, 3: 6}
        assert not clock.is_virtual

    def test_elapse_waits(self):
        clock = WallClock(1)
        start = clock.now(1)
        clock.elapse(1, 100_000)
        assert clock.now(1) - start >= 100_000


class TestBackoff:
    """Test cases for bounded exponential back-off."""

    def test_doubles_up_to_maximum(self):
        clock = VirtualClock(1)
        backoff = Backoff(clock, 1, min_ns=16, max_ns=64)
        for _ in range(5):
            backoff.pause()
        assert clock.now(1) == 16 + 32 + 64 + 64 + 64

    def test_reset(self):
        clock = VirtualClock(1)
        backoff = Backoff(clock, 1, min_ns=8, max_ns=64)
        backoff.pause()
        backoff.pause()
        backoff.reset()
        backoff.pause()
        assert clock.now(1) == 8 + 16 + 8

    def test_spin_until(self):
        clock = VirtualClock(1)
        values = iter([0, 0, 3])
        result = spin_until(lambda: next(values), lambda v: v != 0, Backoff(clock, 1))
        assert result == 3
        assert clock.now(1) == 16 + 32
