"""
Conductors: the clocks that drive one thread per simulated rank.

``VirtualClock`` is a discrete-event scheduler. Every rank runs on its own OS
thread, but only one thread executes at a time: at each synchronisation point
the running thread queues itself under its virtual time and hands the baton to
the thread with the smallest (time, rank). Runs are therefore deterministic
for a fixed configuration and seed.

``WallClock`` lets the threads run freely and reads ``time.perf_counter_ns``.
"""

import heapq
import logging
import threading
import time
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..exceptions import SimulationAborted, WatchdogTimeout

logger = logging.getLogger(__name__)

# Slack given to unwinding workers after an abort.
_UNWIND_SECONDS = 5.0


class Conductor(ABC):
    """Time source and thread runner shared by a window and its workers."""

    def __init__(self, num_ranks: int):
        self.num_ranks = num_ranks
        self._aborted = threading.Event()
        self._errors: List[BaseException] = []
        self._results: Dict[int, Any] = {}
        self._local = threading.local()
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    @abstractmethod
    def is_virtual(self) -> bool:
        pass

    @abstractmethod
    def now(self, rank: int) -> int:
        """Current time of ``rank`` in nanoseconds."""
        pass

    @abstractmethod
    def elapse(self, rank: int, ns: int) -> None:
        """Account for ``ns`` of local computation by ``rank``."""
        pass

    @abstractmethod
    def pause(self, rank: int, ns: int) -> None:
        """Back off between two polls of a spin loop."""
        pass

    @abstractmethod
    def sync(self, rank: int) -> None:
        """Synchronisation point before ``rank`` touches shared memory."""
        pass

    @abstractmethod
    def schedule_operation(self, origin: int, target: int, delay_ns: int, service_ns: int) -> None:
        """
        Charge ``origin`` for one operation toward ``target``.

        Returns at the instant the operation takes effect at the target;
        the caller applies it right away, before any other rank runs.
        """
        pass

    @property
    def aborted(self) -> bool:
        return self._aborted.is_set()

    def current_rank(self) -> Optional[int]:
        """Rank of the calling worker thread, or None outside a run."""
        return getattr(self._local, 'rank', None)

    def check_abort(self) -> None:
        if self._aborted.is_set():
            raise SimulationAborted("Run was aborted")

    def abort(self) -> None:
        self._aborted.set()

    def run(self, workers: Mapping[int, Callable[[], Any]], timeout: float = 60.0) -> Dict[int, Any]:
        """
        Run one callable per rank and wait for all of them.

        Args:
            workers: Mapping from rank to the callable executed by that rank
            timeout: Wall-clock watchdog in seconds

        Returns:
            Mapping from rank to the value returned by its callable

        Raises:
            WatchdogTimeout: If the workers did not finish in time
            Exception: The first exception raised by a worker
        """
        self._aborted.clear()
        self._errors = []
        self._results = {}
        self._prepare(list(workers))

        threads = [
            threading.Thread(target=self._worker_main, args=(rank, fn),
                             name=f"rank-{rank}", daemon=True)
            for rank, fn in workers.items()
        ]
        for thread in threads:
            thread.start()
        self._kick_off()

        deadline = time.monotonic() + timeout
        for thread in threads:
            thread.join(max(0.0, deadline - time.monotonic()))

        if any(thread.is_alive() for thread in threads):
            self.abort()
            self._release_all()
            for thread in threads:
                thread.join(_UNWIND_SECONDS)
            self.logger.error(f"Watchdog expired after {timeout}s with {len(workers)} workers")
            raise WatchdogTimeout(f"Run exceeded the {timeout}s watchdog (possible deadlock or livelock)")

        if self._errors:
            raise self._errors[0]
        return dict(self._results)

    def _worker_main(self, rank: int, fn: Callable[[], Any]) -> None:
        self._local.rank = rank
        try:
            self._wait_turn(rank)
            self._results[rank] = fn()
        except SimulationAborted:
            pass
        except BaseException as e:
            self.logger.debug(f"Rank {rank} failed: {e!r}")
            self._errors.append(e)
            self.abort()
            self._release_all()
        finally:
            self._local.rank = None
            self._on_worker_exit(rank)

    def _prepare(self, ranks: List[int]) -> None:
        pass

    def _kick_off(self) -> None:
        pass

    def _wait_turn(self, rank: int) -> None:
        pass

    def _on_worker_exit(self, rank: int) -> None:
        pass

    def _release_all(self) -> None:
        pass


class VirtualClock(Conductor):
    """
    Deterministic virtual-time conductor.

    Operation cost is the hop delay plus optional seeded jitter plus the
    target's service time. Operations toward one target are serviced one at
    a time in the order they land, so hot spots queue up; an operation takes
    effect when its service slot starts.
    """

    def __init__(self, num_ranks: int, jitter_ns: int = 0, seed: int = 0):
        super().__init__(num_ranks)
        self.jitter_ns = int(jitter_ns)
        self._time = [0] * (num_ranks + 1)
        self._busy_until = [0] * (num_ranks + 1)
        self._rngs = [np.random.default_rng([seed, rank]) for rank in range(num_ranks + 1)]
        self._mutex = threading.Lock()
        self._ready: List[Tuple[int, int]] = []
        self._gates: Dict[int, threading.Semaphore] = {}

    @property
    def is_virtual(self) -> bool:
        return True

    def now(self, rank: int) -> int:
        return self._time[rank]

    def elapse(self, rank: int, ns: int) -> None:
        self._time[rank] += max(int(ns), 0)
        self.sync(rank)

    def pause(self, rank: int, ns: int) -> None:
        self.check_abort()
        self._time[rank] += max(int(ns), 1)

    def schedule_operation(self, origin: int, target: int, delay_ns: int, service_ns: int) -> None:
        issued = self._time[origin]
        if self.jitter_ns > 0:
            delay_ns += int(self._rngs[origin].integers(0, self.jitter_ns + 1))
        landing = issued + delay_ns
        self._time[origin] = landing
        self.sync(origin)
        # Every operation landing earlier holds its slot by now; take the
        # next one so later arrivals queue behind this operation (FIFO).
        start = max(landing, self._busy_until[target])
        self._busy_until[target] = start + service_ns
        if start > landing:
            self._time[origin] = start
            self.sync(origin)
        self._time[origin] = max(start + service_ns, issued + 1)

    def sync(self, rank: int) -> None:
        if self.current_rank() != rank:
            return
        self.check_abort()
        with self._mutex:
            heapq.heappush(self._ready, (self._time[rank], rank))
            _, chosen = heapq.heappop(self._ready)
        if chosen != rank:
            self._gates[chosen].release()
            self._wait_turn(rank)

    def _prepare(self, ranks: List[int]) -> None:
        self._gates = {rank: threading.Semaphore(0) for rank in ranks}
        self._ready = [(self._time[rank], rank) for rank in ranks]
        heapq.heapify(self._ready)

    def _kick_off(self) -> None:
        with self._mutex:
            if not self._ready:
                return
            _, first = heapq.heappop(self._ready)
        self._gates[first].release()

    def _wait_turn(self, rank: int) -> None:
        gate = self._gates[rank]
        while not gate.acquire(timeout=0.05):
            self.check_abort()
        self.check_abort()

    def _on_worker_exit(self, rank: int) -> None:
        if self.aborted:
            return
        with self._mutex:
            if not self._ready:
                return
            _, chosen = heapq.heappop(self._ready)
        self._gates[chosen].release()

    def _release_all(self) -> None:
        for gate in self._gates.values():
            gate.release()


class WallClock(Conductor):
    """Free-running conductor measuring real time."""

    def __init__(self, num_ranks: int, inject_latency: bool = False):
        super().__init__(num_ranks)
        self.inject_latency = inject_latency
        self._origin = time.perf_counter_ns()

    @property
    def is_virtual(self) -> bool:
        return False

    def now(self, rank: int) -> int:
        return time.perf_counter_ns() - self._origin

    def elapse(self, rank: int, ns: int) -> None:
        self._busy_wait(ns)

    def pause(self, rank: int, ns: int) -> None:
        self.check_abort()
        time.sleep(0)

    def sync(self, rank: int) -> None:
        if self.current_rank() is not None:
            self.check_abort()

    def schedule_operation(self, origin: int, target: int, delay_ns: int, service_ns: int) -> None:
        self.sync(origin)
        if self.inject_latency:
            self._busy_wait(delay_ns + service_ns)

    def _prepare(self, ranks: List[int]) -> None:
        self._origin = time.perf_counter_ns()

    def _busy_wait(self, ns: int) -> None:
        end = time.perf_counter_ns() + int(ns)
        while time.perf_counter_ns() < end:
            self.check_abort()
