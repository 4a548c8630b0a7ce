"""
Tests for the linearizability checker and for the linearizability of
concurrent window operations.
"""

from functools import partial

import numpy as np
import pytest

from conftest import sweep
from rmalocks.exceptions import ConfigurationError
from rmalocks.utils.clock import VirtualClock
from rmalocks.utils.rma import REPLACE, SUM, LatencyModel, create_window
from rmalocks.verify.linearizability import (
    MAX_CONTEXTS,
    MAX_OPS_PER_CONTEXT,
    HistoryRecorder,
    MultisetModel,
    Operation,
    RegisterModel,
    linearizability_check,
)


def op(context, kind, args, result, invoked, responded):
    return Operation(context, kind, tuple(args), result, invoked, responded)


class TestChecker:
    """Test cases for hand-written histories."""

    def test_single_context_is_linearizable(self):
        history = [
            op(1, 'put', [5], None, 1, 2),
            op(1, 'get', [], 5, 3, 4),
            op(1, 'fao', [2, SUM], 5, 5, 6),
            op(1, 'cas', [0, 7], 7, 7, 8),
            op(1, 'get', [], 0, 9, 10),
        ]
        verdict = linearizability_check(history)
        assert verdict
        assert verdict.message.startswith('put@1')

    def test_duplicate_fao_results(self):
        history = [
            op(1, 'fao', [1], 0, 1, 4),
            op(2, 'fao', [1], 0, 2, 3),
        ]
        assert not linearizability_check(history)

    def test_overlapping_operations_may_reorder(self):
        history = [
            op(1, 'put', [3], None, 1, 4),
            op(2, 'get', [], 0, 2, 3),
        ]
        assert linearizability_check(history)

    def test_real_time_order_is_respected(self):
        history = [
            op(1, 'put', [3], None, 1, 2),
            op(2, 'get', [], 0, 3, 4),
        ]
        assert not linearizability_check(history)

    def test_replace_accumulate(self):
        history = [
            op(1, 'accumulate', [9, REPLACE], None, 1, 2),
            op(2, 'fao', [1, SUM], 9, 3, 4),
            op(1, 'get', [], 10, 5, 6),
        ]
        assert linearizability_check(history)

    def test_initial_value(self):
        history = [op(1, 'get', [], 4, 1, 2)]
        assert not linearizability_check(history)
        assert linearizability_check(history, RegisterModel(initial_value=4))

    def test_too_many_contexts(self):
        history = [op(c, 'get', [], 0, 2 * c, 2 * c + 1) for c in range(MAX_CONTEXTS + 1)]
        with pytest.raises(ConfigurationError, match="contexts"):
            linearizability_check(history)

    def test_too_many_operations(self):
        history = [op(1, 'get', [], 0, 2 * i, 2 * i + 1) for i in range(MAX_OPS_PER_CONTEXT + 1)]
        with pytest.raises(ConfigurationError, match="operations"):
            linearizability_check(history)

    def test_multiset_model(self):
        history = [
            op(1, 'insert', [5], None, 1, 2),
            op(2, 'lookup', [5], True, 3, 4),
            op(3, 'lookup', [6], False, 3, 5),
        ]
        assert linearizability_check(history, MultisetModel())
        history.append(op(3, 'lookup', [5], False, 6, 7))
        assert not linearizability_check(history, MultisetModel())


class TestRecorder:
    """Test cases for history recording."""

    def test_call_records_timestamps(self):
        recorder = HistoryRecorder()
        assert recorder.call(1, 'get', lambda: 7) == 7
        recorder.call(2, 'put', lambda: None, 3)
        first, second = recorder.history
        assert (first.invoked, first.responded) == (1, 2)
        assert (second.invoked, second.responded) == (3, 4)
        assert second.args == (3,)
        assert recorder.pending == 0

    def test_pending_until_response(self):
        recorder = HistoryRecorder()
        token = recorder.invoke(1, 'get')
        assert recorder.pending == 1
        recorder.respond(token, 0)
        assert recorder.pending == 0


def random_window_history(seed):
    """Run random single-cell operations from up to five ranks and record them."""
    rng = np.random.default_rng(seed)
    contexts = int(rng.integers(2, MAX_CONTEXTS + 1))
    clock = VirtualClock(contexts, jitter_ns=80, seed=seed)
    window = create_window(contexts, 1, latency=LatencyModel(intra_element_delay=100),
                           conductor=clock)
    recorder = HistoryRecorder()
    plans = {}
    for rank in range(1, contexts + 1):
        count = int(rng.integers(1, MAX_OPS_PER_CONTEXT + 1))
        plans[rank] = [(str(rng.choice(['put', 'get', 'accumulate', 'fao', 'cas'])),
                        int(rng.integers(0, 4)), int(rng.integers(0, 4)))
                       for _ in range(count)]

    def worker(rank):
        ep = window.endpoint(rank)
        for kind, a, b in plans[rank]:
            if kind == 'put':
                token = recorder.invoke(rank, kind, a)
                ep.put(a, 1, 0)
            elif kind == 'get':
                token = recorder.invoke(rank, kind)
                ticket = ep.get(1, 0)
            elif kind == 'accumulate':
                token = recorder.invoke(rank, kind, a, SUM)
                ep.accumulate(a, 1, 0, SUM)
            elif kind == 'fao':
                token = recorder.invoke(rank, kind, a, SUM)
                ticket = ep.fao(a, 1, 0, SUM)
            else:
                token = recorder.invoke(rank, kind, a, b)
                ticket = ep.cas(a, b, 1, 0)
            ep.flush(1)
            result = ticket.value if kind in ('get', 'fao', 'cas') else None
            recorder.respond(token, result)
            clock.elapse(rank, int(rng_delays[rank].integers(0, 150)))

    rng_delays = {rank: np.random.default_rng([seed, rank]) for rank in plans}
    clock.run({rank: partial(worker, rank) for rank in plans})
    return recorder.history


class TestWindowHistories:
    """Random concurrent histories on one window cell must be linearizable."""

    @pytest.mark.parametrize("seed", range(sweep(100, 1000)))
    def test_random_history(self, seed):
        history = random_window_history(seed)
        verdict = linearizability_check(history, RegisterModel())
        assert verdict, f"seed {seed}: {verdict}"
