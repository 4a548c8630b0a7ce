"""
Exhaustive linearizability checking of small concurrent histories.

A history is a list of completed operations, each with logical invocation
and response timestamps taken from one global counter. The checker searches
for a sequential order that respects real-time precedence and is accepted
by a sequential model, memoising (remaining operations, model state).
"""

import itertools
import logging
import threading
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Set, Tuple

from ..exceptions import ConfigurationError
from ..utils.rma import AccumulateOp, wrap_int64
from .audit import AuditVerdict

logger = logging.getLogger(__name__)

MAX_CONTEXTS = 5
MAX_OPS_PER_CONTEXT = 6


@dataclass(frozen=True)
class Operation:
    context: int
    kind: str
    args: Tuple[Any, ...]
    result: Any
    invoked: int
    responded: int


class HistoryRecorder:
    """Thread-safe builder of a history; timestamps come from one shared counter."""

    def __init__(self):
        self._mutex = threading.Lock()
        self._clock = itertools.count(1)
        self._open: Dict[int, Tuple[int, str, Tuple[Any, ...], int]] = {}
        self._ids = itertools.count(1)
        self._operations: List[Operation] = []

    def invoke(self, context: int, kind: str, *args: Any) -> int:
        with self._mutex:
            token = next(self._ids)
            self._open[token] = (context, kind, args, next(self._clock))
        return token

    def respond(self, token: int, result: Any = None) -> Operation:
        with self._mutex:
            context, kind, args, invoked = self._open.pop(token)
            operation = Operation(context, kind, args, result, invoked, next(self._clock))
            self._operations.append(operation)
        return operation

    def call(self, context: int, kind: str, fn: Callable[[], Any], *args: Any) -> Any:
        """Record ``fn()`` as one operation ``kind(*args)`` of ``context``."""
        token = self.invoke(context, kind, *args)
        result = fn()
        self.respond(token, result)
        return result

    @property
    def history(self) -> List[Operation]:
        with self._mutex:
            return list(self._operations)

    @property
    def pending(self) -> int:
        return len(self._open)


class SequentialModel(ABC):
    """Sequential object: ``step`` returns the next state or None if ``op`` is impossible."""

    @abstractmethod
    def initial(self) -> Hashable:
        pass

    @abstractmethod
    def step(self, state: Hashable, op: Operation) -> Optional[Hashable]:
        pass


class RegisterModel(SequentialModel):
    """One window cell under put/get/accumulate/fao/cas."""

    def __init__(self, initial_value: int = 0):
        self.initial_value = initial_value

    def initial(self) -> int:
        return self.initial_value

    def step(self, state: int, op: Operation) -> Optional[int]:
        kind, args = op.kind, op.args
        if kind == 'put':
            return wrap_int64(args[0])
        if kind == 'get':
            return state if op.result == state else None
        if kind in ('accumulate', 'fao'):
            if kind == 'fao' and op.result != state:
                return None
            operation = args[1] if len(args) > 1 else AccumulateOp.SUM
            if operation is AccumulateOp.REPLACE:
                return wrap_int64(args[0])
            return wrap_int64(state + args[0])
        if kind == 'cas':
            if op.result != state:
                return None
            return wrap_int64(args[0]) if state == wrap_int64(args[1]) else state
        raise ConfigurationError(f"Register model has no operation '{kind}'")


class MultisetModel(SequentialModel):
    """A multiset under insert/lookup; duplicates are kept."""

    def initial(self) -> Tuple[int, ...]:
        return ()

    def step(self, state: Tuple[int, ...], op: Operation) -> Optional[Tuple[int, ...]]:
        if op.kind == 'insert':
            return tuple(sorted(state + (op.args[0],)))
        if op.kind == 'lookup':
            return state if bool(op.result) == (op.args[0] in state) else None
        raise ConfigurationError(f"Multiset model has no operation '{op.kind}'")


def _check_bounds(history: Sequence[Operation]) -> None:
    per_context: Dict[int, int] = defaultdict(int)
    for op in history:
        per_context[op.context] += 1
        if op.responded <= op.invoked:
            raise ConfigurationError(f"Operation {op} responded before it was invoked")
    if len(per_context) > MAX_CONTEXTS:
        raise ConfigurationError(
            f"History has {len(per_context)} contexts; at most {MAX_CONTEXTS} are searched")
    busiest = max(per_context.values(), default=0)
    if busiest > MAX_OPS_PER_CONTEXT:
        raise ConfigurationError(
            f"A context issued {busiest} operations; at most {MAX_OPS_PER_CONTEXT} are searched")


def linearizability_check(history: Sequence[Operation],
                          model: Optional[SequentialModel] = None) -> AuditVerdict:
    """
    Search for a linearization of ``history``.

    Args:
        history: Completed operations of at most 5 contexts x 6 operations
        model: Sequential model (default: a zero-initialised register)

    Returns:
        Passing verdict whose message lists a witness order, or a failing one

    Raises:
        ConfigurationError: If the history exceeds the search bounds
    """
    check = 'linearizability'
    _check_bounds(history)
    model = model or RegisterModel()
    ops = sorted(history, key=lambda op: op.invoked)
    count = len(ops)
    full = (1 << count) - 1
    dead: Set[Tuple[int, Hashable]] = set()
    order: List[int] = []

    def search(done: int, state: Hashable) -> bool:
        if done == full:
            return True
        if (done, state) in dead:
            return False
        remaining = [i for i in range(count) if not done & (1 << i)]
        horizon = min(ops[i].responded for i in remaining)
        for i in remaining:
            if ops[i].invoked > horizon:
                break
            following = model.step(state, ops[i])
            if following is None:
                continue
            order.append(i)
            if search(done | (1 << i), following):
                return True
            order.pop()
        dead.add((done, state))
        return False

    if search(0, model.initial()):
        witness = ', '.join(f"{ops[i].kind}@{ops[i].context}" for i in order)
        return AuditVerdict(True, check, witness)
    logger.debug(f"No linearization for {count} operations")
    return AuditVerdict(False, check, f"no linearization of {count} operations exists")
