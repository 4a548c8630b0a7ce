"""
Machine hierarchy, counter placement, lock thresholds and window layout.

Ranks are numbered 1..P and elements at every level are numbered from 1.
Processes are mapped to elements in contiguous blocks, so ranks that are
close to each other share the deepest elements.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import AddressingError, ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopologySpec:
    """
    Simulated machine hierarchy.

    Level 1 is the whole machine and level N holds the leaf elements
    (typically compute nodes). ``children_per_element[i - 1]`` is the
    fan-out from level i to level i + 1.
    """

    P: int
    N: int = 1
    children_per_element: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'children_per_element', tuple(int(f) for f in self.children_per_element))
        if self.P < 1:
            raise ConfigurationError(f"Process count must be >= 1, got {self.P}")
        if self.N < 1:
            raise ConfigurationError(f"Level count must be >= 1, got {self.N}")
        if len(self.children_per_element) != self.N - 1:
            raise ConfigurationError(
                f"Expected {self.N - 1} fan-out values for {self.N} levels, "
                f"got {len(self.children_per_element)}")
        if any(f < 1 for f in self.children_per_element):
            raise ConfigurationError(f"Fan-out values must be >= 1: {list(self.children_per_element)}")
        leaves = self.element_count(self.N)
        if self.P % leaves != 0:
            raise ConfigurationError(
                f"P={self.P} is not divisible by the {leaves} leaf elements")

    @classmethod
    def uniform(cls, P: int, N: int, fanout: int = 2) -> 'TopologySpec':
        """Build a hierarchy with the same fan-out at every level."""
        return cls(P=P, N=N, children_per_element=tuple([fanout] * (N - 1)))

    def element_count(self, level: int) -> int:
        """N_i: number of elements at ``level``."""
        self._check_level(level)
        return int(np.prod(self.children_per_element[:level - 1], dtype=np.int64))

    def block_size(self, level: int) -> int:
        """Number of processes inside one element of ``level``."""
        return self.P // self.element_count(level)

    @property
    def procs_per_leaf(self) -> int:
        return self.block_size(self.N)

    def _check_level(self, level: int) -> None:
        if not 1 <= level <= self.N:
            raise AddressingError(f"Level {level} outside 1..{self.N}")

    def _check_rank(self, p: int) -> None:
        if not 1 <= p <= self.P:
            raise AddressingError(f"Rank {p} outside 1..{self.P}")


def element_of(spec: TopologySpec, p: int, i: int) -> int:
    """Return e(p, i), the element hosting rank ``p`` at level ``i``."""
    spec._check_level(i)
    spec._check_rank(p)
    return (p - 1) // spec.block_size(i) + 1


def tail_host(spec: TopologySpec, i: int, j: int) -> int:
    """Rank storing the TAIL of the DQ of element ``j`` at level ``i``."""
    spec._check_level(i)
    if not 1 <= j <= spec.element_count(i):
        raise AddressingError(f"Element {j} outside 1..{spec.element_count(i)} at level {i}")
    return (j - 1) * spec.block_size(i) + 1


def first_differing_level(spec: TopologySpec, origin: int, target: int) -> Optional[int]:
    """Smallest level at which ``origin`` and ``target`` live in different elements."""
    for level in range(1, spec.N + 1):
        if element_of(spec, origin, level) != element_of(spec, target, level):
            return level
    return None


@dataclass(frozen=True)
class CounterMap:
    """Placement of the physical reader counters: one every ``T_DC`` ranks."""

    T_DC: int
    P: int

    def __post_init__(self):
        if self.T_DC < 1:
            raise ConfigurationError(f"T_DC must be >= 1, got {self.T_DC}")
        if self.P < 1:
            raise ConfigurationError(f"Process count must be >= 1, got {self.P}")

    @property
    def num_counters(self) -> int:
        return math.ceil(self.P / self.T_DC)

    def counter_index(self, p: int) -> int:
        if not 1 <= p <= self.P:
            raise AddressingError(f"Rank {p} outside 1..{self.P}")
        return math.ceil(p / self.T_DC)

    def host_rank(self, j: int) -> int:
        if not 1 <= j <= self.num_counters:
            raise AddressingError(f"Counter {j} outside 1..{self.num_counters}")
        return (j - 1) * self.T_DC + 1

    def hosts(self) -> List[int]:
        return [self.host_rank(j) for j in range(1, self.num_counters + 1)]


def counter_rank(cm: CounterMap, p: int) -> int:
    """Return c(p), the rank hosting the counter used by reader ``p``."""
    return cm.host_rank(cm.counter_index(p))


@dataclass(frozen=True)
class LockParams:
    """Locality thresholds T_L,i (index 0 is level 1) and the reader threshold T_R."""

    T_L: Tuple[int, ...]
    T_R: int = 64

    def __post_init__(self):
        object.__setattr__(self, 'T_L', tuple(int(t) for t in self.T_L))
        if not self.T_L:
            raise ConfigurationError("At least one locality threshold is required")
        if any(t < 1 for t in self.T_L):
            raise ConfigurationError(f"Locality thresholds must be >= 1: {list(self.T_L)}")
        if self.T_R < 1:
            raise ConfigurationError(f"T_R must be >= 1, got {self.T_R}")

    @property
    def T_W(self) -> int:
        return math.prod(self.T_L)

    def threshold(self, level: int) -> int:
        if not 1 <= level <= len(self.T_L):
            raise AddressingError(f"Level {level} outside 1..{len(self.T_L)}")
        return self.T_L[level - 1]

    def locality_bound(self, level: int) -> int:
        """Consecutive entries allowed for one element of ``level``: prod of T_L,k for k >= level."""
        return math.prod(self.T_L[level - 1:])

    def validate_for(self, spec: TopologySpec) -> None:
        if len(self.T_L) != spec.N:
            raise ConfigurationError(
                f"Expected {spec.N} locality thresholds, got {len(self.T_L)}")


@dataclass(frozen=True)
class WorkloadSpec:
    """Fraction of writers and the seed used to pick them."""

    F_W: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.F_W <= 1.0:
            raise ConfigurationError(f"F_W must be within [0, 1], got {self.F_W}")

    def writer_count(self, P: int) -> int:
        return int(math.floor(self.F_W * P + 0.5))

    def assign_roles(self, P: int) -> Dict[int, bool]:
        """Map every rank to True (writer) or False (reader)."""
        rng = np.random.default_rng(self.seed)
        writers = set((rng.permutation(P)[:self.writer_count(P)] + 1).tolist())
        return {rank: rank in writers for rank in range(1, P + 1)}


@dataclass(frozen=True)
class WindowLayout:
    """Offsets of every lock field inside a rank's window segment."""

    levels: int
    NEXT: int = 0
    STATUS: int = 1
    ARRIVE: int = 2
    DEPART: int = 3

    def tail(self, level: int) -> int:
        self._check_level(level)
        return 3 + level

    def next_at(self, level: int) -> int:
        self._check_level(level)
        return self.NEXT if level == 1 else 4 + self.levels + 2 * (level - 2)

    def status_at(self, level: int) -> int:
        self._check_level(level)
        return self.STATUS if level == 1 else 5 + self.levels + 2 * (level - 2)

    @property
    def SPIN(self) -> int:
        return 3 * self.levels + 2

    @property
    def DATA(self) -> int:
        return self.SPIN + 1

    @property
    def words_per_rank(self) -> int:
        return self.DATA + 1

    def fields(self) -> Dict[str, int]:
        """Every named field with its offset."""
        named = {'NEXT': self.NEXT, 'STATUS': self.STATUS,
                 'ARRIVE': self.ARRIVE, 'DEPART': self.DEPART}
        for level in range(1, self.levels + 1):
            named[f'TAIL{level}'] = self.tail(level)
        for level in range(2, self.levels + 1):
            named[f'NEXT{level}'] = self.next_at(level)
            named[f'STATUS{level}'] = self.status_at(level)
        named['SPIN'] = self.SPIN
        named['DATA'] = self.DATA
        return named

    def _check_level(self, level: int) -> None:
        if not 1 <= level <= self.levels:
            raise AddressingError(f"Level {level} outside 1..{self.levels}")


def layout_window(spec: TopologySpec, cm: CounterMap, params: LockParams) -> WindowLayout:
    """Fix the window offsets for a lock over ``spec``."""
    params.validate_for(spec)
    if cm.P != spec.P:
        raise ConfigurationError(f"Counter map covers {cm.P} ranks but topology has {spec.P}")
    layout = WindowLayout(levels=spec.N)
    offsets = list(layout.fields().values())
    if len(set(offsets)) != len(offsets):
        raise ConfigurationError(f"Window layout is not injective: {layout.fields()}")
    return layout


def recommend_params(spec: TopologySpec, T_R: int = 64, base: int = 4) -> Tuple[CounterMap, LockParams]:
    """
    Suggest thresholds for ``spec``.

    One counter per leaf element; the locality threshold doubles per level
    towards the root, where crossing elements is most expensive.
    """
    cm = CounterMap(T_DC=spec.procs_per_leaf, P=spec.P)
    thresholds = tuple(base * 2 ** (spec.N - level) for level in range(1, spec.N + 1))
    params = LockParams(T_L=thresholds, T_R=T_R)
    logger.debug(f"Recommended T_DC={cm.T_DC}, T_L={list(thresholds)}, T_R={T_R}")
    return cm, params


def parse_int_list(text: Optional[str]) -> Optional[List[int]]:
    """Parse ``"4,4,8"`` into ``[4, 4, 8]``."""
    if text is None or text == '':
        return None
    try:
        return [int(part) for part in str(text).split(',') if part.strip() != '']
    except ValueError as e:
        raise ConfigurationError(f"Expected a comma-separated integer list, got '{text}'") from e


def format_int_list(values: Sequence[int]) -> str:
    return ','.join(str(v) for v in values)
