"""
Tests for the machine hierarchy, counter placement and window layout.
"""

import pytest

from rmalocks.exceptions import AddressingError, ConfigurationError
from rmalocks.utils.topology import (
    CounterMap,
    LockParams,
    TopologySpec,
    WorkloadSpec,
    counter_rank,
    element_of,
    first_differing_level,
    format_int_list,
    layout_window,
    parse_int_list,
    recommend_params,
    tail_host,
)


class TestTopologySpec:
    """Test cases for TopologySpec and the element mapping."""

    def setup_method(self):
        self.spec = TopologySpec.uniform(64, 3, 2)

    def test_element_counts(self):
        assert self.spec.element_count(1) == 1
        assert self.spec.element_count(2) == 2
        assert self.spec.element_count(3) == 4
        assert self.spec.procs_per_leaf == 16

    def test_element_of_examples(self):
        assert element_of(self.spec, 20, 3) == 2
        assert element_of(self.spec, 20, 2) == 1
        assert element_of(self.spec, 64, 3) == 4
        assert element_of(self.spec, 1, 1) == 1

    def test_partition_refines_with_depth(self):
        for p in range(1, 65):
            for q in range(1, 65):
                for level in range(2, 4):
                    if element_of(self.spec, p, level) == element_of(self.spec, q, level):
                        assert element_of(self.spec, p, level - 1) == element_of(self.spec, q, level - 1)

    def test_tail_host(self):
        assert tail_host(self.spec, 1, 1) == 1
        assert tail_host(self.spec, 2, 2) == 33
        assert tail_host(self.spec, 3, 4) == 49

    def test_tail_host_lives_in_its_element(self):
        for level in range(1, 4):
            for j in range(1, self.spec.element_count(level) + 1):
                assert element_of(self.spec, tail_host(self.spec, level, j), level) == j

    def test_first_differing_level(self):
        assert first_differing_level(self.spec, 1, 2) is None
        assert first_differing_level(self.spec, 1, 17) == 3
        assert first_differing_level(self.spec, 1, 33) == 2

    @pytest.mark.parametrize("p,level", [(0, 1), (65, 1), (1, 0), (1, 4)])
    def test_out_of_range(self, p, level):
        with pytest.raises(AddressingError):
            element_of(self.spec, p, level)

    def test_tail_host_unknown_element(self):
        with pytest.raises(AddressingError):
            tail_host(self.spec, 3, 5)

    def test_indivisible_process_count(self):
        with pytest.raises(ConfigurationError, match="not divisible"):
            TopologySpec.uniform(6, 3, 2)

    def test_fanout_length_mismatch(self):
        with pytest.raises(ConfigurationError, match="fan-out"):
            TopologySpec(P=8, N=3, children_per_element=(2,))

    def test_single_level(self):
        spec = TopologySpec(P=5)
        assert spec.procs_per_leaf == 5
        assert element_of(spec, 5, 1) == 1


class TestCounterMap:
    """Test cases for counter placement."""

    def test_counter_rank_examples(self):
        cm = CounterMap(T_DC=4, P=16)
        assert counter_rank(cm, 1) == 1
        assert counter_rank(cm, 4) == 1
        assert counter_rank(cm, 5) == 5
        assert counter_rank(cm, 16) == 13
        assert cm.num_counters == 4
        assert cm.hosts() == [1, 5, 9, 13]

    def test_partial_last_block(self):
        cm = CounterMap(T_DC=3, P=7)
        assert cm.num_counters == 3
        assert counter_rank(cm, 7) == 7

    def test_single_counter(self):
        cm = CounterMap(T_DC=64, P=8)
        assert cm.hosts() == [1]

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            CounterMap(T_DC=0, P=4)
        with pytest.raises(AddressingError):
            counter_rank(CounterMap(T_DC=2, P=4), 5)


class TestLockParams:
    """Test cases for thresholds."""

    def test_writer_threshold_is_product(self):
        params = LockParams(T_L=(2, 3, 4))
        assert params.T_W == 24
        assert params.threshold(2) == 3
        assert params.locality_bound(2) == 12
        assert params.locality_bound(3) == 4

    @pytest.mark.parametrize("tl,tr", [((), 4), ((0,), 4), ((4,), 0)])
    def test_invalid(self, tl, tr):
        with pytest.raises(ConfigurationError):
            LockParams(T_L=tl, T_R=tr)

    def test_level_count_must_match(self):
        with pytest.raises(ConfigurationError, match="locality thresholds"):
            LockParams(T_L=(4,)).validate_for(TopologySpec.uniform(4, 2, 2))


class TestWorkloadSpec:
    """Test cases for role assignment."""

    @pytest.mark.parametrize("fw,P,expected", [(0.0, 8, 0), (1.0, 8, 8), (0.25, 8, 2), (0.002, 32, 0)])
    def test_writer_count(self, fw, P, expected):
        roles = WorkloadSpec(F_W=fw, seed=3).assign_roles(P)
        assert sum(roles.values()) == expected
        assert sorted(roles) == list(range(1, P + 1))

    def test_roles_are_seeded(self):
        assert WorkloadSpec(0.5, seed=7).assign_roles(16) == WorkloadSpec(0.5, seed=7).assign_roles(16)

    def test_fraction_range(self):
        with pytest.raises(ConfigurationError):
            WorkloadSpec(F_W=1.5)


class TestLayout:
    """Test cases for the window layout."""

    def test_offsets_are_distinct(self):
        spec = TopologySpec.uniform(16, 3, 2)
        layout = layout_window(spec, CounterMap(T_DC=4, P=16), LockParams(T_L=(4, 4, 4)))
        offsets = list(layout.fields().values())
        assert len(set(offsets)) == len(offsets)
        assert max(offsets) < layout.words_per_rank

    def test_single_level_layout(self):
        spec = TopologySpec(P=4)
        layout = layout_window(spec, CounterMap(T_DC=4, P=4), LockParams(T_L=(4,)))
        assert layout.tail(1) == 4
        assert layout.next_at(1) == layout.NEXT
        assert layout.status_at(1) == layout.STATUS
        assert layout.SPIN == 5

    def test_counter_map_must_cover_topology(self):
        with pytest.raises(ConfigurationError):
            layout_window(TopologySpec(P=4), CounterMap(T_DC=2, P=8), LockParams(T_L=(4,)))


class TestHelpers:
    """Test cases for parameter helpers."""

    def test_recommend_params(self):
        spec = TopologySpec.uniform(64, 3, 2)
        cm, params = recommend_params(spec, T_R=32)
        assert cm.T_DC == 16
        assert params.T_L == (16, 8, 4)
        assert params.T_R == 32

    def test_int_lists(self):
        assert parse_int_list("4,4,8") == [4, 4, 8]
        assert parse_int_list(None) is None
        assert format_int_list([1, 2]) == "1,2"
        with pytest.raises(ConfigurationError):
            parse_int_list("4,x")
