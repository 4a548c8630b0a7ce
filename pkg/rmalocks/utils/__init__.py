"""
Utility functions and classes.
"""

from .topology import (
    TopologySpec,
    CounterMap,
    LockParams,
    WorkloadSpec,
    WindowLayout,
    element_of,
    tail_host,
    counter_rank,
    layout_window,
    recommend_params,
    parse_int_list,
    format_int_list
)

from .rma import (
    NULL_RANK,
    SUM,
    REPLACE,
    AccumulateOp,
    LatencyModel,
    OpTicket,
    Window,
    Endpoint,
    create_window,
    wrap_int64
)

from .clock import (
    Conductor,
    VirtualClock,
    WallClock
)

from .backoff import Backoff, spin_until

from .file_utils import (
    CSV_HEADER,
    format_csv,
    write_csv_rows,
    dump_event_log,
    save_run_summary
)

__all__ = [
    # topology
    'TopologySpec',
    'CounterMap',
    'LockParams',
    'WorkloadSpec',
    'WindowLayout',
    'element_of',
    'tail_host',
    'counter_rank',
    'layout_window',
    'recommend_params',
    'parse_int_list',
    'format_int_list',

    # rma
    'NULL_RANK',
    'SUM',
    'REPLACE',
    'AccumulateOp',
    'LatencyModel',
    'OpTicket',
    'Window',
    'Endpoint',
    'create_window',
    'wrap_int64',

    # clock
    'Conductor',
    'VirtualClock',
    'WallClock',

    # backoff
    'Backoff',
    'spin_until',

    # file_utils
    'CSV_HEADER',
    'format_csv',
    'write_csv_rows',
    'dump_event_log',
    'save_run_summary'
]
