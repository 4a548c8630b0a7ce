"""
Correctness instrumentation: event log, auditors and the linearizability checker.
"""

from .events import (
    READ_ENTER,
    READ_EXIT,
    WRITE_ENTER,
    WRITE_EXIT,
    COUNTER_RESET,
    MODE_CHANGE,
    QUEUE_ENTER,
    EVENT_KINDS,
    MODE_READ,
    MODE_WRITE,
    Event,
    EventLog,
    OccupancyState
)

from .audit import (
    AuditVerdict,
    audit_mutual_exclusion,
    audit_thresholds,
    audit_writer_batches,
    audit_reader_batches,
    audit_locality,
    audit_quiescence,
    audit_hashtable_integrity,
    audit_run
)

from .linearizability import (
    Operation,
    HistoryRecorder,
    SequentialModel,
    RegisterModel,
    MultisetModel,
    linearizability_check
)

__all__ = [
    # events
    'READ_ENTER',
    'READ_EXIT',
    'WRITE_ENTER',
    'WRITE_EXIT',
    'COUNTER_RESET',
    'MODE_CHANGE',
    'QUEUE_ENTER',
    'EVENT_KINDS',
    'MODE_READ',
    'MODE_WRITE',
    'Event',
    'EventLog',
    'OccupancyState',

    # audit
    'AuditVerdict',
    'audit_mutual_exclusion',
    'audit_thresholds',
    'audit_writer_batches',
    'audit_reader_batches',
    'audit_locality',
    'audit_quiescence',
    'audit_hashtable_integrity',
    'audit_run',

    # linearizability
    'Operation',
    'HistoryRecorder',
    'SequentialModel',
    'RegisterModel',
    'MultisetModel',
    'linearizability_check'
]
