"""
Values stored in queue-node STATUS cells and the WRITE-mode sentinel.

Non-negative STATUS values are pass counts (ACQUIRE_START counts as the
first tenure); the reserved values are negative so counts stay ordered.
"""

WAIT = -1
ACQUIRE_PARENT = -2
MODE_CHANGE = -3
ACQUIRE_START = 0

# Folded into ARRIVE while a counter is in WRITE mode.
SENTINEL = 1 << 62

SPECIAL_STATUS = {
    WAIT: 'WAIT',
    ACQUIRE_PARENT: 'ACQUIRE_PARENT',
    MODE_CHANGE: 'MODE_CHANGE',
    ACQUIRE_START: 'ACQUIRE_START',
}


def tenure(status: int) -> int:
    """Number of tenures a holder with ``status`` represents."""
    return max(status, 1)


def status_name(status: int) -> str:
    return SPECIAL_STATUS.get(status, str(status))
