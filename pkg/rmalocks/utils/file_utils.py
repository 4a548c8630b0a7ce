"""
File I/O utility functions.
"""

import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np

logger = logging.getLogger(__name__)

CSV_HEADER = ['bench', 'lock', 'P', 'tdc', 'tl', 'tr', 'fw', 'seed', 'metric', 'value']


def format_csv(rows: Iterable[Sequence[Any]], header: Optional[Sequence[str]] = CSV_HEADER) -> str:
    """
    Render rows as CSV text with ``\\n`` line endings.

    Args:
        rows: Data rows
        header: Header row, or None to omit it

    Returns:
        The CSV document
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    if header is not None:
        writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv_rows(rows: Iterable[Sequence[Any]],
                   output_path: Optional[Union[str, Path]] = None,
                   stream: Optional[TextIO] = None) -> None:
    """
    Write benchmark rows, preceded by the header, to a file or a stream.

    Args:
        rows: Data rows
        output_path: Destination file; when None the rows go to ``stream``
        stream: Destination stream (default: stdout)
    """
    text = format_csv(rows)
    if output_path is None:
        (stream or sys.stdout).write(text)
        return
    try:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w', newline='') as f:
            f.write(text)
        logger.info(f"Saved CSV results to {output_path}")
    except Exception as e:
        logger.error(f"Failed to save CSV results to {output_path}: {e}")
        raise


def dump_event_log(records: List[str], output_path: Union[str, Path]) -> None:
    """
    Save event records, one ``seq,rank,event,level,element`` line each.

    Args:
        records: Records as produced by ``EventLog.records()``
        output_path: Output file path
    """
    try:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w') as f:
            for record in records:
                f.write(record + '\n')
        logger.info(f"Saved {len(records)} events to {output_path}")
    except Exception as e:
        logger.error(f"Failed to save event log to {output_path}: {e}")
        raise


def save_run_summary(data: Dict[str, Any], output_path: Union[str, Path]) -> None:
    """
    Save a run summary (config echo, metrics, audit verdicts) as JSON.

    Args:
        data: Summary dictionary
        output_path: Output file path
    """
    def serialize(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        if hasattr(obj, '__dict__'):
            return str(obj)
        return obj

    try:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w') as f:
            json.dump(data, f, indent=2, default=serialize)
        logger.info(f"Saved run summary to {output_path}")
    except Exception as e:
        logger.error(f"Failed to save run summary to {output_path}: {e}")
        raise
