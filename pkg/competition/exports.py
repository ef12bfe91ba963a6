"""File formats written by the management commands.

CSV files carry a header row; JSON documents carry ``schema_version`` and
are written with sorted keys so identical runs give identical bytes.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

TRAJECTORY_COLUMNS = ('k', 't', 's1', 's2', 'm')
BRANCHING_COLUMNS = ('t', 'b1', 'b2')


def clean(value):
    """Turn numpy scalars, tuples and NaN/inf into plain JSON values."""
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [clean(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(document, path):
    """Write ``document`` as indented JSON stamped with ``schema_version``.

    NaN and infinities become null and numpy scalars become plain numbers.

    Args:
        document: a JSON-serialisable mapping
        path: target file; its directory must exist

    Returns:
        the written :class:`~pathlib.Path`
    """
    path = Path(path)
    payload = {'schema_version': SCHEMA_VERSION, **clean(document)}
    with path.open('w', encoding='utf-8') as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write('\n')
    return path


def write_rows(rows, columns, path):
    """Write a CSV with a ``columns`` header; rows may be dicts or sequences."""
    path = Path(path)
    with path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row[name] for name in columns]
            writer.writerow(['' if v is None else v for v in clean(list(row))])
    return path


def write_trajectory_csv(trajectory, path):
    """``k,t,s1,s2,m`` rows of an engine trajectory."""
    return write_rows(trajectory.rows(), TRAJECTORY_COLUMNS, path)


def write_branching_csv(trajectory, path):
    """``t,b1,b2`` rows of a branching trajectory."""
    return write_rows(trajectory.rows(), BRANCHING_COLUMNS, path)


def write_samples(samples, path):
    """One value per line, no header."""
    path = Path(path)
    with path.open('w', encoding='utf-8') as handle:
        for value in np.asarray(samples).tolist():
            handle.write(f"{value!r}\n")
    return path
