"""File formats: CSV tables, JSON reports and Matrix Market arrays.

Floats are written with 17 significant digits so that every value
round-trips exactly and repeated runs give identical bytes.
"""

import csv
import io
import json
import math

import numpy as np
import scipy.io


def format_value(v):
    """Integers as integers, everything else in 17-digit scientific notation."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".16e")


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(header, rows))


def read_csv(path):
    """Return (header, rows) with every cell as a string."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan; keep them as strings
        return v if math.isfinite(v) else str(v)
    return obj


def json_text(obj):
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(json_text(obj))


def write_matrix_market(path, a, comment=None):
    """Write a dense matrix (or a vector as one column) in array format.

    Entries are listed column by column as the format requires.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    lines = ["%%MatrixMarket matrix array real general"]
    if comment:
        lines.extend("% " + line for line in comment.splitlines())
    lines.append(f"{a.shape[0]} {a.shape[1]}")
    lines.extend(format(v, ".16e") for v in a.ravel(order="F"))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix_market(path):
    """Read an array or coordinate Matrix Market file as a dense array."""
    m = scipy.io.mmread(path)
    if hasattr(m, "toarray"):
        m = m.toarray()
    return np.asarray(m, dtype=float)
