"""Plain-text serialization: CSV matrices, index lists, key=value files.

Matrix CSV is headerless, one row per line, decimal point, scientific
notation allowed.  Floats are written with ``repr`` so reading back is
bit-exact, comfortably inside the 1e-15 round-trip contract.
"""

import math
from pathlib import Path

import numpy as np

from .exceptions import ContractError, DimensionError
from .linalg import as_matrix


def format_float(v):
    """Shortest round-trip decimal text for a float; ``inf`` spelled 'inf'."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_matrix(path, a):
    a = as_matrix(a)
    lines = [",".join(format_float(v) for v in row) for row in a]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_matrix(path):
    rows = []
    width = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = [float(v) for v in line.split(",")]
        except ValueError as exc:
            raise ContractError(f"{path}:{lineno}: non-numeric entry") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DimensionError(
                f"{path}:{lineno}: row has {len(row)} entries, expected {width}"
            )
        rows.append(row)
    if not rows:
        raise DimensionError(f"{path}: empty matrix file")
    return as_matrix(np.array(rows), name=str(path))


def write_index_list(path, indices):
    Path(path).write_text("".join(f"{int(i)}\n" for i in indices))


def read_index_list(path):
    return [int(line) for line in Path(path).read_text().splitlines() if line.strip()]


def write_keyvalues(path, items):
    """Write ``key=value`` lines; values pass through ``str``."""
    lines = [f"{k}={v}" for k, v in items]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_keyvalues(path):
    """Parse ``key=value`` lines; ``#`` starts a comment, blanks ignored.

    Repeated keys keep the last value.  Returns a dict of strings.
    """
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
