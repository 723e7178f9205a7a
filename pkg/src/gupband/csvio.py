"""Plain CSV tables with a `#`-prefixed metadata header."""
from __future__ import annotations

import csv
import io
from typing import Iterable, Mapping, Sequence

import numpy as np


def fmt(value) -> str:
    """Deterministic text form: repr-exact floats, complex as a+bj."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    return str(value)


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence],
                meta: Mapping[str, object] | None = None,
                footer: Iterable[Sequence] = ()) -> None:
    """Write rows under a header; footer rows are emitted as `#` comments."""
    buf = io.StringIO()
    for key, val in (meta or {}).items():
        buf.write(f"# {key} = {fmt(val)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    for row in footer:
        buf.write("# " + ",".join(fmt(v) for v in row) + "\n")
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_table(path):
    """Return (meta, columns, rows-as-strings) from a file made by write_table."""
    meta, body = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, sep, val = line[1:].partition("=")
                if sep:
                    meta[key.strip()] = val.strip()
            else:
                body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    return meta, header, [r for r in reader if r]
