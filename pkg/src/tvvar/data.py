"""CSV ingestion and deterministic result serialization.

Input files are UTF-8 CSVs with a header row; an optional first column of
date labels is detected (kept as labels only, never used numerically). All
emitted artifacts embed the seed and a hash of the generating configuration,
and are byte-deterministic for a fixed configuration.
"""

import csv
import hashlib
import json

import numpy as np

from .errors import ParseError, TooShortError
from .estimation import ObservedPanel

__all__ = [
    "MIN_ROWS",
    "load_csv",
    "config_hash",
    "dump_json",
    "fit_grid_frame",
    "irf_frame",
]

MIN_ROWS = 20


def load_csv(path, presample=0):
    """Read a panel from CSV. Returns (panel, date_labels or None)."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise TooShortError(0, MIN_ROWS)
    raw = [row for row in reader if row]

    if not raw:
        raise TooShortError(0, MIN_ROWS)

    # first column is a date/label column when any of its cells is non-numeric
    def _is_number(s):
        try:
            float(s)
            return True
        except ValueError:
            return False

    has_dates = any(not _is_number(row[0]) for row in raw if row and row[0] != "")
    col0 = 1 if has_dates else 0
    names = [c.strip() for c in header[col0:]]

    values = np.empty((len(raw), len(names)))
    dates = [] if has_dates else None
    for i, row in enumerate(raw):
        line = i + 2  # 1-based, after the header
        if len(row) != len(header):
            raise ParseError(line, len(row) + 1, f"expected {len(header)} cells, got {len(row)}")
        if has_dates:
            dates.append(row[0])
        for j, cell in enumerate(row[col0:]):
            cell = cell.strip()
            if cell == "":
                raise ParseError(line, col0 + j + 1, "blank cell")
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ParseError(line, col0 + j + 1, f"non-numeric cell {cell!r}")

    if len(raw) < MIN_ROWS:
        raise TooShortError(len(raw), MIN_ROWS)
    panel = ObservedPanel(values, presample=presample, labels=tuple(names))
    return panel, dates


def config_hash(config):
    """Stable sha256 of a JSON-serializable configuration mapping."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dump_json(obj, path=None):
    """Canonical JSON (sorted keys, full float precision). Returns the text."""
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text


def fit_grid_frame(fit, ci=None):
    """Long-format per-grid coefficient estimates (tau, row, col, value, se)."""
    import pandas as pd

    G, d, m = fit.A_hat.shape
    recs = []
    se = se_O = None
    if ci is not None:
        se = ci["A_se"]  # (G, m*d) in column-major vec order
        se_O = ci["Omega_se"]  # (G, s) in vech order
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    vech_pos = {(int(rows[order][k]), int(cols[order][k])): k for k in range(len(order))}
    for g in range(G):
        for j in range(m):
            for i in range(d):
                recs.append(
                    {
                        "tau": fit.grid[g],
                        "quantity": "A",
                        "row": i,
                        "col": j,
                        "value": fit.A_hat[g, i, j],
                        "se": se[g, j * d + i] if se is not None else np.nan,
                    }
                )
        for i in range(d):
            for j in range(i + 1):
                recs.append(
                    {
                        "tau": fit.grid[g],
                        "quantity": "Omega",
                        "row": i,
                        "col": j,
                        "value": fit.Omega_hat[g, i, j],
                        "se": se_O[g, vech_pos[(i, j)]] if se_O is not None else np.nan,
                    }
                )
    return pd.DataFrame(recs)


def irf_frame(irfs):
    """Long-format impulse-response surface (tau, horizon, row, col, value, se)."""
    import pandas as pd

    G, J1, d, _ = irfs.B.shape
    recs = []
    for g in range(G):
        for j in range(J1):
            for i in range(d):
                for k in range(d):
                    recs.append(
                        {
                            "tau": irfs.grid[g],
                            "horizon": j,
                            "row": i,
                            "col": k,
                            "value": irfs.B[g, j, i, k],
                            "se": irfs.se[g, j, i, k] if irfs.se is not None else np.nan,
                        }
                    )
    return pd.DataFrame(recs)
