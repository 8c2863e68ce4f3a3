"""CSV readers and writers for interval data.

Schemas:

``bounds-wide``
    optional ``date`` column plus ``name_L,name_R`` pairs; the response pair
    is selected by name, every other pair becomes a regressor in file order.
``interval-long``
    ``date,series,left,right`` rows, pivoted to wide.
``ohlc``
    ``date,asset,open,high,low,close`` rows (``asset`` optional for a single
    asset), converted to interval log returns
    ``[ln(low_t / close_{t-1}), ln(high_t / close_{t-1})]``.

Row numbers in error messages count the header as row 1.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .data import IntervalSample

__all__ = ["SCHEMAS", "IngestError", "OhlcPanel", "ingest_csv", "read_ohlc", "write_bounds_wide"]

SCHEMAS = ("bounds-wide", "interval-long", "ohlc")


class IngestError(ValueError):
    pass


def _read(path) -> tuple:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [(i + 2, r) for i, r in enumerate(rows[1:]) if any(c.strip() for c in r)]
    for rownum, r in body:
        if len(r) != len(header):
            raise IngestError(f"{path}: row {rownum} has {len(r)} cells, header has {len(header)}")
    return header, body


def _require(path, header, names):
    for n in names:
        if n not in header:
            raise IngestError(f"{path}: missing column {n!r}")


def _number(path, rownum, col, text) -> float:
    try:
        v = float(text)
    except ValueError:
        raise IngestError(f"{path}: row {rownum}, column {col!r}: non-numeric value {text!r}") from None
    if not math.isfinite(v):
        raise IngestError(f"{path}: row {rownum}, column {col!r}: non-finite value {text!r}")
    return v


def _check_dates(path, dates: List[str], rownums: List[int], what: str = ""):
    for k in range(1, len(dates)):
        if dates[k] == dates[k - 1]:
            raise IngestError(f"{path}: row {rownums[k]}: duplicate date {dates[k]!r}{what}")
        if dates[k] < dates[k - 1]:
            raise IngestError(f"{path}: row {rownums[k]}: dates not sorted ({dates[k]!r} after {dates[k - 1]!r}){what}")


def _finish(y, z, names, response, dates, add_intercepts) -> IntervalSample:
    if z.shape[1] == 0 and not add_intercepts:
        raise IngestError("no regressor columns")
    if z.shape[1] == 0:
        z = np.broadcast_to(np.array([[1.0, 1.0], [-0.5, 0.5]]), (y.shape[0], 2, 2))
        return IntervalSample(y, z, ("const", "I0"), response, dates)
    sample = IntervalSample(y, z, tuple(names), response, dates)
    return sample.with_intercepts() if add_intercepts else sample


def ingest_csv(
    path,
    schema: str = "bounds-wide",
    response: Optional[str] = None,
    add_intercepts: bool = False,
) -> IntervalSample:
    """Read an :class:`IntervalSample`; ``add_intercepts`` prepends [1,1] and I0 columns."""
    if schema not in SCHEMAS:
        raise IngestError(f"unknown schema {schema!r}; choose from {SCHEMAS}")
    if schema == "ohlc":
        panel = read_ohlc(path)
        name = response or panel.assets[0]
        if name not in panel.assets:
            raise IngestError(f"{path}: asset {name!r} not found")
        j = panel.assets.index(name)
        others = [k for k in range(len(panel.assets)) if k != j]
        z = panel.intervals[:, others]
        return _finish(panel.intervals[:, j], z, [panel.assets[k] for k in others], name,
                       panel.dates, add_intercepts)

    header, body = _read(path)
    if schema == "bounds-wide":
        response = response or "Y"
        _require(path, header, [f"{response}_L", f"{response}_R"])
        dates = None
        if "date" in header:
            di = header.index("date")
            dates = [r[di].strip() for _, r in body]
            _check_dates(path, dates, [n for n, _ in body])
        names = []
        for h in header:
            if h.endswith("_L") and h[:-2] != response:
                names.append(h[:-2])
        for n in names:
            _require(path, header, [f"{n}_R"])
        for h in header:
            if h.endswith("_R") and h[:-2] != response and h[:-2] not in names:
                raise IngestError(f"{path}: missing column {h[:-2] + '_L'!r}")
        cols = [f"{response}_L", f"{response}_R"] + [f"{n}_{s}" for n in names for s in "LR"]
        idx = [header.index(c) for c in cols]
        if len(body) == 0:
            raise IngestError(f"{path}: no data rows")
        vals = np.array(
            [[_number(path, rn, c, r[i]) for c, i in zip(cols, idx)] for rn, r in body]
        ).reshape(len(body), -1)
        y = vals[:, :2]
        z = vals[:, 2:].reshape(len(body), len(names), 2)
        return _finish(y, z, names, response, dates, add_intercepts)

    # interval-long
    _require(path, header, ["date", "series", "left", "right"])
    h = {k: header.index(k) for k in ("date", "series", "left", "right")}
    series: Dict[str, Dict[str, tuple]] = {}
    order: List[str] = []
    all_dates: List[str] = []
    last: Dict[str, tuple] = {}
    for rn, r in body:
        d, s = r[h["date"]].strip(), r[h["series"]].strip()
        lo = _number(path, rn, "left", r[h["left"]])
        hi = _number(path, rn, "right", r[h["right"]])
        if s not in series:
            series[s] = {}
            order.append(s)
        if s in last:
            _check_dates(path, [last[s][0], d], [last[s][1], rn], f" in series {s!r}")
        last[s] = (d, rn)
        series[s][d] = (lo, hi)
        if d not in all_dates:
            all_dates.append(d)
    if not order:
        raise IngestError(f"{path}: no data rows")
    all_dates.sort()
    response = response or ("Y" if "Y" in series else order[0])
    if response not in series:
        raise IngestError(f"{path}: response series {response!r} not found")
    names = [s for s in order if s != response]
    for s in [response] + names:
        missing = [d for d in all_dates if d not in series[s]]
        if missing:
            raise IngestError(f"{path}: series {s!r} has no row for date {missing[0]!r}")
    y = np.array([series[response][d] for d in all_dates])
    z = np.array([[series[s][d] for s in names] for d in all_dates]).reshape(len(all_dates), len(names), 2)
    return _finish(y, z, names, response, all_dates, add_intercepts)


@dataclass(frozen=True)
class OhlcPanel:
    """Per-asset interval log returns and close-to-close log returns."""

    dates: tuple  # dates of the return rows (first price date dropped)
    assets: tuple
    intervals: np.ndarray  # (T, k, 2)
    close_returns: np.ndarray  # (T, k)


def read_ohlc(path) -> OhlcPanel:
    header, body = _read(path)
    _require(path, header, ["date", "high", "low", "close"])
    h = {k: header.index(k) for k in ("date", "high", "low", "close")}
    ai = header.index("asset") if "asset" in header else None
    default = Path(path).stem
    prices: Dict[str, list] = {}
    for rn, r in body:
        asset = r[ai].strip() if ai is not None else default
        vals = [_number(path, rn, k, r[h[k]]) for k in ("high", "low", "close")]
        if min(vals) <= 0:
            raise IngestError(f"{path}: row {rn}: prices must be positive")
        prices.setdefault(asset, []).append((r[h["date"]].strip(), rn, *vals))
    if not prices:
        raise IngestError(f"{path}: no data rows")
    assets = tuple(prices)
    ref = [row[0] for row in prices[assets[0]]]
    for a in assets:
        _check_dates(path, [row[0] for row in prices[a]], [row[1] for row in prices[a]], f" for asset {a!r}")
        dates = [row[0] for row in prices[a]]
        if dates != ref:
            raise IngestError(f"{path}: asset {a!r} dates do not match asset {assets[0]!r}")
    if len(ref) < 2:
        raise IngestError(f"{path}: need at least two dates to form returns")
    arr = np.array([[row[2:] for row in prices[a]] for a in assets])  # (k, n, 3) high, low, close
    prev_close = arr[:, :-1, 2]
    intervals = np.stack([np.log(arr[:, 1:, 1] / prev_close), np.log(arr[:, 1:, 0] / prev_close)], axis=-1)
    close_ret = np.log(arr[:, 1:, 2] / prev_close)
    return OhlcPanel(tuple(ref[1:]), assets, intervals.transpose(1, 0, 2), close_ret.T)


def write_bounds_wide(sample: IntervalSample, path) -> None:
    """Write ``sample`` in the bounds-wide schema (exact float round-trip)."""
    header = ([] if sample.dates is None else ["date"]) + [f"{sample.response_name}_L", f"{sample.response_name}_R"]
    header += [f"{n}_{s}" for n in sample.column_names for s in "LR"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t in range(sample.T):
            row = [] if sample.dates is None else [sample.dates[t]]
            row += [repr(float(v)) for v in sample.responses[t]]
            row += [repr(float(v)) for v in sample.regressors[t].ravel()]
            writer.writerow(row)
