"""Loading and subsetting paired daily series."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IngestError

log = logging.getLogger(__name__)

SCALES = ("original", "frechet")
_MISSING = {"", "na", "nan", "null", "none", "-", "?"}


@dataclass(frozen=True, eq=False)
class BivariateSample:
    """Paired observations ``(x1, x2)`` indexed by strictly increasing time.

    ``t`` is either an integer index or ``datetime64[D]``. Arrays are made
    read-only so a sample can be shared freely.
    """

    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    labels: tuple[str, str] = ("x1", "x2")
    scale_tag: str = "original"

    def __post_init__(self):
        x1 = np.asarray(self.x1, dtype=float)
        x2 = np.asarray(self.x2, dtype=float)
        t = np.asarray(self.t)
        if x1.ndim != 1 or x1.shape != x2.shape or t.shape != x1.shape:
            raise IngestError("shape", "t, x1 and x2 must be 1-d arrays of equal length")
        if x1.size < 2:
            raise IngestError("too_few_rows", f"need at least 2 complete rows, got {x1.size}")
        if not (np.isfinite(x1).all() and np.isfinite(x2).all()):
            raise IngestError("nonfinite", "sample contains non-finite values")
        if t.size > 1 and not (np.diff(t) > np.zeros(1, dtype=np.diff(t).dtype)).all():
            raise IngestError("time_order", "time index must be strictly increasing")
        if self.scale_tag not in SCALES:
            raise IngestError("scale", f"scale_tag must be one of {SCALES}")
        if self.scale_tag == "frechet" and not ((x1 > 0).all() and (x2 > 0).all()):
            raise IngestError("scale", "frechet-scale samples must be strictly positive")
        for name, arr in (("t", t), ("x1", x1), ("x2", x2)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return int(self.x1.size)

    @property
    def values(self) -> np.ndarray:
        """``(n, 2)`` array of the observations."""
        return np.column_stack([self.x1, self.x2])

    @property
    def has_dates(self) -> bool:
        return np.issubdtype(self.t.dtype, np.datetime64)

    def take(self, idx: np.ndarray, *, reindex: bool = False) -> "BivariateSample":
        """Rows at ``idx``; ``reindex`` assigns a fresh ``0..m-1`` time index."""
        idx = np.asarray(idx)
        t = np.arange(idx.size) if reindex else self.t[idx]
        return BivariateSample(t, self.x1[idx], self.x2[idx], self.labels, self.scale_tag)

    def with_values(self, x1, x2, scale_tag: str | None = None) -> "BivariateSample":
        return BivariateSample(self.t, x1, x2, self.labels, scale_tag or self.scale_tag)


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    rows_dropped: int
    months_retained: tuple[int, ...]
    summary: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_dropped": self.rows_dropped,
            "months_retained": list(self.months_retained),
            "summary": self.summary,
        }


def parse_negate(spec: str | Sequence[bool] | None) -> tuple[bool, bool]:
    """Accept ``none``, ``1``, ``2``, ``both`` or a pair of booleans."""
    if spec is None:
        return (False, False)
    if not isinstance(spec, str):
        a, b = spec
        return (bool(a), bool(b))
    key = spec.strip().lower()
    table = {"none": (False, False), "1": (True, False), "2": (False, True), "both": (True, True)}
    if key not in table:
        raise IngestError("bad_option", f"--negate must be none, 1, 2 or both, got {spec!r}")
    return table[key]


def parse_months(spec: str | Iterable[int] | None) -> frozenset[int] | None:
    """``all``/``None`` means no subsetting; otherwise a comma list of 1..12."""
    if spec is None:
        return None
    if isinstance(spec, str):
        if spec.strip().lower() == "all":
            return None
        try:
            months = frozenset(int(m) for m in spec.split(",") if m.strip())
        except ValueError as exc:
            raise IngestError("bad_option", f"cannot parse months {spec!r}") from exc
    else:
        months = frozenset(int(m) for m in spec)
    if not months or not months <= set(range(1, 13)):
        raise IngestError("bad_option", f"months must be a nonempty subset of 1..12, got {sorted(months)}")
    return months


def _parse_time(raw: str) -> int | np.datetime64:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        return np.datetime64(raw[:10], "D")


def _summary(x: np.ndarray) -> dict:
    q = np.quantile(x, [0.5, 0.97, 0.98])
    return {"min": float(x.min()), "max": float(x.max()), "q50": float(q[0]),
            "q97": float(q[1]), "q98": float(q[2])}


def _column_index(header: list[str], key: str | int) -> int:
    if isinstance(key, int):
        if not 0 <= key < len(header):
            raise IngestError("column_not_found", f"column not found: index {key}")
        return key
    if key in header:
        return header.index(key)
    if key.isdigit() and int(key) < len(header):
        return int(key)
    raise IngestError("column_not_found", f"column not found: {key!r} (have {header})")


def load_series(
    path: str | Path,
    col1: str | int,
    col2: str | int,
    time: str | int | None = "auto",
    negate: str | Sequence[bool] | None = None,
) -> tuple[BivariateSample, IngestReport]:
    """Read two numeric columns (and optionally a time column) from a CSV.

    ``time="auto"`` uses a column named ``t``, ``time`` or ``date`` when
    present and a synthetic ``0..n-1`` index otherwise; ``None``/``"none"``
    always uses the synthetic index. Rows with a missing or unparseable
    coordinate are dropped and counted. Numbers use a decimal point only.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestError("missing_file", f"input file not found: {path}")
    flips = parse_negate(negate)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestError("empty_file", f"{path} has no header row") from None
        i1 = _column_index(header, col1)
        i2 = _column_index(header, col2)
        if time is None or (isinstance(time, str) and time.lower() == "none"):
            it = None
        elif isinstance(time, str) and time.lower() == "auto":
            it = next((header.index(c) for c in ("t", "time", "date") if c in header), None)
        else:
            it = _column_index(header, time)

        ts, a, b = [], [], []
        rows_read = dropped = 0
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            rows_read += 1
            try:
                v1 = row[i1].strip()
                v2 = row[i2].strip()
                if v1.lower() in _MISSING or v2.lower() in _MISSING:
                    raise ValueError("missing")
                f1, f2 = float(v1), float(v2)
                if not (np.isfinite(f1) and np.isfinite(f2)):
                    raise ValueError("non-finite")
                tv = _parse_time(row[it]) if it is not None else None
            except (ValueError, IndexError):
                dropped += 1
                continue
            ts.append(tv)
            a.append(-f1 if flips[0] else f1)
            b.append(-f2 if flips[1] else f2)

    if len(a) < 2:
        raise IngestError("too_few_rows", f"fewer than 2 complete rows in {path}")
    x1 = np.asarray(a, dtype=float)
    x2 = np.asarray(b, dtype=float)
    if it is None:
        t = np.arange(x1.size)
    else:
        kinds = {type(v) for v in ts}
        if len(kinds) > 1:
            raise IngestError("time_format", "time column mixes integers and dates")
        t = np.asarray(ts, dtype="datetime64[D]" if np.datetime64 in kinds else np.int64)
        order = np.argsort(t, kind="stable")
        t, x1, x2 = t[order], x1[order], x2[order]
        if (np.diff(t) == np.zeros(1, dtype=np.diff(t).dtype)).any():
            raise IngestError("time_order", "duplicate time stamps in input")

    labels = (header[i1], header[i2])
    sample = BivariateSample(t, x1, x2, labels)
    report = IngestReport(
        rows_read=rows_read,
        rows_dropped=dropped,
        months_retained=_months_present(t),
        summary={labels[0]: _summary(x1), labels[1]: _summary(x2)},
    )
    if dropped:
        log.info("dropped %d of %d rows with missing or unparseable values", dropped, rows_read)
    return sample, report


def _months_present(t: np.ndarray) -> tuple[int, ...]:
    if not np.issubdtype(t.dtype, np.datetime64):
        return ()
    return tuple(int(m) for m in np.unique(calendar_months(t)))


def calendar_months(t: np.ndarray) -> np.ndarray:
    return t.astype("datetime64[M]").astype(int) % 12 + 1


def subset_months(sample: BivariateSample, months: Iterable[int] | str | None) -> BivariateSample:
    """Keep rows whose calendar month is in ``months``; order is preserved."""
    wanted = parse_months(months)
    if wanted is None or wanted == frozenset(range(1, 13)):
        return sample
    if not sample.has_dates:
        raise IngestError("no_dates", "month subsetting needs a date-valued time column")
    keep = np.isin(calendar_months(sample.t), sorted(wanted))
    if not keep.any():
        raise IngestError("empty_subset", f"no rows fall in months {sorted(wanted)}")
    if keep.sum() < 2:
        raise IngestError("too_few_rows", "fewer than 2 rows remain after month subsetting")
    return sample.take(np.flatnonzero(keep))


def write_sample(sample: BivariateSample, path: str | Path) -> None:
    """Write ``t,<label1>,<label2>`` with round-trippable floats."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *sample.labels])
        for t, a, b in zip(sample.t, sample.x1, sample.x2):
            w.writerow([str(t), repr(float(a)), repr(float(b))])
