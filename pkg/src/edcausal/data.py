"""Rectangular sample tables with binary/continuous column kinds, plus CSV round-tripping."""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import LengthMismatch, UnknownColumn

BINARY = "binary"
CONTINUOUS = "continuous"


def _is_binary(values: np.ndarray) -> bool:
    return values.size > 0 and bool(np.all((values == 0) | (values == 1)))


class Dataset:
    """Named columns of equal length.

    Binary columns are stored as ``int64`` holding only 0/1; continuous columns as
    ``float64``. Column order is preserved.
    """

    def __init__(self, columns: Mapping[str, Iterable], kinds: Mapping[str, str] | None = None):
        kinds = dict(kinds or {})
        self._columns: dict[str, np.ndarray] = {}
        self._kinds: dict[str, str] = {}
        n = None
        for name, values in columns.items():
            arr = np.asarray(values)
            if arr.ndim != 1:
                raise ValueError(f"column {name!r} must be one-dimensional")
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise LengthMismatch(f"column {name!r} has {arr.shape[0]} rows, expected {n}")
            kind = kinds.get(name) or (BINARY if _is_binary(arr) else CONTINUOUS)
            if kind == BINARY:
                if not _is_binary(arr):
                    raise ValueError(f"binary column {name!r} holds values other than 0/1")
                arr = arr.astype(np.int64)
            elif kind == CONTINUOUS:
                arr = arr.astype(np.float64)
            else:
                raise ValueError(f"unknown column kind {kind!r}")
            self._columns[name] = arr
            self._kinds[name] = kind
        if not n:
            raise ValueError("a dataset needs at least one column and one row")
        self._n = n

    @property
    def names(self) -> list[str]:
        return list(self._columns)

    @property
    def n(self) -> int:
        return self._n

    def __len__(self) -> int:
        return self._n

    @property
    def kinds(self) -> dict[str, str]:
        return dict(self._kinds)

    def kind(self, name: str) -> str:
        self._require(name)
        return self._kinds[name]

    def __contains__(self, name) -> bool:
        return name in self._columns

    def __getitem__(self, name: str) -> np.ndarray:
        self._require(name)
        return self._columns[name]

    def _require(self, *names: str) -> None:
        for name in names:
            if name not in self._columns:
                raise UnknownColumn(f"no column named {name!r}")

    def require_binary(self, *names: str) -> None:
        self._require(*names)
        for name in names:
            if self._kinds[name] != BINARY:
                raise ValueError(f"column {name!r} must be binary")

    def select(self, names: Iterable[str]) -> "Dataset":
        names = list(names)
        self._require(*names)
        return Dataset({k: self._columns[k] for k in names}, {k: self._kinds[k] for k in names})

    def take(self, rows) -> "Dataset":
        """Row subset (or resample, if ``rows`` repeats indices)."""
        out = Dataset.__new__(Dataset)
        out._columns = {k: v[rows] for k, v in self._columns.items()}
        out._kinds = dict(self._kinds)
        out._n = len(next(iter(out._columns.values())))
        return out

    def with_column(self, name: str, values, kind: str | None = None) -> "Dataset":
        cols = dict(self._columns)
        kinds = dict(self._kinds)
        cols[name] = values
        kinds.pop(name, None)
        if kind:
            kinds[name] = kind
        return Dataset(cols, kinds)

    # -- CSV -------------------------------------------------------------
    def to_csv(self, path=None) -> str:
        """Write CSV (header row, 0/1 integers for binary columns); returns the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.names)
        cols = []
        for name in self.names:
            arr = self._columns[name]
            if self._kinds[name] == BINARY:
                cols.append([str(int(v)) for v in arr])
            else:
                cols.append([repr(float(v)) for v in arr])
        writer.writerows(zip(*cols))
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty CSV file") from None
            rows = [r for r in reader if r]
        if not rows:
            raise ValueError(f"{path}: no data rows")
        if any(len(r) != len(header) for r in rows):
            raise ValueError(f"{path}: ragged rows")
        columns = {}
        kinds = {}
        for j, name in enumerate(header):
            raw = [r[j] for r in rows]
            values = np.array([float(v) for v in raw])
            integral = all("." not in v and "e" not in v.lower() for v in raw)
            kinds[name] = BINARY if integral and _is_binary(values) else CONTINUOUS
            columns[name] = values
        return cls(columns, kinds)

    def __repr__(self) -> str:
        return f"Dataset(n={self._n}, columns={self.names})"
