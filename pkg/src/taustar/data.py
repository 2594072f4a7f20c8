"""Core data containers: paired samples and contingency tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

__all__ = ["PairedSample", "ContingencyTable"]


def _strictly_increasing(values):
    return bool(np.all(np.diff(values) > 0))


@dataclass(frozen=True)
class PairedSample:
    """``n`` paired real observations ``(x_i, y_i)``.

    Inputs are copied into read-only float arrays.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).ravel()
        ys = np.array(self.ys, dtype=float).ravel()
        if xs.shape != ys.shape:
            raise InvalidArgumentError(
                f"xs and ys differ in length ({xs.size} vs {ys.size})"
            )
        if xs.size < 1:
            raise InvalidArgumentError("a paired sample needs at least one observation")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise InvalidArgumentError("sample values must be finite")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, PairedSample):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """An ``r x c`` table of nonnegative integer counts with ordered scores.

    Scores default to ``1..r`` and ``1..c``.
    """

    counts: np.ndarray
    row_scores: np.ndarray = field(default=None)
    col_scores: np.ndarray = field(default=None)

    def __post_init__(self):
        raw = np.asarray(self.counts)
        if raw.ndim != 2 or raw.shape[0] < 1 or raw.shape[1] < 1:
            raise InvalidArgumentError("counts must be a non-empty 2-d array")
        if raw.dtype.kind == "f":
            if not np.all(np.isfinite(raw)) or not np.all(raw == np.round(raw)):
                raise InvalidArgumentError("counts must be integers")
        elif raw.dtype.kind not in "iub":
            raise InvalidArgumentError("counts must be integers")
        counts = raw.astype(np.int64)
        if np.any(counts < 0):
            raise InvalidArgumentError("counts must be nonnegative")
        r, c = counts.shape
        rows = self._scores(self.row_scores, r, "row")
        cols = self._scores(self.col_scores, c, "column")
        for arr in (counts, rows, cols):
            arr.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "row_scores", rows)
        object.__setattr__(self, "col_scores", cols)

    @staticmethod
    def _scores(scores, k, what):
        if scores is None:
            return np.arange(1, k + 1, dtype=float)
        arr = np.array(scores, dtype=float).ravel()
        if arr.size != k:
            raise InvalidArgumentError(f"expected {k} {what} scores, got {arr.size}")
        if not np.all(np.isfinite(arr)) or not _strictly_increasing(arr):
            raise InvalidArgumentError(f"{what} scores must be finite and strictly increasing")
        return arr

    @property
    def shape(self):
        return self.counts.shape

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return (
            np.array_equal(self.counts, other.counts)
            and np.array_equal(self.row_scores, other.row_scores)
            and np.array_equal(self.col_scores, other.col_scores)
        )

    __hash__ = None
