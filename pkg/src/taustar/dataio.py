"""Text formats, sample/table conversion and the bundled example datasets.

Pair files hold two numeric columns separated by commas or whitespace, with an
optional header line.  Table files hold one row of counts per line, optionally
preceded by ``rowscores: ...`` and ``colscores: ...`` lines.
"""

from __future__ import annotations

import re

import numpy as np

from .data import ContingencyTable, PairedSample
from .errors import InvalidArgumentError, ParseError

__all__ = [
    "FIXTURES",
    "parse_pairs",
    "parse_table",
    "format_table",
    "format_pairs",
    "expand_table",
    "tabulate_sample",
    "load_fixture",
    "fixture_text",
]

_SPLIT = re.compile(r"[,\s]+")

TABLE1_COUNTS = (
    (2, 1, 0, 0, 0, 1, 2),
    (1, 2, 0, 0, 0, 2, 1),
    (0, 0, 2, 1, 2, 0, 0),
    (0, 0, 1, 1, 1, 0, 0),
    (0, 0, 1, 2, 1, 0, 0),
)

# gastric ulcer crater study: treatment A/B vs change in crater size
TABLE2_COUNTS = (
    (6, 4, 10, 12),
    (11, 8, 8, 5),
)

FIXTURES = ("table1", "table2", "counterexample_r8")


def _fields(line):
    return [f for f in _SPLIT.split(line.strip()) if f]


def _to_float(token):
    # float() also accepts "nan", "inf" and "1_000"; reject them here
    if not re.fullmatch(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?", token):
        raise ValueError(token)
    return float(token)


def parse_pairs(text):
    """Parse two-column numeric text into a :class:`PairedSample`.

    A first line whose cells are not all numeric is treated as a header.
    """
    xs, ys = [], []
    header_line = _first_content_line(text)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = _fields(line)
        try:
            values = [_to_float(c) for c in cells]
        except ValueError:
            if lineno == header_line:
                continue
            raise ParseError(f"non-numeric cell in {line.strip()!r}", line=lineno)
        if len(values) != 2:
            raise ParseError(f"expected 2 columns, found {len(values)}", line=lineno)
        xs.append(values[0])
        ys.append(values[1])
    if not xs:
        raise ParseError("no data rows")
    return PairedSample(xs, ys)


def _first_content_line(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            return lineno
    return 0


def format_pairs(sample):
    return "".join(f"{x!r},{y!r}\n" for x, y in zip(sample.xs.tolist(), sample.ys.tolist()))


def parse_table(text):
    """Parse a whitespace-separated count matrix into a :class:`ContingencyTable`."""
    rows = []
    scores = {"rowscores": None, "colscores": None}
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, rest = stripped.partition(":")
        if sep:
            key = key.strip().lower()
            if key not in scores:
                raise ParseError(f"unknown directive {key!r}", line=lineno)
            if rows:
                raise ParseError(f"{key} must precede the counts", line=lineno)
            try:
                scores[key] = [_to_float(c) for c in _fields(rest)]
            except ValueError:
                raise ParseError(f"non-numeric {key}", line=lineno) from None
            vals = scores[key]
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ParseError(f"{key} must be strictly increasing", line=lineno)
            continue
        cells = _fields(stripped)
        if not all(re.fullmatch(r"[+-]?\d+", c) for c in cells):
            raise ParseError(f"counts must be integers: {stripped!r}", line=lineno)
        counts = [int(c) for c in cells]
        if any(c < 0 for c in counts):
            raise ParseError("counts must be nonnegative", line=lineno)
        if width is None:
            width = len(counts)
        elif len(counts) != width:
            raise ParseError(f"ragged row: expected {width} counts, found {len(counts)}", line=lineno)
        rows.append(counts)
    if not rows:
        raise ParseError("no count rows")
    try:
        return ContingencyTable(rows, scores["rowscores"], scores["colscores"])
    except InvalidArgumentError as exc:
        raise ParseError(str(exc)) from None


def format_table(table):
    lines = [
        "rowscores: " + " ".join(repr(v) for v in table.row_scores.tolist()),
        "colscores: " + " ".join(repr(v) for v in table.col_scores.tolist()),
    ]
    lines += [" ".join(str(c) for c in row) for row in table.counts.tolist()]
    return "\n".join(lines) + "\n"


def expand_table(table):
    """One observation per counted unit, cells visited in row-major order."""
    if table.n < 1:
        raise InvalidArgumentError("cannot expand an empty table")
    flat = table.counts.ravel()
    cells = np.repeat(np.arange(flat.size), flat)
    r_idx, c_idx = np.divmod(cells, table.shape[1])
    return PairedSample(table.row_scores[r_idx], table.col_scores[c_idx])


def _codes(values, scores):
    if scores is None:
        return np.unique(values, return_inverse=True)
    scores = np.asarray(scores, dtype=float)
    idx = np.searchsorted(scores, values)
    idx_c = np.minimum(idx, scores.size - 1)
    if np.any(scores[idx_c] != values):
        raise InvalidArgumentError("sample contains values missing from the given scores")
    return scores, idx_c


def tabulate_sample(sample, row_scores=None, col_scores=None):
    """Cross-tabulate a sample.

    Categories are the distinct sorted x- and y-values unless explicit
    ``row_scores``/``col_scores`` are given, in which case empty categories
    are kept.
    """
    rows, rx = _codes(sample.xs, row_scores)
    cols, ry = _codes(sample.ys, col_scores)
    counts = np.bincount(rx * cols.size + ry, minlength=rows.size * cols.size)
    return ContingencyTable(counts.reshape(rows.size, cols.size), rows, cols)


def load_fixture(name):
    """Return a bundled dataset by name.

    ``table1`` and ``table2`` are :class:`ContingencyTable` objects;
    ``counterexample_r8`` is a :class:`~taustar.population.JointDistribution`.
    """
    if name == "table1":
        return ContingencyTable(TABLE1_COUNTS)
    if name == "table2":
        return ContingencyTable(TABLE2_COUNTS)
    if name == "counterexample_r8":
        from .population import counterexample_r8

        return counterexample_r8()
    raise InvalidArgumentError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")


def fixture_text(name):
    """Serialized form of a fixture (table or joint file format)."""
    payload = load_fixture(name)
    if isinstance(payload, ContingencyTable):
        return format_table(payload)
    from .population import format_joint

    return format_joint(payload)
