"""Permutation tests of independence.

The y-values are permuted against fixed x-values and the statistic is
recomputed for each permutation.  Each registered statistic is *prepared*
once per sample: everything that does not depend on the permutation is
precomputed, and the per-permutation evaluator returns either an exact
integer numerator (shared denominator) or a float.

Monte Carlo permutations come from counter-based Philox streams: resample
``b`` is the ``b % BLOCK``-th permutation drawn from the stream keyed by
``(seed, b // BLOCK)``.  Results therefore do not depend on how blocks are
spread over workers.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import estimators as est
from .dataio import tabulate_sample
from .errors import DegenerateInputError, InvalidArgumentError, ResourceError
from .kernels import a_tensor, h_tensor

__all__ = [
    "Sidedness",
    "Mode",
    "TestResult",
    "STATISTICS",
    "default_sidedness",
    "prepare_statistic",
    "permutation_test",
    "exact_permutation_test",
    "permutation_stream",
    "mc_stderr",
]

BLOCK = 1024
EXACT_MAX_N = 8
# brute-force t* per resample is O(n^4); refuse it beyond this size
NAIVE_PERMUTATION_MAX_N = 32
FLOAT_REL_TOL = 1e-12


class Sidedness(enum.Enum):
    ONE_SIDED_LARGE = "one-sided-large"
    TWO_SIDED_ABS = "two-sided-abs"


class Mode(enum.Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class TestResult:
    statistic_id: str
    observed: float
    p_value: float
    resamples: int
    exceed_count: int
    seed: int | None
    mode: Mode
    sidedness: Sidedness

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class Prepared:
    """A statistic bound to one sample.

    ``evaluate(perm)`` returns the statistic for ``ys[perm]`` in raw units;
    multiply by ``scale`` for the reported value.  ``exact`` raw values are
    Python ints and are compared without tolerance.
    """

    evaluate: Callable[[np.ndarray], float]
    scale: float
    exact: bool


def _prep_taustar(sample):
    rx, kx = est.rank_codes(sample.xs)
    ry, ky = est.rank_codes(sample.ys)

    def evaluate(perm):
        return est._taustar_numerator(rx, ry[perm], kx, ky)

    return Prepared(evaluate, 1.0 / sample.n**4, True)


def _prep_taustar_naive(sample):
    n = sample.n
    if n > NAIVE_PERMUTATION_MAX_N:
        raise ResourceError(
            f"brute-force t* per resample refused for n={n} > {NAIVE_PERMUTATION_MAX_N}; "
            "use 'taustar' or 'taustar_table'"
        )
    ax = a_tensor(sample.xs)
    ay = a_tensor(sample.ys)

    def evaluate(perm):
        return int((ax * ay[np.ix_(perm, perm, perm, perm)]).sum())

    return Prepared(evaluate, 1.0 / n**4, True)


def _table_codes(sample):
    table = tabulate_sample(sample)
    rx = np.searchsorted(table.row_scores, sample.xs)
    ry = np.searchsorted(table.col_scores, sample.ys)
    return table, rx, ry


def _prep_table(sample, kernel):
    table, rx, ry = _table_codes(sample)
    r, c = table.shape
    n = sample.n
    if kernel == "a":
        kr, kc = a_tensor(table.row_scores), a_tensor(table.col_scores)
        scale = 1.0 / n**4
    else:
        # grades depend on the margins only, which permutation preserves
        gr, gc = est._table_grades(table)
        kr, kc = h_tensor(gr), h_tensor(gc)
        scale = 1.0 / (n**4 * (2 * n) ** 2)
    base = rx * c

    def evaluate(perm):
        counts = np.bincount(base + ry[perm], minlength=r * c).reshape(r, c)
        return est._contract(counts, kr, kc)

    return Prepared(evaluate, scale, True)


def _prep_dewet(sample):
    n = sample.n
    gx = est.mid_grades(sample.xs)
    gy = est.mid_grades(sample.ys)
    dx = np.abs(np.subtract.outer(gx, gx))
    dy = np.abs(np.subtract.outer(gy, gy))
    rx = dx.sum(axis=1)
    tx = int(rx.sum())
    ty = int(dy.sum())

    def evaluate(perm):
        dyp = dy[np.ix_(perm, perm)]
        s = int((dx * dyp).sum())
        rr = int((rx * dyp.sum(axis=1)).sum())
        return 4 * n * n * s + 4 * tx * ty - 8 * n * rr

    return Prepared(evaluate, 1.0 / (n**4 * (2 * n) ** 2), True)


def _prep_kendall(sample):
    sx = np.sign(np.subtract.outer(sample.xs, sample.xs)).astype(np.int64)
    sy = np.sign(np.subtract.outer(sample.ys, sample.ys)).astype(np.int64)

    def evaluate(perm):
        return int((sx * sy[np.ix_(perm, perm)]).sum())

    return Prepared(evaluate, 1.0 / sample.n**2, True)


def _prep_hoeffding(sample):
    n = sample.n
    le_x = sample.xs[None, :] <= sample.xs[:, None]
    le_y = sample.ys[None, :] <= sample.ys[:, None]
    fx = le_x.sum(axis=1).astype(np.int64)
    fy = le_y.sum(axis=1).astype(np.int64)

    def evaluate(perm):
        lyp = le_y[np.ix_(perm, perm)]
        joint = (le_x & lyp).sum(axis=1).astype(np.int64)
        dev = n * joint - fx * fy[perm]
        return int((dev * dev).sum())

    return Prepared(evaluate, 1.0 / n**5, True)


def _prep_chisq(sample):
    table, rx, ry = _table_codes(sample)
    r, c = table.shape
    if r < 2 or c < 2:
        raise DegenerateInputError("chi-square test needs at least two categories per margin")
    n = sample.n
    rows = table.counts.sum(axis=1).astype(float)
    cols = table.counts.sum(axis=0).astype(float)
    inv_expected = 1.0 / np.outer(rows, cols)
    base = rx * c

    def evaluate(perm):
        counts = np.bincount(base + ry[perm], minlength=r * c).reshape(r, c)
        return n * float((counts * counts * inv_expected).sum()) - n

    return Prepared(evaluate, 1.0, False)


STATISTICS = {
    "taustar": _prep_taustar,
    "taustar_table": lambda s: _prep_table(s, "a"),
    "taustar_naive": _prep_taustar_naive,
    "kendall": _prep_kendall,
    "chisq": _prep_chisq,
    "hoeffding": _prep_hoeffding,
    "dewet": _prep_dewet,
    "dewet_table": lambda s: _prep_table(s, "h"),
}


def default_sidedness(statistic):
    return Sidedness.TWO_SIDED_ABS if statistic == "kendall" else Sidedness.ONE_SIDED_LARGE


def prepare_statistic(sample, statistic):
    try:
        builder = STATISTICS[statistic]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown statistic {statistic!r}; choose from {', '.join(STATISTICS)}"
        ) from None
    return builder(sample)


def _exceeds(prepared, sidedness, observed_raw):
    two_sided = sidedness is Sidedness.TWO_SIDED_ABS
    target = abs(observed_raw) if two_sided else observed_raw
    if not prepared.exact:
        target -= FLOAT_REL_TOL * max(1.0, abs(target))

    def check(raw):
        return (abs(raw) if two_sided else raw) >= target

    return check


def permutation_stream(seed, block):
    """Generator for the permutations of Monte Carlo block ``block``."""
    return np.random.Generator(np.random.Philox(key=[seed, block]))


def _count_block(prepared, check, n, seed, block, size):
    rng = permutation_stream(seed, block)
    hits = 0
    for _ in range(size):
        if check(prepared.evaluate(rng.permutation(n))):
            hits += 1
    return hits


def _resolve(statistic, sidedness):
    return default_sidedness(statistic) if sidedness is None else Sidedness(sidedness)


def permutation_test(sample, statistic="taustar", B=10_000, seed=0, sidedness=None, n_jobs=1):
    """Monte Carlo permutation test of independence.

    Parameters
    ----------
    sample : PairedSample
    statistic : str
        A key of :data:`STATISTICS`.
    B : int
        Number of random permutations.
    seed : int
        Nonnegative seed; the result is a deterministic function of
        ``(sample, statistic, B, seed, sidedness)``.
    sidedness : Sidedness, optional
        Defaults to two-sided for ``kendall`` and one-sided (large values)
        otherwise.
    n_jobs : int
        Worker threads; does not affect the result.

    Returns
    -------
    TestResult
        With the add-one p-value ``(1 + exceed_count) / (1 + B)``, where
        resamples tying the observed value count as exceedances.
    """
    if B < 1:
        raise InvalidArgumentError("B must be at least 1")
    if seed < 0 or seed >= 2**64:
        raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
    sidedness = _resolve(statistic, sidedness)
    prepared = prepare_statistic(sample, statistic)
    n = sample.n
    observed_raw = prepared.evaluate(np.arange(n))
    check = _exceeds(prepared, sidedness, observed_raw)
    blocks = [(k, min(BLOCK, B - k * BLOCK)) for k in range(math.ceil(B / BLOCK))]
    if n_jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            counts = list(
                pool.map(lambda kb: _count_block(prepared, check, n, seed, *kb), blocks)
            )
    else:
        counts = [_count_block(prepared, check, n, seed, k, size) for k, size in blocks]
    exceed = int(sum(counts))
    return TestResult(
        statistic_id=statistic,
        observed=float(observed_raw * prepared.scale),
        p_value=(1 + exceed) / (1 + B),
        resamples=B,
        exceed_count=exceed,
        seed=seed,
        mode=Mode.MONTE_CARLO,
        sidedness=sidedness,
    )


def exact_permutation_test(sample, statistic="taustar", sidedness=None):
    """Permutation test over all ``n!`` permutations of the y-values (n <= 8).

    The p-value is the fraction of permutations, identity included, whose
    statistic is at least the observed one.
    """
    n = sample.n
    if n > EXACT_MAX_N:
        raise ResourceError(f"exact enumeration of {n}! permutations refused (n > {EXACT_MAX_N})")
    sidedness = _resolve(statistic, sidedness)
    prepared = prepare_statistic(sample, statistic)
    observed_raw = prepared.evaluate(np.arange(n))
    check = _exceeds(prepared, sidedness, observed_raw)
    exceed = 0
    total = 0
    for perm in itertools.permutations(range(n)):
        total += 1
        if check(prepared.evaluate(np.array(perm))):
            exceed += 1
    return TestResult(
        statistic_id=statistic,
        observed=float(observed_raw * prepared.scale),
        p_value=exceed / total,
        resamples=total,
        exceed_count=exceed,
        seed=None,
        mode=Mode.EXACT,
        sidedness=sidedness,
    )


def mc_stderr(p, B):
    """Binomial standard error ``sqrt(p (1 - p) / B)`` of a Monte Carlo p-value."""
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError("p must lie in [0, 1]")
    if B < 1:
        raise InvalidArgumentError("B must be at least 1")
    return math.sqrt(p * (1.0 - p) / B)

