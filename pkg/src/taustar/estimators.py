"""Sample statistics for testing independence.

Every exact statistic here is a ratio of integers: kernels are evaluated on
integer codes (ranks, or grades scaled by ``2n``) and accumulated in integer
arithmetic before a single division.  Different evaluation routes for the
same statistic therefore return bit-identical floats, which keeps permutation
counts reproducible across routes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .data import ContingencyTable, PairedSample
from .dataio import tabulate_sample
from .errors import DegenerateInputError, InvalidArgumentError, ResourceError
from .kernels import KernelId, a_tensor, h_tensor

__all__ = [
    "Method",
    "Normalization",
    "EstimatorConfig",
    "t_star",
    "t_star_naive",
    "t_star_subsample",
    "t_star_from_table",
    "t_star_b",
    "table_quadruple_contraction",
    "kendall_t",
    "pearson_chi_square",
    "hoeffding_h",
    "hoeffding_h_oracle",
    "dewet_d",
    "dewet_d_naive",
    "cvm_statistic",
    "rank_codes",
    "mid_grades",
]

# largest n for which the O(n^4) brute-force paths run without force=True
NAIVE_MAX_N = 64
# largest n for the O(n^5) Hoeffding oracle
HOEFFDING_ORACLE_MAX_N = 24


class Method(enum.Enum):
    EXHAUSTIVE = "exhaustive"
    TABLE = "table"
    SUBSAMPLE = "subsample"


class Normalization(enum.Enum):
    V = "V"
    U = "U"


@dataclass(frozen=True)
class EstimatorConfig:
    """How a quadruple statistic is evaluated.

    ``m`` is the number of random index tuples for ``Method.SUBSAMPLE`` and is
    ignored otherwise; so is ``seed``.
    """

    method: Method = Method.EXHAUSTIVE
    normalization: Normalization = Normalization.V
    m: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        if self.method is Method.SUBSAMPLE and (self.m is None or self.m < 1):
            raise InvalidArgumentError("Subsample needs m >= 1")
        if self.method is Method.TABLE and self.normalization is Normalization.U:
            raise InvalidArgumentError("the table path evaluates the V form only")
        if self.seed < 0:
            raise InvalidArgumentError("seed must be nonnegative")


DEFAULT_CONFIG = EstimatorConfig()


def _check_u(n, normalization):
    if normalization is Normalization.U and n < 4:
        raise InvalidArgumentError("the U form needs n >= 4")


def _falling4(n):
    return n * (n - 1) * (n - 2) * (n - 3)


def rank_codes(values):
    """Dense 0-based ranks of ``values`` and the number of distinct values."""
    uniq, codes = np.unique(values, return_inverse=True)
    return codes.astype(np.int64), int(uniq.size)


def mid_grades(values):
    """Mid-distribution grades scaled by ``2n``: ``#{v_j < v} + #{v_j <= v}``.

    Dividing by ``2n`` gives grades in ``(0, 1)``; ties share one grade.
    """
    v = np.asarray(values, dtype=float)
    s = np.sort(v)
    below = np.searchsorted(s, v, side="left")
    upto = np.searchsorted(s, v, side="right")
    return (below + upto).astype(np.int64)


# --------------------------------------------------------------------------
# tau* / t*
# --------------------------------------------------------------------------


def _taustar_numerator(rx, ry, kx, ky, distinct=False, chunk=2_000_000):
    """Integer ``sum a(x..) a(y..)`` over index tuples, by dominance counting.

    Relabelling the summation indices reduces the kernel product to
    ``4*(N1 + N2) - 8*N3`` where

    * ``N1`` counts tuples with ``x_i,x_j < x_k,x_l`` and ``y_i,y_j < y_k,y_l``,
    * ``N2`` the same with the y-inequality reversed,
    * ``N3`` tuples with ``x_i,x_j < x_k,x_l`` and ``y_i,y_k < y_j,y_l``.

    ``N1`` and ``N2`` are squared 2-d dominance counts over pairs ``(k, l)``;
    ``N3`` is an O(n^3) sum over ``(i, j, l)`` of a dominance count for ``k``.
    ``rx``/``ry`` are dense rank codes with ``kx``/``ky`` distinct values.
    """
    n = rx.size
    cells = np.bincount(rx * ky + ry, minlength=kx * ky).reshape(kx, ky)
    # cum[u, v] = #{i : rx_i < u, ry_i < v}
    cum = np.zeros((kx + 1, ky + 1), dtype=np.int64)
    cum[1:, 1:] = cells.cumsum(0).cumsum(1)

    lo_x = np.minimum.outer(rx, rx)
    lo_y = np.minimum.outer(ry, ry)
    hi_y = np.maximum.outer(ry, ry)
    below_both = cum[lo_x, lo_y]
    below_x_above_y = cum[lo_x, ky] - cum[lo_x, hi_y + 1]
    if distinct:
        off = ~np.eye(n, dtype=bool)
        n1 = int(((below_both * (below_both - 1))[off]).sum())
        n2 = int(((below_x_above_y * (below_x_above_y - 1))[off]).sum())
    else:
        n1 = int((below_both * below_both).sum())
        n2 = int((below_x_above_y * below_x_above_y).sum())

    # right_below[u, v] = #{k : rx_k > u, ry_k < v}
    right_below = cum[kx, :][None, :] - cum[1:, :]
    max_x_ij = np.maximum.outer(rx, rx)
    y_up_ij = ry[:, None] < ry[None, :]  # y_i < y_j
    n3 = 0
    step = max(1, chunk // max(1, n * n))
    for start in range(0, n, step):
        ls = slice(start, min(n, start + step))
        rxl = rx[ls]
        ryl = ry[ls]
        # axes (i, j, l)
        ok = (
            y_up_ij[:, :, None]
            & (rx[:, None, None] < rxl[None, None, :])
            & (ry[:, None, None] < ryl[None, None, :])
            & (rx[None, :, None] < rxl[None, None, :])
        )
        if not ok.any():
            continue
        i, j, l = np.nonzero(ok)
        cap_y = np.minimum(ry[j], ryl[l])
        n3 += int(right_below[max_x_ij[i, j], cap_y].sum())
    return 4 * (n1 + n2) - 8 * n3


def _sample_codes(sample):
    rx, kx = rank_codes(sample.xs)
    ry, ky = rank_codes(sample.ys)
    return rx, kx, ry, ky


def _taustar_exact(sample, normalization):
    rx, kx, ry, ky = _sample_codes(sample)
    n = sample.n
    if normalization is Normalization.U:
        return _taustar_numerator(rx, ry, kx, ky, distinct=True) / _falling4(n)
    return _taustar_numerator(rx, ry, kx, ky) / n**4


def _distinct_mask(n):
    idx = np.arange(n)
    i = idx[:, None, None, None]
    j = idx[None, :, None, None]
    k = idx[None, None, :, None]
    m = idx[None, None, None, :]
    return (i != j) & (i != k) & (i != m) & (j != k) & (j != m) & (k != m)


def _naive_guard(n, force):
    if n > NAIVE_MAX_N and not force:
        raise ResourceError(
            f"brute-force O(n^4) evaluation refused for n={n} > {NAIVE_MAX_N}; "
            "use the exhaustive or table method, or pass force=True"
        )


def t_star_naive(sample, normalization=Normalization.V, force=False):
    """Brute-force t* over all ``n^4`` index tuples (or distinct ones for U).

    Reference implementation; cost and memory are O(n^4).
    """
    normalization = Normalization(normalization)
    n = sample.n
    _check_u(n, normalization)
    _naive_guard(n, force)
    prod = a_tensor(sample.xs) * a_tensor(sample.ys)
    if normalization is Normalization.U:
        return int(prod[_distinct_mask(n)].sum()) / _falling4(n)
    return int(prod.sum()) / n**4


def _a_vec(z1, z2, z3, z4):
    out = (np.maximum(z1, z2) < np.minimum(z3, z4)).astype(np.int64)
    out += np.minimum(z1, z2) > np.maximum(z3, z4)
    out -= np.maximum(z1, z3) < np.minimum(z2, z4)
    out -= np.minimum(z1, z3) > np.maximum(z2, z4)
    return out


def _h_vec(z1, z2, z3, z4):
    return np.abs(z1 - z2) + np.abs(z3 - z4) - np.abs(z1 - z3) - np.abs(z2 - z4)


def _draw_tuples(n, m, normalization, rng):
    if normalization is Normalization.V:
        return rng.integers(0, n, size=(m, 4))
    out = np.empty((0, 4), dtype=np.int64)
    while out.shape[0] < m:
        need = m - out.shape[0]
        cand = rng.integers(0, n, size=(max(16, int(need * 1.5) + 16), 4))
        s = np.sort(cand, axis=1)
        keep = np.all(np.diff(s, axis=1) != 0, axis=1)
        out = np.concatenate([out, cand[keep][:need]])
    return out


def _subsample(values_x, values_y, kernel, m, seed, normalization):
    n = values_x.size
    _check_u(n, normalization)
    rng = np.random.default_rng(seed)
    idx = _draw_tuples(n, m, normalization, rng)
    terms = kernel(*(values_x[idx[:, t]] for t in range(4))) * kernel(
        *(values_y[idx[:, t]] for t in range(4))
    )
    terms = terms.astype(float)
    est = float(terms.mean())
    se = float(terms.std(ddof=1) / math.sqrt(m)) if m > 1 else math.inf
    return est, se


def t_star_subsample(sample, m, seed=0, normalization=Normalization.V):
    """Monte Carlo t* from ``m`` random index tuples.

    V draws tuples with replacement from all ``n^4``; U draws tuples of
    distinct indices.  Either way the estimate is unbiased for the matching
    exact statistic.

    Returns
    -------
    estimate, standard_error : float
    """
    if m < 1:
        raise InvalidArgumentError("Subsample needs m >= 1")
    return _subsample(
        sample.xs, sample.ys, _a_vec, int(m), seed, Normalization(normalization)
    )


def t_star(sample, config=DEFAULT_CONFIG):
    """The sign covariance t* of a paired sample.

    With the default V normalization this is the average of
    ``a(x_i,x_j,x_k,x_l) * a(y_i,y_j,y_k,y_l)`` over all ``n^4`` index tuples,
    i.e. tau* of the empirical distribution.  The U form averages over
    ordered tuples of distinct indices.

    ``Method.EXHAUSTIVE`` uses an exact O(n^3) counting algorithm,
    ``Method.TABLE`` contracts the cross-tabulation (cost independent of n),
    and ``Method.SUBSAMPLE`` averages ``config.m`` random tuples.
    """
    _check_u(sample.n, config.normalization)
    if config.method is Method.TABLE:
        return t_star_from_table(tabulate_sample(sample))
    if config.method is Method.SUBSAMPLE:
        return t_star_subsample(sample, config.m, config.seed, config.normalization)[0]
    return _taustar_exact(sample, config.normalization)


def t_star_b(sample):
    """t* normalized by ``sqrt(t*(x,x) t*(y,y))``; lies in [-1, 1]."""
    rx, kx, ry, ky = _sample_codes(sample)
    xy = _taustar_numerator(rx, ry, kx, ky)
    xx = _taustar_numerator(rx, rx, kx, kx)
    yy = _taustar_numerator(ry, ry, ky, ky)
    if xx <= 0 or yy <= 0:
        raise DegenerateInputError("t*_b is undefined when a margin is constant")
    return xy / math.sqrt(xx * yy)


# --------------------------------------------------------------------------
# table contraction engine
# --------------------------------------------------------------------------


def _contract(counts, kernel_rows, kernel_cols):
    """``sum prod_t counts[i_t, j_t] * Kr[i1..i4] * Kc[j1..j4]`` over all 8 indices.

    Contracts one row index at a time; each step trades a row axis of the
    running tensor for a column axis, so the cost is O(r^4 c + ... + r c^4).
    Integer inputs are accumulated exactly while the result fits in int64.
    """
    counts = np.asarray(counts)
    integral = all(np.asarray(t).dtype.kind in "iub" for t in (counts, kernel_rows, kernel_cols))
    if integral:
        bound = (
            int(counts.sum()) ** 4
            * int(np.abs(kernel_rows).max(initial=0))
            * int(np.abs(kernel_cols).max(initial=0))
        )
        if bound < 2**62:
            dtype = np.int64
        else:
            dtype = float
    else:
        dtype = float
    t = np.asarray(kernel_rows, dtype=dtype)
    w = counts.astype(dtype)
    for _ in range(4):
        t = np.tensordot(t, w, axes=([0], [0]))
    total = np.sum(t * np.asarray(kernel_cols, dtype=dtype))
    return int(total) if dtype is np.int64 else float(total)


def _table_grades(table):
    rows = table.counts.sum(axis=1)
    cols = table.counts.sum(axis=0)

    def grades(m):
        before = np.concatenate([[0], np.cumsum(m)[:-1]])
        return 2 * before + m

    return grades(rows), grades(cols)


def table_quadruple_contraction(table, kernel):
    """V-form quadruple statistic of a contingency table.

    ``KernelId.SIGN_A`` applies the sign kernel to the row/column scores
    (giving t*); ``KernelId.GRADE_H`` applies the distance kernel to the
    mid-distribution grades of the margins (giving D).
    """
    kernel = KernelId(kernel)
    n = table.n
    if n < 1:
        raise InvalidArgumentError("table has no observations")
    if kernel is KernelId.SIGN_A:
        return _contract(table.counts, a_tensor(table.row_scores), a_tensor(table.col_scores)) / n**4
    gr, gc = _table_grades(table)
    return _contract(table.counts, h_tensor(gr), h_tensor(gc)) / (n**4 * (2 * n) ** 2)


def t_star_from_table(table):
    """t* (V form) of the sample a table tabulates, at cost O(r^4 c + r c^4)."""
    return table_quadruple_contraction(table, KernelId.SIGN_A)


# --------------------------------------------------------------------------
# classical comparison statistics
# --------------------------------------------------------------------------


def kendall_t(sample):
    """Kendall's ``(1/n^2) sum_{i,j} sign(x_i - x_j) sign(y_i - y_j)``."""
    sx = np.sign(np.subtract.outer(sample.xs, sample.xs)).astype(np.int64)
    sy = np.sign(np.subtract.outer(sample.ys, sample.ys)).astype(np.int64)
    return int((sx * sy).sum()) / sample.n**2


def pearson_chi_square(table):
    """Pearson's ``sum (O - E)^2 / E`` for a contingency table.

    Raises
    ------
    DegenerateInputError
        If any row or column total is zero.  Drop empty categories first.
    """
    counts = table.counts
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    if np.any(rows == 0) or np.any(cols == 0):
        raise DegenerateInputError("chi-square needs positive row and column totals")
    n = int(counts.sum())
    # sum O^2/E - n avoids forming E explicitly
    return n * float((counts**2 / np.outer(rows, cols)).sum()) - n


def hoeffding_h(sample):
    """Plug-in estimate of Hoeffding's ``H = int (F12 - F1 F2)^2 dF12``.

    All distribution functions are empirical with the ``<=`` convention.
    """
    n = sample.n
    le_x = sample.xs[None, :] <= sample.xs[:, None]
    le_y = sample.ys[None, :] <= sample.ys[:, None]
    joint = (le_x & le_y).sum(axis=1).astype(np.int64)
    fx = le_x.sum(axis=1).astype(np.int64)
    fy = le_y.sum(axis=1).astype(np.int64)
    dev = n * joint - fx * fy
    return int((dev * dev).sum()) / n**5


def hoeffding_h_oracle(sample):
    """Hoeffding's five-point form ``(1/4) E phi phi phi phi`` by full enumeration.

    Sums over all ``n^5`` index tuples; meant for small samples only.
    """
    n = sample.n
    if n < 5:
        raise InvalidArgumentError("the five-point form needs n >= 5")
    if n > HOEFFDING_ORACLE_MAX_N:
        raise ResourceError(f"O(n^5) oracle refused for n={n} > {HOEFFDING_ORACLE_MAX_N}")

    def phi(v):
        ge = (v[:, None] >= v[None, :]).astype(np.int64)
        return ge[:, :, None] - ge[:, None, :]

    px = phi(sample.xs)
    py = phi(sample.ys)
    total = np.einsum("abc,ade,abc,ade->", px, px, py, py)
    return int(total) / (4 * n**5)


def _dewet_numerator(gx, gy):
    """Integer ``sum h(gx..) h(gy..)`` over all ``n^4`` tuples via pair sums.

    Expanding the product of the two four-term kernels and summing out free
    indices leaves ``4 n^2 S + 4 Tx Ty - 8 n sum_i Rx_i Ry_i`` with
    ``S = sum_ij dx_ij dy_ij``, ``T = sum_ij d_ij`` and ``R_i = sum_j d_ij``.
    """
    n = gx.size
    dx = np.abs(np.subtract.outer(gx, gx))
    dy = np.abs(np.subtract.outer(gy, gy))
    s = int((dx * dy).sum())
    rx = dx.sum(axis=1)
    ry = dy.sum(axis=1)
    tx = int(rx.sum())
    ty = int(ry.sum())
    rr = int((rx * ry).sum())
    return 4 * n * n * s + 4 * tx * ty - 8 * n * rr


def dewet_d_naive(sample, normalization=Normalization.V, force=False):
    """Brute-force D over all index tuples of the grade kernel product."""
    normalization = Normalization(normalization)
    n = sample.n
    _check_u(n, normalization)
    _naive_guard(n, force)
    prod = h_tensor(mid_grades(sample.xs)) * h_tensor(mid_grades(sample.ys))
    scale = (2 * n) ** 2
    if normalization is Normalization.U:
        return int(prod[_distinct_mask(n)].sum()) / (_falling4(n) * scale)
    return int(prod.sum()) / (n**4 * scale)


def dewet_d(sample, config=DEFAULT_CONFIG):
    """De Wet / Deheuvels' D: the h-kernel statistic on mid-distribution grades.

    The exhaustive V form runs in O(n^2); the U form is evaluated by brute
    force and so is limited to small samples.
    """
    n = sample.n
    _check_u(n, config.normalization)
    if config.method is Method.TABLE:
        return table_quadruple_contraction(tabulate_sample(sample), KernelId.GRADE_H)
    gx = mid_grades(sample.xs)
    gy = mid_grades(sample.ys)
    if config.method is Method.SUBSAMPLE:
        est, _ = _subsample(gx, gy, _h_vec, config.m, config.seed, config.normalization)
        return est / (2 * n) ** 2
    if config.normalization is Normalization.U:
        return dewet_d_naive(sample, Normalization.U)
    return _dewet_numerator(gx, gy) / (n**4 * (2 * n) ** 2)


def cvm_statistic(u, v):
    """Two-sample Cramér–von Mises discrepancy.

    ``sum_z (G(z) - H(z))^2 w(z)`` over the distinct pooled values ``z``, where
    ``G`` and ``H`` are the ``<=`` empirical CDFs of ``u`` and ``v`` and ``w``
    is the pooled empirical mass at ``z``.
    """
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.size == 0 or v.size == 0:
        raise InvalidArgumentError("both samples must be nonempty")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise InvalidArgumentError("sample values must be finite")
    pooled = np.concatenate([u, v])
    z, mass = np.unique(pooled, return_counts=True)
    g = np.searchsorted(np.sort(u), z, side="right") / u.size
    h = np.searchsorted(np.sort(v), z, side="right") / v.size
    return float(((g - h) ** 2 * mass).sum() / pooled.size)
