"""Exact population functionals of finite discrete joint distributions.

tau* is defined throughout as ``E a(X1..X4) a(Y1..Y4)`` for four iid draws
and is computed by contracting the kernel tensors of the row and column
categories against the probability table (see :func:`pop_tau_star`).  The
other routes in this module (probability identities, the binary-X reduction)
are checked against that definition.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ParseError, ResourceError, UnsupportedError
from .estimators import _contract
from .kernels import QuadrupleClass, a_tensor, a_tensor_metric, classify_quadruple

__all__ = [
    "ValueKind",
    "JointDistribution",
    "QuadrupleProbs",
    "SweepReport",
    "Convention",
    "pop_tau_star",
    "pop_quadruple_probs",
    "tau_star_from_quadruple_probs",
    "pop_tau_star_from_probs",
    "pop_tau_star_binary",
    "pop_cvm_c_alpha",
    "mix_with_point_mass",
    "counterexample_r8",
    "product_joint",
    "joint_from_table",
    "sweep_3x3",
    "parse_joint",
    "format_joint",
]

PROB_TOL = 1e-12
MAX_CATEGORIES = 40


class ValueKind(enum.Enum):
    REAL = "real"
    METRIC = "metric"


def _kind_of(values):
    return ValueKind.REAL if values.ndim == 1 else ValueKind.METRIC


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """An ``r x c`` probability table with category values on each axis.

    Row (column) values are either a 1-d array of strictly increasing real
    scores or an ``(r, m)`` array of distinct points in ``R^m``.
    """

    probs: np.ndarray
    row_values: np.ndarray
    col_values: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2 or p.size == 0:
            raise InvalidArgumentError("probs must be a non-empty 2-d array")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidArgumentError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise InvalidArgumentError(f"probabilities sum to {p.sum()!r}, not 1")
        rows = self._values(self.row_values, p.shape[0], "row")
        cols = self._values(self.col_values, p.shape[1], "column")
        for arr in (p, rows, cols):
            arr.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "row_values", rows)
        object.__setattr__(self, "col_values", cols)

    @staticmethod
    def _values(values, k, what):
        v = np.array(values, dtype=float)
        if v.ndim not in (1, 2) or v.shape[0] != k:
            raise InvalidArgumentError(f"expected {k} {what} values")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError(f"{what} values must be finite")
        if v.ndim == 1:
            if np.any(np.diff(v) <= 0):
                raise InvalidArgumentError(f"real {what} values must be strictly increasing")
        elif len({tuple(row) for row in v.tolist()}) != k:
            raise InvalidArgumentError(f"metric {what} points must be distinct")
        return v

    @property
    def shape(self):
        return self.probs.shape

    @property
    def row_kind(self):
        return _kind_of(self.row_values)

    @property
    def col_kind(self):
        return _kind_of(self.col_values)

    @property
    def is_real(self):
        return self.row_kind is ValueKind.REAL and self.col_kind is ValueKind.REAL


@dataclass(frozen=True)
class QuadrupleProbs:
    pi_c4: float
    pi_d4: float
    pi_tied: float


@dataclass(frozen=True)
class SweepReport:
    trials: int
    min_tau_star: float
    argmin_table: np.ndarray
    independence_hits: int


class Convention(enum.Enum):
    LEFT = "left"    # G(z) = P(. < z)
    RIGHT = "right"  # G(z) = P(. <= z)


def _guard(joint):
    r, c = joint.shape
    if max(r, c) > MAX_CATEGORIES:
        raise ResourceError(
            f"{r}x{c} joint exceeds the {MAX_CATEGORIES}-category limit of exact enumeration"
        )


def _require_real(joint, what):
    if not joint.is_real:
        raise UnsupportedError(f"{what} needs real-valued categories")


def _axis_a_tensor(values):
    return a_tensor(values) if values.ndim == 1 else a_tensor_metric(values)


def pop_tau_star(joint):
    """tau* = E a(X1..X4) a(Y1..Y4) by exact enumeration over cell quadruples."""
    _guard(joint)
    return float(
        _contract(joint.probs, _axis_a_tensor(joint.row_values), _axis_a_tensor(joint.col_values))
    )


# --------------------------------------------------------------------------
# concordance / discordance probabilities
# --------------------------------------------------------------------------


def _weak_order_patterns():
    """All weak orders of four labelled items, as tuples of dense ranks."""
    seen = {}
    for ranks in itertools.product(range(4), repeat=4):
        used = sorted(set(ranks))
        dense = tuple(used.index(v) for v in ranks)
        seen.setdefault(dense, len(seen))
    return seen


_PATTERNS = _weak_order_patterns()


def _pattern_class_table():
    k = len(_PATTERNS)
    table = np.empty((k, k), dtype=object)
    for px, ix in _PATTERNS.items():
        for py, iy in _PATTERNS.items():
            table[ix, iy] = classify_quadruple(list(zip(px, py)))
    return table


_CLASS_TABLE = None


def _class_table():
    global _CLASS_TABLE
    if _CLASS_TABLE is None:
        _CLASS_TABLE = _pattern_class_table()
    return _CLASS_TABLE


def _pattern_onehot(k):
    """One-hot ``(k, k, k, k, n_patterns)`` tensor of the order pattern of index quadruples."""
    idx = np.array(list(itertools.product(range(k), repeat=4)))
    onehot = np.zeros((idx.shape[0], len(_PATTERNS)))
    for row, quad in enumerate(idx):
        used = sorted(set(quad))
        dense = tuple(used.index(v) for v in quad)
        onehot[row, _PATTERNS[dense]] = 1.0
    return onehot.reshape(k, k, k, k, -1)


def pop_quadruple_probs(joint):
    """Probabilities that four iid draws are concordant, discordant or tied.

    The classification of four points depends only on the order patterns
    (with ties) of their x- and y-coordinates.  The joint law of the two
    patterns is obtained by contracting one-hot pattern tensors against the
    probability table, then each pattern pair is classified once.
    """
    _require_real(joint, "quadruple classification")
    _guard(joint)
    r, c = joint.shape
    t = _pattern_onehot(r)
    for _ in range(4):
        t = np.tensordot(t, joint.probs, axes=([0], [0]))
    # t has axes (pattern_x, j1, j2, j3, j4)
    weights = np.tensordot(t, _pattern_onehot(c), axes=([1, 2, 3, 4], [0, 1, 2, 3]))
    classes = _class_table()
    totals = {cls: 0.0 for cls in QuadrupleClass}
    for ix, iy in zip(*np.nonzero(weights)):
        totals[classes[ix, iy]] += weights[ix, iy]
    return QuadrupleProbs(
        pi_c4=float(totals[QuadrupleClass.CONCORDANT]),
        pi_d4=float(totals[QuadrupleClass.DISCORDANT]),
        pi_tied=float(totals[QuadrupleClass.TIED]),
    )


def tau_star_from_quadruple_probs(qp):
    """``(2 Pi_C4 - Pi_D4) / 3``; equals tau* when quadruples are a.s. untied."""
    return (2.0 * qp.pi_c4 - qp.pi_d4) / 3.0


def _below_tensor(values):
    """``L[i,j,k,l] = I(v_i, v_j < v_k, v_l)``."""
    v = np.asarray(values)
    z1 = v[:, None, None, None]
    z2 = v[None, :, None, None]
    z3 = v[None, None, :, None]
    z4 = v[None, None, None, :]
    return (np.maximum(z1, z2) < np.minimum(z3, z4)).astype(np.int64)


def pop_tau_star_from_probs(joint):
    """tau* = 4 (E1 + E2) - 8 E3 from three separation probabilities.

    ``E1 = P(X1,X2 < X3,X4 and Y1,Y2 < Y3,Y4)``, ``E2`` is the same with the
    y-separation reversed, and ``E3 = P(X1,X2 < X3,X4 and Y1,Y3 < Y2,Y4)``.
    """
    _require_real(joint, "the separation-probability form")
    _guard(joint)
    lx = _below_tensor(joint.row_values)
    ly = _below_tensor(joint.col_values)
    e1 = _contract(joint.probs, lx, ly)
    e2 = _contract(joint.probs, lx, ly.transpose(2, 3, 0, 1))
    e3 = _contract(joint.probs, lx, ly.transpose(0, 2, 1, 3))
    return float(4.0 * (e1 + e2) - 8.0 * e3)


# --------------------------------------------------------------------------
# binary X and the Cramer-von Mises functional
# --------------------------------------------------------------------------


def _cdf_parts(w):
    lt = np.concatenate([[0.0], np.cumsum(w)[:-1]])
    le = lt + w
    return lt, le, 1.0 - lt, 1.0 - le  # P(<), P(<=), P(>=), P(>)


def _binary_bracket(g, h):
    """``P(U1,U2 < V1,V2) + P(V1,V2 < U1,U2) - 2 P(U1,V1 < U2,V2)`` on a common grid."""
    g_lt, _, g_ge, g_gt = _cdf_parts(g)
    h_lt, _, h_ge, h_gt = _cdf_parts(h)
    u_below_v = np.sum((h_ge**2 - h_gt**2) * g_lt**2)
    v_below_u = np.sum((g_ge**2 - g_gt**2) * h_lt**2)
    crossed = np.sum((g_ge * h_ge - g_gt * h_gt) * g_lt * h_lt)
    return float(u_below_v + v_below_u - 2.0 * crossed)


def pop_tau_star_binary(joint):
    """tau* for a two-row joint via the conditional laws of Y given X.

    With ``p = P(X = first row)``, ``U = Y | first row`` and ``V = Y | second
    row``, tau* = ``4 p^2 (1-p)^2 [P(U1,U2<V1,V2) + P(V1,V2<U1,U2) - 2 P(U1,V1<U2,V2)]``.
    Runs in O(c), so it handles fine discretizations that full enumeration cannot.
    """
    if joint.shape[0] != 2:
        raise InvalidArgumentError("the binary reduction needs exactly two rows")
    _require_real(joint, "the binary reduction")
    mass = joint.probs.sum(axis=1)
    if np.any(mass == 0):
        return 0.0
    p = float(mass[0])
    g = joint.probs[0] / mass[0]
    h = joint.probs[1] / mass[1]
    return 4.0 * p * p * (1.0 - p) ** 2 * _binary_bracket(g, h)


def _law(law):
    values, probs = law
    v = np.asarray(values, dtype=float).ravel()
    w = np.asarray(probs, dtype=float).ravel()
    if v.size == 0 or v.shape != w.shape:
        raise InvalidArgumentError("a discrete law needs matching, nonempty values and probabilities")
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))) or np.any(w < 0):
        raise InvalidArgumentError("law values must be finite and probabilities nonnegative")
    if abs(w.sum() - 1.0) > PROB_TOL:
        raise InvalidArgumentError("law probabilities must sum to 1")
    return v, w


def pop_cvm_c_alpha(g, h, alpha, convention=Convention.RIGHT):
    """``C_alpha = int (G - H)^2 dF_alpha`` with ``F_alpha = alpha G + (1 - alpha) H``.

    Parameters
    ----------
    g, h : (values, probabilities)
        Discrete laws on the real line.
    alpha : float
        Mixing weight; any real number.
    convention : Convention
        Whether the distribution functions are ``P(. <= z)`` or ``P(. < z)``.
    """
    convention = Convention(convention)
    gv, gw = _law(g)
    hv, hw = _law(h)
    support = np.union1d(gv, hv)
    g_mass = np.zeros(support.size)
    h_mass = np.zeros(support.size)
    np.add.at(g_mass, np.searchsorted(support, gv), gw)
    np.add.at(h_mass, np.searchsorted(support, hv), hw)
    g_lt, g_le, _, _ = _cdf_parts(g_mass)
    h_lt, h_le, _, _ = _cdf_parts(h_mass)
    if convention is Convention.RIGHT:
        gc, hc = g_le, h_le
    else:
        gc, hc = g_lt, h_lt
    f_alpha = alpha * g_mass + (1.0 - alpha) * h_mass
    return float(np.sum((gc - hc) ** 2 * f_alpha))


# --------------------------------------------------------------------------
# constructions
# --------------------------------------------------------------------------


def product_joint(row_probs, col_probs, row_values=None, col_values=None):
    """The independence law with the given marginals (default scores ``1..k``)."""
    rp = np.asarray(row_probs, dtype=float)
    cp = np.asarray(col_probs, dtype=float)
    if row_values is None:
        row_values = np.arange(1, rp.size + 1, dtype=float)
    if col_values is None:
        col_values = np.arange(1, cp.size + 1, dtype=float)
    return JointDistribution(np.outer(rp, cp), row_values, col_values)


def joint_from_table(table):
    """Empirical joint law of a contingency table, keeping its scores."""
    n = table.n
    if n < 1:
        raise InvalidArgumentError("table has no observations")
    return JointDistribution(table.counts / n, table.row_scores, table.col_scores)


def _insert_value(values, new):
    """Index of ``new`` among the categories, and the (possibly extended) values."""
    new = np.asarray(new, dtype=float)
    if values.ndim == 1:
        if new.ndim != 0:
            raise InvalidArgumentError("a real axis needs a real mixing value")
        pos = int(np.searchsorted(values, new))
        if pos < values.size and values[pos] == new:
            return pos, values, False
        return pos, np.insert(values, pos, new), True
    point = np.atleast_1d(new)
    if point.shape != values.shape[1:]:
        raise InvalidArgumentError("mixing point has the wrong dimension")
    hits = np.nonzero(np.all(values == point, axis=1))[0]
    if hits.size:
        return int(hits[0]), values, False
    return values.shape[0], np.vstack([values, point]), True


def mix_with_point_mass(joint, x0, y0, p):
    """Mixture taking ``joint`` with probability ``p`` and ``(x0, y0)`` otherwise."""
    if not (0.0 < p <= 1.0):
        raise InvalidArgumentError("mixing weight p must lie in (0, 1]")
    if p == 1.0:
        return joint
    i, rows, new_row = _insert_value(joint.row_values, x0)
    j, cols, new_col = _insert_value(joint.col_values, y0)
    probs = joint.probs * p
    if new_row:
        probs = np.insert(probs, i, 0.0, axis=0)
    if new_col:
        probs = np.insert(probs, j, 0.0, axis=1)
    probs[i, j] += 1.0 - p
    return JointDistribution(probs, rows, cols)


def counterexample_r8():
    """An 8-atom law with X in ``R^8`` and binary Y whose tau* is negative.

    ``u_i`` has 3 in coordinate ``i``, -1 in the other coordinates of its own
    block of four, and 0 elsewhere; ``Y = 0`` on ``u_1..u_4`` and ``Y = 1`` on
    ``u_5..u_8``.  Each atom has probability 1/8.
    """
    u = np.zeros((8, 8))
    for block in (range(0, 4), range(4, 8)):
        for i in block:
            for j in block:
                u[i, j] = 3.0 if i == j else -1.0
    probs = np.zeros((8, 2))
    probs[:4, 0] = 1 / 8
    probs[4:, 1] = 1 / 8
    return JointDistribution(probs, u, np.array([0.0, 1.0]))


# --------------------------------------------------------------------------
# 3x3 nonnegativity sweep
# --------------------------------------------------------------------------


def _fit_margins(m, rows, cols, iters=200, tol=1e-14):
    for _ in range(iters):
        m = m * (rows / m.sum(axis=1))[:, None]
        m = m * (cols / m.sum(axis=0))[None, :]
        if np.abs(m.sum(axis=1) - rows).max() < tol:
            break
    return m


def _northwest_vertex(rows, cols, rng):
    """A random vertex of the transportation polytope (northwest-corner rule on shuffled axes)."""
    pr = rng.permutation(rows.size)
    pc = rng.permutation(cols.size)
    r = rows[pr].copy()
    c = cols[pc].copy()
    out = np.zeros((rows.size, cols.size))
    i = j = 0
    while i < r.size and j < c.size:
        q = min(r[i], c[j])
        out[pr[i], pc[j]] = q
        r[i] -= q
        c[j] -= q
        if r[i] <= c[j]:
            i += 1
        else:
            j += 1
    return out


def _random_table(rows, cols, rng):
    kind = rng.integers(5)
    if kind == 0:
        return _northwest_vertex(rows, cols, rng)
    if kind == 1:
        # mixture of a vertex and an interior point; hugs the boundary
        w = rng.uniform(0.5, 1.0)
        interior = _fit_margins(rng.exponential(size=(rows.size, cols.size)), rows, cols)
        return w * _northwest_vertex(rows, cols, rng) + (1 - w) * interior
    # sharper exponents give sparser, more extreme tables
    power = (1.0, 3.0, 8.0)[kind - 2]
    raw = rng.exponential(size=(rows.size, cols.size)) ** power + 1e-300
    return _fit_margins(raw, rows, cols)


def _exchange_directions(r, c):
    dirs = []
    for i, k in itertools.combinations(range(r), 2):
        for j, l in itertools.combinations(range(c), 2):
            d = np.zeros((r, c))
            d[i, j] = d[k, l] = 1.0
            d[i, l] = d[k, j] = -1.0
            dirs.append(d)
    return dirs


def _descend(table, tau, dirs, steps=(0.05, 0.01, 2e-3, 4e-4, 1e-4, 2e-5), rounds=200):
    best = table.copy()
    best_val = tau(best)
    for step in steps:
        for _ in range(rounds):
            improved = False
            for d in dirs:
                for sgn in (1.0, -1.0):
                    cand = best + sgn * step * d
                    if cand.min() < 0:
                        continue
                    val = tau(cand)
                    if val < best_val:
                        best, best_val, improved = cand, val, True
            if not improved:
                break
    return best, best_val


def sweep_3x3(row_marginals, col_marginals, trials, seed=0):
    """Search 3x3 joints with fixed marginals for negative tau*.

    Trial 0 is the product table; later trials are random tables with the
    given margins (interior points, sparse tables and polytope vertices),
    each drawn from its own substream of ``seed``.  A pattern-search descent
    along 2x2 exchange directions then starts from the overall minimum and
    from the worst non-product trial.
    """
    rows = np.asarray(row_marginals, dtype=float)
    cols = np.asarray(col_marginals, dtype=float)
    if rows.shape != (3,) or cols.shape != (3,):
        raise InvalidArgumentError("sweep_3x3 needs three row and three column marginals")
    if np.any(rows <= 0) or np.any(cols <= 0):
        raise InvalidArgumentError("marginals must be positive")
    if abs(rows.sum() - 1) > PROB_TOL or abs(cols.sum() - 1) > PROB_TOL:
        raise InvalidArgumentError("marginals must each sum to 1")
    if trials < 1:
        raise InvalidArgumentError("need at least one trial")
    scores = np.arange(1.0, 4.0)
    kernel = a_tensor(scores)

    def tau(p):
        return float(_contract(p, kernel, kernel))

    min_val = math.inf
    argmin = None
    # worst trial other than the product table: the product sits at tau* = 0
    # and descent from it alone would never leave it
    worst_val = math.inf
    worst = None
    hits = 0
    for t in range(trials):
        if t == 0:
            table = np.outer(rows, cols)
        else:
            table = _random_table(rows, cols, np.random.default_rng([seed, t]))
        val = tau(table)
        if abs(val) <= 1e-12:
            hits += 1
        if val < min_val:
            min_val, argmin = val, table
        if t > 0 and val < worst_val:
            worst_val, worst = val, table
    dirs = _exchange_directions(3, 3)
    for start in (argmin, worst):
        if start is None:
            continue
        refined, refined_val = _descend(start, tau, dirs)
        if refined_val < min_val:
            min_val, argmin = refined_val, refined
    argmin = argmin.copy()
    argmin.setflags(write=False)
    return SweepReport(trials=trials, min_tau_star=min_val, argmin_table=argmin, independence_hits=hits)


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------


def _parse_kind(tokens, pos, lineno):
    kind = tokens[pos].lower()
    if kind == "real":
        return 1, pos + 1, ValueKind.REAL
    if kind == "metric":
        try:
            m = int(tokens[pos + 1])
        except (IndexError, ValueError):
            raise ParseError("metric kind needs a dimension", line=lineno) from None
        if m < 1:
            raise ParseError("metric dimension must be >= 1", line=lineno)
        return m, pos + 2, ValueKind.METRIC
    raise ParseError(f"unknown value kind {tokens[pos]!r}", line=lineno)


def parse_joint(text):
    """Parse the joint-distribution file format.

    The header is ``joint r c KIND [KIND]`` where ``KIND`` is ``real`` or
    ``metric m``; a single kind applies to both axes.  Then follow ``r*c``
    probabilities in row-major order, the ``r`` row values and the ``c``
    column values (``m`` numbers per metric point), separated by whitespace.
    """
    lines = [(i, ln.split("#", 1)[0]) for i, ln in enumerate(text.splitlines(), start=1)]
    lines = [(i, ln) for i, ln in lines if ln.strip()]
    if not lines:
        raise ParseError("empty joint file")
    head_no, head = lines[0]
    tokens = head.split()
    if len(tokens) < 3 or tokens[0].lower() != "joint":
        raise ParseError("header must read 'joint r c [real|metric m]'", line=head_no)
    try:
        r, c = int(tokens[1]), int(tokens[2])
    except ValueError:
        raise ParseError("r and c must be integers", line=head_no) from None
    if r < 1 or c < 1:
        raise ParseError("r and c must be positive", line=head_no)
    kinds = []
    pos = 3
    while pos < len(tokens):
        dim, pos, kind = _parse_kind(tokens, pos, head_no)
        kinds.append((dim, kind))
    if not kinds:
        kinds = [(1, ValueKind.REAL)]
    if len(kinds) == 1:
        kinds = kinds * 2
    if len(kinds) != 2:
        raise ParseError("at most two value kinds may be given", line=head_no)

    numbers = []
    for lineno, ln in lines[1:]:
        for tok in ln.split():
            try:
                numbers.append((float(tok), lineno))
            except ValueError:
                raise ParseError(f"non-numeric token {tok!r}", line=lineno) from None
    (mr, kr), (mc, kc) = kinds
    need = r * c + r * mr + c * mc
    if len(numbers) != need:
        last = numbers[-1][1] if numbers else head_no
        raise ParseError(f"expected {need} numbers after the header, found {len(numbers)}", line=last)
    vals = np.array([v for v, _ in numbers])
    probs = vals[: r * c].reshape(r, c)
    rows = vals[r * c : r * c + r * mr]
    cols = vals[r * c + r * mr :]
    rows = rows if kr is ValueKind.REAL else rows.reshape(r, mr)
    cols = cols if kc is ValueKind.REAL else cols.reshape(c, mc)
    try:
        return JointDistribution(probs, rows, cols)
    except InvalidArgumentError as exc:
        raise ParseError(str(exc)) from None


def _kind_token(values):
    return "real" if values.ndim == 1 else f"metric {values.shape[1]}"


def format_joint(joint):
    r, c = joint.shape
    out = [f"joint {r} {c} {_kind_token(joint.row_values)} {_kind_token(joint.col_values)}"]
    out += [" ".join(repr(float(v)) for v in row) for row in joint.probs]
    for values in (joint.row_values, joint.col_values):
        if values.ndim == 1:
            out.append(" ".join(repr(float(v)) for v in values))
        else:
            out += [" ".join(repr(float(v)) for v in point) for point in values]
    return "\n".join(out) + "\n"
