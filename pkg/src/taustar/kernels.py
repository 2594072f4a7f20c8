"""Point kernels of four (or three) arguments and quadruple geometry.

Scalar functions validate their inputs and return Python numbers.  The
``*_tensor`` helpers evaluate a kernel over every ordered quadruple of a
vector of category values at once; they feed the contraction engine in
:mod:`taustar.estimators` and :mod:`taustar.population`.
"""

from __future__ import annotations

import enum
import itertools
import math

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "QuadrupleClass",
    "KernelId",
    "sign_s",
    "a_kernel",
    "a_kernel_metric",
    "h_kernel",
    "phi_kernel",
    "classify_quadruple",
    "a_tensor",
    "a_tensor_metric",
    "h_tensor",
]

# relative slack below which a metric distance combination counts as zero
METRIC_ZERO_TOL = 1e-12


class QuadrupleClass(enum.Enum):
    CONCORDANT = "concordant"
    DISCORDANT = "discordant"
    TIED = "tied"


class KernelId(enum.Enum):
    SIGN_A = "sign_a"
    GRADE_H = "grade_h"


def _finite(*zs):
    for z in zs:
        if not math.isfinite(z):
            raise InvalidArgumentError(f"kernel argument must be finite, got {z!r}")


def _sign(v):
    return (v > 0) - (v < 0)


def sign_s(z1, z2, z3, z4):
    """Kendall's quadruple kernel ``sign((z1 - z3) * (z2 - z4))``."""
    _finite(z1, z2, z3, z4)
    return _sign(z1 - z3) * _sign(z2 - z4)


def a_kernel(z1, z2, z3, z4):
    """The sign kernel whose paired expectation is tau*.

    Computed from strict four-way separations::

        I(z1,z2 < z3,z4) + I(z1,z2 > z3,z4) - I(z1,z3 < z2,z4) - I(z1,z3 > z2,z4)

    which equals ``sign(|z1-z3| + |z2-z4| - |z1-z2| - |z3-z4|)``.
    """
    _finite(z1, z2, z3, z4)
    return (
        int(max(z1, z2) < min(z3, z4))
        + int(min(z1, z2) > max(z3, z4))
        - int(max(z1, z3) < min(z2, z4))
        - int(min(z1, z3) > max(z2, z4))
    )


def _as_point(p):
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.ndim != 1:
        raise InvalidArgumentError("metric points must be 1-d vectors")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("metric points must have finite coordinates")
    return arr


def a_kernel_metric(p1, p2, p3, p4):
    """Euclidean version of :func:`a_kernel` for points in ``R^m``.

    Returns ``sign(d(p1,p3) + d(p2,p4) - d(p1,p2) - d(p3,p4))``.  Combinations
    within ``1e-12`` (relative to the largest distance) of zero count as zero.
    """
    pts = [_as_point(p) for p in (p1, p2, p3, p4)]
    if len({p.shape for p in pts}) != 1:
        raise InvalidArgumentError("metric points must share one dimension")

    def d(u, v):
        return float(np.linalg.norm(u - v))

    terms = (d(pts[0], pts[2]), d(pts[1], pts[3]), d(pts[0], pts[1]), d(pts[2], pts[3]))
    value = terms[0] + terms[1] - terms[2] - terms[3]
    if abs(value) <= METRIC_ZERO_TOL * max(terms, default=0.0):
        return 0
    return _sign(value)


def h_kernel(z1, z2, z3, z4):
    """Distance kernel ``|z1-z2| + |z3-z4| - |z1-z3| - |z2-z4|``."""
    _finite(z1, z2, z3, z4)
    return abs(z1 - z2) + abs(z3 - z4) - abs(z1 - z3) - abs(z2 - z4)


def phi_kernel(z1, z2, z3):
    """Hoeffding's three-point kernel ``I(z1 >= z2) - I(z1 >= z3)``."""
    _finite(z1, z2, z3)
    return int(z1 >= z2) - int(z1 >= z3)


_PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def _below(values, low, high):
    return max(values[i] for i in low) < min(values[i] for i in high)


def _quadruple_flags(xs, ys):
    """Return ``(concordant, discordant)`` for four points by exhaustive search."""
    concordant = discordant = False
    for p, q in _PAIRINGS:
        for low, high in ((p, q), (q, p)):
            if not _below(xs, low, high):
                continue
            if _below(ys, low, high) or _below(ys, high, low):
                concordant = True
            # y-splits that put one low-x and one high-x point on each side
            for a, b in itertools.product(low, high):
                side = (a, b)
                rest = tuple(i for i in range(4) if i not in side)
                if _below(ys, side, rest) or _below(ys, rest, side):
                    discordant = True
    return concordant, discordant


def classify_quadruple(points):
    """Classify four planar points as concordant, discordant or tied.

    Parameters
    ----------
    points : sequence of four ``(x, y)`` pairs

    Returns
    -------
    QuadrupleClass
    """
    pts = [tuple(map(float, p)) for p in points]
    if len(pts) != 4 or any(len(p) != 2 for p in pts):
        raise InvalidArgumentError("classify_quadruple needs exactly four (x, y) points")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    _finite(*xs, *ys)
    concordant, discordant = _quadruple_flags(xs, ys)
    if concordant and discordant:
        raise AssertionError(f"quadruple {pts} is both concordant and discordant")
    if concordant:
        return QuadrupleClass.CONCORDANT
    if discordant:
        return QuadrupleClass.DISCORDANT
    return QuadrupleClass.TIED


def _grid(values):
    v = np.asarray(values)
    return (
        v[:, None, None, None],
        v[None, :, None, None],
        v[None, None, :, None],
        v[None, None, None, :],
    )


def a_tensor(values):
    """``A[i,j,k,l] = a(v_i, v_j, v_k, v_l)`` as an int64 array of shape ``(r,)*4``."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise InvalidArgumentError("a_tensor expects a 1-d vector of values")
    z1, z2, z3, z4 = _grid(v)
    out = (np.maximum(z1, z2) < np.minimum(z3, z4)).astype(np.int64)
    out += np.minimum(z1, z2) > np.maximum(z3, z4)
    out -= np.maximum(z1, z3) < np.minimum(z2, z4)
    out -= np.minimum(z1, z3) > np.maximum(z2, z4)
    return out


def a_tensor_metric(points):
    """Euclidean :func:`a_kernel_metric` over all quadruples of ``points`` (shape ``(r, m)``)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise InvalidArgumentError("metric points must form an (r, m) array")
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1))
    d13 = dist[:, None, :, None]
    d24 = dist[None, :, None, :]
    d12 = dist[:, :, None, None]
    d34 = dist[None, None, :, :]
    value = d13 + d24 - d12 - d34
    scale = np.maximum(np.maximum(d13, d24), np.maximum(d12, d34))
    value = np.where(np.abs(value) <= METRIC_ZERO_TOL * scale, 0.0, value)
    return np.sign(value).astype(np.int64)


def h_tensor(values):
    """``H[i,j,k,l] = h(v_i, v_j, v_k, v_l)``; integer inputs give an integer array."""
    v = np.asarray(values)
    z1, z2, z3, z4 = _grid(v)
    return np.abs(z1 - z2) + np.abs(z3 - z4) - np.abs(z1 - z3) - np.abs(z2 - z4)
