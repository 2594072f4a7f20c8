import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import a_oracle, quadrant_class
from taustar.errors import InvalidArgumentError
from taustar.kernels import (
    QuadrupleClass,
    a_kernel,
    a_kernel_metric,
    a_tensor,
    a_tensor_metric,
    classify_quadruple,
    h_kernel,
    h_tensor,
    phi_kernel,
    sign_s,
)

small_ints = st.integers(-3, 3)
quad = st.tuples(small_ints, small_ints, small_ints, small_ints)


def test_a_kernel_examples():
    assert a_kernel(1, 2, 3, 4) == 1
    assert a_kernel(1, 3, 2, 4) == -1
    assert a_kernel(0, 0, 0, 0) == 0
    assert a_kernel(1, 1, 2, 2) == 1


def test_sign_s_examples():
    assert sign_s(1, 2, 3, 4) == 1
    assert sign_s(3, 2, 1, 4) == -1
    assert sign_s(1, 2, 1, 4) == 0


@given(quad)
def test_a_kernel_matches_distance_form(z):
    assert a_kernel(*z) == a_oracle(*z)


@given(quad, st.integers(-5, 5), st.integers(1, 4))
def test_a_kernel_invariant_under_monotone_maps(z, shift, scale):
    mapped = [scale * v + shift for v in z]
    assert a_kernel(*mapped) == a_kernel(*z)
    assert a_kernel(*[-v for v in z]) == a_kernel(*z)


@given(quad)
def test_a_kernel_symmetries(z):
    z1, z2, z3, z4 = z
    value = a_kernel(z1, z2, z3, z4)
    assert a_kernel(z2, z1, z4, z3) == value
    assert a_kernel(z3, z4, z1, z2) == value


def test_kernels_reject_non_finite():
    with pytest.raises(InvalidArgumentError):
        a_kernel(1, 2, math.nan, 4)
    with pytest.raises(InvalidArgumentError):
        sign_s(math.inf, 2, 3, 4)
    with pytest.raises(InvalidArgumentError):
        h_kernel(1, 2, 3, -math.inf)
    with pytest.raises(InvalidArgumentError):
        a_kernel_metric([0, 0], [1, 0], [math.nan, 0], [2, 0])


@given(quad)
def test_metric_kernel_reduces_to_real_line(z):
    assert a_kernel_metric(*z) == a_kernel(*z)


def test_metric_kernel_is_rotation_invariant(rng):
    theta = 0.7
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    for _ in range(200):
        pts = rng.integers(-3, 4, size=(4, 2)).astype(float)
        assert a_kernel_metric(*(pts @ rot.T)) == a_kernel_metric(*pts)


def test_metric_kernel_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        a_kernel_metric([0, 0], [1, 0], [1], [2, 0])


def test_h_and_phi_examples():
    assert h_kernel(0, 1, 2, 3) == 1 + 1 - 2 - 2
    assert phi_kernel(2, 1, 3) == 1
    assert phi_kernel(2, 3, 1) == -1
    assert phi_kernel(2, 2, 2) == 0


def test_classify_examples():
    assert classify_quadruple([(0, 0), (1, 1), (2, 2), (3, 3)]) is QuadrupleClass.CONCORDANT
    assert classify_quadruple([(0, 1), (1, 3), (2, 0), (3, 2)]) is QuadrupleClass.DISCORDANT
    assert classify_quadruple([(0, 0), (0, 0), (0, 0), (0, 0)]) is QuadrupleClass.TIED


def test_classify_needs_four_points():
    with pytest.raises(InvalidArgumentError):
        classify_quadruple([(0, 0), (1, 1), (2, 2)])


@settings(max_examples=400)
@given(st.lists(st.tuples(small_ints, small_ints), min_size=4, max_size=4))
def test_classify_matches_quadrant_search(points):
    expected = {"C": QuadrupleClass.CONCORDANT, "D": QuadrupleClass.DISCORDANT, "T": QuadrupleClass.TIED}
    assert classify_quadruple(points) is expected[quadrant_class(points)]


def test_classification_exhaustive_on_small_grid():
    # every quadruple on a 3x3 grid; no point set may be both C and D
    grid = list(itertools.product(range(3), repeat=2))
    for pts in itertools.combinations_with_replacement(grid, 4):
        assert classify_quadruple(pts).name[0] == quadrant_class(pts)


@settings(max_examples=300)
@given(st.lists(st.tuples(small_ints, small_ints), min_size=4, max_size=4))
def test_symmetrized_kernel_product_counts_classes(points):
    # averaging a(x)a(y) over the 24 orderings gives (2 I_C - I_D) / 3
    total = 0
    for perm in itertools.permutations(points):
        xs = [p[0] for p in perm]
        ys = [p[1] for p in perm]
        total += a_kernel(*xs) * a_kernel(*ys)
    cls = classify_quadruple(points)
    expected = {QuadrupleClass.CONCORDANT: 16, QuadrupleClass.DISCORDANT: -8, QuadrupleClass.TIED: 0}
    assert total == expected[cls]


def test_a_tensor_matches_scalar(rng):
    v = np.sort(rng.choice(np.arange(-5, 6), size=5, replace=False)).astype(float)
    t = a_tensor(v)
    assert t.dtype == np.int64
    for idx in itertools.product(range(5), repeat=4):
        assert t[idx] == a_kernel(*v[list(idx)])


def test_a_tensor_metric_matches_scalar(rng):
    pts = rng.normal(size=(4, 3))
    t = a_tensor_metric(pts)
    for idx in itertools.product(range(4), repeat=4):
        assert t[idx] == a_kernel_metric(*pts[list(idx)])


def test_h_tensor_matches_scalar():
    v = np.array([0, 2, 3, 7])
    t = h_tensor(v)
    for idx in itertools.product(range(4), repeat=4):
        assert t[idx] == h_kernel(*v[list(idx)])
