import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import dewet_oracle, hoeffding_oracle, t_star_oracle, tied_sample
from taustar import ContingencyTable, PairedSample
from taustar.dataio import load_fixture, tabulate_sample
from taustar.errors import DegenerateInputError, InvalidArgumentError, ResourceError
from taustar.estimators import (
    EstimatorConfig,
    Method,
    Normalization,
    cvm_statistic,
    dewet_d,
    dewet_d_naive,
    hoeffding_h,
    hoeffding_h_oracle,
    kendall_t,
    mid_grades,
    pearson_chi_square,
    t_star,
    t_star_b,
    t_star_from_table,
    t_star_naive,
    t_star_subsample,
)
from taustar.kernels import KernelId
from taustar.estimators import table_quadruple_contraction

U = EstimatorConfig(normalization="U")
TABLE = EstimatorConfig(method="table")


def diag(n):
    return PairedSample(np.arange(n), np.arange(n))


# ---------------------------------------------------------------- closed forms


def test_identity_four_points_v_form():
    assert t_star(diag(4)) == 13 / 32
    assert t_star_oracle([1, 2, 3, 4], [1, 2, 3, 4]) == Fraction(13, 32)


@pytest.mark.parametrize("n", [4, 10, 50])
def test_comonotone_u_form_is_two_thirds(n):
    assert t_star(diag(n), U) == pytest.approx(2 / 3, abs=1e-12)


def test_u_form_rejects_small_n():
    with pytest.raises(InvalidArgumentError):
        t_star(diag(3), U)


def test_single_point_is_zero():
    assert t_star(PairedSample([1.0], [2.0])) == 0.0


@pytest.mark.parametrize("n", [2, 5, 17])
def test_kendall_monotone(n):
    assert kendall_t(diag(n)) == pytest.approx((n - 1) / n, abs=1e-15)


def test_kendall_four_points():
    assert kendall_t(diag(4)) == 0.75


# ---------------------------------------------------------------- oracle agreement


@pytest.mark.parametrize("n", [1, 2, 5, 9, 12])
def test_t_star_matches_brute_force(rng, n):
    for _ in range(4):
        s = tied_sample(rng, n)
        exact = t_star_oracle(s.xs.tolist(), s.ys.tolist())
        assert t_star(s) == float(exact)
        assert t_star_naive(s) == float(exact)
        assert t_star(s, TABLE) == float(exact)


@pytest.mark.parametrize("n", [4, 6, 9])
def test_u_form_matches_brute_force(rng, n):
    for _ in range(3):
        s = tied_sample(rng, n, levels=3)
        exact = t_star_oracle(s.xs.tolist(), s.ys.tolist(), distinct=True)
        assert t_star(s, U) == pytest.approx(float(exact), abs=1e-15)
        assert t_star_naive(s, Normalization.U) == pytest.approx(float(exact), abs=1e-15)


def test_continuous_sample_routes_agree(rng):
    s = PairedSample(rng.normal(size=40), rng.normal(size=40))
    assert t_star(s) == t_star_naive(s) == t_star(s, TABLE)


def test_invariant_under_monotone_transform(rng):
    s = PairedSample(rng.normal(size=25), rng.normal(size=25))
    t = PairedSample(np.exp(s.xs), -(s.ys**3))
    assert t_star(t) == t_star(s)


def test_naive_guard():
    s = diag(65)
    with pytest.raises(ResourceError):
        t_star_naive(s)


def test_table1_value():
    assert t_star_from_table(load_fixture("table1")) == pytest.approx(0.09206211419753, abs=1e-13)


def test_table_contraction_uses_scores():
    t = ContingencyTable([[3, 1], [0, 2]], row_scores=[0.5, 9.0], col_scores=[-1.0, 4.0])
    s = PairedSample([0.5] * 4 + [9.0] * 2, [-1.0] * 3 + [4.0] + [4.0] * 2)
    assert t_star_from_table(t) == t_star(s)


def test_table_contraction_rejects_unknown_kernel():
    with pytest.raises(ValueError):
        table_quadruple_contraction(load_fixture("table2"), "bogus")


def test_t_star_b_bounds(rng):
    for _ in range(20):
        s = tied_sample(rng, 15)
        try:
            value = t_star_b(s)
        except DegenerateInputError:
            continue
        assert -1.0 <= value <= 1.0
    assert t_star_b(diag(6)) == pytest.approx(1.0)


def test_t_star_b_constant_margin():
    with pytest.raises(DegenerateInputError):
        t_star_b(PairedSample([1, 1, 1, 1], [1, 2, 3, 4]))


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        EstimatorConfig(method="subsample")
    with pytest.raises(InvalidArgumentError):
        EstimatorConfig(method="table", normalization="U")
    with pytest.raises(ValueError):
        EstimatorConfig(method="fast")


# ---------------------------------------------------------------- subsampling


def test_subsample_is_deterministic(rng):
    s = tied_sample(rng, 30)
    assert t_star_subsample(s, 5000, seed=3) == t_star_subsample(s, 5000, seed=3)
    assert t_star_subsample(s, 5000, seed=3) != t_star_subsample(s, 5000, seed=4)


@pytest.mark.parametrize("norm", ["V", "U"])
def test_subsample_is_close_to_exact(rng, norm):
    s = tied_sample(rng, 30)
    exact = t_star(s, EstimatorConfig(normalization=norm))
    est, se = t_star_subsample(s, 200_000, seed=11, normalization=norm)
    assert abs(est - exact) <= 4 * se


def test_subsample_via_config(rng):
    s = tied_sample(rng, 20)
    cfg = EstimatorConfig(method="subsample", m=1000, seed=5)
    assert t_star(s, cfg) == t_star_subsample(s, 1000, seed=5)[0]


# ---------------------------------------------------------------- comparison statistics


def test_mid_grades():
    assert mid_grades([5, 1, 5, 3]).tolist() == [6, 1, 6, 3]


def test_hoeffding_matches_definition(rng):
    for n in (1, 4, 11):
        s = tied_sample(rng, n)
        assert hoeffding_h(s) == pytest.approx(float(hoeffding_oracle(s.xs, s.ys)), abs=1e-15)


def test_hoeffding_five_point_form_agrees(rng):
    for n in (5, 8, 13):
        s = tied_sample(rng, n)
        assert hoeffding_h_oracle(s) == hoeffding_h(s)


def test_hoeffding_oracle_guards():
    with pytest.raises(InvalidArgumentError):
        hoeffding_h_oracle(diag(4))
    with pytest.raises(ResourceError):
        hoeffding_h_oracle(diag(25))


@pytest.mark.parametrize("n", [1, 3, 7, 10])
def test_dewet_matches_definition(rng, n):
    s = tied_sample(rng, n)
    exact = float(dewet_oracle(s.xs.tolist(), s.ys.tolist()))
    assert dewet_d(s) == pytest.approx(exact, abs=1e-15)
    assert dewet_d_naive(s) == dewet_d(s)
    assert dewet_d(s, TABLE) == dewet_d(s)


def test_dewet_u_form(rng):
    s = tied_sample(rng, 7)
    v = dewet_d(s)
    u = dewet_d(s, U)
    assert u == dewet_d_naive(s, Normalization.U)
    assert u != v


def test_dewet_table_kernel_route():
    table = load_fixture("table1")
    from taustar.dataio import expand_table

    assert table_quadruple_contraction(table, KernelId.GRADE_H) == dewet_d(expand_table(table))


def test_chi_square_known_value():
    # 2x2 with counts [[10, 20], [30, 40]]
    expected = 100 * (400 - 600) ** 2 / (30 * 70 * 40 * 60)
    table = ContingencyTable([[10, 20], [30, 40]])
    assert pearson_chi_square(table) == pytest.approx(expected, rel=1e-12)


def test_chi_square_matches_expected_counts(rng):
    counts = rng.integers(1, 9, size=(4, 5))
    e = np.outer(counts.sum(1), counts.sum(0)) / counts.sum()
    direct = float(((counts - e) ** 2 / e).sum())
    assert pearson_chi_square(ContingencyTable(counts)) == pytest.approx(direct, rel=1e-12)


def test_chi_square_zero_margin():
    with pytest.raises(DegenerateInputError):
        pearson_chi_square(ContingencyTable([[1, 0], [2, 0]]))


def test_cvm_examples():
    # one atom each at 0 and 1: G - H is 1 at z=0 and 0 at z=1, pooled mass 1/2
    assert cvm_statistic([0.0], [1.0]) == 0.5
    assert cvm_statistic([1, 2, 3], [1, 2, 3]) == 0.0


def test_cvm_brute_force(rng):
    u = rng.integers(0, 5, 7)
    v = rng.integers(0, 5, 4)
    pooled = np.concatenate([u, v])
    total = 0.0
    for z in pooled:
        total += ((u <= z).mean() - (v <= z).mean()) ** 2
    assert cvm_statistic(u, v) == pytest.approx(total / pooled.size, abs=1e-15)


def test_cvm_rejects_empty():
    with pytest.raises(InvalidArgumentError):
        cvm_statistic([], [1.0])


def test_tabulated_sample_round_trip(rng):
    s = tied_sample(rng, 40)
    assert t_star_from_table(tabulate_sample(s)) == t_star(s)
    assert math.isfinite(t_star(s))
