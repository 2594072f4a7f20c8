import itertools
import math

import numpy as np
import pytest

from conftest import tied_sample
from taustar import PairedSample
from taustar.dataio import expand_table, load_fixture, tabulate_sample
from taustar.errors import DegenerateInputError, InvalidArgumentError, ResourceError
from taustar.estimators import (
    EstimatorConfig,
    dewet_d,
    hoeffding_h,
    hoeffding_h_oracle,
    kendall_t,
    pearson_chi_square,
    t_star,
    t_star_naive,
)
from taustar.permutation import (
    BLOCK,
    STATISTICS,
    Mode,
    Sidedness,
    default_sidedness,
    exact_permutation_test,
    mc_stderr,
    permutation_stream,
    permutation_test,
    prepare_statistic,
)

REFERENCE = {
    "taustar": t_star,
    "taustar_table": lambda s: t_star(s, EstimatorConfig(method="table")),
    "taustar_naive": t_star_naive,
    "kendall": kendall_t,
    "chisq": lambda s: pearson_chi_square(tabulate_sample(s)),
    "hoeffding": hoeffding_h,
    "dewet": dewet_d,
    "dewet_table": lambda s: dewet_d(s, EstimatorConfig(method="table")),
}


def permuted(sample, perm):
    return PairedSample(sample.xs, sample.ys[perm])


@pytest.mark.parametrize("name", sorted(STATISTICS))
def test_prepared_statistics_match_estimators(rng, name):
    s = tied_sample(rng, 14)
    prepared = prepare_statistic(s, name)
    for _ in range(5):
        perm = rng.permutation(s.n)
        value = prepared.evaluate(perm) * prepared.scale
        assert value == pytest.approx(REFERENCE[name](permuted(s, perm)), rel=1e-12, abs=1e-15)


def test_registry_is_complete():
    assert set(STATISTICS) == set(REFERENCE)


def test_default_sidedness():
    assert default_sidedness("kendall") is Sidedness.TWO_SIDED_ABS
    assert default_sidedness("taustar") is Sidedness.ONE_SIDED_LARGE


def test_deterministic_given_seed(rng):
    s = tied_sample(rng, 20)
    a = permutation_test(s, B=300, seed=7)
    b = permutation_test(s, B=300, seed=7)
    assert a == b
    assert a.mode is Mode.MONTE_CARLO
    assert a.p_value == (1 + a.exceed_count) / 301


def test_workers_do_not_change_result(rng):
    s = tied_sample(rng, 12)
    B = 2 * BLOCK + 17
    serial = permutation_test(s, "kendall", B=B, seed=3)
    parallel = permutation_test(s, "kendall", B=B, seed=3, n_jobs=4)
    assert serial == parallel


def test_blocks_are_prefix_stable(rng):
    # resample b depends only on (seed, b), so a longer run extends a shorter one
    s = tied_sample(rng, 10)
    prepared = prepare_statistic(s, "taustar")
    stream = permutation_stream(5, 0)
    first = [prepared.evaluate(stream.permutation(s.n)) for _ in range(10)]
    stream = permutation_stream(5, 0)
    again = [prepared.evaluate(stream.permutation(s.n)) for _ in range(10)]
    assert first == again
    assert not np.array_equal(
        permutation_stream(5, 0).permutation(50), permutation_stream(5, 1).permutation(50)
    )


def test_exact_test_matches_enumeration(rng):
    s = tied_sample(rng, 6, levels=3)
    observed = t_star(s)
    hits = sum(
        t_star(permuted(s, np.array(p))) >= observed for p in itertools.permutations(range(6))
    )
    result = exact_permutation_test(s)
    assert result.mode is Mode.EXACT
    assert result.resamples == 720
    assert result.exceed_count == hits
    assert result.p_value == hits / 720


def test_monte_carlo_tracks_exact(rng):
    s = PairedSample([1, 2, 3, 4, 5, 6, 7], [2, 1, 4, 3, 6, 7, 5])
    exact = exact_permutation_test(s).p_value
    mc = permutation_test(s, B=20_000, seed=2).p_value
    assert abs(mc - exact) <= 4 * mc_stderr(exact, 20_000) + 1e-4


def test_two_sided_kendall_exact():
    s = PairedSample([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
    # only the identity and the reversal reach |t| = 4/5
    result = exact_permutation_test(s, "kendall")
    assert result.exceed_count == 2
    one_sided = exact_permutation_test(s, "kendall", Sidedness.ONE_SIDED_LARGE)
    assert one_sided.exceed_count == 1


@pytest.mark.parametrize("name", sorted(set(STATISTICS) - {"chisq"}))
def test_constant_margin_gives_p_one(name):
    s = PairedSample([1, 1, 1, 1, 1], [1, 2, 3, 4, 5])
    assert exact_permutation_test(s, name).p_value == 1.0
    assert permutation_test(s, name, B=50).p_value == 1.0


def test_chisq_rejects_constant_margin():
    s = PairedSample([1, 1, 1, 1], [1, 2, 3, 4])
    with pytest.raises(DegenerateInputError):
        permutation_test(s, "chisq", B=10)


def test_hoeffding_oracle_over_permutations(rng):
    s = tied_sample(rng, 7)
    values = []
    for p in itertools.permutations(range(7)):
        perm_sample = permuted(s, np.array(p))
        h = hoeffding_h(perm_sample)
        assert hoeffding_h_oracle(perm_sample) == h
        values.append(h)
    strong = PairedSample(np.arange(7), np.arange(7))
    perm_mean = np.mean([hoeffding_h(permuted(strong, np.array(p))) for p in itertools.permutations(range(7))])
    assert min(values) >= 0.0
    assert perm_mean < hoeffding_h(strong)


def test_guards(rng):
    s = tied_sample(rng, 33)
    with pytest.raises(ResourceError):
        permutation_test(s, "taustar_naive", B=1)
    with pytest.raises(ResourceError):
        exact_permutation_test(tied_sample(rng, 9))
    with pytest.raises(InvalidArgumentError):
        permutation_test(s, "pearson", B=1)
    with pytest.raises(InvalidArgumentError):
        permutation_test(s, B=0)
    with pytest.raises(InvalidArgumentError):
        permutation_test(s, B=1, seed=-1)


def test_table_and_counting_routes_give_same_p():
    s = expand_table(load_fixture("table2"))
    a = permutation_test(s, "taustar", B=200, seed=1)
    b = permutation_test(s, "taustar_table", B=200, seed=1)
    assert a.observed == b.observed
    assert a.exceed_count == b.exceed_count


def test_mc_stderr():
    assert mc_stderr(0.5, 100) == 0.05
    assert mc_stderr(0.0, 10) == 0.0
    with pytest.raises(InvalidArgumentError):
        mc_stderr(1.5, 10)
    assert math.isclose(mc_stderr(0.035, 10_000), 0.0018378, rel_tol=1e-4)
