"""Numerical verification suites for the population results.

Each suite returns a :class:`VerifyReport` whose ``evidence`` mapping is
printed by the ``verify`` CLI subcommand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import population as pop
from .data import PairedSample
from .dataio import tabulate_sample
from .estimators import t_star, t_star_from_table, t_star_naive

__all__ = [
    "VerifyReport",
    "SUITES",
    "random_joint",
    "random_product_joint",
    "perturbed_joint",
    "verify_counterexample",
    "verify_appendix_b",
    "verify_mixture",
    "verify_identities",
    "run_suite",
]

SWEEP_MARGINALS = (
    ("uniform", (1 / 3, 1 / 3, 1 / 3), (1 / 3, 1 / 3, 1 / 3)),
    ("skewed", (0.5, 0.3, 0.2), (0.6, 0.3, 0.1)),
    ("lopsided", (0.7, 0.2, 0.1), (0.15, 0.15, 0.7)),
)


@dataclass
class VerifyReport:
    name: str
    passed: bool
    evidence: dict = field(default_factory=dict)


def _scores(k, rng):
    return np.cumsum(rng.uniform(0.1, 2.0, size=k))


def random_joint(rng, max_dim=5):
    """A random real-valued joint up to ``max_dim x max_dim``, often with zero cells."""
    r, c = rng.integers(1, max_dim + 1, size=2)
    w = rng.exponential(size=(r, c)) ** rng.choice([1.0, 2.0, 4.0])
    w[rng.uniform(size=(r, c)) < rng.uniform(0, 0.5)] = 0.0
    if w.sum() == 0:
        w[0, 0] = 1.0
    return pop.JointDistribution(w / w.sum(), _scores(r, rng), _scores(c, rng))


def random_product_joint(rng, max_dim=5, min_dim=1):
    r, c = rng.integers(min_dim, max_dim + 1, size=2)
    return pop.product_joint(
        rng.dirichlet(np.ones(r)), rng.dirichlet(np.ones(c)), _scores(r, rng), _scores(c, rng)
    )


def perturbed_joint(rng, max_dim=5):
    """A product law with multiplicative noise, renormalized; never independent."""
    while True:
        base = random_product_joint(rng, max_dim, min_dim=2)
        probs = base.probs * rng.uniform(0.5, 1.5, size=base.shape)
        probs /= probs.sum()
        gap = np.abs(probs - np.outer(probs.sum(1), probs.sum(0))).max()
        if gap > 1e-6:
            return pop.JointDistribution(probs, base.row_values, base.col_values)


def verify_counterexample():
    joint = pop.counterexample_r8()
    u = joint.row_values
    within = float(np.linalg.norm(u[0] - u[1]))
    across = float(np.linalg.norm(u[0] - u[4]))
    value = pop.pop_tau_star(joint)
    passed = value < 0 and abs(value + 1 / 32) <= 1e-12
    return VerifyReport(
        "counterexample",
        passed,
        {
            "tau_star": value,
            "expected": -1 / 32,
            "printed_value": -1 / 64,
            "within_group_distance": within,
            "cross_group_distance": across,
            "note": "enumerated value is -1/32; the printed value -1/64 is half of it",
        },
    )


def verify_appendix_b(trials=10_000, seed=0):
    evidence = {}
    passed = True
    for k, (name, rows, cols) in enumerate(SWEEP_MARGINALS):
        report = pop.sweep_3x3(rows, cols, trials, seed + k)
        evidence[f"{name}_min_tau_star"] = report.min_tau_star
        evidence[f"{name}_independence_hits"] = report.independence_hits
        passed &= report.min_tau_star >= -1e-12
    evidence["trials"] = trials
    return VerifyReport("appendix-b", bool(passed), evidence)


def _fresh_value(values, rng):
    # a new category value strictly between or beyond the existing ones
    gaps = np.concatenate([[values[0] - 1.0], (values[:-1] + values[1:]) / 2, [values[-1] + 1.0]])
    return float(rng.choice(gaps))


def verify_mixture(laws=50, weights=(0.1, 0.5, 0.9), seed=0):
    rng = np.random.default_rng(seed)
    worst = math.inf
    positive = 0
    total = 0
    for _ in range(laws):
        base = random_product_joint(rng, max_dim=4, min_dim=2)
        x0 = _fresh_value(base.row_values, rng)
        y0 = _fresh_value(base.col_values, rng)
        for p in weights:
            value = pop.pop_tau_star(pop.mix_with_point_mass(base, x0, y0, p))
            worst = min(worst, value)
            positive += value > 0
            total += 1
    return VerifyReport(
        "mixture",
        positive == total,
        {"cases": total, "positive": positive, "min_tau_star": worst},
    )


def verify_identities(trials=100, seed=0):
    rng = np.random.default_rng(seed)
    worst_probs = worst_binary = worst_table = worst_empirical = 0.0
    for _ in range(trials):
        joint = random_joint(rng)
        ref = pop.pop_tau_star(joint)
        worst_probs = max(worst_probs, abs(ref - pop.pop_tau_star_from_probs(joint)))
        probs = rng.dirichlet(np.ones(2 * 5)).reshape(2, 5)
        binary = pop.JointDistribution(probs, _scores(2, rng), _scores(5, rng))
        worst_binary = max(
            worst_binary, abs(pop.pop_tau_star(binary) - pop.pop_tau_star_binary(binary))
        )
        n = int(rng.integers(1, 31))
        sample = PairedSample(rng.integers(0, 5, n), rng.integers(0, 5, n))
        table = tabulate_sample(sample)
        naive = t_star_naive(sample)
        worst_table = max(worst_table, abs(naive - t_star_from_table(table)), abs(naive - t_star(sample)))
        worst_empirical = max(
            worst_empirical, abs(naive - pop.pop_tau_star(pop.joint_from_table(table)))
        )
    evidence = {
        "trials": trials,
        "max_gap_probability_form": worst_probs,
        "max_gap_binary_form": worst_binary,
        "max_gap_naive_vs_table": worst_table,
        "max_gap_sample_vs_population": worst_empirical,
    }
    passed = max(worst_probs, worst_binary, worst_table, worst_empirical) <= 1e-12
    return VerifyReport("identities", passed, evidence)


SUITES = {
    "appendix-b": verify_appendix_b,
    "mixture": verify_mixture,
    "counterexample": verify_counterexample,
    "identities": verify_identities,
}


def run_suite(name, **kwargs):
    return SUITES[name](**kwargs)
