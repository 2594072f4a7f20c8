"""Command-line interface.

Exit statuses: 0 success, 2 usage error, 3 data error, 4 resource guard.
"""

from __future__ import annotations

import argparse
import sys

from . import dataio, population as pop
from .data import ContingencyTable
from .errors import ResourceError, TauStarError
from .estimators import (
    EstimatorConfig,
    Method,
    dewet_d,
    hoeffding_h,
    kendall_t,
    pearson_chi_square,
    t_star,
    t_star_b,
)
from .permutation import Sidedness, exact_permutation_test, permutation_test
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RESOURCE = 4

STAT_NAMES = ("taustar", "taustar_b", "kendall", "chisq", "hoeffding", "dewet")
TEST_NAMES = ("taustar", "kendall", "chisq", "hoeffding", "dewet")
METHODS = {"naive": Method.EXHAUSTIVE, "table": Method.TABLE, "subsample": Method.SUBSAMPLE}


class UsageError(Exception):
    pass


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit(record, machine, out):
    if machine:
        for key, value in record.items():
            out.write(f"{key}={_fmt(value)}\n")
    else:
        width = max(len(k) for k in record)
        for key, value in record.items():
            out.write(f"{key.replace('_', ' '):<{width}}  {_fmt(value)}\n")


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_data(args):
    """Return ``(sample, table)``; ``table`` is None for pair input."""
    if args.fixture:
        payload = dataio.load_fixture(args.fixture)
        if not isinstance(payload, ContingencyTable):
            raise UsageError(f"fixture {args.fixture!r} is a joint distribution, not data")
        return dataio.expand_table(payload), payload
    if args.format == "table":
        table = dataio.parse_table(_read(args.input))
        return dataio.expand_table(table), table
    return dataio.parse_pairs(_read(args.input)), None


def _config(args):
    method = METHODS[args.method]
    if method is Method.SUBSAMPLE and args.subsample_m is None:
        raise UsageError("--method subsample needs --subsample-m")
    return EstimatorConfig(
        method=method, normalization=args.normalization, m=args.subsample_m, seed=args.seed
    )


def cmd_stat(args, out):
    sample, table = load_data(args)
    name = args.statistic
    if name == "taustar":
        value = t_star(sample, _config(args))
    elif name == "dewet":
        value = dewet_d(sample, _config(args))
    elif name == "taustar_b":
        value = t_star_b(sample)
    elif name == "kendall":
        value = kendall_t(sample)
    elif name == "hoeffding":
        value = hoeffding_h(sample)
    else:
        value = pearson_chi_square(table if table is not None else dataio.tabulate_sample(sample))
    emit({"statistic": name, "n": sample.n, "method": args.method, "value": value}, args.machine, out)


def _engine_statistic(name, method):
    if method == "subsample":
        raise UsageError("permutation tests evaluate statistics exactly; use naive or table")
    if method == "table" and name in ("taustar", "dewet"):
        return f"{name}_table"
    return name


def cmd_test(args, out):
    sample, _ = load_data(args)
    statistic = _engine_statistic(args.statistic, args.method)
    sidedness = Sidedness(args.sidedness) if args.sidedness else None
    if args.exact:
        result = exact_permutation_test(sample, statistic, sidedness)
    else:
        result = permutation_test(sample, statistic, args.resamples, args.seed, sidedness, args.jobs)
    record = {
        "statistic": result.statistic_id,
        "n": sample.n,
        "observed": result.observed,
        "p_value": result.p_value,
        "resamples": result.resamples,
        "exceed_count": result.exceed_count,
        "seed": "none" if result.seed is None else result.seed,
        "mode": result.mode.value,
        "sidedness": result.sidedness.value,
    }
    emit(record, args.machine, out)


def cmd_population(args, out):
    if args.fixture:
        joint = dataio.load_fixture(args.fixture)
        if isinstance(joint, ContingencyTable):
            joint = pop.joint_from_table(joint)
    else:
        joint = pop.parse_joint(_read(args.input))
    record = {"rows": joint.shape[0], "cols": joint.shape[1], "tau_star": pop.pop_tau_star(joint)}
    if joint.is_real:
        qp = pop.pop_quadruple_probs(joint)
        record.update(pi_c4=qp.pi_c4, pi_d4=qp.pi_d4, pi_tied=qp.pi_tied)
    else:
        record.update(pi_c4="n/a", pi_d4="n/a", pi_tied="n/a")
    emit(record, args.machine, out)


def cmd_verify(args, out):
    kwargs = {}
    if args.suite == "appendix-b":
        kwargs = {"trials": args.trials, "seed": args.seed}
    elif args.suite in ("mixture", "identities"):
        kwargs = {"seed": args.seed}
    report = run_suite(args.suite, **kwargs)
    record = {"suite": report.name, "result": "pass" if report.passed else "fail"}
    record.update(report.evidence)
    emit(record, args.machine, out)
    return EXIT_OK if report.passed else 1


def _add_input(p, fixtures):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="data file")
    src.add_argument("--fixture", choices=fixtures, help="bundled dataset")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", choices=("human", "machine"), default="human")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="taustar", description="Sign-covariance tests of independence."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stat", help="compute a sample statistic")
    _add_input(p, ("table1", "table2"))
    p.add_argument("--format", choices=("pairs", "table"), default="pairs")
    p.add_argument("--statistic", choices=STAT_NAMES, default="taustar")
    p.add_argument("--method", choices=tuple(METHODS), default="naive")
    p.add_argument("--subsample-m", type=int)
    p.add_argument("--normalization", choices=("V", "U"), default="V")
    _add_common(p)

    p = sub.add_parser("test", help="permutation test of independence")
    _add_input(p, ("table1", "table2"))
    p.add_argument("--format", choices=("pairs", "table"), default="pairs")
    p.add_argument("--statistic", choices=TEST_NAMES, default="taustar")
    p.add_argument("--method", choices=tuple(METHODS), default="naive")
    p.add_argument("--resamples", type=int, default=10_000)
    p.add_argument("--sidedness", choices=[s.value for s in Sidedness])
    p.add_argument("--exact", action="store_true", help="enumerate all n! permutations")
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("population", help="population functionals of a joint file")
    _add_input(p, dataio.FIXTURES)
    _add_common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=tuple(SUITES))
    p.add_argument("--trials", type=int, default=10_000)
    _add_common(p)
    return parser


COMMANDS = {"stat": cmd_stat, "test": cmd_test, "population": cmd_population, "verify": cmd_verify}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.machine = args.output == "machine"
    if getattr(args, "resamples", 1) < 1 or getattr(args, "trials", 1) < 1:
        err.write("taustar: error: counts must be positive\n")
        return EXIT_USAGE
    if args.seed < 0:
        err.write("taustar: error: --seed must be nonnegative\n")
        return EXIT_USAGE
    # buffer so that a failure never leaves partial output behind
    buf = _Buffer()
    try:
        status = COMMANDS[args.command](args, buf)
    except UsageError as exc:
        err.write(f"taustar: error: {exc}\n")
        return EXIT_USAGE
    except ResourceError as exc:
        err.write(f"taustar: resource limit: {exc}\n")
        return EXIT_RESOURCE
    except (TauStarError, OSError) as exc:
        err.write(f"taustar: data error: {exc}\n")
        return EXIT_DATA
    out.write(buf.getvalue())
    return status or EXIT_OK


class _Buffer:
    def __init__(self):
        self._parts = []

    def write(self, s):
        self._parts.append(s)

    def getvalue(self):
        return "".join(self._parts)


if __name__ == "__main__":
    sys.exit(main())
