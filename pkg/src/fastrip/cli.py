"""Command-line experiment driver.

    fastrip {build,rip,chaos,recover,bench} [--config PATH] [--seed INT]
            [--out PATH] [--trials INT] [--quiet]

CSV goes to ``--out`` (or the config's ``output``, or stdout); the human
summary goes to stderr. Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

import argparse
import csv
import io
import logging
import math
import sys
import time
import warnings

import numpy as np

from . import rng
from .bench import BENCH_CSV_COLUMNS, count_operations, scaling_sweep
from .chaos import CHAOS_CSV_COLUMNS, chaos_statistics
from .config import ExperimentConfig, config_pairs, load_config
from .errors import ConfigError, NumericalError
from .operators import materialize_chain
from .recovery import RECOVERY_CSV_COLUMNS, recovery_experiment, success_rate
from .rip import MAX_SUPPORTS, RIP_CSV_COLUMNS, exact_rip_constant, monte_carlo_rip
from .transforms import MATERIALIZE_CAP

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

BUILD_CSV_COLUMNS = ("construction", "n", "k", "s", "r", "kappa", "transforms",
                     "blocks", "ops")

log = logging.getLogger("fastrip")


def _cell(value):
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render_csv(command, config, columns, rows):
    """CSV text whose first line records the command and normalized config."""
    buf = io.StringIO()
    # the destination path is not part of the experiment
    header = "; ".join(f"{k}={v}" for k, v in config_pairs(config) if k != "output")
    buf.write(f"# fastrip {command} | {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def check_regime(config):
    """Log a warning for every violated precondition of the construction."""
    n, k, s = config.n, config.k, max(config.s, 1)
    if config.construction == "theorem1":
        if k > math.sqrt(n / s):
            log.warning("regime: k = %d > sqrt(n/s) = %.4g", k, math.sqrt(n / s))
        if k < s * math.log(n):
            log.warning("regime: k = %d < s ln n = %.4g", k, s * math.log(n))
    if s < config.s_min:
        log.warning("regime: s = %d < s_min = %d", s, config.s_min)


def _build_chain(config):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        chain = config.chain_spec().build(strict=False)
    for w in caught:
        log.warning("%s", w.message)
    return chain


def cmd_build(config):
    chain = _build_chain(config)
    plan = chain.plan
    row = {
        "construction": config.construction, "n": chain.n, "k": chain.k,
        "s": config.s, "r": plan.r if plan else None,
        "kappa": plan.kappa if plan else None,
        "transforms": chain.transform_count, "blocks": chain.block_count,
        "ops": count_operations(chain),
    }
    summary = [config.chain_spec().to_text().rstrip()]
    if plan:
        summary.append(f"kappa = {plan.kappa:.6g}, r = {plan.r}, blocks = {plan.blocks}")
    summary.append(f"transforms = {row['transforms']}, ops per apply = {row['ops']}")
    return BUILD_CSV_COLUMNS, [row], summary


def _timed(fn, enabled):
    t0 = time.perf_counter()
    out = fn()
    return out, ((time.perf_counter() - t0) * 1e3 if enabled else None)


def cmd_rip(config):
    chain = _build_chain(config)
    base = {"construction": config.construction, "n": chain.n, "k": chain.k,
            "s": config.s, "seed": config.master_seed}
    rows, summary = [], []
    if chain.n <= MATERIALIZE_CAP and math.comb(chain.n, config.s) <= MAX_SUPPORTS:
        est, ms = _timed(lambda: exact_rip_constant(materialize_chain(chain), config.s),
                         config.timing)
        rows.append(dict(base, method="exact", delta=est.delta, trials=None, wall_time_ms=ms))
        summary.append(f"exact delta_{config.s} = {est.delta:.6g} "
                       f"(witness support {est.witness_support.indices.tolist()})")
    est, ms = _timed(lambda: monte_carlo_rip(chain, config.s, config.trials,
                                             config.master_seed), config.timing)
    rows.append(dict(base, method="monte-carlo", delta=est.delta, trials=config.trials,
                     wall_time_ms=ms))
    summary.append(f"monte-carlo lower bound = {est.delta:.6g} over {config.trials} trials")
    return RIP_CSV_COLUMNS, rows, summary


def cmd_chaos(config):
    chain = _build_chain(config)
    if config.probe == "e0":
        x = np.zeros(chain.n, dtype=chain.dtype)
        x[0] = 1
    else:
        x = rng.normals(rng.derive_seed(config.master_seed, 0, "probe"), chain.n)
        x = (x / np.linalg.norm(x)).astype(chain.dtype)
    stats = chaos_statistics(chain, x, config.trials, config.master_seed)
    row = {
        "construction": config.construction, "n": chain.n, "k": chain.k,
        "trials": config.trials, "seed": config.master_seed,
        "mean_alpha_sq": stats.mean_alpha_sq, "median_alpha": stats.median_alpha,
        "variance": stats.variance, "q90": stats.quantiles[0.9],
        "q99": stats.quantiles[0.99], "q999": stats.quantiles[0.999],
    }
    summary = [
        f"mean alpha^2 = {stats.mean_alpha_sq:.6f}",
        f"median alpha = {stats.median_alpha:.6f}",
        f"variance     = {stats.variance:.6f}",
        "quantiles    = " + ", ".join(f"{q}: {v:.6f}" for q, v in stats.quantiles.items()),
    ]
    return CHAOS_CSV_COLUMNS, [row], summary


def cmd_recover(config):
    check = _build_chain(config)  # surfaces regime warnings once
    rows = recovery_experiment(
        config.chain_spec(), config.s, config.instances, config.master_seed,
        max_iters=config.max_iters, step=config.step, success_tol=config.success_tol,
    )
    summary = [
        f"{alg}: success {success_rate(rows, alg):.2%} over {config.instances} instances "
        f"(n={check.n}, k={check.k}, s={config.s})"
        for alg in ("iht", "omp")
    ]
    return RECOVERY_CSV_COLUMNS, rows, summary


def cmd_bench(config):
    report = scaling_sweep(config.chain_spec(), config.n_list, config.repeats,
                           timing=config.timing)
    rows = [
        {"construction": r.construction, "n": r.n, "k": r.k, "r": r.r, "ops": r.ops,
         "median_ms": r.median_ms, "ratio": r.ratio}
        for r in report.rows
    ]
    summary = [f"ops log-log slope = {report.ops_slope():.4f}"]
    return BENCH_CSV_COLUMNS, rows, summary


COMMANDS = {
    "build": cmd_build,
    "rip": cmd_rip,
    "chaos": cmd_chaos,
    "recover": cmd_recover,
    "bench": cmd_bench,
}


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--seed", type=int, help="overrides master_seed")
    common.add_argument("--out", metavar="PATH", help="CSV destination (default stdout)")
    common.add_argument("--trials", type=int, help="overrides trials")
    common.add_argument("--quiet", action="store_true", help="suppress summary and warnings")
    parser = argparse.ArgumentParser(prog="fastrip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True,
    )
    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        config = config.with_overrides(master_seed=args.seed, trials=args.trials,
                                       output=args.out)
        check_regime(config)
        columns, rows, summary = COMMANDS[args.command](config)
    except ConfigError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except NumericalError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL

    text = render_csv(args.command, config, columns, rows)
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not args.quiet:
        for line in summary:
            print(line, file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
