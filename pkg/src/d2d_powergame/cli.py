"""Command-line entry point: ``run``, ``sweep``, ``compare`` and ``check``.

Exit status: 0 success, 1 a check failed, 2 configuration error, 3 I/O
error.
"""
import argparse
from dataclasses import asdict, replace
import io
import logging
import os
import sys

import numpy as np

from .analysis import check_standard_function, jacobian_at
from .baselines import get_rule
from .config import Config, parse_config, with_seed
from .exceptions import ConfigError
from .experiments import compare_rules, generate_scenario, run_sweep
from .game import run_to_convergence

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

RUN_COLUMNS = ("k", "device_id", "power_w", "sinr", "utility")
SWEEP_COLUMNS = (
    "axis",
    "axis_value",
    "repetition",
    "seed",
    "rule",
    "mean_power_w",
    "mean_sinr",
    "iterations",
    "converged",
    "admitted",
    "energy_efficiency_proxy",
)
COMPARE_COLUMNS = ("rule", "mean_power_w", "iterations")
CHECK_COLUMNS = (
    "rule",
    "samples",
    "positivity_ok",
    "monotonicity_ok",
    "scalability_ok",
    "counterexample_condition",
    "counterexample_device",
    "counterexample_scale",
    "low_clamp_activations",
    "high_clamp_activations",
    "jacobian_n",
    "determinant",
    "scaled_determinant",
    "nonsingular",
)
# Columns holding watts, written in scientific notation.
POWER_COLUMNS = frozenset({"power_w", "mean_power_w"})


def format_value(column, value):
    """Stable text for one CSV cell: shortest round-trip decimals."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if column in POWER_COLUMNS:
            return np.format_float_scientific(float(value), unique=True, trim="-")
        return repr(float(value))
    return str(value)


def render_csv(columns, rows):
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_value(c, row[c]) for c in columns) + "\n")
    return buf.getvalue()


def render_text(columns, rows):
    cells = [[format_value(c, row[c]) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def write_output(config, name, columns, rows):
    if config.output_format == "text":
        body, path = render_text(columns, rows), os.path.join(config.output_dir, f"{name}.txt")
    else:
        body, path = render_csv(columns, rows), os.path.join(config.output_dir, f"{name}.csv")
    os.makedirs(config.output_dir, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)
    return path


def run_rows(result):
    for rec in result.trace:
        for i in range(len(rec.powers)):
            yield {
                "k": rec.k,
                "device_id": i,
                "power_w": rec.powers[i],
                "sinr": rec.sinrs[i],
                "utility": rec.utilities[i],
            }


def cmd_run(config):
    scenario = generate_scenario(config.scenario)
    result = run_to_convergence(scenario, config.game, get_rule(config.rule))
    path = write_output(config, "run", RUN_COLUMNS, list(run_rows(result)))
    print(
        f"run: rule={config.rule} iterations={result.iterations_used} converged={result.converged} "
        f"mean_power_w={result.mean_power:.6e} mean_sinr={result.mean_sinr:.6f} -> {path}"
    )
    return EXIT_OK


def cmd_sweep(config):
    spec = replace(config.sweep, rule=config.rule, params=config.game)
    rows = run_sweep(spec, config.scenario, n_jobs=config.sweep_n_jobs)
    path = write_output(config, "sweep", SWEEP_COLUMNS, [asdict(r) for r in rows])
    print(f"sweep: axis={spec.axis.value} rows={len(rows)} -> {path}")
    return EXIT_OK


def cmd_compare(config):
    rows = compare_rules(config.compare_rules, config.scenario, config.game, config.compare_repetitions)
    path = write_output(config, "compare", COMPARE_COLUMNS, [asdict(r) for r in rows])
    for r in rows:
        print(f"compare: {r.rule} mean_power_w={r.mean_power_w:.6e} iterations={r.iterations:g}")
    print(f"compare -> {path}")
    return EXIT_OK


def cmd_check(config):
    scenario = generate_scenario(config.scenario)
    report = check_standard_function(
        scenario, config.game, config.rule, samples=config.check_samples, seed=config.scenario.seed
    )
    result = run_to_convergence(scenario, config.game, get_rule(config.rule))
    jac = jacobian_at(scenario, config.game, result.final_powers, config.check_h_step, rule=config.rule)
    cx = report.counterexample
    row = {
        "rule": config.rule,
        "samples": report.samples,
        "positivity_ok": report.positivity_ok,
        "monotonicity_ok": report.monotonicity_ok,
        "scalability_ok": report.scalability_ok,
        "counterexample_condition": cx.condition if cx else None,
        "counterexample_device": cx.device if cx else None,
        "counterexample_scale": cx.scale if cx else None,
        "low_clamp_activations": report.low_clamp_activations,
        "high_clamp_activations": report.high_clamp_activations,
        "jacobian_n": jac.n,
        "determinant": jac.determinant,
        "scaled_determinant": jac.scaled_determinant,
        "nonsingular": jac.nonsingular,
    }
    path = write_output(config, "check", CHECK_COLUMNS, [row])
    ok = report.ok and jac.nonsingular
    print(
        f"check: rule={config.rule} positivity={report.positivity_ok} monotonicity={report.monotonicity_ok} "
        f"scalability={report.scalability_ok} nonsingular={jac.nonsingular} -> {path}"
    )
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare, "check": cmd_check}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="d2d-powergame", description="Game-theoretic uplink power control simulations."
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="configuration file (key = value)")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--rule", help="update rule name (overrides rule)")
    parser.add_argument("--format", choices=("csv", "text"), help="output format (overrides output.format)")
    parser.add_argument("--jobs", type=int, help="parallel sweep workers (overrides sweep.n_jobs)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args):
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = parse_config(fh.read())
    else:
        config = Config()
    if args.seed is not None:
        config = with_seed(config, args.seed)
    if args.out:
        config = replace(config, output_dir=args.out)
    if args.rule:
        get_rule(args.rule)
        config = replace(config, rule=args.rule, sweep=replace(config.sweep, rule=args.rule))
    if args.format:
        config = replace(config, output_format=args.format)
    if args.jobs:
        config = replace(config, sweep_n_jobs=args.jobs)
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        config = load_config(args)
        get_rule(config.rule)
        return COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
