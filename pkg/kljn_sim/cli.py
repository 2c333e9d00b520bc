"""Contains the command-line front end."""

from __future__ import annotations

import argparse
import asyncio
from collections.abc import Sequence
import logging
from pathlib import Path
import sys

from .config import RunConfig, build_run_config, load_run_config
from .const import (
    CONF_SWEEP,
    DEFAULT_SEED,
    DOMAIN,
    EXIT_CONFIG_REJECTED,
    EXIT_FAILURE,
    EXIT_OK,
    METRICS_FILENAME,
    SLOT_LOG_FILENAME,
    SWEEP_FILENAME,
)
from .exceptions import ConfigurationError, KljnError
from .experiments import (
    async_run_sweep,
    simulate,
    write_metrics_csv,
    write_slot_log_csv,
)
from .verify import run_checks

_LOGGER = logging.getLogger(__name__)


def _load(args: argparse.Namespace) -> RunConfig:
    """Return the run configuration with the command-line overrides."""
    return build_run_config(
        load_run_config(args.config),
        seed=args.seed,
        directory=args.out,
        slot_log=args.slot_log,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run one key exchange and write its metrics."""
    try:
        run = _load(args)
    except KljnError as err:
        _LOGGER.error("Configuration rejected: %s", err)
        return EXIT_CONFIG_REJECTED

    try:
        result = simulate(
            run.protocol,
            run.n_bits,
            run.seed,
            eve_window=run.eve_window,
            slot_log=run.slot_log,
        )
    except KljnError as err:
        _LOGGER.error("Key exchange failed: %s", err)
        return EXIT_FAILURE

    metrics = write_metrics_csv([result.row], run.directory / METRICS_FILENAME)
    if run.slot_log:
        write_slot_log_csv(result.slot_log, run.directory / SLOT_LOG_FILENAME)

    exchange = result.exchange
    sys.stdout.write(
        f"{run.protocol.variant}: {len(exchange.key_alice)} bits in "
        f"{len(exchange.slots)} slots, BER {exchange.ber:.4g}, "
        f"Eve bit success {result.row.eve_bit_success:.4g}, metrics in {metrics}\n"
    )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Run a parameter sweep and write one metrics row per value."""
    try:
        run = _load(args)
        if run.sweep is None:
            raise ConfigurationError(
                translation_key="missing_section",
                translation_placeholders={"section": CONF_SWEEP},
            )
    except KljnError as err:
        _LOGGER.error("Configuration rejected: %s", err)
        return EXIT_CONFIG_REJECTED

    try:
        points = asyncio.run(async_run_sweep(run.sweep, slot_log=run.slot_log))
    except KljnError as err:
        _LOGGER.error("Sweep failed: %s", err)
        return EXIT_FAILURE

    path = write_metrics_csv(
        [point.row for point in points], run.directory / SWEEP_FILENAME
    )
    if run.slot_log:
        write_slot_log_csv(
            [record for point in points for record in point.slot_log],
            run.directory / SLOT_LOG_FILENAME,
        )

    sys.stdout.write(
        f"{run.sweep.parameter}: {len(points)} points of "
        f"{run.sweep.slots_per_point} slots, metrics in {path}\n"
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the analytic identity checks."""
    seed = DEFAULT_SEED if args.seed is None else args.seed
    try:
        results = run_checks(quick=args.quick, seed=seed)
    except KljnError as err:
        _LOGGER.error("Verification rejected: %s", err)
        return EXIT_CONFIG_REJECTED

    for result in results:
        status = "PASS" if result.passed else "FAIL"
        sys.stdout.write(f"{status} {result.name}: {result.detail}\n")

    return EXIT_OK if all(result.passed for result in results) else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="root seed override")
    common.add_argument(
        "-v", "--verbose", action="store_true", help="log debug messages"
    )

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--config", type=Path, required=True, help="JSON run config")
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument(
        "--slot-log",
        action="store_true",
        default=None,
        help="also write the per-slot log",
    )

    parser = argparse.ArgumentParser(
        prog=DOMAIN.replace("_", "-"),
        description="Monte Carlo simulator of KLJN key exchange variants.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser(
        "simulate", parents=[common, run], help="run one key exchange"
    ).set_defaults(handler=cmd_simulate)
    commands.add_parser(
        "sweep", parents=[common, run], help="run a parameter sweep"
    ).set_defaults(handler=cmd_sweep)
    verify = commands.add_parser(
        "verify", parents=[common], help="check the analytic identities"
    )
    verify.add_argument(
        "--quick", action="store_true", help="fewer samples, looser tolerances"
    )
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    status: int = args.handler(args)
    return status
