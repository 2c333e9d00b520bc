"""Contains the batch experiment runner and metrics aggregation."""

from __future__ import annotations

import asyncio
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import astuple, dataclass, field, replace
import logging
import math
from pathlib import Path
from typing import Any, Final

import numpy as np

from .adversary import EveReport, eavesdrop
from .const import (
    ATTR_BIT_ALICE,
    ATTR_BIT_BOB,
    ATTR_DISCARD_REASON,
    ATTR_EVE_BIT_GUESS,
    ATTR_EVE_CONFIDENCE,
    ATTR_EVE_SITUATION,
    ATTR_KEPT,
    ATTR_R_A_INDEX,
    ATTR_R_B_INDEX,
    ATTR_SLOT_INDEX,
    ATTR_VARIANT,
    CONF_N_BITS,
    DEFAULT_SLOTS_PER_POINT,
    KEYED_VARIANTS,
    METRICS_COLUMNS,
    MULTIPLE_VARIANTS,
    SLOT_LOG_COLUMNS,
    DiscardReason,
    SituationLabel,
    SweepParameter,
    Variant,
)
from .exceptions import ConfigurationError
from .noise import RngStream, fork_stream
from .protocol import (
    KeyExchangeResult,
    ProtocolConfig,
    SlotResult,
    run_key_exchange,
    run_slot,
)
from .stats import binomial_ci
from .truthtable import ResistorBank, build_public_table, derive_keyed_schedule

# Variant with the same features on the other side of the n = 2 boundary.
MULTIPLE_COUNTERPART: Final[dict[Variant, Variant]] = {
    Variant.KLJN: Variant.MKLJN,
    Variant.KKLJN: Variant.KMKLJN,
    Variant.IKLJN: Variant.IMKLJN,
    Variant.IKKLJN: Variant.IKMKLJN,
    Variant.MKLJN: Variant.KLJN,
    Variant.KMKLJN: Variant.KKLJN,
    Variant.IMKLJN: Variant.IKLJN,
    Variant.IKMKLJN: Variant.IKKLJN,
}

DEFAULT_REQUIRED_YIELD: Final = 0.25
EVE_KEY_PARAMETER: Final = "eve_prior_key"

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, kw_only=True)
class MetricsRow:
    """Represents the aggregated metrics of one experiment point.

    Field order matches the CSV columns.
    """

    point_id: int
    param_name: str
    param_value: str
    slots: int
    ber: float
    secure_fraction: float
    discard_inconclusive: float
    discard_insecure: float
    eve_bit_success: float
    eve_bit_ci: float
    eve_slot_acc: float
    mean_margin: float
    seed: int

    def as_row(self) -> list[str]:
        """Return the CSV cells of the row."""
        return [
            repr(value) if isinstance(value, float) else str(value)
            for value in astuple(self)
        ]


@dataclass(frozen=True, kw_only=True)
class SweepSpec:
    """Represents a parameter sweep around a base configuration."""

    base: ProtocolConfig
    parameter: SweepParameter
    values: tuple[Any, ...]
    slots_per_point: int = DEFAULT_SLOTS_PER_POINT
    root_seed: int = 0
    eve_window: int | None = None
    workers: int | None = None

    def __post_init__(self) -> None:
        """Validate the sweep."""
        try:
            object.__setattr__(self, "parameter", SweepParameter(self.parameter))
        except ValueError as err:
            raise ConfigurationError(
                translation_key="unknown_sweep_parameter",
                translation_placeholders={"parameter": self.parameter},
            ) from err

        if not self.values:
            raise ConfigurationError(
                translation_key="empty_sweep",
                translation_placeholders={"parameter": self.parameter},
            )

        if self.slots_per_point < 1:
            raise ConfigurationError(
                translation_key="invalid_slot_count",
                translation_placeholders={"n_slots": self.slots_per_point},
            )


@dataclass(slots=True)
class PointResult:
    """Represents one evaluated experiment point."""

    row: MetricsRow
    slot_log: list[dict[str, Any]] = field(default_factory=list)


@dataclass(slots=True)
class SimulationResult:
    """Represents a key exchange together with its metrics."""

    exchange: KeyExchangeResult
    row: MetricsRow
    slot_log: list[dict[str, Any]] = field(default_factory=list)


@dataclass(frozen=True, slots=True)
class DecisionStats:
    """Represents how often honest parties decided and erred."""

    party_slots: int
    decided: int
    wrong: int

    @property
    def error(self) -> float:
        """Return the error rate among decided party slots."""
        return self.wrong / self.decided if self.decided else 1.0

    @property
    def decided_fraction(self) -> float:
        """Return the fraction of party slots with a decision."""
        return self.decided / self.party_slots if self.party_slots else 0.0


def apply_sweep_value(
    base: ProtocolConfig, parameter: SweepParameter, value: Any
) -> ProtocolConfig:
    """Return the base configuration with one parameter replaced."""
    match parameter:
        case SweepParameter.SAMPLES_PER_SLOT:
            return replace(base, samples_per_slot=int(value))
        case SweepParameter.R_W:
            return replace(base, wire_resistance=float(value))
        case SweepParameter.N:
            n = int(value)
            bank = ResistorBank.geometric(base.bank.low, base.bank.high, n)
            variant = base.variant
            if (variant in MULTIPLE_VARIANTS) != (n > 2):
                variant = MULTIPLE_COUNTERPART[variant]

            return replace(base, bank=bank, variant=variant)
        case SweepParameter.VARIANT:
            try:
                variant = Variant(value)
            except ValueError as err:
                raise ConfigurationError(
                    translation_key="invalid_config_value",
                    translation_placeholders={"value": value, "parameter": parameter},
                ) from err

            prior_key = base.prior_key if variant in KEYED_VARIANTS else None
            return replace(base, variant=variant, prior_key=prior_key)

    raise ConfigurationError(
        translation_key="unknown_sweep_parameter",
        translation_placeholders={"parameter": parameter},
    )


def slot_log_row(slot: SlotResult, report: EveReport | None) -> dict[str, Any]:
    """Return the slot log record of one slot."""

    def cell(value: Any) -> Any:
        return "" if value is None else value

    r_a_index, r_b_index = slot.truth
    return {
        ATTR_SLOT_INDEX: slot.slot_index,
        ATTR_VARIANT: str(slot.variant),
        ATTR_R_A_INDEX: cell(r_a_index),
        ATTR_R_B_INDEX: cell(r_b_index),
        ATTR_KEPT: int(slot.kept),
        ATTR_DISCARD_REASON: cell(slot.discard),
        ATTR_BIT_ALICE: cell(slot.bit_alice),
        ATTR_BIT_BOB: cell(slot.bit_bob),
        ATTR_EVE_SITUATION: cell(report and report.situation_guess),
        ATTR_EVE_BIT_GUESS: cell(report and report.bit_guess),
        ATTR_EVE_CONFIDENCE: cell(report and repr(report.confidence)),
    }


def _truly_secure(slot: SlotResult) -> bool:
    """Return True if the slot carried a secure pair."""
    label = slot.true_situation
    return slot.kept if label is None else label == SituationLabel.MID


def summarize_slots(
    slots: Sequence[SlotResult],
    reports: Sequence[EveReport | None],
    *,
    point_id: int,
    param_name: str,
    param_value: Any,
    seed: int,
) -> MetricsRow:
    """Aggregate slot results and eavesdropper reports into one row.

    Discard columns are fractions of all slots; the inconclusive column
    covers every reason except an insecure pair.
    """
    total = len(slots)
    kept = [slot for slot in slots if slot.kept]
    errors = sum(slot.bit_alice != slot.bit_bob for slot in kept)
    insecure = sum(slot.discard == DiscardReason.INSECURE for slot in slots)
    undecided = sum(
        slot.discard is not None and slot.discard != DiscardReason.INSECURE
        for slot in slots
    )

    guesses = 0
    successes = 0
    classified = 0
    correct = 0
    for slot, report in zip(slots, reports, strict=True):
        if report is None:
            continue

        classified += 1
        correct += (report.situation_guess == SituationLabel.MID) == _truly_secure(slot)
        if slot.kept and report.bit_guess is not None:
            guesses += 1
            successes += report.bit_guess == slot.bit_alice

    success, half_width = binomial_ci(successes, guesses)
    return MetricsRow(
        point_id=point_id,
        param_name=param_name,
        param_value=str(param_value),
        slots=total,
        ber=errors / len(kept) if kept else 0.0,
        secure_fraction=len(kept) / total if total else 0.0,
        discard_inconclusive=undecided / total if total else 0.0,
        discard_insecure=insecure / total if total else 0.0,
        eve_bit_success=success if guesses else math.nan,
        eve_bit_ci=half_width if guesses else math.nan,
        eve_slot_acc=correct / classified if classified else math.nan,
        mean_margin=float(np.mean([slot.mean_margin for slot in slots]))
        if slots
        else 0.0,
        seed=seed,
    )


def _eve_window(config: ProtocolConfig, eve_window: int | None) -> int:
    """Return the eavesdropper window clipped to the slot length."""
    if eve_window is None:
        return config.samples_per_slot

    return min(eve_window, config.samples_per_slot)


def run_point(
    config: ProtocolConfig,
    *,
    point_id: int,
    param_name: str,
    param_value: Any,
    slots: int,
    root_seed: int,
    eve_window: int | None = None,
    slot_log: bool = False,
    stream_label: str | None = None,
    eve_prior_key: Sequence[int] | None = None,
) -> PointResult:
    """Run the slots of one experiment point.

    Slot streams derive from (root seed, point label, slot index), so
    adding points never changes the results of existing ones. For keyed
    variants eve_prior_key is the key the eavesdropper believes in;
    without it she has no table at all.
    """
    point = fork_stream(RngStream(root_seed), stream_label or f"point-{point_id}")
    schedule = config.schedule()
    eve_schedule = (
        derive_keyed_schedule(eve_prior_key, config.max_slots, config.bank.n)
        if eve_prior_key is not None and config.keyed
        else None
    )
    public = build_public_table(config.bank.n)
    window = _eve_window(config, eve_window)
    results: list[SlotResult] = []
    reports: list[EveReport | None] = []
    log: list[dict[str, Any]] = []
    for slot_index in range(slots):
        slot_stream = fork_stream(point, f"slot-{slot_index}")
        table = public if schedule is None else schedule.table_for(slot_index)
        slot = run_slot(config, slot_stream, table, slot_index=slot_index)
        eve_table = None if eve_schedule is None else eve_schedule.table_for(slot_index)
        report = eavesdrop(
            slot, config, fork_stream(slot_stream, "eve"), window, eve_table=eve_table
        )
        if slot_log:
            log.append(slot_log_row(slot, report))

        results.append(slot.without_trace())
        reports.append(report)

    row = summarize_slots(
        results,
        reports,
        point_id=point_id,
        param_name=param_name,
        param_value=param_value,
        seed=root_seed,
    )
    _LOGGER.debug(
        "Point %d (%s=%s): BER %.4g, Eve success %.4g",
        point_id,
        param_name,
        param_value,
        row.ber,
        row.eve_bit_success,
    )
    return PointResult(row=row, slot_log=log)


@dataclass(frozen=True, slots=True)
class _PointJob:
    """Represents one sweep point shipped to a worker process."""

    config: ProtocolConfig
    point_id: int
    param_name: str
    param_value: Any
    slots: int
    root_seed: int
    eve_window: int | None
    slot_log: bool


def _run_point_job(job: _PointJob) -> PointResult:
    """Run a sweep point inside a worker."""
    return run_point(
        job.config,
        point_id=job.point_id,
        param_name=job.param_name,
        param_value=job.param_value,
        slots=job.slots,
        root_seed=job.root_seed,
        eve_window=job.eve_window,
        slot_log=job.slot_log,
    )


def _sweep_jobs(spec: SweepSpec, slot_log: bool) -> list[_PointJob]:
    """Return the jobs of the sweep in point order."""
    return [
        _PointJob(
            config=apply_sweep_value(spec.base, spec.parameter, value),
            point_id=point_id,
            param_name=str(spec.parameter),
            param_value=value,
            slots=spec.slots_per_point,
            root_seed=spec.root_seed,
            eve_window=spec.eve_window,
            slot_log=slot_log,
        )
        for point_id, value in enumerate(spec.values)
    ]


async def async_run_sweep(
    spec: SweepSpec, *, slot_log: bool = False
) -> list[PointResult]:
    """Run all sweep points, in worker processes if requested.

    Results are returned in point order whatever the completion order.
    """
    jobs = _sweep_jobs(spec, slot_log)
    _LOGGER.info(
        "Starting sweep over %s with %d points of %d slots",
        spec.parameter,
        len(jobs),
        spec.slots_per_point,
    )
    if not spec.workers or spec.workers < 2:
        return [_run_point_job(job) for job in jobs]

    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=spec.workers) as executor:
        return list(
            await asyncio.gather(
                *(loop.run_in_executor(executor, _run_point_job, job) for job in jobs)
            )
        )


def run_sweep(spec: SweepSpec) -> list[MetricsRow]:
    """Run the sweep and return one metrics row per value."""
    return [point.row for point in asyncio.run(async_run_sweep(spec))]


def compare_variants(
    configs: Sequence[ProtocolConfig],
    slots: int,
    seed: int,
    *,
    eve_window: int | None = None,
    eve_prior_key: Sequence[int] | None = None,
) -> list[MetricsRow]:
    """Run the variants side by side on identical noise streams."""
    if not configs:
        return []

    reference = configs[0]
    for config in configs[1:]:
        if (
            config.params != reference.params
            or config.bank.low != reference.bank.low
            or config.bank.high != reference.bank.high
        ):
            raise ConfigurationError(
                translation_key="incompatible_configs",
                translation_placeholders={"variant": config.variant},
            )

    return [
        run_point(
            config,
            point_id=point_id,
            param_name=str(SweepParameter.VARIANT),
            param_value=config.variant,
            slots=slots,
            root_seed=seed,
            eve_window=eve_window,
            stream_label="compare",
            eve_prior_key=eve_prior_key,
        ).row
        for point_id, config in enumerate(configs)
    ]


def compare_eve_keys(
    config: ProtocolConfig,
    eve_keys: Sequence[Sequence[int] | None],
    slots: int,
    seed: int,
    *,
    eve_window: int | None = None,
) -> list[MetricsRow]:
    """Run one keyed exchange against eavesdroppers holding different keys.

    Every row sees the same slots, so the rows differ only in the
    table Eve applies to her pair guesses.
    """
    if not config.keyed:
        raise ConfigurationError(
            translation_key="prior_key_unexpected",
            translation_placeholders={"variant": config.variant},
        )

    return [
        run_point(
            config,
            point_id=point_id,
            param_name=EVE_KEY_PARAMETER,
            param_value="".join(map(str, key)) if key is not None else "",
            slots=slots,
            root_seed=seed,
            eve_window=eve_window,
            stream_label="eve-keys",
            eve_prior_key=key,
        ).row
        for point_id, key in enumerate(eve_keys)
    ]


def decision_stats(config: ProtocolConfig, slots: int, seed: int) -> DecisionStats:
    """Count decided and wrong far-end estimates of both parties."""
    root = fork_stream(RngStream(seed), "decisions")
    public = build_public_table(config.bank.n)
    decided = 0
    wrong = 0
    for slot_index in range(slots):
        slot = run_slot(config, fork_stream(root, f"slot-{slot_index}"), public)
        r_a_index, r_b_index = slot.truth
        for outcome, truth in ((slot.alice, r_b_index), (slot.bob, r_a_index)):
            if outcome.other_index is None:
                continue

            decided += 1
            wrong += outcome.other_index != truth

    return DecisionStats(party_slots=2 * slots, decided=decided, wrong=wrong)


def required_samples(
    config: ProtocolConfig,
    target_error: float,
    grid: Iterable[int],
    *,
    slots: int,
    seed: int,
    min_yield: float = DEFAULT_REQUIRED_YIELD,
) -> int | None:
    """Return the smallest slot length meeting the decision error target.

    The grid is bisected, assuming the error falls with the slot length.
    None means even the longest slot misses the target.
    """
    values = sorted(set(grid))
    cache: dict[int, bool] = {}

    def passes(samples: int) -> bool:
        if samples not in cache:
            stats = decision_stats(
                replace(config, samples_per_slot=samples), slots, seed
            )
            cache[samples] = (
                stats.decided_fraction >= min_yield and stats.error <= target_error
            )
            _LOGGER.debug(
                "%s at %d samples: error %.4g, decided %.3f",
                config.variant,
                samples,
                stats.error,
                stats.decided_fraction,
            )

        return cache[samples]

    if not values or not passes(values[-1]):
        return None

    low, high = 0, len(values) - 1
    while low < high:
        middle = (low + high) // 2
        if passes(values[middle]):
            high = middle
        else:
            low = middle + 1

    return values[low]


def simulate(
    config: ProtocolConfig,
    n_bits: int,
    seed: int,
    *,
    eve_window: int | None = None,
    slot_log: bool = False,
) -> SimulationResult:
    """Run a key exchange with the eavesdropper listening on every slot."""
    eve_root = fork_stream(RngStream(seed), "eve")
    window = _eve_window(config, eve_window)
    reports: list[EveReport | None] = []
    log: list[dict[str, Any]] = []

    def listen(slot: SlotResult) -> None:
        report = eavesdrop(
            slot, config, fork_stream(eve_root, f"slot-{slot.slot_index}"), window
        )
        reports.append(report)
        if slot_log:
            log.append(slot_log_row(slot, report))

    exchange = run_key_exchange(config, n_bits, seed, callback=listen)
    row = summarize_slots(
        exchange.slots,
        reports,
        point_id=0,
        param_name=CONF_N_BITS,
        param_value=n_bits,
        seed=seed,
    )
    return SimulationResult(exchange=exchange, row=row, slot_log=log)


def write_metrics_csv(rows: Iterable[MetricsRow], path: Path) -> Path:
    """Write metrics rows with a single header row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        writer.writerows(row.as_row() for row in rows)

    return path


def write_slot_log_csv(records: Iterable[dict[str, Any]], path: Path) -> Path:
    """Write slot log records with a single header row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.DictWriter(file, fieldnames=SLOT_LOG_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)

    return path
