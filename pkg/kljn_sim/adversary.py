"""Contains passive eavesdropper models."""

from __future__ import annotations

from dataclasses import dataclass
import itertools
import logging
import math

import numpy as np
from scipy import special, stats as sps

from .circuit import EndpointSample, FloatArray, LoopSample
from .const import SituationLabel
from .exceptions import ContractError
from .noise import NoiseParams, RngStream
from .protocol import ProtocolConfig, SlotResult
from .stats import (
    LevelTable,
    classify_situation,
    mean_square,
    predict_levels,
    situation_label,
)
from .truthtable import ResistorBank, TruthTable, build_public_table, interpret

_LOGGER = logging.getLogger(__name__)

type Channel = LoopSample | EndpointSample


@dataclass(frozen=True, slots=True, kw_only=True)
class EveReport:
    """Represents what the eavesdropper concluded about one slot.

    A bit guess is only present when the situation guess is MID.
    """

    slot_index: int
    situation_guess: SituationLabel
    bit_guess: int | None
    confidence: float
    observed_window: int
    pair_guess: tuple[int, int] | None = None
    margin: float = 0.0


def _check_window(channel: Channel, window: int) -> int:
    """Return the window, rejecting one longer than the trace."""
    length = len(channel)
    if not 1 <= window <= length:
        raise ContractError(
            translation_key="window_too_long",
            translation_placeholders={"window": window, "length": length},
        )

    return window


def line_voltage(channel: Channel) -> FloatArray:
    """Return the voltage an observer attributes to the line."""
    if isinstance(channel, LoopSample):
        return channel.u_ch

    return (channel.u_end_a + channel.u_end_b) / 2


def _coin(stream: RngStream) -> int:
    return int(stream.generator.integers(0, 2))


def _margin_confidence(margin: float) -> float:
    """Map a level margin in [0, 1] onto a confidence in [0.5, 1]."""
    return 0.5 + 0.5 * min(max(margin, 0.0), 1.0)


def eve_passive_ideal(
    channel: Channel,
    levels: LevelTable,
    window: int,
    stream: RngStream,
    slot_index: int = 0,
) -> EveReport:
    """Classify the situation and guess the bit of a secure slot at random.

    The confidence rates the situation guess by its level margin; the
    bit of a secure slot stays a coin flip whatever the margin.
    """
    window = _check_window(channel, window)
    situation = classify_situation(
        mean_square(line_voltage(channel)[:window]),
        mean_square(channel.i_ch[:window]),
        levels,
    )
    secure = situation.label == SituationLabel.MID
    return EveReport(
        slot_index=slot_index,
        situation_guess=situation.label,
        bit_guess=_coin(stream) if secure else None,
        confidence=_margin_confidence(situation.margin),
        observed_window=window,
        margin=situation.margin,
    )


def eve_wire_resistance(
    channel: Channel,
    bank: ResistorBank,
    params: NoiseParams,
    window: int,
    stream: RngStream,
    *,
    r_wire: float,
    slot_index: int = 0,
) -> EveReport:
    """Locate the larger resistor from the noise difference of the line ends.

    The terminal mean squares differ by r_w^2 (R_A - R_B) / S^2, so the
    noisier end holds the larger resistor.
    """
    window = _check_window(channel, window)
    levels = predict_levels(bank.low, bank.high, params, r_wire)
    situation = classify_situation(
        mean_square(line_voltage(channel)[:window]),
        mean_square(channel.i_ch[:window]),
        levels,
    )
    report = EveReport(
        slot_index=slot_index,
        situation_guess=situation.label,
        bit_guess=None,
        confidence=0.5,
        observed_window=window,
        margin=situation.margin,
    )
    if situation.label != SituationLabel.MID:
        return report

    if r_wire <= 0 or not isinstance(channel, EndpointSample):
        return EveReport(
            slot_index=slot_index,
            situation_guess=situation.label,
            bit_guess=_coin(stream),
            confidence=0.5,
            observed_window=window,
            margin=situation.margin,
        )

    difference = channel.u_end_a[:window] ** 2 - channel.u_end_b[:window] ** 2
    mean = float(np.mean(difference))
    spread = float(np.std(difference)) / math.sqrt(window)
    z_score = mean / spread if spread > 0 else 0.0
    bit = int(mean > 0) if mean != 0 else _coin(stream)

    pair = (bank.n, 1) if bit else (1, bank.n)
    return EveReport(
        slot_index=slot_index,
        situation_guess=situation.label,
        bit_guess=interpret(pair, build_public_table(bank.n)),
        confidence=float(sps.norm.cdf(abs(z_score))),
        observed_window=window,
        pair_guess=pair,
        margin=situation.margin,
    )


def _observables(channel: Channel, r_wire: float, window: int) -> FloatArray:
    """Return the two observed series as a (window, 2) array."""
    if r_wire > 0 and isinstance(channel, EndpointSample):
        columns = (channel.u_end_a[:window], channel.u_end_b[:window])
    else:
        columns = (line_voltage(channel)[:window], channel.i_ch[:window])

    return np.column_stack(columns)


def _predicted_covariance(
    r_a: float, r_b: float, params: NoiseParams, r_wire: float
) -> FloatArray:
    """Return the covariance of the observables for a resistor pair."""
    total = r_a + r_wire + r_b
    if r_wire > 0:
        mixing = np.array([[r_wire + r_b, r_a], [r_b, r_wire + r_a]]) / total
    else:
        mixing = np.array([[r_b, r_a], [-1.0, 1.0]]) / total

    sources = np.diag([params.variance(r_a), params.variance(r_b)])
    covariance: FloatArray = mixing @ sources @ mixing.T
    return covariance


def eve_exact_pair_guess(
    channel: Channel,
    bank: ResistorBank,
    params: NoiseParams,
    window: int,
    stream: RngStream,
    *,
    r_wire: float = 0.0,
    table: TruthTable | None = None,
    slot_index: int = 0,
) -> EveReport:
    """Identify the resistor pair by maximum likelihood, then look up the bit.

    Without a table, as for a keyed schedule whose key is unknown, the
    bit guess is a coin flip. Exact likelihood ties are broken at random.
    """
    window = _check_window(channel, window)
    observed = _observables(channel, r_wire, window)
    sample_cov = observed.T @ observed / window
    pairs = list(itertools.product(bank.indices, repeat=2))
    log_likelihood = np.empty(len(pairs))
    for k, (i, j) in enumerate(pairs):
        predicted = _predicted_covariance(
            bank.resistance(i), bank.resistance(j), params, r_wire
        )
        _, log_det = np.linalg.slogdet(predicted)
        log_likelihood[k] = -0.5 * window * (
            log_det + np.trace(np.linalg.solve(predicted, sample_cov))
        )

    best_value = log_likelihood.max()
    tied = np.flatnonzero(
        np.isclose(log_likelihood, best_value, rtol=1e-12, atol=1e-9)
    )
    best = int(tied[0] if len(tied) == 1 else stream.generator.choice(tied))
    posterior = special.softmax(log_likelihood)
    pair = pairs[best]
    label = situation_label(*pair, bank.n)
    bit: int | None = None
    if label == SituationLabel.MID:
        bit = interpret(pair, table) if table is not None else _coin(stream)

    ranked = np.sort(posterior)[::-1]
    return EveReport(
        slot_index=slot_index,
        situation_guess=label,
        bit_guess=bit,
        confidence=float(posterior[best]),
        observed_window=window,
        pair_guess=pair,
        margin=float(ranked[0] - ranked[1]),
    )


def eavesdrop(
    result: SlotResult,
    config: ProtocolConfig,
    stream: RngStream,
    window: int | None = None,
    *,
    eve_table: TruthTable | None = None,
) -> EveReport | None:
    """Run the eavesdropper model that fits the configuration.

    Eve knows the public table of non-keyed variants; for keyed variants
    she uses eve_table, which is None when she has no key at all.
    """
    if result.trace is None:
        return None

    channel = result.trace.channel
    window = len(channel) if window is None else window
    bank = config.bank
    r_wire = config.wire_resistance
    if bank.n == 2 and r_wire == 0:
        return eve_passive_ideal(
            channel,
            predict_levels(bank.low, bank.high, config.params),
            window,
            stream,
            result.slot_index,
        )

    if bank.n == 2 and not config.keyed:
        return eve_wire_resistance(
            channel,
            bank,
            config.params,
            window,
            stream,
            r_wire=r_wire,
            slot_index=result.slot_index,
        )

    table = eve_table if config.keyed else build_public_table(bank.n)
    return eve_exact_pair_guess(
        channel,
        bank,
        config.params,
        window,
        stream,
        r_wire=r_wire,
        table=table,
        slot_index=result.slot_index,
    )
