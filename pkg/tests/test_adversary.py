"""Test the passive eavesdropper models."""

from dataclasses import replace

import numpy as np
import pytest

from kljn_sim.adversary import (
    eavesdrop,
    eve_exact_pair_guess,
    eve_passive_ideal,
    eve_wire_resistance,
    line_voltage,
)
from kljn_sim.circuit import LoopSample
from kljn_sim.const import SituationLabel, Variant
from kljn_sim.exceptions import ContractError
from kljn_sim.experiments import MetricsRow, run_point
from kljn_sim.noise import RngStream, fork_stream
from kljn_sim.protocol import ProtocolConfig, run_slot
from kljn_sim.stats import predict_levels
from kljn_sim.truthtable import build_public_table, derive_keyed_schedule

PRIOR_KEY = (0, 1, 1, 0, 1, 0, 0, 1)
# Sampling slack of one success rate against its neighbour.
LEAK_TOLERANCE = 0.03


def _point(config: ProtocolConfig, slots: int, window: int | None = None) -> MetricsRow:
    return run_point(
        config,
        point_id=0,
        param_name="eve_window",
        param_value=window,
        slots=slots,
        root_seed=21,
        eve_window=window,
        stream_label="eve-test",
    ).row


def _assert_coin_flip(row: MetricsRow) -> None:
    """Assert the success rate is within about 4 sigma of a coin flip."""
    assert row.eve_bit_ci > 0
    assert abs(row.eve_bit_success - 0.5) < 2.1 * row.eve_bit_ci


def _pair_accuracy(config: ProtocolConfig, slots: int) -> float:
    """Return how often Eve names the exact pair of a secure slot."""
    root = RngStream(33)
    table = build_public_table(config.bank.n)
    hits = 0
    total = 0
    for slot_index in range(slots):
        slot_stream = fork_stream(root, f"slot-{slot_index}")
        slot = run_slot(config, slot_stream, table, slot_index=slot_index)
        report = eavesdrop(slot, config, fork_stream(slot_stream, "eve"))
        if slot.true_situation != SituationLabel.MID:
            continue

        assert report is not None
        total += 1
        hits += report.pair_guess == slot.truth

    return hits / total


def test_ideal_wire_secrecy(kljn_config: ProtocolConfig) -> None:
    """Test that Eve guesses bits at chance on an ideal wire."""
    row = _point(replace(kljn_config, samples_per_slot=200), 4000)
    _assert_coin_flip(row)
    assert row.eve_slot_acc > 0.95


def test_ideal_wire_secrecy_multiple(mkljn_config: ProtocolConfig) -> None:
    """Test that mirror pairs keep a multi-resistor bit secret."""
    row = _point(replace(mkljn_config, samples_per_slot=500), 3000)
    _assert_coin_flip(row)


def test_wire_leak_grows_with_window(kljn_config: ProtocolConfig) -> None:
    """Test that Eve's success falls as her observation window shrinks."""
    config = replace(kljn_config, samples_per_slot=10_000, wire_resistance=0.2)
    success = [
        _point(config, 400, window).eve_bit_success for window in (100, 1000, 10_000)
    ]
    assert success[0] < success[1] < success[2]
    assert success[2] > 0.95


@pytest.mark.slow
def test_wire_leak_grid(kljn_config: ProtocolConfig) -> None:
    """Test that Eve's success never falls with wire resistance or window."""
    success = np.array(
        [
            [
                _point(
                    replace(kljn_config, samples_per_slot=10_000, wire_resistance=r_w),
                    1000,
                    window,
                ).eve_bit_success
                for window in (100, 1000, 10_000)
            ]
            for r_w in (0.1, 0.5, 2.0)
        ]
    )
    assert np.all(np.diff(success, axis=0) > -LEAK_TOLERANCE)
    assert np.all(np.diff(success, axis=1) > -LEAK_TOLERANCE)
    assert success[0, 0] < 0.65
    assert success[2, 2] > 0.99



def test_pair_identification_harder_with_more_resistors(
    kljn_config: ProtocolConfig, mkljn_config: ProtocolConfig
) -> None:
    """Test that four resistors hide the pair better than two at equal leak."""
    two = _pair_accuracy(
        replace(kljn_config, samples_per_slot=1000, wire_resistance=0.2), 300
    )
    four = _pair_accuracy(
        replace(mkljn_config, samples_per_slot=1000, wire_resistance=0.2), 300
    )
    assert four < two


def test_keyed_secrecy_with_perfect_pair_identification() -> None:
    """Test that knowing the pair reveals nothing without the prior key."""
    schedule = derive_keyed_schedule(PRIOR_KEY, 4000, 4)
    public = build_public_table(4)
    generator = np.random.Generator(np.random.Philox(8))
    matches = 0
    for slot_index in range(len(schedule)):
        i, j = (int(k) for k in generator.choice(np.arange(1, 5), 2, replace=False))
        matches += public.bit_of(i, j) == schedule.table_for(slot_index).bit_of(i, j)

    assert abs(matches / len(schedule) - 0.5) < 4 * np.sqrt(0.25 / len(schedule))


def test_keyed_secrecy_on_leaky_wire(kljn_config: ProtocolConfig) -> None:
    """Test that a keyed exchange stays secret even when the pair leaks."""
    config = replace(
        kljn_config,
        variant=Variant.KKLJN,
        prior_key=PRIOR_KEY,
        samples_per_slot=2000,
        wire_resistance=0.2,
    )
    _assert_coin_flip(_point(config, 1500))


def test_eavesdrop_dispatch(
    kljn_config: ProtocolConfig, mkljn_config: ProtocolConfig, stream: RngStream
) -> None:
    """Test which model runs for each configuration."""
    table = build_public_table(2)
    slot = run_slot(
        kljn_config, fork_stream(stream, "ideal"), table, forced_indices=(2, 1)
    )
    report = eavesdrop(slot, kljn_config, fork_stream(stream, "eve-ideal"))
    assert report is not None
    assert report.situation_guess == SituationLabel.MID
    assert report.pair_guess is None
    assert report.confidence == pytest.approx(0.5 + report.margin / 2)
    assert report.confidence > 0.5

    leaky = replace(kljn_config, samples_per_slot=20_000, wire_resistance=0.2)
    slot = run_slot(leaky, fork_stream(stream, "leaky"), table, forced_indices=(2, 1))
    report = eavesdrop(slot, leaky, fork_stream(stream, "eve-leaky"))
    assert report is not None
    assert report.pair_guess == (2, 1)
    assert report.bit_guess == 1
    assert 0.5 <= report.confidence <= 1.0

    slot = run_slot(
        mkljn_config,
        fork_stream(stream, "multiple"),
        build_public_table(4),
        forced_indices=(1, 4),
    )
    report = eavesdrop(slot, mkljn_config, fork_stream(stream, "eve-multiple"), 1000)
    assert report is not None
    assert report.observed_window == 1000
    assert report.pair_guess in ((1, 4), (4, 1))
    assert 0 < report.confidence <= 1.0
    assert report.margin >= 0

    assert eavesdrop(slot.without_trace(), mkljn_config, stream) is None


def test_eve_passive_ideal_insecure(
    kljn_config: ProtocolConfig, stream: RngStream
) -> None:
    """Test that Eve recognises an insecure slot and guesses nothing."""
    slot = run_slot(
        kljn_config,
        fork_stream(stream, "slot"),
        build_public_table(2),
        forced_indices=(1, 1),
    )
    assert slot.trace is not None
    report = eve_passive_ideal(
        slot.trace.channel,
        predict_levels(1.0, 4.0, kljn_config.params),
        kljn_config.samples_per_slot,
        fork_stream(stream, "eve"),
    )
    assert report.situation_guess == SituationLabel.LL
    assert report.bit_guess is None
    assert report.confidence > 0.9


@pytest.mark.parametrize(
    ("ms_u", "ms_i", "confidence"),
    [(0.5, 0.5, 1.0), (0.8, 0.2, 1.0), (np.sqrt(0.4), np.sqrt(0.1), 0.5)],
)
def test_eve_passive_ideal_confidence(
    ms_u: float,
    ms_i: float,
    confidence: float,
    kljn_config: ProtocolConfig,
    stream: RngStream,
) -> None:
    """Test that the confidence follows the level margin."""
    channel = LoopSample(
        u_a=None,
        u_b=None,
        u_ch=np.full(8, np.sqrt(ms_u)),
        i_ch=np.full(8, np.sqrt(ms_i)),
    )
    levels = predict_levels(1.0, 4.0, kljn_config.params)
    report = eve_passive_ideal(channel, levels, 8, stream)
    assert report.confidence == pytest.approx(confidence)
    assert report.confidence == pytest.approx(0.5 + report.margin / 2)



def test_eve_wire_resistance_without_wire(
    kljn_config: ProtocolConfig, stream: RngStream
) -> None:
    """Test that the leak model falls back to a coin on an ideal wire."""
    slot = run_slot(
        kljn_config,
        fork_stream(stream, "slot"),
        build_public_table(2),
        forced_indices=(1, 2),
    )
    assert slot.trace is not None
    report = eve_wire_resistance(
        slot.trace.channel,
        kljn_config.bank,
        kljn_config.params,
        100,
        fork_stream(stream, "eve"),
        r_wire=0.0,
    )
    assert report.pair_guess is None
    assert report.confidence == 0.5


def test_eve_exact_pair_guess_without_table(
    mkljn_config: ProtocolConfig, stream: RngStream
) -> None:
    """Test that an unknown table leaves a coin flip."""
    slot = run_slot(
        mkljn_config,
        fork_stream(stream, "slot"),
        build_public_table(4),
        forced_indices=(2, 3),
    )
    assert slot.trace is not None
    report = eve_exact_pair_guess(
        slot.trace.channel,
        mkljn_config.bank,
        mkljn_config.params,
        mkljn_config.samples_per_slot,
        fork_stream(stream, "eve"),
    )
    assert report.bit_guess in (0, 1)
    assert report.pair_guess is not None


def test_window_too_long(kljn_config: ProtocolConfig, stream: RngStream) -> None:
    """Test that Eve cannot observe more samples than the slot holds."""
    slot = run_slot(kljn_config, stream, build_public_table(2), forced_indices=(1, 2))
    assert slot.trace is not None
    assert len(line_voltage(slot.trace.channel)) == kljn_config.samples_per_slot
    with pytest.raises(ContractError) as exc_info:
        eve_passive_ideal(
            slot.trace.channel,
            predict_levels(1.0, 4.0, kljn_config.params),
            kljn_config.samples_per_slot + 1,
            RngStream(0),
        )

    assert exc_info.value.translation_key == "window_too_long"
