"""Contains slot and key exchange state machines for all variants."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .circuit import (
    EndpointSample,
    FloatArray,
    LoopSample,
    solve_loop,
    solve_loop_nonideal,
)
from .const import (
    DEFAULT_ADIABATIC_THRESHOLD,
    DEFAULT_DISCARD_MARGIN,
    DEFAULT_INDEPENDENCE_SIGMAS,
    DEFAULT_MAX_SLOTS,
    DEFAULT_SAMPLES_PER_SLOT,
    DEFAULT_STEP_INTERVAL,
    INTELLIGENT_VARIANTS,
    KEYED_VARIANTS,
    MULTIPLE_VARIANTS,
    DiscardReason,
    Party,
    SituationLabel,
    TableSource,
    Variant,
)
from .exceptions import ConfigurationError, ContractError, ParameterError
from .noise import (
    NoiseParams,
    NoiseSeries,
    RngStream,
    fork_stream,
    sample_noise,
    sample_noise_profile,
)
from .stats import (
    Correlation,
    PairEstimate,
    SituationClass,
    classify_other,
    cross_correlation,
    independence_bound,
    mean_square,
    situation_label,
)
from .truthtable import (
    KeyedSchedule,
    ResistorBank,
    TruthTable,
    build_public_table,
    derive_keyed_schedule,
    interpret,
)

_LOGGER = logging.getLogger(__name__)


def _invalid(parameter: str, value: object) -> ParameterError:
    """Return an invalid configuration value error."""
    return ParameterError(
        translation_key="invalid_config_value",
        translation_placeholders={"value": value, "parameter": parameter},
    )


@dataclass(frozen=True, kw_only=True)
class TransientConfig:
    """Represents the random-walk transient protocol settings.

    Times are counted in samples. In free-walk mode no targets are
    drawn and the walk endpoints become the slot resistances.
    """

    t_r: int
    step_size: float
    step_interval: int = DEFAULT_STEP_INTERVAL
    adiabatic_threshold: float = DEFAULT_ADIABATIC_THRESHOLD
    hold: int = 0
    free_walk: bool = False

    def __post_init__(self) -> None:
        """Validate the settings."""
        if self.t_r < 0:
            raise _invalid("t_r", self.t_r)

        if not math.isfinite(self.step_size) or self.step_size <= 0:
            raise _invalid("step_size", self.step_size)

        if self.step_interval < 1:
            raise _invalid("step_interval", self.step_interval)

        if self.hold < 0:
            raise _invalid("hold", self.hold)

        if self.adiabatic_threshold <= 0:
            raise _invalid("adiabatic_threshold", self.adiabatic_threshold)

    def check_adiabatic(self, bank: ResistorBank) -> None:
        """Check that a single step is small against the smallest resistor."""
        limit = self.adiabatic_threshold * bank.low
        if self.step_size > limit:
            raise ConfigurationError(
                translation_key="adiabatic_violation",
                translation_placeholders={"step_size": self.step_size, "limit": limit},
            )


@dataclass(frozen=True, kw_only=True)
class ProtocolConfig:
    """Represents the publicly agreed protocol configuration."""

    variant: Variant
    bank: ResistorBank
    params: NoiseParams
    samples_per_slot: int = DEFAULT_SAMPLES_PER_SLOT
    prior_key: tuple[int, ...] | None = None
    wire_resistance: float = 0.0
    discard_margin: float = DEFAULT_DISCARD_MARGIN
    independence_sigmas: float = DEFAULT_INDEPENDENCE_SIGMAS
    max_slots: int = DEFAULT_MAX_SLOTS
    transient: TransientConfig | None = None

    def __post_init__(self) -> None:
        """Validate the configuration against the variant requirements."""
        if self.samples_per_slot < 2:
            raise ParameterError(
                translation_key="invalid_sample_count",
                translation_placeholders={"minimum": 2, "value": self.samples_per_slot},
            )

        if not math.isfinite(self.wire_resistance) or self.wire_resistance < 0:
            raise ParameterError(
                translation_key="negative_wire_resistance",
                translation_placeholders={"r_w": self.wire_resistance},
            )

        if self.discard_margin < 0:
            raise _invalid("discard_margin", self.discard_margin)

        if self.independence_sigmas <= 0:
            raise _invalid("independence_sigmas", self.independence_sigmas)

        if self.max_slots < 1:
            raise _invalid("max_slots", self.max_slots)

        multiple = self.variant in MULTIPLE_VARIANTS
        if multiple != (self.bank.n > 2):
            raise ConfigurationError(
                translation_key="variant_bank_mismatch",
                translation_placeholders={
                    "variant": self.variant,
                    "expected": "more than 2" if multiple else "exactly 2",
                    "n": self.bank.n,
                },
            )

        if self.keyed and not self.prior_key:
            raise ConfigurationError(
                translation_key="prior_key_required",
                translation_placeholders={"variant": self.variant},
            )

        if not self.keyed and self.prior_key is not None:
            raise ConfigurationError(
                translation_key="prior_key_unexpected",
                translation_placeholders={"variant": self.variant},
            )

        if self.transient is not None:
            self.transient.check_adiabatic(self.bank)
            if self.transient.free_walk and self.variant != Variant.KLJN:
                raise ConfigurationError(
                    translation_key="free_walk_unsupported",
                    translation_placeholders={"variant": self.variant},
                )

            limit = 2 * self.bank.low
            if self.transient.free_walk and self.wire_resistance > limit:
                raise ConfigurationError(
                    translation_key="free_walk_wire_limit",
                    translation_placeholders={
                        "r_w": self.wire_resistance,
                        "limit": limit,
                    },
                )

    @property
    def intelligent(self) -> bool:
        """Return True if parties run hypothesis tests."""
        return self.variant in INTELLIGENT_VARIANTS

    @property
    def keyed(self) -> bool:
        """Return True if tables come from a prior key."""
        return self.variant in KEYED_VARIANTS

    @property
    def table_source(self) -> TableSource:
        """Return the truth table source."""
        return TableSource.KEYED if self.keyed else TableSource.PUBLIC

    def schedule(self) -> KeyedSchedule | None:
        """Return the keyed schedule covering the slot budget."""
        if self.prior_key is None:
            return None

        return derive_keyed_schedule(self.prior_key, self.max_slots, self.bank.n)


@dataclass(frozen=True, slots=True, eq=False)
class SlotTrace:
    """Represents everything that happened on the line in one slot.

    Indices are None when the resistances come from a free walk.
    """

    u_a: NoiseSeries
    u_b: NoiseSeries
    channel: LoopSample | EndpointSample
    r_a: float
    r_b: float
    r_a_index: int | None
    r_b_index: int | None
    wire_resistance: float = 0.0

    def __len__(self) -> int:
        """Return the number of samples."""
        return len(self.channel)


@dataclass(frozen=True, slots=True, eq=False)
class PartyView:
    """Represents what one party measures at its own terminal.

    The current is the one flowing out of the own terminal into the
    line, so u_terminal = own - i_out * r_own holds samplewise.
    """

    own: FloatArray
    u_terminal: FloatArray
    i_out: FloatArray
    r_own: float
    r_wire: float = 0.0

    def __post_init__(self) -> None:
        """Check that all series are of equal length."""
        lengths = {np.size(self.own), np.size(self.u_terminal), np.size(self.i_out)}
        if len(lengths) > 1:
            raise ContractError(
                translation_key="length_mismatch",
                translation_placeholders={
                    "left": np.size(self.own),
                    "right": np.size(self.i_out),
                },
            )

    @classmethod
    def from_trace(cls, trace: SlotTrace, party: Party) -> PartyView:
        """Return the view of a party on the slot trace."""
        channel = trace.channel
        if party == Party.ALICE:
            u_terminal = (
                channel.u_ch if isinstance(channel, LoopSample) else channel.u_end_a
            )
            return cls(
                own=trace.u_a.samples,
                u_terminal=u_terminal,
                i_out=-channel.i_ch,
                r_own=trace.r_a,
                r_wire=trace.wire_resistance,
            )

        u_terminal = (
            channel.u_ch if isinstance(channel, LoopSample) else channel.u_end_b
        )
        return cls(
            own=trace.u_b.samples,
            u_terminal=u_terminal,
            i_out=channel.i_ch,
            r_own=trace.r_b,
            r_wire=trace.wire_resistance,
        )

    @property
    def ms_u(self) -> float:
        """Return the mean-square terminal voltage."""
        return mean_square(self.u_terminal)

    @property
    def ms_i(self) -> float:
        """Return the mean-square current."""
        return mean_square(self.i_out)


@dataclass(frozen=True, slots=True)
class Hypothesis:
    """Represents an assumed far-end resistance."""

    assumed_other_resistance: float
    other_index: int | None = None

    def __post_init__(self) -> None:
        """Validate the resistance."""
        if (
            not math.isfinite(self.assumed_other_resistance)
            or self.assumed_other_resistance <= 0
        ):
            raise ParameterError(
                translation_key="invalid_resistance",
                translation_placeholders={"resistance": self.assumed_other_resistance},
            )

    def alpha(self, r_own: float) -> float:
        """Return the assumed resistance ratio, other over own."""
        return self.assumed_other_resistance / r_own


@dataclass(frozen=True, slots=True, eq=False)
class ReducedTrace:
    """Represents the channel noise minus the own predicted contribution."""

    u_star: FloatArray
    i_star: FloatArray


@dataclass(frozen=True, slots=True)
class HypothesisResult:
    """Represents the outcome of one hypothesis test."""

    hypothesis: Hypothesis
    corr_u: Correlation
    corr_i: Correlation
    accept: bool


@dataclass(frozen=True, slots=True, kw_only=True)
class SlotOutcome:
    """Represents one party's decision about a slot.

    The own bit is the table bit of (own, other) seen from the party,
    so in a secure slot the two parties hold complementary own bits.
    """

    party: Party
    situation: SituationClass
    other_index: int | None
    own_bit: int | None = None
    discard: DiscardReason | None = None
    hypothesis_accepted: float | None = None

    @property
    def secure(self) -> bool:
        """Return True if the party keeps the slot."""
        return self.discard is None


@dataclass(frozen=True, slots=True, eq=False)
class TransientWalk:
    """Represents the resistance paths and noise of a transient walk."""

    r_a_path: FloatArray
    r_b_path: FloatArray
    u_a: NoiseSeries
    u_b: NoiseSeries
    reached_a: bool
    reached_b: bool

    @property
    def cancel(self) -> bool:
        """Return True if either walk missed its target."""
        return not (self.reached_a and self.reached_b)


@dataclass(frozen=True, slots=True, kw_only=True, eq=False)
class SlotResult:
    """Represents one slot with both decisions and the ground truth."""

    slot_index: int
    variant: Variant
    truth: tuple[int | None, int | None]
    alice: SlotOutcome
    bob: SlotOutcome
    table: TruthTable
    trace: SlotTrace | None = None
    walk: TransientWalk | None = None

    @property
    def kept(self) -> bool:
        """Return True if both parties keep the slot."""
        return self.alice.secure and self.bob.secure

    @property
    def discard(self) -> DiscardReason | None:
        """Return the first discard reason announced."""
        return self.alice.discard or self.bob.discard

    @property
    def bit_alice(self) -> int | None:
        """Return Alice's key bit."""
        return self.alice.own_bit if self.kept else None

    @property
    def bit_bob(self) -> int | None:
        """Return Bob's key bit, the inverse of his own bit."""
        if not self.kept or self.bob.own_bit is None:
            return None

        return 1 - self.bob.own_bit

    @property
    def true_situation(self) -> SituationLabel | None:
        """Return the situation label of the true index pair."""
        r_a_index, r_b_index = self.truth
        if r_a_index is None or r_b_index is None:
            return None

        return situation_label(r_a_index, r_b_index, self.table.n)

    @property
    def mean_margin(self) -> float:
        """Return the mean decision margin of both parties."""
        return (self.alice.situation.margin + self.bob.situation.margin) / 2

    def without_trace(self) -> SlotResult:
        """Return the result with the sample series released."""
        return replace(self, trace=None, walk=None)


@dataclass(slots=True)
class KeyExchangeResult:
    """Represents the keys both parties gathered and the slot log."""

    key_alice: list[int] = field(default_factory=list)
    key_bob: list[int] = field(default_factory=list)
    slots: list[SlotResult] = field(default_factory=list)

    @property
    def bit_errors(self) -> int:
        """Return the number of mismatched key bits."""
        return sum(a != b for a, b in zip(self.key_alice, self.key_bob, strict=True))

    @property
    def ber(self) -> float:
        """Return the bit error rate between the two keys."""
        return self.bit_errors / len(self.key_alice) if self.key_alice else 0.0


def reduce_channel_noise(view: PartyView, hypothesis: Hypothesis) -> ReducedTrace:
    """Subtract the own predicted contribution under the hypothesis.

    Under the correct hypothesis only the far-end generator remains.
    For every hypothesis u_star = -r_own * i_star.
    """
    loop = view.r_own + hypothesis.assumed_other_resistance + view.r_wire
    i_star = view.i_out - view.own / loop
    u_star = view.u_terminal - view.own * (loop - view.r_own) / loop
    return ReducedTrace(u_star=u_star, i_star=i_star)


def hypothesis_test(
    own_series: FloatArray,
    reduced: ReducedTrace,
    hypothesis: Hypothesis,
    sigmas: float = DEFAULT_INDEPENDENCE_SIGMAS,
) -> HypothesisResult:
    """Test the reduced noise for independence from the own noise."""
    corr_u = cross_correlation(own_series, reduced.u_star)
    corr_i = cross_correlation(own_series, reduced.i_star)
    bound = independence_bound(np.size(own_series), sigmas)
    accept = abs(corr_u.normalized) < bound and abs(corr_i.normalized) < bound
    return HypothesisResult(
        hypothesis=hypothesis, corr_u=corr_u, corr_i=corr_i, accept=accept
    )


def enumerate_hypotheses(
    own_index: int, bank: ResistorBank, variant: Variant
) -> tuple[Hypothesis, ...]:
    """Return one hypothesis per candidate far-end resistor."""
    bank.resistance(own_index)
    if variant not in INTELLIGENT_VARIANTS:
        return ()

    return tuple(
        Hypothesis(assumed_other_resistance=bank.resistance(j), other_index=j)
        for j in bank.indices
    )


def _secure_outcome(
    party: Party,
    own_index: int,
    estimate: PairEstimate,
    other_index: int,
    table: TruthTable,
    hypothesis_accepted: float | None = None,
) -> SlotOutcome:
    """Return the outcome for a decided far-end index."""
    situation = SituationClass(
        label=situation_label(own_index, other_index, table.n), margin=estimate.margin
    )
    if other_index == own_index:
        return SlotOutcome(
            party=party,
            situation=situation,
            other_index=other_index,
            discard=DiscardReason.INSECURE,
            hypothesis_accepted=hypothesis_accepted,
        )

    return SlotOutcome(
        party=party,
        situation=situation,
        other_index=other_index,
        own_bit=interpret((own_index, other_index), table),
        hypothesis_accepted=hypothesis_accepted,
    )


def _discarded_outcome(
    party: Party,
    own_index: int,
    estimate: PairEstimate,
    reason: DiscardReason,
    table: TruthTable,
) -> SlotOutcome:
    """Return an undecided outcome."""
    return SlotOutcome(
        party=party,
        situation=SituationClass(
            label=situation_label(own_index, estimate.other_index, table.n),
            margin=estimate.margin,
        ),
        other_index=None,
        discard=reason,
    )


def decide_slot_levels(
    party: Party,
    own_index: int,
    estimate: PairEstimate,
    table: TruthTable,
    discard_margin: float = DEFAULT_DISCARD_MARGIN,
) -> SlotOutcome:
    """Decide a slot from the mean-square level classification alone."""
    if estimate.margin < discard_margin:
        return _discarded_outcome(
            party, own_index, estimate, DiscardReason.INCONCLUSIVE, table
        )

    return _secure_outcome(party, own_index, estimate, estimate.other_index, table)


def decide_slot_intelligent(
    party: Party,
    own_index: int,
    estimate: PairEstimate,
    results: Sequence[HypothesisResult],
    table: TruthTable,
    discard_margin: float = DEFAULT_DISCARD_MARGIN,
) -> SlotOutcome:
    """Decide a slot from the hypothesis tests with the levels as a veto."""
    if len({result.hypothesis.assumed_other_resistance for result in results}) < 2:
        return decide_slot_levels(party, own_index, estimate, table, discard_margin)

    accepted = [result for result in results if result.accept]
    if len(accepted) != 1:
        return _discarded_outcome(
            party, own_index, estimate, DiscardReason.INCONCLUSIVE, table
        )

    hypothesis = accepted[0].hypothesis
    if hypothesis.other_index != estimate.other_index or hypothesis.other_index is None:
        return _discarded_outcome(
            party, own_index, estimate, DiscardReason.INCONSISTENT, table
        )

    return _secure_outcome(
        party,
        own_index,
        estimate,
        hypothesis.other_index,
        table,
        hypothesis_accepted=hypothesis.assumed_other_resistance,
    )


def decide_party(
    config: ProtocolConfig,
    trace: SlotTrace,
    party: Party,
    own_index: int,
    table: TruthTable,
) -> SlotOutcome:
    """Return the decision a party takes from its own measurements."""
    view = PartyView.from_trace(trace, party)
    estimate = classify_other(
        view.ms_u,
        view.ms_i,
        own_index,
        config.bank,
        config.params,
        config.wire_resistance,
    )
    if not config.intelligent:
        return decide_slot_levels(
            party, own_index, estimate, table, config.discard_margin
        )

    results = [
        hypothesis_test(
            view.own,
            reduce_channel_noise(view, hypothesis),
            hypothesis,
            config.independence_sigmas,
        )
        for hypothesis in enumerate_hypotheses(own_index, config.bank, config.variant)
    ]
    return decide_slot_intelligent(
        party, own_index, estimate, results, table, config.discard_margin
    )


def _walk_step(
    value: float,
    sign: float,
    step: float,
    target: float | None,
    low: float,
    high: float,
) -> float:
    """Return the next resistance of a reflecting walk that snaps to the target."""
    moved = value + sign * step
    if target is not None and min(value, moved) <= target <= max(value, moved):
        return target

    if moved > high:
        moved = 2 * high - moved
    elif moved < low:
        moved = 2 * low - moved

    if target is not None and min(value, moved) <= target <= max(value, moved):
        return target

    return min(max(moved, low), high)


def _walk_path(
    target: float | None,
    bank: ResistorBank,
    tcfg: TransientConfig,
    stream: RngStream,
) -> tuple[FloatArray, bool]:
    """Return the per-sample resistance path and whether it reached the target."""
    path = np.empty(tcfg.t_r + 1)
    value = bank.midpoint
    reached = target is not None and value == target
    signs = stream.generator.choice((-1.0, 1.0), size=tcfg.t_r + 1)
    path[0] = value
    for t in range(1, tcfg.t_r + 1):
        stepping = t >= tcfg.hold + tcfg.step_interval
        if not reached and stepping and (t - tcfg.hold) % tcfg.step_interval == 0:
            value = _walk_step(
                value, signs[t], tcfg.step_size, target, bank.low, bank.high
            )
            reached = target is not None and value == target
        path[t] = value

    return path, reached or target is None


def run_transient_walk(
    config: ProtocolConfig,
    tcfg: TransientConfig,
    targets: tuple[float, float] | None,
    stream: RngStream,
) -> TransientWalk:
    """Walk both resistances from the bank midpoint toward their targets.

    Without targets both walks run for the full duration.
    """
    bank = config.bank
    for target in targets or ():
        if not bank.low <= target <= bank.high:
            raise ParameterError(
                translation_key="target_out_of_range",
                translation_placeholders={
                    "target": target,
                    "low": bank.low,
                    "high": bank.high,
                },
            )

    target_a, target_b = targets if targets is not None else (None, None)
    alice = fork_stream(stream, Party.ALICE)
    bob = fork_stream(stream, Party.BOB)
    r_a_path, reached_a = _walk_path(target_a, bank, tcfg, alice)
    r_b_path, reached_b = _walk_path(target_b, bank, tcfg, bob)
    walk = TransientWalk(
        r_a_path=r_a_path,
        r_b_path=r_b_path,
        u_a=sample_noise_profile(r_a_path, config.params, alice),
        u_b=sample_noise_profile(r_b_path, config.params, bob),
        reached_a=reached_a,
        reached_b=reached_b,
    )
    if walk.cancel:
        _LOGGER.debug(
            "Transient walk cancelled (alice reached: %s, bob reached: %s)",
            reached_a,
            reached_b,
        )

    return walk


def sample_trace(
    resistances: tuple[float, float],
    params: NoiseParams,
    n_samples: int,
    stream: RngStream,
    *,
    wire_resistance: float = 0.0,
    indices: tuple[int | None, int | None] = (None, None),
) -> SlotTrace:
    """Sample both generators from their party streams and solve the loop."""
    r_a, r_b = resistances
    u_a = sample_noise(r_a, params, n_samples, fork_stream(stream, Party.ALICE))
    u_b = sample_noise(r_b, params, n_samples, fork_stream(stream, Party.BOB))
    channel: LoopSample | EndpointSample
    if wire_resistance > 0:
        channel = solve_loop_nonideal(
            u_a.samples, u_b.samples, r_a, r_b, wire_resistance
        )
    else:
        channel = solve_loop(u_a.samples, u_b.samples, r_a, r_b)

    return SlotTrace(
        u_a=u_a,
        u_b=u_b,
        channel=channel,
        r_a=r_a,
        r_b=r_b,
        r_a_index=indices[0],
        r_b_index=indices[1],
        wire_resistance=wire_resistance,
    )


def far_end_resistance(
    ms_i: float, unit_power: float, r_own: float, r_wire: float = 0.0
) -> float:
    """Return the far-end resistance that explains the mean-square current.

    The loop current obeys <I^2> = unit * S / (S + r_w)^2 with
    S = r_own + r_other. The larger root is the physical one while
    S >= r_w, which the free-walk wire limit guarantees.
    """
    if not ms_i > 0:
        return r_own

    x = ms_i / unit_power
    discriminant = max(1 - 4 * x * r_wire, 0.0)
    loop = (1 - 2 * x * r_wire + math.sqrt(discriminant)) / (2 * x)
    return loop - r_own


def _free_walk_outcome(
    config: ProtocolConfig, trace: SlotTrace, party: Party, table: TruthTable
) -> SlotOutcome:
    """Decide a free-walk slot from the estimated far-end resistance."""
    view = PartyView.from_trace(trace, party)
    bank = config.bank
    estimate = far_end_resistance(
        view.ms_i, config.params.unit_power, view.r_own, view.r_wire
    )
    difference = view.r_own - estimate
    margin = min(abs(difference) / bank.smallest_gap, 1.0)
    label = SituationLabel.LL if view.r_own <= bank.midpoint else SituationLabel.HH
    if margin < 0.5:
        return SlotOutcome(
            party=party,
            situation=SituationClass(label=label, margin=margin),
            other_index=None,
            discard=DiscardReason.INCONCLUSIVE,
        )

    return SlotOutcome(
        party=party,
        situation=SituationClass(label=SituationLabel.MID, margin=margin),
        other_index=None,
        own_bit=int(difference > 0) ^ table.orientation,
    )


def run_slot(
    config: ProtocolConfig,
    slot_rng: RngStream,
    table: TruthTable,
    *,
    forced_indices: tuple[int, int] | None = None,
    slot_index: int = 0,
) -> SlotResult:
    """Run one clock period of the exchange."""
    bank = config.bank
    tcfg = config.transient
    if tcfg is not None and tcfg.free_walk:
        walk = run_transient_walk(
            config, tcfg, None, fork_stream(slot_rng, "transient")
        )
        resistances = (float(walk.r_a_path[-1]), float(walk.r_b_path[-1]))
        trace = sample_trace(
            resistances,
            config.params,
            config.samples_per_slot,
            slot_rng,
            wire_resistance=config.wire_resistance,
        )
        return SlotResult(
            slot_index=slot_index,
            variant=config.variant,
            truth=(None, None),
            alice=_free_walk_outcome(config, trace, Party.ALICE, table),
            bob=_free_walk_outcome(config, trace, Party.BOB, table),
            table=table,
            trace=trace,
            walk=walk,
        )

    if forced_indices is None:
        choice = fork_stream(slot_rng, "choice").generator
        r_a_index, r_b_index = (int(i) for i in choice.integers(1, bank.n + 1, size=2))
    else:
        r_a_index, r_b_index = forced_indices

    resistances = (bank.resistance(r_a_index), bank.resistance(r_b_index))
    walk = None
    if tcfg is not None:
        walk = run_transient_walk(
            config, tcfg, resistances, fork_stream(slot_rng, "transient")
        )
        if walk.cancel:
            cancelled = SituationClass(label=SituationLabel.MID, margin=0.0)
            return SlotResult(
                slot_index=slot_index,
                variant=config.variant,
                truth=(r_a_index, r_b_index),
                alice=SlotOutcome(
                    party=Party.ALICE,
                    situation=cancelled,
                    other_index=None,
                    discard=DiscardReason.CANCELLED,
                ),
                bob=SlotOutcome(
                    party=Party.BOB,
                    situation=cancelled,
                    other_index=None,
                    discard=DiscardReason.CANCELLED,
                ),
                table=table,
                walk=walk,
            )

    trace = sample_trace(
        resistances,
        config.params,
        config.samples_per_slot,
        slot_rng,
        wire_resistance=config.wire_resistance,
        indices=(r_a_index, r_b_index),
    )
    return SlotResult(
        slot_index=slot_index,
        variant=config.variant,
        truth=(r_a_index, r_b_index),
        alice=decide_party(config, trace, Party.ALICE, r_a_index, table),
        bob=decide_party(config, trace, Party.BOB, r_b_index, table),
        table=table,
        trace=trace,
        walk=walk,
    )


def run_key_exchange(
    config: ProtocolConfig,
    n_bits: int,
    root_seed: int,
    *,
    callback: Callable[[SlotResult], None] | None = None,
    keep_traces: bool = False,
) -> KeyExchangeResult:
    """Run slots until both parties hold n_bits key bits."""
    if n_bits < 1:
        raise ConfigurationError(
            translation_key="invalid_bit_count",
            translation_placeholders={"n_bits": n_bits},
        )

    _LOGGER.debug(
        "Starting %s key exchange for %d bits (seed %d)",
        config.variant,
        n_bits,
        root_seed,
    )
    root = RngStream(root_seed)
    schedule = config.schedule()
    public = build_public_table(config.bank.n)
    result = KeyExchangeResult()
    slot_index = 0
    while len(result.key_alice) < n_bits:
        if slot_index >= config.max_slots:
            raise ConfigurationError(
                translation_key="slot_budget_exhausted",
                translation_placeholders={
                    "bits": len(result.key_alice),
                    "n_bits": n_bits,
                    "max_slots": config.max_slots,
                },
            )

        table = public if schedule is None else schedule.table_for(slot_index)
        slot = run_slot(
            config,
            fork_stream(root, f"slot-{slot_index}"),
            table,
            slot_index=slot_index,
        )
        if callback is not None:
            callback(slot)

        if slot.kept and slot.bit_alice is not None and slot.bit_bob is not None:
            result.key_alice.append(slot.bit_alice)
            result.key_bob.append(slot.bit_bob)

        result.slots.append(slot if keep_traces else slot.without_trace())
        slot_index += 1

    _LOGGER.info(
        "Gathered %d bits in %d slots (BER %.4g)",
        len(result.key_alice),
        slot_index,
        result.ber,
    )
    return result
