"""Constants for the KLJN key exchange simulator."""

from enum import StrEnum, unique
from typing import Final

DOMAIN: Final = "kljn_sim"

# Physical constants.
BOLTZMANN: Final = 1.380649e-23

# Slot log and metrics attributes.
ATTR_BER: Final = "ber"
ATTR_BIT_ALICE: Final = "bit_alice"
ATTR_BIT_BOB: Final = "bit_bob"
ATTR_DISCARD_INCONCLUSIVE: Final = "discard_inconclusive"
ATTR_DISCARD_INSECURE: Final = "discard_insecure"
ATTR_DISCARD_REASON: Final = "discard_reason"
ATTR_EVE_BIT_CI: Final = "eve_bit_ci"
ATTR_EVE_BIT_GUESS: Final = "eve_bit_guess"
ATTR_EVE_BIT_SUCCESS: Final = "eve_bit_success"
ATTR_EVE_CONFIDENCE: Final = "eve_confidence"
ATTR_EVE_SITUATION: Final = "eve_situation"
ATTR_EVE_SLOT_ACC: Final = "eve_slot_acc"
ATTR_KEPT: Final = "kept"
ATTR_MEAN_MARGIN: Final = "mean_margin"
ATTR_PARAM_NAME: Final = "param_name"
ATTR_PARAM_VALUE: Final = "param_value"
ATTR_POINT_ID: Final = "point_id"
ATTR_R_A_INDEX: Final = "r_a_index"
ATTR_R_B_INDEX: Final = "r_b_index"
ATTR_SECURE_FRACTION: Final = "secure_fraction"
ATTR_SEED: Final = "seed"
ATTR_SLOT_INDEX: Final = "slot_index"
ATTR_SLOTS: Final = "slots"
ATTR_VARIANT: Final = "variant"

METRICS_COLUMNS: Final[tuple[str, ...]] = (
    ATTR_POINT_ID,
    ATTR_PARAM_NAME,
    ATTR_PARAM_VALUE,
    ATTR_SLOTS,
    ATTR_BER,
    ATTR_SECURE_FRACTION,
    ATTR_DISCARD_INCONCLUSIVE,
    ATTR_DISCARD_INSECURE,
    ATTR_EVE_BIT_SUCCESS,
    ATTR_EVE_BIT_CI,
    ATTR_EVE_SLOT_ACC,
    ATTR_MEAN_MARGIN,
    ATTR_SEED,
)

SLOT_LOG_COLUMNS: Final[tuple[str, ...]] = (
    ATTR_SLOT_INDEX,
    ATTR_VARIANT,
    ATTR_R_A_INDEX,
    ATTR_R_B_INDEX,
    ATTR_KEPT,
    ATTR_DISCARD_REASON,
    ATTR_BIT_ALICE,
    ATTR_BIT_BOB,
    ATTR_EVE_SITUATION,
    ATTR_EVE_BIT_GUESS,
    ATTR_EVE_CONFIDENCE,
)

# Run configuration keys.
CONF_ADIABATIC_THRESHOLD: Final = "adiabatic_threshold"
CONF_BANDWIDTH: Final = "bandwidth"
CONF_BANK: Final = "bank"
CONF_BOLTZMANN: Final = "boltzmann"
CONF_DIRECTORY: Final = "directory"
CONF_DISCARD_MARGIN: Final = "discard_margin"
CONF_EVE_WINDOW: Final = "eve_window"
CONF_FREE_WALK: Final = "free_walk"
CONF_HOLD: Final = "hold"
CONF_INDEPENDENCE_SIGMAS: Final = "independence_sigmas"
CONF_KEY_EXCHANGE: Final = "key_exchange"
CONF_MAX_SLOTS: Final = "max_slots"
CONF_N_BITS: Final = "n_bits"
CONF_NOISE: Final = "noise"
CONF_NORMALIZED: Final = "normalized"
CONF_OUTPUT: Final = "output"
CONF_PARAMETER: Final = "parameter"
CONF_PRIOR_KEY: Final = "prior_key"
CONF_PROTOCOL: Final = "protocol"
CONF_SAMPLES_PER_SLOT: Final = "samples_per_slot"
CONF_SEED: Final = "seed"
CONF_SLOT_LOG: Final = "slot_log"
CONF_SLOTS_PER_POINT: Final = "slots_per_point"
CONF_STEP_INTERVAL: Final = "step_interval"
CONF_STEP_SIZE: Final = "step_size"
CONF_SWEEP: Final = "sweep"
CONF_T_EFF: Final = "t_eff"
CONF_T_R: Final = "t_r"
CONF_TRANSIENT: Final = "transient"
CONF_VALUES: Final = "values"
CONF_VARIANT: Final = "variant"
CONF_WIRE_RESISTANCE: Final = "wire_resistance"
CONF_WORKERS: Final = "workers"

# Defaults.
DEFAULT_ADIABATIC_THRESHOLD: Final = 0.1
DEFAULT_DISCARD_MARGIN: Final = 0.1
DEFAULT_INDEPENDENCE_SIGMAS: Final = 3.0
DEFAULT_MAX_SLOTS: Final = 100_000
DEFAULT_N_BITS: Final = 128
DEFAULT_OUTPUT_DIRECTORY: Final = "out"
DEFAULT_SAMPLES_PER_SLOT: Final = 10_000
DEFAULT_SEED: Final = 0
DEFAULT_SLOTS_PER_POINT: Final = 1000
DEFAULT_STEP_INTERVAL: Final = 1
DEFAULT_WIRE_RESISTANCE: Final = 0.0

# Output files.
METRICS_FILENAME: Final = "metrics.csv"
SLOT_LOG_FILENAME: Final = "slot_log.csv"
SWEEP_FILENAME: Final = "sweep.csv"

# Binomial confidence.
DEFAULT_CONFIDENCE: Final = 0.95

# Minimum trace length for a meaningful power balance.
POWER_BALANCE_MIN_SAMPLES: Final = 10_000

# Exit codes.
EXIT_OK: Final = 0
EXIT_FAILURE: Final = 1
EXIT_CONFIG_REJECTED: Final = 2


@unique
class Variant(StrEnum):
    """Contains protocol variants."""

    KLJN = "KLJN"
    IKLJN = "iKLJN"
    MKLJN = "MKLJN"
    KKLJN = "KKLJN"
    KMKLJN = "KMKLJN"
    IMKLJN = "iMKLJN"
    IKKLJN = "iKKLJN"
    IKMKLJN = "iKMKLJN"


# Hardware and table requirements per variant.
INTELLIGENT_VARIANTS: Final = frozenset(
    {Variant.IKLJN, Variant.IMKLJN, Variant.IKKLJN, Variant.IKMKLJN}
)
MULTIPLE_VARIANTS: Final = frozenset(
    {Variant.MKLJN, Variant.KMKLJN, Variant.IMKLJN, Variant.IKMKLJN}
)
KEYED_VARIANTS: Final = frozenset(
    {Variant.KKLJN, Variant.KMKLJN, Variant.IKKLJN, Variant.IKMKLJN}
)


@unique
class SituationLabel(StrEnum):
    """Contains channel situations."""

    LL = "LL"
    MID = "MID"
    HH = "HH"


@unique
class DiscardReason(StrEnum):
    """Contains slot discard reasons."""

    INSECURE = "insecure"
    INCONCLUSIVE = "inconclusive"
    INCONSISTENT = "inconsistent"
    CANCELLED = "cancelled"


@unique
class Party(StrEnum):
    """Contains parties on the line."""

    ALICE = "alice"
    BOB = "bob"


@unique
class TableSource(StrEnum):
    """Contains truth table sources."""

    PUBLIC = "public"
    KEYED = "keyed"


@unique
class SweepParameter(StrEnum):
    """Contains sweepable parameters."""

    SAMPLES_PER_SLOT = "samples_per_slot"
    R_W = "r_w"
    N = "n"
    VARIANT = "variant"
