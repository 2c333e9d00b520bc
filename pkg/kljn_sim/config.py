"""Contains the run configuration schema and loaders."""

from __future__ import annotations

from dataclasses import dataclass
import json
import logging
from pathlib import Path
from typing import Any, Final

import voluptuous as vol

from .const import (
    CONF_ADIABATIC_THRESHOLD,
    CONF_BANDWIDTH,
    CONF_BANK,
    CONF_BOLTZMANN,
    CONF_DIRECTORY,
    CONF_DISCARD_MARGIN,
    CONF_EVE_WINDOW,
    CONF_FREE_WALK,
    CONF_HOLD,
    CONF_INDEPENDENCE_SIGMAS,
    CONF_KEY_EXCHANGE,
    CONF_MAX_SLOTS,
    CONF_N_BITS,
    CONF_NOISE,
    CONF_NORMALIZED,
    CONF_OUTPUT,
    CONF_PARAMETER,
    CONF_PRIOR_KEY,
    CONF_PROTOCOL,
    CONF_SAMPLES_PER_SLOT,
    CONF_SEED,
    CONF_SLOT_LOG,
    CONF_SLOTS_PER_POINT,
    CONF_STEP_INTERVAL,
    CONF_STEP_SIZE,
    CONF_SWEEP,
    CONF_T_EFF,
    CONF_T_R,
    CONF_TRANSIENT,
    CONF_VALUES,
    CONF_VARIANT,
    CONF_WIRE_RESISTANCE,
    CONF_WORKERS,
    BOLTZMANN,
    DEFAULT_ADIABATIC_THRESHOLD,
    DEFAULT_DISCARD_MARGIN,
    DEFAULT_INDEPENDENCE_SIGMAS,
    DEFAULT_MAX_SLOTS,
    DEFAULT_N_BITS,
    DEFAULT_OUTPUT_DIRECTORY,
    DEFAULT_SAMPLES_PER_SLOT,
    DEFAULT_SEED,
    DEFAULT_SLOTS_PER_POINT,
    DEFAULT_STEP_INTERVAL,
    DEFAULT_WIRE_RESISTANCE,
    SweepParameter,
    Variant,
)
from .exceptions import ConfigurationError, KljnError
from .experiments import SweepSpec, apply_sweep_value
from .noise import NoiseParams
from .protocol import ProtocolConfig, TransientConfig
from .truthtable import ResistorBank

MAX_SEED: Final = 2**64 - 1

_LOGGER = logging.getLogger(__name__)

positive_float = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
non_negative_float = vol.All(vol.Coerce(float), vol.Range(min=0))
positive_int = vol.All(vol.Coerce(int), vol.Range(min=1))
non_negative_int = vol.All(vol.Coerce(int), vol.Range(min=0))

NOISE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_T_EFF, default=1.0): positive_float,
        vol.Optional(CONF_BANDWIDTH, default=1.0): positive_float,
        vol.Optional(CONF_BOLTZMANN, default=BOLTZMANN): positive_float,
        vol.Optional(CONF_NORMALIZED, default=False): bool,
    }
)

PROTOCOL_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_VARIANT): vol.All(str, vol.In([str(v) for v in Variant])),
        vol.Required(CONF_BANK): vol.All([positive_float], vol.Length(min=2)),
        vol.Optional(CONF_NOISE, default={}): NOISE_SCHEMA,
        vol.Optional(
            CONF_SAMPLES_PER_SLOT, default=DEFAULT_SAMPLES_PER_SLOT
        ): vol.All(vol.Coerce(int), vol.Range(min=2)),
        vol.Optional(CONF_PRIOR_KEY, default=None): vol.Any(
            None, vol.All([vol.In((0, 1))], vol.Length(min=1))
        ),
        vol.Optional(
            CONF_WIRE_RESISTANCE, default=DEFAULT_WIRE_RESISTANCE
        ): non_negative_float,
        vol.Optional(
            CONF_DISCARD_MARGIN, default=DEFAULT_DISCARD_MARGIN
        ): non_negative_float,
        vol.Optional(
            CONF_INDEPENDENCE_SIGMAS, default=DEFAULT_INDEPENDENCE_SIGMAS
        ): positive_float,
        vol.Optional(CONF_MAX_SLOTS, default=DEFAULT_MAX_SLOTS): positive_int,
    }
)

TRANSIENT_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_T_R): non_negative_int,
        vol.Required(CONF_STEP_SIZE): positive_float,
        vol.Optional(CONF_STEP_INTERVAL, default=DEFAULT_STEP_INTERVAL): positive_int,
        vol.Optional(
            CONF_ADIABATIC_THRESHOLD, default=DEFAULT_ADIABATIC_THRESHOLD
        ): positive_float,
        vol.Optional(CONF_HOLD, default=0): non_negative_int,
        vol.Optional(CONF_FREE_WALK, default=False): bool,
    }
)

KEY_EXCHANGE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_N_BITS, default=DEFAULT_N_BITS): positive_int,
        vol.Optional(CONF_EVE_WINDOW, default=None): vol.Any(None, positive_int),
    }
)

SWEEP_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_PARAMETER): vol.All(
            str, vol.In([str(p) for p in SweepParameter])
        ),
        vol.Required(CONF_VALUES): vol.All(list, vol.Length(min=1)),
        vol.Optional(
            CONF_SLOTS_PER_POINT, default=DEFAULT_SLOTS_PER_POINT
        ): positive_int,
        vol.Optional(CONF_EVE_WINDOW, default=None): vol.Any(None, positive_int),
        vol.Optional(CONF_WORKERS, default=None): vol.Any(None, positive_int),
    }
)

OUTPUT_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_DIRECTORY, default=DEFAULT_OUTPUT_DIRECTORY): str,
        vol.Optional(CONF_SLOT_LOG, default=False): bool,
    }
)

RUN_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_PROTOCOL): PROTOCOL_SCHEMA,
        vol.Optional(CONF_TRANSIENT): TRANSIENT_SCHEMA,
        vol.Optional(CONF_KEY_EXCHANGE, default={}): KEY_EXCHANGE_SCHEMA,
        vol.Optional(CONF_SWEEP): SWEEP_SCHEMA,
        vol.Optional(CONF_OUTPUT, default={}): OUTPUT_SCHEMA,
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0, max=MAX_SEED)
        ),
    }
)


@dataclass(frozen=True, kw_only=True)
class RunConfig:
    """Represents a validated run configuration."""

    protocol: ProtocolConfig
    n_bits: int
    eve_window: int | None
    sweep: SweepSpec | None
    directory: Path
    slot_log: bool
    seed: int


def _format_path(path: list[Any]) -> str:
    """Return a voluptuous error path as data['a']['b']."""
    return "data" + "".join(f"[{key!r}]" for key in path)


def validate_run_config(data: Any) -> dict[str, Any]:
    """Validate a decoded configuration document."""
    try:
        validated: dict[str, Any] = RUN_CONFIG_SCHEMA(data)
    except vol.Invalid as err:
        raise ConfigurationError(
            translation_key="config_invalid",
            translation_placeholders={
                "path": _format_path(err.path),
                "error": err.msg,
            },
        ) from err

    return validated


def load_run_config(path: Path) -> dict[str, Any]:
    """Read and validate a JSON configuration file."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigurationError(
            translation_key="config_unreadable",
            translation_placeholders={"file": str(path), "error": err.strerror},
        ) from err

    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigurationError(
            translation_key="config_syntax",
            translation_placeholders={
                "file": str(path),
                "line": err.lineno,
                "column": err.colno,
                "error": err.msg,
            },
        ) from err

    _LOGGER.debug("Loaded configuration from %s", path)
    return validate_run_config(data)


def build_transient_config(section: dict[str, Any]) -> TransientConfig:
    """Return the transient settings of a validated section."""
    return TransientConfig(
        t_r=section[CONF_T_R],
        step_size=section[CONF_STEP_SIZE],
        step_interval=section[CONF_STEP_INTERVAL],
        adiabatic_threshold=section[CONF_ADIABATIC_THRESHOLD],
        hold=section[CONF_HOLD],
        free_walk=section[CONF_FREE_WALK],
    )


def build_protocol_config(
    section: dict[str, Any], transient: dict[str, Any] | None = None
) -> ProtocolConfig:
    """Return the protocol configuration of a validated section."""
    noise = section[CONF_NOISE]
    prior_key = section[CONF_PRIOR_KEY]
    return ProtocolConfig(
        variant=Variant(section[CONF_VARIANT]),
        bank=ResistorBank.from_values(section[CONF_BANK]),
        params=NoiseParams(
            t_eff=noise[CONF_T_EFF],
            bandwidth=noise[CONF_BANDWIDTH],
            boltzmann=noise[CONF_BOLTZMANN],
            normalized=noise[CONF_NORMALIZED],
        ),
        samples_per_slot=section[CONF_SAMPLES_PER_SLOT],
        prior_key=None if prior_key is None else tuple(prior_key),
        wire_resistance=section[CONF_WIRE_RESISTANCE],
        discard_margin=section[CONF_DISCARD_MARGIN],
        independence_sigmas=section[CONF_INDEPENDENCE_SIGMAS],
        max_slots=section[CONF_MAX_SLOTS],
        transient=None if transient is None else build_transient_config(transient),
    )


def build_sweep_spec(
    base: ProtocolConfig, section: dict[str, Any], seed: int
) -> SweepSpec:
    """Return the sweep of a validated section.

    Every value is applied to the base configuration up front, so a bad
    value is rejected before any point runs.
    """
    spec = SweepSpec(
        base=base,
        parameter=section[CONF_PARAMETER],
        values=tuple(section[CONF_VALUES]),
        slots_per_point=section[CONF_SLOTS_PER_POINT],
        root_seed=seed,
        eve_window=section[CONF_EVE_WINDOW],
        workers=section[CONF_WORKERS],
    )
    for value in spec.values:
        try:
            apply_sweep_value(base, spec.parameter, value)
        except (TypeError, ValueError) as err:
            if isinstance(err, KljnError):
                raise

            raise ConfigurationError(
                translation_key="invalid_config_value",
                translation_placeholders={"value": value, "parameter": spec.parameter},
            ) from err

    return spec


def build_run_config(
    data: dict[str, Any],
    *,
    seed: int | None = None,
    directory: Path | None = None,
    slot_log: bool | None = None,
) -> RunConfig:
    """Return the run configuration with command-line overrides applied."""
    if seed is not None and not 0 <= seed <= MAX_SEED:
        raise ConfigurationError(
            translation_key="invalid_config_value",
            translation_placeholders={"value": seed, "parameter": CONF_SEED},
        )

    root_seed = data[CONF_SEED] if seed is None else seed
    protocol = build_protocol_config(data[CONF_PROTOCOL], data.get(CONF_TRANSIENT))
    sweep = data.get(CONF_SWEEP)
    output = data[CONF_OUTPUT]
    key_exchange = data[CONF_KEY_EXCHANGE]
    return RunConfig(
        protocol=protocol,
        n_bits=key_exchange[CONF_N_BITS],
        eve_window=key_exchange[CONF_EVE_WINDOW],
        sweep=None if sweep is None else build_sweep_spec(protocol, sweep, root_seed),
        directory=Path(output[CONF_DIRECTORY]) if directory is None else directory,
        slot_log=output[CONF_SLOT_LOG] if slot_log is None else slot_log,
        seed=root_seed,
    )
