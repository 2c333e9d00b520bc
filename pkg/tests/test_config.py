"""Test the run configuration loader."""

from pathlib import Path
from typing import Any

import pytest

from kljn_sim.config import build_run_config, load_run_config, validate_run_config
from kljn_sim.const import (
    DEFAULT_DISCARD_MARGIN,
    DEFAULT_N_BITS,
    DEFAULT_SEED,
    SweepParameter,
    Variant,
)
from kljn_sim.exceptions import ConfigurationError, KljnError, ParameterError
from tests.common import load_json_fixture, write_config


def test_load_simulate_config(simulate_config_file: Path) -> None:
    """Test loading a complete simulate configuration."""
    run = build_run_config(load_run_config(simulate_config_file))
    assert run.protocol.variant == Variant.KLJN
    assert run.protocol.bank.values == (1.0, 4.0)
    assert run.protocol.params.normalized
    assert run.protocol.samples_per_slot == 1000
    assert run.protocol.discard_margin == DEFAULT_DISCARD_MARGIN
    assert run.protocol.prior_key is None
    assert run.protocol.transient is None
    assert run.n_bits == 16
    assert run.eve_window is None
    assert run.sweep is None
    assert run.directory == Path("out")
    assert not run.slot_log
    assert run.seed == 7


def test_defaults_fill_optional_sections() -> None:
    """Test that only the protocol section is required."""
    data = validate_run_config({"protocol": {"variant": "KLJN", "bank": [1, 4]}})
    run = build_run_config(data)
    assert run.n_bits == DEFAULT_N_BITS
    assert run.seed == DEFAULT_SEED
    assert run.protocol.bank.values == (1.0, 4.0)


def test_load_sweep_config(sweep_config_file: Path) -> None:
    """Test that the sweep section becomes a sweep."""
    run = build_run_config(load_run_config(sweep_config_file))
    assert run.sweep is not None
    assert run.sweep.parameter == SweepParameter.SAMPLES_PER_SLOT
    assert run.sweep.values == (100, 200, 400)
    assert run.sweep.slots_per_point == 40
    assert run.sweep.root_seed == 11
    assert run.sweep.base == run.protocol


def test_missing_bank(tmp_path: Path) -> None:
    """Test that a missing bank is reported with its path."""
    path = write_config(tmp_path, load_json_fixture("missing_bank_config.json"))
    with pytest.raises(ConfigurationError, match="bank") as exc_info:
        load_run_config(path)

    assert exc_info.value.translation_key == "config_invalid"
    assert "data['protocol']['bank']" in str(exc_info.value)


def test_unknown_key(tmp_path: Path, simulate_data: dict[str, Any]) -> None:
    """Test that an unknown key is rejected."""
    simulate_data["protocol"]["colour"] = "blue"
    path = write_config(tmp_path, simulate_data)
    with pytest.raises(ConfigurationError, match="colour"):
        load_run_config(path)


@pytest.mark.parametrize(
    ("section", "key", "value"),
    [
        ("protocol", "variant", "QKD"),
        ("protocol", "bank", [1.0]),
        ("protocol", "samples_per_slot", 1),
        ("protocol", "wire_resistance", -0.1),
        ("protocol", "prior_key", [0, 2]),
        ("key_exchange", "n_bits", 0),
    ],
)
def test_invalid_values(
    tmp_path: Path, simulate_data: dict[str, Any], section: str, key: str, value: Any
) -> None:
    """Test that out-of-range values are rejected at their path."""
    simulate_data[section][key] = value
    path = write_config(tmp_path, simulate_data)
    with pytest.raises(ConfigurationError, match=key):
        load_run_config(path)


def test_malformed_json(tmp_path: Path) -> None:
    """Test that a syntax error names its position."""
    path = tmp_path / "broken.json"
    path.write_text('{\n  "protocol": {,\n}', encoding="utf-8")
    with pytest.raises(ConfigurationError, match="line 2") as exc_info:
        load_run_config(path)

    assert exc_info.value.translation_key == "config_syntax"


def test_unreadable_file(tmp_path: Path) -> None:
    """Test that a missing file is a configuration error."""
    with pytest.raises(ConfigurationError) as exc_info:
        load_run_config(tmp_path / "absent.json")

    assert exc_info.value.translation_key == "config_unreadable"
    assert "absent.json" in str(exc_info.value)


def test_overrides(simulate_config_file: Path, tmp_path: Path) -> None:
    """Test that command-line values win over the file."""
    run = build_run_config(
        load_run_config(simulate_config_file),
        seed=99,
        directory=tmp_path / "results",
        slot_log=True,
    )
    assert run.seed == 99
    assert run.directory == tmp_path / "results"
    assert run.slot_log


def test_seed_override_out_of_range(simulate_config_file: Path) -> None:
    """Test that a negative seed override is rejected."""
    with pytest.raises(ConfigurationError, match="seed"):
        build_run_config(load_run_config(simulate_config_file), seed=-1)


def test_keyed_variant_needs_prior_key(simulate_data: dict[str, Any]) -> None:
    """Test that the keyed variant fails without a prior key."""
    simulate_data["protocol"]["variant"] = "KKLJN"
    with pytest.raises(ConfigurationError) as exc_info:
        build_run_config(validate_run_config(simulate_data))

    assert exc_info.value.translation_key == "prior_key_required"


def test_keyed_variant_with_prior_key(simulate_data: dict[str, Any]) -> None:
    """Test that the keyed variant keeps its prior key."""
    simulate_data["protocol"]["variant"] = "KKLJN"
    simulate_data["protocol"]["prior_key"] = [1, 0, 1, 1]
    run = build_run_config(validate_run_config(simulate_data))
    assert run.protocol.keyed
    assert run.protocol.prior_key == (1, 0, 1, 1)


def test_decreasing_bank_rejected(simulate_data: dict[str, Any]) -> None:
    """Test that an unsorted bank fails when the protocol is built."""
    simulate_data["protocol"]["bank"] = [4.0, 1.0]
    with pytest.raises(ParameterError):
        build_run_config(validate_run_config(simulate_data))


def test_transient_section(simulate_data: dict[str, Any]) -> None:
    """Test that the transient section reaches the protocol."""
    simulate_data["transient"] = {"t_r": 100, "step_size": 0.05}
    run = build_run_config(validate_run_config(simulate_data))
    assert run.protocol.transient is not None
    assert run.protocol.transient.t_r == 100
    assert run.protocol.transient.step_size == 0.05
    assert not run.protocol.transient.free_walk


def test_unknown_sweep_parameter(tmp_path: Path) -> None:
    """Test that the schema rejects an unknown sweep parameter."""
    path = write_config(tmp_path, load_json_fixture("unknown_parameter_config.json"))
    with pytest.raises(ConfigurationError, match="parameter"):
        load_run_config(path)


@pytest.mark.parametrize(
    ("value", "expected"),
    [("many", ConfigurationError), (1, ParameterError)],
)
def test_bad_sweep_value(
    sweep_data: dict[str, Any], value: Any, expected: type[KljnError]
) -> None:
    """Test that sweep values are checked before any point runs."""
    sweep_data["sweep"] = {"parameter": "n", "values": [2, value]}
    with pytest.raises(expected):
        build_run_config(validate_run_config(sweep_data))
