"""Fixtures for the test suite."""

from pathlib import Path
from typing import Any

import pytest

from kljn_sim.const import Variant
from kljn_sim.noise import NoiseParams, RngStream
from kljn_sim.protocol import ProtocolConfig
from kljn_sim.truthtable import ResistorBank
from tests.common import load_json_fixture, write_config


@pytest.fixture(name="normalized_params")
def fixture_normalized_params() -> NoiseParams:
    """Return noise parameters in normalized units."""
    return NoiseParams.normalized_units()


@pytest.fixture(name="bank")
def fixture_bank() -> ResistorBank:
    """Return the classic two-resistor bank."""
    return ResistorBank.from_values((1.0, 4.0))


@pytest.fixture(name="multiple_bank")
def fixture_multiple_bank() -> ResistorBank:
    """Return a four-resistor bank."""
    return ResistorBank.geometric(1.0, 4.0, 4)


@pytest.fixture(name="stream")
def fixture_stream() -> RngStream:
    """Return a root stream at a fixed seed."""
    return RngStream(1234)


@pytest.fixture(name="kljn_config")
def fixture_kljn_config(
    bank: ResistorBank, normalized_params: NoiseParams
) -> ProtocolConfig:
    """Return a basic two-resistor configuration."""
    return ProtocolConfig(
        variant=Variant.KLJN,
        bank=bank,
        params=normalized_params,
        samples_per_slot=2000,
    )


@pytest.fixture(name="ikljn_config")
def fixture_ikljn_config(
    bank: ResistorBank, normalized_params: NoiseParams
) -> ProtocolConfig:
    """Return an intelligent two-resistor configuration."""
    return ProtocolConfig(
        variant=Variant.IKLJN,
        bank=bank,
        params=normalized_params,
        samples_per_slot=10_000,
    )


@pytest.fixture(name="mkljn_config")
def fixture_mkljn_config(
    multiple_bank: ResistorBank, normalized_params: NoiseParams
) -> ProtocolConfig:
    """Return a four-resistor configuration."""
    return ProtocolConfig(
        variant=Variant.MKLJN,
        bank=multiple_bank,
        params=normalized_params,
        samples_per_slot=5000,
    )


@pytest.fixture(name="simulate_data")
def fixture_simulate_data() -> dict[str, Any]:
    """Return a valid simulate configuration document."""
    return load_json_fixture("simulate_config.json")


@pytest.fixture(name="sweep_data")
def fixture_sweep_data() -> dict[str, Any]:
    """Return a valid sweep configuration document."""
    return load_json_fixture("sweep_config.json")


@pytest.fixture(name="simulate_config_file")
def fixture_simulate_config_file(
    tmp_path: Path, simulate_data: dict[str, Any]
) -> Path:
    """Return the path of a valid simulate configuration."""
    return write_config(tmp_path, simulate_data, "simulate.json")


@pytest.fixture(name="sweep_config_file")
def fixture_sweep_config_file(tmp_path: Path, sweep_data: dict[str, Any]) -> Path:
    """Return the path of a valid sweep configuration."""
    return write_config(tmp_path, sweep_data, "sweep.json")
