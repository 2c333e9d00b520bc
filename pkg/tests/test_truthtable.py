"""Test resistor banks and truth tables."""

import json

import numpy as np
import pytest

from kljn_sim.exceptions import ConfigurationError, ContractError, ParameterError
from kljn_sim.truthtable import (
    ResistorBank,
    TruthTable,
    build_public_table,
    derive_keyed_schedule,
    interpret,
)


def test_resistor_bank(multiple_bank: ResistorBank) -> None:
    """Test the bank helpers."""
    assert multiple_bank.n == 4
    assert multiple_bank.low == 1.0
    assert multiple_bank.high == pytest.approx(4.0)
    assert multiple_bank.midpoint == pytest.approx(2.5)
    assert list(multiple_bank.indices) == [1, 2, 3, 4]
    assert multiple_bank.resistance(2) == pytest.approx(4 ** (1 / 3))
    assert multiple_bank.smallest_gap == pytest.approx(4 ** (1 / 3) - 1)


@pytest.mark.parametrize(
    "values", [(1.0,), (4.0, 1.0), (1.0, 1.0), (0.0, 1.0), (1.0, float("inf"))]
)
def test_resistor_bank_invalid(values: tuple[float, ...]) -> None:
    """Test that unordered or non-positive banks are rejected."""
    with pytest.raises(ParameterError) as exc_info:
        ResistorBank.from_values(values)

    assert exc_info.value.translation_key == "invalid_bank"


def test_resistor_bank_index(bank: ResistorBank) -> None:
    """Test that indices are 1-based."""
    assert bank.resistance(1) == 1.0
    with pytest.raises(ContractError) as exc_info:
        bank.resistance(0)

    assert exc_info.value.translation_key == "index_out_of_range"


def test_geometric_bank_size() -> None:
    """Test that a bank needs two resistors."""
    with pytest.raises(ParameterError):
        ResistorBank.geometric(1.0, 4.0, 1)


@pytest.mark.parametrize("n", range(2, 9))
def test_table_antisymmetry(n: int) -> None:
    """Test that swapping the pair flips the bit."""
    table = build_public_table(n)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j:
                assert table.bit_of(i, j) == 1 - table.bit_of(j, i)


@pytest.mark.parametrize("n", range(2, 9))
def test_table_neighbour_flip(n: int) -> None:
    """Test that a neighbour move keeping the order flips the bit."""
    table = build_public_table(n)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue

            for k in (i - 1, i + 1):
                if 1 <= k <= n and k != j and (k < j) == (i < j):
                    assert table.bit_of(k, j) != table.bit_of(i, j)


def test_classic_table() -> None:
    """Test that the larger resistor at Alice's end means bit 1."""
    table = build_public_table(2)
    assert interpret((2, 1), table) == 1
    assert interpret((1, 2), table) == 0
    assert interpret((1, 1), table) is None
    assert json.loads(table.to_json()) == {"1,2": 0, "2,1": 1}


def test_table_orientation() -> None:
    """Test that the orientation inverts every bit."""
    flipped = TruthTable(n=4, orientation=1)
    public = build_public_table(4)
    assert all(
        flipped.as_dict()[pair] == 1 - bit for pair, bit in public.as_dict().items()
    )


def test_table_contracts() -> None:
    """Test the table contracts."""
    table = build_public_table(3)
    with pytest.raises(ContractError) as exc_info:
        table.bit_of(2, 2)

    assert exc_info.value.translation_key == "diagonal_pair"

    with pytest.raises(ContractError):
        interpret((4, 4), table)

    with pytest.raises(ParameterError):
        build_public_table(1)


def test_keyed_schedule() -> None:
    """Test that the schedule is a deterministic function of the key."""
    key = (1, 0, 1, 1, 0, 0, 1, 0)
    first = derive_keyed_schedule(key, 256, 4)
    second = derive_keyed_schedule(key, 256, 4)
    other = derive_keyed_schedule((0, 1, 1, 0), 256, 4)
    assert len(first) == 256
    assert first.key_id == second.key_id
    np.testing.assert_array_equal(first.orientations, second.orientations)
    assert first.key_id != other.key_id
    assert not np.array_equal(first.orientations, other.orientations)
    assert first.table_for(5) == TruthTable(n=4, orientation=int(first.orientations[5]))
    assert len(first.tables) == 256


def test_keyed_schedule_balance() -> None:
    """Test that both orientations are equally likely."""
    schedule = derive_keyed_schedule((1, 1, 0, 1), 10_000, 2)
    assert 0.47 < np.mean(schedule.orientations) < 0.53


@pytest.mark.parametrize("position", range(8))
def test_keyed_schedule_avalanche(position: int) -> None:
    """Test that flipping one key bit reorients about half of the slots."""
    key = [1, 0, 1, 1, 0, 0, 1, 0]
    flipped = key.copy()
    flipped[position] ^= 1
    first = derive_keyed_schedule(key, 4000, 2).orientations
    second = derive_keyed_schedule(flipped, 4000, 2).orientations
    assert abs(np.mean(first != second) - 0.5) < 0.05


def test_keyed_schedule_exhausted() -> None:
    """Test that a schedule covers a fixed number of slots."""
    schedule = derive_keyed_schedule((1,), 4, 2)
    with pytest.raises(ConfigurationError) as exc_info:
        schedule.table_for(4)

    assert exc_info.value.translation_key == "schedule_exhausted"
    assert schedule.key_id in str(exc_info.value)


@pytest.mark.parametrize(
    ("key", "n_slots", "translation_key"),
    [
        ((), 4, "empty_prior_key"),
        ((0, 2), 4, "invalid_config_value"),
        ((0, 1), 0, "invalid_slot_count"),
    ],
)
def test_keyed_schedule_invalid(
    key: tuple[int, ...], n_slots: int, translation_key: str
) -> None:
    """Test that bad keys and slot counts are rejected."""
    with pytest.raises(ParameterError) as exc_info:
        derive_keyed_schedule(key, n_slots, 2)

    assert exc_info.value.translation_key == translation_key
