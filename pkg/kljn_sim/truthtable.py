"""Contains resistor banks and bit-interpretation tables."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
import hashlib
import json
import logging
import math
from typing import Final

import numpy as np
import numpy.typing as npt

from .exceptions import ConfigurationError, ContractError, ParameterError

SCHEDULE_DOMAIN: Final = b"kljn-keyed-schedule"

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class ResistorBank:
    """Represents the publicly known ordered resistor set.

    Indices are 1-based, index 1 being the smallest resistor.
    """

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        """Validate the bank."""
        values = self.values
        if (
            len(values) < 2
            or any(not math.isfinite(value) or value <= 0 for value in values)
            or any(b <= a for a, b in zip(values, values[1:], strict=False))
        ):
            raise ParameterError(
                translation_key="invalid_bank",
                translation_placeholders={"values": list(values)},
            )

    @classmethod
    def from_values(cls, values: Sequence[float]) -> ResistorBank:
        """Return a bank from any sequence of resistances."""
        return cls(tuple(float(value) for value in values))

    @classmethod
    def geometric(cls, low: float, high: float, n: int) -> ResistorBank:
        """Return a bank of n log-spaced resistors between low and high."""
        if n < 2:
            raise ParameterError(
                translation_key="invalid_bank_size",
                translation_placeholders={"n": n},
            )

        return cls.from_values(np.geomspace(low, high, n).tolist())

    @property
    def n(self) -> int:
        """Return the number of resistors."""
        return len(self.values)

    @property
    def low(self) -> float:
        """Return the smallest resistor."""
        return self.values[0]

    @property
    def high(self) -> float:
        """Return the largest resistor."""
        return self.values[-1]

    @property
    def midpoint(self) -> float:
        """Return the transient starting resistance."""
        return (self.low + self.high) / 2

    @property
    def smallest_gap(self) -> float:
        """Return the smallest difference of neighbouring resistors."""
        return min(b - a for a, b in zip(self.values, self.values[1:], strict=False))

    @property
    def indices(self) -> range:
        """Return the valid resistor indices."""
        return range(1, self.n + 1)

    def resistance(self, index: int) -> float:
        """Return the resistor value at the 1-based index."""
        if index not in self.indices:
            raise ContractError(
                translation_key="index_out_of_range",
                translation_placeholders={"index": index, "n": self.n},
            )

        return self.values[index - 1]


@dataclass(frozen=True, slots=True)
class TruthTable:
    """Represents the bit interpretation of ordered resistor pairs.

    The bit of (i, j) is parity(i + j) XOR [i < j] XOR orientation,
    which makes the table antisymmetric and flips the bit for every
    neighbour move that keeps the order relation.
    """

    n: int
    orientation: int = 0

    def _check_index(self, index: int) -> None:
        if not 1 <= index <= self.n:
            raise ContractError(
                translation_key="index_out_of_range",
                translation_placeholders={"index": index, "n": self.n},
            )

    def bit_of(self, i: int, j: int) -> int:
        """Return the bit of an off-diagonal pair."""
        self._check_index(i)
        self._check_index(j)
        if i == j:
            raise ContractError(
                translation_key="diagonal_pair",
                translation_placeholders={"index": i},
            )

        return ((i + j) % 2) ^ int(i < j) ^ self.orientation

    def as_dict(self) -> dict[str, int]:
        """Return the table as a map of "i,j" to bit."""
        return {
            f"{i},{j}": self.bit_of(i, j)
            for i in range(1, self.n + 1)
            for j in range(1, self.n + 1)
            if i != j
        }

    def to_json(self) -> str:
        """Return the table as a JSON document."""
        return json.dumps(self.as_dict(), sort_keys=True)


def build_public_table(n: int) -> TruthTable:
    """Return the public truth table for n resistors."""
    if n < 2:
        raise ParameterError(
            translation_key="invalid_bank_size",
            translation_placeholders={"n": n},
        )

    return TruthTable(n=n)


def interpret(pair: tuple[int, int], table: TruthTable) -> int | None:
    """Return the bit of the pair, or None for an insecure pair."""
    i, j = pair
    if i == j:
        table._check_index(i)
        return None

    return table.bit_of(i, j)


@dataclass(frozen=True, slots=True, eq=False)
class KeyedSchedule:
    """Represents per-slot truth tables derived from a shared key.

    Only the orientation bit of every slot is stored; tables are built
    on demand.
    """

    n: int
    orientations: npt.NDArray[np.int64]
    key_id: str

    def __len__(self) -> int:
        """Return the number of slots covered."""
        return len(self.orientations)

    @property
    def tables(self) -> tuple[TruthTable, ...]:
        """Return the table of every slot."""
        return tuple(self.table_for(index) for index in range(len(self)))

    def table_for(self, slot_index: int) -> TruthTable:
        """Return the table of the slot."""
        if not 0 <= slot_index < len(self):
            raise ConfigurationError(
                translation_key="schedule_exhausted",
                translation_placeholders={
                    "key_id": self.key_id,
                    "n_slots": len(self),
                    "slot_index": slot_index,
                },
            )

        return TruthTable(n=self.n, orientation=int(self.orientations[slot_index]))


def derive_keyed_schedule(
    prior_key: Sequence[int], n_slots: int, n: int
) -> KeyedSchedule:
    """Expand a shared key into one table orientation per slot."""
    if not prior_key:
        raise ParameterError(translation_key="empty_prior_key")

    if any(bit not in (0, 1) for bit in prior_key):
        raise ParameterError(
            translation_key="invalid_config_value",
            translation_placeholders={
                "value": list(prior_key),
                "parameter": "prior_key",
            },
        )

    if n_slots < 1:
        raise ParameterError(
            translation_key="invalid_slot_count",
            translation_placeholders={"n_slots": n_slots},
        )

    base = build_public_table(n)
    digest = hashlib.sha256(SCHEDULE_DOMAIN + bytes(prior_key)).digest()
    generator = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(int.from_bytes(digest, "big")))
    )
    mask = generator.integers(0, 2, size=n_slots)
    key_id = digest.hex()[:12]
    _LOGGER.debug("Derived %d-slot schedule %s for n=%d", n_slots, key_id, n)
    return KeyedSchedule(n=base.n, orientations=mask ^ base.orientation, key_id=key_id)
