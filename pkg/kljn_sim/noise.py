"""Contains seeded Johnson noise generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import hashlib
import logging
import math

import numpy as np
import numpy.typing as npt

from .const import BOLTZMANN
from .exceptions import ConfigurationError, ParameterError

_LOGGER = logging.getLogger(__name__)


def _label_key(label: str) -> int:
    """Return a spawn key word for the stream label."""
    return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "big")


@dataclass(eq=False)
class RngStream:
    """Represents a reproducible random stream.

    A stream is identified by the root seed and the label path leading
    to it. The generator is a counter-based Philox instance seeded from
    the hashed path, so any stream can be rebuilt in isolation.
    """

    root_seed: int
    path: tuple[str, ...] = ()
    _issued: set[str] = field(default_factory=set, init=False, repr=False)

    def __post_init__(self) -> None:
        """Validate the root seed."""
        if self.root_seed < 0:
            raise ParameterError(
                translation_key="invalid_config_value",
                translation_placeholders={
                    "value": self.root_seed,
                    "parameter": "seed",
                },
            )

    @cached_property
    def generator(self) -> np.random.Generator:
        """Return the generator backing this stream."""
        sequence = np.random.SeedSequence(
            self.root_seed, spawn_key=tuple(_label_key(label) for label in self.path)
        )
        return np.random.Generator(np.random.Philox(sequence))

    @property
    def seed_id(self) -> str:
        """Return the stream identifier."""
        return "/".join((str(self.root_seed), *self.path))


def fork_stream(parent: RngStream, label: str) -> RngStream:
    """Return an independent child stream of the parent."""
    if label in parent._issued:
        raise ConfigurationError(
            translation_key="duplicate_stream_label",
            translation_placeholders={"label": label, "parent": parent.seed_id},
        )

    parent._issued.add(label)
    return RngStream(parent.root_seed, (*parent.path, label))


@dataclass(frozen=True, kw_only=True)
class NoiseParams:
    """Represents the publicly agreed noise parameters."""

    t_eff: float = 1.0
    bandwidth: float = 1.0
    boltzmann: float = BOLTZMANN
    normalized: bool = False

    def __post_init__(self) -> None:
        """Validate the parameters."""
        for name in ("t_eff", "bandwidth", "boltzmann"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(
                    translation_key="invalid_noise_params",
                    translation_placeholders={"parameter": name, "value": value},
                )

    @classmethod
    def normalized_units(cls) -> NoiseParams:
        """Return parameters in units where 4kTΔf is one."""
        return cls(normalized=True)

    @property
    def unit_power(self) -> float:
        """Return the per-ohm sample variance, 4kTΔf."""
        if self.normalized:
            return 1.0

        return 4 * self.boltzmann * self.t_eff * self.bandwidth

    @property
    def sample_rate(self) -> float:
        """Return the Nyquist sampling rate."""
        return 2 * self.bandwidth

    def variance(self, resistance: float) -> float:
        """Return the generator variance for the resistance."""
        return self.unit_power * resistance


@dataclass(frozen=True, slots=True, eq=False)
class NoiseSeries:
    """Represents a sampled generator voltage series."""

    samples: npt.NDArray[np.float64]
    resistance: float | npt.NDArray[np.float64]
    seed_id: str

    def __len__(self) -> int:
        """Return the number of samples."""
        return len(self.samples)


def _check_sample_count(n_samples: int) -> None:
    """Check that at least one sample is requested."""
    if n_samples < 1:
        raise ParameterError(
            translation_key="invalid_sample_count",
            translation_placeholders={"minimum": 1, "value": n_samples},
        )


def sample_noise(
    resistance: float, params: NoiseParams, n_samples: int, stream: RngStream
) -> NoiseSeries:
    """Sample band-limited white noise of a resistor.

    Samples are taken at the Nyquist rate, each with variance 4kTRΔf.
    """
    if not math.isfinite(resistance) or resistance < 0:
        raise ParameterError(
            translation_key="invalid_resistance",
            translation_placeholders={"resistance": resistance},
        )

    _check_sample_count(n_samples)
    scale = math.sqrt(params.variance(resistance))
    samples = stream.generator.standard_normal(n_samples) * scale
    return NoiseSeries(samples=samples, resistance=resistance, seed_id=stream.seed_id)


def sample_noise_profile(
    resistances: npt.ArrayLike, params: NoiseParams, stream: RngStream
) -> NoiseSeries:
    """Sample noise of a resistor whose value changes every sample.

    The noise temperature stays at the configured value, so the
    variance of each sample tracks the instantaneous resistance.
    """
    profile = np.asarray(resistances, dtype=np.float64)
    _check_sample_count(profile.size)
    if not np.all(np.isfinite(profile)) or np.any(profile < 0):
        bad = profile[~np.isfinite(profile) | (profile < 0)][0]
        raise ParameterError(
            translation_key="invalid_resistance",
            translation_placeholders={"resistance": float(bad)},
        )

    scale = np.sqrt(params.unit_power * profile)
    samples = stream.generator.standard_normal(profile.size) * scale
    _LOGGER.debug(
        "Sampled %d-step resistance profile on stream %s", profile.size, stream.seed_id
    )
    return NoiseSeries(samples=samples, resistance=profile, seed_id=stream.seed_id)
