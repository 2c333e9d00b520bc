"""Test the seeded noise generators."""

import numpy as np
import pytest
from scipy import stats as sps

from kljn_sim.const import BOLTZMANN
from kljn_sim.exceptions import ConfigurationError, ParameterError
from kljn_sim.noise import (
    NoiseParams,
    RngStream,
    fork_stream,
    sample_noise,
    sample_noise_profile,
)
from kljn_sim.stats import cross_correlation


def test_fork_stream_depends_only_on_path() -> None:
    """Test that a child stream is rebuilt from its path alone."""
    first = fork_stream(fork_stream(RngStream(7), "point-0"), "slot-3")
    second = fork_stream(fork_stream(RngStream(7), "point-0"), "slot-3")
    assert first.seed_id == "7/point-0/slot-3"
    np.testing.assert_array_equal(
        first.generator.standard_normal(16), second.generator.standard_normal(16)
    )


def test_fork_stream_labels_are_independent(stream: RngStream) -> None:
    """Test that sibling streams differ."""
    alice = fork_stream(stream, "alice").generator.standard_normal(64)
    bob = fork_stream(stream, "bob").generator.standard_normal(64)
    assert not np.array_equal(alice, bob)


def test_fork_stream_rejects_duplicate_label(stream: RngStream) -> None:
    """Test that a label is issued only once per parent."""
    fork_stream(stream, "slot-0")
    with pytest.raises(ConfigurationError) as exc_info:
        fork_stream(stream, "slot-0")

    assert exc_info.value.translation_key == "duplicate_stream_label"
    assert "slot-0" in str(exc_info.value)


def test_negative_seed() -> None:
    """Test that a negative seed is rejected."""
    with pytest.raises(ParameterError):
        RngStream(-1)


def test_noise_params() -> None:
    """Test the derived noise quantities."""
    params = NoiseParams(t_eff=1e18, bandwidth=500.0)
    assert params.boltzmann == BOLTZMANN
    assert params.variance(1e3) == pytest.approx(27.61298, rel=1e-6)
    assert params.sample_rate == 1000.0
    assert NoiseParams.normalized_units().variance(4.0) == 4.0


@pytest.mark.parametrize("field", ["t_eff", "bandwidth", "boltzmann"])
@pytest.mark.parametrize("value", [0.0, -1.0, float("nan"), float("inf")])
def test_invalid_noise_params(field: str, value: float) -> None:
    """Test that non-positive or non-finite parameters are rejected."""
    with pytest.raises(ParameterError) as exc_info:
        NoiseParams(**{field: value})

    assert exc_info.value.translation_key == "invalid_noise_params"


def test_sample_noise_variance(
    normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that the sample variance follows 4kTRΔf."""
    series = sample_noise(2.0, normalized_params, 200_000, stream)
    assert len(series) == 200_000
    assert series.resistance == 2.0
    assert series.seed_id == stream.seed_id
    assert np.mean(series.samples**2) == pytest.approx(2.0, rel=0.02)
    assert abs(np.mean(series.samples)) < 0.02


def test_sample_noise_is_gaussian(
    normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that the samples have no excess kurtosis or skew."""
    samples = sample_noise(1.0, normalized_params, 1_000_000, stream).samples
    assert abs(sps.kurtosis(samples, fisher=True)) < 0.05
    assert abs(sps.skew(samples)) < 0.02


def test_sample_noise_variance_ratio(
    normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that the noise power is proportional to the resistance."""
    low = sample_noise(1.0, normalized_params, 1_000_000, fork_stream(stream, "low"))
    high = sample_noise(4.0, normalized_params, 1_000_000, fork_stream(stream, "high"))
    ratio = np.var(low.samples) / np.var(high.samples)
    assert ratio == pytest.approx(0.25, rel=0.03)


def test_sibling_streams_are_uncorrelated(
    normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that sibling streams are independent to within sampling error."""
    size = 1_000_000
    alice = sample_noise(1.0, normalized_params, size, fork_stream(stream, "alice"))
    bob = sample_noise(4.0, normalized_params, size, fork_stream(stream, "bob"))
    correlation = cross_correlation(alice.samples, bob.samples)
    assert abs(correlation.normalized) < 4 / np.sqrt(size)



def test_sample_noise_zero_resistance(
    normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that a zero resistor is silent."""
    series = sample_noise(0.0, normalized_params, 10, stream)
    np.testing.assert_array_equal(series.samples, np.zeros(10))


def test_sample_noise_is_reproducible(normalized_params: NoiseParams) -> None:
    """Test that equal streams give equal samples."""
    first = sample_noise(1.0, normalized_params, 100, RngStream(3))
    second = sample_noise(1.0, normalized_params, 100, RngStream(3))
    np.testing.assert_array_equal(first.samples, second.samples)


@pytest.mark.parametrize("resistance", [-1.0, float("nan"), float("inf")])
def test_sample_noise_invalid_resistance(
    resistance: float, normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that invalid resistors are rejected."""
    with pytest.raises(ParameterError) as exc_info:
        sample_noise(resistance, normalized_params, 10, stream)

    assert exc_info.value.translation_key == "invalid_resistance"


def test_sample_noise_invalid_count(
    normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that an empty request is rejected."""
    with pytest.raises(ParameterError) as exc_info:
        sample_noise(1.0, normalized_params, 0, stream)

    assert exc_info.value.translation_key == "invalid_sample_count"


def test_sample_noise_profile(
    normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that the variance tracks a changing resistance."""
    profile = np.repeat([1.0, 4.0], 100_000)
    series = sample_noise_profile(profile, normalized_params, stream)
    assert np.mean(series.samples[:100_000] ** 2) == pytest.approx(1.0, rel=0.02)
    assert np.mean(series.samples[100_000:] ** 2) == pytest.approx(4.0, rel=0.02)


def test_sample_noise_profile_invalid(
    normalized_params: NoiseParams, stream: RngStream
) -> None:
    """Test that a profile with a negative resistance is rejected."""
    with pytest.raises(ParameterError) as exc_info:
        sample_noise_profile([1.0, -2.0], normalized_params, stream)

    assert "-2.0" in str(exc_info.value)
