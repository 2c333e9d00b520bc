"""Contains estimators and decision rules."""

from __future__ import annotations

from collections.abc import Hashable, Iterable
from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from scipy import stats as sps

from .const import DEFAULT_CONFIDENCE, SituationLabel
from .exceptions import ContractError, ParameterError
from .noise import NoiseParams
from .truthtable import ResistorBank


@dataclass(frozen=True, slots=True, kw_only=True)
class LevelTable:
    """Represents predicted mean-square channel voltages and currents."""

    ms_u_ll: float
    ms_u_mid: float
    ms_u_hh: float
    ms_i_ll: float
    ms_i_mid: float
    ms_i_hh: float

    def points(self) -> dict[SituationLabel, tuple[float, float]]:
        """Return the (voltage, current) level of every situation."""
        return {
            SituationLabel.LL: (self.ms_u_ll, self.ms_i_ll),
            SituationLabel.MID: (self.ms_u_mid, self.ms_i_mid),
            SituationLabel.HH: (self.ms_u_hh, self.ms_i_hh),
        }


@dataclass(frozen=True, slots=True)
class SituationClass:
    """Represents a classified channel situation."""

    label: SituationLabel
    margin: float


@dataclass(frozen=True, slots=True)
class PairEstimate:
    """Represents a party's estimate of the far-end resistor."""

    other_index: int
    margin: float


class Correlation(NamedTuple):
    """Represents a cross-correlation estimate."""

    raw: float
    normalized: float


def predict_levels(
    r_low: float, r_high: float, params: NoiseParams, r_wire: float = 0.0
) -> LevelTable:
    """Return the predicted levels of the line.

    Voltages refer to the mean of the two terminal voltages, which is the
    channel voltage on an ideal wire.
    """
    if not r_low < r_high or r_low <= 0:
        raise ParameterError(
            translation_key="degenerate_levels",
            translation_placeholders={"r_low": r_low, "r_high": r_high},
        )

    def line_levels(r_a: float, r_b: float) -> tuple[float, float]:
        total = r_a + r_wire + r_b
        ms_u = (
            r_a * (2 * r_b + r_wire) ** 2 + r_b * (2 * r_a + r_wire) ** 2
        ) / (4 * total**2)
        return params.unit_power * ms_u, params.unit_power * (r_a + r_b) / total**2

    ms_u_ll, ms_i_ll = line_levels(r_low, r_low)
    ms_u_mid, ms_i_mid = line_levels(r_low, r_high)
    ms_u_hh, ms_i_hh = line_levels(r_high, r_high)
    return LevelTable(
        ms_u_ll=ms_u_ll,
        ms_u_mid=ms_u_mid,
        ms_u_hh=ms_u_hh,
        ms_i_ll=ms_i_ll,
        ms_i_mid=ms_i_mid,
        ms_i_hh=ms_i_hh,
    )


def predict_pair_levels(
    r_own: float, r_other: float, params: NoiseParams, r_wire: float = 0.0
) -> tuple[float, float]:
    """Return the mean-square voltage and current seen at the own terminal."""
    total = r_own + r_wire + r_other
    unit = params.unit_power
    ms_u = unit * (r_own * (r_wire + r_other) ** 2 + r_other * r_own**2) / total**2
    ms_i = unit * (r_own + r_other) / total**2
    return ms_u, ms_i


def situation_label(i: int, j: int, n: int) -> SituationLabel:
    """Return the situation label of a resistor index pair."""
    if i != j:
        return SituationLabel.MID

    return SituationLabel.LL if i <= n // 2 else SituationLabel.HH


def _nearest[K: Hashable](
    ms_u: float, ms_i: float, candidates: Iterable[tuple[K, tuple[float, float]]]
) -> tuple[K, float]:
    """Return the nearest candidate level in log space and the margin.

    The margin is 1 on a level and 0 on the decision boundary.
    """
    keys: list[K] = []
    coords: list[tuple[float, float]] = []
    for key, (level_u, level_i) in candidates:
        keys.append(key)
        coords.append((math.log(level_u), math.log(level_i)))

    if not (ms_u > 0 and ms_i > 0 and math.isfinite(ms_u) and math.isfinite(ms_i)):
        return keys[0], 0.0

    points = np.asarray(coords)
    distances = np.hypot(points[:, 0] - math.log(ms_u), points[:, 1] - math.log(ms_i))
    order = np.argsort(distances, kind="stable")
    best = int(order[0])
    if len(order) == 1:
        return keys[best], 1.0

    runner_up = int(order[1])
    separation = float(np.hypot(*(points[best] - points[runner_up])))
    if separation == 0:
        return keys[best], 0.0

    margin = (float(distances[runner_up]) - float(distances[best])) / separation
    return keys[best], margin


def classify_situation(ms_u: float, ms_i: float, levels: LevelTable) -> SituationClass:
    """Classify the channel situation by the nearest predicted level."""
    label, margin = _nearest(ms_u, ms_i, levels.points().items())
    return SituationClass(label=label, margin=margin)


def classify_other(
    ms_u: float,
    ms_i: float,
    own_index: int,
    bank: ResistorBank,
    params: NoiseParams,
    r_wire: float = 0.0,
) -> PairEstimate:
    """Estimate the far-end resistor index given the own one."""
    r_own = bank.resistance(own_index)
    candidates = (
        (j, predict_pair_levels(r_own, bank.resistance(j), params, r_wire))
        for j in bank.indices
    )
    other_index, margin = _nearest(ms_u, ms_i, candidates)
    return PairEstimate(other_index=other_index, margin=margin)


def mean_square(series: npt.ArrayLike) -> float:
    """Return the arithmetic mean of squares."""
    values = np.asarray(series, dtype=np.float64)
    if values.size == 0:
        raise ContractError(
            translation_key="empty_series",
            translation_placeholders={"quantity": "mean square"},
        )

    return float(np.mean(values * values))


def cross_correlation(x: npt.ArrayLike, y: npt.ArrayLike) -> Correlation:
    """Return the raw and RMS-normalized zero-lag cross-correlation."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape:
        raise ContractError(
            translation_key="length_mismatch",
            translation_placeholders={"left": xs.size, "right": ys.size},
        )

    if xs.size < 2:
        raise ContractError(
            translation_key="series_too_short",
            translation_placeholders={"minimum": 2, "length": xs.size},
        )

    raw = float(np.mean(xs * ys))
    scale = math.sqrt(mean_square(xs) * mean_square(ys))
    return Correlation(raw=raw, normalized=raw / scale if scale > 0 else 0.0)


def independence_bound(n_samples: int, sigmas: float = 3.0) -> float:
    """Return the acceptance bound for a zero normalized correlation."""
    return sigmas / math.sqrt(n_samples)


def binomial_ci(
    successes: int, trials: int, confidence: float = DEFAULT_CONFIDENCE
) -> tuple[float, float]:
    """Return the success rate and its normal-approximation half-width."""
    if not 0 < confidence < 1:
        raise ParameterError(
            translation_key="invalid_confidence",
            translation_placeholders={"confidence": confidence},
        )

    if trials <= 0:
        return 0.0, 0.0

    rate = successes / trials
    z = float(sps.norm.ppf(0.5 + confidence / 2))
    return rate, z * math.sqrt(rate * (1 - rate) / trials)
