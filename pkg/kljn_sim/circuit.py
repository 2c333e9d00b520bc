"""Contains the Kirchhoff loop solver.

Current is positive when it flows from Bob's terminal toward Alice's
terminal. Every solver is vectorised over samples: voltages and
resistances may be scalars or equal-length arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np
import numpy.typing as npt

from .const import POWER_BALANCE_MIN_SAMPLES
from .exceptions import ContractError, ParameterError

_LOGGER = logging.getLogger(__name__)

type FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True, slots=True, eq=False)
class LoopSample:
    """Represents the loop response to the two generators.

    Generator voltages are private to the parties and are set to None
    in the view an eavesdropper gets.
    """

    u_a: FloatArray | None
    u_b: FloatArray | None
    u_ch: FloatArray
    i_ch: FloatArray

    def channel_only(self) -> LoopSample:
        """Return the sample without the private generator voltages."""
        return LoopSample(u_a=None, u_b=None, u_ch=self.u_ch, i_ch=self.i_ch)

    def __len__(self) -> int:
        """Return the number of samples."""
        return int(np.size(self.u_ch))


@dataclass(frozen=True, slots=True, eq=False)
class EndpointSample:
    """Represents line voltages at both terminals of a resistive wire."""

    u_end_a: FloatArray
    u_end_b: FloatArray
    i_ch: FloatArray

    def __len__(self) -> int:
        """Return the number of samples."""
        return int(np.size(self.i_ch))


@dataclass(frozen=True, slots=True, kw_only=True)
class PowerReport:
    """Represents the mean power flow between the two resistors."""

    p_l_to_h: float
    p_h_to_l: float
    cross_corr: float
    cross_corr_sigma: float
    n_samples: int

    @property
    def imbalance(self) -> float:
        """Return the relative difference of the two power flows."""
        if self.p_l_to_h == 0:
            return 0.0 if self.p_h_to_l == 0 else math.inf

        return abs(self.p_l_to_h - self.p_h_to_l) / abs(self.p_l_to_h)


def _as_resistances(*values: npt.ArrayLike) -> tuple[FloatArray, ...]:
    """Return loop resistances, rejecting non-positive ones."""
    arrays = tuple(np.asarray(value, dtype=np.float64) for value in values)
    if any(np.any(~(array > 0)) for array in arrays):
        raise ParameterError(
            translation_key="non_positive_resistance",
            translation_placeholders={"r_a": values[0], "r_b": values[-1]},
        )

    return arrays


def solve_loop(
    u_a: npt.ArrayLike, u_b: npt.ArrayLike, r_a: npt.ArrayLike, r_b: npt.ArrayLike
) -> LoopSample:
    """Solve the ideal two-resistor loop."""
    ra, rb = _as_resistances(r_a, r_b)
    ua = np.asarray(u_a, dtype=np.float64)
    ub = np.asarray(u_b, dtype=np.float64)
    total = ra + rb
    return LoopSample(
        u_a=ua,
        u_b=ub,
        u_ch=(ua * rb + ub * ra) / total,
        i_ch=(ub - ua) / total,
    )


def solve_loop_nonideal(
    u_a: npt.ArrayLike,
    u_b: npt.ArrayLike,
    r_a: npt.ArrayLike,
    r_b: npt.ArrayLike,
    r_w: float,
) -> EndpointSample:
    """Solve the loop with a lumped series wire resistance.

    The terminal voltages satisfy u_end_b - u_end_a = i_ch * r_w.
    """
    if not math.isfinite(r_w) or r_w < 0:
        raise ParameterError(
            translation_key="negative_wire_resistance",
            translation_placeholders={"r_w": r_w},
        )

    ra, rb = _as_resistances(r_a, r_b)
    ua = np.asarray(u_a, dtype=np.float64)
    ub = np.asarray(u_b, dtype=np.float64)
    i_ch = (ub - ua) / (ra + r_w + rb)
    return EndpointSample(u_end_a=ua + i_ch * ra, u_end_b=ub - i_ch * rb, i_ch=i_ch)


def measure_power_balance(
    trace: LoopSample, r_a: float, r_b: float
) -> PowerReport:
    """Measure the power each generator delivers to the opposite resistor.

    The trace is split by superposition into the single-generator
    responses and each power is the mean product of the resistor voltage
    and the current through it.
    """
    if trace.u_a is None or trace.u_b is None:
        raise ContractError(translation_key="missing_decomposition")

    n_samples = len(trace)
    if n_samples == 0:
        raise ContractError(
            translation_key="empty_series",
            translation_placeholders={"quantity": "power balance"},
        )

    if n_samples < POWER_BALANCE_MIN_SAMPLES:
        _LOGGER.warning(
            "Power balance over %d samples is not statistically meaningful "
            "(at least %d expected)",
            n_samples,
            POWER_BALANCE_MIN_SAMPLES,
        )

    from_alice = solve_loop(trace.u_a, 0.0, r_a, r_b)
    from_bob = solve_loop(0.0, trace.u_b, r_a, r_b)
    p_a_to_b = float(np.mean(from_alice.u_ch * -from_alice.i_ch))
    p_b_to_a = float(np.mean(from_bob.u_ch * from_bob.i_ch))

    products = trace.u_ch * trace.i_ch
    cross_corr = float(np.mean(products))
    sigma = float(np.std(products) / math.sqrt(n_samples))

    if r_a <= r_b:
        p_l_to_h, p_h_to_l = p_a_to_b, p_b_to_a
    else:
        p_l_to_h, p_h_to_l = p_b_to_a, p_a_to_b

    _LOGGER.debug(
        "Power balance over %d samples: %.6g vs %.6g", n_samples, p_l_to_h, p_h_to_l
    )
    return PowerReport(
        p_l_to_h=p_l_to_h,
        p_h_to_l=p_h_to_l,
        cross_corr=cross_corr,
        cross_corr_sigma=sigma,
        n_samples=n_samples,
    )
