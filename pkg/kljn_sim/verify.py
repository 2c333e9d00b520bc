"""Contains the analytic identity checks run by the verify command.

Every check runs at a fixed seed, so its outcome only changes when the
simulator does. Quick mode uses ten times fewer samples and widens
each tolerance to four estimator standard deviations where that is
looser than the fixed tolerance.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
import logging
import math
from typing import Final

import numpy as np

from . import circuit
from .const import DEFAULT_SEED, Party, Variant
from .noise import NoiseParams, RngStream, fork_stream, sample_noise
from .protocol import (
    Hypothesis,
    PartyView,
    ProtocolConfig,
    TransientConfig,
    hypothesis_test,
    reduce_channel_noise,
    run_transient_walk,
    sample_trace,
)
from .stats import cross_correlation, mean_square, predict_levels
from .truthtable import ResistorBank, build_public_table

FULL_SAMPLES: Final = 1_000_000
QUICK_SAMPLES: Final = 100_000

# SI generator case: 1 kOhm at 1e18 K over 500 Hz.
FDT_RESISTANCE: Final = 1e3
FDT_T_EFF: Final = 1e18
FDT_BANDWIDTH: Final = 500.0

R_LOW: Final = 1.0
R_HIGH: Final = 4.0
POWER_LEVEL: Final = 0.16
MAX_TABLE_SIZE: Final = 8

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class CheckResult:
    """Represents the outcome of one identity check."""

    name: str
    passed: bool
    detail: str


@dataclass(frozen=True, slots=True)
class _Budget:
    """Represents the sample counts and tolerance widening of a run."""

    n_samples: int
    quick: bool

    def tolerance(self, fixed: float, relative_sigma: float) -> float:
        """Return the fixed tolerance, widened to 4 sigma in quick mode."""
        return max(fixed, 4 * relative_sigma) if self.quick else fixed


def check_fdt_variance(stream: RngStream, budget: _Budget) -> CheckResult:
    """Check the generator variance against 4kTRΔf."""
    params = NoiseParams(t_eff=FDT_T_EFF, bandwidth=FDT_BANDWIDTH)
    series = sample_noise(FDT_RESISTANCE, params, budget.n_samples, stream)
    expected = params.variance(FDT_RESISTANCE)
    measured = mean_square(series.samples)
    error = abs(measured - expected) / expected
    tolerance = budget.tolerance(0.01, math.sqrt(2 / budget.n_samples))
    return CheckResult(
        name="fdt_variance",
        passed=error < tolerance,
        detail=f"{measured:.5g} V^2 vs {expected:.5g} V^2 (tolerance {tolerance:.2%})",
    )


def check_channel_levels(stream: RngStream, budget: _Budget) -> CheckResult:
    """Check the simulated mean squares of the three situations."""
    params = NoiseParams.normalized_units()
    levels = predict_levels(R_LOW, R_HIGH, params)
    tolerance = budget.tolerance(0.02, math.sqrt(2 / budget.n_samples))
    worst = 0.0
    parts = []
    for label, (r_a, r_b), (ms_u, ms_i) in (
        ("LL", (R_LOW, R_LOW), (levels.ms_u_ll, levels.ms_i_ll)),
        ("HL", (R_HIGH, R_LOW), (levels.ms_u_mid, levels.ms_i_mid)),
        ("HH", (R_HIGH, R_HIGH), (levels.ms_u_hh, levels.ms_i_hh)),
    ):
        channel = sample_trace(
            (r_a, r_b), params, budget.n_samples, fork_stream(stream, label)
        ).channel
        assert isinstance(channel, circuit.LoopSample)
        u_error = abs(mean_square(channel.u_ch) - ms_u) / ms_u
        i_error = abs(mean_square(channel.i_ch) - ms_i) / ms_i
        worst = max(worst, u_error, i_error)
        parts.append(f"{label} {u_error:.2%}/{i_error:.2%}")

    return CheckResult(
        name="channel_levels",
        passed=worst < tolerance,
        detail=", ".join(parts),
    )


def check_power_balance(stream: RngStream, budget: _Budget) -> CheckResult:
    """Check that no net power flows between the two resistors."""
    params = NoiseParams.normalized_units()
    trace = sample_trace((R_LOW, R_HIGH), params, budget.n_samples, stream)
    channel = trace.channel
    assert isinstance(channel, circuit.LoopSample)
    report = circuit.measure_power_balance(channel, R_LOW, R_HIGH)
    sigma = math.sqrt(2 / budget.n_samples)
    level_tolerance = budget.tolerance(0.02, sigma)
    balance_tolerance = budget.tolerance(0.02, math.sqrt(2) * sigma)
    on_level = all(
        abs(power - POWER_LEVEL) / POWER_LEVEL < level_tolerance
        for power in (report.p_l_to_h, report.p_h_to_l)
    )
    return CheckResult(
        name="power_balance",
        passed=on_level and report.imbalance < balance_tolerance,
        detail=(
            f"P(L->H) {report.p_l_to_h:.5g}, P(H->L) {report.p_h_to_l:.5g}, "
            f"imbalance {report.imbalance:.2%}"
        ),
    )


def check_zero_cross_correlation(stream: RngStream, budget: _Budget) -> CheckResult:
    """Check that channel voltage and current are uncorrelated in secure slots."""
    params = NoiseParams.normalized_units()
    n_slots = 200 if budget.quick else 1000
    n_samples = budget.n_samples // 100
    bound = 4 / math.sqrt(n_samples)
    within = 0
    for slot in range(n_slots):
        r_a, r_b = (R_HIGH, R_LOW) if slot % 2 else (R_LOW, R_HIGH)
        channel = sample_trace(
            (r_a, r_b), params, n_samples, fork_stream(stream, f"slot-{slot}")
        ).channel
        assert isinstance(channel, circuit.LoopSample)
        within += abs(cross_correlation(channel.u_ch, channel.i_ch).normalized) < bound

    fraction = within / n_slots
    return CheckResult(
        name="zero_cross_correlation",
        passed=fraction >= 0.99,
        detail=f"{fraction:.1%} of {n_slots} slots within {bound:.3g}",
    )


def check_hypothesis_identities(stream: RngStream, budget: _Budget) -> CheckResult:
    """Check acceptance of the true far-end resistor and the bias of a wrong one."""
    params = NoiseParams.normalized_units()
    correct = Hypothesis(assumed_other_resistance=R_HIGH)
    wrong = Hypothesis(assumed_other_resistance=R_LOW)
    sigmas = 4.0 if budget.quick else 3.0
    n_trials = 500 if budget.quick else 1000
    n_samples = budget.n_samples // 100
    accepted = 0
    for trial in range(n_trials):
        view = PartyView.from_trace(
            sample_trace(
                (R_LOW, R_HIGH),
                params,
                n_samples,
                fork_stream(stream, f"trial-{trial}"),
            ),
            Party.ALICE,
        )
        result = hypothesis_test(
            view.own, reduce_channel_noise(view, correct), correct, sigmas
        )
        accepted += result.accept

    view = PartyView.from_trace(
        sample_trace(
            (R_LOW, R_HIGH), params, budget.n_samples, fork_stream(stream, "bias")
        ),
        Party.ALICE,
    )
    biased = hypothesis_test(view.own, reduce_channel_noise(view, wrong), wrong)
    expected = params.unit_power * (
        1 / (1 + correct.alpha(R_LOW)) - 1 / (1 + wrong.alpha(R_LOW))
    )
    bias_error = abs(biased.corr_i.raw - expected) / abs(expected)
    fraction = accepted / n_trials
    return CheckResult(
        name="hypothesis_identities",
        passed=fraction >= 0.99 and bias_error < 0.05,
        detail=(
            f"true hypothesis accepted in {fraction:.1%} of {n_trials}; "
            f"wrong hypothesis correlation {biased.corr_i.raw:.5g} vs {expected:.5g}"
        ),
    )


def check_degeneracy(stream: RngStream, budget: _Budget) -> CheckResult:
    """Check that the reduced noise ratio does not depend on the hypothesis."""
    params = NoiseParams.normalized_units()
    n_samples = budget.n_samples // 10
    failures = []
    for r_wire in (0.0, 0.2 * R_LOW):
        trace = sample_trace(
            (R_LOW, R_HIGH),
            params,
            n_samples,
            fork_stream(stream, f"wire-{r_wire}"),
            wire_resistance=r_wire,
        )
        for party in Party:
            view = PartyView.from_trace(trace, party)
            for resistance in (R_LOW, R_HIGH):
                reduced = reduce_channel_noise(
                    view, Hypothesis(assumed_other_resistance=resistance)
                )
                scale = math.sqrt(mean_square(reduced.u_star))
                if not np.allclose(
                    reduced.u_star,
                    -view.r_own * reduced.i_star,
                    rtol=1e-9,
                    atol=1e-9 * scale,
                ):
                    failures.append(f"{party} R'={resistance} r_w={r_wire}")

    return CheckResult(
        name="degeneracy",
        passed=not failures,
        detail="u*/i* = -R_own" if not failures else ", ".join(failures),
    )


def check_truth_tables(stream: RngStream, budget: _Budget) -> CheckResult:
    """Check antisymmetry and the neighbour flip exhaustively."""
    failures = []
    for n in range(2, MAX_TABLE_SIZE + 1):
        table = build_public_table(n)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j:
                    continue

                if table.bit_of(i, j) == table.bit_of(j, i):
                    failures.append(f"n={n} ({i},{j}) symmetric")

                for step in (-1, 1):
                    k = i + step
                    if not 1 <= k <= n or k == j or (k < j) != (i < j):
                        continue

                    if table.bit_of(k, j) == table.bit_of(i, j):
                        failures.append(f"n={n} ({i},{j})->({k},{j}) no flip")

    return CheckResult(
        name="truth_tables",
        passed=not failures,
        detail=f"n = 2..{MAX_TABLE_SIZE}" if not failures else "; ".join(failures[:5]),
    )


def check_transient_walk(stream: RngStream, budget: _Budget) -> CheckResult:
    """Check the walk start, step bound, cancellation and noise tracking."""
    params = NoiseParams.normalized_units()
    bank = ResistorBank.from_values((R_LOW, R_HIGH))
    tcfg = TransientConfig(t_r=200, step_size=0.05)
    config = ProtocolConfig(
        variant=Variant.KLJN, bank=bank, params=params, transient=tcfg
    )
    failures = []
    for slot, targets in enumerate(((R_LOW, R_HIGH), (R_HIGH, R_HIGH)) * 10):
        walk = run_transient_walk(
            config, tcfg, targets, fork_stream(stream, f"slot-{slot}")
        )
        for path, target, reached in (
            (walk.r_a_path, targets[0], walk.reached_a),
            (walk.r_b_path, targets[1], walk.reached_b),
        ):
            if path[0] != bank.midpoint:
                failures.append(f"slot {slot} starts at {path[0]}")

            if np.max(np.abs(np.diff(path))) > tcfg.step_size * (1 + 1e-12):
                failures.append(f"slot {slot} oversteps")

            if reached != (path[-1] == target):
                failures.append(f"slot {slot} reached flag")

        if walk.cancel != (not (walk.reached_a and walk.reached_b)):
            failures.append(f"slot {slot} cancellation")

    free = TransientConfig(t_r=budget.n_samples // 5, step_size=0.01)
    walk = run_transient_walk(config, free, None, fork_stream(stream, "free"))
    window = 20_000
    whitened = walk.u_a.samples / np.sqrt(params.unit_power * walk.r_a_path)
    windows = whitened[: len(whitened) // window * window].reshape(-1, window)
    variances = np.mean(windows**2, axis=1)
    tracking = float(np.max(np.abs(variances - 1)))
    if tracking >= 0.05:
        failures.append(f"windowed variance off by {tracking:.2%}")

    return CheckResult(
        name="transient_walk",
        passed=not failures,
        detail=f"{len(windows)} variance windows, worst {tracking:.2%}"
        if not failures
        else "; ".join(failures[:5]),
    )


CHECKS: Final[tuple[Callable[[RngStream, _Budget], CheckResult], ...]] = (
    check_fdt_variance,
    check_channel_levels,
    check_power_balance,
    check_zero_cross_correlation,
    check_hypothesis_identities,
    check_degeneracy,
    check_truth_tables,
    check_transient_walk,
)


def run_checks(*, quick: bool = False, seed: int = DEFAULT_SEED) -> list[CheckResult]:
    """Run every identity check and return the results in order."""
    budget = _Budget(n_samples=QUICK_SAMPLES if quick else FULL_SAMPLES, quick=quick)
    root = RngStream(seed)
    results = []
    for check in CHECKS:
        result = check(fork_stream(root, check.__name__), budget)
        if result.passed:
            _LOGGER.debug("%s passed: %s", result.name, result.detail)
        else:
            _LOGGER.warning("%s failed: %s", result.name, result.detail)
        results.append(result)

    return results
