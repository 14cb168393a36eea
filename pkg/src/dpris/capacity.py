"""Ergodic capacity of the dual-polarized link and its closed forms.

The 2x2 equivalent channel G collapses the per-element vectors:

    G = [[h_vv . (Gamma_v * b_v),  h_vh . (Gamma_h * b_h)],
         [h_hv . (Gamma_v * b_v),  h_hh . (Gamma_h * b_h)]]

Monte Carlo estimates E log2 det(I2 + rho G Lambda G^H) over independent
fading draws.  The matching closed forms are the moment upper bound

    log2(1 + rho lv (m11 + m21) + rho lh (m12 + m22)
           + rho^2 lv lh (m11 m22 + m12 m21)),

its maximized version over phases expressed through the quadratic forms

    O = sum_{n1,n2} A_n1 A_n2 |b_n1||b_n2| R(n1,n2) beta0
        sqrt(d_n1^-a d_n2^-a),

the closed-form optimal power split across polarizations, the
single-polarized baseline, and the cross-polarization threshold above
which the dual system more than doubles the single one.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import ChannelStatistics, sample_channel
from .exceptions import ModelInconsistencyError
from .feed import PropagationMatrix
from .numerics import SeededStreamFactory, det2_shift
from .ris import RisConfiguration

_LN2 = np.log(2.0)


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit power split across polarizations; weights sum to <= 1."""

    lambda_v: float
    lambda_h: float

    def __post_init__(self):
        if not 0.0 <= self.lambda_v <= 1.0 or not 0.0 <= self.lambda_h <= 1.0:
            raise ValueError("allocation weights must lie in [0, 1]")
        if self.lambda_v + self.lambda_h > 1.0 + 1e-12:
            raise ValueError("allocation weights must sum to at most 1")

    @classmethod
    def equal(cls) -> "PowerAllocation":
        return cls(0.5, 0.5)

    @classmethod
    def split(cls, lambda_v: float) -> "PowerAllocation":
        """Full-power split (lambda_v, 1 - lambda_v)."""
        return cls(lambda_v, 1.0 - lambda_v)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit SNR rho = P / sigma^2, optionally with its constituents."""

    snr: float
    noise_variance: float | None = None
    transmit_power: float | None = None

    def __post_init__(self):
        if not self.snr > 0.0:
            raise ValueError(f"snr must be positive, got {self.snr!r}")
        if self.noise_variance is not None and self.transmit_power is not None:
            implied = self.transmit_power / self.noise_variance
            if abs(implied - self.snr) > 1e-9 * self.snr:
                raise ValueError("snr does not match transmit_power / noise_variance")

    @classmethod
    def from_snr(cls, snr: float) -> "LinkBudget":
        return cls(snr=snr)

    @classmethod
    def from_powers(cls, transmit_power: float, noise_variance: float) -> "LinkBudget":
        return cls(
            snr=transmit_power / noise_variance,
            noise_variance=noise_variance,
            transmit_power=transmit_power,
        )


#: 2x2 complex ndarray; rows index the UE polarization (V, H), columns the
#: feed polarization (V, H).
EquivalentChannel = np.ndarray


@dataclass(frozen=True)
class McCapacityResult:
    """Monte Carlo estimate with its standard error and the per-entry
    second moments of G accumulated from the same sample stream."""

    estimate: float
    standard_error: float
    moments: np.ndarray
    moment_standard_errors: np.ndarray
    trials: int
    master_seed: int


@dataclass(frozen=True)
class CapacityReport:
    """Everything a single-point evaluation produces, with provenance."""

    mc_estimate: float
    mc_standard_error: float
    upper_bound: float
    moment_estimates: np.ndarray
    o_v: float
    o_h: float
    allocation: PowerAllocation
    metadata: dict = field(default_factory=dict)


def equivalent_channel(
    sample, config: RisConfiguration, pm: PropagationMatrix
) -> EquivalentChannel:
    """Collapse one fading sample to the 2x2 equivalent channel."""
    n = config.element_count
    if pm.element_count != n or sample.h_vv.shape[0] != n:
        raise ValueError("sample, configuration and propagation sizes disagree")
    u_v = config.gamma_v * pm.copol_v
    u_h = config.gamma_h * pm.copol_h
    return np.array(
        [
            [sample.h_vv @ u_v, sample.h_vh @ u_h],
            [sample.h_hv @ u_v, sample.h_hh @ u_h],
        ]
    )


def ergodic_capacity_mc(
    stats: ChannelStatistics,
    config: RisConfiguration,
    pm: PropagationMatrix,
    allocation: PowerAllocation,
    budget: LinkBudget,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> McCapacityResult:
    """Monte Carlo mean of log2 det(I2 + rho G Lambda G^H).

    Trial i draws its channel from stream (master_seed, i), and the
    reduction runs over the full per-trial array in index order, so the
    estimate is bitwise identical for any worker count.
    """
    return _run_mc(stats, config, pm, allocation, budget, trials, master_seed, workers, dual=True)


def single_pol_capacity_mc(
    stats: ChannelStatistics,
    config: RisConfiguration,
    pm: PropagationMatrix,
    budget: LinkBudget,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> McCapacityResult:
    """Monte Carlo mean of log2(1 + rho |G11|^2) for the all-V baseline.

    Draws the full four-block sample (using only the VV entry) so the
    stream stays interchangeable with the dual-polarized estimator.
    """
    return _run_mc(stats, config, pm, None, budget, trials, master_seed, workers, dual=False)


def moment_upper_bound(
    moments: Sequence[float], allocation: PowerAllocation, budget: LinkBudget
) -> float:
    """Capacity upper bound from the four second moments of G, in entry
    order (E|G11|^2, E|G12|^2, E|G21|^2, E|G22|^2)."""
    m11, m12, m21, m22 = (float(m) for m in moments)
    if min(m11, m12, m21, m22) < 0.0:
        raise ValueError("moments must be non-negative")
    rho = budget.snr
    shift = (
        rho * allocation.lambda_v * (m11 + m21)
        + rho * allocation.lambda_h * (m12 + m22)
        + rho * rho * allocation.lambda_v * allocation.lambda_h * (m11 * m22 + m12 * m21)
    )
    return float(np.log1p(shift) / _LN2)


def compute_O(
    amplitudes: np.ndarray, pm: PropagationMatrix, stats: ChannelStatistics
) -> float:
    """Quadratic form v^T R v with v_n = A_n |b_n| sqrt(beta0 d_n^-alpha);
    the maximized per-polarization received-power quantity."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    if amplitudes.shape[0] != pm.element_count or amplitudes.shape[0] != stats.element_count:
        raise ValueError("amplitude, propagation and statistics sizes disagree")
    weights = np.sqrt(
        stats.unit_pathloss * stats.element_ue_distances**-stats.pathloss_exponent
    )
    v = amplitudes * np.abs(pm.shared) * weights
    return float(v @ stats.correlation @ v)


def expected_gram_moments(
    config: RisConfiguration, pm: PropagationMatrix, stats: ChannelStatistics
) -> np.ndarray:
    """Exact second moments (E|G11|^2, E|G12|^2, E|G21|^2, E|G22|^2) for an
    arbitrary phase configuration, from the channel's second-order model.

    Under the aligning phases these collapse to ((1-l) O_V, l O_H, l O_V,
    (1-l) O_H).
    """
    weights = np.sqrt(
        stats.unit_pathloss * stats.element_ue_distances**-stats.pathloss_exponent
    )
    kernel = stats.correlation * np.outer(weights, weights)
    u_v = config.gamma_v * pm.copol_v
    u_h = config.gamma_h * pm.copol_h
    q_v = float(np.real(np.conj(u_v) @ kernel @ u_v))
    q_h = float(np.real(np.conj(u_h) @ kernel @ u_h))
    l = stats.xpd_coeff
    return np.array([(1.0 - l) * q_v, l * q_h, l * q_v, (1.0 - l) * q_h])


def closed_form_upper_bound(
    o_v: float,
    o_h: float,
    allocation: PowerAllocation,
    budget: LinkBudget,
    xpd_coeff: float,
) -> float:
    """Phase-maximized capacity upper bound

    log2(1 + rho (lh O_H + lv O_V)
           + rho^2 lh lv O_H O_V (l^2 + (1-l)^2)).
    """
    if o_v < 0.0 or o_h < 0.0:
        raise ValueError("O quantities must be non-negative")
    if not 0.0 <= xpd_coeff <= 1.0:
        raise ValueError(f"xpd coefficient must lie in [0, 1], got {xpd_coeff!r}")
    rho = budget.snr
    lv, lh = allocation.lambda_v, allocation.lambda_h
    shift = rho * (lh * o_h + lv * o_v) + rho * rho * lh * lv * o_h * o_v * _xpd_mix(xpd_coeff)
    return float(np.log1p(shift) / _LN2)


def optimal_power_allocation(
    o_v: float, o_h: float, budget: LinkBudget, xpd_coeff: float
) -> PowerAllocation:
    """Closed-form maximizer of the upper bound over the power split.

    lambda_0 = 1/2 + (O_V - O_H) / (2 rho (l^2 + (1-l)^2) O_V O_H),
    clipped to [0, 1]; the remainder goes to the other polarization.
    """
    if not (o_v > 0.0 and o_h > 0.0):
        raise ValueError("O quantities must both be positive")
    if not 0.0 <= xpd_coeff <= 1.0:
        raise ValueError(f"xpd coefficient must lie in [0, 1], got {xpd_coeff!r}")
    lambda_0 = 0.5 + (o_v - o_h) / (2.0 * budget.snr * _xpd_mix(xpd_coeff) * o_v * o_h)
    lambda_v = float(np.clip(lambda_0, 0.0, 1.0))
    return PowerAllocation(lambda_v, 1.0 - lambda_v)


def single_pol_upper_bound(o_v: float, budget: LinkBudget, xpd_coeff: float) -> float:
    """Maximized upper bound of the all-V baseline:
    log2(1 + rho (1-l) O_V)."""
    if o_v < 0.0:
        raise ValueError("O quantity must be non-negative")
    if not 0.0 <= xpd_coeff <= 1.0:
        raise ValueError(f"xpd coefficient must lie in [0, 1], got {xpd_coeff!r}")
    return float(np.log1p(budget.snr * (1.0 - xpd_coeff) * o_v) / _LN2)


def equal_allocation_lower_bound(
    o_v: float, o_h: float, budget: LinkBudget, xpd_coeff: float
) -> float:
    """Optimally allocated bound floored by the equal split:
    log2(1 + rho (O_H + O_V)/2 + rho^2 O_H O_V (l^2 + (1-l)^2)/4)."""
    return closed_form_upper_bound(o_v, o_h, PowerAllocation.equal(), budget, xpd_coeff)


def xpd_threshold(o_v: float, o_h: float, budget: LinkBudget) -> float:
    """Cross-polarization coefficient above which the equal-allocation
    dual bound exceeds twice the single-polarized bound.

    Root (-b + sqrt(b^2 - 4 a c)) / (2 a) of the quadratic obtained by
    comparing the two bounds in the linear domain.  Raises
    ModelInconsistencyError when the root is non-real or falls outside
    (0, 1), with the quadratic's coefficients attached.
    """
    if not (o_v > 0.0 and o_h > 0.0):
        raise ValueError("O quantities must both be positive")
    rho = budget.snr
    a = rho * rho * o_v * (0.5 * o_h - o_v)
    b = rho * rho * o_v * (2.0 * o_v - 0.5 * o_h) + 2.0 * rho * o_v
    c = rho * rho * o_v * (0.25 * o_h - o_v) + rho * (0.5 * o_h - 1.5 * o_v)
    details = {"a": a, "b": b, "c": c, "snr": rho, "o_v": o_v, "o_h": o_h}
    discriminant = b * b - 4.0 * a * c
    if discriminant < 0.0:
        raise ModelInconsistencyError("threshold root is not real", details=details)
    if a == 0.0:
        raise ModelInconsistencyError("threshold quadratic degenerates", details=details)
    root = (-b + np.sqrt(discriminant)) / (2.0 * a)
    details["root"] = float(root)
    if not 0.0 < root < 1.0:
        raise ModelInconsistencyError(
            f"threshold {root:.6g} falls outside (0, 1)", details=details
        )
    return float(root)


def multiplexing_gain(snr_values: Sequence[float], capacities: Sequence[float]) -> float:
    """Least-squares slope of capacity against log2(snr) over a high-SNR
    window (every point must have snr >= 1e4; at least two points)."""
    snr = np.asarray(snr_values, dtype=float)
    cap = np.asarray(capacities, dtype=float)
    if snr.shape != cap.shape or snr.size < 2:
        raise ValueError("need at least two matching (snr, capacity) points")
    if np.any(snr < 1e4):
        raise ValueError("multiplexing slope is defined on the high-SNR window (snr >= 1e4)")
    slope, _ = np.polyfit(np.log2(snr), cap, 1)
    return float(slope)


def capacity_report(
    stats: ChannelStatistics,
    config: RisConfiguration,
    pm: PropagationMatrix,
    allocation: PowerAllocation,
    budget: LinkBudget,
    trials: int,
    master_seed: int,
    workers: int = 1,
    metadata: dict | None = None,
) -> CapacityReport:
    """Monte Carlo estimate plus the matching closed-form quantities.

    The bound always uses the exact O quadratic forms, never the Monte
    Carlo moments; the moments travel alongside for diagnostics.
    """
    mc = ergodic_capacity_mc(stats, config, pm, allocation, budget, trials, master_seed, workers)
    o_v = compute_O(config.amplitudes_v, pm, stats)
    o_h = compute_O(config.amplitudes_h, pm, stats)
    bound = closed_form_upper_bound(o_v, o_h, allocation, budget, stats.xpd_coeff)
    meta = {"trials": trials, "master_seed": master_seed}
    if metadata:
        meta.update(metadata)
    return CapacityReport(
        mc_estimate=mc.estimate,
        mc_standard_error=mc.standard_error,
        upper_bound=bound,
        moment_estimates=mc.moments,
        o_v=o_v,
        o_h=o_h,
        allocation=allocation,
        metadata=meta,
    )


def _xpd_mix(xpd_coeff: float) -> float:
    return xpd_coeff * xpd_coeff + (1.0 - xpd_coeff) * (1.0 - xpd_coeff)


def _run_mc(
    stats: ChannelStatistics,
    config: RisConfiguration,
    pm: PropagationMatrix,
    allocation: PowerAllocation | None,
    budget: LinkBudget,
    trials: int,
    master_seed: int,
    workers: int,
    dual: bool,
) -> McCapacityResult:
    if trials < 1:
        raise ValueError(f"trial count must be at least 1, got {trials!r}")
    if workers < 1:
        raise ValueError(f"worker count must be at least 1, got {workers!r}")
    n = config.element_count
    if pm.element_count != n or stats.element_count != n:
        raise ValueError("configuration, propagation and statistics sizes disagree")

    u_v = config.gamma_v * pm.copol_v
    u_h = config.gamma_h * pm.copol_h
    streams = SeededStreamFactory(master_seed)
    per_trial = np.empty(trials)
    gram = np.empty((trials, 4))
    rho = budget.snr

    def run_range(start: int, stop: int) -> None:
        for i in range(start, stop):
            sample = sample_channel(stats, streams.stream(i))
            g = np.array(
                [
                    [sample.h_vv @ u_v, sample.h_vh @ u_h],
                    [sample.h_hv @ u_v, sample.h_hh @ u_h],
                ]
            )
            flat = g.ravel()
            gram[i] = flat.real**2 + flat.imag**2
            if dual:
                shift = det2_shift(g, allocation.lambda_v, allocation.lambda_h, rho)
            else:
                shift = rho * gram[i, 0]
            per_trial[i] = np.log1p(shift) / _LN2

    if workers == 1:
        run_range(0, trials)
    else:
        bounds = np.linspace(0, trials, workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_range, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:])
                if b > a
            ]
            for future in futures:
                future.result()

    estimate = float(np.mean(per_trial))
    if trials > 1:
        se = float(np.std(per_trial, ddof=1) / np.sqrt(trials))
        moment_se = np.std(gram, axis=0, ddof=1) / np.sqrt(trials)
    else:
        se = 0.0
        moment_se = np.zeros(4)
    return McCapacityResult(
        estimate=estimate,
        standard_error=se,
        moments=gram.mean(axis=0),
        moment_standard_errors=moment_se,
        trials=trials,
        master_seed=master_seed,
    )
