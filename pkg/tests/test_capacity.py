import numpy as np
import pytest

from dpris import capacity, channel, feed, geometry, ris, scenario as scen
from dpris.channel import ChannelSample
from dpris.exceptions import ModelInconsistencyError
from dpris.numerics import SeededStreamFactory

from conftest import PITCH, WAVELENGTH

LN2 = np.log(2.0)


def unit_budget(snr=1.0):
    return capacity.LinkBudget.from_snr(snr)


def manual_sample(h_vv, h_vh, h_hv, h_hh):
    return ChannelSample(
        h_vv=np.asarray(h_vv, dtype=complex),
        h_vh=np.asarray(h_vh, dtype=complex),
        h_hv=np.asarray(h_hv, dtype=complex),
        h_hh=np.asarray(h_hh, dtype=complex),
    )


def unit_pm(n):
    ones = np.ones(n, dtype=complex)
    return feed.PropagationMatrix(shared=ones, copol_v=ones, copol_h=ones)


def unit_config(n, amplitude=1.0):
    return ris.RisConfiguration(
        amplitudes_v=np.full(n, amplitude),
        amplitudes_h=np.full(n, amplitude),
        phases_v=np.zeros(n),
        phases_h=np.zeros(n),
    )


def test_power_allocation_validation():
    with pytest.raises(ValueError):
        capacity.PowerAllocation(0.7, 0.5)
    with pytest.raises(ValueError):
        capacity.PowerAllocation(-0.1, 0.5)
    assert capacity.PowerAllocation.equal().lambda_v == 0.5
    split = capacity.PowerAllocation.split(0.3)
    assert split.lambda_h == 0.7


def test_link_budget_validation():
    with pytest.raises(ValueError):
        capacity.LinkBudget.from_snr(0.0)
    with pytest.raises(ValueError):
        capacity.LinkBudget(snr=5.0, noise_variance=1.0, transmit_power=1.0)
    ok = capacity.LinkBudget.from_powers(2.0, 0.5)
    assert ok.snr == 4.0


def test_equivalent_channel_trivial_cases():
    g = capacity.equivalent_channel(
        manual_sample([1 + 2j], [0], [0], [3j]), unit_config(1), unit_pm(1)
    )
    assert g[0, 0] == 1 + 2j
    assert g[0, 1] == 0 and g[1, 0] == 0
    assert g[1, 1] == 3j

    zero_amp = capacity.equivalent_channel(
        manual_sample([1], [1], [1], [1]), unit_config(1, amplitude=0.0), unit_pm(1)
    )
    assert np.all(zero_amp == 0.0)

    with pytest.raises(ValueError):
        capacity.equivalent_channel(manual_sample([1], [1], [1], [1]), unit_config(2), unit_pm(2))


def test_equivalent_channel_matched_xpd_kills_cross_entries(model16):
    stats0 = channel.build_channel_statistics(
        model16.geometry,
        scen.ue_position(scen.Scenario(elements=16)),
        model16.stats.unit_pathloss,
        model16.stats.pathloss_exponent,
        0.0,
    )
    sample = channel.sample_channel(stats0, np.random.default_rng(1))
    g = capacity.equivalent_channel(sample, model16.config, model16.pm)
    assert g[0, 1] == 0.0 and g[1, 0] == 0.0
    assert g[0, 0] != 0.0


def test_mc_zero_allocation_is_exactly_zero(model16):
    result = capacity.ergodic_capacity_mc(
        model16.stats,
        model16.config,
        model16.pm,
        capacity.PowerAllocation(0.0, 0.0),
        unit_budget(1e6),
        trials=50,
        master_seed=1,
    )
    assert result.estimate == 0.0
    assert result.standard_error == 0.0


def test_mc_vanishes_at_low_snr(model16):
    result = capacity.ergodic_capacity_mc(
        model16.stats,
        model16.config,
        model16.pm,
        capacity.PowerAllocation.equal(),
        unit_budget(1e-9),
        trials=200,
        master_seed=3,
    )
    assert 0.0 < result.estimate < 1e-6


def test_mc_rejects_bad_arguments(model16):
    with pytest.raises(ValueError):
        capacity.ergodic_capacity_mc(
            model16.stats,
            model16.config,
            model16.pm,
            capacity.PowerAllocation.equal(),
            unit_budget(),
            trials=0,
            master_seed=1,
        )
    with pytest.raises(ValueError):
        capacity.single_pol_capacity_mc(
            model16.stats, model16.config, model16.pm, unit_budget(), 10, 1, workers=0
        )


def test_single_pol_matches_scalar_oracle():
    # N = 1: recompute E log2(1 + rho |G11|^2) by brute force on the same
    # streams, outside the estimator
    base = scen.Scenario(elements=1)
    model = scen.build_link_model(base)
    rho = 2.5e12
    trials = 400
    result = capacity.single_pol_capacity_mc(
        model.stats, model.config, model.pm, unit_budget(rho), trials, master_seed=9
    )
    factory = SeededStreamFactory(9)
    u_v = model.config.gamma_v * model.pm.copol_v
    values = np.empty(trials)
    for i in range(trials):
        sample = channel.sample_channel(model.stats, factory.stream(i))
        g11 = sample.h_vv[0] * u_v[0]
        values[i] = np.log1p(rho * abs(g11) ** 2) / LN2
    assert result.estimate == pytest.approx(float(values.mean()), abs=1e-15)


def test_single_pol_equals_dual_with_v_only_power_when_matched(model16):
    # with xpd_coeff = 0 the HV entry vanishes, so the dual estimator under
    # allocation (1, 0) collapses to the single-polarized one on shared
    # sample streams
    base = scen.Scenario(elements=16, xpd_coeff=0.0)
    model = scen.build_link_model(base)
    budget = unit_budget(3e12)
    dual = capacity.ergodic_capacity_mc(
        model.stats,
        model.config,
        model.pm,
        capacity.PowerAllocation(1.0, 0.0),
        budget,
        trials=500,
        master_seed=21,
    )
    single = capacity.single_pol_capacity_mc(
        model.stats, model.config, model.pm, budget, trials=500, master_seed=21
    )
    assert dual.estimate == single.estimate


def test_moment_upper_bound_values():
    equal = capacity.PowerAllocation.equal()
    assert capacity.moment_upper_bound((0, 0, 0, 0), equal, unit_budget()) == 0.0
    # quadratic term drops when one polarization gets no power
    only_v = capacity.PowerAllocation(0.6, 0.0)
    value = capacity.moment_upper_bound((0.8, 0.1, 0.2, 0.9), only_v, unit_budget(2.0))
    assert value == pytest.approx(np.log1p(2.0 * 0.6 * 1.0) / LN2, rel=1e-12)
    # full reference case, recomputed independently
    full = capacity.moment_upper_bound((0.8, 0.1, 0.2, 0.9), equal, unit_budget())
    assert full == pytest.approx(1.1276332797258737, rel=1e-12)
    with pytest.raises(ValueError):
        capacity.moment_upper_bound((0.1, -0.2, 0.3, 0.4), equal, unit_budget())


def test_compute_O_small_cases():
    pm = unit_pm(1)
    pm_half = feed.PropagationMatrix(
        shared=np.array([0.5 + 0.0j]),
        copol_v=np.array([0.5 + 0.0j]),
        copol_h=np.array([0.5 + 0.0j]),
    )
    stats = channel.ChannelStatistics(
        unit_pathloss=2.0,
        pathloss_exponent=1.0,
        xpd_coeff=0.2,
        element_ue_distances=np.array([4.0]),
        correlation=np.eye(1),
        correlation_sqrt=np.eye(1),
        pathloss_co=np.array([0.4]),
        pathloss_cross=np.array([0.1]),
    )
    # N = 1: O = A^2 |b|^2 beta0 d^-alpha
    assert capacity.compute_O(np.array([0.3]), pm_half, stats) == pytest.approx(
        0.3**2 * 0.25 * 2.0 / 4.0, rel=1e-12
    )
    assert capacity.compute_O(np.array([1.0]), pm, stats) == pytest.approx(0.5, rel=1e-12)


def test_compute_O_identity_correlation_reduces_to_sum():
    rng = np.random.default_rng(8)
    n = 6
    amplitudes = rng.uniform(0, 1, n)
    shared = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    pm = feed.PropagationMatrix(shared=shared, copol_v=shared, copol_h=shared)
    stats = channel.ChannelStatistics(
        unit_pathloss=1.3,
        pathloss_exponent=2.0,
        xpd_coeff=0.5,
        element_ue_distances=rng.uniform(1, 10, n),
        correlation=np.eye(n),
        correlation_sqrt=np.eye(n),
        pathloss_co=np.ones(n),
        pathloss_cross=np.ones(n),
    )
    expected = np.sum(
        amplitudes**2
        * np.abs(shared) ** 2
        * 1.3
        * stats.element_ue_distances**-2.0
    )
    assert capacity.compute_O(amplitudes, pm, stats) == pytest.approx(expected, rel=1e-12)


def test_compute_O_matches_double_sum_oracle():
    rng = np.random.default_rng(15)
    n = 8
    for _ in range(10):
        amplitudes = rng.uniform(0, 1, n)
        shared = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        pm = feed.PropagationMatrix(shared=shared, copol_v=shared, copol_h=shared)
        a = rng.standard_normal((n, n))
        correlation = (a + a.T) / 2.0
        np.fill_diagonal(correlation, 1.0)
        distances = rng.uniform(1, 100, n)
        beta0, alpha = rng.uniform(0.1, 2.0), rng.uniform(1.0, 4.0)
        stats = channel.ChannelStatistics(
            unit_pathloss=beta0,
            pathloss_exponent=alpha,
            xpd_coeff=0.2,
            element_ue_distances=distances,
            correlation=correlation,
            correlation_sqrt=np.eye(n),
            pathloss_co=np.ones(n),
            pathloss_cross=np.ones(n),
        )
        brute = 0.0
        for n1 in range(n):
            for n2 in range(n):
                brute += (
                    amplitudes[n1]
                    * amplitudes[n2]
                    * abs(shared[n1])
                    * abs(shared[n2])
                    * correlation[n1, n2]
                    * beta0
                    * np.sqrt(distances[n1] ** -alpha * distances[n2] ** -alpha)
                )
        assert capacity.compute_O(amplitudes, pm, stats) == pytest.approx(brute, rel=1e-12)


def test_closed_form_equals_moment_bound_with_model_moments():
    rng = np.random.default_rng(31)
    for _ in range(25):
        o_v, o_h = rng.uniform(0.1, 3.0, 2)
        l = rng.uniform(0.0, 1.0)
        allocation = capacity.PowerAllocation.split(rng.uniform(0.0, 1.0))
        budget = unit_budget(rng.uniform(0.01, 50.0))
        moments = ((1 - l) * o_v, l * o_h, l * o_v, (1 - l) * o_h)
        assert capacity.closed_form_upper_bound(
            o_v, o_h, allocation, budget, l
        ) == pytest.approx(
            capacity.moment_upper_bound(moments, allocation, budget), rel=1e-12
        )


def test_closed_form_reference_value_and_endpoint_symmetry():
    value = capacity.closed_form_upper_bound(
        2.0, 1.0, capacity.PowerAllocation.split(0.75), unit_budget(), 0.0
    )
    assert value == pytest.approx(1.6438561897747247, rel=1e-12)
    matched = capacity.closed_form_upper_bound(
        1.7, 0.4, capacity.PowerAllocation.equal(), unit_budget(3.0), 0.0
    )
    mismatched = capacity.closed_form_upper_bound(
        1.7, 0.4, capacity.PowerAllocation.equal(), unit_budget(3.0), 1.0
    )
    assert matched == mismatched


def test_optimal_allocation_symmetric_and_reference():
    balanced = capacity.optimal_power_allocation(1.0, 1.0, unit_budget(), 0.3)
    assert balanced.lambda_v == 0.5 and balanced.lambda_h == 0.5
    skewed = capacity.optimal_power_allocation(2.0, 1.0, unit_budget(), 0.0)
    assert skewed.lambda_v == pytest.approx(0.75, rel=1e-12)
    assert skewed.lambda_h == pytest.approx(0.25, rel=1e-12)


def test_optimal_allocation_evens_out_at_high_snr():
    allocation = capacity.optimal_power_allocation(3.0, 1.0, unit_budget(1e12), 0.2)
    assert abs(allocation.lambda_v - 0.5) < 1e-6


def test_optimal_allocation_matches_grid_search():
    rng = np.random.default_rng(44)
    grid = np.linspace(0.0, 1.0, 10_001)
    for _ in range(25):
        o_v = 10.0 ** rng.uniform(-13, -9)
        o_h = 10.0 ** rng.uniform(-13, -9)
        rho = 10.0 ** rng.uniform(0, 6)
        l = rng.uniform(0.0, 1.0)
        budget = unit_budget(rho)
        best = capacity.optimal_power_allocation(o_v, o_h, budget, l)
        mix = l * l + (1 - l) * (1 - l)
        shift = rho * ((1 - grid) * o_h + grid * o_v) + rho * rho * grid * (1 - grid) * o_h * o_v * mix
        assert abs(best.lambda_v - grid[int(np.argmax(shift))]) <= 2e-4


def test_optimal_allocation_rejects_zero_quality():
    with pytest.raises(ValueError):
        capacity.optimal_power_allocation(0.0, 0.0, unit_budget(), 0.2)


def test_single_pol_bound_values():
    assert capacity.single_pol_upper_bound(5.0, unit_budget(), 1.0) == 0.0
    one_bit = capacity.single_pol_upper_bound(1.0, unit_budget(1.0), 0.0)
    assert one_bit == pytest.approx(1.0, abs=1e-15)
    values = [
        capacity.single_pol_upper_bound(2.0, unit_budget(4.0), l)
        for l in np.linspace(0.0, 1.0, 41)
    ]
    assert np.all(np.diff(values) < 0.0)


def test_equal_allocation_bound_properties():
    budget = unit_budget()
    assert capacity.equal_allocation_lower_bound(1.0, 1.0, budget, 0.0) == pytest.approx(
        1.1699250014423124, rel=1e-12
    )
    rng = np.random.default_rng(3)
    for _ in range(25):
        o_v, o_h = rng.uniform(0.1, 4.0, 2)
        l = rng.uniform(0.0, 1.0)
        b = unit_budget(rng.uniform(0.1, 10.0))
        eq = capacity.equal_allocation_lower_bound(o_v, o_h, b, l)
        assert eq == capacity.closed_form_upper_bound(
            o_v, o_h, capacity.PowerAllocation.equal(), b, l
        )
        best = capacity.optimal_power_allocation(o_v, o_h, b, l)
        assert eq <= capacity.closed_form_upper_bound(o_v, o_h, best, b, l) + 1e-12


def test_xpd_threshold_symmetric_reference():
    # rho * O = 1 exactly: threshold is (7 - sqrt(35)) / 2
    value = capacity.xpd_threshold(0.25, 0.25, unit_budget(4.0))
    assert value == pytest.approx(0.5419601084501920, rel=1e-12)


def test_xpd_threshold_definition_holds_at_root():
    budget = unit_budget(7.3e12)
    o_v, o_h = 3.1e-13, 2.2e-13
    root = capacity.xpd_threshold(o_v, o_h, budget)
    dual = capacity.equal_allocation_lower_bound(o_v, o_h, budget, root)
    single = capacity.single_pol_upper_bound(o_v, budget, root)
    assert dual == pytest.approx(2.0 * single, abs=1e-9)


def test_xpd_threshold_sign_change_bracket():
    rng = np.random.default_rng(62)
    found = 0
    grid = np.linspace(0.0, 1.0, 20_001)
    while found < 10:
        o_v = 10.0 ** rng.uniform(-13, -9)
        o_h = 10.0 ** rng.uniform(-13, -9)
        rho = 10.0 ** rng.uniform(10, 14)
        budget = unit_budget(rho)
        try:
            root = capacity.xpd_threshold(o_v, o_h, budget)
        except ModelInconsistencyError:
            continue
        dual = np.array(
            [capacity.equal_allocation_lower_bound(o_v, o_h, budget, l) for l in grid]
        )
        single = np.array(
            [capacity.single_pol_upper_bound(o_v, budget, l) for l in grid]
        )
        sign = np.sign(dual - 2.0 * single)
        changes = np.nonzero(np.diff(sign) != 0)[0]
        assert changes.size >= 1
        step = grid[1] - grid[0]
        assert any(grid[c] - step <= root <= grid[c + 1] + step for c in changes)
        found += 1


def test_xpd_threshold_error_paths():
    with pytest.raises(ValueError):
        capacity.xpd_threshold(0.0, 1.0, unit_budget())
    with pytest.raises(ModelInconsistencyError) as excinfo:
        # strongly mismatched qualities at low SNR push the root negative
        capacity.xpd_threshold(1e-13, 9e-13, unit_budget(1.0))
    assert "root" in excinfo.value.details


def test_multiplexing_gain_synthetic_and_errors():
    snr = np.array([1e4, 1e5, 1e6])
    caps = 2.0 * np.log2(1.0 + snr)
    assert capacity.multiplexing_gain(snr, caps) == pytest.approx(2.0, abs=1e-3)
    with pytest.raises(ValueError):
        capacity.multiplexing_gain([1e5], [10.0])
    with pytest.raises(ValueError):
        capacity.multiplexing_gain([10.0, 1e5], [1.0, 2.0])


def test_mc_worker_count_is_bitwise_invariant(model16):
    kwargs = dict(
        allocation=capacity.PowerAllocation.equal(),
        budget=unit_budget(2e12),
        trials=600,
        master_seed=5,
    )
    serial = capacity.ergodic_capacity_mc(
        model16.stats, model16.config, model16.pm, workers=1, **kwargs
    )
    threaded = capacity.ergodic_capacity_mc(
        model16.stats, model16.config, model16.pm, workers=4, **kwargs
    )
    assert serial.estimate == threaded.estimate
    assert serial.standard_error == threaded.standard_error
    np.testing.assert_array_equal(serial.moments, threaded.moments)


def test_capacity_report_is_jensen_consistent(model16):
    allocation = capacity.PowerAllocation.equal()
    report = capacity.capacity_report(
        model16.stats,
        model16.config,
        model16.pm,
        allocation,
        model16.budget,
        trials=3000,
        master_seed=12,
    )
    assert report.mc_estimate <= report.upper_bound + 3.0 * report.mc_standard_error
    assert report.metadata["trials"] == 3000
    assert report.o_v > 0.0 and report.o_h > 0.0


def test_expected_moments_match_aligned_closed_form(model16):
    moments = capacity.expected_gram_moments(model16.config, model16.pm, model16.stats)
    l = model16.stats.xpd_coeff
    expected = np.array(
        [(1 - l) * model16.o_v, l * model16.o_h, l * model16.o_v, (1 - l) * model16.o_h]
    )
    np.testing.assert_allclose(moments, expected, rtol=1e-9)
