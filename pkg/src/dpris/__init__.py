"""Dual-polarized reflective-surface link simulator.

Geometry, near-field feeding, angle-dependent reflection, correlated
dual-polarized Rayleigh fading, Monte Carlo ergodic capacity with matching
closed-form bounds, optimal power allocation across polarizations, and the
single-polarized baseline comparison.
"""

from .capacity import (
    CapacityReport,
    LinkBudget,
    McCapacityResult,
    PowerAllocation,
    capacity_report,
    closed_form_upper_bound,
    compute_O,
    equal_allocation_lower_bound,
    equivalent_channel,
    ergodic_capacity_mc,
    expected_gram_moments,
    moment_upper_bound,
    multiplexing_gain,
    optimal_power_allocation,
    single_pol_capacity_mc,
    single_pol_upper_bound,
    xpd_threshold,
)
from .channel import (
    ChannelSample,
    ChannelStatistics,
    build_channel_statistics,
    correlation_matrix,
    correlation_sqrt,
    pathloss_vectors,
    sample_channel,
)
from .exceptions import DegenerateGeometryError, ModelInconsistencyError
from .feed import (
    FeedSpec,
    PropagationMatrix,
    boresight_from_angles,
    build_propagation_matrix,
    captured_power_fraction,
    feed_gain,
    feed_gains,
    nusw_coefficient,
    pattern_hemisphere_integral,
)
from .geometry import (
    IncidenceDecomposition,
    RisGeometry,
    SphericalPlacement,
    axis_plane_tilt,
    build_ris_grid,
    incidence_decomposition,
    incidence_decompositions,
    spherical_to_cartesian,
    transverse_plane_tilt,
)
from .numerics import (
    SeededStreamFactory,
    db_to_linear,
    dbm_to_watts,
    det2_hermitian_form,
    linear_to_db,
    symmetric_eigendecomposition,
)
from .ris import (
    AmplitudeModel,
    RisConfiguration,
    build_configuration,
    element_amplitudes,
    optimal_phases,
    phase_strategy,
    reflection_amplitude,
)
from .scenario import Scenario, build_link_model, normalize_unit_ov, resolve_allocation

__version__ = "0.1.0"
