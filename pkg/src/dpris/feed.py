"""Feed radiation pattern and the deterministic near-field feed-to-surface
propagation coefficients (non-uniform spherical wave model).

Each coefficient combines the feed gain toward the element, the element's
projected aperture as seen from the feed, free-space spreading, and the
carrier phase accumulated over the feed distance:

    b_n = sqrt(G_n * A_n / (4 pi D_n^2)) * exp(-j 2 pi D_n / lambda)

The co-polarized vectors are this shared coefficient rotated by the fixed
per-polarization feed phase; cross-polarized feeding is zero because the
line-of-sight hop preserves polarization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateGeometryError
from .geometry import RisGeometry, U_X
from .numerics import gauss_legendre


@dataclass(frozen=True)
class FeedSpec:
    """Feed placement, orientation and pattern.

    ``gain`` is the linear boresight gain (kappa >= 2, so the pattern
    exponent kappa/2 - 1 is non-negative and the hemisphere integral is
    finite).  ``copol_phase_v`` / ``copol_phase_h`` are the fixed feeding
    phases of the two polarizations, radians.
    """

    position: np.ndarray
    boresight: np.ndarray
    gain: float
    copol_phase_v: float = 0.0
    copol_phase_h: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "boresight", np.asarray(self.boresight, dtype=float))
        norm = float(np.linalg.norm(self.boresight))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"boresight must be a unit vector, |n| = {norm!r}")
        if not self.gain >= 2.0:
            raise ValueError(f"feed gain must be >= 2 (linear), got {self.gain!r}")


def boresight_from_angles(eta: float, beta: float, gamma: float) -> np.ndarray:
    """Boresight (cos eta, cos beta, cos gamma) from its axis angles.

    The three direction cosines must describe a unit vector.
    """
    n = np.array([np.cos(eta), np.cos(beta), np.cos(gamma)])
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(
            f"direction angles ({eta}, {beta}, {gamma}) do not form a unit vector"
        )
    return n / norm


@dataclass(frozen=True)
class PropagationMatrix:
    """Feed-to-surface coefficients.

    ``shared`` holds the per-element coefficients b_n; the co-polarized
    vectors differ from it only by the constant feeding phases, so their
    magnitudes coincide.  Cross-polarized blocks are identically zero and
    therefore not stored.
    """

    shared: np.ndarray
    copol_v: np.ndarray
    copol_h: np.ndarray

    @property
    def element_count(self) -> int:
        return self.shared.shape[0]


def feed_gain(feed: FeedSpec, direction: np.ndarray) -> float:
    """Pattern value kappa * (r . n)^(kappa/2 - 1) toward a unit direction,
    zero in the back hemisphere (r . n < 0)."""
    dot = float(np.dot(np.asarray(direction, dtype=float), feed.boresight))
    if dot < 0.0:
        return 0.0
    return float(feed.gain * dot ** (feed.gain / 2.0 - 1.0))


def feed_gains(feed: FeedSpec, directions: np.ndarray) -> np.ndarray:
    """Vectorized pattern over rows of unit directions."""
    dots = np.asarray(directions, dtype=float) @ feed.boresight
    front = np.maximum(dots, 0.0)
    return np.where(dots < 0.0, 0.0, feed.gain * front ** (feed.gain / 2.0 - 1.0))


def nusw_coefficient(geometry: RisGeometry, feed: FeedSpec, element_index: int) -> complex:
    """Spherical-wave coefficient b_n for one element.

    Raises DegenerateGeometryError when the element's projected aperture
    toward the feed is non-positive (feed in the surface plane or behind
    the reflecting face).
    """
    if not 0 <= element_index < geometry.element_count:
        raise ValueError(
            f"element index {element_index} outside [0, {geometry.element_count})"
        )
    position = geometry.element_positions[element_index]
    shared = _shared_coefficients(
        geometry, feed, position[None, :], np.array([element_index])
    )
    return complex(shared[0])


def build_propagation_matrix(geometry: RisGeometry, feed: FeedSpec) -> PropagationMatrix:
    """All-element coefficients with the co-polarization phases applied."""
    shared = _shared_coefficients(
        geometry, feed, geometry.element_positions, np.arange(geometry.element_count)
    )
    shared.setflags(write=False)
    copol_v = np.exp(1j * feed.copol_phase_v) * shared
    copol_h = np.exp(1j * feed.copol_phase_h) * shared
    copol_v.setflags(write=False)
    copol_h.setflags(write=False)
    return PropagationMatrix(shared=shared, copol_v=copol_v, copol_h=copol_h)


def captured_power_fraction(pm: PropagationMatrix) -> float:
    """Fraction of the radiated feed power intercepted by the surface,
    sum of |b_n|^2; bounded by 1 by energy conservation."""
    return float(np.sum(np.abs(pm.shared) ** 2))


def pattern_hemisphere_integral(feed: FeedSpec, theta_nodes: int = 128, phi_nodes: int = 128) -> float:
    """Numerically integrate the feed pattern over its front hemisphere.

    Product Gauss-Legendre rule over (theta, phi) around the boresight;
    a correctly normalized pattern integrates to 4 pi for every kappa.
    """
    e1, e2 = _orthonormal_complement(feed.boresight)
    theta, w_theta = gauss_legendre(theta_nodes, 0.0, np.pi / 2.0)
    phi, w_phi = gauss_legendre(phi_nodes, 0.0, 2.0 * np.pi)
    sin_t = np.sin(theta)[:, None]
    cos_t = np.cos(theta)[:, None]
    dirs = (
        sin_t[..., None] * np.cos(phi)[None, :, None] * e1
        + sin_t[..., None] * np.sin(phi)[None, :, None] * e2
        + cos_t[..., None] * feed.boresight
    )
    values = feed_gains(feed, dirs.reshape(-1, 3)).reshape(theta_nodes, phi_nodes)
    weights = (w_theta * sin_t[:, 0])[:, None] * w_phi[None, :]
    return float(np.sum(values * weights))


def _shared_coefficients(
    geometry: RisGeometry,
    feed: FeedSpec,
    positions: np.ndarray,
    indices: np.ndarray,
) -> np.ndarray:
    delta = feed.position[None, :] - positions
    distances = np.linalg.norm(delta, axis=1)
    if np.any(distances == 0.0):
        raise DegenerateGeometryError("feed coincides with an element")
    projected = (delta @ (-U_X)) * geometry.element_area / distances
    bad = np.nonzero(projected <= 0.0)[0]
    if bad.size:
        raise DegenerateGeometryError(
            f"element {int(indices[bad[0]])} has non-positive projected aperture "
            "(feed is in or behind the surface plane)"
        )
    toward = -delta / distances[:, None]
    gains = feed_gains(feed, toward)
    magnitude = np.sqrt(gains * projected / (4.0 * np.pi * distances**2))
    return magnitude * np.exp(-2j * np.pi * distances / geometry.wavelength)


def _orthonormal_complement(unit: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(unit, helper)) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    e1 = np.cross(unit, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(unit, e1)
    return e1, e2
