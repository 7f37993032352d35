"""Array geometry, element patterns, steering vectors, and angular grids.

All lengths are expressed in wavelengths, so the wavenumber is k = 2*pi.
Uniform linear arrays sit on the z axis with the first element at the
origin.  Two phase conventions are supported when evaluating fields on a
grid: "axial" keeps the displacement along the pattern's polar axis
(phases go with cos(theta)), while "in_plane" rotates the array into the
theta = pi/2 plane (phases go with sin(theta)*sin(phi)), which is the
configuration used for H-plane measurements.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

K = 2.0 * np.pi

ELEMENT_KINDS = ("isotropic", "ideal_dipole")
ORIENTATIONS = ("axial", "in_plane")


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array of identical elements on the z axis."""

    element_count: int
    spacing: float
    axis: str = "z"
    element: str = "isotropic"
    dipole_length: float = 0.5

    def __post_init__(self):
        if self.element_count < 1:
            raise ValueError("element_count must be >= 1")
        if not self.spacing > 0.0:
            raise ValueError("spacing must be positive")
        if self.axis != "z":
            raise ValueError("only z-axis arrays are supported")
        if self.element not in ELEMENT_KINDS:
            raise ValueError("unknown element kind %r" % (self.element,))
        if not self.dipole_length > 0.0:
            raise ValueError("dipole_length must be positive")

    def positions(self):
        """Element positions (M, 3) in wavelengths: (0, 0, (m-1)*d)."""
        m = np.arange(self.element_count)
        pos = np.zeros((self.element_count, 3))
        pos[:, 2] = m * self.spacing
        return pos


@dataclass(frozen=True)
class Direction:
    """Far-field direction in spherical coordinates (radians)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError("theta must lie in [0, pi]")
        if not -np.pi < self.phi <= np.pi + 1e-12:
            raise ValueError("phi must lie in (-pi, pi]")

    def unit_vector(self):
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi),
                         st * np.sin(self.phi),
                         np.cos(self.theta)])


@dataclass(frozen=True)
class ElementPattern:
    kind: str = "isotropic"

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise ValueError("unknown element kind %r" % (self.kind,))


@dataclass(frozen=True)
class AngularGrid:
    """Sampling directions with quadrature weights.

    ``kind`` is "full_sphere" (weights sum to 4*pi) or "h_plane"
    (theta = pi/2 everywhere, weights sum to 2*pi).
    """

    theta: np.ndarray
    phi: np.ndarray
    weight: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in ("full_sphere", "h_plane"):
            raise ValueError("unknown grid kind %r" % (self.kind,))
        if not (len(self.theta) == len(self.phi) == len(self.weight)):
            raise ValueError("grid arrays must share one length")
        if np.any(self.weight < 0.0):
            raise ValueError("grid weights must be non-negative")
        total = self.weight.sum()
        nominal = 4.0 * np.pi if self.kind == "full_sphere" else 2.0 * np.pi
        if abs(total - nominal) > 1e-9 * nominal:
            raise ValueError("grid weights sum to %g, expected %g" %
                             (total, nominal))
        if self.kind == "h_plane" and np.any(np.abs(self.theta - np.pi / 2) > 1e-12):
            raise ValueError("h_plane grid requires theta = pi/2 everywhere")

    @property
    def size(self):
        return len(self.theta)

    def same_points(self, other):
        return (self.kind == other.kind and self.size == other.size and
                np.array_equal(self.theta, other.theta) and
                np.array_equal(self.phi, other.phi))


def gain_arrays(element, theta, phi):
    """Per-polarization element gain over arrays of angles.

    Returns (g_theta, g_phi).  Ideal dipoles radiate sin(theta) in the
    theta polarization only; isotropic elements radiate 1.
    """
    theta = np.asarray(theta, dtype=float)
    if element == "isotropic":
        g_theta = np.ones_like(theta)
    elif element == "ideal_dipole":
        g_theta = np.sin(theta)
    else:
        raise ValueError("unknown element kind %r" % (element,))
    return g_theta, np.zeros_like(g_theta)


def element_gain(pattern, direction):
    """Complex gain pair (g_theta, g_phi) of one element in one direction."""
    g_theta, g_phi = gain_arrays(pattern.kind, direction.theta, direction.phi)
    return complex(g_theta), complex(g_phi)


def phase_argument(theta, phi, orientation):
    """Direction cosine multiplying k*(m-1)*d in the steering phase."""
    if orientation == "axial":
        return np.cos(theta)
    if orientation == "in_plane":
        return np.sin(theta) * np.sin(phi)
    raise ValueError("unknown orientation %r" % (orientation,))


def default_orientation(grid_kind):
    """H-plane work uses the in-plane (measurement) configuration."""
    return "in_plane" if grid_kind == "h_plane" else "axial"


def steering_vector(geom, direction, orientation="axial"):
    """Steering vector e with e[m] = g(theta, phi) * exp(j*k*(m-1)*d*u)."""
    u = phase_argument(direction.theta, direction.phi, orientation)
    g_theta, _ = gain_arrays(geom.element, direction.theta, direction.phi)
    m = np.arange(geom.element_count)
    return g_theta * np.exp(1j * K * geom.spacing * m * u)


def steering_matrix(geom, theta, phi, orientation):
    """Design matrix (P, M) of theta-polarized fields over angle arrays."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    u = phase_argument(theta, phi, orientation)
    g_theta, _ = gain_arrays(geom.element, theta, phi)
    m = np.arange(geom.element_count)
    return g_theta[:, None] * np.exp(1j * K * geom.spacing * u[:, None] * m[None, :])


def sphere_grid(n_theta, n_phi):
    """Full-sphere grid: Gauss-Legendre in cos(theta) x trapezoid in phi.

    The sin(theta) Jacobian is folded into the Gauss-Legendre measure, so
    the weights sum to 4*pi exactly up to round-off.
    """
    if n_theta < 2 or n_phi < 2:
        raise ValueError("sphere_grid requires n_theta >= 2 and n_phi >= 2")
    u, w = roots_legendre(n_theta)
    theta = np.arccos(u)
    phi = -np.pi + 2.0 * np.pi * np.arange(n_phi) / n_phi
    th = np.repeat(theta, n_phi)
    ph = np.tile(phi, n_theta)
    wt = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi)
    return AngularGrid(theta=th, phi=ph, weight=wt, kind="full_sphere")


def hplane_grid(step_deg):
    """H-plane cut: phi ascending from -180 exclusive to 180 inclusive."""
    n = 360.0 / step_deg
    if abs(n - round(n)) > 1e-9:
        raise ValueError("step_deg must divide 360 evenly, got %g" % (step_deg,))
    n = int(round(n))
    phi_deg = -180.0 + step_deg * np.arange(1, n + 1)
    phi = np.deg2rad(phi_deg)
    theta = np.full(n, np.pi / 2)
    weight = np.full(n, 2.0 * np.pi / n)
    return AngularGrid(theta=theta, phi=phi, weight=weight, kind="h_plane")
