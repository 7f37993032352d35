"""Excitation synthesis and evaluation.

Three synthesis methods: MRT conjugates the steering vector, the
traditional method whitens it through the impedance matrix, and the
proposed method additionally pre-inverts the field coupling matrix so
the effective radiating currents land exactly on the traditional
optimum.  Directivity is the Rayleigh quotient |a^T e|^2 / (a^T Z a*)
restored to absolute scale by the element self power; gain adds a
normalized loss resistance to the denominator.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Direction
from .linalg import condition_number, gated_solve

DELTA_F_FLOOR_DB = -300.0


@dataclass
class ExcitationVector:
    """Complex per-antenna excitation with synthesis metadata."""

    values: np.ndarray
    method: str = "custom"
    normalization: str = "unit_norm"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or not np.any(self.values):
            raise ValueError("excitation must be a nonzero vector")


@dataclass
class PatternMetrics:
    """Beamwidth and sidelobe metrics of one cut pattern."""

    beamwidth_3db_deg: float
    psll_db: float
    beamwidth_defined: bool = True
    psll_defined: bool = True


@dataclass
class DirectivityReport:
    directivity: float
    direction: Direction
    method: str
    beamwidth_3db_deg: float
    psll_db: float


def _values(a):
    return np.asarray(getattr(a, "values", a), dtype=complex)


def _quadratic_form(a, z):
    """Real quadratic form a^T Z a* for real symmetric Z."""
    s = np.conj(a)
    return float(np.real(np.vdot(s, z @ s)))


def mrt_vector(e):
    """Maximum ratio transmission: conjugate of the steering vector."""
    e = np.asarray(e, dtype=complex)
    norm = np.linalg.norm(e)
    if norm == 0.0:
        raise ValueError("steering vector is zero")
    return ExcitationVector(values=np.conj(e) / norm, method="mrt")


def traditional_vector(z, e, tikhonov=None):
    """Impedance-aware optimum a = Z^-1 e*, unit-normalized."""
    e = np.asarray(e, dtype=complex)
    x, _ = gated_solve(z.values, np.conj(e), tikhonov=tikhonov,
                       context="impedance matrix")
    return ExcitationVector(values=x / np.linalg.norm(x), method="traditional")


def proposed_vector(c, z, e, tikhonov=None):
    """Double-coupling synthesis b = C^-1 Z^-1 e*, unit-normalized."""
    e = np.asarray(e, dtype=complex)
    x, _ = gated_solve(z.values, np.conj(e), tikhonov=tikhonov,
                       context="impedance matrix")
    b, _ = gated_solve(_values(c), x, tikhonov=tikhonov,
                       context="coupling matrix")
    return ExcitationVector(values=b / np.linalg.norm(b), method="proposed")


def directivity(a, e, z):
    """Rayleigh-quotient directivity of excitation a toward e."""
    a = _values(a)
    e = np.asarray(e, dtype=complex)
    denom = _quadratic_form(a, z.values) * z.self_power
    if denom <= 0.0:
        raise ValueError("non-positive radiated power; invalid impedance matrix")
    num = np.abs(np.dot(a, e)) ** 2
    return float(num / denom)


def directivity_coupled(b, c, e, z):
    """Directivity with the effective excitation Cb."""
    effective = _values(c) @ _values(b)
    return directivity(effective, e, z)


def max_directivity(z, e, tikhonov=None):
    """Upper bound e^H Z^-1 e over all excitations."""
    e = np.asarray(e, dtype=complex)
    x, _ = gated_solve(z.values, e, tikhonov=tikhonov,
                       context="impedance matrix")
    return float(np.real(np.vdot(e, x)) / z.self_power)


def loss_resistance(eta):
    """Normalized loss resistance (1 - eta)/eta of each element."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("radiation efficiency must lie in (0, 1]")
    return (1.0 - eta) / eta


def gain(b, c, e, z, r_loss):
    """Gain: directivity with ohmic loss added to the radiated power."""
    if r_loss < 0.0:
        raise ValueError("loss resistance must be non-negative")
    w = _values(c) @ _values(b)
    e = np.asarray(e, dtype=complex)
    denom = (_quadratic_form(w, z.values) +
             r_loss * float(np.real(np.vdot(w, w)))) * z.self_power
    if denom <= 0.0:
        raise ValueError("non-positive total power; invalid impedance matrix")
    return float(np.abs(np.dot(w, e)) ** 2 / denom)


def power_decomposition(z, e, r_loss):
    """Radiated and dissipated power of the ideal excitation Z^-1 e*.

    Eigendecomposition Z = U L U^T gives w = U^H e, P_rad = sum
    |w_i|^2 / l_i and P_loss = r_loss sum |w_i|^2 / l_i^2; small
    eigenvalues of a superdirective Z blow the loss term up first.
    """
    zv = z.values
    if not np.allclose(zv, zv.T, atol=1e-12):
        raise ValueError("power decomposition requires a symmetric matrix")
    lam, u = np.linalg.eigh(zv)
    if lam.min() <= 0.0:
        raise ValueError("impedance matrix must be positive definite here")
    w = u.conj().T @ np.asarray(e, dtype=complex)
    p_rad = float(np.sum(np.abs(w) ** 2 / lam))
    p_loss = float(r_loss * np.sum(np.abs(w) ** 2 / lam ** 2))
    return p_rad, p_loss


def delta_d(a, c, e, z):
    """Directivity degradation D_theory - D_actual of one excitation."""
    return directivity(a, e, z) - directivity_coupled(a, c, e, z)


def delta_f_from_patterns(f_theory, f_actual):
    """Mean squared pattern deviation in dB after unit-peak scaling.

    Accepts per-point complex fields of shape (L,) or (L, 2) (two
    polarizations).  Both patterns are normalized to unit peak
    magnitude before differencing; identical patterns hit the floor.
    """
    f_theory = np.atleast_2d(np.asarray(f_theory, dtype=complex).T).T
    f_actual = np.atleast_2d(np.asarray(f_actual, dtype=complex).T).T
    if f_theory.shape != f_actual.shape or f_theory.shape[0] < 1:
        raise ValueError("patterns must share a non-empty shape")
    mag_th = np.sqrt(np.sum(np.abs(f_theory) ** 2, axis=1))
    mag_ac = np.sqrt(np.sum(np.abs(f_actual) ** 2, axis=1))
    peak_th = mag_th.max()
    peak_ac = mag_ac.max()
    if peak_th == 0.0 or peak_ac == 0.0:
        raise ValueError("cannot normalize an all-zero pattern")
    diff = f_theory / peak_th - f_actual / peak_ac
    mean_sq = float(np.mean(np.sum(np.abs(diff) ** 2, axis=1)))
    if mean_sq <= 10.0 ** (DELTA_F_FLOOR_DB / 10.0):
        return DELTA_F_FLOOR_DB
    return float(10.0 * np.log10(mean_sq))


def delta_f(a, c, geom, grid, orientation=None):
    """Pattern deviation between the uncoupled and coupled responses."""
    from .surrogate import radiated_pattern
    a_values = _values(a)
    identity = np.eye(geom.element_count)
    f_theory = radiated_pattern(a_values, identity, geom, grid, orientation)
    f_actual = radiated_pattern(a_values, c, geom, grid, orientation)
    return delta_f_from_patterns(f_theory.reshape(-1, 2),
                                 f_actual.reshape(-1, 2))


def _circular_distance_deg(a, b):
    return abs((a - b + 180.0) % 360.0 - 180.0)


def pattern_metrics(power, angles_deg, steer_deg):
    """3-dB beamwidth and peak sidelobe level of a full-circle cut.

    ``power`` holds linear power samples over ``angles_deg`` (ascending,
    covering the circle).  The main lobe is the contiguous region around
    the steer angle bounded by the first local minima; the -3 dB
    crossings are located by linear interpolation on power.  Patterns
    without a crossing report the 360-degree convention, and patterns
    without minima leave the sidelobe level undefined.
    """
    power = np.asarray(power, dtype=float)
    angles_deg = np.asarray(angles_deg, dtype=float)
    n = len(power)
    if n < 4 or len(angles_deg) != n:
        raise ValueError("need matching power and angle arrays over the circle")
    span = _circular_distance_deg(angles_deg[-1] + (angles_deg[1] - angles_deg[0]),
                                  angles_deg[0])
    if span > 1e-6:
        raise ValueError("pattern cut must cover the full circle")
    distances = np.array([_circular_distance_deg(a, steer_deg)
                          for a in angles_deg])
    peak_idx = int(np.argmin(distances))
    peak = power[peak_idx]
    if peak <= 0.0:
        raise ValueError("steer direction has zero power; no main lobe")

    step = angles_deg[1] - angles_deg[0]

    def first_minimum(direction):
        i = peak_idx
        for _ in range(n - 1):
            j = (i + direction) % n
            if power[j] > power[i]:
                return i
            i = j
        return None

    def half_power_offset(direction):
        half = 0.5 * peak
        i = peak_idx
        offset = 0.0
        for _ in range(n - 1):
            j = (i + direction) % n
            if power[j] < half:
                frac = (power[i] - half) / (power[i] - power[j])
                return offset + frac * step
            offset += step
            i = j
        return None

    right_min = first_minimum(+1)
    left_min = first_minimum(-1)
    right_cross = half_power_offset(+1)
    left_cross = half_power_offset(-1)

    if right_cross is None or left_cross is None:
        beamwidth = 360.0
        beamwidth_defined = False
    else:
        beamwidth = right_cross + left_cross
        beamwidth_defined = True

    if right_min is None or left_min is None or right_min == left_min:
        # fewer than two local minima: a single lobe has no sidelobes
        return PatternMetrics(beamwidth_3db_deg=beamwidth,
                              psll_db=float("nan"),
                              beamwidth_defined=beamwidth_defined,
                              psll_defined=False)

    # main-lobe indices, walking right from left_min through the peak
    inside = set()
    i = left_min
    for _ in range(n + 1):
        inside.add(i)
        if i == right_min:
            break
        i = (i + 1) % n
    outside = [power[i] for i in range(n) if i not in inside]
    if not outside:
        return PatternMetrics(beamwidth_3db_deg=beamwidth,
                              psll_db=float("nan"),
                              beamwidth_defined=beamwidth_defined,
                              psll_defined=False)
    highest = max(outside)
    if highest <= 0.0:
        psll = DELTA_F_FLOOR_DB
    else:
        psll = float(10.0 * np.log10(highest / peak))
    return PatternMetrics(beamwidth_3db_deg=beamwidth, psll_db=min(psll, 0.0),
                          beamwidth_defined=beamwidth_defined,
                          psll_defined=True)


def eig_crosscheck(z, e, iterations=20, seed=0):
    """Relative gap between the dominant eigenvalue of Z^-1 e e^H and
    the closed form e^H Z^-1 e, via power iteration (rank-1 operator).
    """
    e = np.asarray(e, dtype=complex)
    t, _ = gated_solve(z.values, e, context="impedance matrix")
    oracle = float(np.real(np.vdot(e, t)))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(len(e)) + 1j * rng.standard_normal(len(e))
    lam = 0.0
    for _ in range(iterations):
        y = t * np.vdot(e, x)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            x = rng.standard_normal(len(e)) + 1j * rng.standard_normal(len(e))
            continue
        x = y / norm
        lam = float(np.real(np.vdot(x, t * np.vdot(e, x))))
    return abs(lam - oracle) / abs(oracle)
