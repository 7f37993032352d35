"""Field coupling matrix estimation.

C maps intended excitations to effective radiating currents.  It is
recovered from sampled fields three ways: full-grid least squares
(C = pinv(E_s) E_c, solved without forming the pseudoinverse), a
reduced-angle solve exploiting the column-reversal symmetry of uniform
linear arrays, and the measurement ingestion path that converts
H-plane amplitude/phase patterns into complex fields first.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import AngularGrid, steering_matrix
from .linalg import condition_number, gated_solve, lstsq_cutoff, singular_ratio

RANK_GATE = 1e-6
CONDITION_FLAG = 1e10


@dataclass
class CouplingMatrix:
    """Complex field coupling matrix with estimation metadata."""

    values: np.ndarray
    condition: float = float("nan")
    residual: float = 0.0

    @property
    def size(self):
        return self.values.shape[0]

    @property
    def flagged(self):
        """True when the condition number crosses the reporting threshold."""
        return bool(self.condition > CONDITION_FLAG)


@dataclass
class PatternMeasurement:
    """One antenna's H-plane pattern: amplitude and phase over phi."""

    phi_deg: np.ndarray
    amplitude: np.ndarray
    phase_deg: np.ndarray
    antenna_index: int = 0

    def __post_init__(self):
        self.phi_deg = np.asarray(self.phi_deg, dtype=float)
        self.amplitude = np.asarray(self.amplitude, dtype=float)
        self.phase_deg = np.asarray(self.phase_deg, dtype=float)
        if not (len(self.phi_deg) == len(self.amplitude) == len(self.phase_deg)):
            raise ValueError("measurement columns must share one length")
        if np.any(self.amplitude < 0.0):
            raise ValueError("measurement amplitude must be non-negative")


def estimate_c_full(es, ec, solver="svd"):
    """Least-squares estimate of C from full sampled fields.

    ``solver`` picks the algorithmic path: "svd" (orthogonal
    factorization with singular-value cutoff) or "normal" (normal
    equations), kept as an independent cross-check of uniqueness.
    """
    if not es.grid.same_points(ec.grid):
        raise ValueError("isolated and coupled fields use different grids")
    if es.values.shape != ec.values.shape:
        raise ValueError("field matrices must have matching shapes")
    ratio = singular_ratio(es.values)
    if ratio <= RANK_GATE:
        raise ValueError(
            "isolated field matrix is rank deficient "
            "(singular value ratio %.3e)" % (ratio,))
    if solver == "svd":
        c, _, _ = lstsq_cutoff(es.values, ec.values)
    elif solver == "normal":
        gram = es.values.conj().T @ es.values
        rhs = es.values.conj().T @ ec.values
        c, _ = gated_solve(gram, rhs, context="normal equations")
    else:
        raise ValueError("unknown solver %r" % (solver,))
    res = np.linalg.norm(es.values @ c - ec.values)
    denom = np.linalg.norm(ec.values)
    residual = float(res / denom) if denom > 0.0 else float(res)
    return CouplingMatrix(values=c, condition=condition_number(c),
                          residual=residual)


def default_reduced_angles(p):
    """P azimuth angles equally spaced over (0, 90] degrees, in radians.

    Avoids phi = 0 and 180, whose sin(phi) phases collide.
    """
    if p < 1:
        raise ValueError("need at least one angle")
    return np.deg2rad(90.0 * np.arange(1, p + 1) / p)


def minimum_angles(m_count):
    """Angle count required by the reduced solve: M/2 even, M odd."""
    return m_count // 2 if m_count % 2 == 0 else m_count


def estimate_c_reduced(ec_samples, angles_phi, geom):
    """Recover C from H-plane samples at a handful of azimuth angles.

    ``ec_samples`` is (P, M): the coupled field of each single-port
    excitation at P angles on the theta = pi/2 cut.  For even M the
    column-reversal symmetry ties column m to column M+1-m, so each pair
    of columns shares M unknowns fed by 2P equations and P >= M/2
    suffices; odd arrays get no such reduction and need P >= M.
    """
    ec_samples = np.asarray(ec_samples, dtype=complex)
    angles_phi = np.asarray(angles_phi, dtype=float)
    m_count = geom.element_count
    p = len(angles_phi)
    if ec_samples.shape != (p, m_count):
        raise ValueError("expected one row of samples per angle")
    need = minimum_angles(m_count)
    if p < need:
        raise ValueError(
            "insufficient angles: %d given, %d required for M=%d" %
            (p, need, m_count))
    theta = np.full(p, np.pi / 2)
    a = steering_matrix(geom, theta, angles_phi, "in_plane")
    c = np.zeros((m_count, m_count), dtype=complex)
    if m_count % 2 == 0:
        stacked = np.vstack([a, a[:, ::-1]])
        if singular_ratio(stacked) < 1e-10:
            raise ValueError("angle set is degenerate for the reduced solve")
        for m in range(m_count // 2):
            mirror = m_count - 1 - m
            rhs = np.concatenate([ec_samples[:, m], ec_samples[:, mirror]])
            col, _, _ = lstsq_cutoff(stacked, rhs)
            c[:, m] = col
            c[:, mirror] = col[::-1]
    else:
        if singular_ratio(a) < 1e-10:
            raise ValueError("angle set is degenerate for the reduced solve")
        col, _, _ = lstsq_cutoff(a, ec_samples)
        c = col
    res = np.linalg.norm(a @ c - ec_samples)
    denom = np.linalg.norm(ec_samples)
    residual = float(res / denom) if denom > 0.0 else float(res)
    return CouplingMatrix(values=c, condition=condition_number(c),
                          residual=residual)


def fields_from_measurements(measurements, amplitude_kind="power"):
    """Complex H-plane field matrix from amplitude/phase patterns.

    With ``amplitude_kind`` "power" the amplitude column is a power
    density and the field is its square root; with "field" it is already
    a field magnitude.  The physical 2*eta factor is folded into the
    normalization, which directivity quantities never see.
    """
    if amplitude_kind not in ("power", "field"):
        raise ValueError("amplitude_kind must be 'power' or 'field'")
    if not measurements:
        raise ValueError("no measurements supplied")
    phi_deg = measurements[0].phi_deg
    for meas in measurements[1:]:
        if len(meas.phi_deg) != len(phi_deg) or \
                np.max(np.abs(meas.phi_deg - phi_deg)) > 1e-9:
            raise ValueError("measurements use inconsistent phi grids")
    n = len(phi_deg)
    grid = AngularGrid(theta=np.full(n, np.pi / 2),
                       phi=np.deg2rad(phi_deg),
                       weight=np.full(n, 2.0 * np.pi / n),
                       kind="h_plane")
    values = np.zeros((2 * n, len(measurements)), dtype=complex)
    for m, meas in enumerate(measurements):
        if amplitude_kind == "power":
            magnitude = np.sqrt(meas.amplitude)
        else:
            magnitude = meas.amplitude
        values[0::2, m] = magnitude * np.exp(1j * np.deg2rad(meas.phase_deg))
    from .surrogate import FieldMatrix
    return FieldMatrix(values=values, grid=grid)


def power_patterns_from(measurements, amplitude_kind="power"):
    """Common power pattern and per-element phases for the Z formula."""
    fields = fields_from_measurements(measurements, amplitude_kind)
    if amplitude_kind == "power":
        amplitude = measurements[0].amplitude
    else:
        amplitude = measurements[0].amplitude ** 2
    phases = [np.deg2rad(meas.phase_deg) for meas in measurements]
    return np.asarray(amplitude, dtype=float), phases, fields


def column_symmetry_residual(c):
    """Deviation from the column-reversal symmetry of uniform arrays.

    max over (i, j) of |c_ji - c_(M+1-j)(M+1-i)| / max|c|, which is 0
    for a perfectly symmetric array.
    """
    values = np.asarray(getattr(c, "values", c))
    peak = np.max(np.abs(values))
    if peak == 0.0:
        return 0.0
    reversed_both = values[::-1, ::-1]
    return float(np.max(np.abs(values - reversed_both)) / peak)
