"""Spin Hamiltonians of the two nitrogen defects in diamond.

Energies are frequencies in MHz (H divided by Planck's constant) and magnetic
fields are in mT, so the gyromagnetic ratio of 28 MHz/mT and the tensor
components below can be used exactly as quoted.  All matrices act on the
electron (x) nuclear product space, both single-spin bases ordered
m = +s ... -s.

The Hamiltonian is assembled in the defect frame, z along the symmetry axis,
because the zero-field and hyperfine tensors are diagonal only there; the lab
field is rotated in.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

GAMMA_E = 28.0  # electron gyromagnetic ratio, MHz/mT

# NV center: S = 1 electron, I = 1 nitrogen-14 nucleus
D_ZFS = 2877.5      # zero-field splitting, MHz
A_NV_PERP = -2.7    # MHz
A_NV_PAR = -2.1     # MHz
QUAD_P = -5.0       # nuclear quadrupole, MHz

# P1 center: S = 1/2 electron, same I = 1 nucleus, much stronger hyperfine
A_P1_PERP = 114.03  # MHz
A_P1_PAR = 81.33    # MHz

_UNIT_TOL = 1e-8


@dataclass(frozen=True)
class HyperfineTensor:
    """Axially symmetric hyperfine coupling.

    axis is given in the crystal frame; None means the defect symmetry axis
    itself, which is the case for both defects treated here (the nitrogen
    sits along the bond).
    """

    a_perp: float
    a_par: float
    axis: tuple | None = None


@dataclass(frozen=True)
class NVParams:
    gamma_e: float = GAMMA_E
    d_zfs: float = D_ZFS
    quadrupole_p: float = QUAD_P
    hyperfine: HyperfineTensor = HyperfineTensor(A_NV_PERP, A_NV_PAR)


@dataclass(frozen=True)
class P1Params:
    gamma_e: float = GAMMA_E
    hyperfine: HyperfineTensor = HyperfineTensor(A_P1_PERP, A_P1_PAR)


NV_DEFAULT = NVParams()
P1_DEFAULT = P1Params()


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues sorted ascending (MHz) and orthonormal eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class TransitionLine:
    freq: float
    weight: float
    from_index: int
    to_index: int


@dataclass(frozen=True, eq=False)
class LevelCurves:
    """Adiabatically tracked levels over a field sweep.

    energies has shape (n_fields, dim); column k follows one physical level
    by eigenvector continuity, so it is generally not sorted at every field.
    vectors[i] holds the matching eigenvectors (columns) at b_mt[i].
    """

    b_mt: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray


def spin_operators(s):
    """Return (Sx, Sy, Sz) for spin quantum number s in the Sz eigenbasis.

    :param s: non-negative half integer (0.5, 1, 1.5, ...)
    :returns: three (2s+1) x (2s+1) complex Hermitian matrices, dimensionless
    """
    if s < 0 or abs(2 * s - round(2 * s)) > 1e-9:
        raise ValueError(f"spin must be a non-negative half-integer, got {s}")
    dim = int(round(2 * s + 1))
    m = s - np.arange(dim)
    sz = np.diag(m).astype(complex)
    sp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        sp[k - 1, k] = np.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    return sx, sy, sz


def _unit_vector(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be a finite 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{name} must have unit norm, |{name}| = {np.linalg.norm(v):.6g}")
    return v


def rotation_to_z(axis):
    """Minimal rotation matrix taking the given unit vector onto +z.

    Rodrigues construction about axis x z; the anti-parallel case uses a
    180 degree rotation about x, which is perpendicular to z.
    """
    axis = _unit_vector(axis, "axis")
    zhat = np.array([0.0, 0.0, 1.0])
    c = float(axis @ zhat)
    if c > 1.0 - 1e-12:
        return np.eye(3)
    if c < -1.0 + 1e-12:
        return np.diag([1.0, -1.0, -1.0])
    v = np.cross(axis, zhat)
    k = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + k + k @ k / (1.0 + c)


def _hyperfine_matrix(hf, frame_rotation):
    """3x3 coupling tensor in the defect frame."""
    if hf.axis is None:
        h = np.array([0.0, 0.0, 1.0])
    else:
        h = frame_rotation @ _unit_vector(hf.axis, "hyperfine axis")
    return hf.a_perp * np.eye(3) + (hf.a_par - hf.a_perp) * np.outer(h, h)


def _check_field(b_dc):
    b = np.asarray(b_dc, dtype=float)
    if b.shape != (3,) or not np.all(np.isfinite(b)):
        raise ValueError("b_dc must be a finite 3-vector in mT")
    return b


def build_nv_hamiltonian(b_dc, nv_axis, params=None):
    """9x9 Hamiltonian of one NV orientation in an applied DC field.

    :param b_dc: field vector, mT, lab (crystal) frame
    :param nv_axis: unit vector along the NV symmetry axis, lab frame
    :param params: NVParams; defaults to the literature values above
    :returns: Hermitian 9x9 complex array, MHz, electron (x) nuclear ordering
    """
    p = params if params is not None else NV_DEFAULT
    b = _check_field(b_dc)
    rot = rotation_to_z(nv_axis)
    bf = rot @ b

    sx, sy, sz = spin_operators(1.0)
    ix, iy, iz = spin_operators(1.0)
    e3 = np.eye(3)
    s_ops = [np.kron(o, e3) for o in (sx, sy, sz)]
    i_ops = [np.kron(e3, o) for o in (ix, iy, iz)]

    h = p.gamma_e * sum(bf[a] * s_ops[a] for a in range(3))
    h = h + p.d_zfs * np.kron(sz @ sz, e3)
    a_mat = _hyperfine_matrix(p.hyperfine, rot)
    for a in range(3):
        for c in range(3):
            if a_mat[a, c] != 0.0:
                h = h + a_mat[a, c] * (s_ops[a] @ i_ops[c])
    h = h + p.quadrupole_p * np.kron(e3, iz @ iz)
    return h


def build_p1_hamiltonian(b_dc, p1_axis, params=None):
    """6x6 Hamiltonian of one P1 orientation: Zeeman plus axial hyperfine.

    Same conventions as the NV builder; no zero-field or quadrupole term.
    """
    p = params if params is not None else P1_DEFAULT
    b = _check_field(b_dc)
    rot = rotation_to_z(p1_axis)
    bf = rot @ b

    sx, sy, sz = spin_operators(0.5)
    ix, iy, iz = spin_operators(1.0)
    e2, e3 = np.eye(2), np.eye(3)
    s_ops = [np.kron(o, e3) for o in (sx, sy, sz)]
    i_ops = [np.kron(e2, o) for o in (ix, iy, iz)]

    h = p.gamma_e * sum(bf[a] * s_ops[a] for a in range(3))
    a_mat = _hyperfine_matrix(p.hyperfine, rot)
    for a in range(3):
        for c in range(3):
            if a_mat[a, c] != 0.0:
                h = h + a_mat[a, c] * (s_ops[a] @ i_ops[c])
    return h


def eigensystem(h):
    """Diagonalize a Hermitian matrix; eigenvalues ascending."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(h - h.conj().T)) > 1e-8:
        raise ValueError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(h)
    return EigenSystem(vals, vecs)


def _default_drive(dim):
    # electron Sx in the product space, inferred from the dimension
    if dim == 9:
        return np.kron(spin_operators(1.0)[0], np.eye(3))
    if dim == 6:
        return np.kron(spin_operators(0.5)[0], np.eye(3))
    raise ValueError(f"cannot infer a drive operator for dimension {dim}; pass one")


def transition_spectrum(eig, drive=None, initial_levels=(0,), weight_floor=1e-6):
    """ESR lines out of the given initial levels under an AC drive operator.

    The drive defaults to the electron Sx in the defect frame (the AC field is
    transverse for the geometries of interest).  Frequencies are reported as
    |E_f - E_i| so lines are non-negative regardless of which level lies
    higher; weight is the squared matrix element |<f|drive|i>|^2.
    """
    dim = eig.values.size
    d = _default_drive(dim) if drive is None else np.asarray(drive, dtype=complex)
    lines = []
    for i in initial_levels:
        if not 0 <= i < dim:
            raise IndexError(f"initial level {i} out of range for dimension {dim}")
        amps = eig.vectors.conj().T @ (d @ eig.vectors[:, i])
        for f in range(dim):
            if f == i:
                continue
            w = float(abs(amps[f]) ** 2)
            if w >= weight_floor:
                lines.append(TransitionLine(float(abs(eig.values[f] - eig.values[i])), w, i, f))
    return lines


def bond_orientations():
    """The four <111> bond directions of the diamond lattice, unit norm."""
    dirs = np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    )
    return dirs / np.sqrt(3.0)


_BUILDERS = {"nv": build_nv_hamiltonian, "p1": build_p1_hamiltonian}


def level_curve(model, b_direction, axis, b_range, params=None):
    """Energy levels along a field sweep, tracked by adiabatic continuity.

    :param model: "nv", "p1", or a callable mapping a field vector (mT) to a
        Hamiltonian matrix
    :param b_direction: sweep direction, any nonzero 3-vector (normalized here)
    :param axis: defect symmetry axis (ignored for a callable model)
    :param b_range: monotone grid of field magnitudes, mT
    :returns: LevelCurves; column k of energies follows the level that starts
        as the k-th lowest at b_range[0]

    Adjacent grid points are matched through the eigenvector overlap matrix
    (best global assignment); an overlap below 0.5 means the grid is too
    coarse to follow the levels and raises with the offending step.
    """
    b_range = np.asarray(b_range, dtype=float)
    if b_range.ndim != 1 or b_range.size < 1:
        raise ValueError("b_range must be a 1d grid with at least one point")
    if b_range.size > 1:
        d = np.diff(b_range)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("b_range must be strictly monotone")

    direction = np.asarray(b_direction, dtype=float)
    norm = np.linalg.norm(direction)
    if not np.isfinite(norm) or norm == 0:
        raise ValueError("b_direction must be a nonzero 3-vector")
    direction = direction / norm

    if callable(model):
        build = lambda bvec: model(bvec)
    else:
        key = str(model).lower()
        if key not in _BUILDERS:
            raise ValueError(f"unknown model {model!r}, expected 'nv' or 'p1'")
        builder = _BUILDERS[key]
        build = lambda bvec: builder(bvec, axis, params)

    energies, vectors = [], []
    prev_vecs = None
    for i, b in enumerate(b_range):
        eig = eigensystem(build(b * direction))
        vals, vecs = eig.values, eig.vectors
        if prev_vecs is None:
            order = np.arange(vals.size)
        else:
            overlap = np.abs(prev_vecs.conj().T @ vecs)
            row, col = linear_sum_assignment(-overlap)
            order = np.empty_like(col)
            order[row] = col
            worst = overlap[row, col].min()
            if worst < 0.5:
                raise ValueError(
                    "level tracking ambiguous between B = "
                    f"{b_range[i - 1]:g} and {b:g} mT (overlap {worst:.3f}); "
                    "refine the field grid"
                )
        energies.append(vals[order])
        vectors.append(vecs[:, order])
        prev_vecs = vectors[-1]
    return LevelCurves(b_range, np.array(energies), np.array(vectors))
