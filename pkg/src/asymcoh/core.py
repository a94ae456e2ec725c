"""Validated linear-algebra substrate.

Density matrices, Hermitian generators and orthonormal bases are thin frozen
wrappers around read-only ``complex128`` arrays. Functions elsewhere in the
package accept either the wrappers or plain arrays; :func:`operator_matrix`
does the unwrapping.

Bases are stored column-wise: ``basis.vectors[:, i]`` is the i-th vector.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidRank,
    NonFinite,
    NotHermitian,
    NotOrthonormal,
    NotPositive,
    NotSquare,
    TraceNotOne,
    TrivialSpectrum,
    ZeroGenerator,
)

DEFAULT_TOL = 1e-8
GRAM_TOL = 1e-10
DEGENERACY_RTOL = 1e-8


def _frozen(a):
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def make_rng(seed, stream=None):
    """Return a numpy Generator for ``seed`` (or ``(seed, stream)``).

    Passing an existing Generator returns it unchanged. Streams derived from
    the same seed with different indices are statistically independent.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if stream is None:
        return np.random.default_rng(seed)
    return np.random.default_rng([int(seed), int(stream)])


def as_complex_matrix(a, name="matrix"):
    m = np.asarray(a)
    if m.ndim != 2:
        raise NotSquare(f"{name} must be 2-dimensional, got shape {m.shape}")
    m = m.astype(complex)
    if not np.all(np.isfinite(m)):
        raise NonFinite(f"{name} has non-finite entries")
    return m


def operator_matrix(x):
    """Plain complex array behind a DensityMatrix / GeneratorObservable / array."""
    if isinstance(x, (DensityMatrix, GeneratorObservable)):
        return x.matrix
    return as_complex_matrix(x)


def hermiticity_error(m):
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _check_square(m, name="matrix"):
    if m.shape[0] != m.shape[1]:
        raise NotSquare(f"{name} is not square: shape {m.shape}")


@dataclass(frozen=True)
class OrthonormalBasis:
    """d orthonormal column vectors; Gram deviation certified at construction."""

    vectors: np.ndarray
    gram_deviation: float = field(init=False)

    def __post_init__(self):
        v = as_complex_matrix(self.vectors, "basis")
        _check_square(v, "basis")
        dev = float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0]))))
        if dev > GRAM_TOL:
            raise NotOrthonormal(f"Gram deviation {dev:.3e} exceeds {GRAM_TOL:g}", dev)
        object.__setattr__(self, "vectors", _frozen(v))
        object.__setattr__(self, "gram_deviation", dev)

    @property
    def dim(self):
        return self.vectors.shape[0]

    def __len__(self):
        return self.dim

    def __getitem__(self, i):
        return self.vectors[:, i]

    def projector(self, i):
        v = self.vectors[:, i]
        return np.outer(v, v.conj())

    @classmethod
    def computational(cls, d):
        return cls(np.eye(d, dtype=complex))

    @classmethod
    def from_unitary(cls, u):
        return cls(u)

    def to_dict(self):
        return {"dim": self.dim, "vectors": [_vector_entries(self[i]) for i in range(self.dim)]}


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix (checked at ``validation_tol``)."""

    matrix: np.ndarray
    validation_tol: float = DEFAULT_TOL

    def __post_init__(self):
        m = as_complex_matrix(self.matrix, "rho")
        _check_square(m, "rho")
        tol = self.validation_tol
        if not tol > 0:
            raise ValueError("validation_tol must be positive")
        herm = hermiticity_error(m)
        if herm > tol:
            raise NotHermitian(f"rho deviates from Hermiticity by {herm:.3e}", herm)
        m = 0.5 * (m + m.conj().T)
        min_eig = float(np.linalg.eigvalsh(m)[0])
        if min_eig < -tol:
            raise NotPositive(f"rho has smallest eigenvalue {min_eig:.6g}", -min_eig)
        tr_dev = abs(np.trace(m) - 1.0)
        if tr_dev > tol:
            raise TraceNotOne(f"trace of rho deviates from 1 by {tr_dev:.6g}", tr_dev)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    @property
    def bloch(self):
        """(r_x, r_y, r_z) for a qubit, with rho = (I + r.sigma)/2."""
        if self.dim != 2:
            raise DimensionMismatch("Bloch components are defined for d = 2 only")
        m = self.matrix
        return (float(2 * m[0, 1].real), float(-2 * m[0, 1].imag), float((m[0, 0] - m[1, 1]).real))

    @classmethod
    def from_bloch(cls, rx, ry, rz):
        return cls(0.5 * (np.eye(2) + rx * SIGMA_X + ry * SIGMA_Y + rz * SIGMA_Z))

    @classmethod
    def pure(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, d):
        return cls(np.eye(d) / d)


def validate_density_matrix(raw, tol=DEFAULT_TOL):
    """Validate ``raw`` as a density matrix; raises NotSquare/NotHermitian/NotPositive/TraceNotOne."""
    return DensityMatrix(raw, tol)


def as_density(x, tol=DEFAULT_TOL):
    return x if isinstance(x, DensityMatrix) else DensityMatrix(x, tol)


def eigenspace_groups(eigenvalues, spectral_radius=None):
    """Split ascending eigenvalues into runs closer than 1e-8 * (1 + radius)."""
    w = np.asarray(eigenvalues, dtype=float)
    if w.size == 0:
        return []
    if spectral_radius is None:
        spectral_radius = float(np.max(np.abs(w)))
    thresh = DEGENERACY_RTOL * (1.0 + spectral_radius)
    groups, start = [], 0
    for i in range(1, w.size):
        if w[i] - w[i - 1] > thresh:
            groups.append(np.arange(start, i))
            start = i
    groups.append(np.arange(start, w.size))
    return groups


def _fix_phase(v):
    idx = np.flatnonzero(np.abs(v) > 1e-10)
    if idx.size:
        c = v[idx[0]]
        v = v * (c.conjugate() / abs(c))
    return v


def _canonical_block(vecs):
    # Deterministic basis of span(vecs): Gram-Schmidt on the projector's columns,
    # strongest columns first.
    d, m = vecs.shape
    if m == 1:
        return _fix_phase(vecs[:, 0])[:, None]
    proj = vecs @ vecs.conj().T
    order = sorted(range(d), key=lambda j: (-round(float(np.linalg.norm(proj[:, j])), 9), j))
    out = []
    for j in order:
        u = proj[:, j].copy()
        for _ in range(2):
            for q in out:
                u -= q * np.vdot(q, u)
        n = np.linalg.norm(u)
        if n > 1e-6:
            out.append(u / n)
        if len(out) == m:
            break
    block = [_fix_phase(q) for q in out]
    block.sort(key=lambda q: tuple(np.round(np.column_stack([q.real, q.imag]).ravel(), 12)))
    return np.column_stack(block)


def hermitian_eigensystem(h):
    """Ascending eigenvalues and an orthonormal eigenbasis of a Hermitian matrix.

    Ordering is deterministic: ascending eigenvalue, each vector phase-fixed so its
    first nonzero component is real positive, ties broken lexicographically.
    Degenerate eigenspaces get a canonical basis built from their projector.
    """
    m = operator_matrix(h)
    _check_square(m)
    scale = 1.0 + float(np.max(np.abs(m))) if m.size else 1.0
    herm = hermiticity_error(m)
    if herm > 1e-10 * scale:
        raise NotHermitian(f"matrix deviates from Hermiticity by {herm:.3e}", herm)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    radius = float(np.max(np.abs(w))) if w.size else 0.0
    cols = []
    for g in eigenspace_groups(w, radius):
        if w[g[-1]] - w[g[0]] <= 1e-12 * (1.0 + radius):
            cols.append(_canonical_block(v[:, g]))
        else:
            # near-degenerate but distinguishable: keep eigh's vectors
            cols.append(np.column_stack([_fix_phase(v[:, i]) for i in g]))
    v = np.concatenate(cols, axis=1)
    return w, OrthonormalBasis(v)


@dataclass(frozen=True)
class GeneratorObservable:
    """Hermitian generator K with its cached eigensystem and spectral radius."""

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False)
    eigenvectors: OrthonormalBasis = field(init=False)
    spectral_radius: float = field(init=False)

    def __post_init__(self):
        m = as_complex_matrix(self.matrix, "K")
        _check_square(m, "K")
        w, basis = hermitian_eigensystem(m)
        m = 0.5 * (m + m.conj().T)
        radius = float(np.max(np.abs(w)))
        v = basis.vectors
        err = float(np.max(np.abs((v * w) @ v.conj().T - m)))
        bound = 1e-10 * radius if radius > 0 else 1e-12
        if err > max(bound, 1e-12):
            raise NotHermitian(f"eigen-reconstruction error {err:.3e} exceeds {bound:.1e}", err)
        w = np.array(w, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", basis)
        object.__setattr__(self, "spectral_radius", radius)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def eigenspaces(self):
        return eigenspace_groups(self.eigenvalues, self.spectral_radius)

    def is_degenerate(self):
        return len(self.eigenspaces()) < self.dim

    def normalized(self):
        if self.spectral_radius == 0:
            raise ZeroGenerator("generator has zero spectral radius")
        return GeneratorObservable(self.matrix / self.spectral_radius)

    def __mul__(self, c):
        return GeneratorObservable(self.matrix * float(c))

    __rmul__ = __mul__


def as_generator(x):
    return x if isinstance(x, GeneratorObservable) else GeneratorObservable(x)


@dataclass(frozen=True)
class SpectrumClass:
    """A fixed, nontrivial spectrum; the set of all Hermitian operators carrying it."""

    eigenvalues: tuple

    def __post_init__(self):
        w = tuple(sorted(float(x) for x in self.eigenvalues))
        if len(eigenspace_groups(w)) < 2:
            raise TrivialSpectrum("spectrum needs at least two distinct values")
        object.__setattr__(self, "eigenvalues", w)

    @property
    def dim(self):
        return len(self.eigenvalues)

    @property
    def spectral_radius(self):
        return max(abs(x) for x in self.eigenvalues)


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.setflags(write=False)


def haar_random_unitary(d, seed=None):
    """Haar-distributed d x d unitary (QR of a Ginibre matrix, phase-fixed diagonal)."""
    if int(d) < 1:
        raise ValueError("d must be >= 1")
    rng = make_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_density_matrix(d, rank=None, seed=None):
    """Ginibre-induced state G G^dagger / Tr with G of shape d x rank."""
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise InvalidRank(f"rank must lie in [1, {d}], got {rank}")
    rng = make_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_pure_state(d, seed=None):
    return random_density_matrix(d, 1, seed)


def random_hermitian(d, seed=None, normalize=True):
    """GUE sample; rescaled to unit spectral radius when ``normalize``."""
    rng = make_rng(seed)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (a + a.conj().T)
    if normalize:
        h = h / np.max(np.abs(np.linalg.eigvalsh(h)))
    return h


def random_generator(d, seed=None):
    return GeneratorObservable(random_hermitian(d, seed))


def commutator(a, b):
    a, b = operator_matrix(a), operator_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"cannot commute shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def kron(*ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, operator_matrix(op))
    return out


def embed(op, dims, index):
    """I x ... x op x ... x I with ``op`` on subsystem ``index`` (0-based)."""
    op = operator_matrix(op)
    if op.shape[0] != dims[index]:
        raise DimensionMismatch(f"operator of dim {op.shape[0]} on subsystem of dim {dims[index]}")
    return kron(*[op if i == index else np.eye(d) for i, d in enumerate(dims)])


def partial_trace(rho, dims, keep=0):
    """Reduced operator on the subsystems listed in ``keep`` (0-based index or indices).

    Returns a DensityMatrix when given one, else a plain array.
    """
    m = operator_matrix(rho)
    dims = [int(d) for d in dims]
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionMismatch(f"operator of shape {m.shape} does not match dims {dims}")
    keep = [keep] if np.isscalar(keep) else list(keep)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatch(f"keep={keep} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace out from the highest index down so axis numbers stay valid
    for i in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    kd = int(np.prod([dims[k] for k in sorted(keep)]))
    out = t.reshape(kd, kd)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out, rho.validation_tol)
    return out


def _vector_entries(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).ravel()]


def _reject_constant(name):
    raise NonFinite(f"non-finite number {name!r} in matrix file")


def matrix_to_json(m):
    """``{"dim": d, "entries": [[re, im], ...]}``, row-major."""
    m = operator_matrix(m)
    _check_square(m)
    return {"dim": int(m.shape[0]), "entries": _vector_entries(m)}


def matrix_from_json(obj):
    """Parse the matrix file format (dict or JSON text); rejects non-finite numbers."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj, parse_constant=_reject_constant)
    try:
        d = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise NotSquare(f"matrix file needs 'dim' and 'entries': {exc}") from None
    if d < 1 or len(entries) != d * d:
        raise NotSquare(f"expected {d * d} entries for dim {d}, got {len(entries)}")
    vals = np.empty(d * d, dtype=complex)
    for i, pair in enumerate(entries):
        if len(pair) != 2:
            raise NotSquare(f"entry {i} is not a [re, im] pair")
        re, im = float(pair[0]), float(pair[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise NonFinite(f"entry {i} is not finite")
        vals[i] = complex(re, im)
    return vals.reshape(d, d)


def load_matrix(path):
    with open(path) as fh:
        return matrix_from_json(fh.read())


def save_matrix(path, m):
    with open(path, "w") as fh:
        json.dump(matrix_to_json(m), fh)
