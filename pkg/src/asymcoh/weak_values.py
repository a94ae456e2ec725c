"""Weak values, Kirkwood-Dirac quasiprobabilities and classical Fisher information."""

from dataclasses import dataclass, field
import csv
import io

import numpy as np

from .core import OrthonormalBasis, as_density, as_generator, operator_matrix
from .errors import DimensionMismatch, PostselectionTooRare, ProbabilityTooSmall

WEAK_VALUE_FLOOR = 1e-12
FISHER_CUTOFF = 1e-12
MARGINAL_TOL = 1e-10


def _basis_matrix(basis):
    if isinstance(basis, OrthonormalBasis):
        return basis.vectors
    return OrthonormalBasis(basis).vectors


def _check_dims(*mats):
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def born_probabilities(rho, basis):
    """Pr(x|rho) = <x|rho|x> for every basis vector."""
    r = operator_matrix(rho)
    x = _basis_matrix(basis)
    _check_dims(r, x)
    return np.real(np.einsum("ix,ij,jx->x", x.conj(), r, x))


def weak_value(K, rho, x, floor=WEAK_VALUE_FLOOR):
    """Tr(P_x K rho) / Tr(P_x rho) for the rank-one projector onto ``x``."""
    k = operator_matrix(K)
    r = operator_matrix(rho)
    x = np.asarray(x, dtype=complex).ravel()
    _check_dims(k, r, x[:, None])
    den = np.vdot(x, r @ x).real
    if den <= floor:
        raise PostselectionTooRare(f"postselection probability {den:.3e} <= floor {floor:g}", den)
    return complex(np.vdot(x, k @ (r @ x)) / den)


def weak_values(K, rho, basis, floor=WEAK_VALUE_FLOOR):
    """Weak values for every vector in ``basis`` (NaN where Pr(x|rho) <= floor)."""
    k, r = operator_matrix(K), operator_matrix(rho)
    x = _basis_matrix(basis)
    _check_dims(k, r, x)
    num = np.einsum("ix,ij,jx->x", x.conj(), k @ r, x)
    den = np.real(np.einsum("ix,ij,jx->x", x.conj(), r, x))
    out = np.full(den.shape, np.nan + 0j)
    ok = den > floor
    out[ok] = num[ok] / den[ok]
    return out


def imag_terms(K, rho, basis):
    """Im<x|K rho|x> per basis vector; finite even where Pr(x|rho) = 0."""
    k, r = operator_matrix(K), operator_matrix(rho)
    x = _basis_matrix(basis)
    _check_dims(k, r, x)
    return np.imag(np.einsum("ix,ij,jx->x", x.conj(), k @ r, x))


@dataclass(frozen=True)
class KDTable:
    """Kirkwood-Dirac table ``entries[k, x] = <x|k><k|rho|x>`` with certified marginals."""

    entries: np.ndarray
    basis_k: OrthonormalBasis
    basis_x: OrthonormalBasis
    marginal_error: float = field(default=0.0)

    @property
    def dim(self):
        return self.entries.shape[0]

    def imag_abs_sum(self):
        return float(np.sum(np.abs(self.entries.imag)))

    def to_dict(self):
        e = self.entries
        return {
            "dim": self.dim,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in e],
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "x", "re", "im"])
        for k in range(self.dim):
            for x in range(self.dim):
                z = self.entries[k, x]
                w.writerow([k, x, repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()


def kd_quasiprobability(rho, basis_k, basis_x):
    r = operator_matrix(rho)
    bk = basis_k if isinstance(basis_k, OrthonormalBasis) else OrthonormalBasis(basis_k)
    bx = basis_x if isinstance(basis_x, OrthonormalBasis) else OrthonormalBasis(basis_x)
    _check_dims(r, bk.vectors, bx.vectors)
    vk, vx = bk.vectors, bx.vectors
    overlap = vx.conj().T @ vk  # <x|k>, indexed [x, k]
    krx = vk.conj().T @ r @ vx  # <k|rho|x>, indexed [k, x]
    table = overlap.T * krx
    row = np.real(np.einsum("ik,ij,jk->k", vk.conj(), r, vk))
    col = np.real(np.einsum("ix,ij,jx->x", vx.conj(), r, vx))
    err = max(
        float(np.max(np.abs(table.sum(axis=1) - row))),
        float(np.max(np.abs(table.sum(axis=0) - col))),
        float(abs(table.sum() - np.trace(r))),
    )
    scale = max(1.0, float(abs(np.trace(r))))
    if err > MARGINAL_TOL * scale:
        raise ValueError(f"KD marginal check failed: deviation {err:.3e}")
    table.setflags(write=False)
    return KDTable(table, bk, bx, err)


def translated(rho, K, theta):
    """U rho U^dagger with U = exp(-i K theta)."""
    from .covariant import translation_unitary

    u = translation_unitary(K, theta)
    return u @ operator_matrix(rho) @ u.conj().T


def log_derivative_identity_residual(rho, K, basis, delta=1e-3):
    """Largest |Im K^w - (1/2) dPr/Pr| over the basis, derivative by central difference."""
    if not 0 < delta <= 0.1:
        raise ValueError("delta must lie in (0, 0.1]")
    rho = as_density(rho)
    K = as_generator(K)
    p0 = born_probabilities(rho, basis)
    if np.any(p0 <= 1e-8):
        raise ProbabilityTooSmall(f"min Pr(x|rho) = {p0.min():.3e} <= 1e-8", float(p0.min()))
    pp = born_probabilities(translated(rho, K, delta), basis)
    pm = born_probabilities(translated(rho, K, -delta), basis)
    score = 0.5 * (pp - pm) / (2 * delta * p0)
    im_wv = weak_values(K, rho, basis).imag
    return float(np.max(np.abs(im_wv - score)))


def classical_fisher_information(rho, K, basis, method="weak_value", delta=1e-4):
    """Fisher information about theta at theta = 0 for a projective measurement.

    ``method="weak_value"`` uses 4 sum (Im K^w)^2 Pr; ``"finite_difference"``
    evaluates sum (dPr)^2 / Pr with a central difference of step ``delta``.
    Outcomes with Pr <= 1e-12 contribute nothing.
    """
    r = operator_matrix(rho)
    p = born_probabilities(r, basis)
    keep = p > FISHER_CUTOFF
    if method == "weak_value":
        im = imag_terms(K, r, basis)
        # (Im K^w)^2 Pr = (Im<x|K rho|x>)^2 / Pr
        return float(4 * np.sum(im[keep] ** 2 / p[keep]))
    if method == "finite_difference":
        pp = born_probabilities(translated(r, K, delta), basis)
        pm = born_probabilities(translated(r, K, -delta), basis)
        dp = (pp - pm) / (2 * delta)
        return float(np.sum(dp[keep] ** 2 / p[keep]))
    raise ValueError(f"unknown method {method!r}")
