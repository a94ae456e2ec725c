"""Variance, quantum Fisher information and the inequalities tying them to the coherence."""

from dataclasses import dataclass, asdict
import csv
import io
import json

import numpy as np

from .coherence import oracle_basis, spectral_oracle
from .core import (
    SpectrumClass,
    as_generator,
    haar_random_unitary,
    make_rng,
    operator_matrix,
    random_generator,
    random_pure_state,
)
from .errors import DimensionMismatch, ZeroGenerator, ZeroInformation
from .weak_values import kd_quasiprobability

SLACK_TOL = 1e-9
QFI_CUTOFF = 1e-12


def _pair(rho, K):
    r, k = operator_matrix(rho), operator_matrix(K)
    if r.shape != k.shape:
        raise DimensionMismatch(f"rho has shape {r.shape} but K has shape {k.shape}")
    return r, k


def _radius(K):
    K = as_generator(K)
    if K.spectral_radius == 0:
        raise ZeroGenerator("generator has zero spectral radius")
    return K.spectral_radius


def variance(K, rho):
    """Tr(K^2 rho) - Tr(K rho)^2, clamped at 0."""
    r, k = _pair(rho, K)
    mean = np.trace(k @ r).real
    return max(0.0, float(np.trace(k @ k @ r).real - mean**2))


def qfi_unitary_family(rho, K):
    """Quantum Fisher information of rho_theta = exp(-iK theta) rho exp(iK theta)."""
    r, k = _pair(rho, K)
    p, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    kk = np.abs(v.conj().T @ k @ v) ** 2
    num = (p[:, None] - p[None, :]) ** 2
    den = p[:, None] + p[None, :]
    keep = den > QFI_CUTOFF
    return float(2 * np.sum(num[keep] / den[keep] * kk[keep]))


def _psd_sqrt(m):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(rho, sigma):
    """Uhlmann fidelity (Tr|sqrt(rho) sqrt(sigma)|)^2 via singular values."""
    a, b = _psd_sqrt(operator_matrix(rho)), _psd_sqrt(operator_matrix(sigma))
    return float(np.sum(np.linalg.svd(a @ b, compute_uv=False)) ** 2)


def qfi_fidelity(rho, K, theta=1e-2):
    """QFI from the Bures expansion F = 1 - J theta^2 / 4 + O(theta^4).

    Independent of :func:`qfi_unitary_family`; the theta^2 error term is
    removed by Richardson extrapolation between theta and theta / 2.
    """
    r, k = _pair(rho, K)
    w, v = np.linalg.eigh(0.5 * (k + k.conj().T))

    def estimate(t):
        u = (v * np.exp(-1j * w * t)) @ v.conj().T
        f = fidelity(r, u @ r @ u.conj().T)
        return 8 * (1 - np.sqrt(f)) / t**2

    return float((4 * estimate(theta / 2) - estimate(theta)) / 3)


def _kd_terms(rho, K, basis_x):
    """Im KD table with K's eigenbasis as first index and its spectrum rescaled to |k| <= 1."""
    K = as_generator(K)
    kd = kd_quasiprobability(rho, K.eigenvectors, basis_x)
    im = kd.entries.imag
    ktilde = K.eigenvalues / K.spectral_radius
    # per x: |sum_k k~ Im KD(k, x)| must not exceed sum_k |Im KD(k, x)|
    pointwise = np.sum(np.abs(im), axis=0) - np.abs(ktilde @ im)
    return float(np.sum(np.abs(im))), float(pointwise.min())


def kd_imaginary_bound(rho, K, basis_x=None):
    """sum_{k,x} |Im Pr_KD(k, x | rho)| with ``basis_x`` defaulting to the coherence argmax basis."""
    if basis_x is None:
        basis_x = oracle_basis(rho, K)
    return _kd_terms(rho, K, basis_x)[0]


def _commutator_expectation(rho, K, X):
    # Tr([X, K] rho), purely imaginary for Hermitian X, K
    r = operator_matrix(rho)
    x, k = operator_matrix(X), operator_matrix(K)
    return complex(np.trace((x @ k - k @ x) @ r))


def kwr_lower_bound(rho, K, X):
    """(1/2) |Tr([X~, K~] rho)| with both operators rescaled to unit spectral radius."""
    r, k = _pair(rho, K)
    x = operator_matrix(X)
    if x.shape != k.shape:
        raise DimensionMismatch(f"X has shape {x.shape} but K has shape {k.shape}")
    rk, rx = _radius(K), _radius(X)
    return 0.5 * abs(_commutator_expectation(r, k / rk, x / rx))


def uncertainty_product_check(rho, K, X):
    """(lhs, rhs, ok) for C~(rho; K) C~(rho; X) >= |Tr([X~, K~] rho)|^2 / 4."""
    rk, rx = _radius(K), _radius(X)
    lhs = spectral_oracle(rho, operator_matrix(K) / rk) * spectral_oracle(rho, operator_matrix(X) / rx)
    rhs = kwr_lower_bound(rho, K, X) ** 2
    return float(lhs), float(rhs), bool(lhs >= rhs - SLACK_TOL)


def optimal_estimation_bound(rho, K, nu, theta=None, seed=0):
    """(delta2_opt, bound, ok) with delta2_opt = 1/(nu J) and bound = 1/(4 nu C_w^2).

    ``ok`` also requires the coherence of the imprinted state rho_theta to
    equal that of rho, for ``theta`` or a random angle drawn from ``seed``.
    """
    nu = int(nu)
    if nu < 1:
        raise ValueError("nu must be a positive integer")
    r, k = _pair(rho, K)
    j = qfi_unitary_family(r, k)
    c = spectral_oracle(r, k)
    if j <= QFI_CUTOFF or c <= 1e-12:
        raise ZeroInformation(f"quantum Fisher information {j:.3e} carries no information", j)
    if theta is None:
        theta = make_rng(seed).uniform(-np.pi, np.pi)
    w, v = np.linalg.eigh(0.5 * (k + k.conj().T))
    u = (v * np.exp(-1j * w * theta)) @ v.conj().T
    drift = abs(spectral_oracle(u @ r @ u.conj().T, k) - c)
    delta2 = 1.0 / (nu * j)
    bound = 1.0 / (4 * nu * c * c)
    return delta2, bound, bool(delta2 <= bound + 1e-12 and drift <= 1e-8)


@dataclass
class BoundsReport:
    c_w: float
    c_w_normalized: float
    std_dev: float
    qfi: float
    kd_im_bound: float
    kwr_bound: float
    theorem1_slack: float
    theorem3_slack: float
    theorem4_slack: float
    theorem4_pointwise_slack: float
    lemma1_slack: float

    @property
    def theorem1_ok(self):
        return bool(self.theorem1_slack >= -SLACK_TOL)

    @property
    def theorem3_ok(self):
        return bool(self.theorem3_slack >= -SLACK_TOL)

    @property
    def theorem4_ok(self):
        if self.theorem4_slack is None:
            return None
        return bool(self.theorem4_slack >= -SLACK_TOL and self.theorem4_pointwise_slack >= -SLACK_TOL)

    @property
    def lemma1_ok(self):
        if self.lemma1_slack is None:
            return None
        return bool(self.lemma1_slack >= -SLACK_TOL)

    @property
    def ok(self):
        return all(f is not False for f in (self.theorem1_ok, self.theorem3_ok, self.theorem4_ok, self.lemma1_ok))

    def to_dict(self):
        out = asdict(self)
        out.update(
            theorem1_ok=self.theorem1_ok,
            theorem3_ok=self.theorem3_ok,
            theorem4_ok=self.theorem4_ok,
            lemma1_ok=self.lemma1_ok,
        )
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self):
        row = self.to_dict()
        cols = [
            "c_w", "c_w_normalized", "std_dev", "qfi", "kd_im_bound", "kwr_bound",
            "theorem1_slack", "theorem3_slack", "theorem4_slack", "theorem4_pointwise_slack",
            "lemma1_slack", "theorem1_ok", "theorem3_ok", "theorem4_ok", "lemma1_ok",
        ]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c]) for c in cols])
        return buf.getvalue()


def bounds_report(rho, K, X=None):
    """Evaluate the coherence bounds for (rho, K), plus the KWR entry when ``X`` is given."""
    r, k = _pair(rho, K)
    Kg = as_generator(K)
    c = spectral_oracle(r, k)
    sd = np.sqrt(variance(k, r))
    j = qfi_unitary_family(r, k)
    if Kg.spectral_radius > 0:
        cn = c / Kg.spectral_radius
        kd, pointwise = _kd_terms(r, Kg, oracle_basis(r, k))
        t4 = kd - cn
    else:
        cn, kd, pointwise, t4 = 0.0, None, None, None
    kwr = lemma = None
    if X is not None:
        kwr = kwr_lower_bound(r, k, X)
        cx = spectral_oracle(r, operator_matrix(X)) / _radius(X)
        lemma = min(cn, cx) - kwr
    return BoundsReport(
        c_w=c,
        c_w_normalized=cn,
        std_dev=float(sd),
        qfi=j,
        kd_im_bound=kd,
        kwr_bound=kwr,
        theorem1_slack=float(sd - c),
        theorem3_slack=float(j - 4 * c * c),
        theorem4_slack=t4,
        theorem4_pointwise_slack=pointwise,
        lemma1_slack=lemma,
    )


@dataclass
class SpectrumSupResult:
    best_K: object
    sup_estimate: float
    kd_bound: float
    kwr_sup: float
    n_samples: int

    @property
    def kd_ok(self):
        return bool(self.sup_estimate <= self.kd_bound + SLACK_TOL)

    @property
    def kwr_ok(self):
        return bool(self.kwr_sup <= self.sup_estimate + SLACK_TOL)

    def __iter__(self):
        return iter((self.best_K, self.sup_estimate, self.kd_bound, self.kwr_sup))


def spectrum_class_sup(rho, spec, n_samples, seed=0):
    """Sampled sup of the normalized coherence over generators with a fixed spectrum.

    Generators ``K_j = U_j diag(spec) U_j^dagger`` use Haar ``U_j`` from
    stream ``(seed, j)``. The same samples serve as the X operators of the
    KWR term, so ``kwr_sup`` maxes over all ordered pairs.
    """
    if not isinstance(spec, SpectrumClass):
        spec = SpectrumClass(tuple(spec))
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    r = operator_matrix(rho)
    if r.shape[0] != spec.dim:
        raise DimensionMismatch(f"state of dim {r.shape[0]} for a spectrum of {spec.dim} values")
    w = np.array(spec.eigenvalues) / spec.spectral_radius
    ks = np.empty((n_samples, spec.dim, spec.dim), dtype=complex)
    for j in range(n_samples):
        u = haar_random_unitary(spec.dim, make_rng(seed, j))
        ks[j] = (u * w) @ u.conj().T
    # K~ rho - rho K~ for every sample; C~ = half the trace norm of -i[K~, rho]
    comm = ks @ r - r @ ks
    vals = 0.5 * np.sum(np.abs(np.linalg.eigvalsh(-1j * comm)), axis=1)
    best = int(np.argmax(vals))
    kd_bound = max(kd_imaginary_bound(r, ks[j]) for j in range(n_samples))
    # Tr([X, K] rho) = Tr(X [K, rho]) for every ordered pair (X_m, K_j)
    pair = np.einsum("mab,jba->mj", ks, comm)
    kwr_sup = float(0.5 * np.max(np.abs(pair)))
    return SpectrumSupResult(
        as_generator(ks[best] * spec.spectral_radius),
        float(vals[best]),
        float(kd_bound),
        kwr_sup,
        n_samples,
    )


def pure_state_gap_distribution(d, n_instances, seed=0):
    """Delta_K - C_w for random pure states and generators in dimension ``d`` (recorded, not asserted)."""
    gaps = np.empty(int(n_instances))
    for i in range(int(n_instances)):
        rng = make_rng(seed, i)
        rho = random_pure_state(d, rng)
        K = random_generator(d, rng)
        gaps[i] = np.sqrt(variance(K, rho)) - spectral_oracle(rho, K)
    return gaps


__all__ = [
    "BoundsReport",
    "SpectrumSupResult",
    "bounds_report",
    "fidelity",
    "kd_imaginary_bound",
    "kwr_lower_bound",
    "optimal_estimation_bound",
    "pure_state_gap_distribution",
    "qfi_fidelity",
    "qfi_unitary_family",
    "spectrum_class_sup",
    "uncertainty_product_check",
    "variance",
]
