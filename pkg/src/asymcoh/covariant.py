"""Translations, covariant unitaries and channels, and the monotone property harness."""

from dataclasses import dataclass, field
import json

import numpy as np

from .coherence import spectral_oracle
from .core import (
    as_generator,
    commutator,
    haar_random_unitary,
    kron,
    make_rng,
    operator_matrix,
    partial_trace,
    random_density_matrix,
    random_generator,
)
from .errors import DimensionMismatch, InvalidChannel

PROPERTY_TOL = 1e-8


def _dagger(m):
    return m.conj().T


def translation_unitary(K, theta):
    """exp(-i K theta), built from the eigendecomposition of K."""
    K = as_generator(K)
    v = K.eigenvectors.vectors
    return (v * np.exp(-1j * K.eigenvalues * float(theta))) @ _dagger(v)


def random_covariant_unitary(K, seed=None):
    """A unitary commuting with K: an independent Haar block on every eigenspace."""
    K = as_generator(K)
    rng = make_rng(seed)
    v = K.eigenvectors.vectors
    block = np.zeros((K.dim, K.dim), dtype=complex)
    for g in K.eigenspaces():
        block[np.ix_(g, g)] = haar_random_unitary(len(g), rng)
    return v @ block @ _dagger(v)


def random_integer_generator(d, seed=None, low=-2, high=2):
    """Generator with integer eigenvalues in [low, high] (at least two distinct) in a Haar basis.

    Integer spectra make sums K_s x I + I x K_a degenerate, which is the
    interesting case for covariant unitaries.
    """
    rng = make_rng(seed)
    while True:
        w = rng.integers(low, high + 1, size=d)
        if len(set(w.tolist())) >= 2:
            break
    u = haar_random_unitary(d, rng)
    return as_generator((u * w) @ _dagger(u))


def _max_abs(m):
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


@dataclass(frozen=True)
class CovariantChannel:
    """Free Stinespring dilation Phi(rho) = Tr_a[(I x E_a) V (rho x rho_a) V^dagger]."""

    K_s: object
    K_a: object
    rho_a: np.ndarray
    E_a: np.ndarray
    V_sa: np.ndarray

    def __post_init__(self):
        ks, ka = as_generator(self.K_s), as_generator(self.K_a)
        object.__setattr__(self, "K_s", ks)
        object.__setattr__(self, "K_a", ka)
        ra, ea, v = (operator_matrix(x) for x in (self.rho_a, self.E_a, self.V_sa))
        ds, da = ks.dim, ka.dim
        if ra.shape != (da, da) or ea.shape != (da, da) or v.shape != (ds * da, ds * da):
            raise DimensionMismatch("channel components have inconsistent dimensions")
        dev = _max_abs(commutator(ra, ka.matrix))
        if dev > 1e-10:
            raise InvalidChannel(f"[rho_a, K_a] = {dev:.3e} exceeds 1e-10", dev)
        dev = _max_abs(commutator(ea, ka.matrix))
        if dev > 1e-10:
            raise InvalidChannel(f"[E_a, K_a] = {dev:.3e} exceeds 1e-10", dev)
        w = np.linalg.eigvalsh(0.5 * (ea + _dagger(ea)))
        dev = max(0.0, -w.min(), w.max() - 1.0)
        if dev > 1e-10:
            raise InvalidChannel(f"E_a eigenvalues leave [0, 1] by {dev:.3e}", dev)
        dev = _max_abs(_dagger(v) @ v - np.eye(ds * da))
        if dev > 1e-10:
            raise InvalidChannel(f"V_sa deviates from unitarity by {dev:.3e}", dev)
        dev = _max_abs(commutator(v, self.total_generator()))
        if dev > 1e-9:
            raise InvalidChannel(f"V_sa does not commute with the total generator ({dev:.3e})", dev)
        object.__setattr__(self, "rho_a", ra)
        object.__setattr__(self, "E_a", ea)
        object.__setattr__(self, "V_sa", v)

    @property
    def dims(self):
        return (self.K_s.dim, self.K_a.dim)

    def total_generator(self):
        ds, da = self.K_s.dim, self.K_a.dim
        return kron(self.K_s.matrix, np.eye(da)) + kron(np.eye(ds), self.K_a.matrix)

    def sqrt_effect(self):
        w, u = np.linalg.eigh(0.5 * (self.E_a + _dagger(self.E_a)))
        return (u * np.sqrt(np.clip(w, 0.0, 1.0))) @ _dagger(u)


def build_free_channel(dims, seed=None):
    """Random covariant channel with system and ancilla dimensions ``dims``."""
    ds, da = (int(x) for x in dims)
    if ds < 2 or da < 2:
        raise ValueError("d_s and d_a must both be >= 2")
    rng = make_rng(seed)
    ks = random_integer_generator(ds, rng)
    ka = random_integer_generator(da, rng)
    va = ka.eigenvectors.vectors
    p = rng.dirichlet(np.ones(da))
    e = rng.uniform(0.0, 1.0, size=da)
    rho_a = (va * p) @ _dagger(va)
    e_a = (va * e) @ _dagger(va)
    total = kron(ks.matrix, np.eye(da)) + kron(np.eye(ds), ka.matrix)
    v = random_covariant_unitary(total, rng)
    return CovariantChannel(ks, ka, rho_a, e_a, v)


def apply_channel(ch, rho_s):
    """Phi(rho_s); positive but possibly subnormalized. Linear in ``rho_s``."""
    r = operator_matrix(rho_s)
    ds, da = ch.dims
    if r.shape != (ds, ds):
        raise DimensionMismatch(f"state of shape {r.shape} for a channel on dimension {ds}")
    joint = ch.V_sa @ np.kron(r, ch.rho_a) @ _dagger(ch.V_sa)
    s = np.kron(np.eye(ds), ch.sqrt_effect())
    out = partial_trace(s @ joint @ s, (ds, da), keep=0)
    return 0.5 * (out + _dagger(out))


def channel_covariance_error(ch, rho_s, thetas):
    """max over theta of |U Phi(rho) U^dagger - Phi(U rho U^dagger)|, U = exp(-i K_s theta)."""
    r = operator_matrix(rho_s)
    worst = 0.0
    for t in np.atleast_1d(thetas):
        u = translation_unitary(ch.K_s, t)
        lhs = u @ apply_channel(ch, r) @ _dagger(u)
        rhs = apply_channel(ch, u @ r @ _dagger(u))
        worst = max(worst, _max_abs(lhs - rhs))
    return worst


# --- property harness ---------------------------------------------------------


@dataclass
class PropertyRecord:
    name: str
    instances_run: int
    max_violation: float
    tolerance: float = PROPERTY_TOL

    @property
    def passed(self):
        return bool(self.max_violation <= self.tolerance)

    def to_dict(self):
        return {
            "name": self.name,
            "instances_run": self.instances_run,
            "max_violation": float(self.max_violation),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class PropertyReport:
    d: int
    seed: int
    records: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def record(self, name):
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def merge(self, other):
        """Associative merge: instance counts add, violations take the max."""
        out = PropertyReport(self.d, self.seed)
        names = [r.name for r in self.records] + [r.name for r in other.records if r.name not in {x.name for x in self.records}]
        for n in names:
            a = next((r for r in self.records if r.name == n), None)
            b = next((r for r in other.records if r.name == n), None)
            parts = [x for x in (a, b) if x is not None]
            out.records.append(
                PropertyRecord(
                    n,
                    sum(x.instances_run for x in parts),
                    max(x.max_violation for x in parts),
                    min(x.tolerance for x in parts),
                )
            )
        return out

    def to_dict(self):
        return {
            "d": self.d,
            "seed": self.seed,
            "pass": self.passed,
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self):
        lines = [f"{'property':<28}{'instances':>10}{'max violation':>16}  result"]
        for r in self.records:
            lines.append(
                f"{r.name:<28}{r.instances_run:>10}{r.max_violation:>16.3e}  {'pass' if r.passed else 'FAIL'}"
            )
        return "\n".join(lines)


def _incoherent_state(K, rng):
    # block diagonal in the eigenspaces of K, so it commutes with K
    v = K.eigenvectors.vectors
    blocks = np.zeros((K.dim, K.dim), dtype=complex)
    weights = rng.dirichlet(np.ones(len(K.eigenspaces())))
    for g, wgt in zip(K.eigenspaces(), weights):
        blocks[np.ix_(g, g)] = wgt * random_density_matrix(len(g), seed=rng).matrix
    return v @ blocks @ _dagger(v)


def _instance_generator(d, rng, i):
    # alternate generic and degenerate spectra
    return random_generator(d, rng) if i % 2 == 0 else random_integer_generator(d, rng)


def run_property_suite(d, n_instances, seed=0, ancilla_dims=(2, 3), tol=PROPERTY_TOL):
    """Check the coherence-monotone properties on fresh random instances.

    Coherence values come from :func:`spectral_oracle`. Each check gets its
    own random stream derived from ``seed``.
    """
    d, n_instances = int(d), int(n_instances)
    if d < 2 or n_instances < 1:
        raise ValueError("need d >= 2 and n_instances >= 1")

    def stream(tag, i):
        return np.random.default_rng([int(seed), tag, i])

    worst = {}

    def note(name, value):
        worst[name] = max(worst.get(name, 0.0), float(value))

    for i in range(n_instances):
        # faithfulness: incoherent states have zero coherence ...
        rng = stream(1, i)
        K = _instance_generator(d, rng, i)
        note("prop1_incoherent_zero", spectral_oracle(_incoherent_state(K, rng), K))
        # ... and coherent ones are bounded below by the largest commutator entry
        rho = random_density_matrix(d, seed=rng)
        c = spectral_oracle(rho, K)
        note("prop1_coherent_positive", max(0.0, 0.5 * _max_abs(commutator(K.matrix, rho.matrix)) - c))

        # convexity
        rng = stream(2, i)
        K = _instance_generator(d, rng, i)
        m = int(rng.integers(2, 5))
        p = rng.dirichlet(np.ones(m))
        states = [random_density_matrix(d, seed=rng).matrix for _ in range(m)]
        mix = sum(pk * s for pk, s in zip(p, states))
        rhs = sum(pk * spectral_oracle(s, K) for pk, s in zip(p, states))
        note("prop2_convexity", spectral_oracle(mix, K) - rhs)

        # joint unitary invariance
        rng = stream(3, i)
        K = _instance_generator(d, rng, i)
        rho = random_density_matrix(d, seed=rng).matrix
        u = haar_random_unitary(d, rng)
        lhs = spectral_oracle(u @ rho @ _dagger(u), u @ K.matrix @ _dagger(u))
        note("prop3_unitary_invariance", abs(lhs - spectral_oracle(rho, K)))

        # invariance under covariant unitaries
        rng = stream(4, i)
        K = _instance_generator(d, rng, i)
        rho = random_density_matrix(d, seed=rng).matrix
        v = random_covariant_unitary(K, rng)
        note("prop4_covariant_invariance", abs(spectral_oracle(v @ rho @ _dagger(v), K) - spectral_oracle(rho, K)))

        # partial trace: the reduced state never has more coherence
        rng = stream(5, i)
        K = _instance_generator(d, rng, i)
        d2 = int(rng.choice(ancilla_dims))
        k12 = np.kron(K.matrix, np.eye(d2))
        rho12 = random_density_matrix(d * d2, seed=rng).matrix
        rho1 = partial_trace(rho12, (d, d2), keep=0)
        note("prop5_partial_trace", max(0.0, spectral_oracle(rho1, K) - spectral_oracle(rho12, k12)))
        r1 = random_density_matrix(d, seed=rng).matrix
        r2 = random_density_matrix(d2, seed=rng).matrix
        note("prop5_product_equality", abs(spectral_oracle(np.kron(r1, r2), k12) - spectral_oracle(r1, K)))

        # monotonicity under free channels
        rng = stream(6, i)
        da = int(rng.choice(ancilla_dims))
        ch = build_free_channel((d, da), rng)
        rho = random_density_matrix(d, seed=rng).matrix
        out = apply_channel(ch, rho)
        note("prop6_channel_monotone", max(0.0, spectral_oracle(out, ch.K_s) - spectral_oracle(rho, ch.K_s)))
        note("prop6_channel_covariance", channel_covariance_error(ch, rho, rng.uniform(-np.pi, np.pi, 3)))

    report = PropertyReport(d, int(seed))
    for name, value in worst.items():
        report.records.append(PropertyRecord(name, n_instances, value, tol))
    return report
