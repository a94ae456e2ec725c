"""Shot-noise simulation of the weak-value route to the coherence.

Each term Im<x|K rho|x> is read off Born statistics of the translated states
rho_{+delta} and rho_{-delta}: since dPr(x)/dtheta = 2 Im<x|K rho|x>, the
central difference (f_+ - f_-) / (4 delta) of sampled frequencies estimates
it. A noisy simplex search over bases maximizes the sum of absolute
estimates, and a fresh readout at the chosen basis gives the reported value.
"""

from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
import csv
import io
import json
import os

import numpy as np

from .coherence import BasisParameterization, objective, spectral_oracle
from .core import as_density, as_generator, haar_random_unitary, make_rng, operator_matrix
from .errors import DimensionMismatch
from .simplex import nelder_mead
from .weak_values import born_probabilities, translated

DEFAULT_SHOTS = 1_000_000
DEFAULT_DELTA = 0.01
BOOTSTRAP_RESAMPLES = 50


def worker_count():
    """Thread cap from ASYMCOH_THREADS (default: CPU count)."""
    env = os.environ.get("ASYMCOH_THREADS")
    n = int(env) if env else (os.cpu_count() or 1)
    return max(1, n)


def _check_budget(shots, delta, min_shots=1):
    if int(shots) < min_shots:
        raise ValueError(f"shots must be >= {min_shots}")
    if not 0 < delta <= 0.1:
        raise ValueError("delta must lie in (0, 0.1]")


def _probabilities(p):
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    return p / p.sum()


def sample_born(rho, basis, shots, seed=None):
    """Multinomial outcome counts for measuring ``rho`` in ``basis``."""
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = _probabilities(born_probabilities(rho, basis))
    return make_rng(seed).multinomial(shots, p)


def _terms_from_counts(cp, cm, shots, delta):
    return (np.asarray(cp) - np.asarray(cm)) / (shots * 4 * delta)


def estimate_im_weak_value_terms(rho, K, basis, delta=DEFAULT_DELTA, shots=DEFAULT_SHOTS, seed=None):
    """Per-outcome estimates of Im<x|K rho|x> = Im K^w(x) Pr(x|rho)."""
    _check_budget(shots, delta, min_shots=100)
    rng = make_rng(seed)
    r = operator_matrix(rho)
    cp = sample_born(translated(r, K, delta), basis, shots, rng)
    cm = sample_born(translated(r, K, -delta), basis, shots, rng)
    return _terms_from_counts(cp, cm, int(shots), delta)


class CoupledCounts:
    """Counts of ``n`` shared uniforms below arbitrary cut points, drawn lazily.

    Every query is consistent with one fixed sample of ``n`` uniforms: the
    count between two known cuts is split binomially. Multinomial draws for
    different probability vectors thus share their randomness, which is what
    common random numbers need.
    """

    def __init__(self, n, rng):
        self.n = int(n)
        self.rng = rng
        self.cuts = [0.0, 1.0]
        self.counts = [0, self.n]

    def below(self, c):
        c = min(max(float(c), 0.0), 1.0)
        i = bisect_left(self.cuts, c)
        if self.cuts[i] == c:
            return self.counts[i]
        ca, cb = self.cuts[i - 1], self.cuts[i]
        na, nb = self.counts[i - 1], self.counts[i]
        k = na + int(self.rng.binomial(nb - na, (c - ca) / (cb - ca)))
        self.cuts.insert(i, c)
        self.counts.insert(i, k)
        return k

    def multinomial(self, p):
        cum = np.cumsum(_probabilities(p))[:-1]
        ks = [self.below(c) for c in cum]
        return np.diff(np.concatenate(([0], ks, [self.n])))


@dataclass
class EstimationRecord:
    shots_per_probability: int
    delta: float
    estimate: float
    stderr: float
    exact: float
    exact_at_basis: float  # noiseless objective at the basis that was read out
    seed: int
    iterations: int
    max_iters: int
    restarts: int
    readouts: int

    @property
    def converged(self):
        return self.iterations < self.max_iters

    @property
    def error(self):
        return abs(self.estimate - self.exact)

    def to_dict(self):
        out = asdict(self)
        out["converged"] = self.converged
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _bootstrap_stderr(cp, cm, n, delta, rng, resamples=BOOTSTRAP_RESAMPLES):
    fp, fm = _probabilities(cp), _probabilities(cm)
    vals = np.empty(resamples)
    for b in range(resamples):
        bp = rng.multinomial(n, fp)
        bm = rng.multinomial(n, fm)
        vals[b] = np.sum(np.abs(_terms_from_counts(bp, bm, n, delta)))
    return float(np.std(vals, ddof=1))


def estimate_tc_w_coherence(
    rho,
    K,
    shots=DEFAULT_SHOTS,
    delta=DEFAULT_DELTA,
    restarts=8,
    max_iters=300,
    readouts=64,
    seed=0,
):
    """Estimate the coherence from simulated Born statistics.

    The simplex search sees only sampled frequencies. Within one simplex
    step every vertex is scored against the same underlying shots
    (:class:`CoupledCounts`); each step draws fresh shots. Restarts begin at
    Haar-random bases. The surviving bases are compared on one fresh readout
    each, and the winner is read out ``readouts`` more times with ``shots``
    per probability; the pooled frequencies give the estimate and a
    parametric bootstrap its standard error.
    """
    _check_budget(shots, delta, min_shots=100)
    shots, restarts, max_iters, readouts = int(shots), int(restarts), int(max_iters), int(readouts)
    if restarts < 1 or max_iters < 1 or readouts < 1:
        raise ValueError("restarts, max_iters and readouts must be >= 1")
    r = as_density(rho).matrix
    Kg = as_generator(K)
    if Kg.dim != r.shape[0]:
        raise DimensionMismatch(f"rho of dim {r.shape[0]} but K of dim {Kg.dim}")
    d = r.shape[0]
    plus, minus = translated(r, Kg, delta), translated(r, Kg, -delta)
    refs = np.array([haar_random_unitary(d, make_rng(seed, j)) for j in range(restarts)])
    par = BasisParameterization((d,))
    samplers = {}

    def counter(owner, it, sign):
        key = (owner, it, sign)
        if key not in samplers:
            samplers[key] = CoupledCounts(shots, np.random.default_rng([seed, 1, owner, it, sign]))
        return samplers[key]

    def born(state, bases):
        return np.real(np.einsum("nix,ij,njx->nx", bases.conj(), state, bases))

    def fun(points, owners, its):
        bases = par.unitaries(points) @ refs[owners]
        pp, pm = born(plus, bases), born(minus, bases)
        out = np.empty(len(points))
        for i, (o, it) in enumerate(zip(owners, its)):
            cp = counter(o, it, 0).multinomial(pp[i])
            cm = counter(o, it, 1).multinomial(pm[i])
            out[i] = -np.sum(np.abs(_terms_from_counts(cp, cm, shots, delta)))
        # streams of finished steps are never queried again
        current = {(o, it) for o, it in zip(owners, its)}
        for key in [k for k in samplers if k[1] < min(it for _, it in current)]:
            del samplers[key]
        return out

    # stop once the simplex values agree to a tenth of the single-term shot
    # noise; vertices share shots, so their differences are far less noisy
    res = nelder_mead(
        fun, np.zeros((restarts, par.n_params)), step=0.25, max_iters=max_iters,
        xatol=np.inf, fatol=0.1 / (4 * delta * np.sqrt(shots)), reevaluate=True,
    )
    finals = par.unitaries(res.x) @ refs

    rng = np.random.default_rng([seed, 2])
    scores = np.empty(restarts)
    for j in range(restarts):
        cp = sample_born(plus, finals[j], shots, rng)
        cm = sample_born(minus, finals[j], shots, rng)
        scores[j] = np.sum(np.abs(_terms_from_counts(cp, cm, shots, delta)))
    best = int(np.argmax(scores))

    n = shots * readouts
    cp = sample_born(plus, finals[best], n, rng)
    cm = sample_born(minus, finals[best], n, rng)
    estimate = float(np.sum(np.abs(_terms_from_counts(cp, cm, n, delta))))
    stderr = _bootstrap_stderr(cp, cm, n, delta, rng)
    return EstimationRecord(
        shots_per_probability=shots,
        delta=float(delta),
        estimate=estimate,
        stderr=stderr,
        exact=spectral_oracle(r, Kg),
        exact_at_basis=objective(r, Kg, finals[best]),
        seed=int(seed),
        iterations=int(res.iterations.max()),
        max_iters=max_iters,
        restarts=restarts,
        readouts=readouts,
    )


@dataclass
class StudyRow:
    shots: int
    mean_abs_error: float
    stderr: float  # None when repeats == 1


@dataclass
class ConvergenceStudy:
    rows: list
    slope: float
    repeats: int

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        has_err = self.repeats > 1
        w.writerow(["shots", "mean_abs_error"] + (["stderr"] if has_err else []))
        for row in self.rows:
            w.writerow([row.shots, repr(row.mean_abs_error)] + ([repr(row.stderr)] if has_err else []))
        w.writerow(["slope_fit", repr(self.slope)] + ([""] if has_err else []))
        return buf.getvalue()

    def to_dict(self):
        return {
            "repeats": self.repeats,
            "slope_fit": self.slope,
            "rows": [asdict(r) for r in self.rows],
        }


def convergence_study(rho, K, shot_grid=(10_000, 100_000, 1_000_000), repeats=20, seed=0, delta=DEFAULT_DELTA, **budget):
    """Mean |estimate - exact| over ``repeats`` runs at each shot count, with a log-log slope.

    Repeat ``i`` at grid point ``g`` uses seed stream ``(seed, g, i)``.
    """
    grid = [int(s) for s in shot_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("shot_grid must be strictly ascending")
    repeats = int(repeats)
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    jobs = [(g, i) for g in range(len(grid)) for i in range(repeats)]

    def run(job):
        g, i = job
        s = int(np.random.default_rng([seed, g, i]).integers(2**31))
        return estimate_tc_w_coherence(rho, K, shots=grid[g], delta=delta, seed=s, **budget).error

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        errors = np.array(list(pool.map(run, jobs))).reshape(len(grid), repeats)
    means = errors.mean(axis=1)
    sems = errors.std(axis=1, ddof=1) / np.sqrt(repeats) if repeats > 1 else [None] * len(grid)
    rows = [
        StudyRow(grid[g], float(means[g]), None if sems[g] is None else float(sems[g]))
        for g in range(len(grid))
    ]
    slope = float(np.polyfit(np.log10(grid), np.log10(means), 1)[0]) if len(grid) > 1 else float("nan")
    return ConvergenceStudy(rows, slope, repeats)
