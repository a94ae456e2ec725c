import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from asymcoh import random_density_matrix, random_generator

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=6)


@st.composite
def instances(draw, min_d=2, max_d=6, pure=None):
    """(rho, K) drawn through seeded samplers; ``pure`` forces the rank."""
    d = draw(st.integers(min_value=min_d, max_value=max_d))
    seed = draw(seeds)
    rank = 1 if pure else (d if pure is False else draw(st.integers(1, d)))
    return random_density_matrix(d, rank, seed=(seed, 0)), random_generator(d, seed=(seed, 1))


PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
PLUS_I = np.array([1, 1j], dtype=complex) / np.sqrt(2)
MINUS_I = np.array([1, -1j], dtype=complex) / np.sqrt(2)


@pytest.fixture
def plus_state():
    from asymcoh import DensityMatrix

    return DensityMatrix.pure(PLUS)


@pytest.fixture
def y_basis():
    from asymcoh import OrthonormalBasis

    return OrthonormalBasis(np.column_stack([PLUS_I, MINUS_I]))


def bloch_grid_max(rho, K, n=200):
    """Max of the qubit objective over an n x n (alpha, beta) grid, computed from scratch.

    Antipodal Bloch directions give the same basis with its vectors swapped,
    so beta in [0, pi) already covers every basis once.
    """
    a = np.linspace(0, np.pi, n)
    b = np.linspace(0, np.pi, n, endpoint=False)
    A, B = np.meshgrid(a, b, indexing="ij")
    c, s, ph = np.cos(A / 2), np.sin(A / 2), np.exp(1j * B)
    kr = np.asarray(getattr(K, "matrix", K)) @ np.asarray(getattr(rho, "matrix", rho))
    x0 = np.stack([c, s * ph], -1)
    x1 = np.stack([s, -c * ph], -1)
    t0 = np.einsum("...i,ij,...j->...", x0.conj(), kr, x0).imag
    t1 = np.einsum("...i,ij,...j->...", x1.conj(), kr, x1).imag
    return float(np.max(np.abs(t0) + np.abs(t1)))


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion."""

    def record(number, passed, detail):
        ACCEPTANCE_LINES.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
