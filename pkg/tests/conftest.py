# tests/conftest.py
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import unitary_group

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run desk-scale acceptance sweeps")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale acceptance sweep (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# ----------------------------
# Dense oracles
# ----------------------------
def _dense_operator(n: int, matrix: np.ndarray, qubits) -> np.ndarray:
    """Full 2^n x 2^n operator, built index by index (little-endian, local index in listed-qubit order)."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    k = len(qubits)
    dim = 1 << n
    full = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        local_in = 0
        for q in qubits:
            local_in = (local_in << 1) | ((col >> q) & 1)
        base = col
        for q in qubits:
            base &= ~(1 << q)
        for local_out in range(1 << k):
            row = base
            for pos, q in enumerate(qubits):
                bit = (local_out >> (k - 1 - pos)) & 1
                row |= bit << q
            full[row, col] += matrix[local_out, local_in]
    return full


def _kron_operator(n: int, matrix: np.ndarray, low_qubit: int) -> np.ndarray:
    """Kronecker embedding of a k-qubit matrix acting on qubits low_qubit+k-1 ... low_qubit."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    k = int(np.log2(matrix.shape[0]))
    above = 1 << (n - low_qubit - k)
    below = 1 << low_qubit
    return np.kron(np.kron(np.eye(above), matrix), np.eye(below))


@pytest.fixture
def dense_operator():
    return _dense_operator


@pytest.fixture
def kron_operator():
    return _kron_operator


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def haar_unitary():
    def make(dim: int, seed: int = 7) -> np.ndarray:
        return unitary_group.rvs(dim, random_state=seed)

    return make


@pytest.fixture
def random_state():
    def make(n: int, rng: np.random.Generator) -> np.ndarray:
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        return v / np.linalg.norm(v)

    return make
