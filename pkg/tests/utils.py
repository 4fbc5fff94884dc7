"""Test utilities and helper functions"""
import math
from typing import Sequence

import numpy as np


def ket(*amplitudes: complex) -> np.ndarray:
    """Normalized column vector from amplitudes"""
    v = np.asarray(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def pure(*amplitudes: complex) -> np.ndarray:
    v = ket(*amplitudes)
    return np.outer(v, v.conj())


def bell_state() -> np.ndarray:
    """(|00⟩ + |11⟩)/√2 as a density matrix"""
    return pure(1, 0, 0, 1)


def qubit_state(p: float, coherence: complex) -> np.ndarray:
    """[[p, c], [c*, 1 − p]]"""
    return np.array([[p, coherence], [np.conj(coherence), 1 - p]], dtype=complex)


def assert_close(actual: float, expected: float, tol: float, what: str = "value") -> None:
    assert math.isfinite(actual), f"{what} is not finite: {actual}"
    assert abs(actual - expected) <= tol, f"{what}: expected {expected:.10f}, got {actual:.10f} (tol {tol:g})"


def assert_psd(m: np.ndarray, tol: float = 1e-9, what: str = "matrix") -> None:
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
    assert evals[0] >= -tol, f"{what} has eigenvalue {evals[0]:.3e}"


def assert_matrix_close(a: np.ndarray, b: np.ndarray, tol: float, what: str = "matrices") -> None:
    deviation = float(np.abs(np.asarray(a) - np.asarray(b)).max())
    assert deviation <= tol, f"{what} differ by {deviation:.3e} (tol {tol:g})"


def binary_entropy(p: float) -> float:
    return -sum(x * math.log2(x) for x in (p, 1 - p) if x > 0)


def eigen_entropy(values: Sequence[float]) -> float:
    return -sum(x * math.log2(x) for x in values if x > 1e-15)
