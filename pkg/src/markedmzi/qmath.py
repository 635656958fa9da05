"""Fixed-size complex linear algebra for the two-qubit idler/signal system.

Kets and operators are plain ``numpy`` arrays of dtype ``complex128``.
Only dimensions 2 and 4 are accepted.  The global basis ordering is

* polarization: ``(V, H)``
* path: ``(path1, path2)``
* joint idler/signal: idler is the slow index, i.e.
  ``(V⊗p1, V⊗p2, H⊗p1, H⊗p2)``.
"""

from __future__ import annotations

import numpy as np

ALGEBRA_TOL = 1e-12
UNITARY_TOL = 1e-9

_SIZES = (2, 4)


def _as_ket(psi, name: str = "psi") -> np.ndarray:
    arr = np.asarray(psi, dtype=np.complex128)
    if arr.ndim != 1 or arr.shape[0] not in _SIZES:
        raise ValueError(f"{name} must be a ket of length 2 or 4, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _as_mat(m, name: str = "M") -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in _SIZES:
        raise ValueError(f"{name} must be a 2x2 or 4x4 matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def ket(*amplitudes) -> np.ndarray:
    """Build a ket from its amplitudes, e.g. ``ket(1, 0)``."""
    return _as_ket(np.array(amplitudes, dtype=np.complex128))


def identity(n: int = 2) -> np.ndarray:
    if n not in _SIZES:
        raise ValueError(f"only sizes {_SIZES} are supported")
    return np.eye(n, dtype=np.complex128)


def tensor(idler, signal) -> np.ndarray:
    """Tensor product of an idler ket and a signal ket (idler index slow)."""
    a = _as_ket(idler, "idler")
    b = _as_ket(signal, "signal")
    if a.shape[0] != 2 or b.shape[0] != 2:
        raise ValueError("tensor expects two 2-component kets")
    return np.kron(a, b)


def kron(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 operators; ``a`` acts on the idler."""
    a = _as_mat(a, "A")
    b = _as_mat(b, "B")
    if a.shape[0] != 2 or b.shape[0] != 2:
        raise ValueError("kron expects two 2x2 matrices")
    return np.kron(a, b)


def apply(m, psi) -> np.ndarray:
    m = _as_mat(m)
    psi = _as_ket(psi)
    if m.shape[0] != psi.shape[0]:
        raise ValueError("dimension mismatch between operator and ket")
    return m @ psi


def adjoint(m) -> np.ndarray:
    return _as_mat(m).conj().T


def inner(a, b) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    a = _as_ket(a, "a")
    b = _as_ket(b, "b")
    if a.shape != b.shape:
        raise ValueError("dimension mismatch between kets")
    return complex(np.vdot(a, b))


def norm(psi) -> float:
    return float(np.linalg.norm(_as_ket(psi)))


def outer(psi) -> np.ndarray:
    """Projector-like ``|psi><psi|`` (unnormalized if ``psi`` is)."""
    psi = _as_ket(psi)
    return np.outer(psi, psi.conj())


def partial_trace_idler(rho4) -> np.ndarray:
    """Trace out the idler (slow index) of a 4x4 operator, leaving the signal."""
    rho4 = _as_mat(rho4, "rho4")
    if rho4.shape[0] != 4:
        raise ValueError("partial_trace_idler expects a 4x4 matrix")
    return np.einsum("isit->st", rho4.reshape(2, 2, 2, 2))


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    m = _as_mat(m)
    return bool(np.allclose(adjoint(m) @ m, np.eye(m.shape[0]), rtol=0.0, atol=tol))


def is_hermitian(m, tol: float = ALGEBRA_TOL) -> bool:
    m = _as_mat(m)
    return bool(np.allclose(m, adjoint(m), rtol=0.0, atol=tol))
