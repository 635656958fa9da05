"""Matrix models of the optical elements.

All angles are in radians.  Polarization matrices act on ``(V, H)``
amplitudes, path matrices on ``(path1, path2)`` amplitudes.
"""

from __future__ import annotations

import math

import numpy as np


def hwp(angle: float) -> np.ndarray:
    """Half-wave plate with its fast axis at ``angle`` from vertical.

    Returns ``[[cos 2a, sin 2a], [sin 2a, -cos 2a]]``, which is real,
    symmetric and its own inverse.  At 22.5 degrees it maps V to
    ``(V+H)/sqrt2`` and H to ``(V-H)/sqrt2``; at 45 degrees it swaps V and H.
    """
    if not math.isfinite(angle):
        raise ValueError("wave plate angle must be finite")
    c = math.cos(2.0 * angle)
    s = math.sin(2.0 * angle)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def pol_to_path() -> np.ndarray:
    """PBS followed by a 45 degree HWP: polarization ``(v', h')`` -> path ``(h', v')``."""
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def phase_shifter(alpha: float) -> np.ndarray:
    """Phase ``exp(i alpha)`` imprinted on path 1."""
    if not math.isfinite(alpha):
        raise ValueError("interferometer phase must be finite")
    return np.array([[np.exp(1j * alpha), 0], [0, 1]], dtype=np.complex128)


def npbs() -> np.ndarray:
    """50/50 beam splitter mapping path amplitudes to ``(D1, D2)`` amplitudes."""
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2.0)


def mzi(alpha: float) -> np.ndarray:
    """Signal-side map of the interferometer in wave mode."""
    return npbs() @ phase_shifter(alpha)
