"""ULA geometry primitives: steering vectors, DFT matrices, and the
Kronecker/Khatri-Rao products used to compose two-hop channels.

Angles cross API boundaries in degrees and are converted to radians once,
internally.  A "spatial frequency" is the cos-angle coordinate of a
half-lambda ULA steering vector; composed frequencies are wrapped modulo 2
onto [-1, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def steering_vector(angle_deg: float, M: int) -> np.ndarray:
    """Steering vector of a half-lambda ULA: entry m is exp(j*pi*m*cos(angle)).

    Parameters
    ----------
    angle_deg : float
        Steering direction in degrees, strictly inside (0, 180).
    M : int
        Number of antennas (>= 1).

    Returns
    -------
    np.ndarray, shape (M,), complex
    """
    if not math.isfinite(angle_deg):
        raise ValueError(f"steering angle must be finite, got {angle_deg!r}")
    if not 0.0 < angle_deg < 180.0:
        raise ValueError(f"steering angle must be in (0, 180) deg, got {angle_deg}")
    return steering_from_frequency(math.cos(math.radians(angle_deg)), M)


def steering_from_frequency(f: float, M: int) -> np.ndarray:
    """Steering vector at spatial frequency f: entry m is exp(j*pi*m*f)."""
    if M < 1:
        raise ValueError(f"antenna count must be >= 1, got {M}")
    return np.exp(1j * np.pi * f * np.arange(M))


def steering_matrix(angles_deg, M: int) -> np.ndarray:
    """Columns are steering vectors at the given angles; shape (M, len(angles))."""
    angles_deg = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    return np.column_stack([steering_vector(a, M) for a in angles_deg])


def dft_matrix(N: int) -> np.ndarray:
    """N x N DFT matrix with entry (k, n) = exp(j*2*pi*k*n/N).

    Satisfies ``Psi @ Psi.conj().T == N * I``.
    """
    if N < 1:
        raise ValueError(f"DFT size must be >= 1, got {N}")
    k = np.arange(N)
    return np.exp(2j * np.pi * np.outer(k, k) / N)


def kronecker(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product A (x) B."""
    return np.kron(np.asarray(A), np.asarray(B))


def khatri_rao_cols(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Column-wise Khatri-Rao product: column j is kron(A[:, j], B[:, j])."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("khatri_rao_cols expects 2-D arrays")
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"column counts must match, got {A.shape[1]} and {B.shape[1]}"
        )
    # (m_A, 1, n) * (1, m_B, n) -> (m_A, m_B, n), flattened A-major per column.
    out = A[:, None, :] * B[None, :, :]
    return out.reshape(A.shape[0] * B.shape[0], A.shape[1])


def wrap_frequency(f: float) -> float:
    """Wrap a real number onto the mod-2 representative in [-1, 1)."""
    return float((f + 1.0) % 2.0 - 1.0)


@dataclass(frozen=True)
class SpatialFrequency:
    """Spatial frequency in cos-angle units, wrapped onto [-1, 1).

    ``origin`` optionally records which (BS-to-RIS AoA index, RIS-to-UE AoD
    index) pair the frequency was composed from.
    """

    f: float
    origin: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "f", wrap_frequency(self.f))

    def steering(self, M: int) -> np.ndarray:
        return steering_from_frequency(self.f, M)


def compose_frequency(
    theta_RU_deg: float,
    phi_BR_deg: float,
    origin: tuple[int, int] | None = None,
) -> SpatialFrequency:
    """Spatial frequency of a composed two-hop atom.

    The RIS sees the product of a departure steering vector at
    ``theta_RU_deg`` (conjugated) and an arrival steering vector at
    ``phi_BR_deg``; entrywise this collapses to a single steering vector at
    frequency cos(theta_RU) - cos(phi_BR), wrapped onto [-1, 1).
    """
    for name, a in (("theta_RU_deg", theta_RU_deg), ("phi_BR_deg", phi_BR_deg)):
        if not (math.isfinite(a) and 0.0 < a < 180.0):
            raise ValueError(f"{name} must be in (0, 180) deg, got {a!r}")
    f = math.cos(math.radians(theta_RU_deg)) - math.cos(math.radians(phi_BR_deg))
    return SpatialFrequency(f, origin)
