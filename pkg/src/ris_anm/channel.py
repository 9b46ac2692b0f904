"""Sparse multipath sampling and the two-hop geometric channel model.

The BS-to-RIS and RIS-to-UE channels are sums of rank-1 steering outer
products.  Their Khatri-Rao composition is the *effective channel*
``H_eff = H_BR.T (KR) H_RU`` mapping a RIS control vector to the vectorized
cascaded channel; it is the estimation target of the whole pipeline.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .geometry import khatri_rao_cols, steering_matrix


class Hop(enum.Enum):
    BS_TO_RIS = "BS_to_RIS"
    RIS_TO_UE = "RIS_to_UE"


@dataclass(frozen=True)
class SystemDims:
    """Antenna, RF-chain, pilot, and frame dimensions of the system.

    ``M_B``, ``M_R``, ``M_U`` are BS/RIS/UE antenna counts; ``N_B``, ``N_U``
    are BS/UE RF-chain counts; ``D`` is the number of pilot samples per beam
    training; ``B`` is the number of frames.
    """

    M_B: int = 8
    M_R: int = 32
    M_U: int = 4
    N_B: int = 4
    N_U: int = 2
    D: int = 16
    B: int = 16

    def __post_init__(self):
        for name in ("M_B", "M_R", "M_U", "N_B", "N_U", "D", "B"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.M_B % self.N_B:
            raise ValueError(f"M_B={self.M_B} must be divisible by N_B={self.N_B}")
        if self.M_U % self.N_U:
            raise ValueError(f"M_U={self.M_U} must be divisible by N_U={self.N_U}")
        if self.D < self.N_B:
            raise ValueError(f"D={self.D} must be >= N_B={self.N_B}")
        if not 1 <= self.B <= self.M_R:
            raise ValueError(f"B={self.B} must be in [1, M_R={self.M_R}]")

    @property
    def P_B(self) -> int:
        return self.M_B // self.N_B

    @property
    def P_U(self) -> int:
        return self.M_U // self.N_U

    @property
    def P(self) -> int:
        """Total number of beam trainings across all frames."""
        return self.B * self.P_B * self.P_U


@dataclass(frozen=True)
class PathSet:
    """Sparse multipath description for one hop.

    ``aoa_deg[l]`` / ``aod_deg[l]`` / ``gains[l]`` are the angle of arrival,
    angle of departure, and complex gain of path l.
    """

    aoa_deg: np.ndarray
    aod_deg: np.ndarray
    gains: np.ndarray
    hop: Hop

    def __post_init__(self):
        aoa = np.atleast_1d(np.asarray(self.aoa_deg, dtype=float))
        aod = np.atleast_1d(np.asarray(self.aod_deg, dtype=float))
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        if not (len(aoa) == len(aod) == len(gains)):
            raise ValueError("aoa_deg, aod_deg, gains must have equal lengths")
        if len(aoa) < 1:
            raise ValueError("a PathSet needs at least one path")
        for name, arr in (("aoa_deg", aoa), ("aod_deg", aod)):
            if not np.all((arr > 0.0) & (arr < 180.0)):
                raise ValueError(f"all {name} entries must lie in (0, 180) deg")
        object.__setattr__(self, "aoa_deg", aoa)
        object.__setattr__(self, "aod_deg", aod)
        object.__setattr__(self, "gains", gains)

    def __len__(self) -> int:
        return len(self.gains)


@dataclass(frozen=True)
class ChannelPair:
    """Materialized BS-to-RIS and RIS-to-UE channels plus their provenance."""

    H_BR: np.ndarray
    H_RU: np.ndarray
    paths_BR: PathSet | None = field(default=None, compare=False)
    paths_RU: PathSet | None = field(default=None, compare=False)


def sample_paths(
    L: int,
    hop: Hop,
    angle_lo_deg: float,
    angle_hi_deg: float,
    rng: np.random.Generator,
) -> PathSet:
    """Draw L paths with i.i.d. uniform angles and unit-variance CN(0,1) gains."""
    if L < 1:
        raise ValueError(f"path count must be >= 1, got {L}")
    if not 0.0 < angle_lo_deg < angle_hi_deg < 180.0:
        raise ValueError(
            f"need 0 < lo < hi < 180, got [{angle_lo_deg}, {angle_hi_deg}]"
        )
    aoa = rng.uniform(angle_lo_deg, angle_hi_deg, size=L)
    aod = rng.uniform(angle_lo_deg, angle_hi_deg, size=L)
    gains = complex_gaussian(rng, (L,), 1.0)
    return PathSet(aoa, aod, gains, hop)


def complex_gaussian(
    rng: np.random.Generator, shape, std: float
) -> np.ndarray:
    """Circularly-symmetric complex Gaussian, per-entry variance ``std**2``."""
    scale = std / np.sqrt(2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def build_channel(paths: PathSet, M_rx: int, M_tx: int) -> np.ndarray:
    """Materialize sum_l gain_l * a(aoa_l) a(aod_l)^H as an M_rx x M_tx matrix."""
    if M_rx < 1 or M_tx < 1:
        raise ValueError("antenna counts must be >= 1")
    A_rx = steering_matrix(paths.aoa_deg, M_rx)
    A_tx = steering_matrix(paths.aod_deg, M_tx)
    return (A_rx * paths.gains) @ A_tx.conj().T


def cascaded_channel(
    H_RU: np.ndarray, omega: np.ndarray, H_BR: np.ndarray
) -> np.ndarray:
    """End-to-end channel H_RU @ diag(omega) @ H_BR for one RIS configuration."""
    H_RU = np.asarray(H_RU)
    H_BR = np.asarray(H_BR)
    omega = np.asarray(omega).ravel()
    if H_RU.shape[1] != omega.shape[0] or H_BR.shape[0] != omega.shape[0]:
        raise ValueError(
            f"RIS size mismatch: H_RU {H_RU.shape}, omega {omega.shape}, "
            f"H_BR {H_BR.shape}"
        )
    return (H_RU * omega) @ H_BR


def effective_channel(H_BR: np.ndarray, H_RU: np.ndarray) -> np.ndarray:
    """Effective channel H_BR.T (KR) H_RU, shape (M_B*M_U, M_R).

    Satisfies vec(H_RU @ diag(omega) @ H_BR) == H_eff @ omega for every RIS
    control vector omega (column-major vec).
    """
    H_BR = np.asarray(H_BR)
    H_RU = np.asarray(H_RU)
    if H_BR.shape[0] != H_RU.shape[1]:
        raise ValueError(
            f"RIS dimension mismatch: H_BR {H_BR.shape}, H_RU {H_RU.shape}"
        )
    return khatri_rao_cols(H_BR.T, H_RU)


def vec(M: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization (the math convention)."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape(rows, cols, order="F")
