"""RIS control codebooks and their radiation patterns.

Three constructions are provided: the full DFT codebook (B = M_R), the
beamwidth-adapted codebook that deactivates the last M_R - B elements so B
DFT beams cover the whole angular domain at reduced gain, and the naive
column-subset baseline that keeps all elements active but leaves coverage
gaps between the selected beams.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .geometry import SpatialFrequency, dft_matrix


class CodebookKind(enum.Enum):
    FULL_DFT = "full_dft"
    ADAPTED = "adapted"
    SUBSET = "subset"


class SubsetStrategy(enum.Enum):
    FIRST = "first"
    EVEN_SPACED = "even_spaced"


@dataclass(frozen=True)
class RISCodebook:
    """Per-frame RIS control vectors as columns of W (M_R x B).

    Every entry has magnitude exactly 0 (deactivated element) or 1 (unit
    reflection with some phase).  ``active_count`` is the number of active
    elements per beam.
    """

    W: np.ndarray
    kind: CodebookKind
    active_count: int

    @property
    def M_R(self) -> int:
        return self.W.shape[0]

    @property
    def B(self) -> int:
        return self.W.shape[1]


def full_dft_codebook(M_R: int) -> RISCodebook:
    """All M_R DFT beams; requires B = M_R frames."""
    return RISCodebook(dft_matrix(M_R), CodebookKind.FULL_DFT, M_R)


def adapted_codebook(M_R: int, B: int) -> RISCodebook:
    """Training-beamwidth-adapted codebook: Psi_B on top of a zero block.

    Deactivating the last M_R - B elements widens each beam so that the B
    mainlobes tile the full frequency circle (peak gain drops from M_R to B).
    """
    if not 1 <= B <= M_R:
        raise ValueError(f"need 1 <= B <= M_R, got B={B}, M_R={M_R}")
    W = np.zeros((M_R, B), dtype=complex)
    W[:B, :] = dft_matrix(B)
    if B == M_R:
        return RISCodebook(W, CodebookKind.FULL_DFT, M_R)
    return RISCodebook(W, CodebookKind.ADAPTED, B)


def subset_codebook(
    M_R: int, B: int, strategy: SubsetStrategy = SubsetStrategy.EVEN_SPACED
) -> RISCodebook:
    """Baseline without beamwidth adaptation: B columns of Psi_{M_R}."""
    if not 1 <= B <= M_R:
        raise ValueError(f"need 1 <= B <= M_R, got B={B}, M_R={M_R}")
    if strategy is SubsetStrategy.FIRST:
        cols = np.arange(B)
    elif strategy is SubsetStrategy.EVEN_SPACED:
        cols = np.floor(np.arange(B) * M_R / B).astype(int)
    else:
        raise ValueError(f"unknown subset strategy {strategy!r}")
    W = dft_matrix(M_R)[:, cols]
    kind = CodebookKind.FULL_DFT if B == M_R else CodebookKind.SUBSET
    return RISCodebook(W, kind, M_R)


def _as_frequencies(f_grid) -> np.ndarray:
    fs = [f.f if isinstance(f, SpatialFrequency) else float(f) for f in f_grid]
    return np.asarray(fs, dtype=float)


def beam_gain(omega: np.ndarray, f_grid) -> np.ndarray:
    """Radiation pattern g(f) = |a_f^T omega| over a grid of spatial frequencies."""
    omega = np.asarray(omega).ravel()
    fs = _as_frequencies(f_grid)
    if fs.size == 0:
        raise ValueError("frequency grid must be nonempty")
    M = omega.shape[0]
    A = np.exp(1j * np.pi * np.outer(fs, np.arange(M)))  # rows are a_f^T
    return np.abs(A @ omega)


def uniform_frequency_grid(grid_size: int) -> np.ndarray:
    """``grid_size`` uniform points in f in [-1, 1)."""
    return -1.0 + 2.0 * np.arange(grid_size) / grid_size


def coverage_check(
    codebook: RISCodebook, grid_size: int = 1024, threshold_fraction: float = 0.6
) -> tuple[bool, float]:
    """Worst-case best-beam gain over a dense frequency grid.

    Returns ``(ok, worst_gain)`` where ``worst_gain`` is the minimum over the
    grid of the maximum gain over beams, and ``ok`` means it reaches
    ``threshold_fraction * active_count``.
    """
    if grid_size < 2 * codebook.M_R:
        raise ValueError(
            f"grid_size={grid_size} too coarse for M_R={codebook.M_R}"
        )
    fs = uniform_frequency_grid(grid_size)
    A = np.exp(1j * np.pi * np.outer(fs, np.arange(codebook.M_R)))
    gains = np.abs(A @ codebook.W)  # (grid, B)
    worst = float(gains.max(axis=1).min())
    return worst >= threshold_fraction * codebook.active_count, worst


def export_pattern_csv(path, f_grid, gains) -> None:
    """Write a (frequency, gain) two-column CSV for pattern plotting."""
    fs = _as_frequencies(f_grid)
    gains = np.asarray(gains, dtype=float).ravel()
    if fs.shape != gains.shape:
        raise ValueError("frequency grid and gains must have equal lengths")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("frequency,gain\n")
        for f, g in zip(fs, gains):
            fh.write(f"{f:.6g},{g:.6g}\n")
