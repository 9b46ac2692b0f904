"""Beam-training protocol simulation.

One frame fixes a RIS control vector and sweeps all P_B precoder / P_U
combiner blocks; matched-filtered pilots are compiled into an M_U x M_B
frame matrix, frames are stacked column-vectorized into Y_stack, and the
known precoder/combiner action is decoupled to yield the measurement
``G = W^H Z + E`` consumed by the estimators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelPair, SystemDims, complex_gaussian, unvec, vec
from .codebook import RISCodebook
from .estimation import NumericFailure
from .geometry import dft_matrix


@dataclass(frozen=True)
class CompiledMeasurement:
    """Stacked filtered pilots and the decoupled ANM measurement.

    ``Y_stack`` has column b equal to vec(Y_b); ``G`` is
    ``((F^T kron C^H)^{-1} Y_stack)^H`` of shape B x (M_B*M_U).  ``sigma``
    is the per-sample noise standard deviation used during training (the
    genie-known noise level handed to the estimator).
    """

    Y_stack: np.ndarray
    G: np.ndarray
    sigma: float
    dims: SystemDims


def pilot_matrix(N_B: int, D: int) -> np.ndarray:
    """Orthogonal unit-energy pilots: the first N_B rows of the D-point DFT.

    Satisfies ``S @ S.conj().T / D == I``.
    """
    if N_B < 1 or D < 1:
        raise ValueError("N_B and D must be >= 1")
    if D < N_B:
        raise ValueError(f"D={D} < N_B={N_B}: orthogonal pilots impossible")
    return dft_matrix(D)[:N_B, :]


def default_beamformers(dims: SystemDims) -> tuple[np.ndarray, np.ndarray]:
    """Unitary-scaled DFT precoder F and combiner C (condition number 1)."""
    F = dft_matrix(dims.M_B) / np.sqrt(dims.M_B)
    C = dft_matrix(dims.M_U) / np.sqrt(dims.M_U)
    return F, C


def simulate_training(
    channels: ChannelPair,
    F_i: np.ndarray,
    C_j: np.ndarray,
    omega_b: np.ndarray,
    S: np.ndarray,
    sigma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received pilots of one training: C_j^H H_RU diag(w_b) H_BR F_i S + noise."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    H_BR, H_RU = channels.H_BR, channels.H_RU
    omega_b = np.asarray(omega_b).ravel()
    if (
        F_i.shape[0] != H_BR.shape[1]
        or C_j.shape[0] != H_RU.shape[0]
        or omega_b.shape[0] != H_BR.shape[0]
        or S.shape[0] != F_i.shape[1]
    ):
        raise ValueError(
            f"dimension mismatch: H_BR {H_BR.shape}, H_RU {H_RU.shape}, "
            f"F_i {F_i.shape}, C_j {C_j.shape}, omega {omega_b.shape}, S {S.shape}"
        )
    X = C_j.conj().T @ ((H_RU * omega_b) @ (H_BR @ (F_i @ S)))
    if sigma > 0:
        X = X + complex_gaussian(rng, X.shape, sigma)
    return X


def matched_filter(X: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Pilot-matched filtering X @ S^H / D; reduces noise variance by D."""
    if X.shape[1] != S.shape[1]:
        raise ValueError(f"sample-count mismatch: X {X.shape}, S {S.shape}")
    return X @ S.conj().T / S.shape[1]


def _column_blocks(M: np.ndarray, width: int) -> list[np.ndarray]:
    if width < 1 or M.shape[1] % width:
        raise ValueError(
            f"cannot partition {M.shape[1]} columns into blocks of width {width}"
        )
    return [M[:, i : i + width] for i in range(0, M.shape[1], width)]


def run_frame(
    channels: ChannelPair,
    F: np.ndarray,
    C: np.ndarray,
    omega_b: np.ndarray,
    S: np.ndarray,
    N_U: int,
    sigma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Compile all P_B * P_U trainings of one frame into an M_U x M_B matrix.

    F is swept in contiguous blocks of N_B = S.shape[0] columns, C in blocks
    of N_U columns; block (j, i) of the output is the matched-filtered pilot
    of training (i, j).  Noiselessly the result equals
    ``C^H @ H_RU @ diag(omega_b) @ H_BR @ F``.
    """
    F_blocks = _column_blocks(F, S.shape[0])
    C_blocks = _column_blocks(C, N_U)
    Y = np.empty((C.shape[1], F.shape[1]), dtype=complex)
    for j, C_j in enumerate(C_blocks):
        for i, F_i in enumerate(F_blocks):
            X = simulate_training(channels, F_i, C_j, omega_b, S, sigma, rng)
            Y[
                j * N_U : (j + 1) * N_U,
                i * S.shape[0] : (i + 1) * S.shape[0],
            ] = matched_filter(X, S)
    return Y


def run_protocol(
    channels: ChannelPair,
    F: np.ndarray,
    C: np.ndarray,
    codebook: RISCodebook,
    S: np.ndarray,
    sigma: float,
    rng: np.random.Generator,
    dims: SystemDims,
) -> CompiledMeasurement:
    """Run all B frames and compile the decoupled measurement.

    Each frame draws its noise from a dedicated child stream of ``rng``, so
    serial and frame-parallel execution produce identical output for the
    same master seed.  Noiselessly
    ``Y_stack == (F.T kron C^H) @ H_eff @ W`` exactly.
    """
    if codebook.B < 1:
        raise ValueError("codebook must contain at least one frame")
    if codebook.B != dims.B:
        raise ValueError(f"codebook has B={codebook.B}, dims expect B={dims.B}")
    frame_rngs = rng.spawn(codebook.B)
    Y_stack = np.empty((dims.M_B * dims.M_U, codebook.B), dtype=complex)
    for b, frame_rng in enumerate(frame_rngs):
        Y_b = run_frame(
            channels, F, C, codebook.W[:, b], S, dims.N_U, sigma, frame_rng
        )
        Y_stack[:, b] = vec(Y_b)
    G = decouple(Y_stack, F, C)
    return CompiledMeasurement(Y_stack, G, float(sigma), dims)


def decouple(Y_stack: np.ndarray, F: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Strip the precoder/combiner action: ((F^T kron C^H)^{-1} Y_stack)^H.

    Uses the factorization (F^T kron C^H)^{-1} = (F^{-1})^T kron (C^{-1})^H
    applied per frame, never materializing the Kronecker inverse: each column
    is un-vectorized to M_U x M_B and mapped to C^{-H} Y_b F^{-1}.
    """
    M_U, M_B = C.shape[0], F.shape[0]
    if Y_stack.shape[0] != M_B * M_U:
        raise ValueError(
            f"Y_stack has {Y_stack.shape[0]} rows, expected {M_B * M_U}"
        )
    cond_F = np.linalg.cond(F)
    cond_C = np.linalg.cond(C)
    if not np.isfinite(cond_F) or cond_F > 1e12:
        raise NumericFailure(f"precoder F is numerically singular (cond={cond_F:.3g})")
    if not np.isfinite(cond_C) or cond_C > 1e12:
        raise NumericFailure(f"combiner C is numerically singular (cond={cond_C:.3g})")
    B = Y_stack.shape[1]
    X = np.empty_like(Y_stack)
    Ch = C.conj().T
    for b in range(B):
        Y_b = unvec(Y_stack[:, b], M_U, M_B)
        # C^{-H} Y_b F^{-1}: two triangular-free solves per frame.
        Z_b = np.linalg.solve(Ch, Y_b)
        X[:, b] = vec(np.linalg.solve(F.T, Z_b.T).T)
    return X.conj().T


def dump_measurement_csv(path, meas: CompiledMeasurement, W: np.ndarray) -> None:
    """Dump G, W, and sigma for offline solver runs.

    One matrix per line: name, rows, cols, then the entries row-major as
    "re+imj" strings; sigma rides on its own line.
    """
    def fmt(z: complex) -> str:
        return f"{z.real:.17g}{z.imag:+.17g}j"

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("name,rows,cols,entries\n")
        for name, M in (("G", meas.G), ("W", W)):
            cells = ",".join(fmt(z) for z in np.asarray(M).ravel(order="C"))
            fh.write(f"{name},{M.shape[0]},{M.shape[1]},{cells}\n")
        fh.write(f"sigma,1,1,{meas.sigma:.17g}+0j\n")


def load_measurement_csv(path) -> tuple[np.ndarray, np.ndarray, float]:
    """Inverse of :func:`dump_measurement_csv`; returns (G, W, sigma)."""
    out: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("name,rows,cols"):
            raise ValueError(f"unrecognized measurement file header: {header!r}")
        for line in fh:
            name, rows, cols, *cells = line.rstrip("\n").split(",")
            arr = np.array([complex(c) for c in cells], dtype=complex)
            out[name] = arr.reshape(int(rows), int(cols))
    return out["G"], out["W"], float(out["sigma"][0, 0].real)
