"""Effective-channel estimators: LS baseline and atomic-norm minimization.

The atomic norm of Z (rows indexed by RIS elements) is computed through its
SDP characterization with a Hermitian Toeplitz block, and the regularized
denoising program

    min_{u, T, Z}  tau/(2 M_R) Tr(Toep(u)) + tau/2 Tr(T)
                   + 1/2 ||G - W^H Z||_F^2
    s.t.           [[Toep(u), Z], [Z^H, T]] >= 0

is solved by ADMM-style operator splitting: a structured least-squares
update of (u, T, Z), a projection of a consensus copy onto the PSD cone,
and dual ascent.  Per iteration this costs one eigendecomposition of the
(M_R + M_B*M_U)-sized block plus one Cholesky solve for Z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, toeplitz


class NumericFailure(RuntimeError):
    """A linear-algebra kernel failed or iterates became non-finite."""


# ---------------------------------------------------------------------------
# Toeplitz plumbing and PSD projection
# ---------------------------------------------------------------------------

def toeplitz_materialize(u: np.ndarray) -> np.ndarray:
    """Hermitian Toeplitz matrix whose first column is u.

    Entry (p, q) is ``u[p-q]`` for p >= q and ``conj(u[q-p])`` otherwise.
    """
    u = np.asarray(u, dtype=complex).ravel()
    if u.size < 1:
        raise ValueError("u must have length >= 1")
    return toeplitz(u, u.conj())


def toeplitz_adjoint(M: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`toeplitz_materialize` under the real inner product.

    ``u[k]`` is the sum over subdiagonal k plus the conjugated sum over
    superdiagonal k, so that Re<Toep(u), M>_F == Re<u, toeplitz_adjoint(M)>.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    u = np.empty(n, dtype=complex)
    u[0] = np.trace(M)
    for k in range(1, n):
        u[k] = np.trace(M, offset=-k) + np.conj(np.trace(M, offset=k))
    return u


def _hermitize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def psd_project(M: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix: clamp negative eigs."""
    H = _hermitize(np.asarray(M))
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"eigendecomposition failed: {exc}") from exc
    if w[0] >= 0.0:
        return H
    w = np.maximum(w, 0.0)
    return (V * w) @ V.conj().T


# ---------------------------------------------------------------------------
# Regularization and LS baseline
# ---------------------------------------------------------------------------

def regularization_tau(sigma: float, D: int, M_R: int, M_B: int, M_U: int) -> float:
    """Denoising regularization weight for the measurement G.

    Uses the natural logarithm; the matched filter has already reduced the
    per-entry noise deviation to sigma / sqrt(D), which is the scale the
    formula keys on.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if min(D, M_B, M_U) < 1:
        raise ValueError("D, M_B, M_U must be >= 1")
    if M_R < 2:
        raise ValueError(f"M_R must be >= 2 for the log term, got {M_R}")
    K = M_B * M_U
    alpha = 8.0 * math.pi * M_R * math.log(M_R)
    inner = (
        K
        + math.log(alpha * K)
        + math.sqrt(2.0 * K * math.log(alpha * K))
        + math.sqrt(math.pi * K / 2.0)
        + 1.0
    )
    return (
        sigma
        / math.sqrt(D)
        * math.sqrt(1.0 + 1.0 / math.log(M_R))
        * math.sqrt(inner)
    )


def ls_estimate(
    Y_stack: np.ndarray, F: np.ndarray, C: np.ndarray, W: np.ndarray
) -> np.ndarray:
    """LS effective-channel estimate (F^T kron C^H)^{-1} Y_stack W^{-1}.

    Requires a square invertible W (B = M_R), i.e. at least M_R * P_B * P_U
    beam trainings.  The Kronecker inverse is applied blockwise per frame.
    """
    from .training import decouple  # local import: training depends on us too

    W = np.asarray(W)
    if W.shape[1] < W.shape[0]:
        raise ValueError(
            f"LS needs B = M_R frames, got B={W.shape[1]} < M_R={W.shape[0]}"
        )
    if W.shape[0] != W.shape[1]:
        raise ValueError(f"W must be square for LS, got shape {W.shape}")
    cond_W = np.linalg.cond(W)
    if not np.isfinite(cond_W) or cond_W > 1e12:
        raise NumericFailure(f"codebook W is numerically singular (cond={cond_W:.3g})")
    X = decouple(Y_stack, F, C).conj().T  # (M_B*M_U) x B
    return np.linalg.solve(W.T, X.T).T


# ---------------------------------------------------------------------------
# ADMM solver for the unfolded SDP
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverOptions:
    penalty: float = 1.0
    max_iterations: int = 5000
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6
    tol_psd: float = 1e-6
    adapt_penalty: bool = True
    record_history: bool = False

    def __post_init__(self):
        for name in ("penalty", "tol_primal", "tol_dual", "tol_psd"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class ANMSolution:
    """Result of one SDP solve.

    ``Z.conj().T`` is the recovered effective channel.  ``history`` (when
    recorded) has rows (iteration, objective, primal_residual, dual_residual).
    """

    u: np.ndarray
    T: np.ndarray
    Z: np.ndarray
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    history: np.ndarray | None = field(default=None, repr=False)

    @property
    def H_eff(self) -> np.ndarray:
        return self.Z.conj().T

    def block_matrix(self) -> np.ndarray:
        top = np.hstack([toeplitz_materialize(self.u), self.Z])
        bot = np.hstack([self.Z.conj().T, self.T])
        return np.vstack([top, bot])


def objective_value(
    u: np.ndarray, T: np.ndarray, Z: np.ndarray,
    G: np.ndarray, W: np.ndarray, tau: float,
) -> float:
    """Unfolded-SDP objective recomputed from scratch."""
    M_R = len(u)
    fit = 0.5 * np.linalg.norm(G - W.conj().T @ Z) ** 2
    return float(
        tau / (2.0 * M_R) * M_R * u[0].real
        + tau / 2.0 * np.trace(T).real
        + fit
    )


def _subdiagonal_means(M: np.ndarray) -> np.ndarray:
    """Mean of each subdiagonal of a (Hermitian) matrix, k = 0 .. n-1."""
    n = M.shape[0]
    return np.array(
        [np.trace(M, offset=-k) / (n - k) for k in range(n)], dtype=complex
    )


class _SplittingState:
    """Shared machinery for the denoising solve and the atomic-norm solve."""

    def __init__(self, M_R: int, K: int, G, W, tau: float, opts: SolverOptions,
                 fixed_Z: np.ndarray | None = None):
        self.M_R, self.K = M_R, K
        self.G, self.W, self.tau, self.opts = G, W, tau, opts
        self.fixed_Z = fixed_Z
        n = M_R + K
        self.Q = np.zeros((n, n), dtype=complex)
        self.Lam = np.zeros((n, n), dtype=complex)
        self.rho = opts.penalty
        self._factor = None
        self.scale = max(1.0, float(np.linalg.norm(G)) if G is not None else
                         float(np.linalg.norm(fixed_Z)))

    def _z_factor(self):
        if self._factor is None:
            A = self.W @ self.W.conj().T + 2.0 * self.rho * np.eye(self.M_R)
            self._factor = cho_factor(A)
        return self._factor

    def structured_update(self):
        """Minimize the smooth terms plus the penalty; returns (u, T, Z, S)."""
        M_R, K, rho, tau = self.M_R, self.K, self.rho, self.tau
        M = self.Q + self.Lam / rho
        M11 = _hermitize(M[:M_R, :M_R])
        M12 = M[:M_R, M_R:]
        M22 = _hermitize(M[M_R:, M_R:])
        u = _subdiagonal_means(M11)
        u[0] = u[0].real - tau / (2.0 * rho * M_R)
        T = M22 - (tau / (2.0 * rho)) * np.eye(K)
        if self.fixed_Z is None:
            rhs = self.W @ self.G + 2.0 * rho * M12
            Z = cho_solve(self._z_factor(), rhs)
        else:
            Z = self.fixed_Z
        S = np.empty_like(M)
        S[:M_R, :M_R] = toeplitz_materialize(u)
        S[:M_R, M_R:] = Z
        S[M_R:, :M_R] = Z.conj().T
        S[M_R:, M_R:] = T
        return u, T, Z, S

    def run(self):
        opts = self.opts
        S_prev = None
        history = [] if opts.record_history else None
        primal = dual = np.inf
        it = 0
        for it in range(1, opts.max_iterations + 1):
            u, T, Z, S = self.structured_update()
            self.Q = psd_project(S - self.Lam / self.rho)
            R = self.Q - S
            self.Lam = self.Lam + self.rho * R
            norm_S = np.linalg.norm(S)
            primal = float(np.linalg.norm(R) / max(1.0, norm_S, self.scale))
            if S_prev is None:
                dual = np.inf
            else:
                dual = float(
                    self.rho * np.linalg.norm(S - S_prev)
                    / max(1.0, np.linalg.norm(self.Lam))
                )
            S_prev = S
            if not np.isfinite(norm_S):
                raise NumericFailure(f"solver iterates diverged at iteration {it}")
            if history is not None:
                obj = objective_value(u, T, Z, self.G, self.W, self.tau) \
                    if self.G is not None else self._cert_objective(u, T)
                history.append((it, obj, primal, dual))
            if primal < opts.tol_primal and dual < opts.tol_dual:
                break
            if (
                opts.adapt_penalty
                and it % 10 == 0
                and np.isfinite(dual)
            ):
                if primal > 5.0 * dual and self.rho < 1e5:
                    self.rho *= 2.0
                    self._factor = None
                elif dual > 5.0 * primal and self.rho > 1e-5:
                    self.rho *= 0.5
                    self._factor = None
        converged = primal < opts.tol_primal and dual < opts.tol_dual
        u, T, Z = self._feasibility_polish(u, T, Z)
        hist = np.asarray(history) if history is not None else None
        return u, T, Z, it, primal, dual, converged, hist

    def _cert_objective(self, u, T) -> float:
        return float(0.5 * u[0].real + 0.5 * np.trace(T).real)

    def _feasibility_polish(self, u, T, Z):
        """Shift the diagonal blocks just enough to make the block PSD.

        Adding delta to u[0] and to diag(T) shifts every eigenvalue of the
        block matrix up by delta, preserving the Toeplitz structure.
        """
        S = np.empty((self.M_R + self.K,) * 2, dtype=complex)
        S[: self.M_R, : self.M_R] = toeplitz_materialize(u)
        S[: self.M_R, self.M_R:] = Z
        S[self.M_R:, : self.M_R] = Z.conj().T
        S[self.M_R:, self.M_R:] = T
        w = np.linalg.eigvalsh(_hermitize(S))
        lam_min, lam_max = float(w[0]), float(w[-1])
        if lam_min < 0.0:
            delta = -lam_min * (1.0 + 1e-12) + 1e-15 * max(1.0, lam_max)
            u = u.copy()
            u[0] = u[0].real + delta
            T = T + delta * np.eye(self.K)
        return u, T, Z


def anm_estimate(
    G: np.ndarray, W: np.ndarray, tau: float,
    opts: SolverOptions = SolverOptions(),
) -> ANMSolution:
    """Solve the regularized atomic-norm denoising SDP for Z from G = W^H Z + E.

    Returns a flagged (``converged=False``) solution on hitting the iteration
    cap rather than raising, so Monte Carlo drivers can record outliers.  The
    recovered effective channel is ``solution.H_eff`` (= Z^H).
    """
    G = np.asarray(G, dtype=complex)
    W = np.asarray(W, dtype=complex)
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    M_R, B = W.shape
    if G.shape[0] != B:
        raise ValueError(f"G has {G.shape[0]} rows but W has {B} columns")
    K = G.shape[1]
    state = _SplittingState(M_R, K, G, W, tau, opts)
    u, T, Z, it, primal, dual, converged, hist = state.run()
    obj = objective_value(u, T, Z, G, W, tau)
    return ANMSolution(u, T, Z, obj, it, primal, dual, converged, hist)


def atomic_norm(Z: np.ndarray, opts: SolverOptions = SolverOptions()) -> float:
    """Atomic norm of Z via the constrained SDP with the Z block held fixed."""
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2:
        raise ValueError("Z must be a matrix")
    if not np.any(Z):
        return 0.0
    M_R, K = Z.shape
    state = _SplittingState(M_R, K, None, None, 1.0, opts, fixed_Z=Z)
    u, T, _, _, _, _, _, _ = state.run()
    return float(0.5 * u[0].real + 0.5 * np.trace(T).real)


def write_trace_csv(path, solution: ANMSolution) -> None:
    """Dump the recorded solver trace as CSV for inspection."""
    if solution.history is None:
        raise ValueError("solution carries no history; set record_history=True")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,objective,primal_residual,dual_residual\n")
        for it, obj, pr, du in solution.history:
            fh.write(f"{int(it)},{obj:.10g},{pr:.6g},{du:.6g}\n")


def design_ris_control(H_eff: np.ndarray) -> np.ndarray:
    """SNR-maximizing unit-modulus RIS control from the estimated channel.

    Takes the entrywise phase of the dominant right singular vector of
    H_eff; the global phase is fixed by making entry 0 real-positive.
    """
    H_eff = np.asarray(H_eff)
    if not np.any(H_eff):
        raise ValueError("cannot design RIS control from an all-zero channel")
    _, _, Vh = np.linalg.svd(H_eff, full_matrices=False)
    v = Vh[0].conj()
    omega = np.exp(1j * np.angle(v))
    return omega * np.exp(-1j * np.angle(omega[0]))
