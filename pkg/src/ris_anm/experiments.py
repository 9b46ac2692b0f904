"""Monte Carlo NMSE experiments: SNR calibration, trial driver, and the
separation / frame-count / SNR sweep drivers with CSV emission.

Each trial samples fresh paths, calibrates the noise deviation from the
realized gains, runs the full beam-training protocol per estimator, and
records the squared-error ratio of the recovered effective channel.
Trials are seeded from spawned substreams so results are reproducible
bit-for-bit for a fixed (config, seed).
"""

from __future__ import annotations

import enum
import io
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import (
    ChannelPair,
    Hop,
    PathSet,
    SystemDims,
    build_channel,
    effective_channel,
    sample_paths,
)
from .codebook import (
    RISCodebook,
    SubsetStrategy,
    adapted_codebook,
    full_dft_codebook,
    subset_codebook,
)
from .estimation import (
    ANMSolution,
    SolverOptions,
    anm_estimate,
    ls_estimate,
    regularization_tau,
)
from .training import default_beamformers, pilot_matrix, run_protocol


class DegenerateInstance(RuntimeError):
    """A sampled channel cannot be SNR-calibrated; the trial is resampled."""


class Estimator(enum.Enum):
    LS = "ls"
    ANM = "anm"
    ANM_NO_ADAPT = "anm_no_adapt"


@dataclass(frozen=True)
class ExperimentConfig:
    dims: SystemDims = SystemDims()
    L_BR: int = 1
    L_RU: int = 2
    snr_db: float = 0.0
    snr_db_list: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0)
    frames_list: tuple[int, ...] = (8, 12, 16, 20, 24, 28, 32)
    separation_deg_list: tuple[float, ...] = (2, 4, 6, 8, 10, 15, 20, 30, 40)
    trials: int = 300
    seed: int = 0
    estimators: tuple[Estimator, ...] = (Estimator.ANM,)
    subset_strategy: SubsetStrategy = SubsetStrategy.EVEN_SPACED
    angle_window_deg: tuple[float, float] = (30.0, 150.0)
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.L_BR < 1 or self.L_RU < 1:
            raise ValueError("path counts must be >= 1")
        lo, hi = self.angle_window_deg
        if not 0.0 < lo < hi < 180.0:
            raise ValueError(f"bad angle window [{lo}, {hi}]")
        if not self.estimators:
            raise ValueError("at least one estimator must be selected")


def sigma_for_snr(paths_BR: PathSet, paths_RU: PathSet, snr_db: float) -> float:
    """Noise deviation realizing the requested SNR for this gain draw."""
    amp = abs(np.sum(paths_RU.gains)) * abs(np.sum(paths_BR.gains))
    if amp < 1e-12:
        raise DegenerateInstance("gain sums are numerically zero")
    return float(amp / 10.0 ** (snr_db / 20.0))


def nmse(estimates, truths) -> float:
    """Trial-averaged normalized squared Frobenius error."""
    estimates = list(estimates)
    truths = list(truths)
    if not estimates or len(estimates) != len(truths):
        raise ValueError("estimates and truths must be equal-length, nonempty")
    total = 0.0
    for est, true in zip(estimates, truths):
        denom = np.linalg.norm(true) ** 2
        if denom == 0.0:
            raise ValueError("true channel has zero norm")
        total += np.linalg.norm(np.asarray(est) - np.asarray(true)) ** 2 / denom
    return total / len(estimates)


@dataclass
class TrialResult:
    truth: np.ndarray
    estimates: dict[Estimator, np.ndarray]
    solutions: dict[Estimator, ANMSolution]
    sigma: float
    tau: float
    # (G, W) per ANM-family estimator, kept so solutions can be re-audited
    # (objective recomputation, certificate checks) after the fact
    anm_inputs: dict[Estimator, tuple[np.ndarray, np.ndarray]] = field(
        default_factory=dict
    )


def _codebook_for(
    estimator: Estimator, dims: SystemDims, b: int, strategy: SubsetStrategy
) -> RISCodebook:
    if estimator is Estimator.LS:
        return full_dft_codebook(dims.M_R)
    if estimator is Estimator.ANM:
        return adapted_codebook(dims.M_R, b)
    return subset_codebook(dims.M_R, b, strategy)


def _sample_trial_paths(
    config: ExperimentConfig,
    rng: np.random.Generator,
    pinned_ru_aoa_separation_deg: float | None,
) -> tuple[PathSet, PathSet]:
    lo, hi = config.angle_window_deg
    paths_BR = sample_paths(config.L_BR, Hop.BS_TO_RIS, lo, hi, rng)
    paths_RU = sample_paths(config.L_RU, Hop.RIS_TO_UE, lo, hi, rng)
    if pinned_ru_aoa_separation_deg is not None:
        delta = pinned_ru_aoa_separation_deg
        if config.L_RU != 2:
            raise ValueError("pinned AoA separation requires L_RU = 2")
        first_hi = min(hi, 180.0 - 1e-3 - delta)
        if first_hi < hi:
            warnings.warn(
                f"separation {delta} deg shrinks the first-AoA window to "
                f"[{lo}, {first_hi}] to keep both AoAs inside (0, 180)",
                stacklevel=2,
            )
        if first_hi <= lo:
            raise ValueError(f"separation {delta} deg does not fit the window")
        first = rng.uniform(lo, first_hi)
        aoa = np.array([first, first + delta])
        paths_RU = PathSet(aoa, paths_RU.aod_deg, paths_RU.gains, Hop.RIS_TO_UE)
    return paths_BR, paths_RU


def run_trial(
    config: ExperimentConfig,
    rng: np.random.Generator,
    *,
    snr_db: float | None = None,
    b: int | None = None,
    pinned_ru_aoa_separation_deg: float | None = None,
) -> TrialResult:
    """One full pipeline pass: paths -> channels -> training -> estimates."""
    dims = config.dims
    b = dims.B if b is None else b
    snr_db = config.snr_db if snr_db is None else snr_db
    paths_BR, paths_RU = _sample_trial_paths(
        config, rng, pinned_ru_aoa_separation_deg
    )
    sigma = sigma_for_snr(paths_BR, paths_RU, snr_db)
    H_BR = build_channel(paths_BR, dims.M_R, dims.M_B)
    H_RU = build_channel(paths_RU, dims.M_U, dims.M_R)
    channels = ChannelPair(H_BR, H_RU, paths_BR, paths_RU)
    truth = effective_channel(H_BR, H_RU)
    F, C = default_beamformers(dims)
    S = pilot_matrix(dims.N_B, dims.D)
    tau = regularization_tau(sigma, dims.D, dims.M_R, dims.M_B, dims.M_U)

    estimates: dict[Estimator, np.ndarray] = {}
    solutions: dict[Estimator, ANMSolution] = {}
    anm_inputs: dict[Estimator, tuple[np.ndarray, np.ndarray]] = {}
    for estimator in config.estimators:
        if estimator is Estimator.LS and b != dims.M_R:
            continue  # LS is only defined at full overhead
        est_b = dims.M_R if estimator is Estimator.LS else b
        est_dims = replace(dims, B=est_b)
        codebook = _codebook_for(estimator, dims, est_b, config.subset_strategy)
        meas = run_protocol(channels, F, C, codebook, S, sigma, rng, est_dims)
        if estimator is Estimator.LS:
            estimates[estimator] = ls_estimate(meas.Y_stack, F, C, codebook.W)
        else:
            sol = anm_estimate(meas.G, codebook.W, tau, config.solver)
            solutions[estimator] = sol
            estimates[estimator] = sol.H_eff
            anm_inputs[estimator] = (meas.G, codebook.W)
    return TrialResult(truth, estimates, solutions, sigma, tau, anm_inputs)


@dataclass(frozen=True)
class SweepRow:
    x: float
    estimator: Estimator
    nmse: float
    trials: int
    failures: int


@dataclass
class SweepResult:
    rows: list[SweepRow]

    def to_csv(self, stream: io.TextIOBase | None = None) -> str:
        out = io.StringIO()
        out.write("x,estimator,nmse,trials,failures\n")
        for r in self.rows:
            out.write(
                f"{r.x:.6g},{r.estimator.value},{r.nmse:.6g},"
                f"{r.trials},{r.failures}\n"
            )
        text = out.getvalue()
        if stream is not None:
            stream.write(text)
        return text

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


_MAX_RESAMPLES = 32


def _collect_point(
    config: ExperimentConfig,
    x: float,
    trial_seeds,
    *,
    snr_db: float | None = None,
    b: int | None = None,
    pinned_sep: float | None = None,
    solution_sink: list | None = None,
) -> list[SweepRow]:
    per_est: dict[Estimator, list[float]] = {e: [] for e in config.estimators}
    failures = 0
    for seed_seq in trial_seeds:
        children = iter(seed_seq.spawn(_MAX_RESAMPLES))
        for _ in range(_MAX_RESAMPLES):
            rng = np.random.default_rng(next(children))
            try:
                result = run_trial(
                    config,
                    rng,
                    snr_db=snr_db,
                    b=b,
                    pinned_ru_aoa_separation_deg=pinned_sep,
                )
            except DegenerateInstance:
                failures += 1
                continue
            break
        else:
            raise RuntimeError("trial resampling limit exceeded")
        denom = np.linalg.norm(result.truth) ** 2
        for est, H_hat in result.estimates.items():
            per_est[est].append(
                float(np.linalg.norm(H_hat - result.truth) ** 2 / denom)
            )
        if solution_sink is not None:
            solution_sink.extend(result.solutions.values())
    rows = []
    for est in config.estimators:
        errors = per_est[est]
        if not errors:
            continue  # estimator skipped at this point (LS with B < M_R)
        rows.append(
            SweepRow(float(x), est, float(np.mean(errors)), len(errors), failures)
        )
    return rows


def _spawned_seeds(config: ExperimentConfig, n_points: int):
    root = np.random.SeedSequence(config.seed)
    per_point = config.trials
    all_seeds = root.spawn(n_points * per_point)
    return [
        all_seeds[i * per_point : (i + 1) * per_point] for i in range(n_points)
    ]


def sweep_separation(
    config: ExperimentConfig, solution_sink: list | None = None
) -> SweepResult:
    """NMSE versus the pinned interval between the two RIS-to-UE AoAs."""
    if config.L_RU != 2:
        raise ValueError("the separation sweep requires L_RU = 2")
    xs = config.separation_deg_list
    seeds = _spawned_seeds(config, len(xs))
    rows = []
    for x, point_seeds in zip(xs, seeds):
        rows.extend(
            _collect_point(
                config, x, point_seeds, pinned_sep=float(x),
                solution_sink=solution_sink,
            )
        )
    return SweepResult(rows)


def sweep_frames(
    config: ExperimentConfig, solution_sink: list | None = None
) -> SweepResult:
    """NMSE versus frame count B; LS appears only at B = M_R."""
    xs = config.frames_list
    if any(not 1 <= x <= config.dims.M_R for x in xs):
        raise ValueError("frame counts must lie in [1, M_R]")
    seeds = _spawned_seeds(config, len(xs))
    rows = []
    for x, point_seeds in zip(xs, seeds):
        rows.extend(
            _collect_point(
                config, x, point_seeds, b=int(x), solution_sink=solution_sink
            )
        )
    return SweepResult(rows)


def sweep_snr(
    config: ExperimentConfig, solution_sink: list | None = None
) -> SweepResult:
    """NMSE versus SNR at a fixed frame count."""
    xs = config.snr_db_list
    seeds = _spawned_seeds(config, len(xs))
    rows = []
    for x, point_seeds in zip(xs, seeds):
        rows.extend(
            _collect_point(
                config, x, point_seeds, snr_db=float(x),
                solution_sink=solution_sink,
            )
        )
    return SweepResult(rows)
