"""Command-line entry point for the Monte Carlo NMSE sweeps."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .channel import SystemDims
from .codebook import SubsetStrategy
from .estimation import NumericFailure
from .experiments import (
    Estimator,
    ExperimentConfig,
    sweep_frames,
    sweep_separation,
    sweep_snr,
)

_SWEEPS = {
    "separation": sweep_separation,
    "frames": sweep_frames,
    "snr": sweep_snr,
}

_DIM_KEYS = {"m_b": "M_B", "m_r": "M_R", "m_u": "M_U",
             "n_b": "N_B", "n_u": "N_U", "d": "D", "b": "B"}


def _parse_list(value: str, cast):
    return tuple(cast(v) for v in value.split(",") if v.strip())


def _parse_estimators(value: str) -> tuple[Estimator, ...]:
    return tuple(Estimator(v.strip().lower()) for v in value.split(",") if v.strip())


def load_config_file(path) -> dict:
    """Parse plain key=value lines; '#' starts a comment; unknown keys error."""
    known = {
        "l_br", "l_ru", "trials", "seed", "snr_db", "estimators",
        "subset_strategy", "snr_db_list", "frames_list",
        "separation_deg_list", "angle_lo", "angle_hi", *_DIM_KEYS,
    }
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lower()
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = value
    return out


def build_config(args, file_values: dict) -> ExperimentConfig:
    dims_kwargs = {}
    cfg_kwargs: dict = {}
    angle = {"angle_lo": 30.0, "angle_hi": 150.0}
    for key, value in file_values.items():
        if key in _DIM_KEYS:
            dims_kwargs[_DIM_KEYS[key]] = int(value)
        elif key in ("l_br", "l_ru"):
            cfg_kwargs[key.upper()] = int(value)
        elif key in ("trials", "seed"):
            cfg_kwargs[key] = int(value)
        elif key == "snr_db":
            cfg_kwargs[key] = float(value)
        elif key == "estimators":
            cfg_kwargs[key] = _parse_estimators(value)
        elif key == "subset_strategy":
            cfg_kwargs[key] = SubsetStrategy(value.strip().lower())
        elif key == "snr_db_list":
            cfg_kwargs[key] = _parse_list(value, float)
        elif key == "frames_list":
            cfg_kwargs[key] = _parse_list(value, int)
        elif key == "separation_deg_list":
            cfg_kwargs[key] = _parse_list(value, float)
        elif key in angle:
            angle[key] = float(value)
    cfg_kwargs["angle_window_deg"] = (angle["angle_lo"], angle["angle_hi"])
    cfg_kwargs["dims"] = SystemDims(**dims_kwargs) if dims_kwargs else SystemDims()
    config = ExperimentConfig(**cfg_kwargs)
    # Command-line flags win over the config file.
    if args.trials is not None:
        config = replace(config, trials=args.trials)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.estimators is not None:
        config = replace(config, estimators=_parse_estimators(args.estimators))
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ris-anm",
        description="Monte Carlo NMSE sweeps for RIS-aided MIMO channel "
                    "estimation (LS and atomic-norm estimators).",
    )
    parser.add_argument("--experiment", required=True, choices=sorted(_SWEEPS))
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="CSV path (default: stdout)")
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--estimators", default=None,
                        help="comma list from {ls,anm,anm_no_adapt}")
    parser.add_argument("--verbose", action="store_true")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0

    try:
        file_values = load_config_file(args.config) if args.config else {}
        config = build_config(args, file_values)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.verbose:
        print(f"running {args.experiment} sweep: {config}", file=sys.stderr)
    try:
        result = _SWEEPS[args.experiment](config)
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2

    if args.out:
        result.write_csv(args.out)
        if args.verbose:
            print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(result.to_csv())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
