"""Command-line entry point.

Three stages with file handoff, so the expensive feature extraction runs
once per dataset while the parameter grid can be iterated cheaply:

* ``synth``    - write a synthetic paired-trial dataset
* ``features`` - preprocess trials and extract the feature matrix CSV
* ``run``      - nested CV, report JSON, grid CSVs and heatmap figures

Exit codes: 0 success, 2 input or configuration error, 3 no feasible
parameter combination.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dataio, reporting, sigproc, synth
from .config import load_config
from .errors import CohselError, ConfigError, NoFeasibleModelError
from .pipeline import run_pipeline
from .spectral import build_feature_matrix

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohsel",
        description="EEG/EMG coherence features, consensus-clustering "
                    "feature selection and nested-CV classification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("spec", type=Path, help="JSON synthesis spec")
    p_synth.add_argument("out_dir", type=Path, help="output trial directory")

    p_feat = sub.add_parser("features", help="extract the feature matrix")
    p_feat.add_argument("data_dir", type=Path, help="trial directory")
    p_feat.add_argument("out_csv", type=Path, help="feature matrix CSV")
    p_feat.add_argument("--config", type=Path, default=None)

    p_run = sub.add_parser("run", help="run the selection/classification "
                                       "pipeline")
    p_run.add_argument("features_csv", type=Path)
    p_run.add_argument("out_dir", type=Path)
    p_run.add_argument("--config", type=Path, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--jobs", type=int, default=None)
    p_run.add_argument("--kernel", choices=["linear", "rbf"], default=None)
    p_run.add_argument("--no-figures", action="store_true",
                       help="skip heatmap rendering")
    return parser


def cmd_synth(args) -> int:
    if not args.spec.is_file():
        print(f"error: spec file not found: {args.spec}", file=sys.stderr)
        return EXIT_INPUT
    try:
        raw = json.loads(args.spec.read_text())
        spec = synth.spec_from_dict(raw)
        trials, truth = synth.generate(spec)
    except (json.JSONDecodeError, ValueError, CohselError) as exc:
        print(f"error: bad synthesis spec: {exc}", file=sys.stderr)
        return EXIT_INPUT
    dataio.write_trials(trials, args.out_dir)
    (args.out_dir / "ground_truth.json").write_text(
        json.dumps({"planted_columns": truth}, indent=2) + "\n")
    print(f"wrote {trials.n_trials} trials to {args.out_dir}")
    return EXIT_OK


def _preprocess(trials, config):
    rate = trials.sample_rate_hz
    if config.resample_hz is not None and config.resample_hz != rate:
        resampled_eeg = np.array(
            [[sigproc.resample(ch, rate, config.resample_hz)
              for ch in trial] for trial in trials.eeg])
        resampled_emg = np.array(
            [[sigproc.resample(ch, rate, config.resample_hz)
              for ch in trial] for trial in trials.emg])
        trials = sigproc.TrialSet(eeg=resampled_eeg, emg=resampled_emg,
                                  labels=trials.labels,
                                  sample_rate_hz=config.resample_hz)
        rate = config.resample_hz
    design = config.filter_design()

    def condition(seg):
        out = sigproc.bandpass(seg, rate, config.band_lo_hz,
                               config.band_hi_hz, design)
        return sigproc.notch(out, rate, config.notch_hz, config.notch_q)

    eeg = np.array([[condition(ch) for ch in trial] for trial in trials.eeg])
    emg = np.array([[condition(ch) for ch in trial] for trial in trials.emg])
    trials = sigproc.TrialSet(eeg=eeg, emg=emg, labels=trials.labels,
                              sample_rate_hz=rate)
    return sigproc.rectify_and_normalize(trials)


def cmd_features(args) -> int:
    try:
        config = load_config(args.config)
        trials = dataio.read_trials(args.data_dir)
        trials = _preprocess(trials, config)
        features = build_feature_matrix(trials, config.bands, config.scheme)
    except CohselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    dataio.write_features(features, args.out_csv)
    print(f"wrote {features.values.shape[0]} trials x "
          f"{features.n_features} features to {args.out_csv}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.jobs is not None:
            config.jobs = args.jobs
        if args.kernel is not None:
            config.svm_kernel = args.kernel
        features = dataio.read_features(args.features_csv)
        settings = config.pipeline_settings()
    except CohselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"running nested CV: kernel={config.svm_kernel}, "
          f"seed={config.seed}, jobs={config.jobs}, "
          f"grid={len(settings.grid)} combinations")
    try:
        report = run_pipeline(features.values, features.labels, settings)
    except NoFeasibleModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("infeasible combinations [m, sigma, nu]:", file=sys.stderr)
        for params in settings.grid:
            print(f"  {params.as_list()}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CohselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    reporting.emit_run_outputs(report, features, config.echo(), args.out_dir,
                               figures=not args.no_figures)
    print(f"gamma** = {report.best_params.as_list()}, "
          f"training accuracy {report.training_accuracy:.4f}, "
          f"holdout accuracy {report.holdout_accuracy:.4f}")
    print(f"outputs written to {args.out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"synth": cmd_synth, "features": cmd_features,
               "run": cmd_run}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
