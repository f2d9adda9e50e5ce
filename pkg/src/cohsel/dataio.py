"""File formats: trial directories and feature-matrix CSVs.

A trial directory holds ``meta.json`` plus one CSV per trial named
``trial_<index>_<label>.csv`` (rows = samples, columns = channels in the
order fixed by the metadata). Feature matrices are CSVs with a ``label``
column followed by one ``h<idx>_j<idx>_<band>`` column per feature.
"""

import csv
import json
import re
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .sigproc import EEG, EMG, TrialSet
from .spectral import FeatureMatrix

_TRIAL_RE = re.compile(r"trial_(\d+)_(.+)\.csv$")
_COLUMN_RE = re.compile(r"h(\d+)_j(\d+)_(.+)$")


def write_trials(trials: TrialSet, out_dir: Path):
    """Write a trial set in the interchange layout."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    channels = ([{"name": f"eeg{h}", "kind": EEG}
                 for h in range(trials.eeg.shape[1])]
                + [{"name": f"emg{j}", "kind": EMG}
                   for j in range(trials.emg.shape[1])])
    meta = {
        "sample_rate_hz": trials.sample_rate_hz,
        "classes": trials.classes,
        "channels": channels,
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2,
                                                  sort_keys=True))
    for i, label in enumerate(trials.labels):
        stacked = np.vstack([trials.eeg[i], trials.emg[i]]).T
        path = out_dir / f"trial_{i}_{label}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([c["name"] for c in channels])
            writer.writerows(np.round(stacked, 9).tolist())


def read_trials(data_dir: Path) -> TrialSet:
    """Read a trial directory back into a :class:`TrialSet`."""
    data_dir = Path(data_dir)
    meta_path = data_dir / "meta.json"
    if not meta_path.is_file():
        raise DataFormatError(f"missing {meta_path}")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"malformed {meta_path}: {exc}") from exc
    try:
        rate = float(meta["sample_rate_hz"])
        channels = meta["channels"]
        kinds = [c["kind"] for c in channels]
        names = [c["name"] for c in channels]
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"incomplete metadata in {meta_path}") from exc
    eeg_rows = [i for i, k in enumerate(kinds) if k == EEG]
    emg_rows = [i for i, k in enumerate(kinds) if k == EMG]

    entries = []
    for path in data_dir.glob("trial_*.csv"):
        match = _TRIAL_RE.match(path.name)
        if match:
            entries.append((int(match.group(1)), match.group(2), path))
    if not entries:
        raise DataFormatError(f"no trial files found in {data_dir}")
    entries.sort()

    eeg, emg, labels = [], [], []
    for _, label, path in entries:
        data = _read_trial_csv(path, names)
        eeg.append(data[:, eeg_rows].T)
        emg.append(data[:, emg_rows].T)
        labels.append(label)
    return TrialSet(eeg=np.array(eeg), emg=np.array(emg), labels=labels,
                    sample_rate_hz=rate)


def _read_trial_csv(path: Path, names: list[str]) -> np.ndarray:
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != names:
            raise DataFormatError(
                f"{path}: header {header} does not match metadata channel "
                f"order")
        rows = []
        for n, row in enumerate(reader, start=2):
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DataFormatError(f"{path}: bad value at row {n}") from exc
            if len(row) != len(names):
                raise DataFormatError(
                    f"{path}: row {n} has {len(row)} columns, expected "
                    f"{len(names)}")
    if not rows:
        raise DataFormatError(f"{path}: no samples")
    return np.array(rows)


def write_features(features: FeatureMatrix, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + features.column_names())
        for label, row in zip(features.labels, features.values):
            writer.writerow([label] + [repr(float(v)) for v in row])


def read_features(path: Path) -> FeatureMatrix:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"missing feature file {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise DataFormatError(f"{path}: first column must be 'label'")
        feature_ids = []
        band_names: list[str] = []
        for col in header[1:]:
            match = _COLUMN_RE.match(col)
            if not match:
                raise DataFormatError(f"{path}: bad feature column {col!r}")
            h, j, band = int(match.group(1)), int(match.group(2)), match.group(3)
            if band not in band_names:
                band_names.append(band)
            feature_ids.append((h, j, band_names.index(band)))
        labels, values = [], []
        for n, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: row {n} has {len(row)} columns, expected "
                    f"{len(header)}")
            labels.append(row[0])
            try:
                values.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise DataFormatError(f"{path}: bad value at row {n}") from exc
    if not values:
        raise DataFormatError(f"{path}: no data rows")
    return FeatureMatrix(values=np.array(values), feature_ids=feature_ids,
                         labels=labels, band_names=band_names)
