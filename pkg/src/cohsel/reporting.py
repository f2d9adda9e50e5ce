"""Run-report emission: JSON report, grid CSVs, selected features, figures.

The accuracy grids are written both as delimited files (rows = feature
counts, columns = agreement thresholds, empty cells for infeasible
combinations) and as heatmap figures with infeasible cells left blank.
"""

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .pipeline import CVReport, FoldResult
from .spectral import FeatureMatrix


def report_to_dict(report: CVReport, config_echo: dict) -> dict:
    return {
        "config": config_echo,
        "kernel": report.kernel,
        "seed": report.seed,
        "outer_folds": [
            {
                "fold": fold.fold_index,
                "validation_accuracy": fold.validation_accuracy,
                "gamma_star": fold.best.params.as_list(),
                "features_star": fold.best.selection.selected,
                "grid": [
                    {
                        "gamma": cell.params.as_list(),
                        "inner_accuracy": cell.inner_accuracy,
                        "feasible": cell.inner_accuracy is not None,
                    }
                    for cell in fold.cells
                ],
            }
            for fold in report.folds
        ],
        "best_fold": report.best_fold_index,
        "gamma_best": report.best_params.as_list(),
        "features_best": report.best_selection.selected,
        "training_accuracy": report.training_accuracy,
        "holdout_accuracy": report.holdout_accuracy,
    }


def write_report_json(report: CVReport, config_echo: dict, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = report_to_dict(report, config_echo)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _grid_axes(fold: FoldResult, sigma: float):
    ms = sorted({c.params.m for c in fold.cells if c.params.sigma == sigma})
    nus = sorted({c.params.nu for c in fold.cells if c.params.sigma == sigma})
    grid = np.full((len(ms), len(nus)), np.nan)
    for cell in fold.cells:
        if cell.params.sigma != sigma or cell.inner_accuracy is None:
            continue
        grid[ms.index(cell.params.m), nus.index(cell.params.nu)] = \
            cell.inner_accuracy
    return ms, nus, grid


def write_grid_csv(fold: FoldResult, sigma: float, path: Path):
    """Accuracy matrix of one fold: rows = m, columns = nu, blanks infeasible."""
    ms, nus, grid = _grid_axes(fold, sigma)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m\\nu"] + [str(nu) for nu in nus])
        for r, m in enumerate(ms):
            writer.writerow([str(m)] + ["" if np.isnan(v) else repr(float(v))
                                        for v in grid[r]])


def render_grid_figure(fold: FoldResult, sigma: float, kernel: str,
                       path: Path):
    """Heatmap of the fold's inner accuracies; infeasible cells stay blank."""
    ms, nus, grid = _grid_axes(fold, sigma)
    fig, ax = plt.subplots(figsize=(1.0 + 0.6 * len(nus),
                                    1.0 + 0.45 * len(ms)))
    masked = np.ma.masked_invalid(grid)
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("white")
    im = ax.imshow(masked, cmap=cmap, aspect="auto", origin="lower",
                   vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(nus)), [str(nu) for nu in nus])
    ax.set_yticks(range(len(ms)), [str(m) for m in ms])
    ax.set_xlabel("agreement partners threshold (nu)")
    ax.set_ylabel("selected features (m)")
    ax.set_title(f"fold {fold.fold_index}, sigma={sigma}, {kernel} kernel")
    fig.colorbar(im, ax=ax, label="inner CV accuracy")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_selected_features(report: CVReport, features: FeatureMatrix,
                            path: Path):
    """CSV of the winning features as (eeg, emg, band name) triplets."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_index", "eeg", "emg", "band"])
        for col in report.best_selection.selected:
            h, j, k = features.feature_ids[col]
            writer.writerow([col, h, j, features.band_names[k]])


def emit_run_outputs(report: CVReport, features: FeatureMatrix,
                     config_echo: dict, out_dir: Path,
                     figures: bool = True):
    """Write every report artifact of one pipeline run into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report_json(report, config_echo, out_dir / "report.json")
    write_selected_features(report, features,
                            out_dir / "selected_features.csv")
    sigmas = sorted({c.params.sigma for f in report.folds for c in f.cells})
    for fold in report.folds:
        for sigma in sigmas:
            suffix = f"_sigma{sigma:g}" if len(sigmas) > 1 else ""
            stem = f"grid_{fold.fold_index}{suffix}"
            write_grid_csv(fold, sigma, out_dir / f"{stem}.csv")
            if figures:
                render_grid_figure(fold, sigma, report.kernel,
                                   out_dir / f"{stem}.png")
