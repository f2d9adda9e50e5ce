"""Flat key-value configuration for the pipeline and CLI.

Files are plain text, one ``key = value`` per line, ``#`` comments.
Unknown keys are rejected; missing keys take the documented defaults.
"""

from dataclasses import dataclass, field
from pathlib import Path

from .cluster import SimilarityGraph
from .consensus import ConsensusParams
from .errors import ConfigError
from .pipeline import PipelineSettings, SvmSettings
from .sigproc import FilterDesign
from .spectral import DEFAULT_BANDS, PER_TRIAL, TRIAL_AVERAGED, BandTable

_DEFAULT_GRID_M = list(range(25, 251, 25))
_DEFAULT_GRID_NU = [2, 3, 4, 5, 6, 7, 8]


@dataclass
class PipelineConfig:
    """Effective configuration with every documented default applied."""

    bands: BandTable = field(default_factory=BandTable)
    scheme: str = PER_TRIAL
    resample_hz: float | None = None
    band_lo_hz: float = 1.5
    band_hi_hz: float = 80.0
    bandpass_order: int = 86
    bandpass_ripple_db: float = 0.2
    bandpass_fallback_order: int = 8
    notch_hz: float = 50.0
    notch_q: float = 30.0
    smote_k: int = 5
    spectral_knn: int = 10
    spectral_bandwidth: float | None = None
    svm_kernel: str = "rbf"
    svm_c: float = 1.0
    svm_gamma: object = "scale"
    svm_tol: float = 1e-3
    grid_m: list[int] = field(default_factory=lambda: list(_DEFAULT_GRID_M))
    grid_sigma: list[float] = field(default_factory=lambda: [0.6])
    grid_nu: list[int] = field(default_factory=lambda: list(_DEFAULT_GRID_NU))
    holdout_fraction: float = 0.1
    outer_folds: int = 5
    inner_folds: int = 5
    seed: int = 0
    jobs: int = 1

    def filter_design(self) -> FilterDesign:
        return FilterDesign(order=self.bandpass_order,
                            ripple_db=self.bandpass_ripple_db,
                            fallback_order=self.bandpass_fallback_order)

    def grid(self) -> list[ConsensusParams]:
        """Grid order: sigma-major, then m, then nu."""
        return [ConsensusParams(m=m, sigma=s, nu=nu)
                for s in self.grid_sigma
                for m in self.grid_m
                for nu in self.grid_nu]

    def pipeline_settings(self) -> PipelineSettings:
        return PipelineSettings(
            grid=self.grid(),
            svm=SvmSettings(kernel=self.svm_kernel, c=self.svm_c,
                            gamma=self.svm_gamma, tol=self.svm_tol),
            graph=SimilarityGraph(knn=self.spectral_knn,
                                  bandwidth=self.spectral_bandwidth),
            holdout_fraction=self.holdout_fraction,
            outer_folds=self.outer_folds,
            inner_folds=self.inner_folds,
            smote_k=self.smote_k,
            seed=self.seed,
            jobs=self.jobs,
        )

    def echo(self) -> dict:
        """Serializable snapshot of the effective configuration."""
        return {
            "bands": [[n, lo, hi] for n, lo, hi in self.bands.bands],
            "scheme": self.scheme,
            "resample_hz": self.resample_hz,
            "filter.band_lo": self.band_lo_hz,
            "filter.band_hi": self.band_hi_hz,
            "filter.bandpass_order": self.bandpass_order,
            "filter.bandpass_ripple_db": self.bandpass_ripple_db,
            "filter.bandpass_fallback_order": self.bandpass_fallback_order,
            "filter.notch_hz": self.notch_hz,
            "filter.notch_q": self.notch_q,
            "smote.k": self.smote_k,
            "spectral.knn": self.spectral_knn,
            "spectral.bandwidth": self.spectral_bandwidth,
            "svm.kernel": self.svm_kernel,
            "svm.c": self.svm_c,
            "svm.gamma": self.svm_gamma,
            "svm.tol": self.svm_tol,
            "grid.m": self.grid_m,
            "grid.sigma": self.grid_sigma,
            "grid.nu": self.grid_nu,
            "cv.holdout_fraction": self.holdout_fraction,
            "cv.outer_folds": self.outer_folds,
            "cv.inner_folds": self.inner_folds,
            "seed": self.seed,
            "jobs": self.jobs,
        }


def _parse_bands(text: str) -> BandTable:
    bands = []
    for part in text.split(","):
        pieces = part.strip().split(":")
        if len(pieces) != 3:
            raise ConfigError(f"band entry {part!r} must be name:lo:hi")
        name, lo, hi = pieces
        try:
            bands.append((name.strip(), float(lo), float(hi)))
        except ValueError as exc:
            raise ConfigError(f"bad band edges in {part!r}") from exc
    return BandTable(bands=bands)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _gamma(text: str):
    return text if text == "scale" else float(text)


def _bandwidth(text: str):
    return None if text == "median" else float(text)


_PARSERS = {
    "bands": ("bands", _parse_bands),
    "scheme": ("scheme", str),
    "resample_hz": ("resample_hz", float),
    "filter.band_lo": ("band_lo_hz", float),
    "filter.band_hi": ("band_hi_hz", float),
    "filter.bandpass_order": ("bandpass_order", int),
    "filter.bandpass_ripple_db": ("bandpass_ripple_db", float),
    "filter.bandpass_fallback_order": ("bandpass_fallback_order", int),
    "filter.notch_hz": ("notch_hz", float),
    "filter.notch_q": ("notch_q", float),
    "smote.k": ("smote_k", int),
    "spectral.knn": ("spectral_knn", int),
    "spectral.bandwidth": ("spectral_bandwidth", _bandwidth),
    "svm.kernel": ("svm_kernel", str),
    "svm.c": ("svm_c", float),
    "svm.gamma": ("svm_gamma", _gamma),
    "svm.tol": ("svm_tol", float),
    "grid.m": ("grid_m", _int_list),
    "grid.sigma": ("grid_sigma", _float_list),
    "grid.nu": ("grid_nu", _int_list),
    "cv.holdout_fraction": ("holdout_fraction", float),
    "cv.outer_folds": ("outer_folds", int),
    "cv.inner_folds": ("inner_folds", int),
    "seed": ("seed", int),
    "jobs": ("jobs", int),
}


def load_config(path: Path | None = None) -> PipelineConfig:
    """Parse a key-value config file; ``None`` yields the defaults."""
    config = PipelineConfig()
    if path is None:
        return config
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    for n, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        attr, parser = _PARSERS[key]
        try:
            setattr(config, attr, parser(value))
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}:{n}: bad value for {key!r}: "
                              f"{exc}") from exc
    if config.scheme not in (PER_TRIAL, TRIAL_AVERAGED):
        raise ConfigError(f"unknown scheme {config.scheme!r}")
    if config.svm_kernel not in ("linear", "rbf"):
        raise ConfigError(f"unknown svm.kernel {config.svm_kernel!r}")
    return config
