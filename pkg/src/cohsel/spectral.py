"""Coherence spectra and band-averaged feature extraction.

Per-segment FFT spectra are averaged across repetitions to form the
magnitude-squared coherence of every EEG-EMG sensor pair, which is then
averaged inside a table of physiological frequency bands. One feature is
one (EEG sensor, EMG sensor, band) triplet.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ClassMissingError, EmptyBandError, InsufficientTrialsError
from .sigproc import TrialSet

PER_TRIAL = "per-trial"
TRIAL_AVERAGED = "trial-averaged"

#: Sub-windows used as averaging units for the per-trial coherence estimate.
N_SUBWINDOWS = 4

DEFAULT_BANDS = [
    ("delta", 1.5, 4.0),
    ("theta", 4.0, 8.0),
    ("alpha", 8.0, 13.0),
    ("beta1", 13.0, 20.0),
    ("beta2", 20.0, 30.0),
    ("beta", 13.0, 30.0),
    ("gamma1", 30.0, 45.0),
    ("gamma2", 45.0, 60.0),
    ("gamma3", 60.0, 80.0),
    ("gamma", 30.0, 80.0),
    ("full", 1.5, 80.0),
]


@dataclass
class BandTable:
    """Ordered list of (name, lo_hz, hi_hz) averaging bands.

    Bands may overlap or nest. Bins are assigned with lo <= f < hi; the
    last band in the table additionally includes its upper edge.
    """

    bands: list[tuple[str, float, float]] = field(
        default_factory=lambda: list(DEFAULT_BANDS))

    def __post_init__(self):
        for name, lo, hi in self.bands:
            if not lo < hi:
                raise ValueError(f"band {name!r}: lo {lo} must be < hi {hi}")

    def __len__(self) -> int:
        return len(self.bands)

    @property
    def names(self) -> list[str]:
        return [name for name, _, _ in self.bands]


@dataclass
class FeatureMatrix:
    """Trials-by-features table of band-averaged coherence values.

    Columns are ordered lexicographically in (eeg index, emg index, band
    index); ``feature_ids`` records the triplet identity of each column.
    """

    values: np.ndarray
    feature_ids: list[tuple[int, int, int]]
    labels: list[str]
    band_names: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D (trials x features)")
        if self.values.shape[1] != len(self.feature_ids):
            raise ValueError("one feature id per column required")
        if self.values.shape[0] != len(self.labels):
            raise ValueError("one label per row required")

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def column_names(self) -> list[str]:
        return [f"h{h}_j{j}_{self.band_names[k]}"
                for h, j, k in self.feature_ids]


def fft_spectrum(seg: np.ndarray, sample_rate_hz: float):
    """One-sided FFT of a rectangular-windowed, power-of-two padded segment.

    Returns ``(freqs, spectrum)`` with ``freqs[k] = k * rate / nfft`` up to
    and including the Nyquist bin.
    """
    seg = np.asarray(seg, dtype=float)
    if seg.size < 2:
        raise ValueError("segment must hold at least 2 samples")
    nfft = 1 << (seg.size - 1).bit_length()
    spectrum = np.fft.rfft(seg, n=nfft)
    freqs = np.arange(nfft // 2 + 1) * sample_rate_hz / nfft
    return freqs, spectrum


def _averaged_spectra(eeg_trials: np.ndarray, emg_trials: np.ndarray,
                      sample_rate_hz: float):
    """Trial-averaged auto and cross spectra of paired segment stacks."""
    freqs, _ = fft_spectrum(eeg_trials[0], sample_rate_hz)
    nfft = 2 * (freqs.size - 1)
    ex = np.fft.rfft(eeg_trials, n=nfft, axis=-1)
    ey = np.fft.rfft(emg_trials, n=nfft, axis=-1)
    sx = np.mean(np.abs(ex) ** 2, axis=0)
    sy = np.mean(np.abs(ey) ** 2, axis=0)
    sxy = np.mean(ex * np.conj(ey), axis=0)
    return freqs, sx, sy, sxy


def msc(eeg_trials: np.ndarray, emg_trials: np.ndarray,
        sample_rate_hz: float):
    """Magnitude-squared coherence of a paired stack of segments.

    ``|mean Sxy|^2 / (mean Sx * mean Sy)`` per frequency bin; bins where an
    averaged autospectrum vanishes are defined as 0. At least two segments
    are required, since a single segment makes the ratio identically 1.
    """
    eeg_trials = np.atleast_2d(np.asarray(eeg_trials, dtype=float))
    emg_trials = np.atleast_2d(np.asarray(emg_trials, dtype=float))
    if eeg_trials.shape != emg_trials.shape:
        raise ValueError("paired trial stacks must have identical shapes")
    if eeg_trials.shape[0] < 2:
        raise InsufficientTrialsError(
            "coherence needs at least 2 averaging segments")
    freqs, sx, sy, sxy = _averaged_spectra(eeg_trials, emg_trials,
                                           sample_rate_hz)
    denom = sx * sy
    out = np.zeros_like(denom)
    ok = denom > 0
    out[ok] = np.abs(sxy[ok]) ** 2 / denom[ok]
    return freqs, np.clip(out, 0.0, 1.0)


def band_average(freqs: np.ndarray, values: np.ndarray,
                 bands: BandTable) -> np.ndarray:
    """Mean of ``values`` over the bins of each band in the table."""
    freqs = np.asarray(freqs)
    values = np.asarray(values)
    out = np.empty(len(bands))
    last = len(bands) - 1
    for k, (name, lo, hi) in enumerate(bands.bands):
        mask = (freqs >= lo) & ((freqs <= hi) if k == last else (freqs < hi))
        if not mask.any():
            raise EmptyBandError(
                f"band {name!r} ({lo}-{hi} Hz) contains no spectral bins")
        out[k] = values[mask].mean()
    return out


def _subwindows(seg: np.ndarray, n: int = N_SUBWINDOWS) -> np.ndarray:
    width = seg.shape[-1] // n
    return seg[..., :n * width].reshape(*seg.shape[:-1], n, width)


def _band_masks(freqs: np.ndarray, bands: BandTable) -> np.ndarray:
    """(K, n_bins) boolean matrix of band membership, validated non-empty."""
    masks = np.empty((len(bands), freqs.size), dtype=bool)
    last = len(bands) - 1
    for k, (name, lo, hi) in enumerate(bands.bands):
        mask = (freqs >= lo) & ((freqs <= hi) if k == last else (freqs < hi))
        if not mask.any():
            raise EmptyBandError(
                f"band {name!r} ({lo}-{hi} Hz) contains no spectral bins")
        masks[k] = mask
    return masks


def _per_trial_row(eeg: np.ndarray, emg: np.ndarray, rate: float,
                   masks: np.ndarray) -> np.ndarray:
    """All (h, j, band) features of one trial from its sub-window spectra."""
    eeg_sub = _subwindows(eeg)  # (H, n_sub, width)
    emg_sub = _subwindows(emg)
    nfft = 1 << (eeg_sub.shape[-1] - 1).bit_length()
    ex = np.fft.rfft(eeg_sub, n=nfft, axis=-1)
    ey = np.fft.rfft(emg_sub, n=nfft, axis=-1)
    sx = np.mean(np.abs(ex) ** 2, axis=1)               # (H, B)
    sy = np.mean(np.abs(ey) ** 2, axis=1)               # (J, B)
    sxy = np.einsum("hsb,jsb->hjb", ex, np.conj(ey)) / ex.shape[1]
    denom = sx[:, None, :] * sy[None, :, :]
    coh = np.zeros_like(denom)
    ok = denom > 0
    coh[ok] = np.abs(sxy[ok]) ** 2 / denom[ok]
    coh = np.clip(coh, 0.0, 1.0)
    counts = masks.sum(axis=1).astype(float)
    banded = coh @ masks.T.astype(float) / counts       # (H, J, K)
    return banded.reshape(-1)


def build_feature_matrix(trials: TrialSet, bands: BandTable | None = None,
                         scheme: str = PER_TRIAL) -> FeatureMatrix:
    """Assemble the (trials x H*J*K) band-averaged coherence matrix.

    Under the default per-trial scheme each row is estimated from the
    trial's own data alone: the trial is cut into equal sub-windows that
    serve as the averaging units of the coherence estimate. The
    trial-averaged scheme instead averages across all trials of the row's
    class (every row of a class is then identical); it exists for
    diagnostics only.
    """
    bands = bands or BandTable()
    if trials.n_trials == 0:
        raise ValueError("empty trial set")
    if len(set(trials.labels)) < 2:
        raise ClassMissingError(
            f"both classes required, got only {set(trials.labels)!r}")
    n, n_eeg, n_emg = trials.n_trials, trials.eeg.shape[1], trials.emg.shape[1]
    n_bands = len(bands)
    feature_ids = [(h, j, k)
                   for h in range(n_eeg)
                   for j in range(n_emg)
                   for k in range(n_bands)]
    values = np.empty((n, n_eeg * n_emg * n_bands))

    if scheme == PER_TRIAL:
        width = trials.eeg.shape[2] // N_SUBWINDOWS
        nfft = 1 << (width - 1).bit_length()
        freqs = np.arange(nfft // 2 + 1) * trials.sample_rate_hz / nfft
        masks = _band_masks(freqs, bands)
        for i in range(n):
            values[i] = _per_trial_row(trials.eeg[i], trials.emg[i],
                                       trials.sample_rate_hz, masks)
    elif scheme == TRIAL_AVERAGED:
        labels = np.asarray(trials.labels)
        for cls in set(trials.labels):
            rows = np.flatnonzero(labels == cls)
            col = 0
            for h in range(n_eeg):
                for j in range(n_emg):
                    freqs, coh = msc(trials.eeg[rows, h], trials.emg[rows, j],
                                     trials.sample_rate_hz)
                    values[np.ix_(rows, range(col, col + n_bands))] = \
                        band_average(freqs, coh, bands)
                    col += n_bands
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    return FeatureMatrix(values=values, feature_ids=feature_ids,
                         labels=list(trials.labels), band_names=bands.names)
