"""Conditioning of raw paired EEG/EMG recordings.

Downsampling, zero-phase Chebyshev bandpass, mains notch, trial
segmentation, full-wave rectification and area-under-curve normalization.
All operations are pure functions of their inputs.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy import signal

from .errors import (
    DegenerateSegmentError,
    FilterDesignError,
    SegmentBoundsError,
    UnsupportedRatioError,
)

EEG = "EEG"
EMG = "EMG"

# Pole radii this close to the unit circle make the forward-backward pass
# numerically explosive even though the filter is formally stable.
_POLE_MARGIN = 1e-5


@dataclass
class FilterDesign:
    """Bandpass design parameters.

    The primary order follows the published recipe; when its SOS cascade
    fails the pole-radius stability check at the working sample rate, the
    fallback order is used instead.
    """

    order: int = 86
    ripple_db: float = 0.2
    fallback_order: int = 8


@dataclass
class RawRecording:
    """Continuous multichannel recording with trial markers.

    channels: (n_channels, n_samples) array.
    channel_kind: per-channel "EEG" or "EMG" tag.
    trial_markers: list of (start_sample, label), strictly increasing starts.
    """

    channels: np.ndarray
    sample_rate_hz: float
    channel_kind: list[str]
    trial_markers: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=float)
        if self.channels.ndim != 2:
            raise ValueError("channels must be a 2-D (channels x samples) array")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if len(self.channel_kind) != self.channels.shape[0]:
            raise ValueError("one channel_kind tag per channel required")
        starts = [s for s, _ in self.trial_markers]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("trial markers must be strictly increasing")


@dataclass
class TrialSet:
    """Segmented, labeled paired trials.

    eeg: (n_trials, n_eeg_channels, n_samples) array.
    emg: (n_trials, n_emg_channels, n_samples) array.
    labels: per-trial class tag.
    """

    eeg: np.ndarray
    emg: np.ndarray
    labels: list[str]
    sample_rate_hz: float

    def __post_init__(self):
        self.eeg = np.asarray(self.eeg, dtype=float)
        self.emg = np.asarray(self.emg, dtype=float)
        if self.eeg.shape[0] != self.emg.shape[0]:
            raise ValueError("eeg and emg must hold the same number of trials")
        if self.eeg.shape[0] and self.eeg.shape[2] != self.emg.shape[2]:
            raise ValueError("eeg and emg trial lengths differ")
        if len(self.labels) != self.eeg.shape[0]:
            raise ValueError("one label per trial required")

    @property
    def n_trials(self) -> int:
        return self.eeg.shape[0]

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.labels))


def _check_sos_stable(sos: np.ndarray) -> bool:
    poles = [np.roots(np.concatenate(([1.0], sec[4:6]))) for sec in sos]
    return max(np.abs(np.concatenate(poles))) < 1.0 - _POLE_MARGIN


def _design_bandpass(sample_rate_hz, lo_hz, hi_hz, design: FilterDesign) -> np.ndarray:
    for order in (design.order, design.fallback_order):
        sos = signal.cheby1(order, design.ripple_db, [lo_hz, hi_hz],
                            btype="bandpass", output="sos", fs=sample_rate_hz)
        if _check_sos_stable(sos):
            return sos
    raise FilterDesignError(
        f"Chebyshev bandpass unstable at orders {design.order} and "
        f"{design.fallback_order} for fs={sample_rate_hz} Hz, "
        f"band {lo_hz}-{hi_hz} Hz"
    )


def resample(x: np.ndarray, from_hz: float, to_hz: float) -> np.ndarray:
    """Downsample ``x`` from ``from_hz`` to ``to_hz`` with anti-aliasing.

    Only downsampling by a rational ratio is supported. An order-8
    Butterworth lowpass at 0.45x the target Nyquist is applied
    forward-backward before decimation. Output length is
    ``floor(len(x) * to_hz / from_hz)``.
    """
    x = np.asarray(x, dtype=float)
    if to_hz <= 0 or from_hz < to_hz:
        raise UnsupportedRatioError(
            f"only downsampling supported (from {from_hz} Hz to {to_hz} Hz)")
    if from_hz == to_hz:
        return x.copy()
    ratio = Fraction(from_hz).limit_denominator(10**6) / \
        Fraction(to_hz).limit_denominator(10**6)
    approx = float(ratio)
    # A huge upsampling factor means the ratio is only "rational" through
    # the float approximation; treat it as unsupported rather than
    # zero-stuffing by millions of samples.
    if abs(approx - from_hz / to_hz) > 1e-9 * approx \
            or ratio.denominator > 1000:
        raise UnsupportedRatioError(
            f"ratio {from_hz}/{to_hz} is not rational within tolerance")
    up, down = ratio.denominator, ratio.numerator
    out_len = int(np.floor(len(x) * to_hz / from_hz))
    if up > 1:
        # Rational resampling: zero-stuff, lowpass at the tighter Nyquist,
        # then decimate.
        work = np.zeros(len(x) * up)
        work[::up] = x * up
        work_rate = from_hz * up
    else:
        work = x
        work_rate = from_hz
    cutoff = 0.45 * (to_hz / 2.0)
    sos = signal.butter(8, cutoff, btype="lowpass", output="sos", fs=work_rate)
    filtered = signal.sosfiltfilt(sos, work)
    return filtered[::down][:out_len]


def bandpass(x: np.ndarray, sample_rate_hz: float, lo_hz: float, hi_hz: float,
             design: FilterDesign | None = None) -> np.ndarray:
    """Zero-phase Chebyshev type I bandpass, applied as an SOS cascade."""
    x = np.asarray(x, dtype=float)
    if not (0 < lo_hz < hi_hz < sample_rate_hz / 2):
        raise ValueError(
            f"band edges must satisfy 0 < {lo_hz} < {hi_hz} < fs/2")
    sos = _design_bandpass(sample_rate_hz, lo_hz, hi_hz,
                           design or FilterDesign())
    return signal.sosfiltfilt(sos, x)


def notch(x: np.ndarray, sample_rate_hz: float, mains_hz: float = 50.0,
          q: float = 30.0) -> np.ndarray:
    """Zero-phase second-order IIR notch at the mains frequency."""
    x = np.asarray(x, dtype=float)
    if not (0 < mains_hz < sample_rate_hz / 2):
        raise ValueError(f"mains frequency {mains_hz} outside (0, fs/2)")
    b, a = signal.iirnotch(mains_hz, q, fs=sample_rate_hz)
    sos = signal.tf2sos(b, a)
    if not _check_sos_stable(sos):
        raise FilterDesignError(f"notch design unstable at {mains_hz} Hz")
    return signal.sosfiltfilt(sos, x)


def segment(recording: RawRecording, segment_seconds: float) -> TrialSet:
    """Cut one fixed-length trial per marker, splitting EEG from EMG rows."""
    rate = recording.sample_rate_hz
    length = int(round(segment_seconds * rate))
    n_samples = recording.channels.shape[1]
    eeg_rows = [i for i, k in enumerate(recording.channel_kind) if k == EEG]
    emg_rows = [i for i, k in enumerate(recording.channel_kind) if k == EMG]
    eeg_trials, emg_trials, labels = [], [], []
    for start, label in recording.trial_markers:
        if start + length > n_samples:
            raise SegmentBoundsError(
                f"marker at sample {start} (label {label!r}) + {length} "
                f"samples overruns recording of {n_samples} samples")
        eeg_trials.append(recording.channels[eeg_rows, start:start + length])
        emg_trials.append(recording.channels[emg_rows, start:start + length])
        labels.append(label)
    n = len(labels)
    eeg = np.array(eeg_trials) if n else np.zeros((0, len(eeg_rows), length))
    emg = np.array(emg_trials) if n else np.zeros((0, len(emg_rows), length))
    return TrialSet(eeg=eeg, emg=emg, labels=labels, sample_rate_hz=rate)


def _auc_normalize(seg: np.ndarray, dt: float, where: str) -> np.ndarray:
    auc = np.abs(seg).sum() * dt
    if auc == 0.0:
        raise DegenerateSegmentError(f"all-zero segment at {where}")
    return seg / auc


def rectify_and_normalize(trials: TrialSet) -> TrialSet:
    """Full-wave rectify EMG and normalize every segment to unit AUC.

    The AUC of a segment is the sum of absolute sample values times the
    sample period; EEG segments are normalized but not rectified.
    """
    dt = 1.0 / trials.sample_rate_hz
    eeg = np.empty_like(trials.eeg)
    emg = np.empty_like(trials.emg)
    for i in range(trials.n_trials):
        for h in range(trials.eeg.shape[1]):
            eeg[i, h] = _auc_normalize(trials.eeg[i, h], dt,
                                       f"trial {i}, EEG channel {h}")
        for j in range(trials.emg.shape[1]):
            emg[i, j] = _auc_normalize(np.abs(trials.emg[i, j]), dt,
                                       f"trial {i}, EMG channel {j}")
    return replace(trials, eeg=eeg, emg=emg)
