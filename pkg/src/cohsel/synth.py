"""Seeded synthetic paired EEG/EMG trial generation.

Couplings are planted as a shared band-limited component mixed into one
EEG channel and one EMG channel of every trial of a chosen class, so the
coherence of that (EEG, EMG, band) triplet scales with the coupling
strength while all other pairs stay independent noise.
"""

from dataclasses import dataclass, field

import numpy as np

from .sigproc import TrialSet
from .spectral import DEFAULT_BANDS, BandTable


@dataclass
class PlantedCoupling:
    """One (EEG, EMG, band) coupling planted into part of a class.

    ``start`` and ``fraction`` delimit the within-class trial range the
    coupling applies to, so subgroup structure (for example one half of a
    class coupled one way and the other half another) can be expressed.
    """

    eeg: int
    emg: int
    band: str
    label: str
    strength: float
    start: float = 0.0
    fraction: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"strength {self.strength} outside [0, 1]")
        if not 0.0 <= self.start < 1.0:
            raise ValueError(f"start {self.start} outside [0, 1)")
        if self.fraction <= 0.0 or self.start + self.fraction > 1.0 + 1e-12:
            raise ValueError(
                f"fraction {self.fraction} with start {self.start} "
                "leaves [0, 1]")


@dataclass
class SynthSpec:
    n_trials_per_class: int
    n_eeg: int
    n_emg: int
    sample_rate_hz: float = 500.0
    segment_seconds: float = 4.0
    labels: tuple[str, str] = ("class1", "class2")
    planted: list[PlantedCoupling] = field(default_factory=list)
    seed: int = 0
    bands: BandTable = field(default_factory=BandTable)

    def __post_init__(self):
        names = self.bands.names
        for p in self.planted:
            if p.band not in names:
                raise ValueError(f"unknown band name {p.band!r}")
            if not 0 <= p.eeg < self.n_eeg:
                raise ValueError(f"EEG index {p.eeg} out of range")
            if not 0 <= p.emg < self.n_emg:
                raise ValueError(f"EMG index {p.emg} out of range")
            if p.label not in self.labels:
                raise ValueError(f"unknown class label {p.label!r}")


def _band_edges(bands: BandTable, name: str):
    for n, lo, hi in bands.bands:
        if n == name:
            return lo, hi
    raise ValueError(f"unknown band name {name!r}")


def _band_noise(rng, n_samples, rate, lo, hi):
    """Unit-RMS noise whose spectrum is flat inside [lo, hi] and zero outside.

    Band limiting happens in the frequency domain so the coherence floor
    is uniform across the whole band instead of drooping at the edges.
    """
    spectrum = np.fft.rfft(rng.standard_normal(n_samples))
    freqs = np.fft.rfftfreq(n_samples, d=1.0 / rate)
    spectrum[(freqs < lo) | (freqs > hi)] = 0.0
    x = np.fft.irfft(spectrum, n=n_samples)
    rms = np.sqrt(np.mean(x ** 2))
    return x / rms if rms > 0 else x


def generate(spec: SynthSpec):
    """Build the trial set and the ground-truth feature column list.

    Returns ``(trials, truth_columns)`` where ``truth_columns`` are the
    lexicographic (eeg, emg, band) column indices of the planted
    couplings in the feature matrix this trial set produces.
    """
    rng = np.random.default_rng(spec.seed)
    n_samples = int(round(spec.segment_seconds * spec.sample_rate_hz))
    n_total = 2 * spec.n_trials_per_class
    labels = [spec.labels[0]] * spec.n_trials_per_class + \
        [spec.labels[1]] * spec.n_trials_per_class

    eeg = rng.standard_normal((n_total, spec.n_eeg, n_samples))
    emg = rng.standard_normal((n_total, spec.n_emg, n_samples))

    for i, label in enumerate(labels):
        within = i % spec.n_trials_per_class
        for p in spec.planted:
            if p.label != label:
                continue
            lo_i = int(round(p.start * spec.n_trials_per_class))
            hi_i = int(round((p.start + p.fraction) * spec.n_trials_per_class))
            if not lo_i <= within < hi_i:
                continue
            lo, hi = _band_edges(spec.bands, p.band)
            shared = _band_noise(rng, n_samples, spec.sample_rate_hz, lo, hi)
            s = p.strength
            # Variance-preserving mix: noise keeps full strength outside
            # the planted band, so coherence rises only inside it.
            a = np.sqrt(1.0 - s ** 2)
            eeg[i, p.eeg] = a * eeg[i, p.eeg] + s * shared
            emg[i, p.emg] = a * emg[i, p.emg] + s * shared

    trials = TrialSet(eeg=eeg, emg=emg, labels=labels,
                      sample_rate_hz=spec.sample_rate_hz)
    n_bands = len(spec.bands)
    band_index = {name: k for k, name in enumerate(spec.bands.names)}
    truth = sorted({
        p.eeg * spec.n_emg * n_bands + p.emg * n_bands + band_index[p.band]
        for p in spec.planted})
    return trials, truth


def spec_from_dict(raw: dict) -> SynthSpec:
    """Build a spec from parsed JSON, with explicit key validation."""
    known = {"n_trials_per_class", "eeg_channels", "emg_channels",
             "sample_rate_hz", "segment_seconds", "labels", "planted", "seed"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown spec keys: {sorted(unknown)}")
    for key in ("n_trials_per_class", "eeg_channels", "emg_channels"):
        if key not in raw:
            raise ValueError(f"missing required spec key {key!r}")
    planted = [PlantedCoupling(eeg=int(p["eeg"]), emg=int(p["emg"]),
                               band=str(p["band"]), label=str(p["class"]),
                               strength=float(p["strength"]),
                               start=float(p.get("start", 0.0)),
                               fraction=float(p.get("fraction", 1.0)))
               for p in raw.get("planted", [])]
    return SynthSpec(
        n_trials_per_class=int(raw["n_trials_per_class"]),
        n_eeg=int(raw["eeg_channels"]),
        n_emg=int(raw["emg_channels"]),
        sample_rate_hz=float(raw.get("sample_rate_hz", 500.0)),
        segment_seconds=float(raw.get("segment_seconds", 4.0)),
        labels=tuple(raw.get("labels", ("class1", "class2"))),
        planted=planted,
        seed=int(raw.get("seed", 0)),
    )
