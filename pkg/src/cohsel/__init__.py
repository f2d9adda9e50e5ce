"""Coherence feature extraction, consensus feature selection and
nested-CV gesture classification for paired EEG/EMG trials."""

__version__ = "0.1.0"

from .consensus import ConsensusParams, FeatureSelection, select_features
from .pipeline import CVReport, PipelineSettings, run_pipeline
from .sigproc import RawRecording, TrialSet
from .spectral import BandTable, FeatureMatrix, build_feature_matrix, msc

__all__ = [
    "BandTable",
    "ConsensusParams",
    "CVReport",
    "FeatureMatrix",
    "FeatureSelection",
    "PipelineSettings",
    "RawRecording",
    "TrialSet",
    "build_feature_matrix",
    "msc",
    "run_pipeline",
    "select_features",
]
