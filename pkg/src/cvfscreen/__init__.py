"""Speech biomarkers for screening mild cognitive impairment from
categorical verbal fluency recordings."""
from ._backend import BACKEND
from .corpus import Corpus, SynthSpec, ingest_manifest, synth_corpus
from .evaluation import EvalReport, confidence_interval, cross_validate
from .features_linear import (acoustic_features, duration_features, duration_ratios,
                              energy_features, mfcc, pitch_track, spectral_centroid,
                              voice_quality)
from .features_nonlinear import NldConfig, castiglioni_fd, nld_block, permutation_entropy
from .pipeline import (ExperimentConfig, FeatureMatrix, emit_report, extract_all,
                       extract_features, run_experiment)
from .registry import FEATURE_NAMES, FEATURE_SETS
from .signal_io import AudioSignal, frame, load_wav
from .stats import anova_oneway, f_cdf, select_features
from .svm import SvmConfig, SvmModel, predict, train_smo
from .vad import SegmentMap, VadConfig, frame_voicing, segment_voicing, short_time_energy

__version__ = "0.1.0"
