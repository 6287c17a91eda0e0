"""Font recognition with synthetic-to-real domain adaptation.

A from-scratch CNN classifier whose first two convolutional layers can be
pretrained as a convolutional autoencoder on unlabeled images from both the
synthetic and the (pseudo-)real domain, plus the procedural font renderer,
degradation pipeline, and evaluation harness needed to demonstrate the
adaptation effect end to end on a desk-scale corpus.
"""

__version__ = "0.1.0"

from .augment import (BUILTIN_PROFILES, CLEAN, PSEUDO_REAL, SYNTHETIC_TRAIN,
                      DomainProfile)
from .classifier import FontCNNClassifier, TrainReport, build_cnn
from .config import Config, ConfigError, default_config, load_config
from .evaluation import (EvalReport, ExperimentResult, evaluate,
                         run_experiment, topk_error)
from .exceptions import DivergenceError, ProtocolError
from .fontgen import DatasetManifest, make_dataset
from .scae import ConvAutoencoder, build_scae

__all__ = [
    "BUILTIN_PROFILES", "CLEAN", "PSEUDO_REAL", "SYNTHETIC_TRAIN",
    "DomainProfile", "FontCNNClassifier", "TrainReport", "build_cnn",
    "Config", "ConfigError", "default_config", "load_config",
    "EvalReport", "ExperimentResult", "evaluate", "run_experiment",
    "topk_error", "DivergenceError", "ProtocolError",
    "DatasetManifest", "make_dataset", "ConvAutoencoder", "build_scae",
]
