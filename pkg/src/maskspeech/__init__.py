"""maskspeech: detecting face-mask speech from 1-second segments.

Four acoustic front ends (LFCC, MFCC, IFCC, CQCC) feed per-class diagonal
Gaussian mixtures; per-utterance log-likelihood ratios are fused by
logistic regression and evaluated with unweighted average recall. A
synthetic mask-effect corpus generator makes the whole pipeline runnable
without any licensed data.
"""

from .config import PipelineConfig, load_config, save_config
from .dsp import Waveform
from .errors import ValidationError
from .labels import LABEL_MASK, LABEL_NO_MASK, LABEL_ORDER

__version__ = "0.1.0"

__all__ = [
    "LABEL_MASK",
    "LABEL_NO_MASK",
    "LABEL_ORDER",
    "PipelineConfig",
    "ValidationError",
    "Waveform",
    "__version__",
    "load_config",
    "save_config",
]
