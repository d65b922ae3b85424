"""Bridge from token-classification models to per-character prediction files.

Models place tokens at character offsets with an inside-mention probability;
the adapter broadcasts those probabilities onto characters (max wins where
tokens overlap), run-length encodes the result, and writes one JSON record
per tweet in the prediction-file format the medspan toolkit consumes.
"""

from .adapt import DatasetError, adapt, read_tweets, write_atomic
from .models import (
    HFTokenClassifier,
    ModelError,
    StubModel,
    TokenModel,
    inside_probability,
    load_model,
    tokens_from_offsets,
)
from .tracks import (
    OffsetError,
    TokenPrediction,
    char_probs,
    runs_from_probs,
    serialize_record,
    track_record,
)

__all__ = [
    "DatasetError",
    "HFTokenClassifier",
    "ModelError",
    "OffsetError",
    "StubModel",
    "TokenModel",
    "TokenPrediction",
    "adapt",
    "char_probs",
    "inside_probability",
    "load_model",
    "read_tweets",
    "runs_from_probs",
    "serialize_record",
    "tokens_from_offsets",
    "track_record",
    "write_atomic",
]
