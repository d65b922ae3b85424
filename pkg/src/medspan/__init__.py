"""Toolkit for extracting medication mentions from tweets.

The pieces compose in the order a run uses them: corpus loading and
splitting, data augmentation, bootstrap subsampling, character-level
tagging, ensemble aggregation, span post-processing, evaluation, and
hyperparameter search. Every stage also has a CLI subcommand and a file
format, so any single stage can be replaced by an external tool.
"""

from .augment import (
    DrugNameReplacer,
    PairConcatenator,
    Paraphraser,
    Upsampler,
    concat_pairs,
    paraphrase,
    relocate_spans,
    replace_drug_names,
    replacement_copies,
    upsample,
)
from .corpus import (
    FORMATS,
    JSONL,
    TSV,
    Dataset,
    Span,
    Tweet,
    check_spans,
    format_of,
    load_dataset,
    parse_dataset,
    save_dataset,
    serialize_dataset,
    stratified_split,
    with_spans,
)
from .datasets import (
    DRUG_NAMES,
    build_synthetic_corpus,
    load_drug_lexicon,
    load_synthetic_corpus,
)
from .ensemble import CharacterEnsemble, aggregate, aggregate_sets, average, ensemble_objective
from .exceptions import FormatError, MedspanError
from .hpo import (
    METHODS,
    Dimension,
    ObjectiveError,
    SearchSpace,
    TPEConfig,
    TrialRecord,
    append_trial,
    ensemble_search_space,
    grid_search,
    iter_grid,
    optimize,
    read_trial_log,
    tpe_suggest,
)
from .lexicon import Lexicon
from .metrics import (
    FALSE_POSITIVE,
    FN_COMPLEX_PHRASE,
    FN_OTHER,
    FN_RARE_DRUG,
    PRF,
    MatchCounts,
    MetricsReport,
    categorize_errors,
    evaluate,
    format_report,
    overlap_pairs,
    strict_tp,
)
from ._rng import stream
from .pipeline import PipelineConfig, config_from_mapping, read_config, run_pipeline
from .postprocess import clean_predictions, clean_spans, strip_hashtags, trim_edges
from .sampling import SubsetPlan, bootstrap_subsets
from .tagging import (
    CharProbTrack,
    GazetteerTagger,
    load_tracks,
    parse_tracks,
    save_tracks,
    serialize_tracks,
    tag,
    tag_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "CharProbTrack",
    "CharacterEnsemble",
    "DRUG_NAMES",
    "Dataset",
    "Dimension",
    "DrugNameReplacer",
    "FALSE_POSITIVE",
    "FN_COMPLEX_PHRASE",
    "FN_OTHER",
    "FN_RARE_DRUG",
    "FORMATS",
    "FormatError",
    "GazetteerTagger",
    "JSONL",
    "Lexicon",
    "METHODS",
    "MatchCounts",
    "MedspanError",
    "MetricsReport",
    "ObjectiveError",
    "PRF",
    "PairConcatenator",
    "Paraphraser",
    "PipelineConfig",
    "SearchSpace",
    "Span",
    "SubsetPlan",
    "TPEConfig",
    "TSV",
    "TrialRecord",
    "Tweet",
    "Upsampler",
    "aggregate",
    "aggregate_sets",
    "append_trial",
    "average",
    "bootstrap_subsets",
    "build_synthetic_corpus",
    "categorize_errors",
    "check_spans",
    "clean_predictions",
    "clean_spans",
    "concat_pairs",
    "config_from_mapping",
    "ensemble_objective",
    "ensemble_search_space",
    "evaluate",
    "format_of",
    "format_report",
    "grid_search",
    "iter_grid",
    "load_dataset",
    "load_drug_lexicon",
    "load_synthetic_corpus",
    "load_tracks",
    "optimize",
    "overlap_pairs",
    "paraphrase",
    "parse_dataset",
    "parse_tracks",
    "read_config",
    "read_trial_log",
    "relocate_spans",
    "replace_drug_names",
    "replacement_copies",
    "run_pipeline",
    "save_dataset",
    "save_tracks",
    "serialize_dataset",
    "serialize_tracks",
    "stream",
    "strict_tp",
    "strip_hashtags",
    "stratified_split",
    "tag",
    "tag_dataset",
    "tpe_suggest",
    "trim_edges",
    "upsample",
    "with_spans",
]
