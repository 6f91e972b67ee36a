"""Phoneme-level uncertainty scoring for dropout-ensemble transcriptions.

The pipeline, end to end:

1. load a phoneme inventory and an utterance manifest (manifest),
2. obtain M stochastic transcriptions per utterance from any backend,
   or generate them with the built-in confusion channel (simspeaker),
3. align each hypothesis to the reference and regroup per phoneme
   instance (align),
4. compute per-instance entropy/agreement and per-phoneme raw
   components (uncertainty),
5. normalize, compose the weighted difficulty score, aggregate to
   utterances, map to sampling weights (scoring),
6. materialize training epochs from the weights (sampler),
7. validate score rankings against clinical reports (clinical),
   measure CER/WER improvements (metrics), and build sentence-level
   audio from word recordings (rechain).

Everything is seeded and file-driven; the `phdscore` console script
exposes each stage as a subcommand.
"""

from .align import (
    Alignment,
    AlignmentOp,
    InstanceCollection,
    InstanceEnsemble,
    align,
    collect_instances,
    majority_vote,
)
from .clinical import (
    PRCurve,
    SourceComparison,
    compare_sources,
    pr_curve,
    pr_curve_svg,
    serialize_pr_curve,
)
from .errors import (
    DegenerateLabels,
    DuplicateId,
    EmptyReference,
    EmptyScores,
    EmptyStats,
    EnsembleArityError,
    FormatMismatch,
    IllegalSymbol,
    InvalidProfile,
    InvalidWeight,
    OovWord,
    ParseError,
    PhdscoreError,
    SplitMismatch,
    UnknownSymbol,
    UnknownUtterance,
    UnscoredPhoneme,
    UnsupportedEncoding,
)
from .manifest import (
    ADAPTATION_STATES,
    EPSILON,
    SPLITS,
    BackendMeta,
    ClinicalLabel,
    ClinicalReport,
    EnsembleRecord,
    Inventory,
    Lexicon,
    UtteranceRecord,
    lexicon_lookup,
    load_clinical_report,
    load_ensemble,
    load_inventory,
    load_lexicon,
    load_manifest,
    serialize_clinical_report,
    serialize_ensembles,
    serialize_manifest,
)
from .metrics import (
    DeltaRow,
    ErrorRates,
    cer,
    corpus_rates,
    delta_report,
    edit_distance,
    normalize_text,
    wer,
)
from .rechain import (
    PlanResult,
    SentencePlan,
    SkippedTemplate,
    concat_audio,
    load_templates,
    plan_sentences,
)
from .sampler import (
    EpochPlan,
    expand_deterministic,
    load_epoch_plan,
    sample_epoch,
    serialize_epoch_plan,
)
from .scoring import (
    NormalizedStats,
    PhDScoreTable,
    ScoreRow,
    ScoreWeights,
    UtteranceWeight,
    compose,
    load_score_table,
    load_weight_manifest,
    map_weights,
    normalize_components,
    serialize_score_table,
    serialize_weight_manifest,
    utterance_score,
)
from .simspeaker import (
    ConfusionModel,
    PhonemeChannel,
    adapted_profile,
    generate_ensemble,
    load_neighbors,
    load_profile,
    make_profile,
    profile_from_masses,
    simulate_corpus,
)
from .uncertainty import (
    InstanceStats,
    PhonemeStats,
    instance_agreement,
    instance_entropy,
    instance_stats,
    phoneme_stats,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
