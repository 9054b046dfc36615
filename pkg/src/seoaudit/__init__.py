"""Black-hat SEO detection and AI-search resilience auditing.

The package is organized as a library:

* page      — tolerant HTML parsing into a normalized page model
* features  — the eight re-ranking features and group statistics
* textscore — pluggable topic/malicious text scoring
* detectors — the five black-hat SEO classifiers
* metrics   — resilience, classifier, rank-shift, and distance arithmetic
* attackgen — deterministic adversarial page-corpus generation
* pipeline  — the offline three-phase search workflow simulator
* netio     — dual-view fetching, redirect walking, DNS probing
* harness   — batch runners, datasets, and report emission
* cli       — the `seoaudit` command
"""

from .detectors import (
    AttackType,
    CloakingEvidence,
    LinkFarmEvidence,
    QueryClass,
    RedirectChain,
    StuffingEvidence,
    Verdict,
    cloaking_similarities,
    detect_cloaking,
    detect_keyword_stuffing,
    detect_link_farm,
    detect_redirection,
    detect_semantic_confusion,
)
from .features import FeatureVector, extract_features, group_differences, relative_difference
from .harness import (
    AttackReport,
    BenchDataset,
    ResilienceReport,
    build_resilience_report,
    emit_report,
    run_attack_eval,
    run_bench,
)
from .metrics import (
    ClassifierMetrics,
    ConfusionMatrix,
    PhaseResilience,
    PhaseTrace,
    QuerySitePair,
    RewriteDistance,
    bucketize,
    classifier_metrics,
    cumulative_resilience,
    phase_resilience,
    rank_shift,
    rewrite_distance,
)
from .page import PageDocument, SnapshotPair, parse_html, visible_text
from .pipeline import CorpusIndex, PipelineConfig, retrieve, run_pipeline, summarize, understand
from .textscore import BagOfWordsScorer, TopicProbabilities, score_text

__version__ = "0.1.0"
