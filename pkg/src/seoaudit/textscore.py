"""Pluggable text scoring: topic probabilities and malicious probability.

A TextScorer maps a token sequence to a TopicProbabilities record: a
14-way benign-topic distribution plus an independent probability that the
text promotes malicious content. Detectors only consume the record, so any
backend satisfying the contract can be swapped in.

The default backend is an additively smoothed bag-of-words multinomial
model trained from small labeled seed corpora — deterministic, dependency
light, and trainable at desk scale. A convolutional architecture is the
documented heavier alternative (see ConvTextClassifierConfig); training one
is outside this package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError, UninitializedScorer
from .textutil import tokenize

NUM_TOPIC_CLASSES = 14

# The benign topic taxonomy is a convention of this toolkit; any 14-class
# labeled corpus works as long as the manifest carries exactly 14 topics.
DEFAULT_TOPIC_CLASSES = (
    "news",
    "sports",
    "technology",
    "health",
    "finance",
    "education",
    "travel",
    "entertainment",
    "shopping",
    "food",
    "science",
    "politics",
    "arts",
    "lifestyle",
)

# Token budget per scored text; longer inputs are truncated.
MAX_SCORED_TOKENS = 500

MANIFEST_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TopicProbabilities:
    """14-way topic distribution plus malicious probability."""

    prob_14: tuple[float, ...]
    prob_malicious: float

    def __post_init__(self):
        if len(self.prob_14) != NUM_TOPIC_CLASSES:
            raise ValueError(f"prob_14 must have {NUM_TOPIC_CLASSES} entries")
        if any(p < 0 or p > 1 for p in self.prob_14):
            raise ValueError("topic probabilities must lie in [0, 1]")
        if abs(sum(self.prob_14) - 1.0) > 1e-6:
            raise ValueError("prob_14 must sum to 1")
        if not 0 <= self.prob_malicious <= 1:
            raise ValueError("prob_malicious must lie in [0, 1]")

    @property
    def max_topic(self) -> float:
        return max(self.prob_14)

    @property
    def argmax_topic(self) -> int:
        return self.prob_14.index(max(self.prob_14))


@dataclass(frozen=True)
class ConvTextClassifierConfig:
    """Configuration of the alternative convolutional text classifier.

    Recorded for operators who train their own model; this package does not
    train or run it. The bag-of-words scorer honors the same token budget.
    """

    vocabulary_size: int = 10_000
    max_sequence_length: int = 500
    embedding_dim: int = 128
    filter_sizes: tuple[int, ...] = (3, 4, 5)
    filters_per_size: int = 128
    pooling: str = "global-max"
    dropout: float = 0.5
    optimizer: str = "adam"
    batch_size: int = 64


class _MultinomialModel:
    """Laplace-smoothed class-conditional token model with uniform priors."""

    def __init__(self, class_docs: list[list[str]]):
        vocab: dict[str, int] = {}
        rows = []
        for docs in class_docs:
            counts: dict[int, int] = {}
            for doc in docs:
                for tok in tokenize(doc):
                    idx = vocab.setdefault(tok, len(vocab))
                    counts[idx] = counts.get(idx, 0) + 1
            rows.append(counts)
        self.vocab = vocab
        v = len(vocab)
        mat = np.zeros((len(class_docs), v), dtype=np.float64)
        for ci, counts in enumerate(rows):
            for idx, c in counts.items():
                mat[ci, idx] = c
        totals = mat.sum(axis=1, keepdims=True)
        # max() guards the degenerate all-empty-corpus case (v == 0)
        self.log_cond = np.log(mat + 1.0) - np.log(np.maximum(totals + v, 1.0))

    def posterior(self, tokens: list[str]) -> np.ndarray:
        known = [self.vocab[t] for t in tokens if t in self.vocab]
        if not known:
            n = self.log_cond.shape[0]
            return np.full(n, 1.0 / n)
        logp = self.log_cond[:, known].sum(axis=1)
        logp -= logp.max()
        p = np.exp(logp)
        return p / p.sum()


class BagOfWordsScorer:
    """Default TextScorer: smoothed bag-of-words over labeled seed corpora.

    Immutable after construction and safe to share across threads. Tokens
    absent from the training vocabulary carry no evidence; with none at all
    the output falls back to the uniform/0.5 prior.
    """

    def __init__(
        self,
        topic_docs: dict[str, list[str]] | None = None,
        malicious_docs: list[str] | None = None,
        benign_docs: list[str] | None = None,
    ):
        if topic_docs is None or malicious_docs is None or benign_docs is None:
            self._topics = None
            self._topic_model = None
            self._malicious_model = None
            return
        if len(topic_docs) != NUM_TOPIC_CLASSES:
            raise SchemaError(
                f"expected {NUM_TOPIC_CLASSES} topic classes, got {len(topic_docs)}"
            )
        if not malicious_docs or not benign_docs:
            raise SchemaError("malicious and benign corpora must be non-empty")
        self._topics = tuple(topic_docs.keys())
        self._topic_model = _MultinomialModel([topic_docs[t] for t in self._topics])
        # Class order: [benign, malicious]; posterior[1] is prob_malicious.
        self._malicious_model = _MultinomialModel([benign_docs, malicious_docs])

    @property
    def initialized(self) -> bool:
        return self._topic_model is not None

    @property
    def topic_classes(self) -> tuple[str, ...]:
        if self._topics is None:
            raise UninitializedScorer("scorer has no training corpora")
        return self._topics

    @classmethod
    def from_manifest(cls, manifest: dict) -> "BagOfWordsScorer":
        if manifest.get("schema_version") != MANIFEST_SCHEMA_VERSION:
            raise SchemaError("unsupported or missing scorer manifest schema_version")
        try:
            return cls(manifest["topics"], manifest["malicious"], manifest["benign"])
        except KeyError as exc:
            raise SchemaError(f"scorer manifest missing key: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "BagOfWordsScorer":
        return cls.from_manifest(json.loads(Path(path).read_text("utf-8")))

    def score(self, tokens: list[str]) -> TopicProbabilities:
        if not self.initialized:
            raise UninitializedScorer("scorer has no training corpora")
        tokens = list(tokens[:MAX_SCORED_TOKENS])
        if not tokens:
            return uniform_probabilities()
        topic_post = self._topic_model.posterior(tokens)
        mal_post = self._malicious_model.posterior(tokens)
        prob_14 = _renormalize(topic_post)
        return TopicProbabilities(prob_14=prob_14, prob_malicious=float(mal_post[1]))


def _renormalize(p: np.ndarray) -> tuple[float, ...]:
    vals = [min(max(float(x), 0.0), 1.0) for x in p]
    total = sum(vals)
    if total <= 0:
        return tuple([1.0 / len(vals)] * len(vals))
    vals = [x / total for x in vals]
    # Absorb float drift into the largest entry so the sum is exact.
    drift = 1.0 - sum(vals)
    top = vals.index(max(vals))
    vals[top] += drift
    return tuple(vals)


def uniform_probabilities() -> TopicProbabilities:
    """The zero-evidence prior: uniform topics, 0.5 malicious."""
    return TopicProbabilities(
        prob_14=tuple([1.0 / NUM_TOPIC_CLASSES] * NUM_TOPIC_CLASSES),
        prob_malicious=0.5,
    )


def score_text(tokens: list[str], scorer) -> TopicProbabilities:
    """Score a token sequence, honoring the scorer token budget.

    The scorer must expose score(tokens) -> TopicProbabilities; inputs longer
    than MAX_SCORED_TOKENS are truncated first.
    """
    if hasattr(scorer, "initialized") and not scorer.initialized:
        raise UninitializedScorer("scorer has no training corpora")
    if not tokens:
        return uniform_probabilities()
    return scorer.score(list(tokens)[:MAX_SCORED_TOKENS])
