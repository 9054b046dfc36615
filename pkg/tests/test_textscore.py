import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nb_posterior_bruteforce
from conftest import BENIGN_DOCS, MALICIOUS_DOCS, TOPIC_DOCS
from seoaudit.errors import SchemaError, UninitializedScorer
from seoaudit.textscore import (
    DEFAULT_TOPIC_CLASSES,
    MAX_SCORED_TOKENS,
    NUM_TOPIC_CLASSES,
    BagOfWordsScorer,
    ConvTextClassifierConfig,
    TopicProbabilities,
    score_text,
    uniform_probabilities,
)


def test_empty_tokens_uniform_prior(scorer):
    probs = score_text([], scorer)
    assert probs.prob_malicious == 0.5
    assert all(p == pytest.approx(1 / 14) for p in probs.prob_14)


def test_seed_class_argmax_matches_bruteforce(scorer):
    classes = list(TOPIC_DOCS)
    for idx in (0, 5, 13):
        tokens = TOPIC_DOCS[classes[idx]][0].split()
        probs = score_text(tokens, scorer)
        assert probs.argmax_topic == idx
        expected = nb_posterior_bruteforce([TOPIC_DOCS[c] for c in classes], tokens)
        for got, want in zip(probs.prob_14, expected):
            assert got == pytest.approx(want, abs=1e-9)


def test_malicious_seed_tokens_high_probability(scorer):
    tokens = "jackpot casino bonus bet win".split()
    probs = score_text(tokens, scorer)
    assert probs.prob_malicious > 0.9
    expected = nb_posterior_bruteforce([BENIGN_DOCS, MALICIOUS_DOCS], tokens)
    assert probs.prob_malicious == pytest.approx(expected[1], abs=1e-9)


def test_benign_seed_tokens_low_probability(scorer):
    probs = score_text("weather garden tomato recipe".split(), scorer)
    assert probs.prob_malicious < 0.5


def test_determinism(scorer):
    tokens = "jackpot weather sports casino".split()
    assert score_text(tokens, scorer) == score_text(tokens, scorer)


def test_truncation_at_500_tokens(scorer):
    filler = ["zzznoise"] * MAX_SCORED_TOKENS
    with_tail = filler + ["jackpot", "casino", "bonus"]
    assert score_text(with_tail, scorer) == score_text(filler, scorer)


def test_uninitialized_scorer():
    empty = BagOfWordsScorer()
    with pytest.raises(UninitializedScorer):
        score_text(["x"], empty)
    with pytest.raises(UninitializedScorer):
        empty.score(["x"])


def test_manifest_requires_14_classes():
    with pytest.raises(SchemaError):
        BagOfWordsScorer({"only": ["one"]}, ["m"], ["b"])


def test_manifest_file_roundtrip(tmp_path, scorer_manifest, scorer):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(scorer_manifest))
    loaded = BagOfWordsScorer.from_file(path)
    tokens = "jackpot casino sports".split()
    assert loaded.score(tokens) == scorer.score(tokens)


def test_manifest_schema_version_checked(scorer_manifest):
    bad = dict(scorer_manifest, schema_version=99)
    with pytest.raises(SchemaError):
        BagOfWordsScorer.from_manifest(bad)


def test_probabilities_validation():
    with pytest.raises(ValueError):
        TopicProbabilities(prob_14=(1.0,) * 14, prob_malicious=0.5)
    with pytest.raises(ValueError):
        TopicProbabilities(prob_14=(1 / 14,) * 13, prob_malicious=0.5)
    ok = uniform_probabilities()
    assert ok.max_topic == pytest.approx(1 / 14)


_vocab = st.sampled_from(
    "jackpot casino weather garden sports news zzz aaa travel food".split()
)


@settings(max_examples=80, deadline=None)
@given(st.lists(_vocab, max_size=40))
def test_output_is_valid_distribution(tokens):
    scorer = BagOfWordsScorer(TOPIC_DOCS, MALICIOUS_DOCS, BENIGN_DOCS)
    probs = score_text(tokens, scorer)
    assert abs(sum(probs.prob_14) - 1.0) <= 1e-6
    assert all(0.0 <= p <= 1.0 for p in probs.prob_14)
    assert 0.0 <= probs.prob_malicious <= 1.0


def test_documented_conv_config():
    cfg = ConvTextClassifierConfig()
    assert cfg.vocabulary_size == 10_000
    assert cfg.max_sequence_length == 500 == MAX_SCORED_TOKENS
    assert cfg.embedding_dim == 128
    assert cfg.filter_sizes == (3, 4, 5)
    assert cfg.filters_per_size == 128
    assert cfg.dropout == 0.5
    assert cfg.optimizer == "adam"
    assert cfg.batch_size == 64
    assert NUM_TOPIC_CLASSES == len(DEFAULT_TOPIC_CLASSES) == 14
