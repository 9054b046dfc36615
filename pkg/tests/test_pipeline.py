import math

import pytest

from seoaudit.detectors import AttackType, QueryClass
from seoaudit.errors import EmptyIndex, EmptyInput, EmptyQuery, SchemaError
from seoaudit.metrics import QuerySitePair, rewrite_distance
from seoaudit.page import parse_html
from seoaudit.pipeline import (
    RERANK_FEATURES,
    CorpusIndex,
    PipelineConfig,
    ScoredReference,
    bm25_scores,
    normalize_query,
    retrieve,
    retrieve_scored,
    run_pipeline,
    summarize,
    understand,
)

CFG = PipelineConfig()


def _page(html: str, url: str):
    return parse_html(html.encode(), url)


def _index(pages, malicious=None):
    index = CorpusIndex.build(pages)
    for url, prob in (malicious or {}).items():
        index.doc_malicious[url] = prob
    return index


# --- understand ---


def test_denylist_refusal():
    cfg = PipelineConfig(denylist=("contraband",))
    outcome = understand("cheap Contraband watches", cfg)
    assert outcome.refused and outcome.rewritten_queries == ()
    assert outcome.matched_deny_terms == ("contraband",)


def test_denylist_word_boundary():
    cfg = PipelineConfig(denylist=("art",))
    assert not understand("smart watches", cfg).refused
    assert understand("fine art prints", cfg).refused


def test_normalization_example():
    outcome = understand("Best Widget-Pro Review", CFG)
    assert list(outcome.rewritten_queries) == ["best widget pro review"]


def test_normalized_query_is_fixpoint():
    outcome = understand("best widget pro review", CFG)
    rewritten = outcome.rewritten_queries[0]
    assert rewrite_distance("best widget pro review", rewritten).ed == 0.0


def test_stopwords_and_dedup():
    assert normalize_query("the lamp and the lamp") == "lamp"


def test_empty_query_raises():
    with pytest.raises(EmptyQuery):
        understand("   ", CFG)


def test_unsearchable_query_refused():
    outcome = understand("the and of", CFG)
    assert outcome.refused and not outcome.rewritten_queries


def test_expansion_mode():
    cfg = PipelineConfig(rewriter_mode="expand", k_rewrites=3)
    outcome = understand("widget pro", cfg)
    assert list(outcome.rewritten_queries) == [
        "widget pro",
        "widget pro review",
        "best widget pro",
    ]
    capped = PipelineConfig(rewriter_mode="expand", k_rewrites=2)
    assert len(understand("widget pro", capped).rewritten_queries) == 2


# --- BM25 ---

# Fixture statistics: d1 has 'lamp' twice in 4 tokens, d2 once in 1 token,
# d3 lacks it. N=3, df=2, avgdl=8/3.
BM25_PAGES = [
    _page("<p>widget lamp bright lamp</p>", "http://d1.test/"),
    _page("<p>lamp</p>", "http://d2.test/"),
    _page("<p>bright widget glow</p>", "http://d3.test/"),
]


def test_bm25_hand_evaluated_scores():
    index = _index(BM25_PAGES)
    scores = bm25_scores(["lamp"], index, CFG)
    idf = math.log(1.0 + (3 - 2 + 0.5) / (2 + 0.5))  # ln(1.6)
    d1_expected = idf * (2 * 2.2) / (2 + 1.2 * (1 - 0.75 + 0.75 * 4 / (8 / 3)))
    d2_expected = idf * (1 * 2.2) / (1 + 1.2 * (1 - 0.75 + 0.75 * 1 / (8 / 3)))
    assert scores["http://d1.test/"] == pytest.approx(d1_expected, rel=1e-12)
    assert scores["http://d2.test/"] == pytest.approx(d2_expected, rel=1e-12)
    assert "http://d3.test/" not in scores
    assert d2_expected > d1_expected  # shorter document wins here


def test_single_matching_document_ranks_first():
    pages = [
        _page("<p>blue lamp glow</p>", "http://d1.test/"),
        _page("<p>red kettle steam</p>", "http://d2.test/"),
    ]
    cfg = PipelineConfig(alpha=1.0, beta=0.0)
    assert retrieve(["lamp"], _index(pages), cfg)[0] == "http://d1.test/"


def test_feature_dominance_breaks_lexical_tie():
    # Same visible tokens (same BM25); A dominates on all four features.
    rich = """<html><body>
      <p>alpha beta</p><p>gamma delta</p>
      <div><div><p></p></div></div>
      <a href="/x">.</a><a href="/y">.</a>
      <img src=i alt=a><img src=j alt=b>
    </body></html>"""
    plain = "<html><body><p>alpha beta gamma delta</p></body></html>"
    pages = [_page(plain, "http://plain.test/"), _page(rich, "http://rich.test/")]
    index = _index(pages)
    rich_fv = index.doc_features["http://rich.test/"]
    plain_fv = index.doc_features["http://plain.test/"]
    for name in RERANK_FEATURES:
        assert getattr(rich_fv, name) > getattr(plain_fv, name)
    cfg = PipelineConfig(alpha=0.0, beta=1.0)
    ranked = retrieve(["alpha beta gamma delta"], index, cfg)
    assert ranked[0] == "http://rich.test/"


def test_retrieve_empty_index():
    with pytest.raises(EmptyIndex):
        retrieve(["x"], CorpusIndex(), CFG)


def test_retrieve_requires_rewrites():
    with pytest.raises(EmptyInput):
        retrieve([], _index(BM25_PAGES), CFG)


def test_retrieval_depth_cap():
    pages = [_page(f"<p>lamp number {i}</p>", f"http://d{i}.test/") for i in range(15)]
    cfg = PipelineConfig(retrieval_depth=10, summary_size=5)
    assert len(retrieve(["lamp"], _index(pages), cfg)) == 10


def test_scope_domain_restriction():
    pages = [
        _page("<p>lamp one</p>", "https://inside.example.test/a/"),
        _page("<p>lamp two</p>", "https://outside.other.test/b/"),
    ]
    cfg = CFG.with_scope("example.test")
    assert retrieve(["lamp"], _index(pages), cfg) == ["https://inside.example.test/a/"]


def test_weight_scaling_leaves_order_unchanged():
    pages = [
        _page(f"<p>lamp {'x ' * i}</p>" + "<img src=i>" * i, f"http://d{i}.test/")
        for i in range(6)
    ]
    index = _index(pages)
    base_weights = dict(PipelineConfig().feature_weights)
    scaled = tuple((k, v * 3.0) for k, v in base_weights.items())
    cfg_a = PipelineConfig(alpha=0.5, beta=0.5)
    cfg_b = PipelineConfig(alpha=0.5, beta=0.5, feature_weights=scaled)
    assert retrieve(["lamp x"], index, cfg_a) == retrieve(["lamp x"], index, cfg_b)


# --- summarize ---

SUMMARY_PAGES = [
    _page(f"<p>lamp shade glow warm light number{i}</p>", f"http://s{i}.test/") for i in range(6)
]


def test_summarize_drops_all_malicious():
    index = _index(SUMMARY_PAGES, malicious={p.url: 0.99 for p in SUMMARY_PAGES})
    candidates = [p.url for p in SUMMARY_PAGES]
    assert summarize(candidates, "lamp shade", index, CFG) == []


def test_summarize_passthrough_below_capacity():
    index = _index(SUMMARY_PAGES[:3])
    candidates = [p.url for p in SUMMARY_PAGES[:3]]
    assert summarize(candidates, "lamp glow", index, CFG) == candidates


def test_summarize_truncates_to_m():
    index = _index(SUMMARY_PAGES)
    candidates = [p.url for p in SUMMARY_PAGES]
    kept = summarize(candidates, "lamp glow", index, CFG)
    assert kept == candidates[:5]


def test_summarize_relevance_floor():
    index = _index(SUMMARY_PAGES)
    candidates = [p.url for p in SUMMARY_PAGES]
    # none of the five query tokens appear in the pages -> all dropped
    assert summarize(candidates, "quantum flux capacitor drive core", index, CFG) == []


def test_summarize_monotone_in_cutoff():
    probs = {p.url: 0.2 * i for i, p in enumerate(SUMMARY_PAGES)}
    index = _index(SUMMARY_PAGES, malicious=probs)
    candidates = [p.url for p in SUMMARY_PAGES]
    sizes = [
        len(summarize(candidates, "lamp glow", index, PipelineConfig(malicious_cutoff=c)))
        for c in (0.1, 0.5, 0.9)
    ]
    assert sizes == sorted(sizes)


def test_lower_depth_never_grows_retrieval():
    pages = [_page(f"<p>lamp item {i}</p>", f"http://d{i}.test/") for i in range(12)]
    index = _index(pages)
    sizes = [
        len(retrieve(["lamp"], index, PipelineConfig(retrieval_depth=n, summary_size=1)))
        for n in (3, 6, 12)
    ]
    assert sizes == sorted(sizes)
    # with pure lexical scoring the smaller depth is a prefix of the larger
    cfg3 = PipelineConfig(retrieval_depth=3, summary_size=1, alpha=1.0, beta=0.0)
    cfg6 = PipelineConfig(retrieval_depth=6, summary_size=1, alpha=1.0, beta=0.0)
    small = retrieve(["lamp"], index, cfg3)
    assert retrieve(["lamp"], index, cfg6)[:3] == small


# --- end to end ---


def _pair(query, target):
    return QuerySitePair(
        query=query,
        query_class=QueryClass.HOT,
        target_url=target,
        attack_type=AttackType.KEYWORD_STUFFING,
    )


def test_run_pipeline_refused_trace():
    cfg = PipelineConfig(denylist=("contraband",))
    trace = run_pipeline(_pair("contraband lamps", "http://t.test/"), _index(BM25_PAGES), cfg)
    assert trace.refused
    assert trace.rewritten_queries == []
    assert trace.retrieval_references == [] and trace.summary_references == []


def test_run_pipeline_unindexed_target_blocked():
    trace = run_pipeline(_pair("bright lamp", "http://absent.test/"), _index(BM25_PAGES), CFG)
    assert not trace.refused
    assert "http://absent.test/" not in trace.retrieval_references


def test_run_pipeline_clean_target_reaches_summary():
    trace = run_pipeline(_pair("widget lamp bright", "http://d1.test/"), _index(BM25_PAGES), CFG)
    assert "http://d1.test/" in trace.retrieval_references
    assert "http://d1.test/" in trace.summary_references


def test_subset_chain_and_determinism():
    index = _index(BM25_PAGES)
    pair = _pair("bright widget", "http://d3.test/")
    t1 = run_pipeline(pair, index, CFG)
    t2 = run_pipeline(pair, index, CFG)
    assert t1 == t2
    assert set(t1.summary_references) <= set(t1.retrieval_references)
    assert set(t1.retrieval_references) <= set(index.doc_lengths)


# --- config and index persistence ---


def test_config_validation():
    with pytest.raises(SchemaError):
        PipelineConfig(alpha=0.9, beta=0.9)
    with pytest.raises(SchemaError):
        PipelineConfig(retrieval_depth=3, summary_size=5)
    with pytest.raises(SchemaError):
        PipelineConfig(rewriter_mode="nonsense")
    with pytest.raises(SchemaError):
        PipelineConfig(feature_weights=(("dom_depth", 1.0),))


def test_config_file_roundtrip(tmp_path):
    cfg = PipelineConfig(denylist=("x",), alpha=0.6, beta=0.4, seed=77)
    path = tmp_path / "config.json"
    path.write_text(__import__("json").dumps(cfg.to_dict()))
    loaded = PipelineConfig.from_file(path)
    assert loaded.denylist == ("x",)
    assert loaded.alpha == 0.6 and loaded.seed == 77


def test_index_save_load_roundtrip(tmp_path):
    index = _index(BM25_PAGES, malicious={"http://d1.test/": 0.7})
    path = tmp_path / "index.json"
    index.save(path)
    loaded = CorpusIndex.load(path)
    assert loaded.doc_lengths == index.doc_lengths
    assert loaded.postings == index.postings
    assert loaded.doc_malicious == index.doc_malicious
    assert loaded.doc_features == index.doc_features
    assert retrieve(["lamp"], loaded, CFG) == retrieve(["lamp"], index, CFG)


def test_index_schema_version_checked(tmp_path):
    path = tmp_path / "index.json"
    path.write_text('{"schema_version": 99, "docs": {}, "postings": {}}')
    with pytest.raises(SchemaError):
        CorpusIndex.load(path)


def test_scored_references_expose_blend():
    index = _index(BM25_PAGES)
    scored = retrieve_scored(["lamp"], index, CFG)
    assert all(isinstance(r, ScoredReference) for r in scored)
    assert all(0.0 <= r.score <= 1.0 for r in scored)
    assert scored[0].score >= scored[-1].score


def test_site_stats_from_index():
    from seoaudit.pipeline import site_stats_from_index

    pages = [
        _page("<p>one page here</p>", "https://farm.example.test/a/"),
        _page("<p>two page here</p>", "https://farm.example.test/b/"),
        _page("<p>elsewhere page</p>", "https://other.test/"),
    ]
    index = _index(pages, malicious={"https://farm.example.test/b/": 0.95})
    stats = site_stats_from_index(index, "https://farm.example.test/")
    assert stats.domain == "example.test"
    assert stats.subpage_count == 2
    assert stats.spam_subpage_count == 1
