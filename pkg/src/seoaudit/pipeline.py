"""Deterministic three-phase search workflow over a local corpus.

Models the understand / retrieve / summarize stages of an AI search frontend
so resilience experiments run fully offline:

1. understand — a denylist intent gate plus a normalizing query rewriter
   (lowercase, strip punctuation, drop stop words, dedupe, optional
   templated expansions);
2. retrieve — BM25 over an inverted index, candidates re-ranked by a convex
   blend of the lexical score and a weighted page-feature score built from
   the four promoted-page signals (text fragmentation, DOM depth, internal
   links, multimodal count);
3. summarize — reference selection that drops candidates with a high cached
   malicious probability or too little query-token overlap, then keeps the
   first M survivors.

Every stage is a pure function of (inputs, config), so identical runs yield
identical traces.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .domains import registrable_domain
from .errors import EmptyIndex, EmptyInput, EmptyQuery, SchemaError
from .features import FeatureVector, extract_features
from .metrics import PhaseTrace, QuerySitePair
from .page import PageDocument, parse_html, visible_text
from .textscore import score_text
from .textutil import STOP_WORDS, dedupe, tokenize

INDEX_SCHEMA_VERSION = 1
CONFIG_SCHEMA_VERSION = 1

# The four re-ranking features, equally weighted by default.
RERANK_FEATURES = ("text_fragmentation", "dom_depth", "internal_links", "multimodal_count")

REWRITER_MODES = ("normalize", "expand")


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the simulated workflow, with stated defaults."""

    denylist: tuple[str, ...] = ()
    rewriter_mode: str = "normalize"
    k_rewrites: int = 1
    retrieval_depth: int = 10  # N
    summary_size: int = 5  # M, <= N
    alpha: float = 0.7  # weight of the lexical score
    beta: float = 0.3  # weight of the feature score
    feature_weights: tuple[tuple[str, float], ...] = tuple((f, 0.25) for f in RERANK_FEATURES)
    malicious_cutoff: float = 0.9
    relevance_floor: float = 0.2
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    scope_domains: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.rewriter_mode not in REWRITER_MODES:
            raise SchemaError(f"rewriter_mode must be one of {REWRITER_MODES}")
        if self.k_rewrites < 1:
            raise SchemaError("k_rewrites must be >= 1")
        if not (self.retrieval_depth >= self.summary_size >= 1):
            raise SchemaError("need retrieval_depth >= summary_size >= 1")
        if self.alpha < 0 or self.beta < 0 or abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise SchemaError("alpha and beta must be non-negative and sum to 1")
        names = [n for n, _ in self.feature_weights]
        if sorted(names) != sorted(RERANK_FEATURES):
            raise SchemaError(f"feature_weights must cover exactly {RERANK_FEATURES}")
        if any(w < 0 for _, w in self.feature_weights) or sum(w for _, w in self.feature_weights) <= 0:
            raise SchemaError("feature weights must be non-negative with a positive sum")
        if not (0 <= self.malicious_cutoff <= 1 and 0 <= self.relevance_floor <= 1):
            raise SchemaError("cutoff and floor must lie in [0, 1]")
        if self.bm25_k1 <= 0 or not (0 <= self.bm25_b <= 1):
            raise SchemaError("need bm25_k1 > 0 and bm25_b in [0, 1]")

    def normalized_feature_weights(self) -> dict[str, float]:
        total = sum(w for _, w in self.feature_weights)
        return {name: w / total for name, w in self.feature_weights}

    def with_scope(self, *domains: str) -> "PipelineConfig":
        return replace(self, scope_domains=tuple(registrable_domain(d) for d in domains))

    def to_dict(self) -> dict:
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "denylist": list(self.denylist),
            "rewriter_mode": self.rewriter_mode,
            "k_rewrites": self.k_rewrites,
            "retrieval_depth": self.retrieval_depth,
            "summary_size": self.summary_size,
            "alpha": self.alpha,
            "beta": self.beta,
            "feature_weights": {n: w for n, w in self.feature_weights},
            "malicious_cutoff": self.malicious_cutoff,
            "relevance_floor": self.relevance_floor,
            "bm25_k1": self.bm25_k1,
            "bm25_b": self.bm25_b,
            "scope_domains": list(self.scope_domains),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        version = obj.get("schema_version", CONFIG_SCHEMA_VERSION)
        if version != CONFIG_SCHEMA_VERSION:
            raise SchemaError(f"unsupported config schema_version {version}")
        weights = obj.get("feature_weights")
        if weights is None:
            weight_items = tuple((f, 0.25) for f in RERANK_FEATURES)
        else:
            weight_items = tuple(sorted(weights.items()))
        kwargs = dict(
            denylist=tuple(obj.get("denylist", ())),
            rewriter_mode=obj.get("rewriter_mode", "normalize"),
            k_rewrites=obj.get("k_rewrites", 1),
            retrieval_depth=obj.get("retrieval_depth", 10),
            summary_size=obj.get("summary_size", 5),
            alpha=obj.get("alpha", 0.7),
            beta=obj.get("beta", 0.3),
            feature_weights=weight_items,
            malicious_cutoff=obj.get("malicious_cutoff", 0.9),
            relevance_floor=obj.get("relevance_floor", 0.2),
            bm25_k1=obj.get("bm25_k1", 1.2),
            bm25_b=obj.get("bm25_b", 0.75),
            scope_domains=tuple(obj.get("scope_domains", ())),
            seed=obj.get("seed", 0),
        )
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))


# --- understanding ---


@dataclass(frozen=True)
class UnderstandOutcome:
    refused: bool
    rewritten_queries: tuple[str, ...]
    matched_deny_terms: tuple[str, ...] = ()


def normalize_query(query: str) -> str:
    """Lowercase, strip punctuation, drop stop words, dedupe tokens."""
    tokens = [t for t in tokenize(query) if t not in STOP_WORDS]
    return " ".join(dedupe(tokens))


def rewrite_queries(query: str, mode: str = "normalize", k: int = 1) -> list[str]:
    """Rewritten query candidates; [] when nothing searchable survives."""
    base = normalize_query(query)
    if not base:
        return []
    rewrites = [base]
    if mode == "expand":
        rewrites.append(f"{base} review")
        rewrites.append(f"best {base}")
    return dedupe(rewrites)[: max(k, 1)]


def understand(query: str, cfg: PipelineConfig) -> UnderstandOutcome:
    """Intent gate plus query rewriting.

    A denylist hit (case-insensitive, word-boundary) refuses the query with
    an empty rewrite set; so does a query with no searchable tokens left
    after normalization.
    """
    if not query or not query.strip():
        raise EmptyQuery("query is empty")
    matched = tuple(
        term
        for term in cfg.denylist
        if re.search(r"\b" + r"\s+".join(re.escape(t) for t in term.lower().split()) + r"\b", query.lower())
    )
    if matched:
        return UnderstandOutcome(refused=True, rewritten_queries=(), matched_deny_terms=matched)
    rewrites = rewrite_queries(query, cfg.rewriter_mode, cfg.k_rewrites)
    if not rewrites:
        return UnderstandOutcome(refused=True, rewritten_queries=())
    return UnderstandOutcome(refused=False, rewritten_queries=tuple(rewrites))


# --- the corpus index ---


@dataclass
class CorpusIndex:
    """Immutable-after-build inverted index with per-document metadata."""

    postings: dict[str, dict[str, int]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    doc_features: dict[str, FeatureVector] = field(default_factory=dict)
    doc_malicious: dict[str, float] = field(default_factory=dict)

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    @property
    def avg_length(self) -> float:
        if not self.doc_lengths:
            return 0.0
        return sum(self.doc_lengths.values()) / len(self.doc_lengths)

    def __contains__(self, url: str) -> bool:
        return url in self.doc_lengths

    def add_page(self, page: PageDocument, scorer=None) -> None:
        url = page.url
        tokens = tokenize(visible_text(page))
        self.doc_lengths[url] = len(tokens)
        self.doc_features[url] = extract_features(page)
        if scorer is not None:
            self.doc_malicious[url] = score_text(tokens, scorer).prob_malicious
        else:
            self.doc_malicious[url] = 0.0
        for tok in tokens:
            bucket = self.postings.setdefault(tok, {})
            bucket[url] = bucket.get(url, 0) + 1

    @classmethod
    def build(cls, pages, scorer=None) -> "CorpusIndex":
        index = cls()
        for page in pages:
            index.add_page(page, scorer)
        return index

    @classmethod
    def build_from_directory(cls, root: str | Path, scorer=None, base_url: str | None = None) -> "CorpusIndex":
        """Index every .html file under a directory tree.

        When the directory carries a corpus manifest.json, its page URLs are
        used; otherwise URLs derive from base_url (or file:// paths).
        """
        root = Path(root)
        manifest_path = root / "manifest.json"
        pages: list[PageDocument] = []
        if manifest_path.is_file():
            manifest = json.loads(manifest_path.read_text("utf-8"))
            for entry in manifest.get("pages", []):
                html_path = root / entry["path"]
                pages.append(parse_html(html_path.read_bytes(), entry["url"]))
        else:
            for html_path in sorted(root.rglob("*.html")):
                rel = html_path.relative_to(root).as_posix()
                url = f"{base_url.rstrip('/')}/{rel}" if base_url else html_path.resolve().as_uri()
                pages.append(parse_html(html_path.read_bytes(), url))
        return cls.build(pages, scorer)

    def to_dict(self) -> dict:
        return {
            "schema_version": INDEX_SCHEMA_VERSION,
            "docs": {
                url: {
                    "length": self.doc_lengths[url],
                    "malicious": self.doc_malicious[url],
                    "features": self.doc_features[url].to_dict(),
                }
                for url in sorted(self.doc_lengths)
            },
            "postings": {
                term: dict(sorted(urls.items())) for term, urls in sorted(self.postings.items())
            },
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CorpusIndex":
        if obj.get("schema_version") != INDEX_SCHEMA_VERSION:
            raise SchemaError("unsupported or missing index schema_version")
        index = cls()
        for url, meta in obj["docs"].items():
            index.doc_lengths[url] = int(meta["length"])
            index.doc_malicious[url] = float(meta["malicious"])
            index.doc_features[url] = FeatureVector.from_dict(meta["features"])
        for term, urls in obj["postings"].items():
            index.postings[term] = {u: int(tf) for u, tf in urls.items()}
        return index

    def save(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_name(f".{path.name}.tmp")
        tmp.write_text(json.dumps(self.to_dict(), ensure_ascii=False), "utf-8")
        tmp.replace(path)

    @classmethod
    def load(cls, path: str | Path) -> "CorpusIndex":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))


def site_stats_from_index(index: "CorpusIndex", domain: str, spam_cutoff: float = 0.9):
    """Desk-mode subpage statistics for a domain, from the corpus index.

    Replaces live per-site queries: subpages are the indexed documents under
    the registrable domain, and spam subpages are those whose cached
    malicious probability exceeds the cutoff.
    """
    from .detectors import SiteStats

    key = registrable_domain(domain)
    urls = [u for u in index.doc_lengths if registrable_domain(u) == key]
    spam = sum(1 for u in urls if index.doc_malicious.get(u, 0.0) > spam_cutoff)
    return SiteStats(domain=key, subpage_count=len(urls), spam_subpage_count=spam)


# --- retrieval ---


def bm25_scores(
    query_tokens: list[str], index: CorpusIndex, cfg: PipelineConfig, eligible: set[str] | None = None
) -> dict[str, float]:
    """BM25 score for every eligible document matching >= 1 query token."""
    n = index.doc_count
    avgdl = index.avg_length or 1.0
    k1, b = cfg.bm25_k1, cfg.bm25_b
    scores: dict[str, float] = {}
    for tok in dedupe(query_tokens):
        bucket = index.postings.get(tok)
        if not bucket:
            continue
        df = len(bucket)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        for url, tf in bucket.items():
            if eligible is not None and url not in eligible:
                continue
            dl = index.doc_lengths[url]
            denom = tf + k1 * (1.0 - b + b * dl / avgdl)
            scores[url] = scores.get(url, 0.0) + idf * tf * (k1 + 1.0) / denom
    return scores


def _minmax(values: dict[str, float]) -> dict[str, float]:
    if not values:
        return {}
    lo, hi = min(values.values()), max(values.values())
    if hi == lo:
        return {k: 0.0 for k in values}
    return {k: (v - lo) / (hi - lo) for k, v in values.items()}


@dataclass(frozen=True)
class ScoredReference:
    url: str
    score: float
    lexical: float
    feature: float


def retrieve_scored(
    rewritten: list[str], index: CorpusIndex, cfg: PipelineConfig
) -> list[ScoredReference]:
    """Candidate pool from per-query BM25 top-N, re-ranked by the blend."""
    if index.doc_count == 0:
        raise EmptyIndex("index holds no documents")
    if not rewritten:
        raise EmptyInput("at least one rewritten query is required")

    eligible: set[str] | None = None
    if cfg.scope_domains:
        scope = set(cfg.scope_domains)
        eligible = {u for u in index.doc_lengths if registrable_domain(u) in scope}

    pool: set[str] = set()
    lexical_best: dict[str, float] = {}
    for q in rewritten:
        scores = bm25_scores(tokenize(q), index, cfg, eligible)
        top = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[: cfg.retrieval_depth]
        for url, s in top:
            pool.add(url)
        for url, s in scores.items():
            if s > lexical_best.get(url, float("-inf")):
                lexical_best[url] = s

    if not pool:
        return []

    lex_norm = _minmax({u: lexical_best[u] for u in pool})
    weights = cfg.normalized_feature_weights()
    feat_norm_by_name = {
        name: _minmax({u: float(getattr(index.doc_features[u], name)) for u in pool})
        for name in RERANK_FEATURES
    }
    ranked = []
    for url in pool:
        feature_score = sum(weights[name] * feat_norm_by_name[name][url] for name in RERANK_FEATURES)
        final = cfg.alpha * lex_norm[url] + cfg.beta * feature_score
        ranked.append(ScoredReference(url=url, score=final, lexical=lex_norm[url], feature=feature_score))
    ranked.sort(key=lambda r: (-r.score, r.url))
    return ranked[: cfg.retrieval_depth]


def retrieve(rewritten: list[str], index: CorpusIndex, cfg: PipelineConfig) -> list[str]:
    """Ranked reference URLs (see retrieve_scored for the scores)."""
    return [r.url for r in retrieve_scored(rewritten, index, cfg)]


# --- summarizing ---


def summarize(
    candidates: list[str], query: str, index: CorpusIndex, cfg: PipelineConfig
) -> list[str]:
    """Reference selection: drop malicious and off-topic candidates, keep M.

    The query argument is the rewritten-query text whose tokens define
    relevance containment (fraction of distinct query tokens present in the
    candidate page).
    """
    query_tokens = dedupe(tokenize(query))
    survivors: list[str] = []
    for url in candidates:
        if index.doc_malicious.get(url, 0.0) > cfg.malicious_cutoff:
            continue
        if query_tokens:
            present = sum(1 for t in query_tokens if url in index.postings.get(t, ()))
            if present / len(query_tokens) < cfg.relevance_floor:
                continue
        survivors.append(url)
        if len(survivors) == cfg.summary_size:
            break
    return survivors


# --- end to end ---


def run_pipeline(pair: QuerySitePair, index: CorpusIndex, cfg: PipelineConfig) -> PhaseTrace:
    """Compose understand -> retrieve -> summarize into a PhaseTrace."""
    outcome = understand(pair.query, cfg)
    if outcome.refused:
        return PhaseTrace(pair=pair, refused=True)
    rewritten = list(outcome.rewritten_queries)
    references = retrieve(rewritten, index, cfg)
    combined_query = " ".join(dedupe(t for q in rewritten for t in q.split()))
    summary = summarize(references, combined_query, index, cfg) if references else []
    return PhaseTrace(
        pair=pair,
        rewritten_queries=rewritten,
        retrieval_references=references,
        summary_references=summary,
        refused=False,
    )
