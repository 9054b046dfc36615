"""Five black-hat SEO classifiers over pluggable measurement providers.

Each detector separates measurement (building an evidence record from pages,
snapshots, or link sets) from judgment (a pure threshold rule over the
evidence). The rule functions are exported so they can be property-tested
against independently coded oracles and reused on stored evidence.

Judgment rules:

* semantic confusion — max topic probability > 0.9 AND malicious > 0.9
* redirection        — reputable-origin/illegal-query or hot-query chain AND
                       final page malicious probability > 0.9
* cloaking           — signature_sim < 0.9 AND summary_sim > 0.33 AND
                       dom_sim > 0.66
* keyword stuffing   — >= 10 distinct hotwords AND >= 100 spam subpages
* link farm          — max(|A-B|/|A|, |A-B|/|B|) >= 0.2 across two visits
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .domains import registrable_domain
from .errors import (
    BlankEvidence,
    BlankPage,
    BlankView,
    EmptyInput,
    EmptyLinkSet,
    MissingSiteStats,
    NoRedirection,
)
from .page import PageDocument, SnapshotPair, visible_text
from .textscore import TopicProbabilities, score_text
from .textutil import jaccard, multiset_jaccard, shingles, tokenize

# Judgment thresholds.
TOPIC_CONFIDENCE_THRESHOLD = 0.9
MALICIOUS_THRESHOLD = 0.9
SIGNATURE_SIM_CEILING = 0.9
SUMMARY_SIM_FLOOR = 0.33
DOM_SIM_FLOOR = 0.66
HOTWORDS_MIN = 10
SPAM_SUBPAGES_MIN = 100
LINK_DIFF_RATIO_MIN = 0.2

# Pages with fewer visible tokens than this are treated as blank.
BLANK_TOKEN_THRESHOLD = 10

# Content-signature shingle width (whitespace tokens).
SHINGLE_WIDTH = 8

# Authority cutoff for "reputable origin" in redirection detection.
AUTHORITY_TOP_N = 10_000


class AttackType(str, Enum):
    SEMANTIC_CONFUSION = "semantic_confusion"
    REDIRECTION = "redirection"
    CLOAKING = "cloaking"
    KEYWORD_STUFFING = "keyword_stuffing"
    LINK_FARM = "link_farm"


class QueryClass(str, Enum):
    ILLEGAL = "illegal"
    HOT = "hot"
    BENIGN = "benign"


class RedirectMechanism(str, Enum):
    HTTP_3XX = "http-3xx"
    META_REFRESH = "meta-refresh"
    SCRIPT_LOCATION = "script-location"


@dataclass(frozen=True)
class Hop:
    """One chain position; mechanism is how it forwarded (None for the last)."""

    url: str
    mechanism: RedirectMechanism | None = None


@dataclass
class RedirectChain:
    """Ordered hops starting at the URL surfaced to the visitor."""

    hops: list[Hop]
    origin_query_class: QueryClass = QueryClass.BENIGN
    truncated: bool = False

    def __post_init__(self):
        if not self.hops:
            raise ValueError("a redirect chain needs at least one hop")

    @property
    def origin_url(self) -> str:
        return self.hops[0].url

    @property
    def final_url(self) -> str:
        return self.hops[-1].url

    @property
    def mechanisms(self) -> list[RedirectMechanism]:
        return [h.mechanism for h in self.hops if h.mechanism is not None]


# --- evidence records ---


@dataclass(frozen=True)
class SemanticConfusionEvidence:
    probabilities: TopicProbabilities


@dataclass(frozen=True)
class RedirectionEvidence:
    query_class: QueryClass
    origin_reputable: bool
    hop_count: int
    landing_prob_malicious: float


@dataclass(frozen=True)
class CloakingEvidence:
    signature_sim: float
    summary_sim: float
    dom_sim: float
    blank: bool = False


@dataclass(frozen=True)
class StuffingEvidence:
    hotwords_count: int
    spam_subpages: int


@dataclass(frozen=True)
class LinkFarmEvidence:
    set_a_size: int
    set_b_size: int
    diff_size: int
    wildcard_dns: bool = False

    @property
    def ratio(self) -> float:
        return max(self.diff_size / self.set_a_size, self.diff_size / self.set_b_size)


@dataclass(frozen=True)
class Verdict:
    attack_type: AttackType
    flagged: bool
    evidence: object

    def to_dict(self) -> dict:
        ev = self.evidence
        if isinstance(ev, SemanticConfusionEvidence):
            ev_dict = {
                "max_topic": ev.probabilities.max_topic,
                "prob_malicious": ev.probabilities.prob_malicious,
            }
        elif isinstance(ev, (RedirectionEvidence, CloakingEvidence, StuffingEvidence, LinkFarmEvidence)):
            ev_dict = {
                k: (v.value if isinstance(v, Enum) else v) for k, v in vars(ev).items()
            }
        else:
            ev_dict = dict(vars(ev))
        return {"attack_type": self.attack_type.value, "flagged": self.flagged, "evidence": ev_dict}


# --- judgment rules (pure functions over evidence) ---


def semantic_confusion_rule(probs: TopicProbabilities) -> bool:
    return probs.max_topic > TOPIC_CONFIDENCE_THRESHOLD and probs.prob_malicious > MALICIOUS_THRESHOLD


def redirection_rule(ev: RedirectionEvidence) -> bool:
    type_1 = ev.query_class == QueryClass.ILLEGAL and ev.origin_reputable
    type_2 = ev.query_class == QueryClass.HOT
    return (type_1 or type_2) and ev.landing_prob_malicious > MALICIOUS_THRESHOLD


def cloaking_rule(ev: CloakingEvidence) -> bool:
    return (
        ev.signature_sim < SIGNATURE_SIM_CEILING
        and ev.summary_sim > SUMMARY_SIM_FLOOR
        and ev.dom_sim > DOM_SIM_FLOOR
    )


def stuffing_rule(ev: StuffingEvidence) -> bool:
    return ev.hotwords_count >= HOTWORDS_MIN and ev.spam_subpages >= SPAM_SUBPAGES_MIN


def link_farm_rule(ev: LinkFarmEvidence) -> bool:
    return ev.ratio >= LINK_DIFF_RATIO_MIN


# --- reference lists and site statistics ---


class AuthorityList:
    """Domain popularity ranks loaded from 'rank,domain' lines."""

    def __init__(self, ranks: dict[str, int]):
        self._ranks = {registrable_domain(d): r for d, r in ranks.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "AuthorityList":
        ranks: dict[str, int] = {}
        for line in Path(path).read_text("utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rank_str, _, domain = line.partition(",")
            domain = domain.strip().lower()
            if domain:
                ranks.setdefault(domain, int(rank_str))
        return cls(ranks)

    def rank_of(self, url_or_domain: str) -> int | None:
        return self._ranks.get(registrable_domain(url_or_domain))

    def is_reputable(self, url_or_domain: str, top_n: int = AUTHORITY_TOP_N) -> bool:
        """Top-ranked domain, or an education/government domain."""
        rank = self.rank_of(url_or_domain)
        if rank is not None and rank <= top_n:
            return True
        return _is_edu_gov(url_or_domain)


def _is_edu_gov(url_or_domain: str) -> bool:
    host = registrable_domain(url_or_domain)
    labels = host.split(".")
    return any(label in ("edu", "gov") for label in labels[1:])


class HotwordList:
    """Trending phrases matched case-insensitively on word boundaries."""

    def __init__(self, phrases: list[str]):
        if not phrases:
            raise EmptyInput("hotword list must be non-empty")
        self.phrases = [p.strip() for p in phrases if p.strip()]
        self._patterns = [
            re.compile(r"\b" + r"\s+".join(re.escape(t) for t in p.lower().split()) + r"\b")
            for p in self.phrases
        ]

    @classmethod
    def from_file(cls, path: str | Path) -> "HotwordList":
        lines = [
            line.strip()
            for line in Path(path).read_text("utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        ]
        return cls(lines)

    def count_in(self, text: str) -> int:
        """Number of distinct listed phrases present in the text."""
        haystack = " ".join(text.lower().split())
        return sum(1 for pat in self._patterns if pat.search(haystack))


@dataclass(frozen=True)
class SiteStats:
    """Per-domain subpage statistics (from a corpus index in desk mode)."""

    domain: str
    subpage_count: int
    spam_subpage_count: int


# --- detectors ---


def detect_semantic_confusion(doc: PageDocument, scorer) -> Verdict:
    """Flag pages that look confidently on-topic yet confidently malicious."""
    tokens = tokenize(visible_text(doc))
    if len(tokens) < BLANK_TOKEN_THRESHOLD:
        raise BlankPage(f"page has {len(tokens)} visible tokens (< {BLANK_TOKEN_THRESHOLD})")
    probs = score_text(tokens, scorer)
    evidence = SemanticConfusionEvidence(probabilities=probs)
    return Verdict(AttackType.SEMANTIC_CONFUSION, semantic_confusion_rule(probs), evidence)


def detect_redirection(
    chain: RedirectChain,
    authority: AuthorityList,
    scorer,
    landing_doc: PageDocument,
) -> Verdict:
    """Flag chains from reputable/hot origins that land on malicious content."""
    if len(chain.hops) < 2:
        raise NoRedirection("single-hop chain has no redirection")
    probs = score_text(tokenize(visible_text(landing_doc)), scorer)
    evidence = RedirectionEvidence(
        query_class=chain.origin_query_class,
        origin_reputable=authority.is_reputable(chain.origin_url),
        hop_count=len(chain.hops),
        landing_prob_malicious=probs.prob_malicious,
    )
    return Verdict(AttackType.REDIRECTION, redirection_rule(evidence), evidence)


def cloaking_similarities(pair: SnapshotPair, serp_summary: str) -> CloakingEvidence:
    """Three similarity measurements between the crawler and user views.

    signature_sim: Jaccard of 8-token shingle sets of visible text.
    summary_sim:   fraction of summary tokens present in the user view
                   (0.0 for an empty summary — no matching evidence).
    dom_sim:       multiset Jaccard of root-to-node tag-path strings.
    """
    crawler_tokens = tokenize(visible_text(pair.crawler_view))
    user_tokens = tokenize(visible_text(pair.user_view))
    if len(crawler_tokens) < BLANK_TOKEN_THRESHOLD or len(user_tokens) < BLANK_TOKEN_THRESHOLD:
        raise BlankView("one of the snapshot views is blank; comparison aborted")

    signature_sim = jaccard(
        shingles(crawler_tokens, SHINGLE_WIDTH), shingles(user_tokens, SHINGLE_WIDTH)
    )

    summary_tokens = tokenize(serp_summary)
    if summary_tokens:
        user_set = set(user_tokens)
        summary_sim = sum(1 for t in summary_tokens if t in user_set) / len(summary_tokens)
    else:
        summary_sim = 0.0

    dom_sim = multiset_jaccard(
        _tag_path_counts(pair.crawler_view), _tag_path_counts(pair.user_view)
    )
    return CloakingEvidence(
        signature_sim=signature_sim, summary_sim=summary_sim, dom_sim=dom_sim, blank=False
    )


def _tag_path_counts(doc: PageDocument) -> dict[str, int]:
    counts: dict[str, int] = {}
    stack = [(doc.dom_root, doc.dom_root.tag)]
    while stack:
        node, path = stack.pop()
        counts[path] = counts.get(path, 0) + 1
        for child in node.children:
            stack.append((child, f"{path}/{child.tag}"))
    return counts


def detect_cloaking(evidence: CloakingEvidence) -> Verdict:
    if evidence.blank:
        raise BlankEvidence("evidence built from blank views cannot be judged")
    return Verdict(AttackType.CLOAKING, cloaking_rule(evidence), evidence)


def detect_keyword_stuffing(
    doc: PageDocument, hotwords: HotwordList, site: SiteStats | None
) -> Verdict:
    if site is None:
        raise MissingSiteStats("subpage statistics required for the site")
    evidence = StuffingEvidence(
        hotwords_count=hotwords.count_in(visible_text(doc)),
        spam_subpages=site.spam_subpage_count,
    )
    return Verdict(AttackType.KEYWORD_STUFFING, stuffing_rule(evidence), evidence)


def detect_link_farm(visit_a: set[str], visit_b: set[str], wildcard: bool = False) -> Verdict:
    """Compare hyperlink sets from two visits of the same homepage/sitemap.

    The DNS wildcard result is recorded as corroborating evidence; the
    judgment itself is the churn-ratio rule.
    """
    if not visit_a or not visit_b:
        raise EmptyLinkSet("both visits must yield at least one hyperlink")
    a, b = set(visit_a), set(visit_b)
    evidence = LinkFarmEvidence(
        set_a_size=len(a),
        set_b_size=len(b),
        diff_size=len(a - b),
        wildcard_dns=wildcard,
    )
    return Verdict(AttackType.LINK_FARM, link_farm_rule(evidence), evidence)
