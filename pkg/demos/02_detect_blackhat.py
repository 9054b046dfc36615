#!/usr/bin/env python3
"""Run the five black-hat SEO detectors on small worked examples.

Each detector separates measurement from judgment: it first builds an
evidence record (similarities, counts, probabilities), then applies a fixed
threshold rule. The evidence stays on the verdict so every decision can be
audited afterwards.
"""

from seoaudit.detectors import (
    AuthorityList,
    Hop,
    HotwordList,
    QueryClass,
    RedirectChain,
    RedirectMechanism,
    SiteStats,
    cloaking_similarities,
    detect_cloaking,
    detect_keyword_stuffing,
    detect_link_farm,
    detect_redirection,
    detect_semantic_confusion,
)
from seoaudit.page import SnapshotPair, parse_html
from seoaudit.textscore import BagOfWordsScorer, DEFAULT_TOPIC_CLASSES

# A desk-scale scorer: one seed document per topic plus tiny malicious and
# benign corpora. Real deployments train on larger labeled sets.
scorer = BagOfWordsScorer(
    topic_docs={name: [f"{name} article about {name} matters"] for name in DEFAULT_TOPIC_CLASSES},
    malicious_docs=["casino jackpot bonus spins wager freebet stake bet win lucky chips payout"],
    benign_docs=["weather garden recipe hiking trail museum library concert"],
)

URL = "https://suspect.example.test/"

print("== 1. semantic confusion: legitimate-looking text hiding promotion ==")
confusing = parse_html(
    b"<p>news article news report news update news desk news wire news brief "
    b"news roundup news matters casino jackpot bonus spins wager freebet "
    b"stake bet win lucky chips</p>",
    URL,
)
verdict = detect_semantic_confusion(confusing, scorer)
probs = verdict.evidence.probabilities
print(f"  max topic prob {probs.max_topic:.3f}, malicious prob {probs.prob_malicious:.3f}")
print(f"  flagged: {verdict.flagged}  (rule: both must exceed 0.9)")

print("\n== 2. redirection: reputable origin forwarding to malicious content ==")
authority = AuthorityList({"bigportal.com": 12})
chain = RedirectChain(
    hops=[
        Hop("https://bigportal.com/promo", RedirectMechanism.HTTP_3XX),
        Hop("https://landing.example.test/", None),
    ],
    origin_query_class=QueryClass.ILLEGAL,
)
landing = parse_html(
    b"<p>casino jackpot bonus spins wager freebet stake bet win lucky chips here</p>", URL
)
verdict = detect_redirection(chain, authority, scorer, landing)
print(f"  origin reputable: {verdict.evidence.origin_reputable}, "
      f"landing malicious prob {verdict.evidence.landing_prob_malicious:.3f}")
print(f"  flagged: {verdict.flagged}")

print("\n== 3. cloaking: crawler and user see different pages ==")
crawler_view = parse_html(
    b"<p>organic tea shop loose leaf oolong green herbal blends brewing notes</p>", URL
)
user_view = parse_html(
    b"<p>casino jackpot bonus spins wager freebet stake bet win lucky chips now</p>", URL
)
evidence = cloaking_similarities(
    SnapshotPair(crawler_view=crawler_view, user_view=user_view),
    serp_summary="casino jackpot bonus",
)
print(f"  signature_sim {evidence.signature_sim:.2f}, summary_sim {evidence.summary_sim:.2f}, "
      f"dom_sim {evidence.dom_sim:.2f}")
print(f"  flagged: {detect_cloaking(evidence).flagged}")

print("\n== 4. keyword stuffing: trending terms plus a spray of spam subpages ==")
hotwords = HotwordList([f"trend{i}" for i in range(20)])
stuffed = parse_html(
    (" ".join(f"trend{i}" for i in range(14)) + " filler text").encode(), URL
)
site = SiteStats(domain="suspect.example.test", subpage_count=900, spam_subpage_count=400)
verdict = detect_keyword_stuffing(stuffed, hotwords, site)
print(f"  hotwords found: {verdict.evidence.hotwords_count}, spam subpages: {verdict.evidence.spam_subpages}")
print(f"  flagged: {verdict.flagged}  (rule: >= 10 hotwords and >= 100 spam subpages)")

print("\n== 5. link farm: hyperlink churn between two visits ==")
visit_a = {f"https://farm.example.test/{i}" for i in range(10)}
visit_b = {f"https://farm.example.test/{i}" for i in range(6, 16)}
verdict = detect_link_farm(visit_a, visit_b, wildcard=True)
print(f"  |A|={verdict.evidence.set_a_size} |B|={verdict.evidence.set_b_size} "
      f"|A-B|={verdict.evidence.diff_size} ratio={verdict.evidence.ratio:.2f}")
print(f"  flagged: {verdict.flagged}  (wildcard DNS recorded as corroboration: "
      f"{verdict.evidence.wildcard_dns})")
