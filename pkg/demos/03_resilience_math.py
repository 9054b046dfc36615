#!/usr/bin/env python3
"""The quantitative toolkit: resilience, classifier scores, rank shifts,
and rewrite distances.

Phase resilience treats a layered search workflow as a chain of filters and
asks what fraction of attacks each layer intercepts among those reaching it.
Cumulative resilience composes the layers by survival, which is how a 15.7%
gate followed by a 98.2% filter and an 85.2% check adds up to 99.78%.
"""

from seoaudit.metrics import (
    ConfusionMatrix,
    RewriteDistance,
    bucketize,
    classifier_metrics,
    cumulative_resilience,
    rank_shift,
    rewrite_distance,
)

print("== cumulative resilience from per-phase rates ==")
phases = (0.157, 0.982, 0.852)
totals = cumulative_resilience(phases)
for name, rate, total in zip(("understanding", "retrieval", "summarizing"), phases, totals):
    print(f"  {name:13s} blocks {rate:6.1%} of what reaches it -> {total:7.2%} blocked so far")
survival = (1 - phases[0]) * (1 - phases[1]) * (1 - phases[2])
print(f"  check: 1 - survival product = {1 - survival:.2%}")

print("\n== classifier evaluation from a confusion matrix ==")
matrix = ConfusionMatrix(tp=87, fn=5, fp=13, tn=95)
scores = classifier_metrics(matrix)
print(f"  accuracy {scores.accuracy:.1%}  precision {scores.precision:.1%}  "
      f"recall {scores.recall:.1%}  F1 {scores.f1:.1%}")

print("\n== relative rank shift between two result lists ==")
engine_list = ["https://a.test/", "https://b.test/", "https://c.test/", "https://d.test/"]
ai_list = ["https://c.test/", "https://a.test/", "https://x.test/", "https://b.test/"]
for record in rank_shift(engine_list, ai_list):
    print(f"  {record.url:18s} {record.rank_google_rel} -> {record.rank_llm_rel}  "
          f"delta {record.delta:+d} ({record.direction})")

print("\n== how far a query rewrite drifted ==")
pairs = [
    ("best budget noise cancelling headphones", "best budget noise cancelling headphones"),
    ("best budget noise cancelling headphones", "affordable noise cancelling headphones review"),
    ("best budget noise cancelling headphones", "quiet comfortable earmuffs for studying"),
]
for original, rewritten in pairs:
    dist = rewrite_distance(original, rewritten)
    print(f"  std={dist.std:.3f} ed={dist.ed:.3f}  {rewritten!r}")

print("\n== success rates bucketed by semantic (STD) and syntactic (ED) drift ==")
records = [
    (RewriteDistance(std=0.05, ed=0.08), True),
    (RewriteDistance(std=0.05, ed=0.09), False),
    (RewriteDistance(std=0.08, ed=0.30), False),
    (RewriteDistance(std=0.15, ed=0.40), False),
    (RewriteDistance(std=0.30, ed=0.70), False),
    (RewriteDistance(std=0.05, ed=0.10), True),  # boundary: lands in (0, 0.1]
]
print(bucketize(records).to_markdown())
