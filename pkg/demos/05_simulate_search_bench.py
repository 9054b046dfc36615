#!/usr/bin/env python3
"""End to end: generate attacks, index them, simulate the search workflow,
and measure which phase stops what.

The simulator realizes the three-phase workflow offline: a denylist intent
gate plus query rewriting, BM25 retrieval re-ranked by the four promoted-page
features, and summary reference selection that drops malicious or off-topic
candidates. Feeding query/target pairs through it yields phase traces, and
the harness turns traces into a resilience report.
"""

import tempfile
from pathlib import Path

from seoaudit.attackgen import CorpusSpec, build_corpus
from seoaudit.detectors import AttackType, QueryClass
from seoaudit.harness import BenchDataset, emit_report, run_attack_eval, run_bench
from seoaudit.metrics import QuerySitePair
from seoaudit.pipeline import CorpusIndex, PipelineConfig, run_pipeline

with tempfile.TemporaryDirectory() as tmp:
    corpus_dir = Path(tmp) / "corpus"
    manifest = build_corpus(CorpusSpec(out_dir=corpus_dir, sites_per_technique=3, seed=7))
    index = CorpusIndex.build_from_directory(corpus_dir)
    print(f"indexed {index.doc_count} generated pages")

    product = manifest["pages"][0]["params"]["product"]
    cfg = PipelineConfig(denylist=("contraband",))

    print(f"\n== one query about '{product}', traced through the three phases ==")
    target = manifest["pages"][0]["url"]
    pair = QuerySitePair(
        query=f"Best {product} Review",
        query_class=QueryClass.HOT,
        target_url=target,
        attack_type=AttackType.KEYWORD_STUFFING,
    )
    trace = run_pipeline(pair, index, cfg)
    print(f"  rewritten: {trace.rewritten_queries}")
    print(f"  retrieved {len(trace.retrieval_references)} references, "
          f"kept {len(trace.summary_references)} in the summary")
    print(f"  target retrieved: {target in trace.retrieval_references}")

    print("\n== a denylisted query is refused at understanding ==")
    refused = run_pipeline(
        QuerySitePair(
            query="contraband service plan",
            query_class=QueryClass.ILLEGAL,
            target_url=target,
            attack_type=AttackType.REDIRECTION,
        ),
        index,
        cfg,
    )
    print(f"  refused: {refused.refused}, references: {refused.retrieval_references}")

    print("\n== a miniature benchmark over mixed outcomes ==")
    pairs = [
        pair,
        QuerySitePair(
            query="contraband deals",
            query_class=QueryClass.ILLEGAL,
            target_url=target,
            attack_type=AttackType.SEMANTIC_CONFUSION,
        ),
        QuerySitePair(
            query="service plan setup",
            query_class=QueryClass.HOT,
            target_url="https://unindexed.example.test/",
            attack_type=AttackType.LINK_FARM,
        ),
    ]
    report = run_bench(BenchDataset(name="demo", pairs=pairs), index, cfg, trials=3)
    print(emit_report(report, "markdown"))

    print("\n== which generated technique wins retrieval slots? ==")
    attack_report = run_attack_eval(corpus_dir, "service plan setup", index, cfg, trials=5)
    print(emit_report(attack_report, "markdown"))
