#!/usr/bin/env python3
"""Generate the nine adversarial page families and inspect their effects.

Every variant derives from the same seeded base product page, so comparing a
variant's feature profile against the blank baseline isolates exactly what
the technique changed. Content comes from template pools — regenerating with
the same seed reproduces every byte.
"""

import tempfile
from pathlib import Path

from seoaudit.attackgen import (
    CorpusSpec,
    Technique,
    TechniqueParams,
    build_corpus,
    generate_variant,
    make_base_content,
    make_news_text,
)
from seoaudit.features import extract_features
from seoaudit.page import parse_html

base = make_base_content(seed=2026)
print(f"base product: {base.product}")
print(f"sections: {[s.heading for s in base.sections]}")

url = "https://shop.example.test/demo/"
params = TechniqueParams(news_text=make_news_text(seed=2026))

print("\n== feature deltas against the blank baseline ==")
blank = generate_variant(base, Technique.BLANK, params)
baseline = extract_features(parse_html(blank.html.encode(), url)).to_dict()
header = f"{'technique':28s}" + "".join(f"{k[:10]:>12s}" for k in baseline)
print(header)
print(f"{'blank (baseline)':28s}" + "".join(f"{v:>12.2f}" for v in baseline.values()))
for technique in Technique:
    if technique == Technique.BLANK:
        continue
    variant = generate_variant(base, technique, params)
    profile = extract_features(parse_html(variant.html.encode(), url)).to_dict()
    deltas = "".join(f"{profile[k] - baseline[k]:>+12.2f}" for k in baseline)
    print(f"{technique.value:28s}{deltas}")
print("(internal_links shows no delta here: mutual links are filled in by")
print(" link_network once the whole site set exists, as in build_corpus below)")

print("\n== a stuffed page embeds predicted query rewrites ==")
stuffed = generate_variant(base, Technique.REWRITTEN_QUERY_STUFFING, params)
for query in stuffed.manifest["stuffed_queries"][:5]:
    print(f"  {query}")

print("\n== building a small corpus on disk ==")
with tempfile.TemporaryDirectory() as tmp:
    spec = CorpusSpec(out_dir=Path(tmp) / "corpus", sites_per_technique=3, seed=2026)
    manifest = build_corpus(spec)
    print(f"  wrote {len(manifest['pages'])} pages "
          f"({len(manifest['techniques'])} techniques x {manifest['sites_per_technique']} sites)")
    linked = [p for p in manifest["pages"] if p["technique"] == "internal_links"]
    print(f"  mutual links per internal_links page: {linked[0]['params']['linked_sites']}")
    print(f"  first page hash: {manifest['pages'][0]['sha256'][:16]}... "
          "(identical on every rerun with this seed)")
