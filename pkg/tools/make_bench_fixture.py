#!/usr/bin/env python3
"""Regenerate the bundled bench fixture under tests/fixtures/bench/.

The fixture is engineered so every pair's phase outcome is known by
construction:

* 4 pairs carry a denylisted query            -> blocked at understanding
* 4 pairs target URLs absent from the corpus  -> blocked at retrieval
* 4 pairs target pages sharing no token with
  their query                                 -> blocked at retrieval
* 3 pairs target casino pages the scorer
  flags as malicious                          -> blocked at summarizing
* 5 pairs target clean pages their query
  matches exactly                             -> never blocked

Overall resilience is therefore 4/20, 8/16, 3/8 = (0.20, 0.50, 0.375).
The golden report is frozen from one verified run; the acceptance suite
asserts both byte equality and these derived values.
"""

import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURE_DIR = ROOT / "tests" / "fixtures" / "bench"
BASE_URL = "https://bench.example.test"

CASINO_TAIL = (
    "casino jackpot bonus spins wager roulette blackjack slots payout "
    "freebet stake bet win lucky chips"
)

# (slug-ish title, body text). Order defines page ids p00..p59.
RETAINED_PAGES = [
    ("Quartzlane Kettle", "quartzlane kettle descaling guide brewing pour spout care limescale rinse"),
    ("Fernwood Desk", "fernwood desk assembly walkthrough drawer alignment oak finish bolt torque"),
    ("Bluecrest Lantern", "bluecrest lantern battery runtime camping glow settings dimming charge"),
    ("Maplecore Blender", "maplecore blender smoothie jar blade cleaning speed presets pulse crush"),
    ("Silverpine Monitor", "silverpine monitor color calibration stand height profile contrast panel"),
]

TOPIC_PAGES = [
    ("Coppervale Toaster", "coppervale toaster crumb tray browning slots bagel defrost lever"),
    ("Ashgrove Speaker", "ashgrove speaker pairing bass driver treble firmware equalizer"),
    ("Winterfell Duvet", "winterfell duvet tog rating filling stitching washing airflow"),
    ("Larkspur Keyboard", "larkspur keyboard switches keycaps layout firmware macros backlight"),
    ("Roseline Teapot", "roseline teapot infuser steeping porcelain spout handle cozy"),
]

MALICIOUS_PAGES = [
    ("Velvetspin Offers", f"velvetspin {CASINO_TAIL}"),
    ("Goldreel Offers", f"goldreel {CASINO_TAIL}"),
    ("Nightace Offers", f"nightace {CASINO_TAIL}"),
]

NAT_TARGET_PAGES = [
    ("Vintage Typewriters", "vintage typewriter ribbon platen repair oiling keys carriage return"),
    ("Ceramic Vases", "ceramic vase glaze kiln firing pottery wheel slip trimming"),
    ("Antique Clocks", "antique clock pendulum escapement winding mainspring chime regulator"),
    ("Model Trains", "model train layout track ballast scenery locomotive coupler gauge"),
]

THEMES = [
    ("Harbor Festival", "harbor festival parade schedule floats pier fireworks vendors"),
    ("City Marathon", "city marathon route closures pacing hydration stations bib corral"),
    ("Garden Compost", "spring garden compost tips mulch layering worms turning moisture"),
    ("Night Market", "night market food stalls skewers lanterns crowds vendors tasting"),
    ("Winter Tires", "winter tire comparison tread siping studs compound braking snow"),
    ("Travel Packing", "budget travel packing list cubes layering toiletries carry limits"),
    ("Office Lighting", "home office lighting ideas desk glare temperature placement shadows"),
    ("Rain Barrels", "rainwater barrel setup downspout diverter overflow mosquito screen spigot"),
]

COMMUNITY_PAGES = [
    ("Library Hours", "library reading room hours quiet study renewals catalog volunteers"),
    ("Bakery Notes", "sourdough bakery starter crumb proofing oven steam scoring"),
    ("Bus Routes", "bus route seven timetable stops transfers fares weekend service"),
    ("Clock Tower", "clock tower restoration scaffolding masonry bells repainting"),
    ("Sapling Drive", "volunteers planted saplings ridge soil watering stakes mulching"),
    ("Pool Opening", "community pool opening lanes lessons lifeguards membership"),
    ("Chess Club", "chess club ladder openings endgames puzzles tournament pairings"),
    ("Bridge Repair", "footbridge repair decking railings closure detour inspection"),
    ("Choir Season", "choir season rehearsals repertoire soloists concert tickets"),
    ("Farmers Market", "farmers market produce stalls honey cheese flowers parking"),
    ("Art Walk", "art walk galleries studios openings sculpture mural tours"),
]


def _page_entries():
    pages = []
    pages.extend(RETAINED_PAGES)
    pages.extend(TOPIC_PAGES)
    pages.extend(MALICIOUS_PAGES)
    pages.extend(NAT_TARGET_PAGES)
    for title, text in THEMES:
        for i in range(1, 5):
            pages.append((f"{title} {i}", f"{text} update{i} notes{i}"))
    pages.extend(COMMUNITY_PAGES)
    assert len(pages) == 60, len(pages)
    return pages


def _page_html(title: str, text: str) -> str:
    words = text.split()
    half = len(words) // 2
    return (
        "<!DOCTYPE html>\n<html>\n<head>\n"
        '<meta charset="utf-8">\n'
        f"<title>{title}</title>\n"
        "</head>\n<body>\n"
        f"<h1>{title}</h1>\n"
        f"<p>{' '.join(words[:half])}</p>\n"
        f"<p>{' '.join(words[half:])}</p>\n"
        "</body>\n</html>\n"
    )


def _url(i: int) -> str:
    return f"{BASE_URL}/p/{i:02d}/"


def _dataset_rows():
    retained = [_url(i) for i in range(5)]
    malicious = [_url(i) for i in range(10, 13)]
    nat = [_url(i) for i in range(13, 17)]
    offsite = [f"https://offsite.example.test/x{i}" for i in range(1, 5)]
    refused_targets = [_url(i) for i in range(49, 53)]

    retained_queries = [
        "quartzlane kettle descaling guide",
        "fernwood desk assembly walkthrough",
        "bluecrest lantern battery runtime",
        "maplecore blender smoothie presets",
        "silverpine monitor color calibration",
    ]
    malicious_queries = [
        "velvetspin casino bonus spins",
        "goldreel casino jackpot payout",
        "nightace casino freebet stake",
    ]
    nat_queries = [
        "harbor festival parade schedule",
        "city marathon route closures",
        "spring garden compost tips",
        "night market food stalls",
    ]
    offsite_queries = [
        "winter tire comparison",
        "budget travel packing list",
        "home office lighting ideas",
        "rainwater barrel setup",
    ]
    refused_queries = [
        "contraband watch deals",
        "cheap contraband phones",
        "contraband ticket reseller",
        "buy contraband sneakers",
    ]

    # pair layout per attack type: see module docstring
    rows = [
        # semantic_confusion: refused, malicious, retained, natural-miss
        (refused_queries[0], "illegal", refused_targets[0], "semantic_confusion"),
        (malicious_queries[0], "illegal", malicious[0], "semantic_confusion"),
        (retained_queries[0], "hot", retained[0], "semantic_confusion"),
        (nat_queries[0], "hot", nat[0], "semantic_confusion"),
        # redirection: refused, offsite, malicious, retained
        (refused_queries[1], "illegal", refused_targets[1], "redirection"),
        (offsite_queries[0], "hot", offsite[0], "redirection"),
        (malicious_queries[1], "illegal", malicious[1], "redirection"),
        (retained_queries[1], "benign", retained[1], "redirection"),
        # cloaking: refused, offsite, natural-miss, retained
        (refused_queries[2], "illegal", refused_targets[2], "cloaking"),
        (offsite_queries[1], "hot", offsite[1], "cloaking"),
        (nat_queries[1], "hot", nat[1], "cloaking"),
        (retained_queries[2], "benign", retained[2], "cloaking"),
        # keyword_stuffing: refused, offsite, natural-miss, retained
        (refused_queries[3], "illegal", refused_targets[3], "keyword_stuffing"),
        (offsite_queries[2], "hot", offsite[2], "keyword_stuffing"),
        (nat_queries[2], "hot", nat[2], "keyword_stuffing"),
        (retained_queries[3], "hot", retained[3], "keyword_stuffing"),
        # link_farm: offsite, malicious, natural-miss, retained
        (offsite_queries[3], "hot", offsite[3], "link_farm"),
        (malicious_queries[2], "illegal", malicious[2], "link_farm"),
        (nat_queries[3], "hot", nat[3], "link_farm"),
        (retained_queries[4], "benign", retained[4], "link_farm"),
    ]
    assert len(rows) == 20
    return rows


SCORER_MANIFEST = {
    "schema_version": 1,
    "topics": {
        name: [f"{name} doc{name} text{name} entry{name}"]
        for name in (
            "news", "sports", "technology", "health", "finance", "education",
            "travel", "entertainment", "shopping", "food", "science",
            "politics", "arts", "lifestyle",
        )
    },
    "malicious": [CASINO_TAIL],
    "benign": ["weather meadow rainfall sunshine orchard pasture brook hillside"],
}

CONFIG = {
    "schema_version": 1,
    "denylist": ["contraband"],
    "rewriter_mode": "normalize",
    "k_rewrites": 1,
    "retrieval_depth": 10,
    "summary_size": 5,
    "alpha": 0.7,
    "beta": 0.3,
    "feature_weights": {
        "text_fragmentation": 0.25,
        "dom_depth": 0.25,
        "internal_links": 0.25,
        "multimodal_count": 0.25,
    },
    "malicious_cutoff": 0.9,
    "relevance_floor": 0.2,
    "bm25_k1": 1.2,
    "bm25_b": 0.75,
    "scope_domains": [],
    "seed": 42,
}


def main():
    if FIXTURE_DIR.exists():
        shutil.rmtree(FIXTURE_DIR)
    corpus_dir = FIXTURE_DIR / "corpus"
    corpus_dir.mkdir(parents=True)

    manifest_pages = []
    for i, (title, text) in enumerate(_page_entries()):
        rel = f"p{i:02d}/index.html"
        path = corpus_dir / rel
        path.parent.mkdir(parents=True)
        path.write_text(_page_html(title, text), "utf-8")
        manifest_pages.append({"path": rel, "url": _url(i), "title": title})
    (corpus_dir / "manifest.json").write_text(
        json.dumps({"schema_version": 1, "base_url": BASE_URL, "pages": manifest_pages}, indent=2)
    )

    rows = _dataset_rows()
    lines = "".join(
        json.dumps(
            {"query": q, "query_class": qc, "target_url": t, "attack_type": at},
            ensure_ascii=False,
        )
        + "\n"
        for q, qc, t, at in rows
    )
    (FIXTURE_DIR / "dataset.jsonl").write_text(lines, "utf-8")
    counts = {}
    for _, _, _, at in rows:
        counts[at] = counts.get(at, 0) + 1
    (FIXTURE_DIR / "dataset.manifest.json").write_text(
        json.dumps(
            {
                "schema_version": 1,
                "name": "bench-fixture",
                "created": "2026-08-08",
                "total": len(rows),
                "counts": dict(sorted(counts.items())),
            },
            indent=2,
        )
    )
    (FIXTURE_DIR / "scorer_manifest.json").write_text(json.dumps(SCORER_MANIFEST, indent=2))
    (FIXTURE_DIR / "config.json").write_text(json.dumps(CONFIG, indent=2))
    print(f"fixture written under {FIXTURE_DIR}")

    if "--golden" in sys.argv:
        sys.path.insert(0, str(ROOT / "src"))
        from seoaudit.harness import BenchDataset, emit_report, run_bench
        from seoaudit.pipeline import CorpusIndex, PipelineConfig
        from seoaudit.textscore import BagOfWordsScorer

        scorer = BagOfWordsScorer.from_file(FIXTURE_DIR / "scorer_manifest.json")
        index = CorpusIndex.build_from_directory(corpus_dir, scorer=scorer)
        cfg = PipelineConfig.from_file(FIXTURE_DIR / "config.json")
        dataset = BenchDataset.load(FIXTURE_DIR / "dataset.jsonl")
        report = run_bench(dataset, index, cfg, trials=3)
        (FIXTURE_DIR / "golden_report.json").write_text(emit_report(report, "json") + "\n")
        print("golden report written")
        print(emit_report(report, "markdown"))


if __name__ == "__main__":
    main()
