"""Deterministic generation of adversarial page-variant corpora.

Nine page families are produced from a common base-content model: a blank
baseline (the base emitted unmodified), a semantic-confusion baseline
(promotion inserted into benign news text), and seven optimization
techniques, one per workflow weakness they target:

* rewritten_query_stuffing — embed predicted query rewrites in the page;
* internal_links           — mutual "Useful Links" across a site set;
* multimodal               — double the image count;
* nested                   — add a third heading level under every section;
* segmented                — split paragraphs until the mean halves;
* relevance                — drop off-topic sections, add product copy;
* qa_format                — preface each paragraph with a question line.

Content comes from seeded template pools, never from a live generator, so a
corpus regenerates byte-identically from its seed, and every emitted page
carries a visible testing banner.
"""

from __future__ import annotations

import hashlib
import html as html_mod
import json
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .errors import IoFailure, MissingParams, NonEmptyOutputDir, TooFewSites
from .pipeline import rewrite_queries
from .textutil import dedupe, split_sentences, token_count

BANNER_TEXT = "For Testing Purposes Only"

CORPUS_SCHEMA_VERSION = 1


class Technique(str, Enum):
    BLANK = "blank"
    SEMANTIC_CONFUSION_BASELINE = "semantic_confusion_baseline"
    REWRITTEN_QUERY_STUFFING = "rewritten_query_stuffing"
    INTERNAL_LINKS = "internal_links"
    MULTIMODAL = "multimodal"
    NESTED = "nested"
    SEGMENTED = "segmented"
    RELEVANCE = "relevance"
    QA_FORMAT = "qa_format"


ALL_TECHNIQUES = tuple(Technique)


# --- content model ---


@dataclass
class ImageSpec:
    src: str
    alt: str


@dataclass
class Section:
    level: int
    heading: str
    paragraphs: list[str] = field(default_factory=list)
    irrelevant: bool = False
    subsections: list["Section"] = field(default_factory=list)

    def copy(self) -> "Section":
        return Section(
            level=self.level,
            heading=self.heading,
            paragraphs=list(self.paragraphs),
            irrelevant=self.irrelevant,
            subsections=[s.copy() for s in self.subsections],
        )


@dataclass
class BaseContent:
    """Product page source: brand + entity noun, sections, image descriptors."""

    brand: str
    entity: str
    sections: list[Section]
    images: list[ImageSpec] = field(default_factory=list)
    useful_links_slot: bool = True

    def __post_init__(self):
        if not self.sections:
            raise ValueError("base content needs at least one section")

    @property
    def product(self) -> str:
        return f"{self.brand} {self.entity}"


@dataclass
class PageContent:
    """Emission model for one page (transformed base plus extras)."""

    title: str
    description: str
    sections: list[Section]
    images: list[ImageSpec]
    useful_links: list[tuple[str, str]] = field(default_factory=list)
    stuffed_queries: list[str] = field(default_factory=list)


@dataclass
class TechniqueParams:
    """Transform parameters; unused fields are ignored by other techniques."""

    seed_queries: tuple[str, ...] | None = None
    n_stuffed_queries: int = 10
    qa_template: str | None = "Q: Is it true that {claim}?"
    news_title: str = "Community Update"
    news_text: str | None = None
    promo_text: str | None = None
    seed: int = 0


@dataclass
class SiteVariant:
    technique: Technique
    html: str
    manifest: dict
    banner_present: bool = True
    site_id: str = ""
    url: str = ""
    content: PageContent | None = field(default=None, repr=False, compare=False)


# --- template pools ---

BRAND_POOL = (
    "Arvexa", "Bluonis", "Caldera", "Dynovia", "Elverra", "Fennmark", "Glacien",
    "Halverton", "Ivoria", "Junivex", "Kelmora", "Lumastra", "Morvena", "Nexaris",
    "Orlith", "Pavonne", "Quillon", "Rivetta", "Solvane", "Tervalon",
)

ENTITY_POOL = (
    "Lamp", "Kettle", "Backpack", "Blender", "Monitor", "Desk Chair",
    "Thermostat", "Speaker", "Notebook", "Water Bottle", "Coffee Grinder",
    "Air Purifier",
)

ADJECTIVE_POOL = (
    "quiet", "durable", "compact", "versatile", "energy-efficient", "lightweight",
    "responsive", "balanced", "refined", "dependable", "modular", "ergonomic",
)

BENEFIT_POOL = (
    "daily routines", "small workspaces", "long commutes", "family kitchens",
    "focused work sessions", "weekend trips", "shared apartments", "busy mornings",
)

SENTENCE_TEMPLATES = (
    "The {product} pairs a {adj} build with controls that stay out of the way.",
    "Owners pick the {product} for {benefit} because setup takes minutes.",
    "Every {product} ships with a two-year service plan and spare fittings.",
    "A {adj} finish keeps the {product} looking new after months of use.",
    "The {product} was tuned for {benefit} without raising its price point.",
    "Reviewers call the {product} {adj} and easy to recommend.",
    "Maintenance on the {product} is limited to an occasional wipe-down.",
    "The {product} includes a {adj} mode that most rivals reserve for premium tiers.",
    "For {benefit}, the {product} holds its settings between sessions.",
    "Materials in the {product} are sourced from audited suppliers.",
    "The {product} keeps a {adj} profile that fits narrow shelving.",
    "Firmware updates reach the {product} automatically each quarter.",
)

TEAM_SENTENCES = (
    "Our team of twelve shares a workshop near the old harbor.",
    "Most of us joined from repair trades rather than design school.",
    "We answer support mail ourselves, usually within a day.",
    "The founders still test every production batch by hand.",
)

HISTORY_SENTENCES = (
    "The company started in a rented garage over a decade ago.",
    "Early models were sold only at regional maker fairs.",
    "A move to the current factory doubled output in one year.",
    "The original sketchbook of designs hangs in the lobby.",
)

NEWS_SENTENCES = (
    "The town council approved the riverside path extension on Tuesday.",
    "Volunteers planted three hundred saplings along the north ridge.",
    "The library's reading week drew record attendance this spring.",
    "A local bakery won the regional sourdough championship again.",
    "Bus route seven returns to its usual schedule next Monday.",
    "The harbor festival committee published this year's full program.",
    "Repairs to the clock tower finished two weeks ahead of plan.",
    "The community garden opened twenty new plots for residents.",
)

_SECTION_PLAN = (
    # (heading, paragraph count, irrelevant)
    ("Overview", 2, False),
    ("Key Features", 2, False),
    ("Specifications", 1, False),
    ("How to Use", 2, False),
    ("Our Team", 1, True),
    ("Company History", 1, True),
)

_IRRELEVANT_SENTENCES = {"Our Team": TEAM_SENTENCES, "Company History": HISTORY_SENTENCES}


def _make_paragraph(rng: random.Random, product: str, sentences: int) -> str:
    parts = []
    for _ in range(sentences):
        template = rng.choice(SENTENCE_TEMPLATES)
        parts.append(
            template.format(
                product=product,
                adj=rng.choice(ADJECTIVE_POOL),
                benefit=rng.choice(BENEFIT_POOL),
            )
        )
    return " ".join(parts)


def make_base_content(seed: int | str, brand: str | None = None, entity: str | None = None) -> BaseContent:
    """Seeded product page: same seed, same content, byte for byte."""
    rng = random.Random(f"base|{seed}")
    brand = brand or rng.choice(BRAND_POOL)
    entity = entity or rng.choice(ENTITY_POOL)
    product = f"{brand} {entity}"
    sections = []
    for heading, n_paragraphs, irrelevant in _SECTION_PLAN:
        paragraphs = []
        for _ in range(n_paragraphs):
            if irrelevant:
                pool = _IRRELEVANT_SENTENCES[heading]
                count = rng.randint(3, 4)
                paragraphs.append(" ".join(rng.choice(pool) for _ in range(count)))
            else:
                paragraphs.append(_make_paragraph(rng, product, rng.randint(3, 5)))
        sections.append(Section(level=2, heading=heading, paragraphs=paragraphs, irrelevant=irrelevant))
    slug = product.lower().replace(" ", "-")
    images = [ImageSpec(src=f"assets/{slug}-{i}.png", alt=f"{product} product photo {i}") for i in range(1, 4)]
    return BaseContent(brand=brand, entity=entity, sections=sections, images=images)


def make_news_text(seed: int | str, paragraphs: int = 3) -> str:
    """Seeded benign news copy for the semantic-confusion baseline."""
    rng = random.Random(f"news|{seed}")
    out = []
    for _ in range(paragraphs):
        count = rng.randint(3, 4)
        out.append(" ".join(rng.choice(NEWS_SENTENCES) for _ in range(count)))
    return "\n\n".join(out)


# --- HTML emission ---


def _esc(text: str) -> str:
    return html_mod.escape(text, quote=False)


def emit_html(content: PageContent) -> str:
    """Deterministic, self-contained HTML for a page content model."""
    out = [
        "<!DOCTYPE html>",
        "<html>",
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{_esc(content.title)}</title>",
        f'<meta name="description" content="{html_mod.escape(content.description, quote=True)}">',
        '<meta name="viewport" content="width=device-width, initial-scale=1">',
        "</head>",
        "<body>",
        f'<div class="banner">{_esc(BANNER_TEXT)}</div>',
        f"<h1>{_esc(content.title)}</h1>",
    ]
    for section in content.sections:
        out.extend(_emit_section(section))
    if content.images:
        out.append('<div class="gallery">')
        for img in content.images:
            out.append(
                f'<img src="{html_mod.escape(img.src, quote=True)}" alt="{html_mod.escape(img.alt, quote=True)}">'
            )
        out.append("</div>")
    if content.useful_links:
        out.append('<section class="useful-links">')
        out.append("<h2>Useful Links</h2>")
        for url, label in content.useful_links:
            out.append(f'<p><a href="{html_mod.escape(url, quote=True)}">{_esc(label)}</a></p>')
        out.append("</section>")
    if content.stuffed_queries:
        out.append('<section class="related-queries">')
        out.append("<h2>Related Searches</h2>")
        for query in content.stuffed_queries:
            out.append(f"<p>{_esc(query)}</p>")
        out.append("</section>")
    out.append("</body>")
    out.append("</html>")
    return "\n".join(out) + "\n"


def _emit_section(section: Section) -> list[str]:
    cls = "subsection" if section.level >= 3 else "section"
    out = [f'<section class="{cls}">']
    if section.heading:
        out.append(f"<h{section.level}>{_esc(section.heading)}</h{section.level}>")
    for paragraph in section.paragraphs:
        out.append(f"<p>{_esc(paragraph)}</p>")
    for sub in section.subsections:
        out.extend(_emit_section(sub))
    out.append("</section>")
    return out


def base_page_content(base: BaseContent) -> PageContent:
    return PageContent(
        title=base.product,
        description=f"{base.product}: overview, features, and usage notes.",
        sections=[s.copy() for s in base.sections],
        images=list(base.images),
    )


# --- transforms ---


def _paragraph_stats(sections: list[Section]) -> tuple[int, float]:
    counts = []
    stack = list(sections)
    while stack:
        section = stack.pop()
        counts.extend(token_count(p) for p in section.paragraphs)
        stack.extend(section.subsections)
    if not counts:
        return 0, 0.0
    return len(counts), sum(counts) / len(counts)


def _default_seed_queries(product: str) -> tuple[str, ...]:
    return (
        f"{product} review",
        f"best {product}",
        f"{product} price",
        f"{product} vs alternatives",
        f"is the {product} worth it",
    )


def _question_for(paragraph: str, template: str) -> str:
    first = split_sentences(paragraph)[0].rstrip(".!?")
    words = first.split()
    if words and words[0] in ("The", "A", "An", "This", "These", "Our", "It"):
        words[0] = words[0].lower()
    return template.format(claim=" ".join(words))


def generate_variant(base: BaseContent, technique: Technique, params: TechniqueParams | None = None) -> SiteVariant:
    """Apply one technique to a base content model and emit the page.

    Deterministic given (base, technique, params). The internal_links
    technique emits a draft whose Useful Links block is filled in later by
    link_network over the whole site set.
    """
    params = params or TechniqueParams()
    content = base_page_content(base)
    manifest: dict = {"technique": technique.value, "product": base.product}

    if technique == Technique.BLANK:
        pass

    elif technique == Technique.REWRITTEN_QUERY_STUFFING:
        seeds = params.seed_queries or _default_seed_queries(base.product)
        predicted: list[str] = []
        for query in seeds:
            predicted.extend(rewrite_queries(query, mode="expand", k=3))
        content.stuffed_queries = dedupe(predicted)[: params.n_stuffed_queries]
        manifest["stuffed_queries"] = list(content.stuffed_queries)

    elif technique == Technique.INTERNAL_LINKS:
        manifest["linked_sites"] = 0  # populated by link_network

    elif technique == Technique.MULTIMODAL:
        before = len(content.images)
        content.images = content.images + [
            ImageSpec(src=img.src, alt=f"{img.alt} (detail)") for img in content.images
        ]
        manifest["images_before"] = before
        manifest["images_after"] = len(content.images)

    elif technique == Technique.NESTED:
        added = 0
        for section in content.sections:
            if section.level != 2:
                continue
            keep = math.ceil(len(section.paragraphs) / 2) if len(section.paragraphs) > 1 else 0
            moved = section.paragraphs[keep:]
            section.paragraphs = section.paragraphs[:keep]
            section.subsections.append(
                Section(level=3, heading=f"More about {section.heading}", paragraphs=moved)
            )
            added += 1
        manifest["subsections_added"] = added

    elif technique == Technique.SEGMENTED:
        n_before, mean_before = _paragraph_stats(content.sections)
        target = mean_before / 2.0
        unsplittable: list[str] = []
        for section in content.sections:
            section.paragraphs = _segment_paragraphs(section, target, unsplittable)
        n_after, mean_after = _paragraph_stats(content.sections)
        manifest.update(
            {
                "mean_tokens_before": mean_before,
                "mean_tokens_after": mean_after,
                "target_mean_tokens": target,
                "paragraphs_before": n_before,
                "paragraphs_after": n_after,
                "unsplittable": unsplittable,
            }
        )

    elif technique == Technique.RELEVANCE:
        removed = [s.heading for s in content.sections if s.irrelevant]
        content.sections = [s for s in content.sections if not s.irrelevant]
        if not content.sections:
            content.sections = [Section(level=2, heading="Overview")]
        rng = random.Random(f"relevance|{params.seed}|{base.product}")
        extra = [_make_paragraph(rng, base.product, rng.randint(3, 4)) for _ in range(2)]
        content.sections[0].paragraphs.extend(extra)
        manifest["sections_removed"] = removed
        manifest["paragraphs_added"] = len(extra)

    elif technique == Technique.QA_FORMAT:
        if params.qa_template is None:
            raise MissingParams("qa_format requires a question template")
        questions = 0
        for section in content.sections:
            for target in (section, *section.subsections):
                interleaved: list[str] = []
                for paragraph in target.paragraphs:
                    if paragraph.strip():
                        interleaved.append(_question_for(paragraph, params.qa_template))
                        questions += 1
                    interleaved.append(paragraph)
                target.paragraphs = interleaved
        manifest["questions_added"] = questions

    elif technique == Technique.SEMANTIC_CONFUSION_BASELINE:
        if params.news_text is None:
            raise MissingParams("semantic_confusion_baseline requires news_text")
        promo = params.promo_text or (
            f"Limited offer: the {base.product} is in stock now with free shipping "
            f"and a bundled starter kit. Order today to lock in the launch price."
        )
        news_paragraphs = [p.strip() for p in params.news_text.split("\n\n") if p.strip()]
        merged = news_paragraphs[:1] + [promo] + news_paragraphs[1:]
        content.title = params.news_title
        content.description = params.news_title
        content.sections = [Section(level=0, heading="", paragraphs=merged)]
        content.images = []
        manifest["promo_inserted_after_paragraph"] = 1

    else:  # pragma: no cover - the enum is closed
        raise ValueError(f"unknown technique: {technique}")

    html = emit_html(content)
    return SiteVariant(technique=technique, html=html, manifest=manifest, content=content)


def _segment_paragraphs(section: Section, target: float, unsplittable: list[str]) -> list[str]:
    out: list[str] = []
    for paragraph in section.paragraphs:
        sentences = split_sentences(paragraph)
        if len(sentences) == 1:
            if token_count(paragraph) > target:
                unsplittable.append(f"{section.heading}: {paragraph[:40]}")
            out.append(paragraph)
            continue
        chunk: list[str] = []
        chunk_tokens = 0
        for sentence in sentences:
            n = token_count(sentence)
            if chunk and chunk_tokens + n > target:
                out.append(" ".join(chunk))
                chunk, chunk_tokens = [], 0
            chunk.append(sentence)
            chunk_tokens += n
        if chunk:
            out.append(" ".join(chunk))
    for sub in section.subsections:
        sub.paragraphs = _segment_paragraphs(sub, target, unsplittable)
    return out


def link_network(sites: list[SiteVariant]) -> list[SiteVariant]:
    """Mutually link every site to every other one via its Useful Links block.

    Sites must have their URLs assigned; each page gains len(sites) - 1
    links, forming the complete digraph minus self-loops.
    """
    if len(sites) < 2:
        raise TooFewSites(f"mutual linking needs >= 2 sites, got {len(sites)}")
    if any(not s.url for s in sites):
        raise MissingParams("site URLs must be assigned before linking")
    linked = []
    for site in sites:
        content = site.content
        if content is None:
            raise MissingParams("site variants must carry their content model")
        content.useful_links = [
            (other.url, other.content.title if other.content else other.url)
            for other in sites
            if other is not site
        ]
        manifest = dict(site.manifest)
        manifest["linked_sites"] = len(sites) - 1
        linked.append(replace(site, html=emit_html(content), manifest=manifest, content=content))
    return linked


# --- corpus emission ---


@dataclass
class CorpusSpec:
    """What to generate and where to put it."""

    out_dir: str | Path
    sites_per_technique: int = 50
    techniques: tuple[Technique, ...] = ALL_TECHNIQUES
    seed: int = 0
    base_url: str = "https://shop.example.test"
    force: bool = False

    @classmethod
    def from_file(cls, path: str | Path) -> "CorpusSpec":
        obj = json.loads(Path(path).read_text("utf-8"))
        return cls(
            out_dir=obj["out_dir"],
            sites_per_technique=obj.get("sites_per_technique", 50),
            techniques=tuple(Technique(t) for t in obj.get("techniques", [t.value for t in ALL_TECHNIQUES])),
            seed=obj.get("seed", 0),
            base_url=obj.get("base_url", "https://shop.example.test"),
            force=obj.get("force", False),
        )


def generate_corpus(spec: CorpusSpec) -> list[SiteVariant]:
    """All variants of a corpus spec, URLs assigned, links resolved."""
    variants: list[SiteVariant] = []
    base_url = spec.base_url.rstrip("/")
    for technique in spec.techniques:
        drafts = []
        for i in range(spec.sites_per_technique):
            base = make_base_content(f"{spec.seed}|{i}")
            params = TechniqueParams(
                seed=spec.seed,
                news_text=make_news_text(f"{spec.seed}|{i}")
                if technique == Technique.SEMANTIC_CONFUSION_BASELINE
                else None,
            )
            variant = generate_variant(base, technique, params)
            variant.site_id = f"site-{i:03d}"
            variant.url = f"{base_url}/{technique.value}/{variant.site_id}/"
            drafts.append(variant)
        if technique == Technique.INTERNAL_LINKS and len(drafts) >= 2:
            drafts = link_network(drafts)
        variants.extend(drafts)
    return variants


def build_corpus(spec: CorpusSpec) -> dict:
    """Write the corpus tree and its manifest; returns the manifest.

    Layout: <out_dir>/<technique>/<site-id>/index.html plus manifest.json.
    Refuses to write into a non-empty directory unless spec.force is set.
    """
    root = Path(spec.out_dir)
    if root.exists() and any(root.iterdir()) and not spec.force:
        raise NonEmptyOutputDir(f"{root} is not empty (use force to overwrite)")
    variants = generate_corpus(spec)
    pages = []
    try:
        root.mkdir(parents=True, exist_ok=True)
        for variant in variants:
            rel = Path(variant.technique.value) / variant.site_id / "index.html"
            path = root / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            data = variant.html.encode("utf-8")
            path.write_bytes(data)
            pages.append(
                {
                    "technique": variant.technique.value,
                    "site_id": variant.site_id,
                    "url": variant.url,
                    "path": rel.as_posix(),
                    "sha256": hashlib.sha256(data).hexdigest(),
                    "params": variant.manifest,
                }
            )
        manifest = {
            "schema_version": CORPUS_SCHEMA_VERSION,
            "seed": spec.seed,
            "base_url": spec.base_url,
            "sites_per_technique": spec.sites_per_technique,
            "techniques": [t.value for t in spec.techniques],
            "pages": pages,
        }
        (root / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False), "utf-8")
    except OSError as exc:
        raise IoFailure(f"writing corpus under {root}: {exc}") from exc
    return manifest
