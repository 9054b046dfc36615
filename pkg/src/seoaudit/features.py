"""The eight page features that separate promoted from demoted results.

AI-driven search frontends re-rank fetched pages by content quality signals.
Profiling pages whose relative rank rose against a traditional engine versus
pages whose rank fell shows the promoted group carrying more text blocks,
deeper DOM trees, denser internal linking, and more multimedia. This module
computes those eight signals for any parsed page and the group-difference
statistics used to compare two page populations.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from scipy import stats

from .page import META_CHECKLIST, PageDocument


@dataclass(frozen=True)
class FeatureVector:
    text_fragmentation: int
    dom_depth: int
    tag_diversity: int
    external_links: int
    internal_links: int
    multimodal_count: int
    meta_completeness: float  # multiple of 1/12
    alt_coverage: float

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, obj: dict) -> "FeatureVector":
        return cls(**{f.name: obj[f.name] for f in fields(cls)})


FEATURE_NAMES = tuple(f.name for f in fields(FeatureVector))


def extract_features(doc: PageDocument) -> FeatureVector:
    """Deterministic eight-feature profile of a page.

    alt_coverage is vacuously 1.0 for pages without images, and
    meta_completeness counts presence of the 12 checklist items.
    """
    images = doc.image_nodes()
    with_alt = sum(1 for n in images if (n.attributes.get("alt") or "").strip())
    internal = sum(1 for l in doc.links if l.internal)
    return FeatureVector(
        text_fragmentation=len(doc.text_blocks),
        dom_depth=doc.max_depth(),
        tag_diversity=len(doc.distinct_tags()),
        external_links=len(doc.links) - internal,
        internal_links=internal,
        multimodal_count=sum(doc.media_counts.values()),
        meta_completeness=len(doc.meta_items & set(META_CHECKLIST)) / len(META_CHECKLIST),
        alt_coverage=with_alt / len(images) if images else 1.0,
    )


def relative_difference(mean_up: float, mean_down: float) -> float:
    """(mean_up - mean_down) / mean_down, as a signed percentage."""
    if mean_down == 0:
        raise ZeroDivisionError("mean_down must be non-zero")
    return (mean_up - mean_down) / mean_down * 100.0


@dataclass(frozen=True)
class GroupDifferenceRow:
    feature: str
    mean_up: float
    mean_down: float
    difference_pct: float
    p_value: float


def group_differences(
    up: list[FeatureVector], down: list[FeatureVector]
) -> list[GroupDifferenceRow]:
    """Per-feature means, relative difference, and Welch t-test p-value.

    Both groups need at least two members for the t-test to be defined.
    """
    rows = []
    for name in FEATURE_NAMES:
        a = [float(getattr(v, name)) for v in up]
        b = [float(getattr(v, name)) for v in down]
        mean_up = sum(a) / len(a)
        mean_down = sum(b) / len(b)
        if len(a) > 1 and len(b) > 1:
            p_value = float(stats.ttest_ind(a, b, equal_var=False).pvalue)
        else:
            p_value = float("nan")
        diff = relative_difference(mean_up, mean_down) if mean_down != 0 else float("nan")
        rows.append(GroupDifferenceRow(name, mean_up, mean_down, diff, p_value))
    return rows
