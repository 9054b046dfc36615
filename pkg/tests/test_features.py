import math
import random

import pytest

from seoaudit.features import (
    FEATURE_NAMES,
    FeatureVector,
    extract_features,
    group_differences,
    relative_difference,
)
from seoaudit.page import parse_html


def test_fixture_example():
    doc = parse_html(
        b'<html><body><p>a</p><p>b</p><img src=x alt="d"></body></html>', "http://a.test/"
    )
    fv = extract_features(doc)
    assert fv.text_fragmentation == 2
    assert fv.dom_depth == 3
    assert fv.alt_coverage == 1.0
    assert fv.multimodal_count == 1


def test_zero_images_vacuous_alt_coverage():
    doc = parse_html(b"<p>text only</p>", "http://a.test/")
    assert extract_features(doc).alt_coverage == 1.0


def test_alt_coverage_partial():
    doc = parse_html(b'<body><img src=a alt="x"><img src=b><img src=c alt=" "></body>', "http://a.test/")
    assert extract_features(doc).alt_coverage == pytest.approx(1 / 3)


def test_meta_completeness_is_twelfth_multiple():
    doc = parse_html(b'<head><title>t</title><meta name="robots" content="x"></head><p>y</p>', "http://a.test/")
    fv = extract_features(doc)
    assert fv.meta_completeness == pytest.approx(2 / 12)
    assert (fv.meta_completeness * 12) == pytest.approx(round(fv.meta_completeness * 12))


def test_link_counts():
    html = b'<body><a href="/in">i</a><a href="http://other.example/">o</a></body>'
    fv = extract_features(parse_html(html, "http://a.test/"))
    assert (fv.internal_links, fv.external_links) == (1, 1)


def test_tag_diversity_counts_distinct():
    doc = parse_html(b"<body><p>a</p><p>b</p><div>c</div></body>", "http://a.test/")
    # html, body, p, div
    assert extract_features(doc).tag_diversity == 4


# The published group means and their relative differences.
TABLE_ROWS = [
    ("text_fragmentation", 60.09, 50.48, 19.04),
    ("dom_depth", 13.93, 12.51, 11.36),
    ("internal_links", 45.66, 39.74, 14.89),
    ("multimodal_count", 12.50, 10.53, 18.71),
    ("meta_completeness", 0.4167, 0.4196, -0.6911),
    ("alt_coverage", 0.2899, 0.2873, 0.9050),
]


@pytest.mark.parametrize("name,up,down,expected", TABLE_ROWS)
def test_relative_difference_reproduces_reported_cells(name, up, down, expected):
    assert relative_difference(up, down) == pytest.approx(expected, abs=0.01)


def test_relative_difference_equal_means():
    assert relative_difference(5, 5) == 0.0


def test_relative_difference_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        relative_difference(1.0, 0.0)


def test_monotonicity_appending_alt_image():
    base = b'<body><p>text here</p><img src=a alt="x"><img src=b></body>'
    more = b'<body><p>text here</p><img src=a alt="x"><img src=b><img src=c alt="y"></body>'
    fv0 = extract_features(parse_html(base, "http://a.test/"))
    fv1 = extract_features(parse_html(more, "http://a.test/"))
    assert fv1.multimodal_count > fv0.multimodal_count
    assert fv0.alt_coverage < 1.0
    assert fv1.alt_coverage >= fv0.alt_coverage


def test_sibling_permutation_invariance():
    a = parse_html(
        b'<body><section><p>one</p></section><section><p>two two</p><img src=i></section></body>',
        "http://a.test/",
    )
    b = parse_html(
        b'<body><section><p>two two</p><img src=i></section><section><p>one</p></section></body>',
        "http://a.test/",
    )
    assert extract_features(a) == extract_features(b)


def _random_vector(rng):
    return FeatureVector(
        text_fragmentation=rng.randrange(0, 200),
        dom_depth=rng.randrange(1, 30),
        tag_diversity=rng.randrange(1, 40),
        external_links=rng.randrange(0, 50),
        internal_links=rng.randrange(0, 120),
        multimodal_count=rng.randrange(0, 40),
        meta_completeness=rng.randrange(0, 13) / 12,
        alt_coverage=rng.random(),
    )


def test_group_difference_self_consistency():
    rng = random.Random(7)
    up = [_random_vector(rng) for _ in range(25)]
    down = [_random_vector(rng) for _ in range(30)]
    rows = {r.feature: r for r in group_differences(up, down)}
    assert set(rows) == set(FEATURE_NAMES)
    for name in FEATURE_NAMES:
        mean_up = sum(float(getattr(v, name)) for v in up) / len(up)
        mean_down = sum(float(getattr(v, name)) for v in down) / len(down)
        row = rows[name]
        assert row.mean_up == pytest.approx(mean_up, abs=1e-12)
        if mean_down != 0:
            assert row.difference_pct == pytest.approx(
                relative_difference(mean_up, mean_down), abs=1e-4
            )
        assert math.isnan(row.p_value) or 0.0 <= row.p_value <= 1.0


def test_feature_vector_dict_roundtrip():
    rng = random.Random(3)
    fv = _random_vector(rng)
    assert FeatureVector.from_dict(fv.to_dict()) == fv
