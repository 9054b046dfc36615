import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from seoaudit.detectors import AttackType, QueryClass
from seoaudit.errors import BadEdges, EmptyInput, EmptyMatrix, EmptyString, OutOfRange
from seoaudit.metrics import (
    ClassifierMetrics,
    ConfusionMatrix,
    PhaseTrace,
    QuerySitePair,
    RewriteDistance,
    bucketize,
    classifier_metrics,
    cumulative_resilience,
    dump_traces,
    levenshtein,
    load_traces,
    phase_resilience,
    rank_shift,
    rewrite_distance,
)

TYPES = list(AttackType)


def make_trace(i=0, refused=False, retrieved=False, summarized=False, attack_type=None):
    target = f"http://t{i}.test/"
    pair = QuerySitePair(
        query=f"query {i}",
        query_class=QueryClass.HOT,
        target_url=target,
        attack_type=attack_type or TYPES[i % len(TYPES)],
    )
    if refused:
        return PhaseTrace(pair=pair, refused=True)
    retrieval = [f"http://other{i}.test/"]
    summary = []
    if retrieved:
        retrieval = retrieval + [target]
        summary = [target] if summarized else [retrieval[0]]
    return PhaseTrace(
        pair=pair,
        rewritten_queries=[f"rewritten {i}"],
        retrieval_references=retrieval,
        summary_references=summary,
        refused=False,
    )


# --- phase resilience ---


def test_all_refused():
    res = phase_resilience([make_trace(i, refused=True) for i in range(5)])
    assert res.as_tuple() == (1.0, None, None)


def test_ten_trace_fixture():
    # 10 traces, 0 refused, target retrieved once, that one cut from summary
    traces = [make_trace(i) for i in range(9)] + [make_trace(9, retrieved=True, summarized=False)]
    res = phase_resilience(traces)
    assert res.understanding == 0.0
    assert res.retrieval == pytest.approx(0.9)
    assert res.summarizing == pytest.approx(1.0)


def test_nothing_retrieved_summarizing_undefined():
    traces = [make_trace(i) for i in range(4)]
    res = phase_resilience(traces)
    assert res.as_tuple() == (0.0, 1.0, None)


def test_empty_input():
    with pytest.raises(EmptyInput):
        phase_resilience([])


def test_oracle_equivalence_randomized():
    rng = random.Random(4242)
    traces = []
    for i in range(1000):
        refused = rng.random() < 0.2
        retrieved = (not refused) and rng.random() < 0.5
        summarized = retrieved and rng.random() < 0.5
        traces.append(make_trace(i, refused=refused, retrieved=retrieved, summarized=summarized))
    got = phase_resilience(traces).as_tuple()
    assert got == oracles.oracle_phase_resilience(traces)


# --- cumulative resilience ---


def test_cumulative_reported_total_row():
    cum = cumulative_resilience((0.157, 0.982, 0.852))
    assert cum[0] == pytest.approx(0.157, abs=1e-4)
    assert cum[1] == pytest.approx(0.9848, abs=1e-4)
    assert cum[2] == pytest.approx(0.9978, abs=1e-4)


def test_cumulative_reported_confusion_column():
    cum = cumulative_resilience((0.240, 0.954, 0.880))
    assert cum[1] == pytest.approx(0.9650, abs=1e-4)
    assert cum[2] == pytest.approx(0.9958, abs=1e-4)


# Three more published columns whose cumulative cells reproduce from their
# rounded per-phase averages (the link-farm column does not: its cumulative
# row was evidently derived from unrounded values).
@pytest.mark.parametrize(
    "phases,cum2,cum3",
    [
        ((0.117, 0.995, 0.900), 0.9956, 0.9996),  # redirection column
        ((0.198, 0.976, 0.917), 0.9808, 0.9984),  # cloaking column
        ((0.094, 1.000, 1.000), 1.0000, 1.0000),  # keyword stuffing column
    ],
)
def test_cumulative_reported_per_type_columns(phases, cum2, cum3):
    cum = cumulative_resilience(phases)
    assert cum[1] == pytest.approx(cum2, abs=1e-4)
    assert cum[2] == pytest.approx(cum3, abs=1e-4)


def test_cumulative_zero():
    assert cumulative_resilience((0, 0, 0)) == [0.0, 0.0, 0.0]


def test_cumulative_out_of_range():
    with pytest.raises(OutOfRange):
        cumulative_resilience((0.5, 1.2))


def test_cumulative_undefined_phases_skipped():
    assert cumulative_resilience((1.0, None, None)) == [1.0, 1.0, 1.0]
    cum = cumulative_resilience((0.2, None, 0.5))
    assert cum == pytest.approx([0.2, 0.2, 0.6])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.one_of(st.none(), st.floats(0, 1)), min_size=1, max_size=6))
def test_cumulative_telescoping_identity(values):
    cum = cumulative_resilience(values)
    assert all(b >= a - 1e-15 for a, b in zip(cum, cum[1:]))  # non-decreasing
    assert cum[-1] <= 1.0 + 1e-15
    assert abs(cum[-1] - oracles.oracle_survival_total(values)) <= 1e-12


# --- classifier metrics ---

REPORTED_MATRICES = [
    # (matrix, accuracy, precision, recall, f1) — reported evaluation tables
    (ConfusionMatrix(tp=87, fn=5, fp=13, tn=95), 0.910, 0.870, 0.946, 0.906),
    (ConfusionMatrix(tp=89, fn=0, fp=11, tn=100), 0.945, 0.890, 1.000, 0.9418),
    (ConfusionMatrix(tp=92, fn=3, fp=8, tn=97), 0.945, 0.920, 0.968, 0.943),
]


@pytest.mark.parametrize("matrix,acc,prec,rec,f1", REPORTED_MATRICES)
def test_reported_classifier_tables(matrix, acc, prec, rec, f1):
    got = classifier_metrics(matrix)
    assert got.accuracy == pytest.approx(acc, abs=1e-3)
    assert got.precision == pytest.approx(prec, abs=1e-3)
    assert got.recall == pytest.approx(rec, abs=1e-3)
    assert got.f1 == pytest.approx(f1, abs=1e-3)


def test_perfect_classifier():
    got = classifier_metrics(ConfusionMatrix(tp=10, fn=0, fp=0, tn=10))
    assert got == ClassifierMetrics(1.0, 1.0, 1.0, 1.0)


def test_empty_matrix():
    with pytest.raises(EmptyMatrix):
        classifier_metrics(ConfusionMatrix(0, 0, 0, 0))


def test_undefined_precision():
    got = classifier_metrics(ConfusionMatrix(tp=0, fn=5, fp=0, tn=5))
    assert got.precision is None and got.f1 is None


def test_f1_harmonic_identity():
    rng = random.Random(11)
    for _ in range(200):
        m = ConfusionMatrix(*(rng.randrange(0, 50) for _ in range(4)))
        if m.total == 0:
            continue
        got = classifier_metrics(m)
        if got.f1 is not None:
            assert abs(got.f1 * (got.precision + got.recall) - 2 * got.precision * got.recall) <= 1e-12


# --- rank shift ---


def test_rank_shift_identity():
    records = rank_shift(["a", "b", "c"], ["a", "b", "c"])
    assert [r.delta for r in records] == [0, 0, 0]
    assert all(r.direction == "same" for r in records)


def test_rank_shift_hand_example():
    records = {r.url: r for r in rank_shift(["a", "b", "c"], ["c", "a", "b"])}
    assert records["a"].delta == +1 and records["a"].direction == "down"
    assert records["c"].delta == -2 and records["c"].direction == "up"
    assert records["b"].delta == +1


def test_rank_shift_disjoint():
    assert rank_shift(["a", "b"], ["c", "d"]) == []


def test_rank_shift_relative_positions_ignore_non_overlap():
    # overlap {x, y}: google order x..y, llm order y..x
    records = {r.url: r for r in rank_shift(["x", "noise1", "y"], ["pad", "y", "pad2", "x"])}
    assert records["x"].rank_google_rel == 1 and records["x"].rank_llm_rel == 2
    assert records["y"].delta == -1


def test_rank_shift_duplicates_first_occurrence():
    records = rank_shift(["a", "a", "b"], ["b", "a", "b"])
    assert {r.url for r in records} == {"a", "b"}


@settings(max_examples=100, deadline=None)
@given(st.permutations(["u1", "u2", "u3", "u4", "u5"]))
def test_rank_shift_permutation_deltas_sum_zero(shuffled):
    records = rank_shift(["u1", "u2", "u3", "u4", "u5"], list(shuffled))
    assert sum(r.delta for r in records) == 0


# --- rewrite distances ---


def test_levenshtein_basics():
    assert levenshtein("", "") == 0
    assert levenshtein("abc", "") == 3
    assert levenshtein("kitten", "sitting") == 3


def test_rewrite_distance_identity():
    dist = rewrite_distance("same words here", "same words here")
    assert dist == RewriteDistance(std=0.0, ed=0.0)


def test_rewrite_distance_declared_normalization():
    assert rewrite_distance("abc", "abd").ed == pytest.approx(1 / 3)


def test_rewrite_distance_orthogonal_tokens():
    dist = rewrite_distance("alpha beta", "gamma delta")
    assert dist.std == pytest.approx(0.5)


def test_rewrite_distance_empty_string():
    with pytest.raises(EmptyString):
        rewrite_distance("", "x")
    with pytest.raises(EmptyString):
        rewrite_distance("x", "")


@settings(max_examples=100, deadline=None)
@given(
    st.text(alphabet="abcde ", min_size=1, max_size=20).filter(str.strip),
    st.text(alphabet="abcde ", min_size=1, max_size=20).filter(str.strip),
)
def test_rewrite_distance_symmetric_and_bounded(a, b):
    d_ab = rewrite_distance(a, b)
    d_ba = rewrite_distance(b, a)
    assert d_ab == d_ba
    assert 0.0 <= d_ab.std <= 1.0 and 0.0 <= d_ab.ed <= 1.0


# --- bucketize ---


def test_bucketize_single_record():
    table = bucketize([(RewriteDistance(std=0.05, ed=0.05), True)])
    assert table.rate(0, 0) == 1.0
    assert table.overall_rate() == 1.0


def test_bucketize_boundary_half_open():
    table = bucketize([(RewriteDistance(std=0.05, ed=0.1), True)])
    assert table.totals[0][0] == 1  # ed = 0.1 falls in (0, 0.1]
    table2 = bucketize([(RewriteDistance(std=0.05, ed=0.10000001), True)])
    assert table2.totals[1][0] == 1


def test_bucketize_rate():
    records = [(RewriteDistance(std=0.05, ed=0.05), i < 3) for i in range(10)]
    table = bucketize(records)
    assert table.rate(0, 0) == pytest.approx(0.3)


def test_bucketize_empty_cells_render_dash():
    table = bucketize([(RewriteDistance(std=0.05, ed=0.05), True)])
    markdown = table.to_markdown()
    assert "-" in markdown and "100.00%" in markdown


def test_bucketize_marginals():
    records = [
        (RewriteDistance(std=0.05, ed=0.05), True),
        (RewriteDistance(std=0.15, ed=0.05), False),
        (RewriteDistance(std=0.05, ed=0.45), True),
    ]
    table = bucketize(records)
    assert table.row_rate(0) == pytest.approx(0.5)
    assert table.col_rate(0) == pytest.approx(1.0)
    assert table.overall_rate() == pytest.approx(2 / 3)


def test_bucketize_bad_edges():
    with pytest.raises(BadEdges):
        bucketize([], edges=(0.5, 0.5))
    with pytest.raises(BadEdges):
        bucketize([], edges=(1.0,))


# --- traces ---


def test_trace_jsonl_roundtrip(tmp_path):
    traces = [make_trace(i, retrieved=i % 2 == 0, summarized=i % 4 == 0) for i in range(6)]
    path = tmp_path / "traces.jsonl"
    dump_traces(traces, path)
    assert load_traces(path) == traces


def test_trace_invariants_enforced():
    pair = QuerySitePair("q", QueryClass.HOT, "http://t.test/", AttackType.CLOAKING)
    with pytest.raises(ValueError):
        PhaseTrace(pair=pair, refused=True, rewritten_queries=["x"])
    with pytest.raises(ValueError):
        PhaseTrace(
            pair=pair,
            rewritten_queries=["x"],
            retrieval_references=["http://a.test/"],
            summary_references=["http://b.test/"],
        )


def test_pair_requires_absolute_target():
    with pytest.raises(ValueError):
        QuerySitePair("q", QueryClass.HOT, "relative/path", AttackType.CLOAKING)
