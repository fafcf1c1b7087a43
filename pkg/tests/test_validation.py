import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

import oracles
from genspace.compression import ProjectedPoint
from genspace.errors import AlignmentError, LengthMismatch, TooFewSamples
from genspace.metrics import BCVector
from genspace.validation import (build_pair_table, correlation_report, extremal_pairs,
                                 spearman)


def pts(coords, gen="g"):
    return [ProjectedPoint(f"l{i}", float(x), float(y), gen) for i, (x, y) in enumerate(coords)]


def bcv(*vals):
    return BCVector("boxoban", tuple(zip(("ES", "CS", "ACS", "CC"), map(float, vals))))


def test_pair_table_count_and_hand_values():
    table = build_pair_table(pts([(0, 0), (3, 4), (0, 1)]),
                             [bcv(1, 2, 0.5, 0), bcv(4, 2, 0.25, 1), bcv(0, 5, 0.5, 3)])
    assert len(table) == 3
    rows = list(table.rows())
    assert rows[0] == ("l0", "l1", 5.0, (3.0, 0.0, 0.25, 1.0))
    assert rows[1] == ("l0", "l2", 1.0, (1.0, 3.0, 0.0, 3.0))
    assert rows[2][:3] == ("l1", "l2", math.hypot(3, 3))


def test_pair_table_200_points():
    rng = np.random.default_rng(0)
    table = build_pair_table(pts(rng.normal(size=(200, 2))), [bcv(*rng.random(4)) for _ in range(200)])
    assert len(table) == 19900
    assert np.all(table.distances >= 0) and np.all(table.bc_diffs >= 0)
    assert np.all(table.index_a < table.index_b)


def test_pair_table_coincident_and_alignment():
    table = build_pair_table(pts([(1, 1), (1, 1)]), [bcv(0, 0, 0, 0)] * 2)
    assert table.distances[0] == 0
    with pytest.raises(AlignmentError):
        build_pair_table(pts([(0, 0), (1, 1)]), [bcv(0, 0, 0, 0)])
    with pytest.raises(AlignmentError):
        build_pair_table(pts([(0, 0), (1, 1)]), [bcv(0, 0, 0, 0)] * 2, bc_ids=["l1", "l0"])


def test_spearman_basic_cases():
    x = np.arange(1.0, 11.0)
    assert spearman(x, x ** 2)[0] == pytest.approx(1.0)
    assert spearman(x, x[::-1])[0] == pytest.approx(-1.0)
    rho, p = spearman([1, 2, 2, 3], [1, 2, 3, 4])
    assert rho == pytest.approx(0.9487, abs=1e-4)
    assert rho == pytest.approx(3 / math.sqrt(10), abs=1e-12)


def test_spearman_constant_and_errors():
    assert spearman([1, 1, 1, 1], [1, 2, 3, 4]) == (0.0, 1.0)
    with pytest.raises(LengthMismatch):
        spearman([1, 2, 3], [1, 2])
    with pytest.raises(TooFewSamples):
        spearman([1, 2], [2, 1])


def test_spearman_p_matches_t_approximation():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=40), rng.normal(size=40)
    rho, p = spearman(x, y)
    ref = stats.spearmanr(x, y)
    assert rho == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, rel=1e-9)


values = st.lists(st.integers(-5, 5), min_size=5, max_size=30)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_spearman_properties(data):
    x = data.draw(values)
    y = data.draw(st.lists(st.integers(-5, 5), min_size=len(x), max_size=len(x)))
    rho, p = spearman(x, y)
    assert -1.0 <= rho <= 1.0 and 0.0 <= p <= 1.0
    assert abs(spearman(y, x)[0] - rho) < 1e-12
    if len(set(x)) > 1 and len(set(y)) > 1:
        assert abs(rho - oracles.spearman_rho(x, y)) < 1e-12
        # strictly increasing transforms leave ranks unchanged
        fx = [math.exp(v / 3.0) + 7 * v for v in x]
        assert abs(spearman(fx, y)[0] - rho) < 1e-12


def test_correlation_report_cases():
    rng = np.random.default_rng(2)
    coords = rng.normal(size=(8, 2))
    points = pts(coords)
    # ES equal to the x coordinate with y = 0 makes distances proportional to |dES|
    flat = pts(np.column_stack([coords[:, 0], np.zeros(8)]))
    bcs = [bcv(c[0], rng.random(), 1.0, rng.random()) for c in coords]
    report = correlation_report(build_pair_table(flat, bcs))
    assert report.rho("ES") == pytest.approx(1.0)
    assert report.per_bc[2] == ("ACS", 0.0, 1.0)
    assert report.average_rho == pytest.approx(np.mean([r for _, r, _ in report.per_bc]), abs=1e-12)
    assert correlation_report(build_pair_table(points, bcs)).per_bc[0][0] == "ES"


def test_average_rho_arithmetic():
    from genspace.validation import CorrelationReport
    r = CorrelationReport([("ES", 1.0, 0.0), ("CS", 1.0, 0.0), ("ACS", 0.0, 1.0), ("CC", 0.0, 1.0)])
    assert r.average_rho == 0.5


def test_correlation_report_against_brute_force_and_order():
    rng = np.random.default_rng(3)
    points = pts(rng.normal(size=(10, 2)))
    bcs = [bcv(*rng.integers(0, 4, 4)) for _ in range(10)]
    table = build_pair_table(points, bcs)
    report = correlation_report(table)
    for k, (name, rho, _) in enumerate(report.per_bc):
        ref = oracles.spearman_rho(list(table.distances), list(table.bc_diffs[:, k]))
        assert abs(rho - ref) < 1e-12
    perm = rng.permutation(len(table))
    table.distances, table.bc_diffs = table.distances[perm], table.bc_diffs[perm]
    shuffled = correlation_report(table)
    for (_, a, pa), (_, b, pb) in zip(report.per_bc, shuffled.per_bc):
        assert abs(a - b) < 1e-12 and abs(pa - pb) < 1e-12


def test_extremal_pairs():
    ex = extremal_pairs(pts([(0, 0), (1, 0), (3, 0)]))
    assert ex.closest == ("l0", "l1", 1.0)
    assert ex.farthest == ("l0", "l2", 3.0)
    dup = extremal_pairs(pts([(0, 0), (5, 5), (2, 2), (5, 5)]))
    assert dup.closest == ("l1", "l3", 0.0)
    tie = extremal_pairs(pts([(0, 0), (1, 0), (2, 0)]))
    assert tie.closest[:2] == ("l0", "l1")
    with pytest.raises(TooFewSamples):
        extremal_pairs(pts([(0, 0)]))


def test_extremal_agrees_with_table():
    rng = np.random.default_rng(4)
    points = pts(rng.normal(size=(30, 2)))
    table = build_pair_table(points, [bcv(0, 0, 0, 0)] * 30)
    ex = extremal_pairs(points)
    assert ex.closest[2] == table.distances.min()
    assert ex.farthest[2] == table.distances.max()
    assert ex.closest[2] <= ex.farthest[2]


def test_two_hundred_points_fast():
    rng = np.random.default_rng(5)
    points = pts(rng.normal(size=(200, 2)))
    bcs = [bcv(*rng.random(4)) for _ in range(200)]
    start = time.perf_counter()
    correlation_report(build_pair_table(points, bcs))
    extremal_pairs(points)
    assert time.perf_counter() - start < 5.0
