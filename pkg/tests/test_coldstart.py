import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cruc.coldstart import (
    FALLBACK,
    OBSERVED,
    SMOOTHED,
    all_users,
    cluster_users,
    select_significant_users,
    significant_from_counts,
    smooth,
    user_vectors,
)
from cruc.errors import EmptyMatrix, TooManyClusters
from cruc.matrix import RatingScale, build_matrix

from . import oracles


def test_density_example_from_counts():
    # densities 0.5, 0.1, 0.3 over a ten-item catalogue
    sig = significant_from_counts([5, 1, 3], 10)
    assert sig.threshold == pytest.approx(0.3)
    assert sig.members.tolist() == [0]


def test_density_example_on_matrix():
    # three users alone cannot cover ten items, so a fourth user at the mean
    # density (0.3) rates the remaining item and must not change the outcome
    m = build_matrix(
        [("A", f"i{k}", 4.0) for k in range(5)]
        + [("B", "i5", 2.0)]
        + [("C", f"i{k}", 3.0) for k in (6, 7, 8)]
        + [("D", f"i{k}", 3.0) for k in (9, 0, 1)],
        RatingScale(1, 5),
    )
    assert m.n_items == 10
    rho = m.user_counts / m.n_items
    assert rho.tolist() == [0.5, 0.1, 0.3, 0.3]
    sig = select_significant_users(m)
    assert sig.threshold == pytest.approx(0.3)
    assert [m.user_ids[u] for u in sig.members] == ["A"]
    assert m.user_index("A") in sig and m.user_index("C") not in sig


def test_user_at_mean_density_is_excluded():
    # densities 0.5, 0.25, 0.75: mean is exactly 0.5
    m = build_matrix(
        [("A", f"i{k}", 3.0) for k in range(2)]
        + [("B", "i2", 3.0)]
        + [("C", f"i{k}", 3.0) for k in (1, 2, 3)],
        RatingScale(1, 5),
    )
    sig = select_significant_users(m)
    assert [m.user_ids[u] for u in sig.members] == ["C"]


def test_uniform_density_selects_nobody():
    m = build_matrix([(u, i, 3.0) for u in "abcd" for i in "xy"], RatingScale(1, 5))
    sig = select_significant_users(m)
    assert sig.threshold == pytest.approx(1.0)
    assert len(sig) == 0


def test_single_user_is_not_significant():
    m = build_matrix([("solo", "x", 3.0), ("solo", "y", 4.0)], RatingScale(1, 5))
    assert len(select_significant_users(m)) == 0


def test_selection_on_empty_matrix():
    with pytest.raises(EmptyMatrix):
        select_significant_users(build_matrix([], RatingScale(1, 5)))


def test_selection_is_pure():
    rng = np.random.default_rng(1)
    m = build_matrix(oracles.random_triples(rng, 30, 20, 0.3), RatingScale(1, 5))
    a, b = select_significant_users(m), select_significant_users(m)
    assert np.array_equal(a.members, b.members) and a.threshold == b.threshold


def separable_matrix():
    group_a = [5.0, 5.0, 5.0, 1.0, 1.0, 1.0]
    group_b = [1.0, 1.0, 1.0, 5.0, 5.0, 5.0]
    triples = []
    for u in range(8):
        vec = group_a if u % 2 == 0 else group_b
        triples += [(f"u{u}", f"i{i}", r) for i, r in enumerate(vec)]
    return build_matrix(triples, RatingScale(1, 5)), [u % 2 for u in range(8)]


def same_partition(labels_a, labels_b):
    return all((x == y) == (p == q) for (x, p), (y, q) in itertools.combinations(zip(labels_a, labels_b), 2))


@pytest.mark.parametrize("seed", range(10))
def test_separable_groups_recovered(seed):
    m, truth = separable_matrix()
    model = cluster_users(m, all_users(m), 2, 50, seed)
    assert same_partition(model.labels.tolist(), truth)
    assert model.converged


def test_single_cluster_centroid_is_mean():
    rng = np.random.default_rng(2)
    m = build_matrix(oracles.random_triples(rng, 10, 8, 0.5), RatingScale(1, 5))
    model = cluster_users(m, all_users(m), 1, 10, 0)
    assert set(model.labels.tolist()) == {0}
    np.testing.assert_allclose(model.centroids[0], user_vectors(m, model.members).mean(axis=0), atol=1e-12)


def test_one_cluster_per_member():
    rng = np.random.default_rng(3)
    m = build_matrix(oracles.random_triples(rng, 9, 12, 0.6), RatingScale(1, 5))
    model = cluster_users(m, all_users(m), m.n_users, 20, 5)
    assert sorted(model.labels.tolist()) == list(range(m.n_users))


def test_duplicate_vectors_still_fill_every_cluster():
    m = build_matrix([(u, i, 3.0 if u < "c" else 4.0) for u in "abcd" for i in "xyz"], RatingScale(1, 5))
    model = cluster_users(m, all_users(m), 4, 10, 0)
    assert np.all(np.bincount(model.labels, minlength=4) >= 1)


def test_too_many_clusters():
    m, _ = separable_matrix()
    with pytest.raises(TooManyClusters):
        cluster_users(m, all_users(m), 9, 10, 0)


def test_clustering_is_seed_deterministic():
    rng = np.random.default_rng(4)
    m = build_matrix(oracles.random_triples(rng, 40, 25, 0.3), RatingScale(1, 5))
    a = cluster_users(m, all_users(m), 4, 30, 11)
    b = cluster_users(m, all_users(m), 4, 30, 11)
    assert np.array_equal(a.labels, b.labels) and a.iterations_run == b.iterations_run


def test_sse_trace_matches_direct_sum():
    rng = np.random.default_rng(5)
    m = build_matrix(oracles.random_triples(rng, 30, 15, 0.4), RatingScale(1, 5))
    model = cluster_users(m, all_users(m), 3, 30, 2, trace=True)
    X = user_vectors(m, model.members)
    assert model.sse_trace[-1] == pytest.approx(oracles.sse(X, model.labels, model.centroids), rel=1e-12)
    assert all(b <= a * (1 + 1e-12) for a, b in zip(model.sse_trace, model.sse_trace[1:]))


def plus_one_fixture():
    # u (mean 3) misses z; peers v1 (mean 2) and v2 (mean 4) both rate z one point above their mean
    triples = [
        ("u", "x", 2.0), ("u", "y", 4.0),
        ("v1", "x", 1.0), ("v1", "y", 2.0), ("v1", "z", 3.0),
        ("v2", "x", 3.0), ("v2", "y", 4.0), ("v2", "z", 5.0),
    ]
    return build_matrix(triples, RatingScale(1, 5))


def test_smoothing_plus_one_deviation():
    m = plus_one_fixture()
    clusters = cluster_users(m, all_users(m), 1, 5, 0)
    sm = smooth(m, clusters)
    u, z = m.user_index("u"), m.item_index("z")
    assert sm.value(u, z) == (4.0, "smoothed")


def test_smoothing_clamps_to_scale():
    m = build_matrix(
        [("u", "x", 5.0), ("u", "y", 5.0), ("v", "x", 1.0), ("v", "y", 1.0), ("v", "z", 5.0)],
        RatingScale(1, 5),
    )
    sm = smooth(m, cluster_users(m, all_users(m), 1, 5, 0))
    value, kind = sm.value(m.user_index("u"), m.item_index("z"))
    assert kind == "smoothed" and value == 5.0


def test_singleton_cluster_falls_back_to_user_mean():
    m = plus_one_fixture()
    clusters = cluster_users(m, all_users(m), 3, 5, 0)
    sm = smooth(m, clusters)
    u, z = m.user_index("u"), m.item_index("z")
    assert sm.value(u, z) == (m.user_means[u], "fallback")


def test_observed_cells_untouched():
    rng = np.random.default_rng(6)
    m = build_matrix(oracles.random_triples(rng, 25, 20, 0.3), RatingScale(1, 5))
    sm = smooth(m, cluster_users(m, all_users(m), 4, 20, 0))
    for u in range(m.n_users):
        row = sm.rows[u]
        items = m.items_of(u)
        assert np.array_equal(sm.values[row, items], m.user_ratings(u))
        assert np.all(sm.provenance[row, items] == OBSERVED)
        assert sm.value(u, int(items[0]))[1] == "observed"


def test_smoothing_matches_oracle():
    rng = np.random.default_rng(7)
    m = build_matrix(oracles.random_triples(rng, 20, 15, 0.35), RatingScale(1, 5))
    sig = select_significant_users(m)
    clusters = cluster_users(m, sig, 3, 20, 1)
    sm = smooth(m, clusters)
    cells = oracles.dense_ratings(m)
    ubar = oracles.user_means(cells, m.n_users)
    want = oracles.smooth_cells(cells, m.n_items, ubar, clusters.assignments, scale=(1, 5))
    kinds = {SMOOTHED: "smoothed", FALLBACK: "fallback"}
    for (u, i), (value, kind) in want.items():
        row = sm.rows[u]
        assert kinds[int(sm.provenance[row, i])] == kind
        assert sm.values[row, i] == pytest.approx(value, abs=1e-12)
    # non-significant users are never smoothed
    for u in range(m.n_users):
        if u not in sig:
            assert sm.rows[u] == -1


def test_usable_store_excludes_fallback_cells():
    m = plus_one_fixture()
    sm = smooth(m, cluster_users(m, all_users(m), 1, 5, 0))
    indptr, indices, values = sm.usable_csr()
    assert indptr[-1] == m.n_ratings + int(np.count_nonzero(sm.provenance == SMOOTHED))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_translation_shifts_smoothed_cells(seed, kappa):
    rng = np.random.default_rng(seed)
    triples = oracles.random_triples(rng, 12, 10, 0.4)
    wide = RatingScale(-10, 20)
    m = build_matrix(triples, wide)
    moved = build_matrix([(u, i, r + kappa) for u, i, r in triples], wide)
    clusters = cluster_users(m, all_users(m), min(3, m.n_users), 20, seed % 97)
    a, b = smooth(m, clusters), smooth(moved, clusters)
    assert np.array_equal(a.provenance, b.provenance)
    np.testing.assert_allclose(b.values - a.values, kappa, rtol=0, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_relabelled_users_give_same_groups(seed):
    m, truth = separable_matrix()
    rng = np.random.default_rng(seed)
    triples = list(m.triples())
    shuffled = [triples[k] for k in rng.permutation(len(triples))]
    renamed = build_matrix([(f"x{u}", i, r) for u, i, r in shuffled], RatingScale(1, 5))
    model = cluster_users(renamed, all_users(renamed), 2, 50, seed)
    labels = {renamed.user_ids[u][1:]: k for u, k in model.assignments.items()}
    assert same_partition([labels[f"u{u}"] for u in range(8)], truth)
