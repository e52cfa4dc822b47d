"""Brute-force reference implementations, written from the formulas with plain loops.

Nothing here calls into the package except to read raw ratings out of a
matrix, so these stay independent of the kernels they check.
"""

import math
from fractions import Fraction

import numpy as np


def pcc_two_pass(xs, ys):
    """Population covariance over the product of population std deviations; None if constant."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / n
    vx = sum((x - mx) ** 2 for x in xs) / n
    vy = sum((y - my) ** 2 for y in ys) / n
    if vx == 0 or vy == 0:
        return None
    return cov / math.sqrt(vx * vy)


def exact_rank_key(xs, ys):
    """sign(cov) * cov^2 / (var_x var_y) as an exact rational; monotone in the correlation."""
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    if vx == 0 or vy == 0:
        return None
    key = cov * cov / (vx * vy)
    return key if cov >= 0 else -key


def dense_ratings(matrix):
    """dict (u, i) -> rating over dense indices."""
    out = {}
    for u in range(matrix.n_users):
        for i, r in zip(matrix.items_of(u), matrix.user_ratings(u)):
            out[(u, int(i))] = float(r)
    return out


def _pairs(cells, a, b, by_user):
    xs, ys = [], []
    if by_user:
        cols = sorted({i for (u, i) in cells if u == a} & {i for (u, i) in cells if u == b})
        for c in cols:
            xs.append(cells[(a, c)])
            ys.append(cells[(b, c)])
    else:
        rows = sorted({u for (u, i) in cells if i == a} & {u for (u, i) in cells if i == b})
        for r in rows:
            xs.append(cells[(r, a)])
            ys.append(cells[(r, b)])
    return xs, ys


def similarity(cells, a, b, by_user, min_overlap=2):
    xs, ys = _pairs(cells, a, b, by_user)
    if len(xs) < min_overlap:
        return None
    return pcc_two_pass(xs, ys)


def neighbor_lists(cells, n, by_user, size, min_overlap=2, candidates=None):
    """Per owner: [(neighbor, sim)] of positive similarities, best first, ties by index."""
    out = []
    for a in range(n):
        scored = []
        for b in range(n):
            if b == a or (candidates is not None and b not in candidates):
                continue
            xs, ys = _pairs(cells, a, b, by_user)
            if len(xs) < min_overlap:
                continue
            key = exact_rank_key(xs, ys)
            if key is None or key <= 0:
                continue
            scored.append((key, b, pcc_two_pass(xs, ys)))
        scored.sort(key=lambda t: (-t[0], t[1]))
        out.append([(b, s) for _, b, s in scored[:size]])
    return out


def user_means(cells, n_users):
    sums, counts = [0.0] * n_users, [0] * n_users
    for (u, _), r in cells.items():
        sums[u] += r
        counts[u] += 1
    return [s / c if c else float("nan") for s, c in zip(sums, counts)]


def item_means(cells, n_items):
    sums, counts = [0.0] * n_items, [0] * n_items
    for (_, i), r in cells.items():
        sums[i] += r
        counts[i] += 1
    return [s / c if c else float("nan") for s, c in zip(sums, counts)]


def predict_item_based(usable, ubar, ibar, item_nbrs, u, i):
    num = den = 0.0
    for j, s in item_nbrs[i]:
        if (u, j) in usable:
            num += s * (usable[(u, j)] - ibar[j])
            den += s
    return None if den == 0 else ibar[i] + num / den


def predict_user_based(usable, ubar, user_nbrs, u, i):
    num = den = 0.0
    for v, s in user_nbrs[u]:
        if (v, i) in usable:
            num += s * (usable[(v, i)] - ubar[v])
            den += s
    return None if den == 0 else ubar[u] + num / den


def predict_hybrid(usable, ubar, user_nbrs, item_nbrs, u, i):
    num = den = 0.0
    for v, su in user_nbrs[u]:
        for j, si in item_nbrs[i]:
            if (v, j) in usable:
                num += su * si * (usable[(v, j)] - ubar[v])
                den += su * si
    return None if den == 0 else ubar[u] + num / den


def smooth_cells(cells, n_items, ubar, cluster_of, scale=None):
    """Cluster smoothing for every clustered user's missing items: {(u, i): (value, kind)}."""
    members = {}
    for u, c in cluster_of.items():
        members.setdefault(c, []).append(u)
    out = {}
    for u, c in cluster_of.items():
        for i in range(n_items):
            if (u, i) in cells:
                continue
            devs = [cells[(v, i)] - ubar[v] for v in members[c] if (v, i) in cells]
            if devs:
                value = ubar[u] + sum(devs) / len(devs)
                if scale is not None:
                    value = min(scale[1], max(scale[0], value))
                out[(u, i)] = (value, "smoothed")
            else:
                out[(u, i)] = (ubar[u], "fallback")
    return out


def random_triples(rng, n_users, n_items, density, values=(1, 2, 3, 4, 5)):
    triples = []
    for u in range(n_users):
        for i in range(n_items):
            if rng.random() < density:
                triples.append((f"u{u}", f"i{i}", float(rng.choice(values))))
    if not triples:
        triples.append(("u0", "i0", float(values[0])))
    return triples


def sse(X, labels, centroids):
    return float(sum(np.sum((X[p] - centroids[labels[p]]) ** 2) for p in range(len(X))))
