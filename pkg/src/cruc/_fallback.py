"""Pure numpy/scipy implementations of the kernels in ``_kernels.pyx``.

Co-rating sums come from sparse matrix products instead of a per-row scatter,
and predictions are evaluated for blocks of queries at once. For ratings on a
half-point grid every sum is exact, so similarities agree bit for bit with the
compiled kernel; prediction sums may differ in the last few ulps because numpy
reduces in a different order.
"""

import numpy as np
import scipy.sparse as sp

VAR_EPS = 1e-12
_BLOCK_CELLS = 1 << 22


def _sims_from_sums(cnt, sx, sy, sxx, syy, sxy):
    vx = cnt * sxx - sx * sx
    vy = cnt * syy - sy * sy
    num = cnt * sxy - sx * sy
    ok = (vx > VAR_EPS * cnt * sxx) & (vy > VAR_EPS * cnt * syy)
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.copysign(np.sqrt((num * num) / (vx * vy)), num)
    sim = np.clip(sim, -1.0, 1.0)
    sim[~ok] = np.nan
    return sim


def topk_pcc(indptr, indices, values, t_indptr, t_indices, t_values, candidate, k, min_overlap):
    n = len(indptr) - 1
    n_cols = len(t_indptr) - 1
    X = sp.csr_matrix((values, indices, indptr), shape=(n, n_cols))
    B = sp.csr_matrix((np.ones_like(values), indices, indptr), shape=(n, n_cols))
    X2 = X.multiply(X).tocsr()
    XT, BT, X2T = X.T.tocsc(), B.T.tocsc(), X2.T.tocsc()
    candidate = np.asarray(candidate, dtype=bool)

    out_idx = np.full((n, k), -1, dtype=np.int64)
    out_sim = np.zeros((n, k), dtype=np.float64)
    out_len = np.zeros(n, dtype=np.int64)
    step = max(1, _BLOCK_CELLS // max(n, 1))
    for a0 in range(0, n, step):
        a1 = min(n, a0 + step)
        xa, ba, x2a = X[a0:a1], B[a0:a1], X2[a0:a1]
        cnt = (ba @ BT).toarray()
        sx = (xa @ BT).toarray()
        sy = (ba @ XT).toarray()
        sxx = (x2a @ BT).toarray()
        syy = (ba @ X2T).toarray()
        sxy = (xa @ XT).toarray()
        sim = _sims_from_sums(cnt, sx, sy, sxx, syy, sxy)
        valid = (cnt >= min_overlap) & candidate[None, :] & (sim > 0)
        rows = np.arange(a1 - a0)
        valid[rows, rows + a0] = False
        for r in rows:
            cols = np.flatnonzero(valid[r])
            if len(cols) == 0:
                continue
            s = sim[r, cols]
            order = np.lexsort((cols, -s))[:k]
            m = len(order)
            out_idx[a0 + r, :m] = cols[order]
            out_sim[a0 + r, :m] = s[order]
            out_len[a0 + r] = m
    return out_idx, out_sim, out_len


def _lookup(keys, vals, n_cols, rows, cols):
    want = rows * n_cols + cols
    if len(keys) == 0:
        return np.zeros(want.shape, dtype=bool), np.zeros(want.shape)
    pos = np.minimum(np.searchsorted(keys, want), len(keys) - 1)
    found = keys[pos] == want
    return found, np.where(found, vals[pos], 0.0)


def _neighbors(nbr, sim, length, owners):
    width = nbr.shape[1]
    idx = nbr[owners]
    w = sim[owners]
    live = np.arange(width)[None, :] < length[owners][:, None]
    return np.where(live, idx, 0), np.where(live, w, 0.0), live


def predict_components(qu, qi, indptr, indices, values, user_means, item_means,
                       u_nbr, u_sim, u_len, i_nbr, i_sim, i_len):
    qu = np.asarray(qu, dtype=np.int64)
    qi = np.asarray(qi, dtype=np.int64)
    nq = len(qu)
    n_cols = len(item_means)
    rows = np.repeat(np.arange(len(indptr) - 1, dtype=np.int64), np.diff(indptr))
    keys = rows * n_cols + np.asarray(indices, dtype=np.int64)
    vals = np.asarray(values, dtype=np.float64)

    sir = np.full(nq, np.nan)
    sur = np.full(nq, np.nan)
    suir = np.full(nq, np.nan)
    known = np.flatnonzero((qu >= 0) & (qi >= 0))
    width = max(1, u_nbr.shape[1] * i_nbr.shape[1])
    step = max(1, _BLOCK_CELLS // width)
    for b0 in range(0, len(known), step):
        sel = known[b0:b0 + step]
        u, i = qu[sel], qi[sel]
        ui, us, ul = _neighbors(u_nbr, u_sim, u_len, u)
        ii, is_, il = _neighbors(i_nbr, i_sim, i_len, i)

        found, r = _lookup(keys, vals, n_cols, u[:, None], ii)
        found &= il
        w = np.where(found, is_, 0.0)
        den = w.sum(axis=1)
        num = (w * np.where(found, r - item_means[ii], 0.0)).sum(axis=1)
        has = den > 0
        sir[sel[has]] = item_means[i[has]] + num[has] / den[has]

        found, r = _lookup(keys, vals, n_cols, ui, i[:, None])
        found &= ul
        w = np.where(found, us, 0.0)
        den = w.sum(axis=1)
        num = (w * np.where(found, r - user_means[ui], 0.0)).sum(axis=1)
        has = den > 0
        sur[sel[has]] = user_means[u[has]] + num[has] / den[has]

        found, r = _lookup(keys, vals, n_cols, ui[:, :, None], ii[:, None, :])
        found &= ul[:, :, None] & il[:, None, :]
        w = np.where(found, us[:, :, None] * is_[:, None, :], 0.0)
        dev = np.where(found, r - user_means[ui][:, :, None], 0.0)
        den = w.sum(axis=(1, 2))
        num = (w * dev).sum(axis=(1, 2))
        has = den > 0
        suir[sel[has]] = user_means[u[has]] + num[has] / den[has]
    return sir, sur, suir
