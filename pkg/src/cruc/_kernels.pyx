# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled neighborhood and prediction kernels.

Mirrors ``cruc._fallback`` function for function. Both loops release the GIL so
experiment cells can run on threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport copysign, sqrt, NAN

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8

cdef double VAR_EPS = 1e-12


cdef inline double _pcc(double n, double sx, double sy, double sxx, double syy,
                        double sxy) noexcept nogil:
    # returns NAN when either side is constant
    cdef double vx = n * sxx - sx * sx
    cdef double vy = n * syy - sy * sy
    cdef double num, r
    if vx <= VAR_EPS * n * sxx or vy <= VAR_EPS * n * syy:
        return NAN
    num = n * sxy - sx * sy
    r = copysign(sqrt((num * num) / (vx * vy)), num)
    if r > 1.0:
        return 1.0
    if r < -1.0:
        return -1.0
    return r


cdef inline bint _better(double s1, i64 b1, double s2, i64 b2) noexcept nogil:
    return s1 > s2 or (s1 == s2 and b1 < b2)


def topk_pcc(const i64[::1] indptr, const i64[::1] indices, const double[::1] values,
             const i64[::1] t_indptr, const i64[::1] t_indices, const double[::1] t_values,
             const u8[::1] candidate, int k, int min_overlap):
    """Top-``k`` positive PCC neighbors for every row of a CSR matrix.

    ``(t_indptr, t_indices, t_values)`` is the transpose. Only rows with
    ``candidate[b]`` set may appear as neighbors.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out_idx_arr = np.full((n, k), -1, dtype=np.int64)
    out_sim_arr = np.zeros((n, k), dtype=np.float64)
    out_len_arr = np.zeros(n, dtype=np.int64)
    cdef i64[:, ::1] out_idx = out_idx_arr
    cdef double[:, ::1] out_sim = out_sim_arr
    cdef i64[::1] out_len = out_len_arr

    cdef i64[::1] cnt = np.zeros(n, dtype=np.int64)
    cdef i64[::1] touched = np.zeros(n, dtype=np.int64)
    cdef double[:, ::1] acc = np.zeros((n, 5), dtype=np.float64)

    cdef Py_ssize_t a, b, c, p, q, t, pos, ntouched, m
    cdef double x, y, s

    with nogil:
        for a in range(n):
            ntouched = 0
            for p in range(indptr[a], indptr[a + 1]):
                c = indices[p]
                x = values[p]
                for q in range(t_indptr[c], t_indptr[c + 1]):
                    b = t_indices[q]
                    if b == a or not candidate[b]:
                        continue
                    if cnt[b] == 0:
                        touched[ntouched] = b
                        ntouched += 1
                    y = t_values[q]
                    cnt[b] += 1
                    acc[b, 0] += x
                    acc[b, 1] += y
                    acc[b, 2] += x * x
                    acc[b, 3] += y * y
                    acc[b, 4] += x * y
            m = 0
            for t in range(ntouched):
                b = touched[t]
                if cnt[b] >= min_overlap:
                    s = _pcc(<double>cnt[b], acc[b, 0], acc[b, 1], acc[b, 2], acc[b, 3], acc[b, 4])
                    if s > 0.0 and (m < k or _better(s, b, out_sim[a, m - 1], out_idx[a, m - 1])):
                        pos = m if m < k else k - 1
                        while pos > 0 and _better(s, b, out_sim[a, pos - 1], out_idx[a, pos - 1]):
                            out_sim[a, pos] = out_sim[a, pos - 1]
                            out_idx[a, pos] = out_idx[a, pos - 1]
                            pos -= 1
                        out_sim[a, pos] = s
                        out_idx[a, pos] = b
                        if m < k:
                            m += 1
                cnt[b] = 0
                acc[b, 0] = 0.0
                acc[b, 1] = 0.0
                acc[b, 2] = 0.0
                acc[b, 3] = 0.0
                acc[b, 4] = 0.0
            out_len[a] = m
    return out_idx_arr, out_sim_arr, out_len_arr


cdef inline bint _lookup(const i64[::1] indptr, const i64[::1] indices,
                         const double[::1] values, i64 row, i64 col,
                         double* out) noexcept nogil:
    cdef i64 lo = indptr[row]
    cdef i64 hi = indptr[row + 1]
    cdef i64 mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if indices[mid] < col:
            lo = mid + 1
        else:
            hi = mid
    if lo < indptr[row + 1] and indices[lo] == col:
        out[0] = values[lo]
        return True
    return False


def predict_components(const i64[::1] qu, const i64[::1] qi,
                       const i64[::1] indptr, const i64[::1] indices, const double[::1] values,
                       const double[::1] user_means, const double[::1] item_means,
                       const i64[:, ::1] u_nbr, const double[:, ::1] u_sim, const i64[::1] u_len,
                       const i64[:, ::1] i_nbr, const double[:, ::1] i_sim, const i64[::1] i_len):
    """Item-based, user-based and cross-neighborhood predictions for a query batch.

    ``(indptr, indices, values)`` is the user-major store of usable ratings
    (observed plus smoothed). Absent components come back as NaN; a query with
    ``u < 0`` or ``i < 0`` has all three absent.
    """
    cdef Py_ssize_t nq = qu.shape[0]
    sir_arr = np.full(nq, np.nan)
    sur_arr = np.full(nq, np.nan)
    suir_arr = np.full(nq, np.nan)
    cdef double[::1] sir = sir_arr
    cdef double[::1] sur = sur_arr
    cdef double[::1] suir = suir_arr

    cdef Py_ssize_t q, t, s
    cdef i64 u, i, j, v
    cdef double num, den, w, r, wv

    with nogil:
        for q in range(nq):
            u = qu[q]
            i = qi[q]
            if u < 0 or i < 0:
                continue
            num = 0.0
            den = 0.0
            for t in range(i_len[i]):
                j = i_nbr[i, t]
                if _lookup(indptr, indices, values, u, j, &r):
                    num += i_sim[i, t] * (r - item_means[j])
                    den += i_sim[i, t]
            if den > 0.0:
                sir[q] = item_means[i] + num / den

            num = 0.0
            den = 0.0
            for t in range(u_len[u]):
                v = u_nbr[u, t]
                if _lookup(indptr, indices, values, v, i, &r):
                    num += u_sim[u, t] * (r - user_means[v])
                    den += u_sim[u, t]
            if den > 0.0:
                sur[q] = user_means[u] + num / den

            num = 0.0
            den = 0.0
            for t in range(u_len[u]):
                v = u_nbr[u, t]
                wv = u_sim[u, t]
                for s in range(i_len[i]):
                    j = i_nbr[i, s]
                    if _lookup(indptr, indices, values, v, j, &r):
                        w = wv * i_sim[i, s]
                        num += w * (r - user_means[v])
                        den += w
            if den > 0.0:
                suir[q] = user_means[u] + num / den
    return sir_arr, sur_arr, suir_arr
