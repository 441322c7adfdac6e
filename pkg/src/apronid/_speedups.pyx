# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hull and caliper kernels, mirroring :mod:`apronid._pure`.

Arithmetic is done in 64-bit integers. Callers must keep absolute coordinate
values below 2**30 so that cross products cannot overflow.
"""
import numpy as np

ctypedef long long i64


cdef inline i64 _cross(i64 ox, i64 oy, i64 ax, i64 ay, i64 bx, i64 by) nogil:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


cdef Py_ssize_t _start(const i64[:] xs, const i64[:] ys) nogil:
    cdef Py_ssize_t i, best = 0
    for i in range(1, xs.shape[0]):
        if xs[i] < xs[best] or (xs[i] == xs[best] and ys[i] > ys[best]):
            best = i
    return best


def start_index(xs, ys):
    cdef const i64[:] vx = np.ascontiguousarray(xs, dtype=np.int64)
    cdef const i64[:] vy = np.ascontiguousarray(ys, dtype=np.int64)
    return _start(vx, vy)


def giftwrap(xs, ys):
    cdef const i64[:] vx = np.ascontiguousarray(xs, dtype=np.int64)
    cdef const i64[:] vy = np.ascontiguousarray(ys, dtype=np.int64)
    cdef Py_ssize_t n = vx.shape[0]
    if n == 0:
        return []
    cdef Py_ssize_t start = _start(vx, vy)
    if n == 1:
        return [start]
    cdef Py_ssize_t p = start, q, r
    cdef i64 px, py, qx, qy, rx, ry, c, dq, dr
    hull = [start]
    while True:
        px = vx[p]
        py = vy[p]
        q = 1 if p == 0 else 0
        qx = vx[q]
        qy = vy[q]
        with nogil:
            for r in range(n):
                if r == p or r == q:
                    continue
                rx = vx[r]
                ry = vy[r]
                c = _cross(px, py, qx, qy, rx, ry)
                if c < 0:
                    q = r
                    qx = rx
                    qy = ry
                elif c == 0:
                    dq = (qx - px) * (qx - px) + (qy - py) * (qy - py)
                    dr = (rx - px) * (rx - px) + (ry - py) * (ry - py)
                    if dr > dq:
                        q = r
                        qx = rx
                        qy = ry
        if q == start:
            break
        hull.append(q)
        p = q
    return hull


cdef Py_ssize_t _half(const i64[:] xs, const i64[:] ys, const i64[:] order,
                      bint reverse, i64[:] chain) nogil:
    cdef Py_ssize_t n = order.shape[0], k, m = 0
    cdef i64 i, a, b
    for k in range(n):
        i = order[n - 1 - k] if reverse else order[k]
        while m >= 2:
            a = chain[m - 2]
            b = chain[m - 1]
            if _cross(xs[a], ys[a], xs[b], ys[b], xs[i], ys[i]) <= 0:
                m -= 1
            else:
                break
        chain[m] = i
        m += 1
    return m


def monotone_chain(xs, ys):
    cdef const i64[:] vx = np.ascontiguousarray(xs, dtype=np.int64)
    cdef const i64[:] vy = np.ascontiguousarray(ys, dtype=np.int64)
    cdef Py_ssize_t n = vx.shape[0]
    if n == 0:
        return []
    order_arr = np.lexsort((np.asarray(vy), np.asarray(vx))).astype(np.int64)
    if n == 1:
        return [int(order_arr[0])]
    cdef const i64[:] order = order_arr
    lower_arr = np.empty(n, dtype=np.int64)
    upper_arr = np.empty(n, dtype=np.int64)
    cdef i64[:] lower = lower_arr
    cdef i64[:] upper = upper_arr
    cdef Py_ssize_t nl, nu
    with nogil:
        nl = _half(vx, vy, order, False, lower)
        nu = _half(vx, vy, order, True, upper)
    ring = lower_arr[:nl - 1].tolist() + upper_arr[:nu - 1].tolist()
    start = _start(vx, vy)
    k = ring.index(start)
    return ring[k:] + ring[:k]


def calipers_sq(xs, ys):
    cdef const i64[:] vx = np.ascontiguousarray(xs, dtype=np.int64)
    cdef const i64[:] vy = np.ascontiguousarray(ys, dtype=np.int64)
    cdef Py_ssize_t h = vx.shape[0]
    if h < 2:
        return 0
    if h == 2:
        return int((vx[0] - vx[1]) * (vx[0] - vx[1]) + (vy[0] - vy[1]) * (vy[0] - vy[1]))
    cdef Py_ssize_t i, ni, j = 1, nj, k, idx
    cdef i64 ex, ey, a_next, a_cur, d, best = 0
    with nogil:
        for i in range(h):
            ni = (i + 1) % h
            ex = vx[ni] - vx[i]
            ey = vy[ni] - vy[i]
            while True:
                nj = (j + 1) % h
                a_next = ex * (vy[nj] - vy[i]) - ey * (vx[nj] - vx[i])
                a_cur = ex * (vy[j] - vy[i]) - ey * (vx[j] - vx[i])
                if a_next > a_cur:
                    j = nj
                else:
                    break
            for k in range(2):
                idx = i if k == 0 else ni
                d = (vx[idx] - vx[j]) * (vx[idx] - vx[j]) + (vy[idx] - vy[j]) * (vy[idx] - vy[j])
                if d > best:
                    best = d
    return int(best)
