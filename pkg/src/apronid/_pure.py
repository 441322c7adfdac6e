"""Pure-Python hull and caliper kernels.

Reference implementation for :mod:`apronid._speedups`. Both modules share the
same signatures and must return identical results. Coordinates are in the
mathematical frame (y up); callers convert from raster rows.

Every function takes two equal-length integer sequences ``xs`` and ``ys``
holding distinct points.
"""


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def start_index(xs, ys):
    """Index of the leftmost point, ties resolved toward the largest y."""
    best = 0
    for i in range(1, len(xs)):
        if xs[i] < xs[best] or (xs[i] == xs[best] and ys[i] > ys[best]):
            best = i
    return best


def giftwrap(xs, ys):
    n = len(xs)
    if n == 0:
        return []
    start = start_index(xs, ys)
    if n == 1:
        return [start]
    hull = [start]
    p = start
    while True:
        px, py = xs[p], ys[p]
        q = 1 if p == 0 else 0
        qx, qy = xs[q], ys[q]
        for r in range(n):
            if r == p or r == q:
                continue
            rx, ry = xs[r], ys[r]
            c = _cross(px, py, qx, qy, rx, ry)
            if c < 0:
                q, qx, qy = r, rx, ry
            elif c == 0:
                # collinear: keep the farther one so hulls have strict turns
                dq = (qx - px) ** 2 + (qy - py) ** 2
                dr = (rx - px) ** 2 + (ry - py) ** 2
                if dr > dq:
                    q, qx, qy = r, rx, ry
        if q == start:
            break
        hull.append(q)
        p = q
    return hull


def monotone_chain(xs, ys):
    n = len(xs)
    if n == 0:
        return []
    order = sorted(range(n), key=lambda i: (xs[i], ys[i]))
    if n == 1:
        return order

    def half(seq):
        chain = []
        for i in seq:
            while len(chain) >= 2:
                a, b = chain[-2], chain[-1]
                if _cross(xs[a], ys[a], xs[b], ys[b], xs[i], ys[i]) <= 0:
                    chain.pop()
                else:
                    break
            chain.append(i)
        return chain

    lower = half(order)
    upper = half(reversed(order))
    ring = lower[:-1] + upper[:-1]
    start = start_index(xs, ys)
    k = ring.index(start)
    return ring[k:] + ring[:k]


def calipers_sq(xs, ys):
    """Squared diameter of a strictly convex CCW polygon via antipodal pairs."""
    h = len(xs)
    if h < 2:
        return 0
    if h == 2:
        return (xs[0] - xs[1]) ** 2 + (ys[0] - ys[1]) ** 2
    best = 0
    j = 1
    for i in range(h):
        ni = (i + 1) % h
        ex, ey = xs[ni] - xs[i], ys[ni] - ys[i]
        while True:
            nj = (j + 1) % h
            # twice the triangle area against edge i, compared for j and j+1
            a_next = ex * (ys[nj] - ys[i]) - ey * (xs[nj] - xs[i])
            a_cur = ex * (ys[j] - ys[i]) - ey * (xs[j] - xs[i])
            if a_next > a_cur:
                j = nj
            else:
                break
        for k in (i, ni):
            d = (xs[k] - xs[j]) ** 2 + (ys[k] - ys[j]) ** 2
            if d > best:
                best = d
    return best
