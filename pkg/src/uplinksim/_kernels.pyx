# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled scheduling kernels; semantics identical to ``_kernels_py``.

Both backends operate on plain Python lists and use the same arithmetic
expressions in the same order, so their outputs are bit-identical.
"""

BACKEND = "compiled"


cdef long long _count_leq(list deficits, list weights, Py_ssize_t n, double t):
    # keys of entry i are k/w_i for k = 0..deficit-1; count those <= t
    cdef long long c = 0, d, k
    cdef Py_ssize_t i
    for i in range(n):
        d = <long long>deficits[i]
        if d <= 0:
            continue
        k = <long long>(t * <double>weights[i]) + 1
        c += d if d < k else k
    return c


def waterfill(list deficits, list weights, long long remaining):
    """Distribute ``remaining`` bytes over unmet demands by weight;
    semantics identical to the pure twin (byte-granular weighted filling)."""
    cdef Py_ssize_t n = len(deficits)
    cdef list inc = [0] * n
    cdef long long total_cap = 0, R, d, k, b, base_total, extra, given
    cdef Py_ssize_t i, it
    cdef double lo, hi, mid, key
    cdef bint progressed
    for i in range(n):
        if <long long>deficits[i] > 0:
            total_cap += <long long>deficits[i]
    R = remaining if remaining < total_cap else total_cap
    if R <= 0:
        return inc

    if _count_leq(deficits, weights, n, 0.0) >= R:
        given = 0
        for i in range(n):
            if given == R:
                break
            if <long long>deficits[i] > 0:
                inc[i] = 1
                given += 1
        return inc

    hi = 0.0
    for i in range(n):
        d = <long long>deficits[i]
        if d > 0:
            key = (<double>(d - 1)) / <double>weights[i]
            if key > hi:
                hi = key
    lo = 0.0
    for it in range(200):
        mid = (lo + hi) * 0.5
        if mid <= lo or mid >= hi:
            break
        if _count_leq(deficits, weights, n, mid) >= R:
            hi = mid
        else:
            lo = mid

    base_total = 0
    for i in range(n):
        d = <long long>deficits[i]
        if d <= 0:
            continue
        k = <long long>(lo * <double>weights[i]) + 1
        b = d if d < k else k
        inc[i] = b
        base_total += b
    extra = R - base_total
    while extra > 0:
        progressed = False
        for i in range(n):
            if extra == 0:
                break
            if (<long long>inc[i] < <long long>deficits[i]
                    and <long long>inc[i] <= <long long>(hi * <double>weights[i])):
                inc[i] = <long long>inc[i] + 1
                extra -= 1
                progressed = True
        if not progressed:
            break
    return inc


def edf_take(list deadlines, list arrivals, list sizes, list cids,
             long long budget):
    """Earliest-deadline-first over queue heads; stops at the first pick
    that does not fit the remaining budget whole."""
    cdef Py_ssize_t n = len(sizes)
    cdef list heads = [0] * n
    cdef list order = []
    cdef long long used = 0, size
    cdef Py_ssize_t q, h, best
    cdef double bd, ba, d, a
    cdef long long bc, c
    while True:
        best = -1
        bd = 0.0
        ba = 0.0
        bc = 0
        for q in range(n):
            h = <Py_ssize_t>heads[q]
            if h >= len(<list>sizes[q]):
                continue
            d = <double>(<list>deadlines[q])[h]
            a = <double>(<list>arrivals[q])[h]
            c = <long long>cids[q]
            if best < 0 or d < bd or (d == bd and (a < ba or (a == ba and c < bc))):
                best = q
                bd = d
                ba = a
                bc = c
        if best < 0:
            break
        h = <Py_ssize_t>heads[best]
        size = <long long>(<list>sizes[best])[h]
        if size > budget:
            break
        budget -= size
        used += size
        order.append(best)
        heads[best] = h + 1
    return order, used


def dfpq_take(list sizes, list full, list quanta, list deficits,
              long long cursor, long long budget):
    """Deficit rounds over the queues' head segments; see the pure twin for
    the full rule statement."""
    cdef Py_ssize_t n = len(sizes)
    cdef list dc = list(deficits)
    if n == 0:
        return [], dc, cursor, 0
    cdef Py_ssize_t pos = <Py_ssize_t>(cursor % n)
    cdef list heads = [0] * n
    cdef list order = []
    cdef long long used = 0, counter, size
    cdef Py_ssize_t q, h, qlen
    cdef bint any_fit
    cdef list qs
    while True:
        any_fit = False
        for q in range(n):
            h = <Py_ssize_t>heads[q]
            qs = <list>sizes[q]
            if h < len(qs) and <long long>qs[h] <= budget:
                any_fit = True
                break
        if not any_fit:
            break
        q = pos
        qs = <list>sizes[q]
        qlen = len(qs)
        h = <Py_ssize_t>heads[q]
        if h < qlen:
            counter = <long long>dc[q] + <long long>quanta[q]
            while h < qlen:
                size = <long long>qs[h]
                if size > counter or size > budget:
                    break
                counter -= size
                budget -= size
                used += size
                order.append(q)
                h += 1
            heads[q] = h
            if h == qlen and <bint>full[q]:
                counter = 0
            dc[q] = counter
        pos = (pos + 1) % n
    return order, dc, pos, used
