"""Pure-Python scheduling kernels.

These are the hot inner loops of the simulator: weighted excess filling,
earliest-deadline selection and the deficit round.  A compiled twin with
identical semantics lives in ``_kernels.pyx``; ``_backend`` picks whichever
is importable.  Both operate on plain lists so results are bit-identical.
"""

from __future__ import annotations

BACKEND = "python"


def waterfill(deficits: list, weights: list, remaining: int) -> list:
    """Distribute ``remaining`` bytes over unmet demands by weight.

    Byte-granular weighted filling: conceptually every next byte goes to the
    entry whose served excess per weight is smallest (ties to the lowest
    index), capped at its deficit.  That outcome equals taking the R
    cheapest elements of the merged key sequences k/w_i, which is what this
    computes directly: bisect for the threshold key, award everything below
    it, then hand out the few threshold-level bytes in ascending index
    order.  Returns the per-index byte increments.
    """
    n = len(deficits)
    inc = [0] * n
    total_cap = 0
    for i in range(n):
        if deficits[i] > 0:
            total_cap += deficits[i]
    R = remaining if remaining < total_cap else total_cap
    if R <= 0:
        return inc

    def count_leq(t):
        # keys of entry i are k/w_i for k = 0..deficit-1; count those <= t
        c = 0
        for i in range(n):
            d = deficits[i]
            if d <= 0:
                continue
            k = int(t * weights[i]) + 1
            c += d if d < k else k
        return c

    if count_leq(0.0) >= R:
        given = 0
        for i in range(n):
            if given == R:
                break
            if deficits[i] > 0:
                inc[i] = 1
                given += 1
        return inc

    hi = 0.0
    for i in range(n):
        if deficits[i] > 0:
            key = (deficits[i] - 1) / weights[i]
            if key > hi:
                hi = key
    lo = 0.0
    for _ in range(200):
        mid = (lo + hi) * 0.5
        if mid <= lo or mid >= hi:
            break
        if count_leq(mid) >= R:
            hi = mid
        else:
            lo = mid

    base_total = 0
    for i in range(n):
        d = deficits[i]
        if d <= 0:
            continue
        k = int(lo * weights[i]) + 1
        b = d if d < k else k
        inc[i] = b
        base_total += b
    extra = R - base_total
    while extra > 0:
        progressed = False
        for i in range(n):
            if extra == 0:
                break
            if inc[i] < deficits[i] and inc[i] <= int(hi * weights[i]):
                inc[i] += 1
                extra -= 1
                progressed = True
        if not progressed:
            break
    return inc


def edf_take(
    deadlines: list, arrivals: list, sizes: list, cids: list, budget: int
) -> tuple:
    """Earliest-deadline-first over queue heads.

    ``deadlines[q]`` / ``arrivals[q]`` / ``sizes[q]`` hold the leading packets
    of queue ``q`` in FIFO order.  Repeatedly picks the head with the smallest
    (deadline, arrival, cid); the phase ends at the first pick that does not
    fit the remaining budget whole.  Returns (order, used) where ``order``
    lists one queue index per packet in transmission order.
    """
    n = len(sizes)
    heads = [0] * n
    order = []
    used = 0
    while True:
        best = -1
        bd = ba = 0.0
        bc = 0
        for q in range(n):
            h = heads[q]
            if h >= len(sizes[q]):
                continue
            d = deadlines[q][h]
            a = arrivals[q][h]
            c = cids[q]
            if best < 0 or (d, a, c) < (bd, ba, bc):
                best = q
                bd, ba, bc = d, a, c
        if best < 0:
            break
        size = sizes[best][heads[best]]
        if size > budget:
            break
        budget -= size
        used += size
        order.append(best)
        heads[best] += 1
    return order, used


def dfpq_take(
    sizes: list,
    full: list,
    quanta: list,
    deficits: list,
    cursor: int,
    budget: int,
) -> tuple:
    """Deficit rounds over the queues' head segments.

    ``sizes[q]`` holds leading packet sizes in FIFO order; ``full[q]`` says
    whether that segment is the entire queue (a truncated segment can never
    be fully consumed, because its total exceeds the budget).  Visits cycle
    from ``cursor`` over non-empty queues: each visit adds the quantum to the
    deficit counter, then sends head packets while they fit both counter and
    budget.  A drained queue forfeits its counter.  The round stops when no
    pending head fits the leftover budget.

    Returns (order, new_deficits, new_cursor, used).
    """
    n = len(sizes)
    dc = list(deficits)
    if n == 0:
        return [], dc, cursor, 0
    pos = cursor % n
    heads = [0] * n
    order = []
    used = 0
    while True:
        any_fit = False
        for q in range(n):
            h = heads[q]
            if h < len(sizes[q]) and sizes[q][h] <= budget:
                any_fit = True
                break
        if not any_fit:
            break
        q = pos
        qs = sizes[q]
        h = heads[q]
        if h < len(qs):
            dc[q] += quanta[q]
            while h < len(qs) and qs[h] <= dc[q] and qs[h] <= budget:
                dc[q] -= qs[h]
                budget -= qs[h]
                used += qs[h]
                order.append(q)
                h += 1
            heads[q] = h
            if h == len(qs) and full[q]:
                dc[q] = 0
        pos = (pos + 1) % n
    return order, dc, pos, used
