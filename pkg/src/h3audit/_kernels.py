"""Numba kernels over uint64 neighbourhood bitsets.

All kernels release the GIL so callers can split the outermost loop across
threads; every kernel returns exact integers, so the sum over any partition
of the outer range is the same.
"""
import numpy as np
from numba import njit

_U1 = np.uint64(1)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, inline="always")
def popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True, inline="always")
def _pidx(u, v, n):
    if u > v:
        u, v = v, u
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


@njit(cache=True, inline="always")
def _lowbit(x):
    # index of the lowest set bit of a non-zero word
    i = np.int64(0)
    while (x & _U1) == np.uint64(0):
        x >>= _U1
        i += 1
    return i


@njit(cache=True)
def _tail_count(nbhd, n, W, used, t, a0, a1):
    """Ordered placements of ``t`` (1 or 2) pendant edges at images a0, a1 avoiding ``used``.

    A pendant edge is {a, x, y} with x, y fresh. Two pendants must also be
    vertex-disjoint; the overlap is removed by inclusion-exclusion.
    """
    la = np.int64(0)
    lc = np.int64(0)
    cross = np.int64(0)
    common = np.int64(0)
    for w in range(n):
        if (used[w >> 6] >> np.uint64(w & 63)) & _U1:
            continue
        ra = _pidx(a0, w, n)
        da = np.int64(0)
        if t == 1:
            for j in range(W):
                da += popcount64(nbhd[ra, j] & ~used[j])
            la += da
            continue
        rc = _pidx(a1, w, n)
        dc = np.int64(0)
        cm = np.int64(0)
        for j in range(W):
            fa = nbhd[ra, j] & ~used[j]
            fc = nbhd[rc, j] & ~used[j]
            da += popcount64(fa)
            dc += popcount64(fc)
            cm += popcount64(fa & fc)
        la += da
        lc += dc
        cross += da * dc
        common += cm
    if t == 1:
        return la  # 2 * (la / 2) orientations
    la //= 2
    lc //= 2
    common //= 2
    return 4 * (la * lc - cross + common)


@njit(cache=True, nogil=True)
def count_injective(nbhd, n, W, nlev, close_ptr, close_a, close_b, tail_t, tail_a0, tail_a1, root_lo, root_hi):
    """Count injective images of the enumerated levels times the tail completions.

    Level ``i`` closes the edges ``{i, close_a[j], close_b[j]}`` for
    ``close_ptr[i] <= j < close_ptr[i+1]`` (both other ends are earlier
    levels). Level 0 ranges over vertices ``root_lo..root_hi-1``.
    """
    img = np.zeros(nlev, dtype=np.int64)
    used = np.zeros(W, dtype=np.uint64)
    cand = np.zeros((nlev, W), dtype=np.uint64)
    full = np.zeros(W, dtype=np.uint64)
    for w in range(n):
        full[w >> 6] |= _U1 << np.uint64(w & 63)
    for w in range(root_lo, root_hi):
        cand[0, w >> 6] |= _U1 << np.uint64(w & 63)
    total = np.int64(0)
    last = nlev - 1
    if last == 0 and tail_t == 0:
        for j in range(W):
            total += popcount64(cand[0, j])
        return total

    lev = 0
    while lev >= 0:
        # next candidate at this level
        v = -1
        for j in range(W):
            x = cand[lev, j]
            if x != np.uint64(0):
                b = _lowbit(x)
                cand[lev, j] = x & (x - _U1)
                v = j * 64 + b
                break
        if v < 0:
            lev -= 1
            if lev >= 0:
                u = img[lev]
                used[u >> 6] &= ~(_U1 << np.uint64(u & 63))
            continue
        img[lev] = v
        used[v >> 6] |= _U1 << np.uint64(v & 63)
        if lev == last:
            total += _tail_count(nbhd, n, W, used, tail_t, img[tail_a0], img[tail_a1])
            used[v >> 6] &= ~(_U1 << np.uint64(v & 63))
            continue
        nxt = lev + 1
        for j in range(W):
            cand[nxt, j] = full[j] & ~used[j]
        for c in range(close_ptr[nxt], close_ptr[nxt + 1]):
            r = _pidx(img[close_a[c]], img[close_b[c]], n)
            for j in range(W):
                cand[nxt, j] &= nbhd[r, j]
        if nxt == last and tail_t == 0:
            for j in range(W):
                total += popcount64(cand[nxt, j])
            used[v >> 6] &= ~(_U1 << np.uint64(v & 63))
            continue
        lev = nxt
    return total


@njit(cache=True, nogil=True)
def max_joint_codegree(nbhd, W, r, lo, hi, start_best):
    """Exact max of |N(S_1) ∩ ... ∩ N(S_r)| over r-subsets of distinct pairs.

    The first pair ranges over ``lo..hi-1``; later pairs have larger indices.
    Branches whose running intersection cannot beat the best so far are cut.
    Returns the best value and the witness indices (``-1`` if none beats
    ``start_best``).
    """
    P = nbhd.shape[0]
    best = start_best
    wit = -np.ones(r, dtype=np.int64)
    idx = np.zeros(r, dtype=np.int64)
    inter = np.zeros((r, W), dtype=np.uint64)
    for s0 in range(lo, hi):
        c0 = np.int64(0)
        for j in range(W):
            inter[0, j] = nbhd[s0, j]
            c0 += popcount64(inter[0, j])
        if c0 <= best:
            continue
        if r == 1:
            best = c0
            wit[0] = s0
            continue
        idx[0] = s0
        lev = 1
        idx[1] = s0
        while lev >= 1:
            idx[lev] += 1
            if idx[lev] >= P:
                lev -= 1
                continue
            s = idx[lev]
            c = np.int64(0)
            for j in range(W):
                inter[lev, j] = inter[lev - 1, j] & nbhd[s, j]
                c += popcount64(inter[lev, j])
            if c <= best:
                continue
            if lev == r - 1:
                best = c
                for i in range(r):
                    wit[i] = idx[i]
                continue
            lev += 1
            idx[lev] = s
    return best, wit
