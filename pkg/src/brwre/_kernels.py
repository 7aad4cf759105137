"""Hot loops, in a numba flavour and a pure-numpy flavour.

Both flavours share signatures.  Laws are passed flattened:

    atom_start[k]..atom_start[k+1]   atoms of component k
    atom_prob[a], child_start[a]..child_start[a+1] -> child_disp (scaled ints)

Spine step laws are flattened the same way with ``step_start``, ``step_x``,
``step_xi`` and ``step_cdf`` (cumulative masses within a component).

The numba kernels draw from numba's per-thread generator, seeded once per
block; the numpy kernels take a ``np.random.Generator``.  The two flavours
therefore agree in distribution, not in individual draws.
"""
from __future__ import annotations

import math

import numpy as np

from ._backend import USE_NUMBA, njit

BIG = np.int64(1) << np.int64(60)


# --------------------------------------------------------------------------
# forward population


@njit(nogil=True, cache=True)
def _population_one(n, comp, atom_start, atom_prob, child_start, child_disp,
                    hi_cut, lo_cut, offcap, popcap, base, cur, nxt, sizes, minpos):
    width = cur.shape[0]
    cur[:] = 0
    nxt[:] = 0
    root = -base
    cur[root] = 1
    lo = root
    hi = root
    sizes[0] = 1
    minpos[0] = 0
    truncated = False
    for g in range(n):
        k = comp[g]
        a0 = atom_start[k]
        a1 = atom_start[k + 1]
        new_lo = width
        new_hi = -1
        for j in range(lo, hi + 1):
            c = cur[j]
            if c == 0:
                continue
            cur[j] = 0
            rem = c
            remp = 1.0
            for a in range(a0, a1):
                if rem == 0:
                    break
                p = atom_prob[a]
                if a == a1 - 1 or p >= remp:
                    m = rem
                else:
                    m = np.random.binomial(rem, p / remp)
                rem -= m
                remp -= p
                if m == 0:
                    continue
                nc = child_start[a + 1] - child_start[a]
                if nc > offcap:
                    continue
                for ci in range(child_start[a], child_start[a + 1]):
                    t = j + child_disp[ci]
                    nxt[t] += m
                    if t < new_lo:
                        new_lo = t
                    if t > new_hi:
                        new_hi = t
        # barrier and floor
        cut_hi = hi_cut[g + 1] - base
        cut_lo = lo_cut[g + 1] - base
        total = 0
        first = -1
        last = -1
        for j in range(new_lo, new_hi + 1):
            c = nxt[j]
            if c == 0:
                continue
            if j > cut_hi or j < cut_lo:
                nxt[j] = 0
                continue
            if popcap > 0 and total + c > popcap:
                c = popcap - total
                nxt[j] = c
                truncated = True
                if c == 0:
                    continue
            total += c
            if first < 0:
                first = j
            last = j
        sizes[g + 1] = total
        if total == 0:
            for r in range(g + 2, n + 1):
                sizes[r] = 0
            for r in range(g + 1, n + 1):
                minpos[r] = BIG
            for j in range(new_lo, new_hi + 1):
                nxt[j] = 0
            return False, truncated
        if popcap > 0 and truncated:
            for j in range(last + 1, new_hi + 1):
                nxt[j] = 0
        minpos[g + 1] = first + base
        lo = first
        hi = last
        tmp = cur
        cur = nxt
        nxt = tmp
    for j in range(lo, hi + 1):
        cur[j] = 0
    return True, truncated


@njit(nogil=True, cache=True)
def _population_block_nb(seed, reps, n, comp, atom_start, atom_prob, child_start, child_disp,
                         hi_cut, lo_cut, offcap, popcap, base, width):
    np.random.seed(seed)
    cur = np.zeros(width, np.int64)
    nxt = np.zeros(width, np.int64)
    sizes = np.zeros(n + 1, np.int64)
    minpos = np.zeros(n + 1, np.int64)
    survived = np.zeros(reps, np.bool_)
    truncated = np.zeros(reps, np.bool_)
    final = np.zeros(reps, np.int64)
    for r in range(reps):
        s, t = _population_one(n, comp, atom_start, atom_prob, child_start, child_disp,
                               hi_cut, lo_cut, offcap, popcap, base, cur, nxt, sizes, minpos)
        survived[r] = s
        truncated[r] = t
        final[r] = sizes[n]
    return survived, truncated, final


@njit(nogil=True, cache=True)
def _population_single_nb(seed, n, comp, atom_start, atom_prob, child_start, child_disp,
                          hi_cut, lo_cut, offcap, popcap, base, width):
    np.random.seed(seed)
    cur = np.zeros(width, np.int64)
    nxt = np.zeros(width, np.int64)
    sizes = np.zeros(n + 1, np.int64)
    minpos = np.zeros(n + 1, np.int64)
    s, t = _population_one(n, comp, atom_start, atom_prob, child_start, child_disp,
                           hi_cut, lo_cut, offcap, popcap, base, cur, nxt, sizes, minpos)
    return s, t, sizes, minpos


def _population_one_np(rng, n, comp, atom_start, atom_prob, child_start, child_disp,
                       hi_cut, lo_cut, offcap, popcap, base, width):
    sizes = np.zeros(n + 1, np.int64)
    minpos = np.full(n + 1, BIG, np.int64)
    sizes[0] = 1
    minpos[0] = 0
    idx = np.array([-base], np.int64)
    cnt = np.array([1], np.int64)
    truncated = False
    for g in range(n):
        k = comp[g]
        a0, a1 = atom_start[k], atom_start[k + 1]
        probs = atom_prob[a0:a1] / atom_prob[a0:a1].sum()
        draws = rng.multinomial(cnt, probs)
        nxt = np.zeros(width, np.int64)
        for a in range(a0, a1):
            c0, c1 = child_start[a], child_start[a + 1]
            if c1 - c0 > offcap:
                continue
            col = draws[:, a - a0]
            for ci in range(c0, c1):
                nxt[idx + child_disp[ci]] += col
        j = np.flatnonzero(nxt)
        keep = (j <= hi_cut[g + 1] - base) & (j >= lo_cut[g + 1] - base)
        j = j[keep]
        c = nxt[j]
        if popcap > 0 and c.sum() > popcap:
            csum = np.cumsum(c)
            stop = int(np.searchsorted(csum, popcap, side="left"))
            j = j[:stop + 1]
            c = c[:stop + 1].copy()
            c[-1] -= csum[stop] - popcap
            truncated = True
        total = int(c.sum())
        sizes[g + 1] = total
        if total == 0:
            return False, truncated, sizes, minpos
        nz = c > 0
        idx, cnt = j[nz], c[nz]
        minpos[g + 1] = idx[0] + base
    return True, truncated, sizes, minpos


def _population_block_np(rng, reps, n, *args):
    survived = np.zeros(reps, bool)
    truncated = np.zeros(reps, bool)
    final = np.zeros(reps, np.int64)
    for r in range(reps):
        s, t, sizes, _ = _population_one_np(rng, n, *args)
        survived[r], truncated[r], final[r] = s, t, sizes[n]
    return survived, truncated, final


# --------------------------------------------------------------------------
# survival indicator by lazy split exploration
#
# Disjoint groups of particles evolve independently, so a population larger
# than ``thresh`` can be split by position; the lower half is explored first
# and the upper half is pushed on a stack and only revisited if the lower
# half dies out.  The indicator "some particle reaches generation n" has the
# same law as under a full breadth-first run, but a surviving run costs
# O(n * thresh) instead of O(n * population).


@njit(nogil=True, cache=True)
def _grow(buf, need):
    if need <= buf.shape[0]:
        return buf
    out = np.empty(max(need, 2 * buf.shape[0]), buf.dtype)
    out[:buf.shape[0]] = buf
    return out


@njit(nogil=True, cache=True)
def _alive_split(n, comp, atom_start, atom_prob, child_start, child_disp,
                 hi_cut, lo_cut, offcap, base, width, thresh, nxt):
    cur_pos = np.empty(width, np.int64)
    cur_cnt = np.empty(width, np.int64)
    st_pos = np.empty(256, np.int64)
    st_cnt = np.empty(256, np.int64)
    fr_gen = np.empty(64, np.int64)
    fr_off = np.empty(64, np.int64)
    fr_len = np.empty(64, np.int64)
    top = 0
    used = 0
    ncur = 1
    cur_pos[0] = -base
    cur_cnt[0] = 1
    g = 0
    while True:
        if ncur == 0:
            if top == 0:
                return False
            top -= 1
            g = fr_gen[top]
            off = fr_off[top]
            ncur = fr_len[top]
            for q in range(ncur):
                cur_pos[q] = st_pos[off + q]
                cur_cnt[q] = st_cnt[off + q]
            used = off
            continue
        if g == n:
            return True
        total = 0
        for q in range(ncur):
            total += cur_cnt[q]
        if total > thresh:
            half = total // 2
            acc = 0
            s = 0
            while acc + cur_cnt[s] < half:
                acc += cur_cnt[s]
                s += 1
            keep = half - acc
            rest = cur_cnt[s] - keep
            nhigh = ncur - s - 1 + (1 if rest > 0 else 0)
            st_pos = _grow(st_pos, used + nhigh)
            st_cnt = _grow(st_cnt, used + nhigh)
            fr_gen = _grow(fr_gen, top + 1)
            fr_off = _grow(fr_off, top + 1)
            fr_len = _grow(fr_len, top + 1)
            w = used
            if rest > 0:
                st_pos[w] = cur_pos[s]
                st_cnt[w] = rest
                w += 1
            for q in range(s + 1, ncur):
                st_pos[w] = cur_pos[q]
                st_cnt[w] = cur_cnt[q]
                w += 1
            fr_gen[top] = g
            fr_off[top] = used
            fr_len[top] = nhigh
            top += 1
            used = w
            if keep > 0:
                cur_cnt[s] = keep
                ncur = s + 1
            else:
                ncur = s
            continue
        # one generation
        k = comp[g]
        a0 = atom_start[k]
        a1 = atom_start[k + 1]
        new_lo = width
        new_hi = -1
        for q in range(ncur):
            j = cur_pos[q]
            rem = cur_cnt[q]
            remp = 1.0
            for a in range(a0, a1):
                if rem == 0:
                    break
                p = atom_prob[a]
                if a == a1 - 1 or p >= remp:
                    m = rem
                else:
                    m = np.random.binomial(rem, p / remp)
                rem -= m
                remp -= p
                if m == 0:
                    continue
                if child_start[a + 1] - child_start[a] > offcap:
                    continue
                for ci in range(child_start[a], child_start[a + 1]):
                    t = j + child_disp[ci]
                    nxt[t] += m
                    if t < new_lo:
                        new_lo = t
                    if t > new_hi:
                        new_hi = t
        cut_hi = hi_cut[g + 1] - base
        cut_lo = lo_cut[g + 1] - base
        ncur = 0
        for j in range(new_lo, new_hi + 1):
            c = nxt[j]
            if c == 0:
                continue
            nxt[j] = 0
            if j > cut_hi or j < cut_lo:
                continue
            cur_pos[ncur] = j
            cur_cnt[ncur] = c
            ncur += 1
        g += 1


@njit(nogil=True, cache=True)
def _alive_block_nb(seed, reps, n, comp, atom_start, atom_prob, child_start, child_disp,
                    hi_cut, lo_cut, offcap, base, width, thresh):
    np.random.seed(seed)
    nxt = np.zeros(width, np.int64)
    out = np.zeros(reps, np.bool_)
    for r in range(reps):
        out[r] = _alive_split(n, comp, atom_start, atom_prob, child_start, child_disp,
                              hi_cut, lo_cut, offcap, base, width, thresh, nxt)
    return out


def _alive_block_np(rng, reps, n, comp, atom_start, atom_prob, child_start, child_disp,
                    hi_cut, lo_cut, offcap, base, width, thresh):
    out = np.zeros(reps, bool)
    for r in range(reps):
        stack = [(0, np.array([-base], np.int64), np.array([1], np.int64))]
        alive = False
        while stack and not alive:
            g, idx, cnt = stack.pop()
            while idx.size:
                if g == n:
                    alive = True
                    break
                total = int(cnt.sum())
                if total > thresh:
                    csum = np.cumsum(cnt)
                    half = total // 2
                    s = int(np.searchsorted(csum, half, side="left"))
                    keep = half - (int(csum[s - 1]) if s else 0)
                    hi_idx, hi_cnt = idx[s:].copy(), cnt[s:].copy()
                    hi_cnt[0] -= keep
                    nz = hi_cnt > 0
                    stack.append((g, hi_idx[nz], hi_cnt[nz]))
                    idx, cnt = idx[:s + 1].copy(), cnt[:s + 1].copy()
                    cnt[-1] = keep
                    nz = cnt > 0
                    idx, cnt = idx[nz], cnt[nz]
                    continue
                k = comp[g]
                a0, a1 = atom_start[k], atom_start[k + 1]
                draws = rng.multinomial(cnt, atom_prob[a0:a1] / atom_prob[a0:a1].sum())
                nxt = np.zeros(width, np.int64)
                for a in range(a0, a1):
                    c0, c1 = child_start[a], child_start[a + 1]
                    if c1 - c0 > offcap:
                        continue
                    for ci in range(c0, c1):
                        nxt[idx + child_disp[ci]] += draws[:, a - a0]
                j = np.flatnonzero(nxt)
                j = j[(j <= hi_cut[g + 1] - base) & (j >= lo_cut[g + 1] - base)]
                idx, cnt = j, nxt[j]
                g += 1
        out[r] = alive
    return out


# --------------------------------------------------------------------------
# exact survival: backward recursion over the lattice


@njit(nogil=True, cache=True)
def _survival_dp_nb(n, comp, atom_start, atom_prob, child_start, child_disp,
                    hi_cut, lo_cut, offcap, base, width):
    s = np.zeros(width, np.float64)
    t = np.zeros(width, np.float64)
    for j in range(width):
        pos = j + base
        if lo_cut[n] <= pos <= hi_cut[n]:
            s[j] = 1.0
    for g in range(n - 1, -1, -1):
        k = comp[g]
        for j in range(width):
            pos = j + base
            if g > 0 and (pos > hi_cut[g] or pos < lo_cut[g]):
                t[j] = 0.0
                continue
            acc = 0.0
            for a in range(atom_start[k], atom_start[k + 1]):
                c0 = child_start[a]
                c1 = child_start[a + 1]
                if c1 - c0 > offcap:
                    continue
                hit = 0.0
                for ci in range(c0, c1):
                    q = j + child_disp[ci]
                    if 0 <= q < width:
                        v = s[q]
                        hit = hit + v - hit * v
                acc += atom_prob[a] * hit
            t[j] = acc
        tmp = s
        s = t
        t = tmp
    return s[-base]


def _shifted(arr, d):
    """``out[j] = arr[j + d]`` with zero fill."""
    out = np.zeros_like(arr)
    if d >= 0:
        out[:arr.size - d] = arr[d:]
    else:
        out[-d:] = arr[:arr.size + d]
    return out


def _survival_dp_np(n, comp, atom_start, atom_prob, child_start, child_disp,
                    hi_cut, lo_cut, offcap, base, width):
    pos = np.arange(width, dtype=np.int64) + base
    s = ((pos >= lo_cut[n]) & (pos <= hi_cut[n])).astype(float)
    for g in range(n - 1, -1, -1):
        k = comp[g]
        acc = np.zeros(width)
        for a in range(atom_start[k], atom_start[k + 1]):
            c0, c1 = child_start[a], child_start[a + 1]
            if c1 - c0 > offcap:
                continue
            miss = np.ones(width)
            for ci in range(c0, c1):
                miss *= 1.0 - _shifted(s, int(child_disp[ci]))
            acc += atom_prob[a] * (1.0 - miss)
        if g > 0:
            acc[(pos > hi_cut[g]) | (pos < lo_cut[g])] = 0.0
        s = acc
    return float(s[-base])


# --------------------------------------------------------------------------
# first and second moments of the admissible generation-n count


@njit(nogil=True, cache=True)
def _moments_dp_nb(n, comp, atom_start, atom_prob, child_start, child_disp,
                   hi_cut, lo_cut, offcap, base, width):
    # g1[i][j]: expected admissible generation-n descendants of an admissible
    # particle at (i, j); built backward, then paired with forward densities.
    g1 = np.zeros((n + 1, width))
    for j in range(width):
        pos = j + base
        if lo_cut[n] <= pos <= hi_cut[n]:
            g1[n, j] = 1.0
    for g in range(n - 1, -1, -1):
        k = comp[g]
        for j in range(width):
            pos = j + base
            if g > 0 and (pos > hi_cut[g] or pos < lo_cut[g]):
                continue
            acc = 0.0
            for a in range(atom_start[k], atom_start[k + 1]):
                c0 = child_start[a]
                c1 = child_start[a + 1]
                if c1 - c0 > offcap:
                    continue
                for ci in range(c0, c1):
                    q = j + child_disp[ci]
                    if 0 <= q < width:
                        acc += atom_prob[a] * g1[g + 1, q]
            g1[g, j] = acc
    # forward: m[j] expected admissible particles at generation g
    m = np.zeros(width)
    mn = np.zeros(width)
    m[-base] = 1.0
    pairs = 0.0
    for g in range(n):
        k = comp[g]
        mn[:] = 0.0
        for j in range(width):
            if m[j] == 0.0:
                continue
            cross = 0.0
            for a in range(atom_start[k], atom_start[k + 1]):
                c0 = child_start[a]
                c1 = child_start[a + 1]
                if c1 - c0 > offcap:
                    continue
                s1 = 0.0
                s2 = 0.0
                for ci in range(c0, c1):
                    q = j + child_disp[ci]
                    v = g1[g + 1, q]
                    s1 += v
                    s2 += v * v
                    mn[q] += m[j] * atom_prob[a]
                cross += atom_prob[a] * (s1 * s1 - s2)
            pairs += m[j] * cross
        for j in range(width):
            pos = j + base
            if pos > hi_cut[g + 1] or pos < lo_cut[g + 1]:
                mn[j] = 0.0
        tmp = m
        m = mn
        mn = tmp
    first = g1[0, -base]
    return first, first + pairs


# --------------------------------------------------------------------------
# spine paths with integer windows on the chi lattice


@njit(nogil=True, cache=True)
def _spine_block_nb(seed, reps, n, comp, step_start, step_x, step_xi, step_cdf, klo, khi, cap):
    np.random.seed(seed)
    chi_end = np.zeros(reps, np.int64)
    ok = np.zeros(reps, np.bool_)
    for r in range(reps):
        k = 0
        good = True
        for i in range(n):
            c = comp[i]
            s0 = step_start[c]
            s1 = step_start[c + 1]
            u = np.random.random()
            s = s0
            while s < s1 - 1 and step_cdf[s] <= u:
                s += 1
            k += step_x[s]
            if good:
                if step_xi[s] > cap[i + 1] or k < klo[i + 1] or k > khi[i + 1]:
                    good = False
        chi_end[r] = k
        ok[r] = good
    return chi_end, ok


def _spine_block_np(rng, reps, n, comp, step_start, step_x, step_xi, step_cdf, klo, khi, cap):
    k = np.zeros(reps, np.int64)
    ok = np.ones(reps, bool)
    for i in range(n):
        c = comp[i]
        s0, s1 = step_start[c], step_start[c + 1]
        u = rng.random(reps)
        s = s0 + np.minimum(np.searchsorted(step_cdf[s0:s1], u, side="right"), s1 - s0 - 1)
        k += step_x[s]
        ok &= (step_xi[s] <= cap[i + 1]) & (k >= klo[i + 1]) & (k <= khi[i + 1])
    return k, ok


# --------------------------------------------------------------------------
# corridor dynamic programs on the chi lattice


@njit(nogil=True, cache=True)
def _corridor_forward_nb(n, comp, step_start, step_x, step_xi, step_mass, klo, khi, cap, maxw):
    v = np.zeros(maxw)
    w = np.zeros(maxw)
    a = klo[0]
    b = khi[0]
    if not (a <= 0 <= b):
        return -np.inf
    v[0 - a] = 1.0
    logp = 0.0
    for i in range(1, n + 1):
        c = comp[i - 1]
        na = klo[i]
        nb = khi[i]
        if nb < na:
            return -np.inf
        for j in range(nb - na + 1):
            w[j] = 0.0
        for j in range(a, b + 1):
            m = v[j - a]
            if m == 0.0:
                continue
            for s in range(step_start[c], step_start[c + 1]):
                if step_xi[s] > cap[i]:
                    continue
                t = j + step_x[s]
                if na <= t <= nb:
                    w[t - na] += m * step_mass[s]
        tot = 0.0
        for j in range(nb - na + 1):
            tot += w[j]
        if tot <= 0.0:
            return -np.inf
        logp += math.log(tot)
        inv = 1.0 / tot
        for j in range(nb - na + 1):
            v[j] = w[j] * inv
        a = na
        b = nb
    return logp


def _corridor_forward_np(n, comp, step_start, step_x, step_xi, step_mass, klo, khi, cap, maxw):
    a, b = int(klo[0]), int(khi[0])
    if not (a <= 0 <= b):
        return -math.inf
    v = np.zeros(b - a + 1)
    v[-a] = 1.0
    logp = 0.0
    for i in range(1, n + 1):
        c = comp[i - 1]
        na, nb = int(klo[i]), int(khi[i])
        if nb < na:
            return -math.inf
        w = np.zeros(nb - na + 1)
        src = np.arange(a, b + 1)
        for s in range(step_start[c], step_start[c + 1]):
            if step_xi[s] > cap[i]:
                continue
            t = src + step_x[s]
            sel = (t >= na) & (t <= nb)
            w[t[sel] - na] += v[sel] * step_mass[s]
        tot = w.sum()
        if tot <= 0.0:
            return -math.inf
        logp += math.log(tot)
        v = w / tot
        a, b = na, nb
    return logp


@njit(nogil=True, cache=True)
def _corridor_backward_nb(n, comp, step_start, step_x, step_xi, step_mass, klo, khi, cap, maxw):
    """``log P(stay | chi_0 = k)`` for every ``k`` in the step-0 window."""
    v = np.zeros(maxw)
    w = np.zeros(maxw)
    a = klo[n]
    b = khi[n]
    for j in range(b - a + 1):
        v[j] = 1.0
    logs = 0.0
    for i in range(n - 1, -1, -1):
        c = comp[i]
        na = klo[i]
        nb = khi[i]
        top = 0.0
        for j in range(na, nb + 1):
            acc = 0.0
            for s in range(step_start[c], step_start[c + 1]):
                if step_xi[s] > cap[i + 1]:
                    continue
                t = j + step_x[s]
                if a <= t <= b:
                    acc += step_mass[s] * v[t - a]
            w[j - na] = acc
            if acc > top:
                top = acc
        if top <= 0.0:
            out = np.empty(nb - na + 1)
            out[:] = -np.inf
            return out
        logs += math.log(top)
        inv = 1.0 / top
        for j in range(nb - na + 1):
            v[j] = w[j] * inv
        a = na
        b = nb
    out = np.empty(b - a + 1)
    for j in range(b - a + 1):
        out[j] = math.log(v[j]) + logs if v[j] > 0.0 else -np.inf
    return out


def _corridor_backward_np(n, comp, step_start, step_x, step_xi, step_mass, klo, khi, cap, maxw):
    a, b = int(klo[n]), int(khi[n])
    v = np.ones(b - a + 1)
    logs = 0.0
    for i in range(n - 1, -1, -1):
        c = comp[i]
        na, nb = int(klo[i]), int(khi[i])
        src = np.arange(na, nb + 1)
        w = np.zeros(nb - na + 1)
        for s in range(step_start[c], step_start[c + 1]):
            if step_xi[s] > cap[i + 1]:
                continue
            t = src + step_x[s]
            sel = (t >= a) & (t <= b)
            w[sel] += step_mass[s] * v[t[sel] - a]
        top = w.max() if w.size else 0.0
        if top <= 0.0:
            return np.full(nb - na + 1, -np.inf)
        logs += math.log(top)
        v = w / top
        a, b = na, nb
    with np.errstate(divide="ignore"):
        return np.log(v) + logs


# --------------------------------------------------------------------------
# maximal excursion of a finite-support walk


@njit(nogil=True, cache=True)
def _max_excursion_nb(seed, reps, l, values, cdf):
    np.random.seed(seed)
    out = np.zeros(reps)
    k = values.shape[0]
    for r in range(reps):
        s = 0.0
        top = 0.0
        for i in range(l):
            u = np.random.random()
            j = 0
            while j < k - 1 and cdf[j] <= u:
                j += 1
            s += values[j]
            a = abs(s)
            if a > top:
                top = a
        out[r] = top
    return out


def _max_excursion_np(rng, reps, l, values, cdf):
    top = np.zeros(reps)
    s = np.zeros(reps)
    chunk = 256
    for start in range(0, l, chunk):
        m = min(chunk, l - start)
        j = np.minimum(np.searchsorted(cdf, rng.random((reps, m)), side="right"), values.size - 1)
        path = s[:, None] + np.cumsum(values[j], axis=1)
        top = np.maximum(top, np.abs(path).max(axis=1))
        s = path[:, -1]
    return top


KERNELS = {
    "numba": {
        "population_block": _population_block_nb,
        "population_single": _population_single_nb,
        "alive_block": _alive_block_nb,
        "survival_dp": _survival_dp_nb,
        "moments_dp": _moments_dp_nb,
        "spine_block": _spine_block_nb,
        "corridor_forward": _corridor_forward_nb,
        "corridor_backward": _corridor_backward_nb,
        "max_excursion": _max_excursion_nb,
    },
    "numpy": {
        "population_block": _population_block_np,
        "population_single": _population_one_np,
        "alive_block": _alive_block_np,
        "survival_dp": _survival_dp_np,
        "moments_dp": None,
        "spine_block": _spine_block_np,
        "corridor_forward": _corridor_forward_np,
        "corridor_backward": _corridor_backward_np,
        "max_excursion": _max_excursion_np,
    },
}


def kernel(name: str, backend: str | None = None):
    if backend is None:
        backend = "numba" if USE_NUMBA else "numpy"
    fn = KERNELS[backend][name]
    if fn is None:
        # no vectorized rewrite; the jit kernel runs as plain Python
        fn = getattr(KERNELS["numba"][name], "py_func", KERNELS["numba"][name])
    return fn
