"""Numba kernels shared by the secular and Seba solvers.

Everything here works on a plain sorted array of poles p and the Cauchy sum

    G(E) = sum_i 1 / (p_i - E),

which is strictly increasing on every pole-free interval.  A balanced
interval tree with per-node moment expansions makes a single evaluation of
G at a batch of sorted targets cost O((N + targets) log N) instead of
O(N * targets); the root solver calls it once per sweep for all still
unconverged gaps.  The per-gap iteration depends only on the gap and the
full pole array, never on which other gaps were requested, so windowed and
full solves produce bitwise identical roots.
"""

from __future__ import annotations

import numpy as np
from numba import njit

K_MOMENTS = 30          # expansion order; (1/3)^30 ~ 5e-15 truncation
LEAF = 32               # direct evaluation below this node size
SEP = 3.0               # far-field acceptance: |E - center| >= SEP * halfwidth
MAX_SWEEPS = 400


def _binom_table(n: int) -> np.ndarray:
    B = np.zeros((n, n))
    for i in range(n):
        B[i, 0] = 1.0
        for j in range(1, i + 1):
            B[i, j] = B[i - 1, j - 1] + B[i - 1, j]
    return B


_BINOM = _binom_table(K_MOMENTS)


@njit(cache=True)
def build_tree(p):
    """Balanced index-median tree over sorted poles with value bounding boxes.

    Returns (i0, i1, left, right, center, halfwidth, moments); children carry
    larger node ids than their parent, so a reverse pass is bottom-up.
    """
    N = p.shape[0]
    cap = 4 * (N // LEAF + 1) + 8
    i0 = np.empty(cap, np.int64)
    i1 = np.empty(cap, np.int64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    stack = np.empty(cap, np.int64)

    i0[0] = 0
    i1[0] = N
    n_nodes = 1
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        nid = stack[sp]
        a, b = i0[nid], i1[nid]
        if b - a <= LEAF:
            continue
        m = (a + b) // 2
        l, r = n_nodes, n_nodes + 1
        n_nodes += 2
        i0[l], i1[l] = a, m
        i0[r], i1[r] = m, b
        left[nid], right[nid] = l, r
        stack[sp] = l
        sp += 1
        stack[sp] = r
        sp += 1

    center = np.empty(n_nodes)
    halfw = np.empty(n_nodes)
    mom = np.zeros((n_nodes, K_MOMENTS))
    spow = np.empty(K_MOMENTS)
    for nid in range(n_nodes - 1, -1, -1):
        a, b = i0[nid], i1[nid]
        lo, hi = p[a], p[b - 1]
        cc = 0.5 * (lo + hi)
        center[nid] = cc
        halfw[nid] = 0.5 * (hi - lo)
        if left[nid] == -1:
            for i in range(a, b):
                d = p[i] - cc
                t = 1.0
                for k in range(K_MOMENTS):
                    mom[nid, k] += t
                    t *= d
        else:
            for ch in (left[nid], right[nid]):
                s = center[ch] - cc
                t = 1.0
                for k in range(K_MOMENTS):
                    spow[k] = t
                    t *= s
                for k in range(K_MOMENTS):
                    acc = 0.0
                    for j in range(k + 1):
                        acc += _BINOM[k, j] * mom[ch, j] * spow[k - j]
                    mom[nid, k] += acc
    return (i0[:n_nodes], i1[:n_nodes], left[:n_nodes], right[:n_nodes],
            center, halfw, mom)


@njit(cache=True)
def _bisect_left(arr, x, lo, hi):
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def _bisect_right(arr, x, lo, hi):
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, fastmath=True)
def tree_eval(i0, i1, left, right, center, halfw, mom, p, E, want_deriv):
    """G and optionally G' at sorted targets E (targets must avoid the poles).

    Far ranges of targets are contiguous, so the moment Horner recurrence
    runs with k outermost and vectorizes across targets.
    """
    nT = E.shape[0]
    g = np.zeros(nT)
    dg = np.zeros(nT)
    if nT == 0:
        return g, dg
    xbuf = np.empty(nT)
    sbuf = np.empty(nT)
    cap = 512
    sn = np.empty(cap, np.int64)
    sa = np.empty(cap, np.int64)
    sb = np.empty(cap, np.int64)
    sp = 0
    sn[0], sa[0], sb[0] = 0, 0, nT
    sp = 1
    while sp > 0:
        sp -= 1
        nid, ta, tb = sn[sp], sa[sp], sb[sp]
        cc = center[nid]
        r = SEP * halfw[nid]
        a = _bisect_left(E, cc - r, ta, tb)
        b = _bisect_right(E, cc + r, ta, tb)
        # far ranges: multipole expansion around the node center
        for rng in range(2):
            t0 = ta if rng == 0 else b
            t1 = a if rng == 0 else tb
            if t0 >= t1:
                continue
            for t in range(t0, t1):
                xbuf[t] = 1.0 / (E[t] - cc)
                sbuf[t] = 0.0
            for k in range(K_MOMENTS - 1, -1, -1):
                mk = mom[nid, k]
                for t in range(t0, t1):
                    sbuf[t] = mk + sbuf[t] * xbuf[t]
            for t in range(t0, t1):
                g[t] -= xbuf[t] * sbuf[t]
            if want_deriv:
                for t in range(t0, t1):
                    sbuf[t] = 0.0
                for k in range(K_MOMENTS - 1, -1, -1):
                    mk = (k + 1) * mom[nid, k]
                    for t in range(t0, t1):
                        sbuf[t] = mk + sbuf[t] * xbuf[t]
                for t in range(t0, t1):
                    dg[t] += xbuf[t] * xbuf[t] * sbuf[t]
        if a < b:
            if left[nid] == -1:
                pa, pb = i0[nid], i1[nid]
                if want_deriv:
                    for t in range(a, b):
                        e = E[t]
                        gg = 0.0
                        dd = 0.0
                        for i in range(pa, pb):
                            inv = 1.0 / (p[i] - e)
                            gg += inv
                            dd += inv * inv
                        g[t] += gg
                        dg[t] += dd
                else:
                    for t in range(a, b):
                        e = E[t]
                        gg = 0.0
                        for i in range(pa, pb):
                            gg += 1.0 / (p[i] - e)
                        g[t] += gg
            else:
                sn[sp], sa[sp], sb[sp] = left[nid], a, b
                sp += 1
                sn[sp], sa[sp], sb[sp] = right[nid], a, b
                sp += 1
    return g, dg


@njit(cache=True)
def _quadratic_root(aa, bb, cc, lo, hi, A, B):
    """Root of aa*E^2 + bb*E + cc inside (lo, hi), midpoint fallback."""
    mid = 0.5 * (lo + hi)
    if aa == 0.0:
        if bb == 0.0:
            return mid
        xn = -cc / bb
        return xn if lo < xn < hi else mid
    disc = bb * bb - 4.0 * aa * cc
    if disc < 0.0:
        return mid
    sq = np.sqrt(disc)
    if bb >= 0.0:
        q = -0.5 * (bb + sq)
    else:
        q = -0.5 * (bb - sq)
    x1 = q / aa
    x2 = cc / q if q != 0.0 else x1
    in1 = lo < x1 < hi
    in2 = lo < x2 < hi
    if in1 and in2:
        # both inside the current bracket: keep the one in the physical gap
        return x1 if A < x1 < B else x2
    if in1:
        return x1
    if in2:
        return x2
    return mid


@njit(cache=True)
def _fitted_step(A, B, x, gval, dgval, rhs, lo, hi, has_left):
    """One step of the fitted-weight rational iteration.

    Interpolates G by a/(A-E) + b/(B-E) (or b/(B-E) + c without a left
    pole) matching the value gval and the slope dgval at x, then solves
    the model for G = rhs inside (lo, hi).  Matching the slope absorbs
    the curvature contributed by poles just outside the gap, which keeps
    convergence fast even for tightly clustered poles.
    """
    mid = 0.5 * (lo + hi)
    if dgval <= 0.0:
        return mid
    if not has_left:
        # model b/(B-E) + c through (gval, dgval)
        t = B - x
        b = dgval * t * t
        c = gval - b / t
        if rhs <= c or b <= 0.0:
            return mid
        xn = B - b / (rhs - c)
        return xn if lo < xn < hi else mid
    s = A - x   # < 0
    t = B - x   # > 0
    # fit weights: a/s + b/t = gval ; a/s^2 + b/t^2 = dgval
    m11 = 1.0 / s
    m12 = 1.0 / t
    m21 = m11 * m11
    m22 = m12 * m12
    den = m11 * m22 - m12 * m21
    if den == 0.0:
        return mid
    a = (gval * m22 - m12 * dgval) / den
    b = (m11 * dgval - gval * m21) / den
    if a <= 0.0 or b <= 0.0:
        return mid
    # solve the model for the step d = E - x, which stays accurate when
    # the root hugs a pole: the fit identity a*t + b*s = gval*s*t turns
    # the constant term into -s*t*(gval - rhs)
    aa = rhs
    bb = (a + b) - rhs * (s + t)
    cc = -s * t * (gval - rhs)
    d = _quadratic_root(aa, bb, cc, lo - x, hi - x, s, t)
    return x + d


@njit(cache=True)
def solve_gaps(p, i0, i1, left, right, center, halfw, mom, gaps, rhs, tol):
    """One root of G(E) = rhs per requested gap.

    gaps[j] = k requests the root in the open gap (p[k-1], p[k]); k = 0
    requests the root below p[0] (exists only for rhs > 0, caller checked).
    Returns the roots aligned with gaps; raises on sweep exhaustion, which
    monotonicity makes unreachable short of a bug.
    """
    m = gaps.shape[0]
    roots = np.empty(m)
    lo = np.empty(m)
    hi = np.empty(m)
    x = np.empty(m)
    done = np.zeros(m, np.bool_)
    N = p.shape[0]
    for j in range(m):
        k = gaps[j]
        if k == 0:
            width = max(1.0, N / rhs)
            lo[j] = p[0] - width
            hi[j] = p[0] - 1.0 / rhs
            if hi[j] <= lo[j]:
                hi[j] = p[0]
        else:
            lo[j] = p[k - 1]
            hi[j] = p[k]
        x[j] = 0.5 * (lo[j] + hi[j])
        if lo[j] == hi[j] or not (lo[j] < x[j] < hi[j]):
            # gap narrower than float resolution: midpoint is the answer
            roots[j] = x[j]
            done[j] = True

    n_active = 0
    active = np.empty(m, np.int64)
    for j in range(m):
        if not done[j]:
            active[n_active] = j
            n_active += 1

    xs = np.empty(m)
    sweep = 0
    while n_active > 0:
        sweep += 1
        if sweep > MAX_SWEEPS:
            raise RuntimeError("root solver failed to converge (internal bug)")
        for idx in range(n_active):
            xs[idx] = x[active[idx]]
        g, dg = tree_eval(i0, i1, left, right, center, halfw, mom, p,
                          xs[:n_active], True)
        n_next = 0
        for idx in range(n_active):
            j = active[idx]
            k = gaps[j]
            f = g[idx] - rhs
            if f == 0.0:
                roots[j] = x[j]
                done[j] = True
                continue
            if f < 0.0:
                lo[j] = x[j]
            else:
                hi[j] = x[j]
            has_left = k > 0
            A = p[k - 1] if has_left else 0.0
            B = p[k]
            if sweep % 8 == 0:
                xn = 0.5 * (lo[j] + hi[j])
            else:
                xn = _fitted_step(A, B, x[j], g[idx], dg[idx], rhs,
                                  lo[j], hi[j], has_left)
            # test the raw model step first: near convergence the predicted
            # root coincides with a bracket endpoint (the previous iterate),
            # which the strict in-bracket check below would reject
            if np.isfinite(xn):
                tol_abs = tol * max(1.0, abs(xn))
                if abs(xn - x[j]) <= 0.5 * tol_abs:
                    roots[j] = min(max(xn, lo[j]), hi[j])
                    done[j] = True
                    continue
            if not np.isfinite(xn) or not (lo[j] < xn < hi[j]):
                # clamp just inside the violated end rather than bisecting:
                # a clipped prediction means the root hugs that endpoint
                margin = 0.01 * (hi[j] - lo[j])
                if np.isfinite(xn):
                    xn = min(max(xn, lo[j] + margin), hi[j] - margin)
                else:
                    xn = 0.5 * (lo[j] + hi[j])
            tol_abs = tol * max(1.0, abs(xn))
            if hi[j] - lo[j] <= tol_abs or abs(xn - x[j]) <= 0.5 * tol_abs:
                roots[j] = xn
                done[j] = True
            else:
                x[j] = xn
                active[n_next] = j
                n_next += 1
        n_active = n_next
    return roots


@njit(cache=True)
def norms_direct(p, roots):
    """Per-root ell1, ell2^2 and nearest-pole distance over the full pole set."""
    m = roots.shape[0]
    N = p.shape[0]
    l1 = np.zeros(m)
    l2sq = np.zeros(m)
    dmin = np.empty(m)
    for j in range(m):
        e = roots[j]
        s1 = 0.0
        s2 = 0.0
        dm = np.inf
        for i in range(N):
            d = p[i] - e
            ad = abs(d)
            if ad < dm:
                dm = ad
            inv = 1.0 / d
            s1 += abs(inv)
            s2 += inv * inv
        l1[j] = s1
        l2sq[j] = s2
        dmin[j] = dm
    return l1, l2sq, dmin
