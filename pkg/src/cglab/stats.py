"""Localization statistics: norms, participation ratios, set and
distribution distances, the tunneling-amplitude heuristic, concentration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import rho_hat
from .scaling import ScalingWindow, gap_scale
from .secular import PoleError

__all__ = [
    "NormProfile",
    "TunnelingResult",
    "norm_profile",
    "participation_ratio",
    "hausdorff_distance",
    "ks_distance",
    "tunneling_amplitude",
    "concentration_check",
]


@dataclass(frozen=True)
class NormProfile:
    """Norms of the rescaled eigenfunction 1/(omega - u) with ell2 split
    into the nearest-pole head, the in-cutoff body, and the far tail."""

    ell1: float
    ell2: float
    ell_inf: float
    ratio21: float
    ratio11: float
    head_sq: float
    body_sq: float
    tail_sq: float


def norm_profile(window: ScalingWindow, n: int,
                 cutoff: float | None = None) -> NormProfile:
    """Head/body/tail norm decomposition for the eigenvalue labeled n."""
    if cutoff is None:
        cutoff = window.cutoff
    u = window.u_by_label(n)   # KeyError if the label is absent
    omega = window.omega_all
    diffs = omega - u
    if np.any(diffs == 0.0):
        raise PoleError("eigenvalue collides with a pole")
    inv = 1.0 / diffs
    near = int(np.argmin(np.abs(diffs)))
    head = inv[near] * inv[near]
    sq = inv * inv
    in_cut = np.abs(omega) < cutoff
    body_mask = in_cut.copy()
    body_mask[near] = False
    tail_mask = ~in_cut
    tail_mask[near] = False
    body = float(np.sum(sq[body_mask]))
    tail = float(np.sum(sq[tail_mask]))
    ell_inf = abs(inv[near])
    ell2 = math.sqrt(head + body + tail)
    ell1 = float(np.sum(np.abs(inv)))
    return NormProfile(ell1=ell1, ell2=ell2, ell_inf=ell_inf,
                       ratio21=ell2 / ell_inf, ratio11=ell1 / ell_inf,
                       head_sq=float(head), body_sq=body, tail_sq=tail)


def participation_ratio(values, q: float) -> tuple[float, float]:
    """P_q = sum |psi|^2q / (sum |psi|^2)^q together with r = ell_inf/ell2.

    Scale-invariant, so values are normalized by their maximum before the
    powers.  For q > 1 the sandwich r^2q <= P_q <= r^(2(q-1)) is enforced
    as an internal consistency check.
    """
    if q <= 0.5:
        raise ValueError("q must exceed 1/2")
    w = np.abs(np.asarray(values, dtype=np.float64))
    peak = w.max(initial=0.0)
    if peak == 0.0:
        raise ValueError("all-zero function has no participation ratio")
    w = w / peak
    s2 = float(np.sum(w * w))
    p_q = float(np.sum(w ** (2.0 * q)) / s2 ** q)
    r = 1.0 / math.sqrt(s2)
    if q > 1.0:
        slack = 1.0 + 1e-9
        if not (r ** (2.0 * q) <= p_q * slack
                and p_q <= r ** (2.0 * (q - 1.0)) * slack):
            raise ValueError("participation sandwich violated (internal bug)")
    return p_q, r


def _dist_to_items(x: float, items) -> float:
    best = math.inf
    for item in items:
        if np.isscalar(item):
            d = abs(x - float(item))
        else:
            lo, hi = float(item[0]), float(item[1])
            if x < lo:
                d = lo - x
            elif x > hi:
                d = x - hi
            else:
                d = 0.0
        if d < best:
            best = d
    return best


def hausdorff_distance(A, B) -> float:
    """Hausdorff distance between a finite set A and a closed set B.

    B is described as an iterable of points and (lo, hi) intervals.  The
    B-side supremum over an interval is attained at its endpoints or at
    midpoints between consecutive A points, so the result is exact.
    """
    A = np.sort(np.asarray(list(A), dtype=np.float64))
    items = list(B)
    if A.size == 0 or len(items) == 0:
        raise ValueError("both sets must be nonempty")

    d_ab = max(_dist_to_items(float(x), items) for x in A)

    mids = (A[:-1] + A[1:]) / 2.0 if A.size > 1 else np.empty(0)

    def dist_to_A(y: float) -> float:
        k = np.searchsorted(A, y)
        best = math.inf
        if k < A.size:
            best = min(best, abs(A[k] - y))
        if k > 0:
            best = min(best, abs(A[k - 1] - y))
        return best

    d_ba = 0.0
    for item in items:
        if np.isscalar(item):
            d_ba = max(d_ba, dist_to_A(float(item)))
        else:
            lo, hi = float(item[0]), float(item[1])
            cand = [lo, hi] + [float(m) for m in mids if lo < m < hi]
            d_ba = max(d_ba, max(dist_to_A(y) for y in cand))
    return max(d_ab, d_ba)


def ks_distance(sample_a, sample_b) -> float:
    """Kolmogorov-Smirnov distance; sample_b may be an array or a CDF."""
    a = np.sort(np.asarray(sample_a, dtype=np.float64))
    if a.size == 0:
        raise ValueError("empty sample")
    n = a.size
    if callable(sample_b):
        F = np.asarray(sample_b(a), dtype=np.float64)
        hi = np.arange(1, n + 1) / n - F
        lo = F - np.arange(0, n) / n
        return float(max(hi.max(), lo.max(), 0.0))
    b = np.sort(np.asarray(sample_b, dtype=np.float64))
    if b.size == 0:
        raise ValueError("empty sample")
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, allv, side="right") / n
    cdf_b = np.searchsorted(b, allv, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


@dataclass(frozen=True)
class TunnelingResult:
    tau: float
    boost: float
    criterion: float
    fluctuation: float


def tunneling_amplitude(sample, i: int, j: int, E: float) -> TunnelingResult:
    """Hybridization amplitude between sites i and j at energy E.

    tau = (1/M) |1 - (1/M) sum_{n != i,j} 1/(kappa V_n - E)|^{-1}; the
    criterion field is M * delta(E) * |1 - rho_hat(E)| whose sub-unity
    region marks candidate resonant delocalization, and fluctuation is the
    sqrt(ln M)/(lambda M^{(E/lambda)^2}) correction scale reported as a
    separate diagnostic.
    """
    if i == j:
        raise ValueError("sites must differ")
    params = sample.params
    M = params.M
    scaled = params.kappa * np.asarray(sample.raw_values, dtype=np.float64)
    mask = np.ones(M, dtype=bool)
    mask[i] = False
    mask[j] = False
    terms = scaled[mask] - E
    if np.any(terms == 0.0):
        raise PoleError(f"E = {E} is a pole of the reduced sum")
    reduced = math.fsum(1.0 / t for t in terms) / M
    denom = abs(1.0 - reduced)
    if denom == 0.0:
        raise ZeroDivisionError("reduced resolvent factor vanishes")
    boost = 1.0 / denom
    tau = boost / M
    criterion = M * gap_scale(params, E) * abs(1.0 - rho_hat(E, params.kappa))
    ratio = E / params.lam
    fluctuation = math.sqrt(math.log(M)) / (
        params.lam * math.exp(ratio * ratio * math.log(M)))
    return TunnelingResult(tau=tau, boost=boost, criterion=float(criterion),
                           fluctuation=fluctuation)


def concentration_check(values, tau_grid, mean_derivative: float,
                        cutoff: float) -> dict:
    """Exponential concentration of an ensemble around its mean.

    Compares P(|T - mean| >= tau) with 2 exp(-c tau min(tau/D, L)) where
    D is the supplied mean derivative scale and L the cutoff; returns the
    largest c for which the bound holds on the whole grid.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size < 1000:
        raise ValueError(f"need >= 1000 ensemble members, got {v.size}")
    if mean_derivative <= 0 or cutoff <= 0:
        raise ValueError("mean_derivative and cutoff must be positive")
    center = float(np.mean(v))
    dev = np.abs(v - center)
    rows = []
    c_max = math.inf
    for tau in tau_grid:
        tau = float(tau)
        emp = float(np.mean(dev >= tau))
        rate = tau * min(tau / mean_derivative, cutoff)
        rows.append({"tau": tau, "empirical": emp, "rate": rate})
        if emp > 0.0 and rate > 0.0:
            c_max = min(c_max, math.log(2.0 / emp) / rate)
    return {"n": int(v.size), "mean": center, "rows": rows,
            "c_max": float(c_max)}
