"""Microscopic scaling windows, S/T split of the secular sum, tail function.

Around a center energy the mean spacing of potential values is
delta = sqrt(2 pi) * kappa * M^((center/lambda)^2 - 1); rescaled poles
omega = (kappa V - center)/delta and eigenvalues u = (E - center)/delta
form order-1-spaced point configurations.  Labels follow the convention
omega_0 <= 0 < omega_1 with u_n in the gap (omega_{n-1}, omega_n].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .secular import PoleError

__all__ = [
    "CoverageError",
    "ScalingWindow",
    "TailClassification",
    "ClassifyThresholds",
    "mean_gap",
    "gap_scale",
    "build_window",
    "split_secular",
    "tail_function",
    "classify_tail",
    "y_statistic",
    "interpolation_check",
]


class CoverageError(ValueError):
    """Eigenvalue input does not span the requested window."""


def gap_scale(params, center: float) -> float:
    """sqrt(2 pi) * kappa * M^((center/lambda)^2 - 1), without a band check.

    This is the analytic gap-scale formula extended to any center; it is
    what reference-energy windows outside the macroscopic band use.
    """
    ratio = float(center) / params.lam
    return math.sqrt(2.0 * math.pi) * params.kappa * math.exp(
        (ratio * ratio - 1.0) * math.log(params.M))


def mean_gap(params, center: float) -> float:
    """Local mean spacing of the scaled potential near an in-band center.

    Raises a domain error for |center| >= lambda; use gap_scale for the
    unchecked formula.
    """
    if abs(center) >= params.lam:
        raise ValueError(
            f"center {center} outside the open band (-{params.lam}, {params.lam})")
    return gap_scale(params, center)


@dataclass(frozen=True)
class ScalingWindow:
    center: float
    delta: float
    half_width: float
    cutoff: float
    omega_all: np.ndarray        # all rescaled poles, ascending
    label_offset: int            # label(index) = index - label_offset
    omega: np.ndarray            # rescaled poles with |omega| <= cutoff
    omega_labels: np.ndarray
    u: np.ndarray                # rescaled eigenvalues with |u| <= half_width
    u_labels: np.ndarray

    def omega_by_label(self, n: int) -> float:
        idx = n + self.label_offset
        if not 0 <= idx < self.omega_all.shape[0]:
            raise KeyError(f"no pole with label {n}")
        return float(self.omega_all[idx])

    def u_by_label(self, n: int) -> float:
        pos = np.searchsorted(self.u_labels, n)
        if pos == self.u_labels.shape[0] or self.u_labels[pos] != n:
            raise KeyError(f"no eigenvalue with label {n}")
        return float(self.u[pos])


def build_window(sample, spectrum, center: float, half_width: float,
                 cutoff: float, delta: float | None = None) -> ScalingWindow:
    """Rescale poles and eigenvalues into the window around center.

    spectrum must have been solved on a range covering
    [center - (half_width+2) delta, center + (half_width+2) delta]; the
    extra margin lets boundary gaps own their roots.
    """
    if half_width <= 0 or cutoff <= 0:
        raise ValueError("half_width and cutoff must be positive")
    if delta is None:
        delta = gap_scale(sample.params, center)
    lo_need = center - (half_width + 2.0) * delta
    hi_need = center + (half_width + 2.0) * delta
    a, b = spectrum.solved_range
    if a > lo_need or b < hi_need:
        raise CoverageError(
            f"spectrum solved on [{a}, {b}] does not cover "
            f"[{lo_need}, {hi_need}]")

    p = np.asarray(sample.sorted_scaled, dtype=np.float64)
    omega_all = (p - center) / delta
    # label_offset points at the largest omega <= 0 (label 0)
    label_offset = int(np.searchsorted(omega_all, 0.0, side="right")) - 1

    in_cut = np.abs(omega_all) <= cutoff
    omega = omega_all[in_cut]
    omega_labels = np.nonzero(in_cut)[0].astype(np.int64) - label_offset

    eig = np.asarray(spectrum.eigenvalues, dtype=np.float64)
    u_all = (eig - center) / delta
    in_win = np.abs(u_all) <= half_width
    u = u_all[in_win]
    u_labels = (np.asarray(spectrum.pole_index, dtype=np.int64)[in_win]
                - label_offset)
    return ScalingWindow(center=float(center), delta=float(delta),
                         half_width=float(half_width), cutoff=float(cutoff),
                         omega_all=omega_all, label_offset=label_offset,
                         omega=omega, omega_labels=omega_labels,
                         u=u, u_labels=u_labels)


def _check_off_poles(values: np.ndarray, u: float):
    if values.size and np.any(values == u):
        raise PoleError(f"u = {u} coincides with a rescaled pole")


def split_secular(window: ScalingWindow, sample, u: float) -> tuple[float, float]:
    """(S, T): in-cutoff and out-of-cutoff parts of the rescaled secular sum.

    S + T equals M * delta * F_M(center + u delta) identically.
    """
    u = float(u)
    omega_all = window.omega_all
    in_cut = np.abs(omega_all) <= window.cutoff
    inside = omega_all[in_cut]
    outside = omega_all[~in_cut]
    _check_off_poles(inside, u)
    _check_off_poles(outside, u)
    S = math.fsum(1.0 / (w - u) for w in inside)
    T = math.fsum(1.0 / (w - u) for w in outside)
    return S, T


def tail_function(window: ScalingWindow, sample, u: float) -> float:
    """R(u) = T(u) - M*delta; the characteristic equation reads S(u) = -R(u)."""
    _, T = split_secular(window, sample, u)
    return T - sample.params.M * window.delta


def y_statistic(window: ScalingWindow, sample, W: float) -> float:
    """Sum of 1/omega over mid-range poles W < |omega| < cutoff."""
    if not W < window.cutoff:
        raise ValueError("W must be below the window cutoff")
    w = window.omega_all
    mid = (np.abs(w) > W) & (np.abs(w) < window.cutoff)
    return math.fsum(1.0 / v for v in w[mid])


@dataclass(frozen=True)
class ClassifyThresholds:
    slope: float = 0.5
    spread: float = 0.5
    magnitude: float = 10.0


@dataclass(frozen=True)
class TailClassification:
    """One of the generalized linear limit cases, with fit diagnostics.

    kind is one of regular_linear, singular_plus, singular_minus,
    singular_transition, ambiguous.  a/b are populated for regular_linear,
    tau for singular_transition.
    """

    kind: str
    a: float | None
    b: float | None
    tau: float | None
    slope: float
    intercept: float
    slope_spread: float
    intercept_spread: float
    thresholds: ClassifyThresholds = field(default_factory=ClassifyThresholds)


def classify_tail(grids, values, thresholds: ClassifyThresholds | None = None
                  ) -> TailClassification:
    """Classify an ensemble of tail functions sampled on grids over [-W, W].

    Per member a least-squares line is fitted; the decision compares the
    median slope magnitude, the intercept spread, and the grid extremes
    against the thresholds.  Straddled thresholds yield an explicit
    ambiguous verdict instead of a guess.
    """
    if thresholds is None:
        thresholds = ClassifyThresholds()
    grids = [np.asarray(g, dtype=np.float64) for g in grids]
    values = [np.asarray(v, dtype=np.float64) for v in values]
    if len(grids) == 1 and len(values) > 1:
        grids = grids * len(values)
    if len(grids) != len(values):
        raise ValueError("grids and values ensembles differ in length")
    if len(values) < 50:
        raise ValueError(f"need >= 50 ensemble members, got {len(values)}")
    slopes, intercepts, mins, maxs, crossings = [], [], [], [], []
    for g, r in zip(grids, values):
        if g.shape != r.shape or g.shape[0] < 9:
            raise ValueError("each member needs a grid of >= 9 points")
        a1, b1 = np.polyfit(g, r, 1)
        slopes.append(a1)
        intercepts.append(b1)
        mins.append(r.min())
        maxs.append(r.max())
        if r.min() < 0.0 < r.max() and a1 != 0.0:
            crossings.append(-b1 / a1)
    slopes = np.asarray(slopes)
    intercepts = np.asarray(intercepts)
    med_slope = float(np.median(slopes))
    med_icept = float(np.median(intercepts))
    spread_slope = float(np.std(slopes))
    spread_icept = float(np.std(intercepts))
    diag = dict(slope=med_slope, intercept=med_icept,
                slope_spread=spread_slope, intercept_spread=spread_icept,
                thresholds=thresholds)

    mag = thresholds.magnitude
    if float(np.median(mins)) > mag:
        return TailClassification("singular_plus", None, None, None, **diag)
    if float(np.median(maxs)) < -mag:
        return TailClassification("singular_minus", None, None, None, **diag)
    abs_slope = float(np.median(np.abs(slopes)))
    if abs_slope > mag and len(crossings) >= len(values) / 2:
        tau = float(np.median(np.asarray(crossings)))
        return TailClassification("singular_transition", None, None, tau, **diag)
    if abs_slope <= thresholds.slope and spread_icept <= thresholds.spread:
        return TailClassification("regular_linear", max(med_slope, 0.0),
                                  med_icept, None, **diag)
    return TailClassification("ambiguous", None, None, None, **diag)


def interpolation_check(grid, r_values, W: float, L: float) -> float:
    """Worst ratio of chord-slope deviation against the (6W/L) * slope bound.

    For every grid triple (u, u0, u1) with distinct abscissas compares
    |(R(u)-R(u0))/(u-u0) - s| to (6W/L)*s where s is the chord slope
    between u0 and u1.  Requires W < L/10 and a nondecreasing R.
    """
    if not W < L / 10.0:
        raise ValueError("requires W < L/10")
    g = np.asarray(grid, dtype=np.float64)
    r = np.asarray(r_values, dtype=np.float64)
    order = np.argsort(g)
    g, r = g[order], r[order]
    scale = max(1.0, float(np.max(np.abs(r))))
    if np.any(np.diff(r) < -1e-9 * scale):
        raise ValueError("tail values are not monotone on the grid; "
                         "numerical noise dominates")
    n = g.shape[0]
    worst = 0.0
    for j0 in range(n):
        for j1 in range(n):
            if g[j1] == g[j0]:
                continue
            s = (r[j1] - r[j0]) / (g[j1] - g[j0])
            bound = (6.0 * W / L) * s
            for i in range(n):
                if g[i] == g[j0]:
                    continue
                lhs = abs((r[i] - r[j0]) / (g[i] - g[j0]) - s)
                if bound > 0.0:
                    worst = max(worst, lhs / bound)
                elif lhs > 0.0:
                    worst = math.inf
    return worst
