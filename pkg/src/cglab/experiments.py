"""Reproducible Monte Carlo experiments over the rank-one-plus-disorder model.

Each run_* function maps one headline phenomenon (ground-state transition,
localization window statistics, point-process comparison, delocalized
outlier, phase diagram, direct point-process bounds, Hilbert-transform
validation, invariant suite) to a configured ensemble.  Per-sample rows are
bitwise reproducible: disorder comes from per-sample RNG substreams keyed
by sample index, samples may run concurrently, and aggregation is an
ordered reduction by index.  Every RunRecord embeds the fully resolved
configuration (symbolic centers expanded to numbers) and RNG provenance.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import _kernels
from .hilbert import (gaussian_hilbert, pv_quadrature_oracle, rho_hat,
                      solve_reference_energies, intrho_bounds_check)
from .model import ModelParams, compute_kappa, sample_potential
from .scaling import build_window, classify_tail, gap_scale
from .seba import (gap_extremes, localization_bound_check, sample_poisson,
                   solve_seba)
from .secular import (dense_oracle, ground_state_energy, pole_tree,
                      solve_spectrum_full, solve_spectrum_window)
from .stats import ks_distance, norm_profile

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "resolve_center",
    "run_ground_state",
    "run_localization",
    "run_seba_band",
    "run_single_extended",
    "run_phase_diagram",
    "run_seba_direct",
    "run_hilbert_table",
    "run_verify",
    "gumbel_max_ks",
]

SYMBOLIC_CENTERS = ("E_hat_minus1", "E_hat_zero")
_GRID_POINTS = 17           # tail-function sampling grid per ensemble member
_GRID_SPAWN = 101           # RNG spawn slot for grid jitter (disorder uses < 64)


def resolve_center(spec, lam: float, M: int) -> float:
    """Resolve a center spec (number or symbolic name) for given (lambda, M)."""
    if spec is None:
        raise ValueError("experiment requires a center")
    if isinstance(spec, str):
        if spec not in SYMBOLIC_CENTERS:
            raise ValueError(f"unknown symbolic center {spec!r}; "
                             f"expected one of {SYMBOLIC_CENTERS}")
        ref = solve_reference_energies(compute_kappa(lam, M))
        return ref.e_minus1 if spec == "E_hat_minus1" else ref.e_zero
    return float(spec)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully serializable experiment configuration.

    Numeric thresholds that gate pass/fail live in `thresholds` (merged over
    per-experiment defaults), not in code constants; `success_fraction` is
    the failure budget applied to per-sample probabilistic claims.
    """

    experiment: str
    lam: float = 1.0
    lam_values: tuple = ()            # grid experiments
    M_values: tuple = (100_000,)
    center: object = None             # float or symbolic name
    center_values: tuple = ()         # grid experiments
    W: float = 10.0
    cutoff: float | None = None       # default ln M per window
    L: float | None = None            # point-process truncation
    alpha: tuple = (0.0,)
    n_samples: int = 200
    seed: int = 0
    tol: float = 1e-12
    success_fraction: float = 0.90
    thresholds: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "jsonl"

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.fmt not in ("jsonl", "csv"):
            raise ValueError(f"format must be jsonl or csv, got {self.fmt!r}")
        if not self.M_values:
            raise ValueError("at least one M is required")
        if not 0.0 < self.success_fraction <= 1.0:
            raise ValueError("success_fraction must be in (0, 1]")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        coerced = dict(mapping)
        for key in ("lam_values", "M_values", "center_values", "alpha"):
            if key in coerced:
                coerced[key] = tuple(coerced[key])
        return cls(**coerced)

    def threshold(self, name: str, default: float) -> float:
        return float(self.thresholds.get(name, default))

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("lam_values", "M_values", "center_values", "alpha"):
            d[key] = list(d[key])
        return d


@dataclass
class RunRecord:
    """One experiment run: resolved config, per-sample rows, verdicts."""

    experiment: str
    config: dict
    rows: list
    summary: dict
    checks: list
    passed: bool
    wall_time_s: float
    rng: dict


def _provenance(seed: int) -> dict:
    return {"seed": int(seed), "bit_generator": "PCG64",
            "substream": "SeedSequence(entropy=seed, spawn_key=(sample_index, retry))"}


def _finish(config: ExperimentConfig, resolved: dict, rows, summary, checks,
            t0: float) -> RunRecord:
    passed = all(c["passed"] for c in checks)
    echo = config.to_dict()
    echo.update(resolved)
    return RunRecord(experiment=config.experiment, config=echo, rows=rows,
                     summary=summary, checks=checks, passed=passed,
                     wall_time_s=time.perf_counter() - t0,
                     rng=_provenance(config.seed))


def _check(checks: list, name: str, passed: bool, **info):
    entry = {"name": name, "passed": bool(passed)}
    entry.update(info)
    checks.append(entry)


def _worker_cap() -> int:
    return max(1, int(os.environ.get("CGLAB_WORKERS", "1")))


def _map_ordered(fn, argses):
    """Apply fn to each argument tuple, in order; optionally in processes."""
    argses = list(argses)
    workers = min(_worker_cap(), len(argses))
    if workers <= 1:
        return [fn(a) for a in argses]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, argses))


def _median(xs) -> float:
    return float(np.median(np.asarray(xs, dtype=np.float64)))


# ---------------------------------------------------------------------------
# ground state


def _gs_one(args):
    lam, M, seed, tol, i = args
    if lam == 0.0:
        # synthetic validation mode: V forced to zero makes the operator the
        # pure rank-one projector, ground state -1 with a flat eigenfunction
        return {"lam": lam, "M": M, "sample": i, "E0": -1.0, "min_pole": 0.0,
                "ratio21": math.sqrt(M)}
    s = sample_potential(ModelParams(M=M, lam=lam, seed=seed), i)
    e0 = ground_state_energy(s, tol)
    _, l2sq, dmin = _kernels.norms_direct(s.sorted_scaled, np.array([e0]))
    return {"lam": lam, "M": M, "sample": i, "E0": float(e0),
            "min_pole": float(s.sorted_scaled[0]),
            "ratio21": float(math.sqrt(l2sq[0]) * dmin[0])}


def run_ground_state(config: ExperimentConfig) -> RunRecord:
    """Ground-state energy and norm ratio across the lambda = 1 transition."""
    t0 = time.perf_counter()
    lams = config.lam_values or (config.lam,)
    rows, checks, summary = [], [], {}
    for lam in lams:
        for M in config.M_values:
            batch = _map_ordered(
                _gs_one, ((lam, M, config.seed, config.tol, i)
                          for i in range(config.n_samples)))
            rows.extend(batch)
            med_ratio = _median([r["ratio21"] for r in batch])
            key = f"lam={lam},M={M}"
            if lam == 0.0:
                summary[key] = {"median_ratio21": med_ratio}
                _check(checks, f"{key}:synthetic_ground_state",
                       all(r["E0"] == -1.0 for r in batch), value=-1.0)
                continue
            kappa = compute_kappa(lam, M)
            dev0 = _median([abs(r["E0"] + 1.0 + kappa * kappa) for r in batch])
            dev_min = _median([abs(r["E0"] - r["min_pole"]) for r in batch])
            summary[key] = {"median_ratio21": med_ratio,
                            "median_dev_rank_one": dev0,
                            "median_dev_min_pole": dev_min,
                            "kappa": kappa}
            if lam < 1.0:
                bound = config.threshold("gs_energy_coeff", 5.0) * kappa ** 4
                _check(checks, f"{key}:energy_rank_one", dev0 <= bound,
                       value=dev0, threshold=bound)
                lo = config.threshold("gs_ratio_lo", 0.1) * math.sqrt(M)
                hi = math.sqrt(M)
                _check(checks, f"{key}:ratio_extended",
                       lo <= med_ratio <= hi, value=med_ratio,
                       threshold=[lo, hi])
            elif lam > 1.0:
                bound = config.threshold("gs_loc_energy_coeff", 100.0) / M
                _check(checks, f"{key}:energy_min_pole", dev_min <= bound,
                       value=dev_min, threshold=bound)
                bound = 1.0 + config.threshold("gs_loc_ratio_coeff", 10.0) / (
                    kappa * math.sqrt(M))
                _check(checks, f"{key}:ratio_localized", med_ratio <= bound,
                       value=med_ratio, threshold=bound)
            # lam == 1 is the critical point: reported, not gated
    return _finish(config, {"lam_values": list(lams)}, rows, summary,
                   checks, t0)


# ---------------------------------------------------------------------------
# window machinery shared by the localization/band/outlier experiments


def _default_cutoff(config: ExperimentConfig, M: int) -> float:
    return config.cutoff if config.cutoff is not None else math.log(M)


def _solve_window(sample, center: float, W: float, cutoff: float, tol: float):
    delta = gap_scale(sample.params, center)
    a = center - (W + 2.0) * delta
    b = center + (W + 2.0) * delta
    spectrum = solve_spectrum_window(sample, a, b, tol)
    return build_window(sample, spectrum, center, W, cutoff), spectrum


def _jittered_grid(rng, W: float) -> np.ndarray:
    base = np.linspace(-W, W, _GRID_POINTS)
    step = 2.0 * W / (_GRID_POINTS - 1)
    return np.clip(base + rng.uniform(-0.3, 0.3, _GRID_POINTS) * step, -W, W)


def _tail_values(omega_all: np.ndarray, m_delta: float, cutoff: float,
                 us: np.ndarray) -> np.ndarray:
    """R(u) = sum over |omega| > cutoff of 1/(omega - u), minus M*delta."""
    out = omega_all[np.abs(omega_all) > cutoff]
    if out.size == 0:
        return np.full(us.shape, -m_delta)
    return np.sum(1.0 / (out[None, :] - us[:, None]), axis=1) - m_delta


def _tail_member(omega_all, m_delta: float, cutoff: float, half_width: float,
                 seed: int, i: int):
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(i, _GRID_SPAWN)))
    # the tail sum is smooth only well inside the cutoff, so the fitting
    # grid is clamped to a third of it regardless of the window width
    grid = _jittered_grid(rng, min(half_width, cutoff / 3.0))
    return grid, _tail_values(omega_all, m_delta, cutoff, grid)


def _gap_distances(p: np.ndarray, energies: np.ndarray,
                   pole_index: np.ndarray) -> np.ndarray:
    """Nearest-pole distances; interlacing pins the minimum to a gap endpoint."""
    d_up = p[pole_index] - energies
    d_down = np.where(pole_index > 0, energies - p[pole_index - 1], np.inf)
    return np.minimum(d_up, d_down)


def _loc_one(args):
    lam, M, seed, tol, center, W, cutoff, i = args
    s = sample_potential(ModelParams(M=M, lam=lam, seed=seed), i)
    window, _ = _solve_window(s, center, W, cutoff, tol)
    rows = []
    for label in window.u_labels:
        prof = norm_profile(window, int(label))
        rows.append({"M": M, "sample": i, "label": int(label),
                     "u": window.u_by_label(int(label)),
                     "dist": 1.0 / prof.ell_inf,
                     "ratio21": prof.ratio21, "ratio11": prof.ratio11,
                     "head_sq": prof.head_sq, "body_sq": prof.body_sq,
                     "tail_sq": prof.tail_sq})
    grid, vals = _tail_member(window.omega_all, M * window.delta, cutoff,
                              W, seed, i)
    return rows, grid, vals


def _reference_warning(center: float, lam: float, M: int, delta: float):
    ref = solve_reference_energies(compute_kappa(lam, M))
    margin = 5.0 * delta
    for name, e_hat in (("E_hat_minus1", ref.e_minus1),
                        ("E_hat_zero", ref.e_zero)):
        if abs(center - e_hat) < margin:
            msg = (f"center {center} lies within {margin} of reference "
                   f"energy {name} = {e_hat}; localization asymptotics "
                   f"do not apply there")
            warnings.warn(msg)
            return msg
    return None


def run_localization(config: ExperimentConfig) -> RunRecord:
    """In-bulk window statistics: pole distances, norm profiles, tail class."""
    t0 = time.perf_counter()
    lam, W = config.lam, config.W
    rows, checks, summary = [], [], {}
    resolved_centers = {}
    for M in config.M_values:
        center = resolve_center(config.center, lam, M)
        resolved_centers[str(M)] = center
        if not abs(center) < lam:
            raise ValueError(f"center {center} outside the open band "
                             f"(-{lam}, {lam})")
        if center in (-1.0, 0.0):
            raise ValueError("center must avoid the reference points -1 and 0")
        cutoff = _default_cutoff(config, M)
        delta = gap_scale(ModelParams(M=M, lam=lam, seed=config.seed), center)
        warning = _reference_warning(center, lam, M, delta)
        batch = _map_ordered(
            _loc_one, ((lam, M, config.seed, config.tol, center, W, cutoff, i)
                       for i in range(config.n_samples)))
        m_rows, grids, vals = [], [], []
        for r, g, v in batch:
            m_rows.extend(r)
            grids.append(g)
            vals.append(v)
        rows.extend(m_rows)
        dists = np.array([r["dist"] for r in m_rows])
        ratios = np.array([r["ratio21"] for r in m_rows])
        cls = classify_tail(grids, vals)
        dist_cut = config.threshold("dist_cut", 0.05)
        frac = float(np.mean(dists <= dist_cut)) if dists.size else 0.0
        need = config.threshold("dist_frac", 0.95)
        _check(checks, f"M={M}:dist_concentration", frac >= need,
               value=frac, threshold=need)
        bound = config.threshold("ratio_coeff", 10.0) * (
            M ** -0.225 + M ** -0.4)
        med_excess = _median(ratios) - 1.0 if ratios.size else math.inf
        _check(checks, f"M={M}:ratio21_localized", med_excess <= bound,
               value=med_excess, threshold=bound)
        _check(checks, f"M={M}:tail_singular",
               cls.kind in ("singular_plus", "singular_minus"),
               value=cls.kind)
        summary[f"M={M}"] = {"center": center, "delta": delta,
                             "cutoff": cutoff, "n_eigenvalues": int(dists.size),
                             "dist_frac": frac,
                             "median_ratio21": _median(ratios) if ratios.size else None,
                             "tail_kind": cls.kind, "tail_tau": cls.tau,
                             "warning": warning}
    return _finish(config, {"resolved_centers": resolved_centers}, rows,
                   summary, checks, t0)


# ---------------------------------------------------------------------------
# point-process band


def _band_one(args):
    lam, M, seed, tol, center, W, cutoff, i = args
    s = sample_potential(ModelParams(M=M, lam=lam, seed=seed), i)
    window, spectrum = _solve_window(s, center, W, cutoff, tol)
    inside = np.abs((spectrum.eigenvalues - center) / window.delta) <= W
    energies = spectrum.eigenvalues[inside]
    l1, l2sq, dmin = _kernels.norms_direct(s.sorted_scaled, energies)
    u = np.sort((energies - center) / window.delta)
    return {"M": M, "sample": i,
            "u": u.tolist(),
            "dist": (dmin / window.delta).tolist(),
            "ratio11": (l1 * dmin).tolist(),
            "ratio21": (np.sqrt(l2sq) * dmin).tolist()}


def run_seba_band(config: ExperimentConfig) -> RunRecord:
    """Matched comparison of model window statistics with the direct process.

    Case i: center near 0 (within O(kappa^2)); case ii: center at the lower
    reference energy, valid only for lambda > sqrt(2).
    """
    t0 = time.perf_counter()
    lam, W = config.lam, config.W
    spec = config.center if config.center is not None else "E_hat_zero"
    M_main = max(config.M_values)
    center_main = resolve_center(spec, lam, M_main)
    kappa_main = compute_kappa(lam, M_main)
    ref_main = solve_reference_energies(kappa_main)
    case = ("ii" if abs(center_main - ref_main.e_minus1)
            < abs(center_main - ref_main.e_zero) else "i")
    if case == "ii" and lam <= math.sqrt(2.0):
        raise ValueError(f"band case ii requires lambda > sqrt(2), "
                         f"got lambda = {lam}")
    if case == "i" and abs(center_main) > config.threshold(
            "case_i_coeff", 5.0) * kappa_main ** 2:
        raise ValueError(f"band case i requires |center| = O(kappa^2), "
                         f"got {center_main}")

    rows, checks, summary = [], [], {}
    resolved_centers = {}
    med_ratio11 = []
    pooled_dist = pooled_gaps = None
    for M in config.M_values:
        center = resolve_center(spec, lam, M)
        resolved_centers[str(M)] = center
        cutoff = _default_cutoff(config, M)
        batch = _map_ordered(
            _band_one, ((lam, M, config.seed, config.tol, center, W, cutoff, i)
                        for i in range(config.n_samples)))
        rows.extend(batch)
        ratio11 = np.concatenate([r["ratio11"] for r in batch]) if batch else []
        med_ratio11.append(_median(ratio11) if len(ratio11) else math.nan)
        if M == M_main:
            pooled_dist = np.concatenate([r["dist"] for r in batch])
            pooled_gaps = np.concatenate(
                [np.diff(r["u"]) for r in batch if len(r["u"]) > 1])

    # matched direct simulation at the corresponding level
    ref = solve_reference_energies(compute_kappa(lam, M_main))
    e_hat = ref.e_zero if case == "i" else ref.e_minus1
    m_delta = M_main * gap_scale(
        ModelParams(M=M_main, lam=lam, seed=config.seed), center_main)
    alpha = (center_main - e_hat) * m_delta
    L_direct = config.L if config.L is not None else max(10.0 * W, 50.0)
    direct_dist, direct_gaps = [], []
    for i in range(config.n_samples):
        pc = sample_poisson(L_direct, config.seed, i)
        sol = solve_seba(pc, alpha, W, config.tol)
        direct_dist.append(sol.dist)
        if sol.u.shape[0] > 1:
            direct_gaps.append(np.diff(sol.u))
    direct_dist = np.concatenate(direct_dist)
    direct_gaps = np.concatenate(direct_gaps)

    ks_dist = ks_distance(pooled_dist, direct_dist)
    ks_gaps = ks_distance(pooled_gaps, direct_gaps)
    min_pts = config.threshold("min_points", 1000)
    _check(checks, "pooled_points", pooled_dist.size >= min_pts,
           value=int(pooled_dist.size), threshold=min_pts)
    ks_tol = config.threshold("ks", 0.08)
    _check(checks, "ks_distances", ks_dist <= ks_tol, value=ks_dist,
           threshold=ks_tol)
    if len(config.M_values) >= 2:
        increasing = all(a < b for a, b in zip(med_ratio11, med_ratio11[1:]))
        _check(checks, "ratio11_growth", increasing, value=med_ratio11)
    summary.update({"case": case, "alpha": alpha, "L_direct": L_direct,
                    "ks_distances": ks_dist, "ks_gaps": ks_gaps,
                    "direct_distances": direct_dist[:5000].tolist(),
                    "median_ratio11_by_M": dict(
                        zip(map(str, config.M_values), med_ratio11)),
                    "pooled_points": int(pooled_dist.size)})
    return _finish(config, {"resolved_centers": resolved_centers,
                            "case": case, "alpha": alpha}, rows, summary,
                   checks, t0)


# ---------------------------------------------------------------------------
# single delocalized outlier


def _se_one(args):
    lam, M, seed, tol, center, W, cutoff, i, big_thr, other_bound = args
    s = sample_potential(ModelParams(M=M, lam=lam, seed=seed), i)
    delta = gap_scale(s.params, center)
    spectrum = solve_spectrum_window(s, center - (W + 2.0) * delta,
                                     center + (W + 2.0) * delta, tol)
    u_all = (spectrum.eigenvalues - center) / delta
    inside = np.abs(u_all) <= W
    energies = np.ascontiguousarray(spectrum.eigenvalues[inside])
    u = u_all[inside]
    p = s.sorted_scaled
    # the window can swallow the whole spectrum here (delta is order one at
    # the band edge), so norms come from one tree evaluation: ell2^2 is the
    # derivative of the Cauchy sum and the nearest pole brackets the gap
    dmin = _gap_distances(p, energies, spectrum.pole_index[inside])
    _, l2sq = _kernels.tree_eval(*pole_tree(s), p, energies, True)
    ratio21 = np.sqrt(l2sq) * dmin
    big = ratio21 >= big_thr
    n_big = int(np.sum(big))
    others_ok = bool(np.all(ratio21[~big] <= other_bound))
    u_special = float(u[np.argmax(ratio21)]) if energies.size else None
    grid, vals = _tail_member((p - center) / delta, M * delta, cutoff, W,
                              seed, i)
    tau = None
    if vals.min() < 0.0 < vals.max():
        a1, b1 = np.polyfit(grid, vals, 1)
        if a1 != 0.0:
            tau = float(-b1 / a1)
    return {"M": M, "sample": i, "n_in_window": int(energies.size),
            "n_big": n_big, "others_ok": others_ok, "u_special": u_special,
            "ratio21_max": float(ratio21.max()) if energies.size else None,
            "tau": tau}


def run_single_extended(config: ExperimentConfig) -> RunRecord:
    """Unique far-from-pole eigenvalue near the lower reference energy."""
    t0 = time.perf_counter()
    lam, W = config.lam, config.W
    if not lam < math.sqrt(2.0):
        raise ValueError(f"requires lambda < sqrt(2), got {lam}")
    spec = config.center if config.center is not None else "E_hat_minus1"
    gamma = config.threshold("gamma", 0.2)
    rows, checks, summary = [], [], {}
    resolved_centers = {}
    for M in config.M_values:
        center = resolve_center(spec, lam, M)
        resolved_centers[str(M)] = center
        cutoff = _default_cutoff(config, M)
        big_thr = M ** (1.0 / lam ** 2 - 0.5 - gamma)
        other_bound = 1.0 + config.threshold("other_coeff", 10.0) * M ** (
            -config.threshold("other_exp", 0.3))
        batch = _map_ordered(
            _se_one, ((lam, M, config.seed, config.tol, center, W, cutoff,
                       i, big_thr, other_bound)
                      for i in range(config.n_samples)))
        rows.extend(batch)
        success = np.array([r["n_big"] == 1 and r["others_ok"]
                            for r in batch])
        frac = float(np.mean(success))
        _check(checks, f"M={M}:unique_delocalized",
               frac >= config.success_fraction, value=frac,
               threshold=config.success_fraction, big_threshold=big_thr,
               other_bound=other_bound)
        with_tau = [r for r in batch if r["tau"] is not None
                    and r["n_big"] == 1]
        near_tau = (float(np.mean([abs(r["u_special"] - r["tau"]) <= 1.0
                                   for r in with_tau]))
                    if with_tau else None)
        summary[f"M={M}"] = {"center": center, "fraction_success": frac,
                             "big_threshold": big_thr,
                             "other_bound": other_bound,
                             "n_with_tau": len(with_tau),
                             "fraction_near_tau": near_tau}
        if len(with_tau) >= config.n_samples / 2:
            _check(checks, f"M={M}:special_near_tau",
                   near_tau >= config.success_fraction, value=near_tau,
                   threshold=config.success_fraction)
    return _finish(config, {"resolved_centers": resolved_centers}, rows,
                   summary, checks, t0)


# ---------------------------------------------------------------------------
# phase diagram


def _pd_cell(args):
    lam, M, seed, tol, center_spec, W, cutoff, n_samples = args
    center = resolve_center(center_spec, lam, M)
    params = ModelParams(M=M, lam=lam, seed=seed)
    delta = gap_scale(params, center)
    criterion = M * delta * abs(1.0 - float(rho_hat(center, params.kappa)))
    grids, vals, ratios = [], [], []
    for i in range(n_samples):
        s = sample_potential(params, i)
        grid, val = _tail_member((s.sorted_scaled - center) / delta,
                                 M * delta, cutoff, W, seed, i)
        grids.append(grid)
        vals.append(val)
        spectrum = solve_spectrum_window(
            s, center - (W + 2.0) * delta, center + (W + 2.0) * delta, tol)
        inside = np.abs((spectrum.eigenvalues - center) / delta) <= W
        energies = np.ascontiguousarray(spectrum.eigenvalues[inside])
        if energies.size:
            dmin = _gap_distances(s.sorted_scaled, energies,
                                  spectrum.pole_index[inside])
            _, l2sq = _kernels.tree_eval(*pole_tree(s), s.sorted_scaled,
                                         energies, True)
            ratios.append(np.sqrt(l2sq) * dmin)
    cls = classify_tail(grids, vals)
    med_ratio = (_median(np.concatenate(ratios)) if ratios else None)
    return {"lam": lam, "center_spec": str(center_spec), "center": center,
            "M": M, "delta": delta, "criterion": criterion,
            "classification": cls.kind, "tau": cls.tau,
            "median_ratio21": med_ratio, "n_samples": n_samples}


def run_phase_diagram(config: ExperimentConfig) -> RunRecord:
    """Tail classification and hybridization criterion over a (lambda, E) grid."""
    t0 = time.perf_counter()
    if not config.lam_values or not config.center_values:
        raise ValueError("phase diagram requires lam_values and center_values")
    M = config.M_values[-1]
    cutoff = _default_cutoff(config, M)
    cells = [(lam, M, config.seed, config.tol, c, config.W, cutoff,
              config.n_samples)
             for lam in config.lam_values for c in config.center_values]
    rows = _map_ordered(_pd_cell, cells)
    summary = {"n_cells": len(rows), "M": M,
               "lam_values": list(config.lam_values),
               "center_values": [str(c) for c in config.center_values]}
    return _finish(config, {"M": M}, rows, summary, [], t0)


# ---------------------------------------------------------------------------
# direct point-process bounds


def run_seba_direct(config: ExperimentConfig) -> RunRecord:
    """Distance and gap tail bounds for the direct point process."""
    t0 = time.perf_counter()
    W = config.W
    L = config.L if config.L is not None else max(10.0 * W, 50.0)
    n = config.n_samples
    far_t = tuple(config.thresholds.get("far_t", (2.0, 5.0, 10.0)))
    rows, checks, summary = [], [], {}
    for alpha in config.alpha:
        t_values = sorted(set(far_t) | {2.0 * abs(alpha) + 10.0})
        configs = (sample_poisson(L, config.seed, i) for i in range(n))
        report = localization_bound_check(configs, alpha, W, t_values,
                                          config.tol)
        for row in report["far_bound"]:
            rows.append({"alpha": alpha, "family": "far", **row})
            _check(checks, f"alpha={alpha}:far:t={row['t']}", row["pass"],
                   value=row["empirical"],
                   threshold=row["bound"] + 2.0 * row["sigma"])
        for row in report["near_bound"]:
            rows.append({"alpha": alpha, "family": "near", **row})
            _check(checks, f"alpha={alpha}:near:t={row['t']}", row["pass"],
                   value=row["empirical"],
                   threshold=row["bound"] + 2.0 * row["sigma"])

    # extreme-gap tails are alpha-independent, so one ensemble suffices
    small, large = [], []
    for i in range(min(n, 2000)):
        pc = sample_poisson(L, config.seed, i)
        if np.sum(np.abs(pc.points) <= W) < 2:
            continue    # window too empty to carry a gap
        lo_gap, hi_gap = gap_extremes(pc.points, W)
        small.append(lo_gap)
        large.append(hi_gap)
    small = np.asarray(small)
    large = np.asarray(large)
    n_gap = small.size
    log_w = math.log(W)
    for t in (1.0, 2.0):
        emp = float(np.mean(large > (1.0 + t) * log_w))
        bound = min(2.0 * W / W ** (1.0 + t), 1.0)
        sigma = math.sqrt(bound * (1.0 - bound) / n_gap)
        _check(checks, f"gap_plus:t={t}", emp <= bound + 2.0 * sigma,
               value=emp, threshold=bound + 2.0 * sigma)
        rows.append({"family": "gap_plus", "t": t, "empirical": emp,
                     "bound_value": bound, "sigma": sigma})
    for s_cut in (0.01, 0.05):
        emp = float(np.mean(small < s_cut))
        bound = min(2.0 * W * s_cut, 1.0)
        sigma = math.sqrt(bound * (1.0 - bound) / n_gap)
        _check(checks, f"gap_minus:s={s_cut}", emp <= bound + 2.0 * sigma,
               value=emp, threshold=bound + 2.0 * sigma)
        rows.append({"family": "gap_minus", "s": s_cut, "empirical": emp,
                     "bound_value": bound, "sigma": sigma})
    summary.update({"L": L, "W": W, "n_samples": n, "n_gap_samples": n_gap})
    return _finish(config, {"L": L}, rows, summary, checks, t0)


# ---------------------------------------------------------------------------
# Hilbert-transform table


def run_hilbert_table(config: ExperimentConfig) -> RunRecord:
    """Closed form vs principal-value quadrature plus asymptote diagnostics."""
    t0 = time.perf_counter()
    xi_max = config.threshold("xi_max", 50.0)
    n_xi = int(config.threshold("n_xi", 201))
    xis = np.linspace(-xi_max, xi_max, n_xi)
    rows, checks = [], []
    max_diff = 0.0
    for xi in xis:
        closed = float(gaussian_hilbert(xi))
        quad = pv_quadrature_oracle(float(xi))
        diff = abs(closed - quad)
        max_diff = max(max_diff, diff)
        row = {"xi": float(xi), "closed": closed, "quadrature": quad,
               "abs_diff": diff}
        if abs(xi) >= 10.0:
            remainder = abs(closed + 1.0 / xi + 1.0 / xi ** 3)
            row["asymptote_remainder"] = remainder
            row["remainder_times_xi5"] = remainder * abs(xi) ** 5
        rows.append(row)
    quad_tol = config.threshold("quad_tol", 1e-8)
    _check(checks, "closed_vs_quadrature", max_diff <= quad_tol,
           value=max_diff, threshold=quad_tol)

    # small-argument slope: reported only; the literature prefactor is a
    # documented discrepancy against the closed form's exact slope of -1
    h = 1e-5
    slope0 = (float(gaussian_hilbert(h)) - float(gaussian_hilbert(-h))) / (2 * h)
    rem5 = [r["remainder_times_xi5"] for r in rows
            if "remainder_times_xi5" in r]

    ref_rows = []
    for kappa in (0.05, 0.1, 0.2):
        ref = solve_reference_energies(kappa)
        dev = abs(ref.e_minus1 + 1.0 + kappa * kappa)
        ok = dev <= 5.0 * kappa ** 4 and -4.0 * kappa ** 2 < ref.e_zero < 0.0
        _check(checks, f"reference_energies:kappa={kappa}", ok, value=dev,
               threshold=5.0 * kappa ** 4)
        ref_rows.append({"kappa": kappa, "e_minus1": ref.e_minus1,
                         "e_zero": ref.e_zero, "dev_rank_one": dev})
    summary = {"max_abs_diff": max_diff, "slope_at_zero": slope0,
               "remainder_times_xi5_range": [min(rem5), max(rem5)] if rem5 else None,
               "reference_energies": ref_rows}
    return _finish(config, {}, rows, summary, checks, t0)


# ---------------------------------------------------------------------------
# extreme-value helper


def gumbel_max_ks(M: int, n_samples: int, seed: int = 0,
                  lam: float = 1.0) -> float:
    """KS distance between the rescaled sample maxima and the Gumbel CDF.

    The maximum of M standard Gaussians, centered at b_M and scaled by
    a_M = sqrt(2 ln M), converges (slowly) to exp(-exp(-x)).
    """
    a_m = math.sqrt(2.0 * math.log(M))
    b_m = a_m - (math.log(math.log(M)) + math.log(4.0 * math.pi)) / (2.0 * a_m)
    params = ModelParams(M=M, lam=lam, seed=seed)
    maxima = np.array([sample_potential(params, i).raw_values.max()
                       for i in range(n_samples)])
    return ks_distance(a_m * (maxima - b_m),
                       lambda x: np.exp(-np.exp(-x)))


# ---------------------------------------------------------------------------
# verification suite


def run_verify(config: ExperimentConfig) -> RunRecord:
    """Cross-module invariant suite; exit-code material for the CLI."""
    t0 = time.perf_counter()
    checks, rows = [], []
    seed, tol = config.seed, config.tol

    # oracle equivalence on small instances
    worst_de = worst_trace = 0.0
    for M in (2, 8, 64):
        for i in range(20):
            s = sample_potential(ModelParams(M=M, lam=1.0, seed=seed), i)
            res = solve_spectrum_full(s, tol)
            worst_de = max(worst_de, float(np.max(np.abs(
                res.eigenvalues - dense_oracle(s)))))
            trace_dev = abs(math.fsum(res.eigenvalues)
                            - (math.fsum(s.sorted_scaled) - 1.0)) / M
            worst_trace = max(worst_trace, trace_dev)
    _check(checks, "oracle_equivalence", worst_de <= 1e-9,
           value=worst_de, threshold=1e-9)
    _check(checks, "trace_identity", worst_trace <= 1e-8,
           value=worst_trace, threshold=1e-8)

    # interlacing and the single below-minimum root
    bad = 0
    for i in range(50):
        s = sample_potential(ModelParams(M=2000, lam=1.0, seed=seed), i)
        res = solve_spectrum_full(s, tol)
        p = s.sorted_scaled
        ok = (res.eigenvalues[0] < p[0]
              and np.all(res.eigenvalues[1:] > p[:-1])
              and np.all(res.eigenvalues[1:] < p[1:])
              and int(np.sum(res.eigenvalues < p[0])) == 1)
        bad += not ok
    _check(checks, "interlacing", bad == 0, value=bad, threshold=0)

    # Hilbert transform: closed form vs quadrature, reference energies
    diffs = [abs(float(gaussian_hilbert(xi)) - pv_quadrature_oracle(float(xi)))
             for xi in np.linspace(-30.0, 30.0, 41)]
    _check(checks, "hilbert_quadrature", max(diffs) <= 1e-8,
           value=max(diffs), threshold=1e-8)
    ref_ok = True
    for kappa in (0.05, 0.1, 0.2):
        ref = solve_reference_energies(kappa)
        ref_ok &= (abs(ref.e_minus1 + 1.0 + kappa * kappa) <= 5.0 * kappa ** 4
                   and -4.0 * kappa ** 2 < ref.e_zero < 0.0)
    _check(checks, "reference_energies", bool(ref_ok))

    # density-integral envelope bounds
    violations = 0
    for v in np.linspace(-10.0, 10.0, 21):
        for delta in (0.01, 0.1, 1.0):
            integral, lower, upper = intrho_bounds_check(float(v), delta)
            violations += not (lower <= integral <= upper)
    _check(checks, "density_integral_bounds", violations == 0,
           value=violations, threshold=0)

    # mid-range pole sum: mean and variance decay
    M_y = 10_000
    params = ModelParams(M=M_y, lam=1.0, seed=seed)
    delta = gap_scale(params, 0.0)
    cutoff = math.log(M_y)
    y_ok = True
    y_summary = {}
    omegas = [sample_potential(params, i).sorted_scaled / delta
              for i in range(200)]
    for W in (1.0, 2.0, 4.0, 8.0):
        ys = np.array([np.sum(1.0 / w[(np.abs(w) > W) & (np.abs(w) < cutoff)])
                       for w in omegas])
        mean, var = float(np.mean(ys)), float(np.var(ys))
        y_summary[f"W={W}"] = {"mean": mean, "var": var}
        y_ok &= abs(mean) <= 0.05 and var <= 10.0 / W
    _check(checks, "midrange_sum_decay", bool(y_ok), detail=y_summary)

    # direct point process: distance and gap bounds
    direct = ExperimentConfig(experiment="seba-direct", W=5.0,
                              alpha=(0.0,), n_samples=1000, seed=seed,
                              tol=tol)
    direct_rec = run_seba_direct(direct)
    _check(checks, "point_process_bounds", direct_rec.passed,
           detail=[c["name"] for c in direct_rec.checks if not c["passed"]])

    rows = checks  # the pass/fail table is the row payload for this command
    summary = {"n_checks": len(checks),
               "n_failed": sum(not c["passed"] for c in checks)}
    return _finish(config, {}, rows, summary, checks, t0)
