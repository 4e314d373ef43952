import math

import numpy as np
import pytest

from cglab.seba import (PoissonConfiguration, gap_extremes,
                        localization_bound_check, sample_poisson, solve_seba,
                        stieltjes, stieltjes_derivative)
from cglab.secular import PoleError
from cglab.stats import ks_distance


def config_from(points, L):
    return PoissonConfiguration.from_points(points, L)


def test_from_points_validation():
    with pytest.raises(ValueError):
        config_from([-1.0, 2.0], 1.5)
    with pytest.raises(ValueError):
        config_from([0.5, 0.5], 10.0)
    cfg = config_from([0.7, -1.0], 10.0)
    assert np.array_equal(cfg.points, [-1.0, 0.7])
    assert cfg.label_offset == 0          # -1.0 carries label 0


def test_sample_poisson_deterministic():
    a = sample_poisson(50.0, 3, 5)
    b = sample_poisson(50.0, 3, 5)
    c = sample_poisson(50.0, 3, 6)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)
    with pytest.raises(ValueError):
        sample_poisson(0.0, 0)


def test_sample_poisson_mean_count():
    L = 10_000.0
    counts = [sample_poisson(L, 1, i).points.size for i in range(1000)]
    assert abs(np.mean(counts) - 2.0 * L) <= 0.01 * 2.0 * L


def test_nearest_neighbor_gaps_are_exponential():
    gaps = []
    for i in range(600):
        pts = sample_poisson(100.0, 4, i).points
        inner = pts[np.abs(pts) <= 10.0]
        gaps.extend(np.diff(inner))
    assert len(gaps) >= 10_000
    ks = ks_distance(gaps, lambda x: 1.0 - np.exp(-np.asarray(x)))
    assert ks <= 0.05


def test_stieltjes_small_configs():
    assert stieltjes(config_from([-1.0, 1.0], 10.0), 0.0) == 0.0
    assert stieltjes(config_from([0.5], 10.0), 0.0) == pytest.approx(2.0)
    with pytest.raises(PoleError):
        stieltjes(config_from([0.5], 10.0), 0.5)
    with pytest.raises(ValueError):
        stieltjes(config_from([0.5], 10.0), 2.0)    # outside |x| <= L/10


def test_stieltjes_is_cauchy_with_scale_pi():
    vals = [stieltjes(sample_poisson(200.0, 3, i), 0.25) for i in range(3000)]
    ks = ks_distance(vals, lambda x: 0.5 + np.arctan(
        np.asarray(x) / math.pi) / math.pi)
    assert ks <= 0.05


def test_derivative_small_config_and_bounds():
    cfg = config_from([-1.0, 1.0], 10.0)
    assert stieltjes_derivative(cfg, 0.0) == pytest.approx(2.0)
    pts = sample_poisson(100.0, 7, 0).points
    cfg = PoissonConfiguration.from_points(pts, 100.0)
    k = np.searchsorted(pts, 0.0)
    lo, hi = pts[k - 1], pts[k]
    x = lo + 0.37 * (hi - lo)
    d = stieltjes_derivative(cfg, x)
    assert d >= 1.0 / (hi - lo) ** 2
    assert d >= 1.0 / min(x - lo, hi - x) ** 2 * (1.0 - 1e-12)


def test_derivative_matches_finite_difference():
    pts = sample_poisson(100.0, 8, 0).points
    cfg = PoissonConfiguration.from_points(pts, 100.0)
    k = np.searchsorted(pts, 1.0)
    lo, hi = pts[k - 1], pts[k]
    x = 0.5 * (lo + hi)
    h = 1e-6 * (hi - lo)
    fd = (stieltjes(cfg, x + h) - stieltjes(cfg, x - h)) / (2.0 * h)
    assert stieltjes_derivative(cfg, x) == pytest.approx(fd, rel=1e-6)


def test_solve_seba_symmetric_config():
    sol = solve_seba(config_from([-1.0, 1.0], 20.0), 0.0, 2.0)
    assert sol.u == pytest.approx([0.0], abs=1e-12)
    assert sol.ell_inf[0] * sol.dist[0] == pytest.approx(1.0)
    assert sol.ell2_sq[0] == pytest.approx(2.0)


def test_solve_seba_window_precondition():
    with pytest.raises(ValueError):
        solve_seba(sample_poisson(50.0, 0), 0.0, 10.0)


def test_large_alpha_coalescence():
    sol = solve_seba(sample_poisson(100.0, 5, 0), 1e6, 5.0)
    assert np.all(sol.dist <= 1e-4)


def test_shift_covariance():
    pc = sample_poisson(50.0, 9, 0)
    b = 0.8
    shifted = PoissonConfiguration.from_points(pc.points + b, 50.0 + 2.0)
    sol = solve_seba(pc, 1.5, 2.0)
    sol2 = solve_seba(shifted, 1.5, 4.0)
    for u in sol.u:
        assert np.min(np.abs(sol2.u - (u + b))) <= 1e-9


def test_interlacing_all_alpha():
    pc = sample_poisson(80.0, 10, 2)
    for alpha in (-30.0, -1.0, 0.0, 2.5, 40.0):
        sol = solve_seba(pc, alpha, 5.0)
        gaps = sol.labels + pc.label_offset
        assert np.all(pc.points[gaps - 1] < sol.u)
        assert np.all(sol.u < pc.points[gaps])


def test_partial_l1_growth():
    sol = solve_seba(sample_poisson(2000.0, 6, 0), 0.0, 5.0)
    med = [np.median(sol.ell1_partial[W]) for W in (10.0, 100.0, 1000.0)]
    assert med[0] < med[1] < med[2]


def test_localization_bound_check_requires_large_ensemble():
    configs = [sample_poisson(50.0, 0, i) for i in range(10)]
    with pytest.raises(ValueError):
        localization_bound_check(configs, 0.0, 5.0, (2.0,))


def test_localization_bound_check_report_shape():
    configs = (sample_poisson(50.0, 1, i) for i in range(1000))
    report = localization_bound_check(configs, 0.0, 5.0, (1.0, 10.0))
    assert report["n"] == 1000
    assert {r["t"] for r in report["far_bound"]} == {1.0, 10.0}
    # t=1 far bound is 1, trivially satisfied
    t1 = next(r for r in report["far_bound"] if r["t"] == 1.0)
    assert t1["bound"] == 1.0 and t1["pass"]
    assert all(r["t"] > 0.0 for r in report["near_bound"])


def test_gap_extremes():
    assert gap_extremes([-1.0, 0.0, 2.0], 3.0) == (1.0, 2.0)
    lo, hi = gap_extremes(np.arange(-5.0, 5.5, 0.5), 5.0)
    assert lo == pytest.approx(hi)
    with pytest.raises(ValueError):
        gap_extremes([0.0], 3.0)
