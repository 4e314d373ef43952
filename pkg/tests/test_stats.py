import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cglab.model import ModelParams, sample_potential
from cglab.scaling import ScalingWindow, gap_scale
from cglab.stats import (concentration_check, hausdorff_distance, ks_distance,
                         norm_profile, participation_ratio,
                         tunneling_amplitude)


def synthetic_window(poles, u, cutoff=5.0):
    poles = np.asarray(poles, dtype=np.float64)
    return ScalingWindow(center=0.0, delta=1.0, half_width=10.0,
                         cutoff=cutoff, omega_all=poles, label_offset=0,
                         omega=poles, omega_labels=np.arange(poles.size),
                         u=np.asarray([u]), u_labels=np.asarray([0]))


def test_norm_profile_single_pole():
    prof = norm_profile(synthetic_window([1.0], 0.0), 0)
    assert prof.head_sq == 1.0
    assert prof.body_sq == 0.0
    assert prof.ratio21 == pytest.approx(1.0)


def test_norm_profile_symmetric_pair():
    prof = norm_profile(synthetic_window([-1.0, 1.0], 0.0), 0)
    assert prof.head_sq == pytest.approx(1.0)
    assert prof.body_sq == pytest.approx(1.0)
    assert prof.ell2 == pytest.approx(math.sqrt(2.0))
    assert prof.ratio21 == pytest.approx(math.sqrt(2.0))


def test_norm_profile_decomposition_and_ordering():
    rng = np.random.default_rng(1)
    for _ in range(50):
        poles = np.sort(rng.uniform(-8.0, 8.0, 12))
        gaps = np.diff(poles)
        k = int(np.argmax(gaps))
        u = poles[k] + 0.5 * gaps[k]
        prof = norm_profile(synthetic_window(poles, u, cutoff=4.0), 0)
        assert prof.ell_inf <= prof.ell2 <= prof.ell1 * (1.0 + 1e-12)
        assert prof.head_sq == prof.ell_inf ** 2
        assert prof.head_sq + prof.body_sq + prof.tail_sq == pytest.approx(
            prof.ell2 ** 2, rel=1e-10)


def test_norm_profile_missing_label():
    with pytest.raises(KeyError):
        norm_profile(synthetic_window([1.0], 0.0), 3)


def test_participation_delta_and_uniform():
    p2, r = participation_ratio([0.0, 0.0, 1.0, 0.0], 2.0)
    assert p2 == pytest.approx(1.0)
    assert r == pytest.approx(1.0)
    M = 64
    p2, r = participation_ratio(np.full(M, 0.25), 2.0)
    assert p2 == pytest.approx(1.0 / M)
    assert r == pytest.approx(1.0 / math.sqrt(M))


def test_participation_validation():
    with pytest.raises(ValueError):
        participation_ratio([1.0], 0.5)
    with pytest.raises(ValueError):
        participation_ratio([0.0, 0.0], 2.0)


@given(st.lists(st.floats(-5.0, 5.0), min_size=1, max_size=40),
       st.sampled_from([1.5, 2.0, 3.0]))
def test_participation_sandwich(values, q):
    if not any(v != 0.0 for v in values):
        values = values + [1.0]
    p_q, r = participation_ratio(values, q)
    slack = 1.0 + 1e-9
    assert r ** (2.0 * q) <= p_q * slack
    assert p_q <= r ** (2.0 * (q - 1.0)) * slack


def test_hausdorff_basic():
    assert hausdorff_distance([0.0], [0.0]) == 0.0
    assert hausdorff_distance([-1.0, 0.3], [-1.0, (-0.5, 0.5)]) == \
        pytest.approx(0.65)
    with pytest.raises(ValueError):
        hausdorff_distance([], [0.0])


def test_hausdorff_brute_force_agreement(rng):
    for _ in range(20):
        A = np.sort(rng.uniform(-3.0, 3.0, rng.integers(1, 6)))
        lo = rng.uniform(-3.0, 0.0)
        B = [float(rng.uniform(-3.0, 3.0)), (lo, lo + rng.uniform(0.0, 3.0))]
        ys = np.concatenate([[B[0]], np.linspace(B[1][0], B[1][1], 20001)])
        d_ab = max(min(abs(x - y) for y in ys) for x in A)
        d_ba = max(min(abs(y - x) for x in A) for y in ys)
        assert hausdorff_distance(A, B) == pytest.approx(
            max(d_ab, d_ba), abs=1e-3)


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=8, unique=True),
       st.lists(st.integers(-50, 50), min_size=1, max_size=8, unique=True),
       st.lists(st.integers(-50, 50), min_size=1, max_size=8, unique=True))
def test_hausdorff_metric_properties(a, b, c):
    A = [v / 4.0 for v in a]
    B = [v / 4.0 for v in b]
    C = [v / 4.0 for v in c]
    d_ab = hausdorff_distance(A, B)
    assert d_ab == pytest.approx(hausdorff_distance(B, A), abs=1e-12)
    d_ac = hausdorff_distance(A, C)
    d_cb = hausdorff_distance(C, B)
    assert d_ab <= d_ac + d_cb + 1e-12


def test_spectrum_hausdorff_to_limit_set():
    from cglab.secular import solve_spectrum_full
    s = sample_potential(ModelParams(M=100_000, lam=1.0, seed=7), 0)
    res = solve_spectrum_full(s)
    assert hausdorff_distance(res.eigenvalues, [-1.0, (-1.0, 1.0)]) <= 0.1


def test_ks_distance_basics(rng):
    a = rng.normal(size=200)
    assert ks_distance(a, a) == 0.0
    b = rng.normal(size=300)
    d = ks_distance(a, b)
    # invariant under a common strictly increasing transformation
    assert ks_distance(np.exp(a), np.exp(b)) == pytest.approx(d, abs=1e-12)
    with pytest.raises(ValueError):
        ks_distance([], a)


def test_ks_distance_against_cdf(rng):
    u = rng.uniform(size=5000)
    assert ks_distance(u, lambda x: np.clip(x, 0.0, 1.0)) <= 0.03


def test_tunneling_invariant():
    s = sample_potential(ModelParams(M=200, lam=1.0, seed=3), 0)
    E = -0.4321
    res = tunneling_amplitude(s, 3, 17, E)
    scaled = s.params.kappa * s.raw_values
    mask = np.ones(200, dtype=bool)
    mask[3] = mask[17] = False
    reduced = abs(1.0 - np.sum(1.0 / (scaled[mask] - E)) / 200)
    assert res.tau * 200 * reduced == pytest.approx(1.0, abs=1e-8)
    assert res.tau >= 0.0
    from cglab.hilbert import rho_hat
    assert res.criterion == pytest.approx(
        200 * gap_scale(s.params, E) * abs(1.0 - rho_hat(E, s.params.kappa)))
    with pytest.raises(ValueError):
        tunneling_amplitude(s, 3, 3, E)


def test_concentration_check(rng):
    values = rng.normal(0.0, 1.0, 5000)
    report = concentration_check(values, [0.5, 1.0, 2.0], 1.0, 10.0)
    assert report["n"] == 5000
    assert report["c_max"] > 0.0
    with pytest.raises(ValueError):
        concentration_check(values[:100], [1.0], 1.0, 10.0)
    with pytest.raises(ValueError):
        concentration_check(values, [1.0], 0.0, 10.0)
