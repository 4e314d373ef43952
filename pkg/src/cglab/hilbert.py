"""Hilbert transform of the standard Gaussian density and reference energies.

H(xi) = PV integral rho(v) / (v - xi) dv  with rho the standard normal pdf.
In closed form H(xi) = -sqrt(2) * D(xi / sqrt(2)) where D is Dawson's
integral.  The smoothed density of states of the scaled potential is
rho_hat(E) = H(E / kappa) / kappa, and the reference energies are the roots
of rho_hat = 1 near -1 and near 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

__all__ = [
    "ReferenceEnergies",
    "gaussian_hilbert",
    "pv_quadrature_oracle",
    "rho_hat",
    "solve_reference_energies",
    "intrho_bounds_check",
]

_SQRT2 = math.sqrt(2.0)
_KAPPA_MAX = 0.5


def gaussian_hilbert(xi):
    """Closed-form Hilbert transform of the standard normal density.

    Accepts scalars or arrays.  H(0) = 0, H'(0) = -1, and for large |xi|
    H(xi) = -1/xi - 1/xi^3 - 3/xi^5 + O(xi^-7).
    """
    xi = np.asarray(xi, dtype=np.float64)
    out = -_SQRT2 * special.dawsn(xi / _SQRT2)
    return float(out) if out.ndim == 0 else out


def _rho(v):
    return np.exp(-0.5 * v * v) / math.sqrt(2.0 * math.pi)


def pv_quadrature_oracle(xi: float, cutoff: float | None = None,
                         tol: float = 1e-12) -> float:
    """Principal-value quadrature for H(xi), independent of the closed form.

    Folds the integral around the singularity,
    H(xi) = int_0^cutoff [rho(xi + w) - rho(xi - w)] / w dw,
    where the integrand is smooth at w = 0.  Raises RuntimeError when the
    quadrature error estimate is not under control.
    """
    xi = float(xi)
    if cutoff is None:
        cutoff = abs(xi) + 14.0
    if cutoff <= abs(xi) + 10.0:
        raise ValueError("cutoff too small to capture the density mass")

    def integrand(w):
        if w == 0.0:
            return 2.0 * (-xi) * _rho(xi)   # limit of the fold, 2*rho'(xi)
        return (_rho(xi + w) - _rho(xi - w)) / w

    pts = sorted({p for p in (abs(xi) - 8.0, abs(xi), abs(xi) + 8.0)
                  if 0.0 < p < cutoff})
    val, err = integrate.quad(integrand, 0.0, cutoff, points=pts or None,
                              limit=400, epsabs=tol, epsrel=tol)
    if err > 1e-9:
        raise RuntimeError(f"PV quadrature failed to converge: err={err:.3e}")
    return val


def rho_hat(E, kappa: float):
    """Smoothed density of states factor H(E/kappa) / kappa."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return gaussian_hilbert(np.asarray(E, dtype=np.float64) / kappa) / kappa


@dataclass(frozen=True)
class ReferenceEnergies:
    """Roots of rho_hat = 1: e_minus1 near -1 and e_zero near 0^-."""

    kappa: float
    e_minus1: float
    e_zero: float


def _bracket_root(f, lo: float, hi: float) -> float:
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        grid = np.linspace(lo, hi, 41)
        profile = ", ".join(f"{x:+.4f}:{f(x):+.3e}" for x in grid[::8])
        raise ValueError(
            f"no sign change of rho_hat - 1 on [{lo:.6f}, {hi:.6f}]; "
            f"scanned profile: {profile}")
    return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)


def solve_reference_energies(kappa: float) -> ReferenceEnergies:
    """Solve rho_hat(E) = 1 on the two standard brackets.

    Valid for 0 < kappa <= 0.5; outside that range the lower bracket can
    lose its sign change and a diagnostic ValueError is raised.
    """
    if not (0.0 < kappa <= _KAPPA_MAX):
        raise ValueError(f"kappa must lie in (0, {_KAPPA_MAX}], got {kappa}")

    def g(E):
        return rho_hat(E, kappa) - 1.0

    e_m1 = _bracket_root(g, -1.0 - 4.0 * kappa * kappa, -1.0)
    e_z = _bracket_root(g, -4.0 * kappa * kappa, 0.0)
    for root in (e_m1, e_z):
        resid = abs(rho_hat(root, kappa) - 1.0)
        if resid > 1e-10:
            raise RuntimeError(f"reference energy residual {resid:.3e} too large")
    return ReferenceEnergies(kappa=kappa, e_minus1=e_m1, e_zero=e_z)


def intrho_bounds_check(v: float, delta: float, c: float = 0.05,
                        C: float = 20.0) -> tuple[float, float, float]:
    """Quadrature value and two-sided bounds for the clipped second moment.

    I(v, delta) = int_{|u - v| >= delta} rho(u) / (u - v)^2 du.
    Returns (integral, lower, upper) with
    lower = c / (1 + |v|)^2 and upper = C * (rho(v)/delta + 1/(1+|v|)^2).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    v = float(v)

    def integrand(w):
        return (_rho(v + w) + _rho(v - w)) / (w * w)

    pts = sorted({p for p in (abs(v), abs(v) + 8.0) if p > delta})
    val, err = integrate.quad(integrand, delta, np.inf, points=None,
                              limit=400, epsabs=1e-12, epsrel=1e-12)
    # quad on an infinite interval ignores interior break points, so add
    # the bounded head explicitly when the density bump sits past delta.
    if pts:
        head, err2 = integrate.quad(integrand, delta, pts[-1] + 8.0,
                                    points=pts, limit=400,
                                    epsabs=1e-12, epsrel=1e-12)
        tail, err3 = integrate.quad(integrand, pts[-1] + 8.0, np.inf,
                                    limit=400, epsabs=1e-12, epsrel=1e-12)
        val, err = head + tail, err2 + err3
    if err > 1e-8 * max(1.0, abs(val)):
        raise RuntimeError(f"quadrature error {err:.3e} too large")
    lower = c / (1.0 + abs(v)) ** 2
    upper = C * (float(_rho(v)) / delta + 1.0 / (1.0 + abs(v)) ** 2)
    return float(val), lower, upper
