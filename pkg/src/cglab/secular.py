"""Secular equation F_M(E) = 1: evaluation, spectrum solving, eigenfunctions.

The operator -|phi><phi| + kappa*diag(V) has eigenvalues exactly at the
roots of F_M(E) = (1/M) sum_x 1/(kappa*V(x) - E) = 1, one root strictly
below the smallest pole and one in each open gap between consecutive poles
(strict interlacing).  Solving is delegated to the kernel layer; the
per-gap iteration depends only on the gap and the full pole set, so
windowed solves match full solves bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import PotentialSample

__all__ = [
    "PoleError",
    "DegenerateSampleError",
    "SpectrumResult",
    "EigenfunctionValues",
    "secular_value",
    "solve_spectrum_full",
    "solve_spectrum_window",
    "ground_state_energy",
    "eigenfunction",
    "dense_oracle",
]

DEFAULT_TOL = 1e-12
_DENSE_LIMIT = 1024


class PoleError(ValueError):
    """Requested energy coincides with a potential value."""


class DegenerateSampleError(ValueError):
    """Sorted scaled potential is not strictly increasing."""


@dataclass(frozen=True)
class SpectrumResult:
    """Roots of the secular equation with their gap ranks.

    pole_index[j] = k means eigenvalues[j] lies in (sorted_scaled[k-1],
    sorted_scaled[k]); k = 0 marks the root below the smallest pole.
    solved_range records the energy interval whose gaps were solved, so
    window consumers can check coverage.
    """

    eigenvalues: np.ndarray
    pole_index: np.ndarray
    solved_range: tuple[float, float]
    tol: float


@dataclass(frozen=True)
class EigenfunctionValues:
    energy: float
    values: np.ndarray
    normalization_constant: float


def _poles(sample) -> np.ndarray:
    return np.asarray(sample.sorted_scaled, dtype=np.float64)


def _check_nondegenerate(p: np.ndarray):
    if p.shape[0] > 1 and np.any(np.diff(p) <= 0.0):
        raise DegenerateSampleError("potential values are not strictly increasing")


def _check_not_pole(p: np.ndarray, E: float):
    k = np.searchsorted(p, E)
    if (k < p.shape[0] and p[k] == E) or (k > 0 and p[k - 1] == E):
        raise PoleError(f"E = {E} coincides with a potential pole")


def pole_tree(sample):
    """Moment tree over the sample's sorted poles, cached on the sample."""
    tree = getattr(sample, "_pole_tree", None)
    if tree is None:
        tree = _kernels.build_tree(_poles(sample))
        try:
            object.__setattr__(sample, "_pole_tree", tree)
        except (AttributeError, TypeError):
            pass
    return tree


def secular_value(sample, E: float) -> float:
    """F_M(E) = (1/M) sum 1/(kappa V(x) - E), exactly rounded summation."""
    p = _poles(sample)
    E = float(E)
    _check_not_pole(p, E)
    return math.fsum(1.0 / (v - E) for v in p) / p.shape[0]


def solve_poles(p: np.ndarray, gaps: np.ndarray, rhs: float,
                tol: float = DEFAULT_TOL, tree=None) -> np.ndarray:
    """Roots of sum 1/(p - E) = rhs, one per requested gap rank."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    gaps = np.ascontiguousarray(gaps, dtype=np.int64)
    if tree is None:
        tree = _kernels.build_tree(p)
    return _kernels.solve_gaps(p, *tree, gaps, float(rhs), float(tol))


def solve_spectrum_full(sample, tol: float = DEFAULT_TOL) -> SpectrumResult:
    """All M eigenvalues by guaranteed bracketing between interlacing poles."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = _poles(sample)
    M = p.shape[0]
    if M == 1:
        # rank-one identity: F(E) = 1/(p - E) = 1
        eig = np.array([p[0] - 1.0])
        return SpectrumResult(eig, np.array([0], dtype=np.int64),
                              (-math.inf, math.inf), tol)
    _check_nondegenerate(p)
    gaps = np.arange(M, dtype=np.int64)
    roots = solve_poles(p, gaps, float(M), tol, tree=pole_tree(sample))
    return SpectrumResult(roots, gaps, (-math.inf, math.inf), tol)


def solve_spectrum_window(sample, a: float, b: float,
                          tol: float = DEFAULT_TOL) -> SpectrumResult:
    """Eigenvalues of the full solve restricted to [a, b].

    Candidate gaps come from binary search over the sorted poles; boundary
    gaps are solved and their roots kept only when inside the window, which
    reproduces the full solve's values exactly on the overlap.
    """
    if not a < b:
        raise ValueError(f"window requires a < b, got [{a}, {b}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = _poles(sample)
    M = p.shape[0]
    _check_nondegenerate(p)
    k_min = int(np.searchsorted(p, a, side="right"))
    k_max = min(int(np.searchsorted(p, b, side="left")), M - 1)
    if k_min > k_max:
        return SpectrumResult(np.empty(0), np.empty(0, dtype=np.int64),
                              (float(a), float(b)), tol)
    gaps = np.arange(k_min, k_max + 1, dtype=np.int64)
    roots = solve_poles(p, gaps, float(M), tol, tree=pole_tree(sample))
    keep = (roots >= a) & (roots <= b)
    return SpectrumResult(roots[keep], gaps[keep], (float(a), float(b)), tol)


def ground_state_energy(sample, tol: float = DEFAULT_TOL) -> float:
    """The unique root of F_M(E) = 1 below the smallest pole."""
    p = _poles(sample)
    if p.shape[0] == 1:
        return float(p[0] - 1.0)
    roots = solve_poles(p, np.zeros(1, dtype=np.int64), float(p.shape[0]),
                        tol, tree=pole_tree(sample))
    return float(roots[0])


def eigenfunction(sample, E: float, C: float | None = None) -> EigenfunctionValues:
    """psi(x) = C / (kappa V(x) - E) in original site order.

    When C is not given it defaults to the local mean gap at center E,
    matching the rescaled normalization convention used by the window
    statistics.
    """
    p = _poles(sample)
    E = float(E)
    _check_not_pole(p, E)
    if C is None:
        from .scaling import gap_scale
        C = gap_scale(sample.params, E)
    scaled = sample.params.kappa * np.asarray(sample.raw_values, dtype=np.float64)
    values = C / (scaled - E)
    return EigenfunctionValues(energy=E, values=values,
                               normalization_constant=float(C))


def dense_oracle(sample) -> np.ndarray:
    """Brute-force eigenvalues of the dense M x M operator, M <= 1024."""
    p = _poles(sample)
    M = p.shape[0]
    if M > _DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to M <= {_DENSE_LIMIT}, got {M}")
    H = np.diag(p) - np.full((M, M), 1.0 / M)
    return np.linalg.eigvalsh(H)
