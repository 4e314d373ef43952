"""Random operator on the complete graph: rank-one hopping plus Gaussian diagonal.

The operator acts on M sites as

    H = -|phi><phi| + kappa * diag(V),    phi = (1, ..., 1)/sqrt(M),

with V(x) i.i.d. standard Gaussian and kappa = lambda / sqrt(2 ln M).
This module owns parameter bookkeeping and potential sampling; everything
downstream consumes the sorted scaled potential kappa*V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ModelParams", "PotentialSample", "compute_kappa", "sample_potential"]

_MAX_TIE_RETRIES = 64


def compute_kappa(lam: float, M: int) -> float:
    """Coupling of the scaled potential, lambda / sqrt(2 ln M).

    Raises ValueError for M < 2 or lam <= 0.
    """
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")
    if not (lam > 0.0) or not math.isfinite(lam):
        raise ValueError(f"lambda must be a positive finite number, got {lam}")
    return lam / math.sqrt(2.0 * math.log(M))


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter set (M sites, disorder strength lambda, base seed)."""

    M: int
    lam: float
    seed: int = 0

    def __post_init__(self):
        compute_kappa(self.lam, self.M)

    @property
    def kappa(self) -> float:
        return compute_kappa(self.lam, self.M)


@dataclass(frozen=True)
class PotentialSample:
    """One realization of the diagonal disorder.

    raw_values are in sampling order; sorted_scaled holds kappa*V sorted
    ascending and sort_permutation maps sorted position -> original site.
    """

    params: ModelParams
    sample_index: int
    raw_values: np.ndarray
    sorted_scaled: np.ndarray
    sort_permutation: np.ndarray

    @classmethod
    def from_values(cls, params: ModelParams, raw_values, sample_index: int = -1,
                    require_distinct: bool = True) -> "PotentialSample":
        """Build a sample from explicit potential values (for synthetic tests)."""
        raw = np.asarray(raw_values, dtype=np.float64).copy()
        if raw.shape != (params.M,):
            raise ValueError(f"expected {params.M} values, got shape {raw.shape}")
        perm = np.argsort(raw, kind="stable")
        scaled = params.kappa * raw[perm]
        if require_distinct and np.any(np.diff(scaled) <= 0.0):
            raise ValueError("potential values are not distinct")
        raw.flags.writeable = False
        scaled.flags.writeable = False
        perm.flags.writeable = False
        return cls(params=params, sample_index=sample_index, raw_values=raw,
                   sorted_scaled=scaled, sort_permutation=perm)


def sample_potential(params: ModelParams, sample_index: int = 0) -> PotentialSample:
    """Draw one disorder realization from a deterministic per-sample substream.

    The substream is numpy's SeedSequence(seed, spawn_key=(sample_index, retry)).
    On the (measure-zero) event of a tie in the sampled values the draw is
    rejected and retried on the next retry substream, so that output values
    are always strictly sortable.
    """
    if sample_index < 0:
        raise ValueError(f"sample_index must be >= 0, got {sample_index}")
    for retry in range(_MAX_TIE_RETRIES):
        ss = np.random.SeedSequence(entropy=params.seed,
                                    spawn_key=(sample_index, retry))
        rng = np.random.default_rng(ss)
        raw = rng.standard_normal(params.M)
        perm = np.argsort(raw, kind="stable")
        scaled = params.kappa * raw[perm]
        if not np.any(np.diff(scaled) <= 0.0):
            raw.flags.writeable = False
            scaled.flags.writeable = False
            perm.flags.writeable = False
            return PotentialSample(params=params, sample_index=sample_index,
                                   raw_values=raw, sorted_scaled=scaled,
                                   sort_permutation=perm)
    raise RuntimeError("exceeded tie-rejection retry budget; RNG is suspect")
