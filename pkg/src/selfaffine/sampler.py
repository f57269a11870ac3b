"""Exact sampling of the truncated random series ``x = sum_n A^n b_n``.

The digits ``b_n`` are i.i.d. with law ``p``, so the samples follow the
self-affine measure up to a truncation error below ``1e-12``.  Points are
generated in fixed-size partitions, each with its own generator derived
from ``(seed, partition)``, so the output never depends on worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .ifs import HomogeneousIFS, require_valid

PARTITION = 1 << 16
ECF_BLOCK = 1 << 14
TRUNCATION = 1e-12


def auto_depth(ifs: HomogeneousIFS, truncation: float = TRUNCATION) -> int:
    """Smallest depth with ``||A||_inf^depth * max ||a_j||_inf < truncation``."""
    amax = float(np.max(np.abs(ifs.digits)))
    if amax == 0:
        return 1
    contraction = float(np.max(np.abs(ifs.contraction)))
    depth = math.floor(math.log(truncation / amax) / math.log(contraction)) + 1
    return max(1, depth)


@dataclass(frozen=True)
class SampleConfig:
    num_points: int
    depth: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.num_points < 1:
            raise ValueError("num_points must be positive")
        if self.depth is not None and self.depth < 1:
            raise ValueError("depth must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _partition(ifs, powers, cfg, index, size):
    rng = np.random.default_rng([cfg.seed, index])
    cdf = np.cumsum(ifs.probs)
    idx = np.searchsorted(cdf, rng.random((size, powers.shape[0])), side="right")
    np.minimum(idx, ifs.num_digits - 1, out=idx)
    return kernels.series_points(idx, np.ascontiguousarray(ifs.digits), powers)


def sample_points(ifs: HomogeneousIFS, cfg: SampleConfig, workers: int = 1) -> np.ndarray:
    """``cfg.num_points`` i.i.d. draws from the measure, shape ``(M, d)``."""
    require_valid(ifs)
    depth = cfg.depth if cfg.depth is not None else auto_depth(ifs)
    powers = np.ascontiguousarray(ifs.contraction[None, :] ** np.arange(depth)[:, None])
    sizes = [min(PARTITION, cfg.num_points - s) for s in range(0, cfg.num_points, PARTITION)]
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda t: _partition(ifs, powers, cfg, *t), enumerate(sizes)))
    else:
        parts = [_partition(ifs, powers, cfg, i, s) for i, s in enumerate(sizes)]
    return np.concatenate(parts, axis=0)


def empirical_cf(points, xi) -> complex | np.ndarray:
    """``(1/M) sum_i exp(-2 pi i <xi, x_i>)``.

    ``xi`` may be one frequency or a batch of shape ``(B, d)``; a batch
    returns an array.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] == 0:
        raise ValueError("need at least one point")
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim <= 1
    xis = np.atleast_2d(xi) if points.shape[1] > 1 or xi.ndim == 2 else xi.reshape(-1, 1)
    if xis.shape[1] != points.shape[1]:
        raise ValueError("frequency dimension does not match points")
    out = kernels.empirical_cf(np.ascontiguousarray(points), np.ascontiguousarray(xis), ECF_BLOCK)
    if single and out.size == 1:
        return complex(out[0])
    return out
