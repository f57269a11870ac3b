"""Empirical Fourier decay: shell suprema, power-law fits and orbit traces.

Suprema are estimated from samples, never certified.  Each shell
``R <= ||xi||_inf <= 2R`` is probed at a fixed set of structured
frequencies (axis directions, the diagonal, and powers of the ``theta_k``
landing in the shell) plus a scrambled Halton sequence.  Halton prefixes
are nested, so raising ``samples`` can only raise the estimate.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import qmc

from .fourier import _mu_hat_dd, mu_hat_batch
from .ifs import HomogeneousIFS, require_valid

SHELL_TOL = 1e-10
STRATA_RADII = 8
FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class DecayProfile:
    radii: np.ndarray
    shell_sup: np.ndarray
    samples: np.ndarray
    alpha_fit: float
    fit_residual: float
    floored: np.ndarray

    def rows(self):
        return list(zip(self.radii.tolist(), self.shell_sup.tolist(), self.samples.tolist()))


def _structured(ifs, R):
    d = ifs.dim
    radii = R * 2.0 ** (np.arange(STRATA_RADII) / STRATA_RADII)
    pts = [np.eye(d)[j] * r for r in radii for j in range(d)]
    pts += [np.ones(d) * r for r in radii] if d > 1 else []
    for t in np.unique(np.abs(ifs.theta)):
        if t <= 1:
            continue
        n0 = int(np.ceil(np.log(R) / np.log(t) - 1e-12))
        for n in range(n0, n0 + 64):
            v = t ** n
            if v > 2 * R:
                break
            if v >= R:
                pts.append(np.ones(d) * v)
                pts.extend(np.eye(d)[j] * v for j in range(d) if d > 1)
    return np.array(pts, dtype=float).reshape(-1, d)


def shell_points(ifs: HomogeneousIFS, R: float, samples: int, seed: int) -> np.ndarray:
    """Frequencies probed in the shell ``[R, 2R]``: structured points then ``samples`` Halton points."""
    if R < 1:
        raise ValueError("shell radius must be at least 1")
    if samples < 0:
        raise ValueError("samples must be non-negative")
    d = ifs.dim
    fixed = _structured(ifs, R)
    if samples == 0:
        return fixed
    # nested: the first n points do not depend on how many are drawn
    u = qmc.Halton(d=d + 1, scramble=True, seed=np.random.default_rng(seed)).random(samples)
    r = R * 2.0 ** u[:, 0]
    if d == 1:
        q = r[:, None]
    else:
        face = np.minimum((u[:, 1] * d).astype(int), d - 1)
        rest = (2 * u[:, 2:] - 1) * r[:, None]
        q = np.empty((samples, d))
        for j in range(d):
            cols = [k for k in range(d) if k != j]
            sel = face == j
            q[np.ix_(sel, cols)] = rest[sel]
            q[sel, j] = r[sel]
    return np.concatenate([fixed, q], axis=0)


def shell_supremum(ifs: HomogeneousIFS, R: float, samples: int, seed: int) -> float:
    """Largest sampled ``|mu_hat|`` on ``R <= ||xi||_inf <= 2R``."""
    require_valid(ifs)
    pts = shell_points(ifs, R, samples, seed)
    values, _, _ = mu_hat_batch(ifs, pts, SHELL_TOL)
    return float(min(1.0, np.abs(values).max()))


def fit_alpha(radii, shell_sup, samples=None) -> DecayProfile:
    """Least-squares fit of ``log shell_sup = c - alpha log R``.

    Zero suprema are floored at ``1e-15`` and flagged.  The residual is the
    root-mean-square deviation in log space.
    """
    radii = np.asarray(radii, dtype=float)
    sup = np.asarray(shell_sup, dtype=float)
    if radii.size < 3 or radii.shape != sup.shape:
        raise ValueError("need at least 3 shells with matching suprema")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    floored = sup <= 0
    y = np.log(np.maximum(sup, FLOOR))
    x = np.log(radii)
    coef, *_ = np.linalg.lstsq(np.stack([np.ones_like(x), x], axis=1), y, rcond=None)
    resid = y - (coef[0] + coef[1] * x)
    samples = np.zeros(radii.size, dtype=np.int64) if samples is None else np.asarray(samples, dtype=np.int64)
    return DecayProfile(radii, sup, samples, float(-coef[1]), float(np.sqrt(np.mean(resid ** 2))), floored)


def decay_scan(ifs: HomogeneousIFS, rmin: float, rmax: float, samples: int, seed: int,
               workers: int = 1) -> DecayProfile:
    """Shell suprema for ``R = rmin * 2^k <= rmax`` and the fitted exponent."""
    if rmin < 1 or rmax < rmin:
        raise ValueError("need 1 <= rmin <= rmax")
    radii = []
    R = float(rmin)
    while R <= rmax * (1 + 1e-12):
        radii.append(R)
        R *= 2
    seeds = np.random.SeedSequence(seed).spawn(len(radii))
    job = lambda k: shell_supremum(ifs, radii[k], samples, int(seeds[k].generate_state(1)[0]))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            sups = list(pool.map(job, range(len(radii))))
    else:
        sups = [job(k) for k in range(len(radii))]
    counts = [shell_points(ifs, r, samples, 0).shape[0] for r in radii]
    return fit_alpha(radii, sups, counts)


def orbit_trace(ifs: HomogeneousIFS, direction, base: float, n_max: int, n_min: int = 0,
                tolerance: float = 1e-12):
    """``(n, |mu_hat(base^n * direction)|)`` for ``n = n_min..n_max``.

    ``base^n`` is formed exactly and passed to the transform as a
    double-double so the orbit stays on the intended points.
    """
    require_valid(ifs)
    if not base > 1:
        raise ValueError("base must exceed 1")
    direction = np.atleast_1d(np.asarray(direction, dtype=float))
    if direction.size != ifs.dim:
        raise ValueError("direction has the wrong dimension")
    ns = np.arange(n_min, n_max + 1)
    b = Fraction(float(base))
    hi = np.empty((ns.size, ifs.dim))
    lo = np.empty_like(hi)
    for i, n in enumerate(ns):
        p = b ** int(n)
        for k, c in enumerate(direction):
            exact = p * Fraction(float(c))
            hi[i, k] = float(exact)
            lo[i, k] = float(exact - Fraction(hi[i, k]))
    values, _, _ = _mu_hat_dd(ifs, hi, lo, tolerance, 10_000)
    return ns, np.abs(values)
