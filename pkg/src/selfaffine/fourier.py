"""Fourier transform of homogeneous self-affine measures.

``mu_hat`` evaluates the convergent infinite product

    mu_hat(xi) = prod_{n >= 0} sum_j p_j exp(-2 pi i <A^n xi, a_j>)

truncated where a rigorous tail bound drops below the requested tolerance.
Phases are carried in double-double precision, so frequencies up to about
1e12 keep a phase error near 1e-16.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .ifs import HomogeneousIFS, normalize, power_factor_system, require_valid
from .kernels._dd import dd_add, dd_frac, dd_mul_d, dd_recip, fast_two_sum, two_prod

DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 10_000


@dataclass(frozen=True)
class TransformQuery:
    xi: np.ndarray
    tolerance: float = DEFAULT_TOL
    max_terms: int = DEFAULT_MAX_TERMS

    def __post_init__(self):
        object.__setattr__(self, "xi", np.atleast_1d(np.asarray(self.xi, dtype=float)))
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


@dataclass(frozen=True)
class TransformResult:
    """Truncated product value with ``terms`` factors.

    ``bound`` limits both the absolute and the relative truncation error.
    """

    value: complex
    terms: int
    bound: float
    converged: bool

    @property
    def modulus(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class RenormalizedFrequency:
    n_steps: int
    eta: np.ndarray
    # low-order double-double parts of eta
    eta_lo: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.eta_lo is None:
            object.__setattr__(self, "eta_lo", np.zeros_like(self.eta))


def dist_to_int(x):
    """``||x||``: distance to the nearest integer."""
    x = np.asarray(x, dtype=float)
    return np.abs(x - np.floor(x + 0.5))


def one_step_factor(ifs: HomogeneousIFS, xi) -> complex:
    """``sum_j p_j exp(-2 pi i <xi, a_j>)``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    phase = ifs.digits @ xi
    return complex(np.sum(ifs.probs * np.exp(-2j * np.pi * phase)))


def _tail_constants(ifs):
    absth = np.abs(ifs.theta)
    dmax = np.max(np.abs(ifs.digits), axis=0)
    return absth, 2.0 * np.pi * dmax / (1.0 - 1.0 / absth)


def truncation_terms(ifs, xis, tolerance, max_terms):
    """Number of factors per row and the resulting tail bound.

    An omitted factor at ``x`` differs from 1 by at most
    ``2 pi max_j |<x, a_j>|``; summing the geometric tail gives ``S`` and
    the truncated product is within ``expm1(S)`` of the full one.
    """
    xis = np.atleast_2d(xis)
    absth, gain = _tail_constants(ifs)
    coef = np.abs(xis) * gain[None, :]
    target = math.log1p(tolerance) / ifs.dim
    with np.errstate(divide="ignore"):
        need = np.where(coef > 0, np.ceil(np.log(coef / target) / np.log(absth)[None, :]), 0)
    terms = np.clip(np.max(need, axis=1), 0, max_terms).astype(np.int64)
    tail = np.sum(coef * absth[None, :] ** (-terms[:, None].astype(float)), axis=1)
    with np.errstate(over="ignore"):
        return terms, np.expm1(tail)


def _mu_hat_dd(ifs, xi_hi, xi_lo, tolerance, max_terms):
    xi_hi = np.ascontiguousarray(np.atleast_2d(xi_hi), dtype=float)
    xi_lo = np.ascontiguousarray(np.atleast_2d(xi_lo), dtype=float)
    terms, bound = truncation_terms(ifs, xi_hi, tolerance, max_terms)
    r_hi, r_lo = dd_recip(ifs.theta)
    values = kernels.geometric_product(
        np.ascontiguousarray(r_hi), np.ascontiguousarray(r_lo),
        np.ascontiguousarray(ifs.digits), np.ascontiguousarray(ifs.probs),
        xi_hi, xi_lo, terms,
    )
    return values, terms, bound


def mu_hat_batch(ifs, xis, tolerance=DEFAULT_TOL, max_terms=DEFAULT_MAX_TERMS):
    """Vectorised :func:`mu_hat`: returns ``(values, terms, bounds)`` arrays."""
    require_valid(ifs)
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if ifs.dim == 1 and xis.shape[1] != 1:
        xis = xis.reshape(-1, 1)
    if xis.shape[1] != ifs.dim:
        raise ValueError(f"frequencies must have {ifs.dim} coordinates")
    return _mu_hat_dd(ifs, xis, np.zeros_like(xis), tolerance, max_terms)


def mu_hat(ifs: HomogeneousIFS, q) -> TransformResult:
    """Evaluate the Fourier transform at ``q.xi`` (``q`` may also be a bare vector)."""
    if not isinstance(q, TransformQuery):
        q = TransformQuery(q)
    values, terms, bound = mu_hat_batch(ifs, q.xi[None, :], q.tolerance, q.max_terms)
    b = float(bound[0])
    return TransformResult(complex(values[0]), int(terms[0]), b, b <= q.tolerance)


def _dd_div_d(hi, lo, b):
    q1 = hi / b
    p, e = two_prod(q1, b)
    q2 = ((hi - p) - e + lo) / b
    return fast_two_sum(q1, q2)


def _dd_sup_norm_at_least_one(hi, lo):
    a = np.abs(hi)
    signed_lo = np.sign(hi) * lo
    return bool(np.any((a > 1) | ((a == 1) & (signed_lo >= 0))))


def renormalize(ifs_or_theta, xi) -> RenormalizedFrequency:
    """Largest ``N`` with ``||(A^t)^N xi||_inf >= 1`` and ``eta = (A^t)^N xi``."""
    theta = ifs_or_theta.theta if isinstance(ifs_or_theta, HomogeneousIFS) else np.atleast_1d(
        np.asarray(ifs_or_theta, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != theta.shape:
        raise ValueError(f"xi must have {theta.size} coordinates")
    if not np.max(np.abs(xi)) >= 1:
        raise ValueError("renormalization needs ||xi||_inf >= 1")
    hi, lo = xi.copy(), np.zeros_like(xi)
    n = 0
    while True:
        nhi, nlo = _dd_div_d(hi, lo, theta)
        if not _dd_sup_norm_at_least_one(nhi, nlo):
            break
        hi, lo = nhi, nlo
        n += 1
    return RenormalizedFrequency(n, hi, lo)


def factor_bound(probs, alphas, k: int) -> float:
    """``1 - 2 pi min(p) ||alpha_k||^2``; ``k`` is 1-based with ``2 <= k <= m``."""
    probs = np.asarray(probs, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if probs.shape != alphas.shape:
        raise ValueError("probs and alphas must have equal length")
    if not 2 <= k <= probs.size:
        raise ValueError(f"k must lie in [2, {probs.size}]")
    eps = float(probs.min())
    return 1.0 - 2.0 * np.pi * eps * float(dist_to_int(alphas[k - 1])) ** 2


def _geometric_fracs(theta, eta_hi, eta_lo, nmax):
    """``sum_k eta_k theta_k^n`` reduced mod 1, for ``n = 1..nmax``, in double-double."""
    theta = np.asarray(theta, dtype=float)
    hi = np.asarray(eta_hi, dtype=float).copy()
    lo = np.asarray(eta_lo, dtype=float).copy()
    fracs = np.empty(nmax)
    for n in range(nmax):
        hi, lo = dd_mul_d(hi, lo, theta)
        s_hi, s_lo = 0.0, 0.0
        for k in range(theta.size):
            s_hi, s_lo = dd_add(s_hi, s_lo, hi[k], lo[k])
        fracs[n] = dd_frac(s_hi, s_lo)
    return fracs


def decay_upper_bound(theta, eta, probs_epsilon: float, N: int, eta_lo=None) -> float:
    """``prod_{n=1}^N max(0, 1 - 2 pi eps ||sum_k eta_k theta_k^n||^2)``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if np.any(np.abs(theta) <= 1):
        raise ValueError("all |theta_k| must exceed 1")
    if not 0 < probs_epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if N <= 0:
        return 1.0
    lo = np.zeros_like(eta) if eta_lo is None else np.atleast_1d(np.asarray(eta_lo, dtype=float))
    fracs = _geometric_fracs(theta, eta, lo, N)
    factors = np.maximum(0.0, 1.0 - 2.0 * np.pi * probs_epsilon * fracs ** 2)
    return float(np.prod(factors))


def digit_decay_bound(ifs: HomogeneousIFS, xi, j: int | None = None) -> float:
    """Upper bound for ``|mu_hat(xi)|`` from a single nonzero digit.

    After translating ``a_1`` to the origin, digit ``j`` (1-based, ``j >= 2``)
    contributes ``prod_n (1 - 2 pi eps ||sum_k eta_k a_j^(k) theta_k^n||^2)``.
    With ``j=None`` the smallest bound over all digits is returned.
    """
    ifs = normalize(require_valid(ifs))
    ren = renormalize(ifs, xi)
    eps = ifs.min_prob
    choices = range(2, ifs.num_digits + 1) if j is None else [j]
    best = 1.0
    for jj in choices:
        a = ifs.digits[jj - 1]
        c_hi, c_lo = two_prod(ren.eta, a)
        c_lo = c_lo + ren.eta_lo * a
        c_hi, c_lo = fast_two_sum(c_hi, c_lo)
        best = min(best, decay_upper_bound(ifs.theta, c_hi, eps, ren.n_steps, eta_lo=c_lo))
    return best


def reduce_two_digit(ifs: HomogeneousIFS):
    """Map a two-digit system onto digits ``{0, (1,...,1)}``.

    Returns ``(reduced, scale)`` with
    ``|mu_hat_ifs(xi)| = |mu_hat_reduced(scale * xi)|``; every coordinate of
    the nonzero digit must be nonzero.
    """
    if ifs.num_digits != 2:
        raise ValueError("reduction needs exactly two digits")
    scale = ifs.digits[1] - ifs.digits[0]
    if np.any(scale == 0):
        raise ValueError("digit difference has a zero coordinate; restrict to a subspace first")
    digits = np.vstack([np.zeros(ifs.dim), np.ones(ifs.dim)])
    return HomogeneousIFS(ifs.theta, digits, ifs.probs), scale


@dataclass(frozen=True)
class IdentityCheck:
    ok: bool
    residual: float
    lhs: complex
    rhs: complex


def verify_factorization(ifs: HomogeneousIFS, n: int, xi, tol: float = 1e-8) -> IdentityCheck:
    """Compare ``mu_hat(xi)`` with the product over the ``n`` power-factor systems.

    Each side is evaluated to ``tol / 1000`` so truncation cannot decide the outcome.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    inner = min(DEFAULT_TOL, tol * 1e-3)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    lhs = mu_hat(ifs, TransformQuery(xi, inner))
    rhs = 1.0 + 0j
    for j in range(n):
        rhs *= mu_hat(power_factor_system(ifs, n, j), TransformQuery(xi, inner)).value
    residual = abs(lhs.value - rhs)
    return IdentityCheck(residual <= tol, residual, lhs.value, rhs)


def verify_renormalization(ifs: HomogeneousIFS, xi, tol: float = 1e-8) -> IdentityCheck:
    """Check ``mu_hat(xi) = mu_hat(eta) prod_{n=1}^N sum_j p_j e(-<eta, A^-n a_j>)``.

    The residual is relative to ``|mu_hat(xi)|``.
    """
    require_valid(ifs)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    ren = renormalize(ifs, xi)
    inner = min(DEFAULT_TOL, tol * 1e-3)
    lhs = _mu_hat_dd(ifs, xi[None, :], np.zeros((1, ifs.dim)), inner, DEFAULT_MAX_TERMS)[0][0]
    head = _mu_hat_dd(ifs, ren.eta[None, :], ren.eta_lo[None, :], inner, DEFAULT_MAX_TERMS)[0][0]
    # factors at eta * theta^n for n = 1..N
    s_hi, s_lo = dd_mul_d(ren.eta, ren.eta_lo, ifs.theta)
    prod = kernels.geometric_product(
        np.ascontiguousarray(ifs.theta), np.zeros(ifs.dim),
        np.ascontiguousarray(ifs.digits), np.ascontiguousarray(ifs.probs),
        np.ascontiguousarray(s_hi[None, :]), np.ascontiguousarray(s_lo[None, :]),
        np.array([ren.n_steps], dtype=np.int64),
    )[0]
    rhs = head * prod
    scale = abs(lhs)
    residual = abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)
    return IdentityCheck(residual <= tol, residual, complex(lhs), complex(rhs))
