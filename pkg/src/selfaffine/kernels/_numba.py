"""numba-compiled kernels; same contracts as :mod:`._numpy`.

Rows of a batch are distributed with ``prange``; every output element is
computed by one thread in a fixed order, so results do not depend on the
thread count.
"""
import math

import numpy as np
from numba import njit, prange

from ._dd import dd_add, dd_frac, dd_mul, two_prod

TWO_PI = 2.0 * np.pi


@njit(cache=True, parallel=True)
def geometric_product(ratio_hi, ratio_lo, digits, probs, x_hi, x_lo, terms):
    nrows, d = x_hi.shape
    m = digits.shape[0]
    out = np.empty(nrows, dtype=np.complex128)
    for b in prange(nrows):
        xh = x_hi[b].copy()
        xl = x_lo[b].copy()
        acc_re = 1.0
        acc_im = 0.0
        for n in range(terms[b]):
            f_re = 0.0
            f_im = 0.0
            for j in range(m):
                s_hi = 0.0
                s_lo = 0.0
                for k in range(d):
                    p, e = two_prod(xh[k], digits[j, k])
                    e = e + xl[k] * digits[j, k]
                    s_hi, s_lo = dd_add(s_hi, s_lo, p, e)
                frac = dd_frac(s_hi, s_lo)
                f_re += probs[j] * math.cos(TWO_PI * frac)
                f_im -= probs[j] * math.sin(TWO_PI * frac)
            acc_re, acc_im = acc_re * f_re - acc_im * f_im, acc_re * f_im + acc_im * f_re
            for k in range(d):
                xh[k], xl[k] = dd_mul(xh[k], xl[k], ratio_hi[k], ratio_lo[k])
        out[b] = complex(acc_re, acc_im)
    return out


@njit(cache=True, parallel=True)
def _block_sums(points, xi, block):
    npts, d = points.shape
    nblocks = (npts + block - 1) // block
    re = np.empty(nblocks)
    im = np.empty(nblocks)
    for i in prange(nblocks):
        sr = 0.0
        si = 0.0
        for r in range(i * block, min(npts, (i + 1) * block)):
            phase = points[r, 0] * xi[0]
            for k in range(1, d):
                phase += points[r, k] * xi[k]
            sr += math.cos(TWO_PI * phase)
            si -= math.sin(TWO_PI * phase)
        re[i] = sr
        im[i] = si
    return re, im


def empirical_cf(points, xis, block):
    npts = points.shape[0]
    out = np.empty(xis.shape[0], dtype=complex)
    for b in range(xis.shape[0]):
        re, im = _block_sums(points, np.ascontiguousarray(xis[b]), block)
        out[b] = complex(re.sum() / npts, im.sum() / npts)
    return out


@njit(cache=True, parallel=True)
def series_points(idx, digits, powers):
    npts, depth = idx.shape
    d = digits.shape[1]
    x = np.zeros((npts, d))
    for r in prange(npts):
        for n in range(depth - 1, -1, -1):
            j = idx[r, n]
            for k in range(d):
                x[r, k] += powers[n, k] * digits[j, k]
    return x


@njit(cache=True, parallel=True)
def good_counts(theta, etas, nmax, rho):
    g, d = etas.shape
    counts = np.zeros(g, dtype=np.int64)
    for b in prange(g):
        pw = np.ones(d)
        c = 0
        for _ in range(nmax):
            s = 0.0
            for k in range(d):
                pw[k] *= theta[k]
                s += etas[b, k] * pw[k]
            if abs(s - math.floor(s + 0.5)) < rho:
                c += 1
        counts[b] = c
    return counts


@njit(cache=True)
def max_good_count_1d(theta, nmax, rho, eta_lo, eta_hi):
    total = 0
    t = 1.0
    for _ in range(nmax):
        t *= theta
        total += int(math.floor(eta_hi * t + rho) - math.ceil(eta_lo * t - rho)) + 1
    starts = np.empty(total)
    ends = np.empty(total)
    cnt = 0
    t = 1.0
    for _ in range(nmax):
        t *= theta
        k = math.ceil(eta_lo * t - rho)
        kmax = math.floor(eta_hi * t + rho)
        while k <= kmax:
            lo = (k - rho) / t
            hi = (k + rho) / t
            if hi > eta_lo and lo <= eta_hi:
                starts[cnt] = max(lo, eta_lo)
                ends[cnt] = hi
                cnt += 1
            k += 1
    if cnt == 0:
        return 0
    s = np.sort(starts[:cnt])
    e = np.sort(ends[:cnt])
    best = 0
    closed = 0
    for i in range(cnt):
        while closed < cnt and e[closed] <= s[i]:
            closed += 1
        if i + 1 - closed > best:
            best = i + 1 - closed
    return best
