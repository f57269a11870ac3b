"""Double-double arithmetic shared by both kernel backends.

Every function works on floats and on numpy arrays alike.  Under numba the
same functions are compiled inline via ``register_jitable``; called from
Python they stay plain numpy code.
"""
import numpy as np

try:
    from numba.extending import register_jitable
except ImportError:  # pragma: no cover - numba is optional at runtime
    def register_jitable(func):
        return func

_SPLIT = 134217729.0  # 2**27 + 1


@register_jitable
def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@register_jitable
def fast_two_sum(a, b):
    s = a + b
    err = b - (s - a)
    return s, err


@register_jitable
def split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


@register_jitable
def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


@register_jitable
def dd_mul(ahi, alo, bhi, blo):
    p, e = two_prod(ahi, bhi)
    e = e + (ahi * blo + alo * bhi)
    return fast_two_sum(p, e)


@register_jitable
def dd_mul_d(ahi, alo, b):
    p, e = two_prod(ahi, b)
    e = e + alo * b
    return fast_two_sum(p, e)


@register_jitable
def dd_add(ahi, alo, bhi, blo):
    s, e = two_sum(ahi, bhi)
    e = e + (alo + blo)
    return fast_two_sum(s, e)


@register_jitable
def dd_recip(a):
    q = 1.0 / a
    p, e = two_prod(a, q)
    r = (1.0 - p) - e
    return fast_two_sum(q, r / a)


@register_jitable
def dd_frac(hi, lo):
    """Signed distance of ``hi + lo`` to the nearest integer, in [-1/2, 1/2]."""
    t = (hi - np.floor(hi + 0.5)) + lo
    return t - np.floor(t + 0.5)


def dd_pow(hi, lo, n):
    """``(hi + lo) ** n`` by repeated squaring, elementwise."""
    rhi, rlo = np.ones_like(np.asarray(hi, dtype=float)), np.zeros_like(np.asarray(hi, dtype=float))
    bhi, blo = np.asarray(hi, dtype=float), np.asarray(lo, dtype=float)
    while n > 0:
        if n & 1:
            rhi, rlo = dd_mul(rhi, rlo, bhi, blo)
        bhi, blo = dd_mul(bhi, blo, bhi, blo)
        n >>= 1
    return rhi, rlo
