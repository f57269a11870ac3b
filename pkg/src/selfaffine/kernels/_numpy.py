"""Pure-numpy kernels, vectorised over the batch axis."""
import numpy as np

from ._dd import dd_add, dd_frac, dd_mul, two_prod

TWO_PI = 2.0 * np.pi


def geometric_product(ratio_hi, ratio_lo, digits, probs, x_hi, x_lo, terms):
    """Products ``prod_{n<T_b} sum_j p_j exp(-2 pi i <x_b r^n, a_j>)``.

    ``x`` (B x d) and the per-coordinate ratio ``r`` are double-doubles;
    ``terms`` gives ``T_b`` per row.
    """
    x_hi = np.array(x_hi, dtype=float, copy=True)
    x_lo = np.array(x_lo, dtype=float, copy=True)
    terms = np.asarray(terms)
    nrows, d = x_hi.shape
    m = digits.shape[0]
    acc = np.ones(nrows, dtype=complex)
    tmax = int(terms.max()) if nrows else 0
    for n in range(tmax):
        s_hi = np.zeros((nrows, m))
        s_lo = np.zeros((nrows, m))
        for k in range(d):
            p, e = two_prod(x_hi[:, k, None], digits[None, :, k])
            e = e + x_lo[:, k, None] * digits[None, :, k]
            s_hi, s_lo = dd_add(s_hi, s_lo, p, e)
        frac = dd_frac(s_hi, s_lo)
        re = np.cos(TWO_PI * frac) @ probs
        im = -(np.sin(TWO_PI * frac) @ probs)
        active = n < terms
        acc = np.where(active, acc * (re + 1j * im), acc)
        x_hi, x_lo = dd_mul(x_hi, x_lo, ratio_hi[None, :], ratio_lo[None, :])
    return acc


def empirical_cf(points, xis, block):
    """Mean of ``exp(-2 pi i <xi, x>)`` over ``points``, one value per row of ``xis``."""
    npts, d = points.shape
    out = np.empty(xis.shape[0], dtype=complex)
    nblocks = (npts + block - 1) // block
    for b, xi in enumerate(xis):
        re = np.empty(nblocks)
        im = np.empty(nblocks)
        for i in range(nblocks):
            chunk = points[i * block:(i + 1) * block]
            phase = chunk[:, 0] * xi[0]
            for k in range(1, d):
                phase = phase + chunk[:, k] * xi[k]
            re[i] = np.cos(TWO_PI * phase).sum()
            im[i] = -np.sin(TWO_PI * phase).sum()
        out[b] = complex(re.sum() / npts, im.sum() / npts)
    return out


def series_points(idx, digits, powers):
    """Points ``sum_n powers[n] * digits[idx[:, n]]``, summed smallest term first."""
    npts, depth = idx.shape
    x = np.zeros((npts, digits.shape[1]))
    for n in range(depth - 1, -1, -1):
        x += powers[n][None, :] * digits[idx[:, n]]
    return x


def good_counts(theta, etas, nmax, rho):
    """For each row eta: ``#{n in 1..nmax : ||sum_k eta_k theta_k^n|| < rho}``."""
    counts = np.zeros(etas.shape[0], dtype=np.int64)
    pw = np.ones_like(theta)
    for _ in range(nmax):
        pw = pw * theta
        s = etas @ pw
        counts += np.abs(s - np.floor(s + 0.5)) < rho
    return counts


def max_good_count_1d(theta, nmax, rho, eta_lo, eta_hi):
    """Exact ``max_{eta in [eta_lo, eta_hi]} #{n <= nmax : ||eta theta^n|| < rho}``.

    Each condition holds on a union of open intervals in eta; the maximum
    overlap is found by sorting endpoints.
    """
    starts = []
    ends = []
    t = 1.0
    for _ in range(nmax):
        t *= theta
        k = np.arange(np.ceil(eta_lo * t - rho), np.floor(eta_hi * t + rho) + 1)
        lo = (k - rho) / t
        hi = (k + rho) / t
        keep = (hi > eta_lo) & (lo <= eta_hi)
        starts.append(np.maximum(lo[keep], eta_lo))
        ends.append(hi[keep])
    s = np.sort(np.concatenate(starts))
    e = np.sort(np.concatenate(ends))
    if s.size == 0:
        return 0
    # open intervals: one ending exactly where another starts does not overlap it
    active = np.arange(1, s.size + 1) - np.searchsorted(e, s, side="right")
    return int(active.max())
