"""Erdős–Kahane machinery for diagonal self-affine measures.

For fixed ``theta`` and ``eta`` write ``sum_k eta_k theta_k^n = K_n + eps_n``
with ``K_n`` the nearest integer.  Difference tables of ``K`` recover
``theta_d`` to within ``O(b1^-n)``, and a rational function of
``K_n..K_{n+d}`` predicts ``K_{n+d+1}``.  Counting the integer sequences
that keep ``|eps_n| < rho`` on most indices covers the bad parameter set
``E_{H,N,d}(delta, rho, theta')`` by few short intervals.

Traces and tables are computed in exact rational arithmetic from the
double-precision inputs, then rounded once.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .ifs import ParameterBox

MAX_EXACT = 2 ** 53
DENOM_FLOOR = 1e-6


class HorizonTooDeep(ValueError):
    pass


class PreAsymptoticIndex(ValueError):
    pass


class CoverBudgetExceeded(RuntimeError):
    def __init__(self, message, partial_count):
        super().__init__(message)
        self.partial_count = partial_count


@dataclass(frozen=True, eq=False)
class EKTrace:
    theta: np.ndarray
    eta: np.ndarray
    K: np.ndarray
    eps: np.ndarray
    sums: tuple = field(repr=False)

    @property
    def length(self) -> int:
        return self.K.size - 1

    @property
    def dim(self) -> int:
        return self.theta.size


@dataclass(frozen=True, eq=False)
class DifferenceTable:
    """Row ``j`` holds ``A_n^(j)`` for ``n = 0 .. len(row) - 1``."""

    rows: tuple
    theta_prefix: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.rows)

    def entry(self, j: int, n: int) -> float:
        return float(self.rows[j][n])


def _check_eta(eta):
    top = abs(eta[-1])
    if top < 1 or np.any(np.abs(eta) > top):
        raise ValueError("need 1 <= |eta_d| = ||eta||_inf")


def compute_trace(theta, eta, N: int) -> EKTrace:
    """Nearest-integer decomposition for ``n = 0..N`` (ties round to even ``K``)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if theta.shape != eta.shape:
        raise ValueError("theta and eta must have equal length")
    if N < 0:
        raise ValueError("N must be non-negative")
    _check_eta(eta)
    th = [Fraction(t) for t in theta]
    et = [Fraction(e) for e in eta]
    pw = [Fraction(1)] * theta.size
    sums, K, eps = [], [], []
    for n in range(N + 1):
        s = sum(e * p for e, p in zip(et, pw))
        if abs(s) >= MAX_EXACT:
            raise HorizonTooDeep(f"horizon too deep for double precision (n={n})")
        k = round(s)
        sums.append(s)
        K.append(k)
        eps.append(float(s - k))
        pw = [p * t for p, t in zip(pw, th)]
    return EKTrace(theta, eta, np.array(K, dtype=np.int64), np.array(eps), tuple(sums))


def _difference_rows(row0, thetas):
    rows = [list(row0)]
    for j, t in enumerate(thetas, start=1):
        prev = rows[-1]
        rows.append([prev[n + 1] - t * prev[n] for n in range(len(prev) - 1)])
    return rows


def build_tables(trace: EKTrace) -> tuple[DifferenceTable, DifferenceTable]:
    """Tables from ``K`` and from ``K + eps``, built by ``A^(j)_n = A^(j-1)_{n+1} - theta_j A^(j-1)_n``."""
    d = trace.dim
    if trace.K.size < d:
        raise ValueError("trace shorter than the dimension")
    prefix = [Fraction(t) for t in trace.theta[:-1]]
    exact = _difference_rows([Fraction(int(k)) for k in trace.K], prefix)
    tilde = _difference_rows(trace.sums, prefix)
    as_float = lambda rows: tuple(np.array([float(x) for x in r]) for r in rows)
    pre = trace.theta[:-1].copy()
    return DifferenceTable(as_float(exact), pre), DifferenceTable(as_float(tilde), pre)


def closed_form_tilde(theta, eta, j: int, n: int) -> tuple[float, float]:
    """``sum_{i>j} eta_i prod_{k<=j} (theta_i - theta_k) theta_i^n`` and its term-magnitude scale."""
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    terms = [eta[i] * np.prod(theta[i] - theta[:j]) * theta[i] ** n for i in range(j, theta.size)]
    return float(np.sum(terms)), float(np.sum(np.abs(terms)))


def reconstruct_theta_d(table: DifferenceTable, n: int) -> float:
    """``A^(d-1)_{n+1} / A^(d-1)_n``: an ``O(b1^-n)`` approximation of ``theta_d``."""
    top = table.rows[-1]
    if not 0 <= n < top.size - 1:
        raise IndexError(f"index {n} outside the table")
    den = top[n]
    if abs(den) < DENOM_FLOOR:
        raise PreAsymptoticIndex("pre-asymptotic index, increase n")
    return float(top[n + 1] / den)


def _predictor_exact(window, theta_prefix):
    d = len(window) - 1
    rows = _difference_rows([Fraction(int(k)) for k in window], [Fraction(float(t)) for t in theta_prefix])
    den = rows[d - 1][0]
    if abs(den) < DENOM_FLOOR:
        raise PreAsymptoticIndex("pre-asymptotic index, increase n")
    head = sum((Fraction(float(theta_prefix[j])) * rows[j][-1] for j in range(d - 1)), Fraction(0))
    return head + rows[d - 1][1] ** 2 / den


def rational_predictor(window, theta_prefix) -> float:
    """Predict ``K_{n+d+1}`` from ``window = (K_n, ..., K_{n+d})``.

    Returns ``theta_1 K_{n+d} + theta_2 A^(1)_{n+d-1} + ... + theta_{d-1} A^(d-2)_{n+2}
    + (A^(d-1)_{n+1})^2 / A^(d-1)_n`` with every ``A`` built from the window.
    """
    theta_prefix = np.atleast_1d(np.asarray(theta_prefix, dtype=float)) if len(window) > 2 else np.zeros(0)
    if len(window) - 2 != theta_prefix.size:
        raise ValueError("window must hold d+1 values for d-1 prefix parameters")
    return float(_predictor_exact(window, theta_prefix))


def predict_next(window, theta_prefix) -> int:
    """Nearest integer to :func:`rational_predictor` (computed exactly)."""
    theta_prefix = np.atleast_1d(np.asarray(theta_prefix, dtype=float)) if len(window) > 2 else np.zeros(0)
    return int(round(_predictor_exact(window, theta_prefix)))


@dataclass(frozen=True)
class ConsistencyReport:
    branching: int
    rho_star: float
    windows: int
    skipped: int
    exact_rate: float
    exact_rate_below_rho: float | None
    rho: float | None


def predictor_consistency_scan(theta, etas, N: int, rho: float | None = None, n0: int = 1) -> ConsistencyReport:
    """Compare ``round(R)`` with the true ``K_{n+d+1}`` over a grid of ``eta``.

    ``branching`` is the largest miss ``|K_{n+d+1} - round(R)|``; ``rho_star``
    is the smallest window max ``|eps|`` among mispredicted windows, so every
    window with max ``|eps| < rho_star`` was predicted exactly.  Windows whose
    denominator falls below the floor are pre-asymptotic and skipped.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    d = theta.size
    prefix = theta[:-1]
    branching = 0
    rho_star = 0.5
    windows = skipped = exact = 0
    below = below_exact = 0
    for eta in np.atleast_2d(np.asarray(etas, dtype=float)).reshape(-1, d):
        tr = compute_trace(theta, eta, N)
        K = [int(k) for k in tr.K]
        absf = np.abs(tr.eps)
        for n in range(n0, N - d):
            try:
                guess = predict_next(K[n:n + d + 1], prefix)
            except PreAsymptoticIndex:
                skipped += 1
                continue
            windows += 1
            miss = abs(K[n + d + 1] - guess)
            weps = float(absf[n:n + d + 2].max())
            branching = max(branching, miss)
            if miss == 0:
                exact += 1
            else:
                rho_star = min(rho_star, weps)
            if rho is not None and weps < rho:
                below += 1
                below_exact += miss == 0
    rate = exact / windows if windows else 1.0
    rate_rho = (below_exact / below if below else 1.0) if rho is not None else None
    return ConsistencyReport(branching, rho_star, windows, skipped, rate, rate_rho, rho)


def eta_grid(d: int, b2: float, size: int) -> np.ndarray:
    """Grid of ``eta`` with ``1 <= eta_d = ||eta||_inf <= b2`` (``eta_d > 0`` by symmetry)."""
    top = np.linspace(1.0, b2, size)
    if d == 1:
        return top[:, None]
    rel = np.linspace(-1.0, 1.0, size)
    cols = np.meshgrid(*([rel] * (d - 1) + [top]), indexing="ij")
    grid = np.stack([c.ravel() for c in cols], axis=1)
    grid[:, :-1] *= grid[:, -1:]
    return grid


# -- covering the bad set ------------------------------------------------------

@dataclass(frozen=True)
class BadSetQuery:
    box: ParameterBox
    theta_prefix: tuple = ()
    N: int = 12
    delta: float = 0.125
    rho: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "theta_prefix", tuple(float(t) for t in self.theta_prefix))
        if not 0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.N < 1:
            raise ValueError("N must be positive")
        if len(self.theta_prefix) + 1 != self.box.d:
            raise ValueError(f"need {self.box.d - 1} prefix parameters for dimension {self.box.d}")

    @property
    def d(self) -> int:
        return self.box.d

    @property
    def max_exceptions(self) -> int:
        return math.floor(self.delta * self.N + 1e-12)


@dataclass(frozen=True)
class CoverReport:
    intervals: np.ndarray  # rows (center, radius)
    sequence_count: int
    constant: float  # log(count) / (delta log(1/delta) N)
    bound: float  # exp(constant * delta log(1/delta) N)
    radius_constant: float  # max radius * b1^N
    branching: int  # max |K_{n+d+1} - round(R)| over enumerated sequences
    nodes: int
    query: BadSetQuery = field(repr=False)

    def covers(self, theta_d) -> np.ndarray:
        t = np.atleast_1d(np.asarray(theta_d, dtype=float))
        if self.intervals.size == 0:
            return np.zeros(t.size, dtype=bool)
        c = self.intervals[:, 0]
        r = self.intervals[:, 1]
        return np.any(np.abs(t[:, None] - c[None, :]) <= r[None, :], axis=1)

    def to_dict(self) -> dict:
        q = self.query
        return {
            "query": {"b1": q.box.b1, "b2": q.box.b2, "c1": q.box.c1, "d": q.d,
                      "theta_prefix": list(q.theta_prefix), "N": q.N,
                      "delta": q.delta, "rho": q.rho},
            "sequence_count": self.sequence_count,
            "constant": self.constant,
            "bound": self.bound,
            "radius_constant": self.radius_constant,
            "branching": self.branching,
            "nodes": self.nodes,
            "intervals": [[float(c), float(r)] for c, r in self.intervals],
        }


_REL = 1e-12


def _widen(lo, hi):
    pad = _REL * max(abs(lo), abs(hi)) + 1e-300
    return lo - pad, hi + pad


def _imul(a, b):
    p = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return _widen(min(p), max(p))


def _iadd(a, b):
    return _widen(a[0] + b[0], a[1] + b[1])


def _iscale(c, a):
    return _widen(*sorted((c * a[0], c * a[1])))


def _ipow(a, n):
    # Theta components are positive
    return _widen(a[0] ** n, a[1] ** n)


def _idiv(a, b):
    if b[0] <= 0 <= b[1]:
        return None
    return _imul(a, (1.0 / b[1], 1.0 / b[0]))


def _intersect(a, b):
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo <= hi else None


def theta_components(q: BadSetQuery):
    """Positive ``theta_d`` ranges allowed by the box for the given prefix."""
    b1, b2, c1 = q.box.b1, q.box.b2, q.box.c1
    for t in q.theta_prefix:
        if not b1 <= abs(t) <= b2:
            raise ValueError(f"prefix parameter {t} lies outside the box")
    for a, b in itertools.combinations(q.theta_prefix, 2):
        if abs(a - b) < c1:
            raise ValueError("prefix parameters violate the separation c1")
    comps = [(b1, b2)]
    for t in q.theta_prefix:
        nxt = []
        for lo, hi in comps:
            if t - c1 > lo:
                nxt.append((lo, min(hi, t - c1)))
            if t + c1 < hi:
                nxt.append((max(lo, t + c1), hi))
        comps = [c for c in nxt if c[0] <= c[1]]
    return comps


class _CoverSearch:
    """Depth-first enumeration of the admissible sequences ``K_1..K_N``.

    Every index is either good (``|eps_i| < rho``) or exceptional
    (``|eps_i| <= 1/2``), with at most ``floor(delta N)`` exceptional ones.
    Interval arithmetic propagates the admissible range of
    ``sum_k eta_k theta_k^i`` through the difference-table recursion, so a
    good window leaves at most one integer candidate when ``rho`` is small,
    and an exceptional index opens a bounded number of branches.
    """

    def __init__(self, q: BadSetQuery, budget: int):
        self.q = q
        self.d = q.d
        self.N = q.N
        self.prefix = list(q.theta_prefix)
        self.absprefix = [abs(t) for t in self.prefix]
        self.emax = q.max_exceptions
        self.budget = budget
        self.nodes = 0
        self.found = {}
        N, d = self.N, self.d
        self.K = [0] * (N + 1)
        self.A = [[0.0] * (N + 2) for _ in range(d)]
        self.E = [[0.0] * (N + 2) for _ in range(d)]
        self.T = [None] * (N + 2)

    def run(self):
        for comp in theta_components(self.q):
            self._step(1, comp, 0)
        return self.found

    def _prior_top(self, m, theta_iv):
        # eta_d prod_{k<d} (theta_d - theta_k) theta_d^m with eta_d in [1, b2]
        iv = _iscale(1.0, (1.0, self.q.box.b2))
        for t in self.prefix:
            iv = _imul(iv, _widen(theta_iv[0] - t, theta_iv[1] - t))
        return _imul(iv, _ipow(theta_iv, m))

    def _predict(self, i, theta_iv):
        d = self.d
        if i <= d:
            spread = sum(t ** i for t in self.absprefix)
            base = _ipow(theta_iv, i)
            return _imul((1.0, self.q.box.b2), _widen(base[0] - spread, base[1] + spread))
        lo = hi = 0.0
        iv = (0.0, 0.0)
        for j in range(d - 1):
            m = i - 1 - j
            t = self.prefix[j]
            iv = _iadd(iv, _iscale(t, (self.A[j][m] - self.E[j][m], self.A[j][m] + self.E[j][m])))
        return _iadd(iv, _imul(theta_iv, self.T[i - d]))

    def _step(self, i, theta_iv, used):
        if i > self.N:
            self._record(theta_iv)
            return
        self.nodes += 1
        if self.nodes > self.budget:
            raise CoverBudgetExceeded("combinatorial budget exceeded", len(self.found))
        lo, hi = self._predict(i, theta_iv)
        labels = [self.q.rho]
        if used < self.emax:
            labels.append(0.5)
        for r in labels:
            kmin = math.floor(lo - r) - 1
            kmax = math.ceil(hi + r) + 1
            for k in range(kmin, kmax + 1):
                if not (lo - r - 1e-9 <= k <= hi + r + 1e-9):
                    continue
                nxt = self._place(i, k, r, theta_iv)
                if nxt is not None:
                    self._step(i + 1, nxt, used + (r == 0.5))

    def _place(self, i, k, r, theta_iv):
        d = self.d
        A, E = self.A, self.E
        self.K[i] = k
        A[0][i] = float(k)
        E[0][i] = r
        for j in range(1, d):
            m = i - j
            if m < 1:
                break
            A[j][m] = A[j - 1][m + 1] - self.prefix[j - 1] * A[j - 1][m]
            E[j][m] = E[j - 1][m + 1] + self.absprefix[j - 1] * E[j - 1][m]
        m = i - d + 1
        if m < 1:
            return theta_iv
        top = _widen(A[d - 1][m] - E[d - 1][m], A[d - 1][m] + E[d - 1][m])
        top = _intersect(top, self._prior_top(m, theta_iv))
        if top is None:
            return None
        if m >= 2:
            ratio = _idiv(top, self.T[m - 1])
            if ratio is not None:
                theta_iv = _intersect(theta_iv, ratio)
                if theta_iv is None:
                    return None
        self.T[m] = top
        return theta_iv

    def _record(self, theta_iv):
        d, n = self.d, self.N - self.d
        top, err = self.A[d - 1], self.E[d - 1]
        den = top[n]
        seq = tuple(self.K[1:])
        tmax = max(abs(theta_iv[0]), abs(theta_iv[1]))
        if abs(den) >= DENOM_FLOOR:
            center = top[n + 1] / den
            radius = (err[n + 1] + tmax * err[n]) / abs(den)
        else:
            center = 0.5 * (theta_iv[0] + theta_iv[1])
            radius = 0.5 * (theta_iv[1] - theta_iv[0])
        prev = self.found.get(seq)
        if prev is None or radius > prev[1]:
            self.found[seq] = (center, radius)


def _batch_branching(seqs, theta_prefix) -> int:
    """Largest ``|K_{n+d+1} - round(R)|`` over all windows of all sequences (floating point)."""
    d = len(theta_prefix) + 1
    if seqs.shape[0] == 0 or seqs.shape[1] < d + 2:
        return 0
    rows = [seqs]
    for t in theta_prefix:
        rows.append(rows[-1][:, 1:] - t * rows[-1][:, :-1])
    top = rows[d - 1]
    n_win = seqs.shape[1] - d - 1
    den = top[:, :n_win]
    pred = top[:, 1:n_win + 1] ** 2 / np.where(np.abs(den) < DENOM_FLOOR, np.nan, den)
    for j, t in enumerate(theta_prefix):
        pred = pred + t * rows[j][:, d - j:d - j + n_win]
    miss = np.abs(seqs[:, d + 1:] - np.round(pred))
    miss = miss[np.isfinite(miss)]
    return int(miss.max()) if miss.size else 0


def enumerate_cover(q: BadSetQuery, budget: int = 5_000_000) -> CoverReport:
    """Cover ``E_{H,N,d}(delta, rho, theta')`` by one interval per admissible sequence."""
    if q.d > 2:
        raise ValueError("enumerate_cover supports d <= 2")
    if q.N > 30:
        raise ValueError("enumerate_cover supports N <= 30")
    search = _CoverSearch(q, budget)
    found = search.run()
    seqs = sorted(found)
    intervals = np.array([found[s] for s in seqs], dtype=float).reshape(-1, 2)
    count = len(seqs)
    scale = q.delta * math.log(1.0 / q.delta) * q.N
    constant = math.log(count) / scale if count else 0.0
    branching = _batch_branching(np.array(seqs, dtype=float).reshape(count, q.N), q.theta_prefix)
    radius_constant = float(intervals[:, 1].max() * q.box.b1 ** q.N) if count else 0.0
    return CoverReport(intervals, count, constant, math.exp(constant * scale), radius_constant,
                       branching, search.nodes, q)


def sweep_bad_parameters(q: BadSetQuery, step: float | None = None, eta_points: int = 200) -> np.ndarray:
    """Dense sweep of ``theta_d`` over the allowed range; returns the bad values found.

    For ``d = 1`` the maximum over ``eta in [1, b2]`` is exact (interval
    overlap count); for ``d = 2`` it is taken over an ``eta`` grid.
    """
    if step is None:
        step = q.box.b1 ** (-q.N) / 10
    limit = (1 - q.delta) * q.N
    bad = []
    for lo, hi in theta_components(q):
        grid = np.linspace(lo, hi, int(math.ceil((hi - lo) / step)) + 1)
        if q.d == 1:
            counts = np.array([kernels.max_good_count_1d(float(t), q.N, q.rho, 1.0, q.box.b2) for t in grid])
        else:
            etas = np.ascontiguousarray(eta_grid(q.d, q.box.b2, eta_points))
            counts = np.empty(grid.size, dtype=np.int64)
            for idx, t in enumerate(grid):
                theta = np.array(list(q.theta_prefix) + [t])
                counts[idx] = kernels.good_counts(theta, etas, q.N, q.rho).max()
        bad.append(grid[counts > limit])
    return np.concatenate(bad) if bad else np.zeros(0)
