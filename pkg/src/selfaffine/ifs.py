"""Homogeneous self-affine IFS descriptors with diagonal linear part.

The linear part is ``A = diag(1/theta_1, ..., 1/theta_d)``; each map is
``x -> A x + a_j`` for a digit ``a_j``.  Descriptors are immutable: every
operation returns a new instance.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PROB_TOL = 1e-12
RANK_RTOL = 1e-10


def _as_digits(digits, d):
    arr = np.asarray(digits, dtype=float)
    if arr.ndim == 1:
        if d != 1:
            raise ValueError(f"digits given as scalars but theta has dimension {d}")
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"digits must have shape (m, {d}), got {arr.shape}")
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HomogeneousIFS:
    """Expansion factors ``theta``, digit set ``digits`` (m x d), weights ``probs``.

    Construction only checks shapes; use :func:`validate` for the
    mathematical invariants.
    """

    theta: np.ndarray
    digits: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if theta.ndim != 1 or theta.size == 0:
            raise ValueError("theta must be a non-empty vector")
        digits = _as_digits(self.digits, theta.size)
        probs = np.atleast_1d(np.asarray(self.probs, dtype=float))
        if probs.shape != (digits.shape[0],):
            raise ValueError(
                f"probs has {probs.size} entries but there are {digits.shape[0]} digits"
            )
        object.__setattr__(self, "theta", _frozen(theta))
        object.__setattr__(self, "digits", _frozen(digits))
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def dim(self) -> int:
        return self.theta.size

    @property
    def num_digits(self) -> int:
        return self.digits.shape[0]

    @property
    def contraction(self) -> np.ndarray:
        """Diagonal of ``A``."""
        return 1.0 / self.theta

    @property
    def min_prob(self) -> float:
        return float(self.probs.min())

    def __eq__(self, other):
        if not isinstance(other, HomogeneousIFS):
            return NotImplemented
        return (
            np.array_equal(self.theta, other.theta)
            and np.array_equal(self.digits, other.digits)
            and np.array_equal(self.probs, other.probs)
        )

    def __hash__(self):
        return hash((self.theta.tobytes(), self.digits.tobytes(), self.probs.tobytes()))

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "digits": self.digits.tolist(),
            "probs": self.probs.tolist(),
        }


@dataclass(frozen=True)
class ParameterBox:
    """Compact parameter set: ``b1 <= |theta_j| <= b2`` and pairwise gaps ``>= c1``."""

    b1: float
    b2: float
    c1: float
    d: int = 1

    def __post_init__(self):
        if not self.b1 > 1:
            raise ValueError(f"b1 must exceed 1, got {self.b1}")
        if not self.b2 >= self.b1:
            raise ValueError(f"b2 must be >= b1, got b1={self.b1}, b2={self.b2}")
        if not self.c1 > 0:
            raise ValueError(f"c1 must be positive, got {self.c1}")
        if self.d < 1:
            raise ValueError("dimension must be positive")

    def contains(self, theta) -> bool:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.size != self.d:
            return False
        mod = np.abs(theta)
        if np.any(mod < self.b1) or np.any(mod > self.b2):
            return False
        gaps = np.abs(theta[:, None] - theta[None, :])
        off = ~np.eye(self.d, dtype=bool)
        return bool(np.all(gaps[off] >= self.c1))

    __contains__ = contains


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...] = ()
    warnings: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok


def validate(ifs: HomogeneousIFS) -> ValidationReport:
    """Check every invariant of ``ifs`` and collect the violations."""
    problems = []
    warnings = []
    for j, t in enumerate(ifs.theta, start=1):
        if not np.isfinite(t) or abs(t) <= 1:
            problems.append(f"|theta_{j}| <= 1 (theta_{j}={t!r})")
    m = ifs.num_digits
    if m < 2:
        problems.append("need at least 2 digits")
    if not np.all(np.isfinite(ifs.digits)):
        problems.append("digits must be finite")
    for i in range(m):
        for j in range(i + 1, m):
            if np.array_equal(ifs.digits[i], ifs.digits[j]):
                problems.append(f"digits {i + 1} and {j + 1} coincide")
    if np.any(ifs.probs <= 0):
        problems.append("probs must be strictly positive")
    total = float(np.sum(ifs.probs))
    if abs(total - 1.0) > PROB_TOL:
        problems.append(f"probs sum != 1 (sum={total!r})")
    if m == 2:
        # the two-digit reduction rescales each coordinate by the nonzero digit
        diff = ifs.digits[1] - ifs.digits[0]
        for k in np.flatnonzero(diff == 0):
            warnings.append(
                f"digit difference has zero coordinate {k + 1}; "
                "two-digit reduction must work in the coordinate subspace"
            )
    return ValidationReport(tuple(problems), tuple(warnings))


def require_valid(ifs: HomogeneousIFS) -> HomogeneousIFS:
    report = validate(ifs)
    if not report.ok:
        raise ValueError("invalid IFS: " + "; ".join(report.problems))
    return ifs


def renormalize_probs(ifs: HomogeneousIFS) -> HomogeneousIFS:
    """Rescale ``probs`` to sum to one exactly (up to rounding)."""
    total = float(np.sum(ifs.probs))
    if total <= 0:
        raise ValueError("probs must have positive sum")
    return HomogeneousIFS(ifs.theta, ifs.digits, ifs.probs / total)


def normalize(ifs: HomogeneousIFS) -> HomogeneousIFS:
    """Translate the digit set so that the first digit is the origin.

    The measure moves by a translation, so ``|mu_hat|`` is unchanged.
    """
    return HomogeneousIFS(ifs.theta, ifs.digits - ifs.digits[0], ifs.probs)


def is_affinely_irreducible(ifs: HomogeneousIFS, rtol: float = RANK_RTOL) -> bool:
    """True iff the digits form a cyclic family for ``A``.

    Translates to the first digit internally, so any digit set is accepted.
    """
    d = ifs.dim
    digits = ifs.digits - ifs.digits[0]
    a = ifs.contraction
    cols = [digits * (a ** n)[None, :] for n in range(d)]
    mat = np.vstack(cols)
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return False
    return int(np.sum(sv > rtol * sv[0])) == d


def power_factor_system(ifs: HomogeneousIFS, n: int, j: int) -> HomogeneousIFS:
    """The IFS with linear part ``A^n`` and digit set ``A^j D``.

    Convolving these for ``j = 0..n-1`` recovers the original measure.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 <= j < n:
        raise ValueError(f"j must lie in [0, {n})")
    return HomogeneousIFS(ifs.theta ** n, ifs.digits * (ifs.contraction ** j)[None, :], ifs.probs)


def load_ifs(path) -> HomogeneousIFS:
    """Read the JSON format ``{"theta": [...], "digits": [[...], ...], "probs": [...]}``."""
    data = json.loads(Path(path).read_text())
    return ifs_from_dict(data)


def ifs_from_dict(data: dict) -> HomogeneousIFS:
    missing = {"theta", "digits", "probs"} - set(data)
    if missing:
        raise ValueError(f"IFS file lacks keys: {sorted(missing)}")
    return HomogeneousIFS(data["theta"], data["digits"], data["probs"])


def dump_ifs(ifs: HomogeneousIFS, path) -> None:
    Path(path).write_text(json.dumps(ifs.to_dict(), indent=2) + "\n")


def bernoulli(theta, probs=(0.5, 0.5)) -> HomogeneousIFS:
    """Two-digit system with digits ``0`` and ``(1, ..., 1)``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    digits = np.vstack([np.zeros(theta.size), np.ones(theta.size)])
    return HomogeneousIFS(theta, digits, probs)
