"""Roots of monic integer polynomials and Pisot number / family decisions.

Floating point cannot certify that a root lies exactly on the unit circle,
so every decision is three-valued: roots whose modulus falls inside
``[1 - tol, 1 + tol]`` make the answer ``AMBIGUOUS``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

DEFAULT_TOL = 1e-9
NEWTON_STEPS = 8
RESIDUAL_LIMIT = 1e-6


class Decision(str, enum.Enum):
    YES = "yes"
    NO = "no"
    AMBIGUOUS = "ambiguous"

    def __str__(self):
        return self.value


class NotMinimalPolynomial(ValueError):
    pass


class RootFindingError(RuntimeError):
    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class IntegerPolynomial:
    """Monic polynomial, coefficients from the leading term down."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        for c in coeffs:
            if isinstance(c, float) and not c.is_integer():
                raise ValueError(f"coefficient {c!r} is not an integer")
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) < 2:
            raise ValueError("degree must be at least 1")
        if coeffs[0] != 1:
            raise ValueError("polynomial must be monic")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def parse(cls, text: str) -> "IntegerPolynomial":
        """Parse ``"1,-1,-1"`` (leading coefficient first)."""
        return cls(tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return np.polyval(np.array(self.coeffs, dtype=float), z)

    def __str__(self):
        terms = []
        for power, c in zip(range(self.degree, -1, -1), self.coeffs):
            if c == 0:
                continue
            mono = "" if power == 0 else ("t" if power == 1 else f"t^{power}")
            mag = abs(c)
            body = mono if mag == 1 and mono else f"{mag}{mono}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residual: float


def _trim(a):
    i = 0
    while i < len(a) - 1 and a[i] == 0:
        i += 1
    return a[i:]


def _divmod(a, b):
    a = [Fraction(x) for x in a]
    q = []
    while len(a) >= len(b):
        f = a[0] / b[0]
        q.append(f)
        a = [x - f * y for x, y in zip(a, b + [0] * (len(a) - len(b)))][1:]
    return (q or [Fraction(0)]), _trim(a or [Fraction(0)])


def _monic(a):
    return [Fraction(x) / a[0] for x in a]


def _gcd(a, b):
    a, b = _monic(_trim(a)), _monic(_trim(b))
    while not (len(b) == 1 and b[0] == 0):
        _, r = _divmod(a, b)
        a, b = b, (_monic(r) if any(r) else [Fraction(0)])
    return a


def _deriv(a):
    n = len(a) - 1
    return [c * (n - i) for i, c in enumerate(a[:-1])] or [Fraction(0)]


def squarefree_factors(p: IntegerPolynomial):
    """Yun's algorithm: ``[(factor, multiplicity), ...]`` with ``P = prod factor^mult``.

    Exact rational arithmetic; factors are monic.
    """
    f = [Fraction(c) for c in p.coeffs]
    fp = _deriv(f)
    a = _gcd(f, fp)
    b, _ = _divmod(f, a)
    c, _ = _divmod(fp, a)
    d = [x - y for x, y in zip(_pad(c, len(b) - 1), _pad(_deriv(b), len(b) - 1))]
    out = []
    i = 1
    while len(b) > 1:
        g = _gcd(b, d) if any(d) else _monic(b)
        b, _ = _divmod(b, g)
        c, _ = _divmod(d, g)
        if len(g) > 1:
            out.append((g, i))
        d = [x - y for x, y in zip(_pad(c, len(b) - 1), _pad(_deriv(b), len(b) - 1))]
        i += 1
    return out


def _pad(a, deg):
    a = list(a)
    return [Fraction(0)] * (deg + 1 - len(a)) + a


def _polished_roots(c):
    dc = np.polyder(c)
    z = np.roots(c).astype(complex)
    for i in range(z.size):
        best = z[i]
        best_val = abs(np.polyval(c, best))
        cur = best
        for _ in range(NEWTON_STEPS):
            if best_val == 0:
                break
            der = np.polyval(dc, cur)
            if der == 0:
                break
            cur = cur - np.polyval(c, cur) / der
            val = abs(np.polyval(c, cur))
            if val < best_val:
                best, best_val = cur, val
        z[i] = best
    return z


def roots(p: IntegerPolynomial) -> RootSet:
    """All complex roots with multiplicity.

    The polynomial is split exactly into square-free factors; the roots of
    each factor come from companion-matrix eigenvalues polished by Newton
    steps (a step is kept only if it lowers ``|P(z)|``).
    """
    c = np.array(p.coeffs, dtype=float)
    parts = []
    for factor, mult in squarefree_factors(p):
        z = _polished_roots(np.array([float(x) for x in factor]))
        parts.extend([z] * mult)
    z = np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
    # real coefficients: snap nearly-real roots onto the axis
    scale = np.maximum(1.0, np.abs(z))
    z = np.where(np.abs(z.imag) <= 1e-14 * scale, z.real + 0j, z)
    order = np.lexsort((z.imag, -np.abs(z)))
    z = z[order]
    residual = float(np.max(np.abs(np.polyval(c, z)))) if z.size else 0.0
    weight = max(float(np.polyval(np.abs(c), abs(r))) for r in z) if z.size else 1.0
    if z.size != p.degree or residual > RESIDUAL_LIMIT * weight:
        raise RootFindingError(f"root polishing did not converge (residual {residual:.3g})",
                               RootSet(z, residual))
    return RootSet(z, residual)


@dataclass(frozen=True)
class IrreducibilityScreen:
    reducible: bool
    verified: bool
    reason: str = ""


def screen_irreducible(p: IntegerPolynomial) -> IrreducibilityScreen:
    """Rational-root test; complete for degree <= 3.

    A monic integer polynomial has only integer rational roots, and those
    divide the constant term.
    """
    coeffs = p.coeffs
    const = coeffs[-1]
    if const == 0:
        return IrreducibilityScreen(p.degree > 1, True, "root 0")
    if p.degree == 1:
        return IrreducibilityScreen(False, True)
    if any(mult > 1 for _, mult in squarefree_factors(p)):
        return IrreducibilityScreen(True, True, "repeated factor")
    bound = abs(const)
    for r in _divisors(bound):
        for cand in (r, -r):
            if _horner_int(coeffs, cand) == 0:
                return IrreducibilityScreen(True, True, f"integer root {cand}")
    return IrreducibilityScreen(False, p.degree <= 3)


def _divisors(n):
    out = set()
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.add(i)
            out.add(n // i)
        i += 1
    return sorted(out)


def _horner_int(coeffs, x):
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class PisotReport:
    decision: Decision
    roots: np.ndarray
    failed_clause: str | None = None
    irreducibility: str = "verified"
    notes: tuple[str, ...] = field(default=())


def is_pisot_number(p: IntegerPolynomial, tol: float = DEFAULT_TOL) -> PisotReport:
    """Decide whether the root > 1 of the minimal polynomial ``p`` is Pisot.

    Raises :class:`NotMinimalPolynomial` when the screen finds a factor.
    """
    screen = screen_irreducible(p)
    if screen.reducible:
        raise NotMinimalPolynomial(f"not a minimal polynomial: {screen.reason}")
    status = "verified" if screen.verified else "unverified"
    if p.degree == 1:
        root = -p.coeffs[1]
        decision = Decision.YES if root >= 2 else Decision.NO
        clause = None if decision is Decision.YES else "root is not greater than one"
        return PisotReport(decision, np.array([complex(root)]), clause, status)

    z = roots(p).roots
    mod = np.abs(z)
    big = mod > 1 + tol
    band = (mod >= 1 - tol) & ~big
    real_big = big & (np.abs(z.imag) == 0) & (z.real > 0)
    if big.sum() >= 2:
        return PisotReport(Decision.NO, z, "a conjugate has modulus > 1", status)
    if big.sum() == 1 and not real_big.any():
        return PisotReport(Decision.NO, z, "the root of modulus > 1 is not a real number > 1", status)
    if band.any():
        return PisotReport(Decision.AMBIGUOUS, z, "a root lies within tol of the unit circle", status)
    if big.sum() == 0:
        return PisotReport(Decision.NO, z, "no root greater than one", status)
    return PisotReport(Decision.YES, z, None, status)


def is_pisot_family(p: IntegerPolynomial, thetas, tol: float = DEFAULT_TOL) -> PisotReport:
    """Check clauses (i) ``|theta_j| > 1`` and (ii) the remaining roots of ``p`` lie inside the unit disc.

    ``p`` need not be irreducible; a reducible ``p`` is accepted and noted.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=complex))
    if thetas.size == 0:
        raise ValueError("thetas must be non-empty")
    screen = screen_irreducible(p)
    notes = []
    if screen.reducible:
        notes.append(f"P is reducible ({screen.reason})")
    status = "reducible" if screen.reducible else ("verified" if screen.verified else "unverified")

    z = roots(p).roots
    ambiguous = False
    # clause (i)
    tmod = np.abs(thetas)
    if np.any(tmod < 1 - tol):
        return PisotReport(Decision.NO, z, "(i)", status, tuple(notes))
    if np.any(tmod <= 1 + tol):
        ambiguous = True
        notes.append("some |theta_j| within tol of 1")
    # clause (ii): match every theta to its own root
    free = np.ones(z.size, dtype=bool)
    for t in thetas:
        dist = np.where(free, np.abs(z - t), np.inf)
        k = int(np.argmin(dist))
        if not dist[k] <= tol * max(1.0, abs(t)):
            return PisotReport(Decision.NO, z, "(ii)", status, tuple(notes + [f"{t} is not a root of P"]))
        free[k] = False
    rest = np.abs(z[free])
    if np.any(rest > 1 + tol):
        return PisotReport(Decision.NO, z, "(ii)", status, tuple(notes))
    if np.any(rest >= 1 - tol):
        ambiguous = True
        notes.append("an unmatched root lies within tol of the unit circle")
    decision = Decision.AMBIGUOUS if ambiguous else Decision.YES
    return PisotReport(decision, z, None, status, tuple(notes))
