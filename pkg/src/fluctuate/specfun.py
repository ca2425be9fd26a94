"""Real-argument special functions.

Log-Gamma, digamma, trigamma, Pochhammer symbols and the Gauss
hypergeometric function 2F1 for real parameters and real ``z <= 1``.

2F1 evaluation strategy
-----------------------
* ``0 <= z <= 0.5``: Maclaurin series.
* ``z < 0``: Pfaff transformation to ``w = z/(z-1)`` in ``(0, 1)``.
* ``0.5 < z < 1``: connection formula in ``1 - z``; when ``c - a - b`` is
  an integer the logarithmic form of the connection formula is used.
* ``z == 1``: Gauss summation when ``c - a - b > 0``.

Callers that know ``1 - z`` more accurately than the subtraction
``1 - z`` would give (arguments very close to 1) pass it as
``one_minus_z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError, NumericError

__all__ = [
    "EULER_GAMMA",
    "DEFAULT_REL_TOL",
    "MAX_TERMS",
    "Hyp2F1Request",
    "Z1Limit",
    "ln_gamma",
    "gamma_sign",
    "rgamma",
    "digamma",
    "polygamma1",
    "pochhammer",
    "hyp2f1",
    "hyp2f1_z1_limit",
]

EULER_GAMMA = 0.57721566490153286061
DEFAULT_REL_TOL = 1e-13
MAX_TERMS = 100_000

# c - a - b closer than this to an integer is treated as that integer
_INT_TOL = 1e-12
_POCH_PRODUCT_MAX = 64
_LOG_MAX = math.log(1.7e308)
# c - a - b within this of an integer uses the paired connection formula
_NEAR_INT = 0.05

# Bernoulli numbers B_2, B_4, ..., B_14
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def _is_nonpos_int(x):
    return x <= 0 and x == math.floor(x)


def ln_gamma(x):
    """Natural logarithm of the Gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def gamma_sign(x):
    """Sign of Gamma(x); raises at the poles."""
    if _is_nonpos_int(x):
        raise DomainError(f"Gamma has a pole at {x!r}")
    if x > 0:
        return 1.0
    return -1.0 if math.floor(x) % 2 else 1.0


def rgamma(x):
    """Reciprocal Gamma function, zero at the poles of Gamma."""
    if _is_nonpos_int(x):
        return 0.0
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    try:
        return 1.0 / math.gamma(x)
    except OverflowError:
        return gamma_sign(x) * math.exp(-math.lgamma(x))


def _gamma_ratio(num, den):
    """prod(Gamma(num)) / prod(Gamma(den)), evaluated in log space.

    Returns 0 when a denominator argument sits on a pole.
    """
    for x in den:
        if _is_nonpos_int(x):
            return 0.0
    sign = 1.0
    log = 0.0
    for x in num:
        sign *= gamma_sign(x)
        log += math.lgamma(x)
    for x in den:
        sign *= gamma_sign(x)
        log -= math.lgamma(x)
    return sign * math.exp(log)


def digamma(x):
    """Digamma function Psi(x) = d/dx log Gamma(x).

    Negative arguments use the reflection formula.

    >>> round(digamma(1.0), 12)
    -0.577215664902
    """
    x = float(x)
    if _is_nonpos_int(x):
        raise DomainError(f"digamma has a pole at {x!r}")
    if x < 0:
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for k, b2k in enumerate(_BERNOULLI, start=1):
        series += b2k / (2 * k) * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def polygamma1(x):
    """Trigamma function Psi_1(x) = d^2/dx^2 log Gamma(x)."""
    x = float(x)
    if _is_nonpos_int(x):
        raise DomainError(f"polygamma1 has a pole at {x!r}")
    if x < 0:
        return (math.pi / math.sin(math.pi * x)) ** 2 - polygamma1(1.0 - x)
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv2 * inv
    for b2k in _BERNOULLI:
        series += b2k * power
        power *= inv2
    return acc + inv + 0.5 * inv2 + series


def pochhammer(a, n):
    """Rising factorial ``(a)_n = a (a+1) ... (a+n-1)``.

    Parameters
    ----------
    a : float
        Any real number.
    n : int
        Nonnegative integer.
    """
    if n != int(n) or n < 0:
        raise ValueError(f"pochhammer needs a nonnegative integer n, got {n!r}")
    n = int(n)
    a = float(a)
    if n <= _POCH_PRODUCT_MAX:
        out = 1.0
        for k in range(n):
            out *= a + k
        return out
    if _is_nonpos_int(a):
        if a + n > 0:
            return 0.0
        # (a)_n = (-1)^n (1 - a - n)_n with a positive base
        return (-1.0) ** n * pochhammer(1.0 - a - n, n)
    log = math.lgamma(a + n) - math.lgamma(a)
    if log > _LOG_MAX:
        raise NumericError(f"pochhammer({a}, {n}) overflows a double", a=a, n=n, log_value=log)
    return gamma_sign(a + n) * gamma_sign(a) * math.exp(log)


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hyp2F1Request:
    """Arguments of a 2F1 evaluation, validated on construction."""

    a: float
    b: float
    c: float
    z: float
    rel_tol: float = DEFAULT_REL_TOL

    def __post_init__(self):
        if _is_nonpos_int(self.c):
            raise DomainError(f"c={self.c!r} is a pole of 2F1")
        if self.z > 1:
            raise DomainError(f"real branch requires z <= 1, got z={self.z!r}")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")

    def evaluate(self):
        return hyp2f1(self.a, self.b, self.c, self.z, self.rel_tol)


@dataclass(frozen=True)
class Z1Limit:
    """Behaviour of 2F1(a, b; c; z) as z increases to 1.

    ``kind`` is ``"finite"`` (``value`` holds the limit), ``"log"``
    (F ~ coefficient * -log(1-z)) or ``"power"``
    (F ~ coefficient * (1-z)**exponent).
    """

    kind: str
    value: float | None = None
    coefficient: float | None = None
    exponent: float | None = None


class _Kahan:
    __slots__ = ("total", "comp")

    def __init__(self, start=0.0):
        self.total = start
        self.comp = 0.0

    def add(self, x):
        y = x - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t


def _terminating_degree(a, b):
    """Degree of the polynomial 2F1 when a or b is a nonpositive integer."""
    degs = [int(-x) for x in (a, b) if _is_nonpos_int(x)]
    return min(degs) if degs else None


def _finite_sum(a, b, c, z, degree):
    acc = _Kahan(1.0)
    term = 1.0
    for n in range(degree):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        acc.add(term)
    return acc.total


def _monotone_from(*params):
    """First index past which every (p + n) factor is positive."""
    return max(0, *(math.ceil(-p) + 1 for p in params))


def _series(a, b, c, x, tol):
    """Maclaurin series of 2F1 for |x| < 1 with a tail-bound stopping rule."""
    return _series_abs(a, b, c, x, tol)[0]


def _series_abs(a, b, c, x, tol):
    """Series value together with the sum of absolute terms."""
    acc = _Kahan(1.0)
    mag = 1.0
    term = 1.0
    ax = abs(x)
    start = _monotone_from(a, b, c)
    for n in range(MAX_TERMS):
        ratio = (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        term *= ratio
        acc.add(term)
        mag += abs(term)
        if term == 0.0:
            return acc.total, mag
        if n + 1 < start:
            continue
        nxt = abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2)) * x)
        bound = max(nxt, ax)
        if bound < 1.0 and abs(term) * bound / (1.0 - bound) <= tol * abs(acc.total):
            return acc.total, mag
    raise ConvergenceError(
        "2F1 series did not converge", a=a, b=b, c=c, z=x, terms=MAX_TERMS, partial=acc.total
    )


def _connection(a, b, c, x, omx, tol):
    """Connection formula around z = 1 for non-integer c - a - b.

    Returns the value and the ratio of the larger addend to the result,
    which measures the cancellation.
    """
    m = c - a - b
    t1 = _gamma_ratio((c, m), (c - a, c - b))
    if t1 != 0.0:
        t1 *= _series(a, b, 1.0 - m, omx, tol)
    t2 = _gamma_ratio((c, -m), (a, b))
    if t2 != 0.0:
        t2 *= omx**m * _series(c - a, c - b, 1.0 + m, omx, tol)
    value = t1 + t2
    scale = max(abs(t1), abs(t2))
    return value, _cancellation(scale, value)


def _cancellation(scale, value):
    if value == 0.0:
        return math.inf if scale > 0.0 else 1.0
    return scale / abs(value)


def _degenerate(a, b, c, x, omx, m, tol):
    """Connection formula around z = 1 when c - a - b == m is an integer.

    Returns the value and a cancellation ratio as :func:`_connection`.
    """
    if m < 0:
        value, cancel = _degenerate(c - a, c - b, c, x, omx, -m, tol)
        return omx ** (c - a - b) * value, cancel
    lw = math.log(omx)
    w = omx
    if m == 0:
        pref = _gamma_ratio((c,), (a, b))
        psi1 = -EULER_GAMMA
        psia = digamma(a)
        psib = digamma(b)
        start = _monotone_from(a, b)
        acc = _Kahan()
        mass = 0.0
        coef = 1.0
        for n in range(MAX_TERMS):
            term = coef * (2.0 * psi1 - psia - psib - lw)
            acc.add(term)
            mass += abs(term)
            ratio = (a + n) * (b + n) / ((n + 1.0) ** 2) * w
            bound = max(abs(ratio), w)
            if n >= start and bound < 1.0:
                mag = abs(coef) * (abs(lw) + 2.0 * abs(psi1) + abs(psia) + abs(psib) + 1.0)
                if mag * bound / (1.0 - bound) <= tol * abs(acc.total):
                    return pref * acc.total, _cancellation(mass, acc.total)
            coef *= ratio
            psi1 += 1.0 / (n + 1)
            psia += 1.0 / (a + n)
            psib += 1.0 / (b + n)
        raise ConvergenceError("degenerate 2F1 series did not converge", a=a, b=b, c=c, z=x)

    am = c - b  # a + m
    bm = c - a  # b + m
    finite = _Kahan()
    fmass = 0.0
    coef = 1.0
    for n in range(m):
        finite.add(coef)
        fmass += abs(coef)
        if n + 1 < m:
            coef *= (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n)) * w
    hpref = _gamma_ratio((float(m), c), (am, bm))
    head = hpref * finite.total

    pref = _gamma_ratio((c,), (a, b))
    if pref == 0.0:
        return head, _cancellation(abs(hpref) * fmass, head)
    psi1 = -EULER_GAMMA
    psim = digamma(m + 1.0)
    psia = digamma(am)
    psib = digamma(bm)
    start = _monotone_from(am, bm)
    acc = _Kahan()
    mass = 0.0
    coef = math.exp(-math.lgamma(m + 1.0))
    for n in range(MAX_TERMS):
        term = coef * (lw - psi1 - psim + psia + psib)
        acc.add(term)
        mass += abs(term)
        ratio = (am + n) * (bm + n) / ((n + 1.0) * (n + m + 1.0)) * w
        bound = max(abs(ratio), w)
        if n >= start and bound < 1.0:
            mag = abs(coef) * (abs(lw) + abs(psi1) + abs(psim) + abs(psia) + abs(psib) + 1.0)
            if mag * bound / (1.0 - bound) <= tol * abs(acc.total):
                break
        coef *= ratio
        psi1 += 1.0 / (n + 1)
        psim += 1.0 / (n + m + 1)
        psia += 1.0 / (am + n)
        psib += 1.0 / (bm + n)
    else:
        raise ConvergenceError("degenerate 2F1 series did not converge", a=a, b=b, c=c, z=x)
    tpref = -((-1.0) ** m) * pref * w**m
    value = head + tpref * acc.total
    scale = abs(hpref) * fmass + abs(tpref) * mass
    return value, _cancellation(scale, value)


def _lgamma_shift(x, eps):
    """log|Gamma(x + eps) / Gamma(x)| and its sign, accurate relative to ``eps``.

    Intended for small ``eps``; neither ``x`` nor ``x + eps`` may be a pole.
    """
    log = 0.0
    sign = 1.0
    while x < 10.0:
        r = 1.0 + eps / x
        if r < 0.0:
            sign = -sign
            log -= math.log(-r)
        else:
            log -= math.log1p(eps / x)
        x += 1.0
    t = eps / x
    lt = math.log1p(t)
    # Stirling series differenced term by term
    out = (x - 0.5) * lt - eps + eps * math.log(x + eps)
    xp = x
    for k, b2k in enumerate(_BERNOULLI, start=1):
        out += b2k / (2 * k * (2 * k - 1)) / xp * math.expm1((1 - 2 * k) * lt)
        xp *= x * x
    return log + out, sign


def _near_degenerate(a, b, c, x, omx, mi, eps, tol):
    """Connection formula for c - a - b = mi + eps with small nonzero eps.

    The two series of the connection formula both carry a factor 1/eps.
    Pairing them term by term and forming each difference through
    :func:`_lgamma_shift` and ``expm1`` removes that cancellation.
    """
    if mi < 0:
        value, cancel = _near_degenerate(c - a, c - b, c, x, omx, -mi, -eps, tol)
        return omx ** (c - a - b) * value, cancel
    m = mi + eps
    w = omx
    head = 0.0
    hmass = 0.0
    if mi > 0:
        finite = _Kahan()
        coef = 1.0
        for n in range(mi):
            finite.add(coef)
            hmass += abs(coef)
            coef *= (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n)) * w
        hpref = _gamma_ratio((c, m), (c - a, c - b))
        head = hpref * finite.total
        hmass *= abs(hpref)
    am = a + mi
    bm = b + mi
    pref = _gamma_ratio((c, am, bm), (a, b, c - a, c - b, mi + 1.0))
    pref *= (-1.0) ** mi * math.pi / math.sin(math.pi * eps) * w**mi
    u = -_lgamma_shift(1.0, -eps)[0]
    v, sv = _lgamma_shift(am, eps)
    v2, s2 = _lgamma_shift(bm, eps)
    v += v2 - _lgamma_shift(mi + 1.0, eps)[0] + eps * math.log(w)
    sv *= s2
    start = _monotone_from(am, bm)
    acc = _Kahan()
    mass = 0.0
    coef = 1.0
    for k in range(MAX_TERMS):
        if sv > 0:
            bracket = math.exp(v) * math.expm1(u - v)
        else:
            bracket = math.exp(u) + math.exp(v)
        term = coef * bracket
        acc.add(term)
        mass += abs(term)
        ratio = (am + k) * (bm + k) / ((mi + k + 1.0) * (k + 1.0)) * w
        bound = max(abs(ratio), w)
        if k >= start and bound < 1.0:
            mag = abs(coef) * max(abs(bracket), abs(u - v) + abs(eps))
            if mag * bound / (1.0 - bound) <= tol * abs(acc.total):
                break
        coef *= ratio
        u -= math.log1p(-eps / (k + 1.0))
        for y in (am + k, bm + k):
            r = 1.0 + eps / y
            if r < 0.0:
                sv = -sv
                v += math.log(-r)
            else:
                v += math.log1p(eps / y)
        v -= math.log1p(eps / (mi + k + 1.0))
    else:
        raise ConvergenceError("near-degenerate 2F1 series did not converge", a=a, b=b, c=c, z=x)
    value = head + pref * acc.total
    return value, _cancellation(hmass + abs(pref) * mass, value)


# transformed values whose addends exceed the result by more than this
# factor are re-evaluated by the direct series
_CANCEL_LIMIT = 1e3
# below this argument the direct series is tried before any transformation
_SERIES_FIRST = 0.9
# up to here the series is also retried when a transformation cancels
_SERIES_RETRY = 0.99
# largest cancellation ratio accepted when no alternative exists
_CANCEL_MAX = 1e-8 / 2.2e-16


def _unit(a, b, c, x, omx, tol):
    """2F1 for 0 <= x < 1."""
    degree = _terminating_degree(a, b)
    if degree is not None:
        return _finite_sum(a, b, c, x, degree)
    if x <= 0.5:
        return _series(a, b, c, x, tol)
    m = c - a - b
    degree = _terminating_degree(c - a, c - b)
    if degree is not None:
        # Euler transformation turns F into (1-x)^m times a polynomial
        return omx**m * _finite_sum(c - a, c - b, c, x, degree)
    direct = None
    if x <= _SERIES_FIRST:
        # the series is short here; keep it unless it cancels badly
        try:
            value, mag = _series_abs(a, b, c, x, tol)
            direct = (value, _cancellation(mag, value))
        except ConvergenceError:
            pass
        if direct is not None and direct[1] <= 10.0:
            return direct[0]
    mi = round(m)
    try:
        if m == mi:
            value, cancel = _degenerate(a, b, c, x, omx, int(mi), tol)
        elif abs(m - mi) < _NEAR_INT:
            value, cancel = _near_degenerate(a, b, c, x, omx, int(mi), m - mi, tol)
        else:
            # near-integer c - a - b shows up as a large cancellation ratio
            value, cancel = _connection(a, b, c, x, omx, tol)
    except (OverflowError, ConvergenceError):
        value, cancel = math.nan, math.inf
    if direct is not None:
        return direct[0] if direct[1] <= cancel else value
    if cancel <= 10.0 or (cancel <= _CANCEL_LIMIT and x > _SERIES_RETRY):
        return value
    try:
        sval, mag = _series_abs(a, b, c, x, tol)
        return sval if _cancellation(mag, sval) <= cancel else value
    except ConvergenceError:
        if cancel <= _CANCEL_MAX:
            return value
        raise ConvergenceError(
            "2F1 near z=1: series too slow and transformation cancels",
            a=a, b=b, c=c, z=x, cancellation=cancel,
        ) from None


def _gauss_at_one(a, b, c):
    m = c - a - b
    if not m > 0:
        raise DomainError(
            f"2F1({a}, {b}; {c}; 1) diverges because c-a-b={m} <= 0; use hyp2f1_z1_limit"
        )
    return _gamma_ratio((c, m), (c - a, c - b))


def hyp2f1(a, b, c, z, rel_tol=DEFAULT_REL_TOL, *, one_minus_z=None):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real ``z <= 1``.

    Parameters
    ----------
    a, b, c : float
        Parameters; ``c`` must not be a nonpositive integer.
    z : float
        Argument, ``z <= 1``.
    rel_tol : float
        Target relative accuracy of the series evaluations.
    one_minus_z : float, optional
        Accurate value of ``1 - z`` for arguments close to 1.

    Raises
    ------
    DomainError
        For ``z > 1``, a pole in ``c``, or a divergent value at ``z = 1``.
    ConvergenceError
        When a series exceeds :data:`MAX_TERMS` terms.

    Examples
    --------
    >>> round(hyp2f1(1, 1, 2, 0.5), 12)  # -log(1-z)/z
    1.386294361120
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpos_int(c):
        raise DomainError(f"c={c!r} is a pole of 2F1")
    omz = 1.0 - z if one_minus_z is None else float(one_minus_z)
    if z > 1.0 or omz < 0.0:
        raise DomainError(f"real branch requires z <= 1, got z={z!r}")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    degree = _terminating_degree(a, b)
    if degree is not None:
        return _finite_sum(a, b, c, z, degree)
    if omz == 0.0:
        return _gauss_at_one(a, b, c)
    try:
        if z < 0.0:
            # Pfaff: w = z/(z-1) lies in (0, 1) and 1 - w = 1/(1 - z)
            w = -z / omz
            omw = 1.0 / omz
            if _is_nonpos_int(c - b):
                return omz ** (-a) * _unit(a, c - b, c, w, omw, rel_tol)
            return omz ** (-b) * _unit(c - a, b, c, w, omw, rel_tol)
        return _unit(a, b, c, z, omz, rel_tol)
    except OverflowError:
        raise NumericError("2F1 value overflows double precision", a=a, b=b, c=c, z=z) from None


def hyp2f1_z1_limit(a, b, c):
    """Classify the behaviour of 2F1(a, b; c; z) as z -> 1 from below.

    Examples
    --------
    >>> hyp2f1_z1_limit(1, 1, 2).kind
    'log'
    """
    a, b, c = float(a), float(b), float(c)
    if _is_nonpos_int(c):
        raise DomainError(f"c={c!r} is a pole of 2F1")
    degree = _terminating_degree(a, b)
    if degree is not None:
        return Z1Limit("finite", value=_finite_sum(a, b, c, 1.0, degree))
    m = c - a - b
    if abs(m) <= _INT_TOL * max(1.0, abs(c)):
        return Z1Limit("log", coefficient=_gamma_ratio((c,), (a, b)))
    if m > 0:
        return Z1Limit("finite", value=_gauss_at_one(a, b, c))
    return Z1Limit("power", coefficient=_gamma_ratio((c, -m), (a, b)), exponent=m)
