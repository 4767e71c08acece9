"""
Gamma-family and confluent hypergeometric functions.

The Tricomi function Psi(a, c; x) is evaluated from its Kummer-series
representations where they are well conditioned, and from the integral
representation

    Psi(a, c; x) = 1/Gamma(a) * int_0^inf exp(-x t) t^(a-1) (1+t)^(c-a-1) dt

everywhere else.  The integral form also serves as the independent oracle
for the series.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, PoleError

logger = logging.getLogger(__name__)

INTEGER_TOL = 1e-9
NEAR_INTEGER_TOL = 1e-4
SERIES_MAX_X = 8.0
# series results whose terms cancel by more than this factor go to quadrature
MAX_SERIES_CANCELLATION = 1e5

_KUMMER_MAX_TERMS = 10_000
_KUMMER_QUIET_RUN = 50


def _is_pole(x):
    return x <= 0 and float(x).is_integer()


def _check_pole(x):
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x!r}")


def ln_gamma(x):
    """log|Gamma(x)|; see `gamma_sign` for the sign."""
    _check_pole(x)
    return float(special.gammaln(x))


def gamma_sign(x):
    _check_pole(x)
    return float(special.gammasgn(x))


def gamma(x):
    _check_pole(x)
    return float(special.gamma(x))


def rgamma(x):
    """1/Gamma(x), which is zero at the poles of Gamma."""
    return float(special.rgamma(x))


def digamma(x):
    _check_pole(x)
    return float(special.psi(x))


def pochhammer(a, n):
    """Rising factorial (a)_n = a (a+1) ... (a+n-1).

    The finite product is used so that negative `a` works even where the
    ratio Gamma(a+n)/Gamma(a) is undefined.  Exact types such as Fraction
    are kept exact.
    """
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    out = a ** 0
    for k in range(int(n)):
        out *= a + k
    return out


def scaled_exp1(x):
    """exp(x) * E1(x) for x > 0, without overflow for large x."""
    if x <= 0:
        raise ValueError("x must be positive")
    if x < 40.0:
        return math.exp(x) * float(special.exp1(x))
    # continued fraction E1(x) e^x = 1/(x+1- 1/(x+3- 4/(x+5- ...))), modified Lentz
    tiny = 1e-300
    b = x + 1.0
    f = 1.0 / b
    c = 1.0 / tiny
    d = f
    for i in range(1, 200):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (b + an * d)
        c = b + an / c
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return f
    raise ConvergenceError(f"continued fraction for E1({x}) did not converge")


def upper_incomplete_gamma(a, x):
    """Gamma(a, x) = int_x^inf t^(a-1) e^(-t) dt for real a and x >= 0."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        if a <= 0:
            raise PoleError(f"Gamma({a}, 0) diverges")
        return gamma(a)
    if a > 0:
        return float(special.gammaincc(a, x) * special.gamma(a))
    if x > 1.0:
        # Gamma(a, x) = e^-x Psi(1-a, 1-a; x); the recurrence below cancels badly here
        return math.exp(-x) * psi_integral_oracle(1.0 - a, 1.0 - a, x)
    # downward recurrence Gamma(a, x) = (Gamma(a+1, x) - x^a e^-x) / a
    steps = int(math.ceil(-a))
    base = a + steps
    if base == 0:
        val = float(special.exp1(x))
    else:
        val = float(special.gammaincc(base, x) * special.gamma(base))
    for k in range(1, steps + 1):
        s = base - k
        val = (val - x ** s * math.exp(-x)) / s
    return val


def _kummer_series(a, c, x):
    """Return (sum, sum of |terms|) for the Kummer series."""
    if _is_pole(c):
        raise PoleError(f"Phi(a, c; x) undefined for c = {c!r}")
    term = 1.0
    total = 1.0
    abs_total = 1.0
    quiet = 0
    prev_abs = 1.0
    for r in range(_KUMMER_MAX_TERMS):
        term *= (a + r) / (c + r) * x / (r + 1)
        total += term
        abs_total += abs(term)
        if not math.isfinite(abs_total):
            raise ConvergenceError(f"Phi({a}, {c}; {x}) series overflowed")
        if abs(term) <= 1e-16 * abs(total):
            quiet += 1
            if quiet >= _KUMMER_QUIET_RUN:
                return total, abs_total
        else:
            quiet = 0
        growing = abs(term) > prev_abs
        prev_abs = abs(term)
    if growing:
        raise ConvergenceError(f"Phi({a}, {c}; {x}) series still growing after {_KUMMER_MAX_TERMS} terms")
    return total, abs_total


def kummer_phi(a, c, x):
    """Kummer's confluent hypergeometric function Phi(a, c; x) = 1F1(a; c; x)."""
    return _kummer_series(a, c, x)[0]


@dataclass(frozen=True)
class PsiArgs:
    a: float
    c: float
    x: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"Psi requires a > 0, got a={self.a!r}")
        if not self.x > 0:
            raise ValueError(f"Psi requires x > 0, got x={self.x!r}")


@dataclass(frozen=True)
class SmallXLeadingTerm:
    """Leading behaviour coefficient * x**x_power * (-log x if log_flag)."""
    coefficient: float
    x_power: float
    log_flag: bool

    def evaluate(self, x):
        v = self.coefficient * x ** self.x_power
        return -v * math.log(x) if self.log_flag else v


def psi_small_x_leading(a, c):
    """Leading small-x term of Psi(a, c; x) for real c."""
    if not a > 0:
        raise ValueError("a must be positive")
    if abs(c - 1.0) < INTEGER_TOL:
        return SmallXLeadingTerm(1.0 / gamma(a), 0.0, True)
    if c > 1:
        return SmallXLeadingTerm(gamma(c - 1) / gamma(a), 1.0 - c, False)
    return SmallXLeadingTerm(gamma(1 - c) / gamma(a - c + 1), 0.0, False)


def _quad(func, lo, hi, **kw):
    val, err, info = integrate.quad(func, lo, hi, epsabs=0.0, epsrel=1e-13,
                                    limit=400, full_output=1, **kw)[:3]
    return val, err


def _unpack(args, c, x):
    if isinstance(args, PsiArgs):
        return args.a, args.c, args.x
    return float(args), float(c), float(x)


def psi_integral_oracle(args, c=None, x=None):
    """Psi(a, c; x) by adaptive quadrature of its integral representation.

    The half line is split at max(1, (a-1)/x).  The head uses an algebraic
    weight for the t^(a-1) endpoint behaviour, the middle is integrated in
    log t, and the tail is mapped to u = x (t - split) so the exponential
    decay has unit scale.  Accepts a `PsiArgs` or the three values.
    """
    a, c, x = _unpack(args, c, x)
    PsiArgs(a, c, x)
    p = c - a - 1.0
    split = max(1.0, (a - 1.0) / x)
    head = min(1.0, a / x)

    pieces = []
    pieces.append(_quad(lambda t: math.exp(-x * t) * (1.0 + t) ** p, 0.0, head,
                        weight="alg", wvar=(a - 1.0, 0.0)))

    def in_log_t(s):
        t = math.exp(s)
        return math.exp(a * s - x * t) * (1.0 + t) ** p

    if head < 1.0:
        pieces.append(_quad(in_log_t, math.log(head), 0.0))
    if split > 1.0:
        pieces.append(_quad(in_log_t, 0.0, math.log(split)))

    base = math.exp(-x * split)

    def tail(u):
        t = split + u / x
        return base * math.exp(-u) * t ** (a - 1.0) * (1.0 + t) ** p / x

    if base > 0.0:
        pieces.append(_quad(tail, 0.0, np.inf))

    total = math.fsum(v for v, _ in pieces)
    err = sum(e for _, e in pieces)
    if not total > 0 or err > 1e-9 * total:
        raise ConvergenceError(f"quadrature for Psi({a}, {c}; {x}) reached only {err:.3g} abs error on {total:.6g}")
    return total / gamma(a)


def _psi_noninteger(a, c, x):
    # Psi = G(1-c)/G(a-c+1) Phi(a,c;x) + G(c-1)/G(a) x^(1-c) Phi(a-c+1,2-c;x)
    value = 0.0
    scale = 0.0
    w1 = gamma(1.0 - c) * rgamma(a - c + 1.0)
    if w1 != 0.0:
        s, s_abs = _kummer_series(a, c, x)
        value += w1 * s
        scale += abs(w1) * s_abs
    w2 = gamma(c - 1.0) / gamma(a) * x ** (1.0 - c)
    s, s_abs = _kummer_series(a - c + 1.0, 2.0 - c, x)
    value += w2 * s
    scale += abs(w2) * s_abs
    return value, scale


def _log_series(a, n, x):
    """Sum of Phi(a,n+1;x) log x + sum_r (a)_r/(n+1)_r [psi(a+r)-psi(1+r)-psi(1+n+r)] x^r/r!.

    Returns (value, sum of |terms|).
    """
    lx = math.log(x)
    dig = digamma(a) - digamma(1.0) - digamma(n + 1.0)
    coef = 1.0
    total = coef * (lx + dig)
    abs_total = abs(coef * lx) + abs(coef * dig)
    quiet = 0
    for r in range(_KUMMER_MAX_TERMS):
        coef *= (a + r) / (n + 1.0 + r) * x / (r + 1)
        dig += 1.0 / (a + r) - 1.0 / (1.0 + r) - 1.0 / (n + 1.0 + r)
        term = coef * (lx + dig)
        total += term
        abs_total += abs(coef * lx) + abs(coef * dig)
        if abs(coef) * (abs(lx) + abs(dig)) <= 1e-16 * abs(total):
            quiet += 1
            if quiet >= _KUMMER_QUIET_RUN:
                return total, abs_total
        else:
            quiet = 0
    raise ConvergenceError(f"logarithmic Psi series did not converge for a={a}, n={n}, x={x}")


def _psi_positive_integer(a, n, x):
    # c = n + 1, n >= 0
    value = 0.0
    scale = 0.0
    w = (-1.0) ** (n - 1) / math.factorial(n) * rgamma(a - n)
    if w != 0.0:
        s, s_abs = _log_series(a, n, x)
        value += w * s
        scale += abs(w) * s_abs
    if n > 0:
        pre = math.factorial(n - 1) / gamma(a)
        coef = 1.0
        for r in range(n):
            if r:
                coef *= (a - n + r - 1) / (1 - n + r - 1) / r
            term = pre * coef * x ** (r - n)
            value += term
            scale += abs(term)
    return value, scale


def _psi_nonpositive_integer(a, c, x):
    # c = -m, m >= 0; combines the positive-integer form with the reflection
    m = -c
    value = 0.0
    scale = 0.0
    a2 = a + 1.0 + m
    n = 1 + m
    w = (-1.0) ** m / math.factorial(1 + m) / gamma(a)
    s, s_abs = _log_series(a2, n, x)
    xp = x ** (1 + m)
    value += w * xp * s
    scale += abs(w) * xp * s_abs
    pre = math.factorial(m) * rgamma(a2)
    coef = 1.0
    for r in range(m + 1):
        if r:
            coef *= (a + r - 1) / (c + r - 1) * x / r
        term = pre * coef
        value += term
        scale += abs(term)
    return value, scale


def psi_series(a, c, x):
    """Psi(a, c; x) from the Kummer-series forms, without any fallback.

    Returns (value, cancellation), where cancellation is the ratio of the
    summed term magnitudes to |value|.
    """
    PsiArgs(a, c, x)
    n = round(c)
    if abs(c - n) < INTEGER_TOL:
        if n >= 1:
            value, scale = _psi_positive_integer(a, n - 1, x)
        else:
            value, scale = _psi_nonpositive_integer(a, n, x)
    else:
        value, scale = _psi_noninteger(a, c, x)
    cancellation = scale / abs(value) if value != 0.0 else math.inf
    return value, cancellation


def tricomi_psi(args, c=None, x=None):
    """Tricomi's confluent hypergeometric function Psi(a, c; x), a > 0, x > 0.

    `args` is a `PsiArgs`, or the value of `a` with `c` and `x` given too.
    """
    a, c, x = _unpack(args, c, x)
    PsiArgs(a, c, x)
    if x > SERIES_MAX_X:
        return psi_integral_oracle(a, c, x)
    dist = abs(c - round(c))
    if INTEGER_TOL <= dist < NEAR_INTEGER_TOL:
        logger.debug("c=%r is near an integer; using quadrature", c)
        return psi_integral_oracle(a, c, x)
    value, cancellation = psi_series(a, c, x)
    if cancellation > MAX_SERIES_CANCELLATION or not value > 0:
        logger.debug("Psi(%r, %r; %r) series cancels by %.3g; using quadrature", a, c, x, cancellation)
        return psi_integral_oracle(a, c, x)
    return value
