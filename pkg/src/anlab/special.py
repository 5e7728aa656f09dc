"""Scalar special functions used by the closed-form outage expressions.

Everything here works on Python floats.  ``f_antiderivative`` can also run
at extended precision through mpmath (``dps=...``).  The outage series
cancel heavily, so they need that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from scipy import integrate

from .errors import DomainError, NumericError

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the infinite series in the outage expressions.

    With ``adaptive=False`` the outer index runs over ``k = 0..truncation``.
    With ``adaptive=True`` it stops once a term drops below
    ``tol * |partial sum|``, or at ``max_terms``.
    """

    truncation: int = 15
    tol: float = 1e-12
    adaptive: bool = False
    max_terms: int = 400

    def __post_init__(self):
        if self.truncation < 1:
            raise DomainError("truncation must be >= 1")
        if not self.tol > 0:
            raise DomainError("tol must be positive")

    @property
    def limit(self) -> int:
        return self.max_terms if self.adaptive else self.truncation

    def done(self, k: int, term: float, total: float) -> bool:
        if not self.adaptive:
            return k >= self.truncation
        return k >= self.max_terms or (k > 0 and abs(term) < self.tol * abs(total))


DEFAULT_SERIES = SeriesControl()


def bessel_i0(t: float, ctrl: SeriesControl = DEFAULT_SERIES) -> float:
    """Modified Bessel ``I_0(t) = sum_k (t/2)^{2k} / (k!)^2``, truncated."""
    if t < 0:
        raise DomainError("bessel_i0 expects t >= 0")
    q = 0.25 * t * t
    term = 1.0
    total = 1.0
    k = 0
    while not ctrl.done(k, term, total):
        k += 1
        term *= q / (k * k)
        total += term
        if not math.isfinite(total):
            raise NumericError(f"I_0 series overflowed at t={t}")
    return total


def lower_incomplete_gamma(n: int, x: float) -> float:
    """``gamma(n, x) = int_0^x e^{-t} t^{n-1} dt`` for integer ``n >= 1``.

    Uses ``(n-1)! (1 - e^{-x} sum_{j<n} x^j/j!)`` when ``x`` is large.
    Below ``x = n + 1`` that form cancels, so the ascending series is used
    there instead.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"order must be a positive integer, got {n}")
    if x < 0:
        raise DomainError("x must be nonnegative")
    n = int(n)
    if x == 0:
        return 0.0
    if x < n + 1:
        # x^n e^{-x} sum_k x^k / (n (n+1) ... (n+k))
        term = 1.0 / n
        total = term
        k = 0
        while term > 1e-17 * total:
            k += 1
            term *= x / (n + k)
            total += term
        return math.exp(n * math.log(x) - x) * total
    partial = 0.0
    term = 1.0
    for j in range(n):
        if j:
            term *= x / j
        partial += term
    return math.factorial(n - 1) * (1.0 - math.exp(-x) * partial)


def _e1(y: float) -> float:
    # exponential integral E_1(y), y > 0
    if y <= 1.0:
        total = 0.0
        term = 1.0
        k = 0
        while True:
            k += 1
            term *= -y / k
            add = term / k
            total += add
            if abs(add) < 1e-17 * max(abs(total), 1e-300):
                break
        return -EULER_GAMMA - math.log(y) - total
    # modified Lentz evaluation of the continued fraction
    tiny = 1e-300
    b = y + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-y)
    raise NumericError(f"E_1 continued fraction did not converge at {y}")


def expint_ei(x: float) -> float:
    """Exponential integral ``Ei(x)`` for ``x < 0`` (so ``Ei(x) = -E_1(-x)``)."""
    if not x < 0:
        raise DomainError("expint_ei is only defined here for x < 0")
    return -_e1(-x)


def _falling(n: int, k: int) -> float:
    # n (n-1) ... (n-k)
    out = 1.0
    for j in range(k + 1):
        out *= n - j
    return out


def _tail_integral(n: int, p: float, x: float) -> float:
    val, _ = integrate.quad(lambda y: y ** (-n - 1) * math.exp(-p * y), x, math.inf,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def f_antiderivative(n: int, p, x, dps=None):
    """Antiderivative in ``x`` of ``x^{-n-1} e^{-p x}``, in three branches.

    * ``n < 0``: ``p^n gamma(-n, p x)``
    * ``n = 0``: ``Ei(-p x)``
    * ``n > 0``: ``p^n Ei(-p x) / (n! (-1)^n) - e^{-p x} x^{-n}
      sum_{k<n} (-1)^k (p x)^k / (n (n-1) ... (n-k))``

    Only differences are meaningful:
    ``F(n,p,b) - F(n,p,a) = int_a^b y^{-n-1} e^{-p y} dy``.  The sign in the
    ``n > 0`` branch is ``(-1)^n``.  With ``(-1)^{n+1}`` the difference has
    the wrong sign for odd ``n`` and is wrong outright for even ``n``.
    (regression: ``test_f_antiderivative_sign_resolution``.)

    For ``n > 8`` or ``p x > 50`` the float path drops the closed form.  It
    integrates ``-int_x^inf`` by quadrature instead, which is the same
    antiderivative since the closed form vanishes as ``x -> inf``.

    With ``dps`` set, the value is computed by mpmath at that many digits
    and returned as an ``mpf``.
    """
    n = int(n)
    if dps is not None:
        with mpmath.workdps(dps):
            p = mpmath.mpf(p)
            x = mpmath.mpf(x)
            if p <= 0 or x <= 0:
                raise DomainError("f_antiderivative needs p > 0 and x > 0")
            px = p * x
            if n < 0:
                return +(p ** n * mpmath.gammainc(-n, 0, px))
            if n == 0:
                return +mpmath.ei(-px)
            head = p ** n * mpmath.ei(-px) / (mpmath.factorial(n) * (-1) ** n)
            s = mpmath.fsum((-1) ** k * px ** k / mpmath.fprod(n - j for j in range(k + 1))
                            for k in range(n))
            return +(head - mpmath.exp(-px) / x ** n * s)

    p = float(p)
    x = float(x)
    if not (p > 0 and x > 0):
        raise DomainError("f_antiderivative needs p > 0 and x > 0")
    px = p * x
    if n < 0:
        out = p ** n * lower_incomplete_gamma(-n, px)
    elif n == 0:
        out = expint_ei(-px)
    elif n > 8 or px > 50:
        out = -_tail_integral(n, p, x)
    else:
        head = p ** n * expint_ei(-px) / (math.factorial(n) * (-1) ** n)
        s = math.fsum((-1) ** k * px ** k / _falling(n, k) for k in range(n))
        out = head - math.exp(-px) / x ** n * s
    if not math.isfinite(out):
        raise NumericError(f"f_antiderivative produced {out} at (n, p, x) = ({n}, {p}, {x})")
    return out
