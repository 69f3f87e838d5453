"""Convergent factorial-series summation of the position series.

The divergent expansion t + sum(c_n t**-n) is re-encoded, after scaling by a
parameter lambda in (0, 4/pi), as a factorial series

    t + lambda * sum_n  beta_n * n! / (lambda t (lambda t + 1) ... (lambda t + n)),

which converges absolutely for Re(t) large.  The beta_n come out of the
coefficients through the signed Stirling-number transform; they are computed
exactly in rationals because the transform cancels catastrophically in
floating point.  Two remainder estimates are provided: the practical one
calibrated against published reference runs, and the rigorous bound whose
growth constants A, B are caller-supplied.
"""

from __future__ import annotations

from functools import lru_cache

import mpmath
from gmpy2 import mpq, mpz

from .mp_numerics import NumericError, real_from_rational, with_bits
from .resurgent_airy import build_table

__all__ = [
    "StirlingTable",
    "FactorialCoefficients",
    "stirling_first",
    "beta_transform",
    "factorial_eval",
    "error_practical",
    "error_rigorous",
    "position_factorial_coefficients",
    "zero_by_factorial",
    "LAMBDA_DEFAULT",
]

LAMBDA_DEFAULT = mpq(6, 5)

# 60 decimal digits of pi, used only for the strict lambda < 4/pi check;
# conservative rounding: PI_LOW < pi < PI_HIGH.
_PI_60 = mpq(
    314159265358979323846264338327950288419716939937510582097494,
    10 ** 59,
)
_PI_LOW = _PI_60
_PI_HIGH = _PI_60 + mpq(1, 10 ** 59)


class StirlingTable:
    """Signed Stirling numbers of the first kind, s(n, k) for k <= n <= n_max.

    Row n satisfies prod_{j=0..n-1} (x - j) = sum_k s(n, k) x**k, with the
    recurrence s(n+1, k) = s(n, k-1) - n s(n, k).
    """

    __slots__ = ("rows", "n_max")

    def __init__(self, n_max: int):
        if n_max < 0:
            raise ValueError("need n_max >= 0")
        rows = [[mpz(1)]]
        for n in range(n_max):
            prev = rows[-1]
            row = [mpz(0)] * (n + 2)
            for k in range(n + 2):
                acc = prev[k - 1] if 1 <= k <= n else mpz(0)
                if k <= n:
                    acc = acc - n * prev[k]
                row[k] = acc
            rows.append(row)
        self.rows = tuple(tuple(r) for r in rows)
        self.n_max = n_max

    def value(self, n: int, k: int):
        if not (0 <= n <= self.n_max):
            raise ValueError(f"row {n} out of range")
        if k < 0 or k > n:
            return mpz(0)
        return self.rows[n][k]


@lru_cache(maxsize=8)
def stirling_first(n_max: int) -> StirlingTable:
    return StirlingTable(n_max)


class FactorialCoefficients:
    """The lambda-scaled factorial-series coefficients beta_n (exact)."""

    __slots__ = ("lam", "beta", "alpha0")

    def __init__(self, lam, beta, alpha0=mpq(0)):
        self.lam = mpq(lam)
        self.beta = tuple(mpq(b) for b in beta)
        self.alpha0 = mpq(alpha0)

    def __len__(self):
        return len(self.beta)


def _check_lambda(lam):
    lam = mpq(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    # strict lambda < 4/pi via conservative rational pi bounds
    if lam * _PI_HIGH < 4:
        return lam
    if lam * _PI_LOW >= 4:
        raise ValueError(f"lambda = {lam} is not below 4/pi")
    raise ValueError(
        f"lambda = {lam} is too close to 4/pi to certify with 60-digit bounds"
    )


def beta_transform(alpha, lam) -> FactorialCoefficients:
    """Stirling transform of coefficient list alpha (alpha[0] is the constant).

    First rescales alpha_k -> lam**(k-1) alpha_k, then applies
    beta_n = (1/n!) sum_{k=1..n+1} (-1)**(n-k+1) s(n, k-1) alpha_k,
    exactly in rationals.  Coefficients beyond the list are treated as
    unavailable, so len(beta) = len(alpha) - 1.
    """
    lam = _check_lambda(lam)
    alpha = [mpq(a) for a in alpha]
    n_beta = len(alpha) - 1
    table = stirling_first(max(n_beta - 1, 0))
    scaled = [alpha[k] * lam ** (k - 1) for k in range(len(alpha))]
    beta = []
    fact = mpq(1)
    for n in range(n_beta):
        if n > 0:
            fact *= n
        acc = mpq(0)
        row = table.rows[n]
        for k in range(1, n + 2):
            if k >= len(alpha):
                break
            s = row[k - 1]
            if s:
                acc += (mpq(-1) ** (n - k + 1)) * s * scaled[k]
        beta.append(acc / fact)
    return FactorialCoefficients(lam, beta, alpha0=alpha[0])


def factorial_eval(fc: FactorialCoefficients, t, n_trunc: int, p: int, head: bool = True):
    """Sum the factorial series at t through index n_trunc at p bits.

    Terms are accumulated in increasing n with the Pochhammer denominator
    carried as a running product (the recurrence form of pochhammer_ratio).
    Requires Re(t) > 0; convergence additionally needs Re(t) > max(B, 1/lam),
    which is the caller's lookout.
    """
    if n_trunc >= len(fc.beta):
        raise ValueError(
            f"truncation {n_trunc} needs beta up to {n_trunc}, have {len(fc.beta) - 1}"
        )
    with with_bits(p):
        t = mpmath.mpmathify(t)
        if mpmath.re(t) <= 0:
            raise NumericError("factorial series needs Re(t) > 0")
        lam = real_from_rational(fc.lam, p)
        acc = mpmath.mpf(0)
        ratio = 1 / (lam * t)  # pochhammer_ratio(lam t, 0)
        for n in range(n_trunc + 1):
            if n > 0:
                ratio = ratio * n / (lam * t + n)
            b = fc.beta[n]
            if b:
                acc += real_from_rational(b, p) * ratio
        value = lam * acc + real_from_rational(fc.alpha0, p)
        if head:
            value = t + value
        return value


def error_practical(fc: FactorialCoefficients, n_trunc: int, t, p: int):
    """Remainder scale of the truncated factorial series (per reference runs).

    |beta_{N+1}| (N+1)! / ( Re(t) * prod_{j=0..N} |lam t + j| ); the (N+1)!
    numerator (rather than N!) is what reproduces the published estimate
    columns.  Small-t runs should treat this as unreliable (see
    zero_by_factorial's flag).
    """
    if n_trunc + 1 >= len(fc.beta):
        raise ValueError(f"need beta[{n_trunc + 1}] for the estimate")
    with with_bits(p):
        t = mpmath.mpmathify(t)
        lam = real_from_rational(fc.lam, p)
        prod = mpmath.mpf(1)
        fact = mpmath.mpf(1)
        for j in range(n_trunc + 1):
            prod *= abs(lam * t + j)
            fact *= j + 1
        b = abs(real_from_rational(fc.beta[n_trunc + 1], p))
        return b * fact / (mpmath.re(t) * prod)


def error_rigorous(a_const, b_const, lam, n_trunc: int, t, p: int):
    """The a-priori remainder bound with caller-supplied growth constants.

    A / (lam B)**(lam B) * (N + lam B + 1)**(N + lam B + 1) / (N + 1)**N
    * | Gamma-ratio / (Re t - B) |, the Gamma ratio taken as a Pochhammer
    product.  Requires Re(t) > B.
    """
    lam = _check_lambda(lam)
    with with_bits(p):
        t = mpmath.mpmathify(t)
        a_const = mpmath.mpf(a_const)
        b_const = mpmath.mpf(b_const)
        if a_const <= 0 or b_const <= 0:
            raise ValueError("growth constants must be positive")
        if mpmath.re(t) <= b_const:
            raise NumericError("bound needs Re(t) > B")
        lamf = real_from_rational(lam, p)
        lb = lamf * b_const
        n = n_trunc
        lead = a_const / lb ** lb * (n + lb + 1) ** (n + lb + 1) / (n + 1) ** n
        prod = mpmath.mpf(1)
        fact = mpmath.mpf(1)
        for j in range(n + 1):
            prod *= abs(lamf * t + j)
            fact *= max(j, 1)
        return lead * fact / (prod * (mpmath.re(t) - b_const))


@lru_cache(maxsize=8)
def position_factorial_coefficients(order: int, lam_str: str = "6/5") -> FactorialCoefficients:
    """beta coefficients of the position series at the given order and lambda."""
    table = build_table(order)
    return beta_transform(list(table.c), mpq(lam_str))


def zero_by_factorial(l: int, n_trunc: int, lam, p: int, table_order=None):
    """Estimate the l-th Airy zero by factorial summation of the position series.

    Returns a ZeroEstimate carrying the x- and k-values, the k-space error
    estimate (remainder scale times |dk/dx| = (2/3) x**(-1/3)), and an
    "unreliable estimate" flag for small-t runs where the asymptotic remainder
    formula has no standing (heuristic lam * Re t < N).
    """
    from .results import ZeroEstimate

    if l < 1:
        raise ValueError("zero index starts at 1")
    lam = _check_lambda(lam)
    if table_order is None:
        table_order = max(n_trunc + 2, 24)
    fc = position_factorial_coefficients(table_order, str(lam))
    with with_bits(p):
        t = mpmath.mpf(3) / 2 * (l - mpmath.mpf(1) / 4) * mpmath.pi
        x = factorial_eval(fc, t, n_trunc, p)
        k = -(x ** (mpmath.mpf(2) / 3))
        jac = mpmath.mpf(2) / 3 * x ** (-mpmath.mpf(1) / 3)
        err = error_practical(fc, n_trunc, t, p) * jac
        lamf = real_from_rational(lam, p)
        unreliable = bool(lamf * mpmath.re(t) < n_trunc)
    return ZeroEstimate(
        l=l,
        t=t,
        method="factorial",
        params={
            "lambda": str(lam),
            "N": n_trunc,
            "error_estimate_unreliable": unreliable,
        },
        x=x,
        k=k,
        error_estimate=err,
        precision_bits=p,
    )
