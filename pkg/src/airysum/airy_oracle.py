"""Independent high-precision Airy evaluator and zero finder.

This module is the validation anchor for the summation engines, so it shares
no machinery with them: Ai is evaluated by its Maclaurin series (the two
entire solutions f, g with simple term recurrences), the Gamma values at
thirds come from an argument-shifted Stirling series, and zeros are located
by bracketed bisection polished with Newton steps using the term-derivative
series for Ai'.

Cancellation control: for x < 0 the series terms grow to about
exp((2/3)|x|**1.5) before the sum collapses to O(1), so evaluation runs with
ceil(1.5 |x|**1.5 / ln 2) + 32 guard bits, comfortably above the loss.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mpf

from .mp_numerics import NumericError, with_bits

__all__ = [
    "OracleConfig",
    "gamma_one_third",
    "gamma_two_thirds",
    "airy_ai",
    "airy_ai_prime",
    "airy_ai_second",
    "airy_zero",
]

DOMAIN_LIMIT = 20  # |x| cap for series evaluation


@dataclass(frozen=True)
class OracleConfig:
    precision_bits: int = 256
    guard_bits: int = 32
    max_newton: int = 80

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ValueError("oracle needs at least 64 bits")


def _log_gamma_stirling(w, wp):
    """Stirling series for log Gamma at large positive w, terms to 2**-(wp+8)."""
    acc = (w - mpf(1) / 2) * mpmath.log(w) - w + mpmath.log(2 * mpmath.pi) / 2
    cutoff = mpmath.ldexp(1, -(wp + 8))
    w2 = w * w
    wpow = w
    for n in range(1, 400):
        term = mpmath.bernoulli(2 * n) / ((2 * n) * (2 * n - 1) * wpow)
        acc += term
        if abs(term) < cutoff:
            return acc
        wpow *= w2
    raise NumericError("Stirling series failed to reach tolerance")


def _gamma_shifted(z_num, z_den, p, shift=None):
    """Gamma(z) for small positive rational z via Gamma(z + k) / prod(z + j)."""
    wp = p + 48
    with with_bits(wp):
        z = mpf(z_num) / z_den
        # w large enough that the Stirling tail is far below 2**-(wp+8)
        target = int(0.18 * (wp + 16)) + 6
        k = shift if shift is not None else max(target, 12)
        lg = _log_gamma_stirling(z + k, wp)
        for j in range(k):
            lg -= mpmath.log(z + j)
        value = mpmath.exp(lg)
    with with_bits(p):
        return +value


@lru_cache(maxsize=32)
def gamma_one_third(p: int):
    """Gamma(1/3) at p bits, cross-checked at two Stirling shifts."""
    wp = p + 48
    a = _gamma_shifted(1, 3, wp)
    b = _gamma_shifted(1, 3, wp, shift=int(0.18 * (wp + 64)) + 14)
    with with_bits(wp):
        if abs(a - b) > mpmath.ldexp(1, -(p + 8)) * a:
            raise NumericError("Gamma(1/3): shift cross-check failed")
    with with_bits(p):
        return +a


@lru_cache(maxsize=32)
def gamma_two_thirds(p: int):
    return _gamma_shifted(2, 3, p)


def _series_parts(x, wp, derivative=0):
    """The two entire Airy building blocks and their term derivatives.

    f = sum 3**k (1/3)_k x**(3k) / (3k)!,  g = sum 3**k (2/3)_k x**(3k+1) / (3k+1)!;
    term ratios are x**3/((3k+2)(3k+3)) and x**3/((3k+3)(3k+4)).  ``derivative``
    0, 1 or 2 selects termwise d/dx applied that many times.
    """
    x3 = x ** 3
    tf = mpf(1)
    tg = x
    acc_f = mpf(0)
    acc_g = mpf(0)
    peak = mpf(1)
    cutoff = mpmath.ldexp(1, -(wp + 8))
    k = 0
    while True:
        ef = 3 * k
        eg = 3 * k + 1
        if derivative == 0:
            cf, cg = tf, tg
        elif derivative == 1:
            cf = tf * ef / x if ef else mpf(0)
            cg = tg * eg / x
        else:
            cf = tf * ef * (ef - 1) / (x * x) if ef >= 2 else mpf(0)
            cg = tg * eg * (eg - 1) / (x * x) if eg >= 2 else mpf(0)
        acc_f += cf
        acc_g += cg
        mag = max(abs(tf), abs(tg))
        peak = max(peak, mag)
        if mag < cutoff * peak and k > 2:
            return acc_f, acc_g
        tf = tf * x3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * x3 / ((3 * k + 3) * (3 * k + 4))
        k += 1
        if k > 20000:
            raise NumericError("Airy series failed to converge")


def _ai_eval(x, p, derivative=0):
    ax = abs(mpmath.mpf(x))
    if ax > DOMAIN_LIMIT:
        raise NumericError(f"|x| = {mpmath.nstr(ax, 6)} outside series domain")
    guard = int(mpmath.ceil(mpf("1.5") * ax ** mpf("1.5") / mpmath.log(2))) + 32
    wp = p + guard
    with with_bits(wp):
        x = mpmath.mpf(x)
        c1 = 3 ** (-mpf(2) / 3) / gamma_two_thirds(wp)
        c2 = 3 ** (-mpf(1) / 3) / gamma_one_third(wp)
        if x == 0:
            # series limits at 0 per term inspection
            vals = {0: (mpf(1), mpf(0)), 1: (mpf(0), mpf(1)), 2: (mpf(0), mpf(0))}
            f, g = vals[derivative]
        else:
            f, g = _series_parts(x, wp, derivative)
        value = c1 * f - c2 * g
    with with_bits(p):
        return +value


def airy_ai(x, p: int):
    """Ai(x) at p bits for |x| <= 20."""
    return _ai_eval(x, p, 0)


def airy_ai_prime(x, p: int):
    return _ai_eval(x, p, 1)


def airy_ai_second(x, p: int):
    """Termwise second derivative (independent of the ODE identity)."""
    return _ai_eval(x, p, 2)


@lru_cache(maxsize=64)
def airy_zero(l: int, p: int, config: OracleConfig = None):
    """The l-th negative zero of Ai at p bits (l <= 10 at this desk scale).

    Seeded by the crude large-index expansion, bracketed by expanding until a
    sign change, narrowed by bisection, finished by safeguarded Newton to
    p - 16 bits.
    """
    if l < 1:
        raise ValueError("zero index starts at 1")
    if l > 10:
        raise NumericError("series oracle is tuned for the first 10 zeros")
    cfg = config or OracleConfig(precision_bits=p)
    wp = p + cfg.guard_bits
    with with_bits(wp):
        t = mpf(3) / 2 * (l - mpf(1) / 4) * mpmath.pi
        seed = -((t + 5 / (32 * t)) ** (mpf(2) / 3))
        width = mpf(1) / 8
        lo, hi = seed - width, seed + width
        flo = airy_ai(lo, wp)
        fhi = airy_ai(hi, wp)
        for _ in range(40):
            if mpmath.sign(flo) != mpmath.sign(fhi):
                break
            width *= 2
            lo, hi = seed - width, seed + width
            flo = airy_ai(lo, wp)
            fhi = airy_ai(hi, wp)
        else:
            raise NumericError(f"bracket failure around seed {mpmath.nstr(seed, 12)}")
        # ensure the bracket contains only this zero: neighbours are > 1 apart
        for _ in range(30):
            mid = (lo + hi) / 2
            fmid = airy_ai(mid, wp)
            if mpmath.sign(fmid) == mpmath.sign(flo):
                lo, flo = mid, fmid
            else:
                hi, fhi = mid, fmid
        x = (lo + hi) / 2
        tol = mpmath.ldexp(1, -(p - 16)) * abs(x)
        for _ in range(cfg.max_newton):
            fx = airy_ai(x, wp)
            dfx = airy_ai_prime(x, wp)
            step = fx / dfx
            x_new = x - step
            if not lo <= x_new <= hi:
                # fall back to a bisection step, keeping the bracket
                if mpmath.sign(fx) == mpmath.sign(flo):
                    lo, flo = x, fx
                else:
                    hi, fhi = x, fx
                x_new = (lo + hi) / 2
            if abs(x_new - x) < tol:
                x = x_new
                break
            x = x_new
        else:
            raise NumericError(f"Newton failed to settle for zero {l}")
    with with_bits(p):
        return +x


def oracle_estimate(l: int, p: int):
    """Wrap the l-th oracle zero as a ZeroEstimate record."""
    from .results import ZeroEstimate

    k = airy_zero(l, p)
    with with_bits(p):
        t = mpf(3) / 2 * (l - mpf(1) / 4) * mpmath.pi
        x = (-k) ** (mpf(3) / 2)
    est = ZeroEstimate(
        l=l,
        t=t,
        method="oracle",
        params={},
        x=x,
        k=k,
        precision_bits=p,
    )
    est.oracle_k = k
    with with_bits(p):
        est.true_error = mpf(0)
    return est
