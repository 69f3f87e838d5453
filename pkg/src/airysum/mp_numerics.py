"""Arbitrary-precision substrate: conversions, Pochhammer ratios, quadrature.

Values are mpmath ``mpf``/``mpc``; every public function takes the working
precision in bits explicitly and runs under a local precision context, so no
caller-visible global state is mutated.  Exact rationals enter the floating
world only through :func:`real_from_rational`, which rounds correctly at the
requested precision.

The quadrature is adaptive Gauss-Legendre on panels marching along the ray,
built for smooth integrands with a known exponential decay factor; panels are
accepted by comparing two rules of different degree and the tail is cut once
its analytic bound drops below tolerance.
"""

from __future__ import annotations

from functools import lru_cache

import mpmath
from mpmath import mp, mpc, mpf

__all__ = [
    "NumericError",
    "QuadratureError",
    "with_bits",
    "digits_for_bits",
    "real_from_rational",
    "complex_from_gaussian",
    "decimal_str",
    "parse_real",
    "pochhammer_ratio",
    "legendre_rule",
    "ray_quadrature",
]


class NumericError(ArithmeticError):
    """Numeric-layer failure (pole hit, invalid input)."""


class QuadratureError(NumericError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


def with_bits(p: int):
    """Local precision context: ``with with_bits(p): ...``"""
    if p < 8:
        raise NumericError(f"precision {p} bits is too small")
    return mp.workprec(p)


_LOG10_2 = 0.3010299956639812


def digits_for_bits(p: int) -> int:
    """Decimal digits carried by a p-bit float (used for all printing)."""
    return max(6, int(p * _LOG10_2))


def real_from_rational(q, p: int) -> mpf:
    """Correctly rounded p-bit value of an exact rational."""
    with with_bits(p):
        num = mpmath.mpmathify(int(q.numerator))
        den = mpmath.mpmathify(int(q.denominator))
        return num / den


def complex_from_gaussian(g, p: int) -> mpc:
    return mpc(real_from_rational(g.re, p), real_from_rational(g.im, p))


def decimal_str(x, p: int) -> str:
    """Decimal rendering with a digit count derived from the precision."""
    return mpmath.nstr(x, digits_for_bits(p), strip_zeros=False)


def parse_real(s: str, p: int) -> mpf:
    with with_bits(p):
        return mpf(s)


def pochhammer_ratio(z, n: int, p: int):
    """n! / prod_{j=0..n} (z + j), by running product (no Gamma evaluation).

    This is the Gamma-function ratio Gamma(z) n! / Gamma(z + n + 1) that the
    summation engines need, kept as a product so no special function is
    involved.  Raises if some z + j vanishes.
    """
    if n < 0:
        raise NumericError("need n >= 0")
    with with_bits(p):
        z = mpmath.mpmathify(z)
        if z == 0:
            raise NumericError("pochhammer_ratio pole at j = 0")
        acc = 1 / z
        for j in range(1, n + 1):
            d = z + j
            if d == 0:
                raise NumericError(f"pochhammer_ratio pole at j = {j}")
            acc = acc * j / d
        return acc


@lru_cache(maxsize=64)
def legendre_rule(n: int, p: int):
    """Nodes and weights of n-point Gauss-Legendre on [-1, 1] at p bits.

    Newton iteration on P_n from the Chebyshev-like initial guesses; the
    recurrence evaluation of (P_n, P_n') is standard.  Results are cached per
    (n, p) and returned as tuples, positive half mirrored.
    """
    with with_bits(p + 24):
        nodes = []
        weights = []
        for k in range(1, n // 2 + n % 2 + 1):
            x = mpmath.cos(mpmath.pi * (k - mpf(1) / 4) / (n + mpf(1) / 2))
            for _ in range(60):
                p0, p1 = mpf(1), x
                for j in range(2, n + 1):
                    p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x = x - dx
                if abs(dx) < mpmath.ldexp(1, -(p + 8)):
                    break
            p0, p1 = mpf(1), x
            for j in range(2, n + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = n * (x * p1 - p0) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            nodes.append(x)
            weights.append(w)
    xs = []
    ws = []
    for x, w in zip(nodes, weights):
        xs.append(-x)
        ws.append(w)
    middle = n % 2 == 1
    for i in range(len(nodes) - 1 - (1 if middle else 0), -1, -1):
        xs.append(nodes[i])
        ws.append(weights[i])
    return tuple(xs), tuple(ws)


def _panel(f, a, b, rule):
    xs, ws, half = rule
    mid = (a + b) / 2
    rad = (b - a) / 2
    acc = mpc(0)
    for x, w in zip(xs, ws):
        acc += w * f(mid + rad * x)
    return acc * rad


def ray_quadrature(
    f,
    decay,
    tol,
    p: int,
    scale_hint=None,
    low_rule: int = 24,
    high_rule: int = 40,
    max_depth: int = 24,
    max_panels: int = 4000,
):
    """integral_0^inf f(x) exp(-decay x) dx for smooth f of power-law growth.

    Marches panels outward from 0, bisecting each until two Gauss-Legendre
    rules of different degree agree to the local budget; the tail is truncated
    once panel contributions fall below tolerance past the integrand's bulk.
    ``scale_hint`` locates the bulk (e.g. (M-1)/decay for f ~ x**(M-1)) and
    only tunes the initial panel width.

    Returns the integral; raises :class:`QuadratureError` when the budget is
    unreachable, reporting the achieved error estimate.
    """
    wp = p + 16
    with with_bits(wp):
        decay = mpmath.mpmathify(decay)
        tol = mpf(tol)
        if decay <= 0:
            raise NumericError("decay rate must be positive")
        hint = mpf(scale_hint) if scale_hint else mpf(1) / decay
        lo = legendre_rule(low_rule, wp)
        hi = legendre_rule(high_rule, wp)
        rule_lo = (lo[0], lo[1], None)
        rule_hi = (hi[0], hi[1], None)

        def g(x):
            return f(x) * mpmath.exp(-decay * x)

        acc = mpc(0)
        err = mpf(0)
        # prime the magnitude scale from the bulk so the relative acceptance
        # test has a floor before any sizable panel has been summed
        scale = mpf(0)
        for probe_x in (hint / 2, hint, 2 * hint):
            if probe_x > 0:
                scale = max(scale, abs(g(probe_x)) * (hint + 1 / decay))
        panels = 0

        def refine(a, b, depth):
            nonlocal acc, err, scale, panels
            panels += 1
            if panels > max_panels:
                raise QuadratureError(
                    f"exceeded {max_panels} panels at x ~ {mpmath.nstr(a, 8)}",
                    achieved=err,
                )
            coarse = _panel(g, a, b, rule_lo)
            fine = _panel(g, a, b, rule_hi)
            diff = abs(fine - coarse)
            local_scale = max(scale, abs(fine))
            if diff <= tol * local_scale / 16 or diff <= mpmath.ldexp(1, -(p + 4)) * local_scale:
                acc += fine
                err += diff
                scale = max(scale, abs(acc))
                return
            if depth >= max_depth:
                raise QuadratureError(
                    f"panel [{mpmath.nstr(a, 8)}, {mpmath.nstr(b, 8)}] failed to "
                    f"converge (|diff| = {mpmath.nstr(diff, 5)})",
                    achieved=err + diff,
                )
            mid = (a + b) / 2
            refine(a, mid, depth + 1)
            refine(mid, b, depth + 1)

        width = max(hint / 4, mpf(1) / (4 * decay))
        x0 = mpf(0)
        quiet = 0
        while True:
            x1 = x0 + width
            before = acc
            refine(x0, x1, 0)
            contribution = abs(acc - before)
            x0 = x1
            if x0 > hint and scale > 0 and contribution < tol * scale / 16:
                quiet += 1
                # analytic tail bound: |f| is assumed monotone past the bulk
                tail = abs(f(x0)) * mpmath.exp(-decay * x0) / decay
                if quiet >= 2 and tail < tol * scale / 16:
                    break
            else:
                quiet = 0
            if x0 > hint:
                width *= 2
            if x0 > hint * 64 + 512 / decay:
                raise QuadratureError(
                    "tail failed to decay within the march limit", achieved=err
                )
        return +acc
