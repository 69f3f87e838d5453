"""Hyperasymptotic evaluation of the position sum at levels 0, 1 and 2.

Level 0 is plain optimal truncation of t + sum(c_n / t**n).  Levels 1 and 2
re-expand the remainder over the adjacent singularities +-(4i/3) (and their
doubles at level 2) with numeric hyperterminants:

    F1(t; M, sigma)          = int_0^{inf e^{-i theta}} e^{-sigma tau} tau**(M-1) / (t - tau) dtau
    F2(t; M0, M1; s0, s1)    = the once-nested analogue with kernel
                               tau0**(M0-1) tau1**(M1-1) / ((t - tau0)(tau0 - tau1))

with theta = arg(sigma).  The inner tau1 integral of F2 is itself an F1
evaluated at complex argument, for which a closed form through the
exponential integral E1 exists; it is used only after a startup grid check
against direct quadrature.

Collinear F2 (both rays along the same direction) is defined as the limit of
rotating the outer ray off the inner one.  Because the rotated integrand is
analytic in the rotation angle, the limit can be taken two ways: Richardson
extrapolation over a geometric angle sequence (the definitional route, kept
for diagnostics and cross-checks) or a single quadrature along a contour
rotated by a fixed angle, justified by deforming the contour without crossing
the pole at t or the inner ray.  The rotated contour is the default: it is
exact, not extrapolated.
"""

from __future__ import annotations

from functools import lru_cache

import mpmath
from mpmath import mpc, mpf

from .mp_numerics import (
    NumericError,
    QuadratureError,
    digits_for_bits,
    real_from_rational,
    ray_quadrature,
    with_bits,
)
from .resurgent_airy import build_table

__all__ = [
    "TruncationPlan",
    "RealnessError",
    "optimal_plan",
    "level0_eval",
    "F1",
    "F1_closed",
    "F2",
    "collinear_epsilon_values",
    "level1_eval",
    "level2_eval",
    "zero_by_hyper",
    "default_tolerance",
    "sigma_value",
]

_SIGMA_KEYS = {"+1": (1, 1), "-1": (1, -1), "+2": (2, 1), "-2": (2, -1)}


class RealnessError(NumericError):
    """The assembled sum failed its realness bound (wrong branch or sign)."""


def sigma_value(k: int, sign: int, p: int) -> mpc:
    """The singularity value sign * (4 k / 3) i at p bits."""
    with with_bits(p):
        return mpc(0, sign * mpmath.mpf(4) * k / 3)


def default_tolerance(p: int) -> mpf:
    """Quadrature tolerance matched to the precision: 2**-(p/2 + 24)."""
    return mpmath.ldexp(1, -(p // 2 + 24))


class TruncationPlan:
    """Hyperasymptotic level and non-increasing truncation orders."""

    __slots__ = ("level", "orders")

    def __init__(self, level: int, orders):
        orders = tuple(int(n) for n in orders)
        if level not in (0, 1, 2):
            raise ValueError("level must be 0, 1 or 2")
        if len(orders) != level + 1:
            raise ValueError(f"level {level} needs {level + 1} truncation orders")
        if any(n < 1 for n in orders):
            raise ValueError("truncation orders must be >= 1")
        if any(a < b for a, b in zip(orders, orders[1:])):
            raise ValueError("truncation orders must be non-increasing")
        self.level = level
        self.orders = orders

    def __repr__(self):
        return f"TruncationPlan(level={self.level}, orders={self.orders})"

    def __eq__(self, other):
        return (
            isinstance(other, TruncationPlan)
            and self.level == other.level
            and self.orders == other.orders
        )


def optimal_plan(level: int, t, p: int = 64) -> TruncationPlan:
    """Truncation orders N_j = round((level + 1 - j) * (4/3) |t|).

    Round-to-nearest reproduces the published optimal choices (floor does
    not).  At level 0 the returned n keeps whatever parity rounding gives;
    the error estimate inside level0_eval skips to the first nonzero
    neglected coefficient, which handles the vanishing even-index terms.
    """
    with with_bits(p):
        at = abs(mpmath.mpmathify(t))
        if at <= 0:
            raise ValueError("need |t| > 0")
        base = mpmath.mpf(4) / 3 * at
        orders = [int(mpmath.nint((level + 1 - j) * base)) for j in range(level + 1)]
    orders = [max(n, 1) for n in orders]
    return TruncationPlan(level, orders)


def _partial_sum(table, t, upto, p):
    """t + sum_{n=1..upto} c_n / t**n at p bits (even-index terms vanish)."""
    if upto > table.order:
        raise ValueError(f"need coefficients to order {upto}, table has {table.order}")
    with with_bits(p):
        t = mpmath.mpmathify(t)
        acc = mpmath.mpf(0)
        tp = t
        for n in range(1, upto + 1):
            if table.c[n]:
                acc += real_from_rational(table.c[n], p) / tp
            tp *= t
        return t + acc


def level0_eval(table, t, n: int, p: int):
    """Optimally truncated sum and its remainder scale, both in the x variable.

    The error estimate is |c_m| / (|t|**(m-1) Re t) with m the first index
    past n carrying a nonzero coefficient (the even-index coefficients all
    vanish, so a printed odd n means m = n + 2).
    """
    if n < 0:
        raise ValueError("need n >= 0")
    m = n + 1
    while m <= table.order and not table.c[m]:
        m += 1
    if m > table.order:
        raise ValueError(f"error estimate needs a nonzero coefficient past n={n}")
    value = _partial_sum(table, t, n, p)
    with with_bits(p):
        t = mpmath.mpmathify(t)
        cm = abs(real_from_rational(table.c[m], p))
        err = cm / (abs(t) ** (m - 1) * mpmath.re(t))
    return value, err


# -- hyperterminants -----------------------------------------------------------


def F1_closed(t, M: int, sigma, p: int) -> mpc:
    """F1 through the exponential integral:

    F1 = -sum_{j=0..M-2} t**j (M-2-j)! / sigma**(M-1-j)
         - t**(M-1) e**(-sigma t) E1(-sigma t),

    valid for t off the integration ray (E1's cut is exactly that ray).
    """
    if M < 1:
        raise ValueError("need M >= 1")
    with with_bits(p):
        t = mpmath.mpmathify(t)
        sigma = mpmath.mpmathify(sigma)
        acc = mpc(0)
        tp = mpc(1)
        fact = [mpf(1)]
        for j in range(1, M):
            fact.append(fact[-1] * j)
        for j in range(M - 1):
            acc -= tp * fact[M - 2 - j] / sigma ** (M - 1 - j)
            tp *= t
        z = -sigma * t
        if mpmath.im(z) == 0 and mpmath.re(z) <= 0:
            raise NumericError("t lies on the integration ray")
        acc -= tp * mpmath.exp(-z) * mpmath.e1(z)
        return acc


def _f1_quad(t, M, sigma, tol, p):
    with with_bits(p + 16):
        t = mpmath.mpmathify(t)
        sigma = mpmath.mpmathify(sigma)
        theta = mpmath.arg(sigma)
        u = mpmath.exp(-1j * theta)
        absig = abs(sigma)
        hint = max((M - 1) / absig, 1 / absig)

        def f(x):
            return x ** (M - 1) / (t - x * u)

        val = ray_quadrature(f, absig, tol, p, scale_hint=hint)
        return u ** M * val


def F1(t, M: int, sigma, tol, p: int, method: str = "quad") -> mpc:
    """First hyperterminant.  method 'quad' (default) or 'closed'.

    The closed form is permitted as an optimization only because
    :func:`validate_f1_closed` checks it against quadrature on a grid; the
    nested F2 integrand relies on it at complex argument.
    """
    if M < 1:
        raise ValueError("need M >= 1")
    if method == "closed":
        return F1_closed(t, M, sigma, p)
    if method == "quad":
        return _f1_quad(t, M, sigma, tol, p)
    raise ValueError(f"unknown F1 method {method!r}")


@lru_cache(maxsize=8)
def validate_f1_closed(p: int) -> bool:
    """Grid check closed-form F1 against quadrature (20 points, incl. complex t).

    Covers the uses inside F2: real t for the outer terminant and complex
    off-ray t for the inner one.  Raises on any disagreement.
    """
    tol = default_tolerance(p)
    with with_bits(p + 16):
        pts = []
        for tv in (mpf(2), mpf(5), mpmath.mpf(33) * mpmath.pi / 8, mpf(40)):
            for M in (1, 2, 7):
                pts.append((tv, M))
        # complex arguments off the ray, as seen by the nested integrand
        for z in (
            mpc(3, -4),
            mpc(1, -9),
            mpc("0.5", "-0.2"),
            mpc(12, -1),
            mpc(2, 3),
            mpc(6, 11),
            mpc("0.1", "0.9"),
            mpc(20, 2),
        ):
            pts.append((z, 4))
        assert len(pts) == 20
        for k, (tv, M) in enumerate(pts):
            sigma = sigma_value(1, 1 if k % 2 == 0 else -1, p)
            if mpmath.im(tv) != 0 and mpmath.sign(mpmath.im(tv)) == mpmath.sign(mpmath.im(-sigma)):
                sigma = -sigma  # keep the point off the integration ray
            a = F1_closed(tv, M, sigma, p)
            b = _f1_quad(tv, M, sigma, tol, p)
            if abs(a - b) > 100 * tol * max(abs(a), mpf(1)):
                raise NumericError(
                    f"closed-form F1 failed validation at t={tv}, M={M}: "
                    f"|diff|={mpmath.nstr(abs(a - b), 5)}"
                )
    return True


def _f2_quad_along(t, M0, M1, sigma0, sigma1, tol, p, direction, inner):
    """Outer quadrature of the F2 kernel along the unit direction given.

    ``inner(tau0)`` supplies the tau1 integral.  The exponential factor is
    split into its modulus decay (handed to ray_quadrature) and a bounded
    oscillatory remainder kept inside the integrand.
    """
    with with_bits(p + 16):
        t = mpmath.mpmathify(t)
        u = direction
        s0u = sigma0 * u
        decay = mpmath.re(s0u)
        if decay <= 0:
            raise NumericError("outer contour leaves the decay half-plane")
        osc = mpc(0, -1) * mpmath.im(s0u)
        hint = max((M0 + M1) / decay, 1 / decay)

        def f(x):
            tau0 = x * u
            val = tau0 ** (M0 - 1) / (t - tau0) * inner(tau0)
            if osc:
                val *= mpmath.exp(osc * x)
            return val

        val = ray_quadrature(f, decay, tol, p, scale_hint=hint)
        return u * val


def _collinear(sigma0, sigma1, p) -> bool:
    with with_bits(p):
        return abs(mpmath.arg(sigma0 / sigma1)) < mpf(1) / 8


_ROTATION = mpf(1) / 2  # fixed contour rotation for collinear terminants


def _inner_closed(M1, sigma1, p):
    def inner(tau0):
        return F1_closed(tau0, M1, sigma1, p)

    return inner


def _inner_quad(M1, sigma1, tol, p):
    def inner(tau0):
        return _f1_quad(tau0, M1, sigma1, tol, p)

    return inner


def collinear_epsilon_values(t, M0, M1, sigma, p, eps_list, tol=None):
    """One-sided rotated values F2(sigma e^{-i eps}, sigma) for diagnostics.

    These are the members of the defining limit family: the outer ray is
    rotated by each eps toward the convention side and the exponent keeps
    pace, so each value is an honest hyperterminant of the rotated direction.
    """
    tol = default_tolerance(p) if tol is None else tol
    validate_f1_closed(p)
    out = []
    with with_bits(p + 16):
        sigma = mpmath.mpmathify(sigma)
        theta = mpmath.arg(sigma)
        for eps in eps_list:
            eps = mpf(eps)
            s0 = sigma * mpmath.exp(-1j * eps)
            direction = mpmath.exp(1j * (-theta + eps))
            out.append(
                _f2_quad_along(
                    t, M0, M1, s0, sigma, tol, p, direction, _inner_closed(M1, sigma, p)
                )
            )
    return out


def _f2_richardson(t, M0, M1, sigma, tol, p, eps0=None, max_steps=12):
    """Collinear F2 by Richardson (Neville) extrapolation of the eps family.

    The family is analytic in eps, so polynomial extrapolation on the
    geometric sequence eps0 / 2**k converges; the residual is the last
    Neville correction.  Returns (value, residual).
    """
    eps0 = mpf(1) / 16 if eps0 is None else mpf(eps0)
    with with_bits(p + 16):
        eps = [eps0 / 2 ** k for k in range(max_steps)]
        vals = []
        best = None
        resid = mpf("inf")
        for k in range(max_steps):
            vals.append(
                collinear_epsilon_values(t, M0, M1, sigma, p, [eps[k]], tol=tol)[0]
            )
            if k < 2:
                continue
            tab = list(vals)
            xs = eps[: k + 1]
            for col in range(1, len(tab)):
                tab = [
                    (xs[i] * tab[i + 1] - xs[i + col] * tab[i]) / (xs[i] - xs[i + col])
                    for i in range(len(tab) - 1)
                ]
            prev_best = best
            best = tab[0]
            if prev_best is not None:
                resid = abs(best - prev_best)
                if resid <= tol * max(abs(best), mpf(1)):
                    return best, resid
        return best, resid


def F2(t, M0: int, M1: int, sigma0, sigma1, tol, p: int, method: str = "auto") -> mpc:
    """Second hyperterminant.

    Non-collinear directions integrate directly (the kernel's tau0 - tau1
    denominator never vanishes off the origin).  Collinear directions use the
    one-sided limit convention; method 'rotated' (default under 'auto')
    evaluates it on a fixed rotated contour, 'richardson' extrapolates the
    defining eps family and raises if the residual exceeds tol.
    """
    if M0 < 1 or M1 < 1:
        raise ValueError("need M0, M1 >= 1")
    validate_f1_closed(p)
    with with_bits(p + 16):
        sigma0 = mpmath.mpmathify(sigma0)
        sigma1 = mpmath.mpmathify(sigma1)
        if not _collinear(sigma0, sigma1, p):
            if method not in ("auto", "direct", "nested"):
                raise ValueError("rotation methods apply to collinear directions only")
            theta0 = mpmath.arg(sigma0)
            direction = mpmath.exp(-1j * theta0)
            inner = (
                _inner_quad(M1, sigma1, tol, p)
                if method == "nested"
                else _inner_closed(M1, sigma1, p)
            )
            return _f2_quad_along(t, M0, M1, sigma0, sigma1, tol, p, direction, inner)
        if method in ("auto", "rotated"):
            theta0 = mpmath.arg(sigma0)
            direction = mpmath.exp(1j * (-theta0 + _ROTATION))
            return _f2_quad_along(
                t, M0, M1, sigma0, sigma1, tol, p, direction, _inner_closed(M1, sigma1, p)
            )
        if method == "richardson":
            value, resid = _f2_richardson(t, M0, M1, sigma0, tol, p)
            if not resid <= tol * max(abs(value), mpf(1)):
                raise QuadratureError(
                    f"eps extrapolation residual {mpmath.nstr(resid, 5)} above tolerance",
                    achieved=resid,
                )
            return value
        raise ValueError(f"unknown F2 method {method!r}")


# -- assembled level sums -------------------------------------------------------


def _gauss_to_mpc(g, p):
    return mpc(real_from_rational(g.re, p), real_from_rational(g.im, p))


def level1_eval(t, plan: TruncationPlan, table, tol, p: int, f1_method: str = "quad"):
    """First-level sum: partial series plus the adjacent-singularity correction.

    s = t + sum_{n<N0} c_n/t**n
        - (1/(2 i pi t**(N0-1))) sum_{n<N1} [ c+_n F1(t; N0-n, +) + c-_n F1(t; N0-n, -) ]

    The two families are conjugate for real t, so the total is real up to
    quadrature error; |Im|/|Re| beyond 10 tol raises RealnessError.
    """
    if plan.level != 1:
        raise ValueError("plan level must be 1")
    n0, n1 = plan.orders
    if table.order < max(n0 - 1, n1 - 1):
        raise ValueError("coefficient table too short for the plan")
    wp = p + 16
    with with_bits(wp):
        t = mpmath.mpmathify(t)
        partial = _partial_sum(table, t, n0 - 1, wp)
        sp = sigma_value(1, 1, wp)
        sm = sigma_value(1, -1, wp)
        corr = mpc(0)
        for n in range(n1):
            if table.c_plus[n]:
                corr += _gauss_to_mpc(table.c_plus[n], wp) * F1(t, n0 - n, sp, tol, wp, f1_method)
            if table.c_minus[n]:
                corr += _gauss_to_mpc(table.c_minus[n], wp) * F1(t, n0 - n, sm, tol, wp, f1_method)
        total = partial - corr / (2j * mpmath.pi * t ** (n0 - 1))
        _check_realness(total, tol, level=1)
        return total


def _check_realness(total, tol, level, t=None):
    im, re = abs(mpmath.im(total)), abs(mpmath.re(total))
    bound = 10 * mpf(tol) * re
    if level >= 2 and t is not None:
        # the one-sided collinear convention leaves a genuine imaginary
        # residue at the second-singularity exponential scale; a wrong branch
        # is orders of magnitude larger and still trips this
        bound = max(bound, re * mpmath.exp(-mpf(8) / 3 * mpmath.re(t)))
    if im > bound:
        raise RealnessError(
            f"level-{level} sum lost realness: |Im|/|Re| = {mpmath.nstr(im / re, 5)}"
        )


def level2_eval(
    t,
    plan: TruncationPlan,
    table,
    tol,
    p: int,
    f1_method: str = "quad",
    f2_method: str = "auto",
    batched: bool = True,
):
    """Second-level sum.

    Adds to the level-1 structure (run at orders N0, N1) the F1 terms at the
    doubled singularities, carrying half the repeated-direction second-level
    coefficients, and the four F2 families with arguments
    (N0 - N1 + 1, N1 - n) over the sign pairs.

    ``batched`` folds each F2 family's n-sum into a single outer quadrature
    (one E1 evaluation per node instead of one per term); it is checked
    against the per-term route in the test suite.
    """
    if plan.level != 2:
        raise ValueError("plan level must be 2")
    n0, n1, n2 = plan.orders
    if table.order < max(n0 - 1, n1 - 1, n2 - 1):
        raise ValueError("coefficient table too short for the plan")
    validate_f1_closed(p)
    wp = p + 16
    with with_bits(wp):
        t = mpmath.mpmathify(t)
        partial = _partial_sum(table, t, n0 - 1, wp)
        sp = sigma_value(1, 1, wp)
        sm = sigma_value(1, -1, wp)
        s2p = sigma_value(2, 1, wp)
        s2m = sigma_value(2, -1, wp)
        corr1 = mpc(0)
        for n in range(n1):
            if table.c_plus[n]:
                corr1 += _gauss_to_mpc(table.c_plus[n], wp) * F1(t, n0 - n, sp, tol, wp, f1_method)
            if table.c_minus[n]:
                corr1 += _gauss_to_mpc(table.c_minus[n], wp) * F1(t, n0 - n, sm, tol, wp, f1_method)
        corr2 = mpc(0)
        for n in range(n2):
            if table.c_pp[n]:
                corr2 += _gauss_to_mpc(table.c_pp[n], wp) / 2 * F1(t, n0 - n, s2p, tol, wp, f1_method)
            if table.c_mm[n]:
                corr2 += _gauss_to_mpc(table.c_mm[n], wp) / 2 * F1(t, n0 - n, s2m, tol, wp, f1_method)
        m0 = n0 - n1 + 1
        families = (
            (table.c_pp, sp, sp),
            (table.c_pm, sp, sm),
            (table.c_mp, sm, sp),
            (table.c_mm, sm, sm),
        )
        nested = mpc(0)
        for coeffs, s0, s1 in families:
            if batched and f2_method in ("auto", "rotated"):
                nested += _f2_family_batched(t, m0, n1, n2, coeffs, s0, s1, tol, wp)
            else:
                for n in range(n2):
                    if coeffs[n]:
                        nested += _gauss_to_mpc(coeffs[n], wp) * F2(
                            t, m0, n1 - n, s0, s1, tol, wp, f2_method
                        )
        total = (
            partial
            - (corr1 + corr2) / (2j * mpmath.pi * t ** (n0 - 1))
            + (-1 / (2j * mpmath.pi)) ** 2 / t ** (n0 - 1) * nested
        )
        _check_realness(total, tol, level=2, t=t)
        return total


def _f2_family_batched(t, m0, n1, n2, coeffs, sigma0, sigma1, tol, p):
    """sum_n coeffs[n] F2(t; m0, n1-n; sigma0, sigma1) as one outer quadrature.

    The inner F1 closed form is linear in its polynomial data, so the n-sum
    collapses to two fixed polynomials in tau0 (one bare, one multiplying
    e^{-sigma1 tau0} E1(-sigma1 tau0)) evaluated by Horner at each node.
    """
    with with_bits(p + 16):
        gam = [_gauss_to_mpc(coeffs[n], p + 16) for n in range(n2)]
        if not any(gam):
            return mpc(0)
        # poly_a[j] multiplies tau0**j; poly_b[k] multiplies tau0**k * E1-part
        fact = [mpf(1)]
        for j in range(1, n1 + 1):
            fact.append(fact[-1] * j)
        poly_a = [mpc(0)] * max(n1 - 1, 1)
        poly_b = [mpc(0)] * n1
        for n in range(n2):
            if not gam[n]:
                continue
            m1 = n1 - n
            for j in range(m1 - 1):
                poly_a[j] -= gam[n] * fact[m1 - 2 - j] / sigma1 ** (m1 - 1 - j)
            poly_b[m1 - 1] -= gam[n]

        def horner(poly, z):
            acc = mpc(0)
            for ck in reversed(poly):
                acc = acc * z + ck
            return acc

        collinear = _collinear(sigma0, sigma1, p)
        theta0 = mpmath.arg(sigma0)
        direction = mpmath.exp(1j * (-theta0 + (_ROTATION if collinear else 0)))

        def profile(tau0):
            z = -sigma1 * tau0
            return horner(poly_a, tau0) + horner(poly_b, tau0) * mpmath.exp(-z) * mpmath.e1(z)

        return _f2_quad_along(
            t, m0, max(n1, 1), sigma0, sigma1, tol, p, direction, profile
        )


def zero_by_hyper(l: int, level: int, p: int, tol=None, plan=None, table=None):
    """Estimate the l-th Airy zero by level-0/1/2 hyperasymptotics.

    The reported x is the real part of the assembled sum; k = -x**(2/3).
    The level-0 estimate carries the k-space remainder scale; levels 1 and 2
    report no estimate (true error against the oracle is attached by callers
    that want it).
    """
    from .results import ZeroEstimate

    if l < 1:
        raise ValueError("zero index starts at 1")
    if tol is None:
        tol = default_tolerance(p)
    with with_bits(p):
        t = mpmath.mpf(3) / 2 * (l - mpmath.mpf(1) / 4) * mpmath.pi
    if plan is None:
        plan = optimal_plan(level, t, p)
    if table is None:
        table = build_table(max(plan.orders[0] + 2, 24))
    err = None
    with with_bits(p + 16):
        if level == 0:
            x, err_x = level0_eval(table, t, plan.orders[0], p)
        elif level == 1:
            x = mpmath.re(level1_eval(t, plan, table, tol, p))
        elif level == 2:
            x = mpmath.re(level2_eval(t, plan, table, tol, p))
        else:
            raise ValueError("level must be 0, 1 or 2")
        k = -(x ** (mpmath.mpf(2) / 3))
        if level == 0:
            err = err_x * mpmath.mpf(2) / 3 * x ** (-mpmath.mpf(1) / 3)
    return ZeroEstimate(
        l=l,
        t=t,
        method=f"hyper{level}",
        params={"plan": list(plan.orders), "tol": mpmath.nstr(mpf(tol), 5)},
        x=x,
        k=k,
        error_estimate=err,
        precision_bits=p,
    )
