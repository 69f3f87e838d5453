"""Airy-specific exact series and the alien-derivative coefficient tables.

Everything here is exact rational/Gaussian-rational arithmetic built on
:mod:`airysum.exact_series`:

* the asymptotic coefficients ``a_n`` of the Airy expansion,
* the rotated series pair ``psi_ai``/``psi_bi`` and the odd phase series
  ``phi = arctan`` of their normalized difference/sum ratio,
* the implicit position series ``X(t) = t + 5/32 t^-1 - ...`` whose values at
  ``t_l = 3/2 (l - 1/4) pi`` locate the zeros of Ai,
* the first- and second-level alien derivatives of X, evaluated through their
  closed composite formulas, which feed the hyperasymptotic engine.

The second-level derivatives are cross-checked two ways wherever a closed
form in X', X'' exists; the table builder refuses to return a table that
violates any structural identity.
"""

from __future__ import annotations

from functools import lru_cache

from gmpy2 import mpq

from .exact_series import (
    FormalSeries,
    GaussianRational,
    SeriesError,
    add,
    compose_analytic,
    compose_shift,
    derivative,
    div,
    fixed_point_solve,
    gauss,
    mul,
)

__all__ = [
    "airy_coefficients",
    "psi_series",
    "ratio_series",
    "phi_series",
    "modulus_squared_series",
    "x_series",
    "alien_first",
    "alien_second",
    "AlienCoefficientTable",
    "build_table",
    "TableInvariantError",
]


class TableInvariantError(SeriesError):
    """A structural identity of the coefficient table failed."""


@lru_cache(maxsize=None)
def airy_coefficients(n_max: int):
    """Exact rationals a_0..a_n_max of the Airy asymptotic expansion.

    a_0 = 1 (the Gamma-product prefactor collapses by the reflection
    formula), and successive terms follow
    a_{n+1} = -(3/4) (n + 1/6)(n + 5/6) / (n + 1) * a_n.
    """
    if n_max < 0:
        raise ValueError("need n_max >= 0")
    out = [mpq(1)]
    for n in range(n_max):
        out.append(out[-1] * mpq(-3, 4) * (mpq(n) + mpq(1, 6)) * (mpq(n) + mpq(5, 6)) / (n + 1))
    return tuple(out)


_I_POWERS = (gauss(1), gauss(0, 1), gauss(-1), gauss(0, -1))


@lru_cache(maxsize=None)
def psi_series(order: int):
    """The pair of rotated asymptotic series (psi_ai, psi_bi).

    psi_ai has coefficients i**n a_n; psi_bi is its i -> -i mirror.  Both are
    invertible (constant term 1).
    """
    a = airy_coefficients(order)
    psi_ai = FormalSeries([_I_POWERS[n % 4] * a[n] for n in range(order + 1)])
    psi_bi = psi_ai.conjugate()
    return psi_ai, psi_bi


@lru_cache(maxsize=None)
def ratio_series(order: int) -> FormalSeries:
    """The small odd series s/r built from the odd/even split of the a_n.

    Numerator: sum over m >= 1 of (-1)**m a_{2m-1} x**(1-2m); denominator:
    sum over m >= 0 of (-1)**m a_{2m} x**(-2m).  The common phase prefactor
    of the two linear combinations cancels, so the ratio is real rational.
    """
    a = airy_coefficients(order)
    num = [mpq(0)] * (order + 1)
    den = [mpq(0)] * (order + 1)
    for m in range(order // 2 + 1):
        if 2 * m <= order:
            den[2 * m] = a[2 * m] * (-1) ** m
        k = 2 * m - 1
        if 1 <= k <= order:
            num[k] = a[k] * (-1) ** m
    return div(FormalSeries.from_rationals(num), FormalSeries.from_rationals(den))


@lru_cache(maxsize=None)
def phi_series(order: int) -> FormalSeries:
    """arctan of the ratio series: small, odd, real rational."""
    return compose_analytic("arctan", ratio_series(order))


@lru_cache(maxsize=None)
def modulus_squared_series(order: int) -> FormalSeries:
    """(psi_ai * psi_bi)**(1/2): real rational, constant term 1."""
    psi_ai, psi_bi = psi_series(order)
    prod = mul(psi_ai, psi_bi)
    small = add(prod, FormalSeries.one(order).scale(gauss(-1)))
    return compose_analytic("sqrt1p", small)


@lru_cache(maxsize=None)
def x_series(order: int) -> FormalSeries:
    """The position series X(t) = t + 5/32 t^-1 - 1255/6144 t^-3 + ...

    Unique formal solution of X = t + (3/2) phi o X; evaluated at
    t_l = 3/2 (l - 1/4) pi it gives the point x_l with Ai zero
    k_l = -x_l**(2/3).
    """
    return fixed_point_solve(phi_series(order), mpq(3, 2))


def _exp_of_multiple(scalar: GaussianRational, small: FormalSeries) -> FormalSeries:
    return compose_analytic("exp", small.scale(scalar))


def _flat(series: FormalSeries) -> FormalSeries:
    """Strip the head term, keeping the small part."""
    return FormalSeries(series.coeffs, head=False, valid=series.valid)


_OMEGA_IM = mpq(4, 3)  # the singularity spacing along the imaginary axis


@lru_cache(maxsize=None)
def _alien_parts(order: int):
    """Shared exact ingredients for the alien derivatives at a given order."""
    psi_ai, psi_bi = psi_series(order)
    ratio_p = div(psi_bi, psi_ai)
    ratio_m = div(psi_ai, psi_bi)
    x = x_series(order)
    flat_x = _flat(x)
    x1 = derivative(x)
    exp_m = _exp_of_multiple(gauss(0, -_OMEGA_IM), flat_x)
    exp_p = _exp_of_multiple(gauss(0, _OMEGA_IM), flat_x)
    return psi_ai, psi_bi, ratio_p, ratio_m, x, flat_x, x1, exp_m, exp_p


def alien_first(order: int):
    """First alien derivatives of X at the two adjacent singularities.

    Forward: (3/4) X' e^{-(4i/3) (X - t)} (psi_bi/psi_ai) o X; the backward
    one is its mirror and equals its coefficientwise negative (both real).
    Computed from x_series at order+1 to absorb the derivative loss.
    """
    _, _, ratio_p, ratio_m, _, flat_x, x1, exp_m, exp_p = _alien_parts(order + 1)
    fwd = mul(mul(x1, exp_m), compose_shift(ratio_p, flat_x)).scale(mpq(3, 4))
    bwd = mul(mul(x1, exp_p), compose_shift(ratio_m, flat_x)).scale(mpq(-3, 4))
    return fwd.truncate(order), bwd.truncate(order)


def _second_composite(order: int, forward: bool):
    """(Delta_{+-})^2 X through the composite product formula.

    The bracket is (9/16 X'' -+ 3/2 i (X')^2 +- 3/4 i X') (ratio^2 o X)
    + 9/8 (X')^2 ((ratio' ratio) o X), conjugate-symmetric between the two
    directions, times e^{-+(8i/3)(X - t)}.
    """
    _, _, ratio_p, ratio_m, _, flat_x, x1, _, _ = _alien_parts(order)
    ratio = ratio_p if forward else ratio_m
    sign = 1 if forward else -1
    x2 = derivative(x1)
    x1sq = mul(x1, x1)
    bracket = add(
        x2.scale(mpq(9, 16)),
        add(x1sq.scale(gauss(0, mpq(-3 * sign, 2))), x1.scale(gauss(0, mpq(3 * sign, 4)))),
    )
    term1 = mul(bracket, compose_shift(mul(ratio, ratio), flat_x))
    term2 = mul(
        x1sq.scale(mpq(9, 8)),
        compose_shift(mul(derivative(ratio), ratio), flat_x),
    )
    big_exp = _exp_of_multiple(gauss(0, -sign * 2 * _OMEGA_IM), flat_x)
    return mul(big_exp, add(term1, term2))


def _mixed_composite(order: int):
    """Backward-then-forward mixed derivative via the full product rule.

    Writing Y = Delta_+ X = (3/4) X' E (u o X) with E = e^{-(4i/3)(X-t)} and
    u = psi_bi/psi_ai, the backward derivative of each factor gives
    (3/4)[ (Ybar' + (4i/3) Ybar) E (u o X) - (4i/3) X' Ybar E (u o X)
           + X' E ( -i Ebar + Ybar (u' o X) ) ]
    where Ybar = Delta_- X and Ebar = 1/E.  Collapses to the closed form
    -(3/4) i X' - (9/16) X''.
    """
    _, _, ratio_p, ratio_m, _, flat_x, x1, exp_m, exp_p = _alien_parts(order)
    y_bwd = mul(mul(x1, exp_p), compose_shift(ratio_m, flat_x)).scale(mpq(-3, 4))
    u_of_x = compose_shift(ratio_p, flat_x)
    du_of_x = compose_shift(derivative(ratio_p), flat_x)
    i43 = gauss(0, mpq(4, 3))
    term_a = mul(add(derivative(y_bwd), y_bwd.scale(i43)), mul(exp_m, u_of_x))
    term_b = mul(mul(x1, y_bwd), mul(exp_m, u_of_x)).scale(gauss(0, mpq(-4, 3)))
    inner = add(exp_p.scale(gauss(0, -1)), mul(y_bwd, du_of_x))
    term_c = mul(mul(x1, exp_m), inner)
    return add(add(term_a, term_b), term_c).scale(mpq(3, 4))


def alien_second(order: int):
    """Second-level alien derivatives (fwd^2, bwd^2, bwd-fwd, fwd-bwd) of X.

    The two mixed derivatives are evaluated from their closed forms
    -+(3/4) i X' - (9/16) X'' and double-checked against the composite
    product-rule route; any disagreement raises.
    """
    parts = _alien_parts(order + 2)
    x1 = parts[6].truncate(order)
    x2 = derivative(parts[6]).truncate(order)
    sq_fwd = _second_composite(order + 2, forward=True).truncate(order)
    sq_bwd = _second_composite(order + 2, forward=False).truncate(order)
    mixed_bf = add(x1.scale(gauss(0, mpq(-3, 4))), x2.scale(mpq(-9, 16)))
    mixed_fb = add(x1.scale(gauss(0, mpq(3, 4))), x2.scale(mpq(-9, 16)))
    composite_bf = _mixed_composite(order + 2).truncate(order)
    if composite_bf.coeffs != mixed_bf.coeffs:
        raise TableInvariantError(
            "mixed alien derivative: composite route disagrees with the closed "
            "form -(3/4) i X' - (9/16) X''"
        )
    conj_fb = FormalSeries([c.conjugate() for c in composite_bf.coeffs])
    if conj_fb.coeffs != mixed_fb.coeffs:
        raise TableInvariantError(
            "mixed alien derivative: conjugate of the composite route disagrees "
            "with the closed form (3/4) i X' - (9/16) X''"
        )
    return sq_fwd, sq_bwd, mixed_bf, mixed_fb


class AlienCoefficientTable:
    """Exact coefficient lists feeding the hyperasymptotic expansions.

    Attributes
    ----------
    c : tuple of mpq
        Coefficients of the position series (head t implied, c[0] = 0).
    c_plus, c_minus : tuples of GaussianRational
        First-level alien coefficients at the forward/backward adjacent
        singularity.
    c_pp, c_mm, c_pm, c_mp : tuples of GaussianRational
        Second-level coefficients: repeated forward, repeated backward,
        forward-then-backward, backward-then-forward.
    order : int
    """

    __slots__ = ("c", "c_plus", "c_minus", "c_pp", "c_mm", "c_pm", "c_mp", "order")

    def __init__(self, c, c_plus, c_minus, c_pp, c_mm, c_pm, c_mp, order):
        self.c = tuple(c)
        self.c_plus = tuple(c_plus)
        self.c_minus = tuple(c_minus)
        self.c_pp = tuple(c_pp)
        self.c_mm = tuple(c_mm)
        self.c_pm = tuple(c_pm)
        self.c_mp = tuple(c_mp)
        self.order = order
        self.validate()

    def validate(self):
        """Check every structural identity; raise naming the first failure."""
        n = self.order
        for name, seq in (
            ("c", self.c),
            ("c_plus", self.c_plus),
            ("c_minus", self.c_minus),
            ("c_pp", self.c_pp),
            ("c_mm", self.c_mm),
            ("c_pm", self.c_pm),
            ("c_mp", self.c_mp),
        ):
            if len(seq) != n + 1:
                raise TableInvariantError(f"{name}: expected {n + 1} entries")
        for m, value in enumerate(self.c):
            if m % 2 == 0 and value:
                raise TableInvariantError(f"c[{m}]: even-index coefficient must vanish")
        for m in range(n + 1):
            cp, cm = self.c_plus[m], self.c_minus[m]
            if not cp.is_real or not cm.is_real:
                raise TableInvariantError(f"c_plus[{m}]/c_minus[{m}] must be real")
            if cp.re != -cm.re:
                raise TableInvariantError(f"c_plus[{m}] != -c_minus[{m}]")
            if m % 2 == 1 and cp:
                raise TableInvariantError(f"c_plus[{m}]: odd-index entry must vanish")
        for m in range(n + 1):
            if self.c_mm[m] != self.c_pp[m].conjugate():
                raise TableInvariantError(f"c_mm[{m}] != conj(c_pp[{m}])")
            if self.c_mp[m] != self.c_pm[m].conjugate():
                raise TableInvariantError(f"c_mp[{m}] != conj(c_pm[{m}])")
            # parity pattern of the repeated-direction series
            if m % 2 == 0 and self.c_pp[m].re:
                raise TableInvariantError(f"c_pp[{m}]: real part must vanish at even index")
            if m % 2 == 1 and self.c_pp[m].im:
                raise TableInvariantError(f"c_pp[{m}]: imaginary part must vanish at odd index")

    def to_jsonable(self):
        def q(x):
            return str(x)

        def g(x):
            return {"re": str(x.re), "im": str(x.im)}

        return {
            "order": self.order,
            "c": [q(x) for x in self.c],
            "c_plus": [g(x) for x in self.c_plus],
            "c_minus": [g(x) for x in self.c_minus],
            "c_pp": [g(x) for x in self.c_pp],
            "c_mm": [g(x) for x in self.c_mm],
            "c_pm": [g(x) for x in self.c_pm],
            "c_mp": [g(x) for x in self.c_mp],
        }

    @classmethod
    def from_jsonable(cls, data):
        def g(d):
            return gauss(mpq(d["re"]), mpq(d["im"]))

        return cls(
            c=[mpq(s) for s in data["c"]],
            c_plus=[g(d) for d in data["c_plus"]],
            c_minus=[g(d) for d in data["c_minus"]],
            c_pp=[g(d) for d in data["c_pp"]],
            c_mm=[g(d) for d in data["c_mm"]],
            c_pm=[g(d) for d in data["c_pm"]],
            c_mp=[g(d) for d in data["c_mp"]],
            order=data["order"],
        )


@lru_cache(maxsize=None)
def build_table(order: int) -> AlienCoefficientTable:
    """Assemble and validate the full coefficient table at the given order.

    Internally requests the position series two orders higher so the two
    derivative levels consumed by the second-level formulas stay inside the
    valid watermark.
    """
    x = x_series(order + 2)
    c = [x.coeffs[m].re for m in range(order + 1)]
    fwd, bwd = alien_first(order)
    sq_fwd, sq_bwd, mixed_bf, mixed_fb = alien_second(order)
    return AlienCoefficientTable(
        c=c,
        c_plus=fwd.coeffs,
        c_minus=bwd.coeffs,
        c_pp=sq_fwd.coeffs,
        c_mm=sq_bwd.coeffs,
        c_pm=mixed_bf.coeffs,
        c_mp=mixed_fb.coeffs,
        order=order,
    )
