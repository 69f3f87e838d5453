"""Exact truncated formal series in inverse powers of the variable.

A series is a finite list of Gaussian-rational coefficients ``a[n]`` for the
powers ``x**-n``, ``n = 0..order``, optionally preceded by a linear head term
``x``.  All arithmetic is exact: coefficients live in Q[i] (pairs of gmpy2
rationals), so any two runs of a pipeline produce bit-identical results.

The calculus implemented here is the usual one for asymptotic expansions at
infinity: sum, Cauchy product, long division, differentiation, composition of
an analytic germ with a small series, and substitution x -> x + (small), plus
a fixed-point solver for implicit equations of the form X = t + c * (f o X).

Truncation discipline: the order is fixed at construction and operations never
extend it.  Differentiation keeps the storage order but lowers a "valid order"
watermark by one, since the image of the highest stored coefficient falls off
the end; consumers that chain derivatives should over-provision the order.
"""

from __future__ import annotations

from gmpy2 import mpq

__all__ = [
    "GaussianRational",
    "FormalSeries",
    "SeriesError",
    "rational",
    "gauss",
    "taylor_stream",
    "add",
    "mul",
    "div",
    "derivative",
    "compose_analytic",
    "compose_shift",
    "fixed_point_solve",
]

_Q0 = mpq(0)
_Q1 = mpq(1)


class SeriesError(ValueError):
    """Raised when an operation's preconditions are violated."""


def rational(value, den=None):
    """Coerce to an exact rational (accepts ints, 'p/q' strings, mpq)."""
    if den is not None:
        return mpq(value, den)
    return mpq(value)


class GaussianRational:
    """An element of Q[i], held as an exact (re, im) pair."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    def __repr__(self):
        if not self.im:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, type(_Q0))):
            return self.re == other and not self.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __add__(self, other):
        other = _as_gauss(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        other = _as_gauss(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _as_gauss(other) - self

    def __mul__(self, other):
        other = _as_gauss(other)
        ar, ai, br, bi = self.re, self.im, other.re, other.im
        if not ai and not bi:
            return GaussianRational(ar * br)
        return GaussianRational(ar * br - ai * bi, ar * bi + ai * br)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_gauss(other)
        br, bi = other.re, other.im
        if not br and not bi:
            raise ZeroDivisionError("division by zero Gaussian rational")
        if not bi:
            return GaussianRational(self.re / br, self.im / br)
        d = br * br + bi * bi
        return GaussianRational(
            (self.re * br + self.im * bi) / d, (self.im * br - self.re * bi) / d
        )

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    @property
    def is_real(self):
        return not self.im

    @property
    def is_imaginary(self):
        return not self.re


def _as_gauss(value):
    if isinstance(value, GaussianRational):
        return value
    return GaussianRational(value)


def gauss(re, im=0):
    """Build a Gaussian rational from rational-like parts."""
    return GaussianRational(mpq(re), mpq(im))


_GZERO = GaussianRational()
_GONE = GaussianRational(1)


class FormalSeries:
    """Truncated series sum(a[n] x**-n, n=0..order), optionally headed by x.

    Instances are immutable.  ``valid`` is the watermark order up to which the
    stored coefficients are those of the untruncated object; it only drops
    below ``order`` through differentiation.
    """

    __slots__ = ("head", "coeffs", "order", "valid")

    def __init__(self, coeffs, head=False, valid=None):
        coeffs = tuple(_as_gauss(c) for c in coeffs)
        if not coeffs:
            raise SeriesError("a series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "head", bool(head))
        object.__setattr__(self, "order", len(coeffs) - 1)
        object.__setattr__(self, "valid", self.order if valid is None else min(valid, self.order))

    def __setattr__(self, name, value):
        raise AttributeError("FormalSeries is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, order):
        return cls([_GZERO] * (order + 1))

    @classmethod
    def one(cls, order):
        return cls([_GONE] + [_GZERO] * order)

    @classmethod
    def variable(cls, order):
        """The head-only series x."""
        return cls([_GZERO] * (order + 1), head=True)

    @classmethod
    def from_rationals(cls, values, order=None, head=False):
        coeffs = [_as_gauss(v) for v in values]
        if order is not None:
            if order + 1 < len(coeffs):
                raise SeriesError("more coefficients than the requested order")
            coeffs += [_GZERO] * (order + 1 - len(coeffs))
        return cls(coeffs, head=head)

    # -- inspection -----------------------------------------------------------

    @property
    def is_small(self):
        return not self.head and not self.coeffs[0]

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return (
            self.head == other.head
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.head, self.coeffs))

    def __repr__(self):
        parts = []
        if self.head:
            parts.append("x")
        for n, c in enumerate(self.coeffs):
            if not c:
                continue
            txt = str(c.re) if c.is_real else f"({c.re}{'+' if c.im >= 0 else ''}{c.im}i)"
            parts.append(txt if n == 0 else f"{txt}*x^-{n}")
            if len(parts) > 6:
                parts.append("...")
                break
        return "FormalSeries(" + (" + ".join(parts) if parts else "0") + f", order={self.order})"

    def coefficient(self, n):
        return self.coeffs[n]

    # -- arithmetic, as thin wrappers over the module functions ---------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, other.scale(gauss(-1)))

    def __mul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)

    def scale(self, factor):
        factor = _as_gauss(factor)
        return FormalSeries(
            [factor * c for c in self.coeffs], head=self.head, valid=self.valid
        )

    def conjugate(self):
        """Coefficientwise complex conjugate."""
        return FormalSeries(
            [c.conjugate() for c in self.coeffs], head=self.head, valid=self.valid
        )

    def truncate(self, order):
        if order > self.order:
            raise SeriesError("cannot extend a series by truncation")
        return FormalSeries(
            self.coeffs[: order + 1], head=self.head, valid=min(self.valid, order)
        )


# -- raw kernels on coefficient pair lists (hot paths stay allocation-light) --


def _pairs(series):
    return [(c.re, c.im) for c in series.coeffs]


def _wrap(pairs, head=False, valid=None):
    return FormalSeries(
        [GaussianRational(re, im) for re, im in pairs], head=head, valid=valid
    )


def _raw_mul(a, b, size):
    out = [(_Q0, _Q0)] * size
    for i, (ar, ai) in enumerate(a):
        if not ar and not ai:
            continue
        real_a = not ai
        top = size - i
        for j in range(min(top, len(b))):
            br, bi = b[j]
            if not br and not bi:
                continue
            if real_a:
                pr, pi = ar * br, ar * bi
            elif not bi:
                pr, pi = ar * br, ai * br
            else:
                pr, pi = ar * br - ai * bi, ar * bi + ai * br
            orr, oi = out[i + j]
            out[i + j] = (orr + pr, oi + pi)
    return out


def _raw_scale(a, sr, si):
    if not si:
        return [(sr * ar, sr * ai) for ar, ai in a]
    return [(sr * ar - si * ai, sr * ai + si * ar) for ar, ai in a]


def _raw_deriv(a, size):
    out = [(_Q0, _Q0)]
    for m in range(1, size):
        ar, ai = a[m - 1]
        k = mpq(-(m - 1))
        out.append((k * ar, k * ai))
    return out


# -- public operations --------------------------------------------------------


def add(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    """Coefficientwise sum; at most one operand may carry the head term."""
    if a.order != b.order:
        raise SeriesError(f"order mismatch: {a.order} != {b.order}")
    if a.head and b.head:
        raise SeriesError("cannot add two series that both carry the head term x")
    return FormalSeries(
        [x + y for x, y in zip(a.coeffs, b.coeffs)],
        head=a.head or b.head,
        valid=min(a.valid, b.valid),
    )


def mul(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    """Cauchy product truncated at the common order.  Heads must be absent."""
    if a.head or b.head:
        raise SeriesError("separate the head term before multiplying")
    if a.order != b.order:
        raise SeriesError(f"order mismatch: {a.order} != {b.order}")
    size = a.order + 1
    return _wrap(_raw_mul(_pairs(a), _pairs(b), size), valid=min(a.valid, b.valid))


def div(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    """Long division a/b; requires b invertible (nonzero constant term)."""
    if a.head or b.head:
        raise SeriesError("separate the head term before dividing")
    if a.order != b.order:
        raise SeriesError(f"order mismatch: {a.order} != {b.order}")
    if not b.coeffs[0]:
        raise SeriesError("divisor has zero constant term, not invertible")
    size = a.order + 1
    bp = _pairs(b)
    b0 = b.coeffs[0]
    rem = _pairs(a)
    out = []
    for k in range(size):
        qk = GaussianRational(*rem[k]) / b0
        out.append((qk.re, qk.im))
        if qk:
            qr, qi = qk.re, qk.im
            for j in range(1, size - k):
                br, bi = bp[j]
                if not br and not bi:
                    continue
                rr, ri = rem[k + j]
                rem[k + j] = (rr - (qr * br - qi * bi), ri - (qr * bi + qi * br))
    return _wrap(out, valid=min(a.valid, b.valid))


def derivative(a: FormalSeries) -> FormalSeries:
    """d/dx.  The head x maps to 1; x**-n maps to -n x**-(n+1).

    The image of the order-N coefficient lands at order N+1 and is dropped,
    so the valid-order watermark decreases by one.
    """
    size = a.order + 1
    out = _raw_deriv(_pairs(a), size)
    if a.head:
        r0, i0 = out[0]
        out[0] = (r0 + _Q1, i0)
    return _wrap(out, valid=a.valid - 1)


_TAYLOR_BUILTINS = {}


def _register(name):
    def deco(fn):
        _TAYLOR_BUILTINS[name] = fn
        return fn

    return deco


@_register("arctan")
def _arctan_taylor(k):
    if k % 2 == 0:
        return _GZERO
    return GaussianRational(mpq((-1) ** ((k - 1) // 2), k))


@_register("exp")
def _exp_taylor(k, _cache=[_Q1]):
    while len(_cache) <= k:
        _cache.append(_cache[-1] / len(_cache))
    return GaussianRational(_cache[k])


@_register("log1p")
def _log1p_taylor(k):
    if k == 0:
        return _GZERO
    return GaussianRational(mpq((-1) ** (k - 1), k))


@_register("sqrt1p")
def _sqrt1p_taylor(k, _cache=[_Q1]):
    # binomial(1/2, k)
    while len(_cache) <= k:
        n = len(_cache)
        _cache.append(_cache[-1] * (mpq(3, 2) - n) / n)
    return GaussianRational(_cache[k])


@_register("inv1p")
def _inv1p_taylor(k):
    return GaussianRational((-1) ** k)


def taylor_stream(spec):
    """Resolve a Taylor-coefficient stream: builtin name or callable k -> coeff."""
    if callable(spec):
        return spec
    try:
        return _TAYLOR_BUILTINS[spec]
    except KeyError:
        raise SeriesError(
            f"unknown analytic germ {spec!r}; builtins: {sorted(_TAYLOR_BUILTINS)}"
        ) from None


def compose_analytic(taylor, f: FormalSeries) -> FormalSeries:
    """Compose an analytic germ with a small series: sum(alpha_k f**k).

    ``taylor`` gives the germ's Maclaurin coefficients alpha_k.  Since f has
    no constant term, f**k has valuation >= k and the sum is finite at any
    truncation order.
    """
    if not f.is_small:
        raise SeriesError("compose_analytic needs a small series (no constant term)")
    taylor = taylor_stream(taylor)
    size = f.order + 1
    fp = _pairs(f)
    out = [(_Q0, _Q0)] * size
    a0 = _as_gauss(taylor(0))
    out[0] = (a0.re, a0.im)
    power = fp
    k = 1
    while k < size:
        ak = _as_gauss(taylor(k))
        if ak:
            ar, ai = ak.re, ak.im
            for m in range(k, size):
                pr, pi = power[m]
                if not pr and not pi:
                    continue
                orr, oi = out[m]
                out[m] = (orr + ar * pr - ai * pi, oi + ar * pi + ai * pr)
        k += 1
        if k < size:
            power = _raw_mul(power, fp, size)
    return _wrap(out, valid=f.valid)


def compose_shift(f2: FormalSeries, f1: FormalSeries) -> FormalSeries:
    """Substitute x -> x + f1 into f2, with f1 small.

    Taylor's theorem termwise: sum(f1**n / n! * f2^(n), n >= 0).  The n-th
    term has valuation >= n, which exactly compensates the n derivative
    levels consumed from f2, so the result is valid to min(f1.valid,
    f2.valid).
    """
    if not f1.is_small:
        raise SeriesError("compose_shift needs a small shift series")
    if f1.order != f2.order:
        raise SeriesError(f"order mismatch: {f2.order} != {f1.order}")
    size = f2.order + 1
    f1p = _pairs(f1)
    out = _pairs(f2)
    deriv = _pairs(f2)
    head_deriv = _Q1 if f2.head else None
    power = None
    fact = _Q1
    for n in range(1, size):
        deriv = _raw_deriv(deriv, size)
        if head_deriv is not None:
            # derivative of the head: contributes the constant 1 at n == 1
            dr, di = deriv[0]
            deriv[0] = (dr + head_deriv, di)
            head_deriv = None
        fact *= n
        power = f1p if n == 1 else _raw_mul(power, f1p, size)
        inv = _Q1 / fact
        term = _raw_mul(power, deriv, size)
        for m in range(n, size):
            tr, ti = term[m]
            if not tr and not ti:
                continue
            orr, oi = out[m]
            out[m] = (orr + inv * tr, oi + inv * ti)
    return _wrap(out, head=f2.head, valid=min(f1.valid, f2.valid))


def fixed_point_solve(phi: FormalSeries, factor) -> FormalSeries:
    """Solve X = t + factor * (phi o X) for X = t + (small part).

    Successive substitution starting from X = t; each pass freezes at least
    one further coefficient, so the iteration is stationary after at most
    order+1 passes.  Returns the head series X.
    """
    if not phi.is_small:
        raise SeriesError("fixed-point iteration needs a small right-hand side")
    factor = _as_gauss(factor)
    order = phi.order
    flat = FormalSeries.zero(order)
    for _ in range(order + 2):
        new = compose_shift(phi, flat).scale(factor)
        if new.coeffs == flat.coeffs:
            return FormalSeries(flat.coeffs, head=True, valid=phi.valid)
        flat = new
    raise SeriesError("fixed-point iteration failed to become stationary")
