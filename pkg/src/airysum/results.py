"""Result record for a computed Airy zero, with JSON/CSV serialization.

All numeric fields serialize as decimal strings at a digit count derived from
the record's precision (plus guard digits so a parse/print cycle is stable).
"""

from __future__ import annotations

import mpmath

from .mp_numerics import digits_for_bits, with_bits

__all__ = ["ZeroEstimate", "METHODS", "CSV_COLUMNS"]

METHODS = ("factorial", "hyper0", "hyper1", "hyper2", "oracle")

CSV_COLUMNS = (
    "l",
    "t",
    "method",
    "params",
    "x",
    "k",
    "error_estimate",
    "oracle_k",
    "true_error",
    "precision_bits",
)


def _num_str(x, p):
    # 3 guard digits keep print -> parse -> print a fixed point
    return mpmath.nstr(x, digits_for_bits(p) + 3)


class ZeroEstimate:
    """One computed zero: position value x, zero k = -x**(2/3), metadata."""

    __slots__ = (
        "l",
        "t",
        "method",
        "params",
        "x",
        "k",
        "error_estimate",
        "oracle_k",
        "true_error",
        "precision_bits",
    )

    def __init__(
        self,
        l,
        t,
        method,
        params,
        x,
        k,
        precision_bits,
        error_estimate=None,
        oracle_k=None,
        true_error=None,
    ):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        self.l = int(l)
        self.t = t
        self.method = method
        self.params = dict(params)
        self.x = x
        self.k = k
        self.error_estimate = error_estimate
        self.oracle_k = oracle_k
        self.true_error = true_error
        self.precision_bits = int(precision_bits)

    def attach_oracle(self, oracle_k):
        """Record the independent zero and the resulting true error."""
        self.oracle_k = oracle_k
        with with_bits(self.precision_bits):
            self.true_error = abs(self.k - oracle_k)
        return self

    def to_json_dict(self):
        p = self.precision_bits
        opt = lambda v: None if v is None else _num_str(v, p)
        return {
            "l": self.l,
            "t": _num_str(self.t, p),
            "method": self.method,
            "params": self.params,
            "x": _num_str(self.x, p),
            "k": _num_str(self.k, p),
            "error_estimate": opt(self.error_estimate),
            "oracle_k": opt(self.oracle_k),
            "true_error": opt(self.true_error),
            "precision_bits": p,
        }

    @classmethod
    def from_json_dict(cls, data):
        p = int(data["precision_bits"])
        with with_bits(p + 16):
            num = lambda s: None if s is None else mpmath.mpf(s)
            return cls(
                l=data["l"],
                t=num(data["t"]),
                method=data["method"],
                params=data["params"],
                x=num(data["x"]),
                k=num(data["k"]),
                error_estimate=num(data["error_estimate"]),
                oracle_k=num(data["oracle_k"]),
                true_error=num(data["true_error"]),
                precision_bits=p,
            )

    def csv_row(self):
        import json

        d = self.to_json_dict()
        row = []
        for col in CSV_COLUMNS:
            v = d[col]
            if col == "params":
                row.append(json.dumps(v, sort_keys=True))
            else:
                row.append("" if v is None else str(v))
        return row

    def text_lines(self):
        d = self.to_json_dict()
        lines = [f"zero #{self.l}  method={self.method}  precision={self.precision_bits} bits"]
        lines.append(f"  t  = {d['t']}")
        lines.append(f"  x  = {d['x']}")
        lines.append(f"  k  = {d['k']}")
        if d["error_estimate"] is not None:
            flag = " (unreliable at this t)" if self.params.get("error_estimate_unreliable") else ""
            lines.append(f"  error estimate = {d['error_estimate']}{flag}")
        if d["oracle_k"] is not None:
            lines.append(f"  oracle k       = {d['oracle_k']}")
            lines.append(f"  true error     = {d['true_error']}")
        if self.params:
            import json

            lines.append(f"  params = {json.dumps(self.params, sort_keys=True)}")
        return lines
