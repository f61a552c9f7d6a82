"""Exact truncated series arithmetic over the rationals.

Numbers are finite sums of rational coefficients times rational powers
of a positive infinitesimal generator t, ordered by their behavior as
t -> 0+: the sign of the lowest-order term decides comparisons, so t is
positive yet smaller than every positive rational. Arithmetic is exact
on rationals; products and inverses drop terms at or beyond the
truncation order and flag the loss. On top of the scalars: max-norm of
vectors, the interval-valued distance between finite point sets, and an
exact volume calculus for planar cells bounded by polynomials in one
variable with series coefficients.

Literal syntax: "3/2*t^(1/2) + t^2 - 5*t^(7/3)"; parse and print round
trip exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

TRUNC_DEFAULT = Fraction(8)


class PxError(ValueError):
    pass


def _norm_terms(pairs, T: Fraction):
    """Merge, drop zeros, sort by exponent, cut at T; returns (terms, cut)."""
    acc: dict = {}
    for e, c in pairs:
        acc[e] = acc.get(e, Fraction(0)) + c
    kept, cut = [], False
    for e in sorted(acc):
        c = acc[e]
        if c == 0:
            continue
        if e >= T:
            cut = True
            continue
        kept.append((e, c))
    return tuple(kept), cut


@dataclass(frozen=True)
class PuiseuxNumber:
    """Finite sum of c * t^e with rational c, e; exact below trunc_order."""

    terms: tuple  # ((exponent, coefficient), ...) strictly increasing exponents
    trunc_order: Fraction = TRUNC_DEFAULT
    truncated: bool = False

    def __post_init__(self):
        last = None
        for e, c in self.terms:
            if not isinstance(e, Fraction) or not isinstance(c, Fraction):
                raise PxError("terms must be Fraction pairs")
            if c == 0:
                raise PxError("zero coefficient stored")
            if last is not None and e <= last:
                raise PxError("exponents must strictly increase")
            if e >= self.trunc_order:
                raise PxError("term at or beyond the truncation order")
            last = e

    # equality is exact equality of stored terms; flags and cutoffs are
    # bookkeeping, not value
    def __eq__(self, other):
        return isinstance(other, PuiseuxNumber) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __str__(self):
        return px_print(self)

    def __repr__(self):
        return f"px({px_print(self)!r})"

    def is_zero(self) -> bool:
        return not self.terms

    def sign(self) -> int:
        if not self.terms:
            return 0
        return 1 if self.terms[0][1] > 0 else -1

    def leading(self):
        return self.terms[0] if self.terms else (None, Fraction(0))

    def as_fraction(self) -> Fraction:
        """The value when no t appears; errors otherwise."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and self.terms[0][0] == 0:
            return self.terms[0][1]
        raise PxError("not a rational constant")


def _mk(pairs, T=TRUNC_DEFAULT, truncated=False) -> PuiseuxNumber:
    terms, cut = _norm_terms(pairs, T)
    return PuiseuxNumber(terms, T, truncated or cut)


def px_const(q, T=TRUNC_DEFAULT) -> PuiseuxNumber:
    q = Fraction(q)
    return _mk([(Fraction(0), q)], T)


def px_t(exp=1, coef=1, T=TRUNC_DEFAULT) -> PuiseuxNumber:
    """coef * t^exp; px_t() is the infinitesimal generator itself."""
    return _mk([(Fraction(exp), Fraction(coef))], T)


PX_ZERO = px_const(0)
PX_ONE = px_const(1)


def px_add(x: PuiseuxNumber, y: PuiseuxNumber) -> PuiseuxNumber:
    T = min(x.trunc_order, y.trunc_order)
    return _mk(list(x.terms) + list(y.terms), T, x.truncated or y.truncated)


def px_neg(x: PuiseuxNumber) -> PuiseuxNumber:
    return PuiseuxNumber(tuple((e, -c) for e, c in x.terms), x.trunc_order, x.truncated)


def px_sub(x: PuiseuxNumber, y: PuiseuxNumber) -> PuiseuxNumber:
    return px_add(x, px_neg(y))


def px_mul(x: PuiseuxNumber, y: PuiseuxNumber) -> PuiseuxNumber:
    T = min(x.trunc_order, y.trunc_order)
    pairs = [(ex + ey, cx * cy) for ex, cx in x.terms for ey, cy in y.terms]
    return _mk(pairs, T, x.truncated or y.truncated)


def px_inv(x: PuiseuxNumber) -> PuiseuxNumber:
    """Multiplicative inverse via the geometric series of the unit part.

    Exact for monomials; otherwise the series is infinite, the result is
    cut at the truncation order and flagged. x * px_inv(x) == 1 holds up
    to that order (the self-check the tests lean on).
    """
    if x.is_zero():
        raise ZeroDivisionError("inverse of zero")
    T = x.trunc_order
    e0, c0 = x.terms[0]
    lead_inv = _mk([(-e0, 1 / c0)], T, False)
    if len(x.terms) == 1:
        return PuiseuxNumber(lead_inv.terms, T, x.truncated)
    # u = x / lead has the form 1 + r with r of strictly positive order
    u = px_mul(x, lead_inv)
    r = px_sub(u, PX_ONE)
    e_r = r.terms[0][0] if r.terms else None
    if e_r is None:
        return PuiseuxNumber(lead_inv.terms, T, True)
    out = PX_ONE
    power = PX_ONE
    k = 0
    while e_r * (k + 1) < T:
        k += 1
        power = px_mul(power, px_neg(r))
        out = px_add(out, power)
    res = px_mul(lead_inv, out)
    return PuiseuxNumber(res.terms, T, True)


def px_pow(x: PuiseuxNumber, n: int) -> PuiseuxNumber:
    if n < 0:
        return px_inv(px_pow(x, -n))
    out = PX_ONE
    for _ in range(n):
        out = px_mul(out, x)
    return out


def px_compare(x: PuiseuxNumber, y: PuiseuxNumber) -> str:
    """"<", "=", ">" by the sign of the lowest-order difference; "?" when
    the operands agree on every stored term but at least one was cut, so
    the tail could tip either way."""
    d = px_sub(x, y)
    if d.terms:
        return ">" if d.terms[0][1] > 0 else "<"
    if x.truncated or y.truncated:
        return "?"
    return "="


def px_lt(x, y) -> bool:
    return px_compare(x, y) == "<"


def px_le(x, y) -> bool:
    return px_compare(x, y) in ("<", "=")


def px_abs(x: PuiseuxNumber) -> PuiseuxNumber:
    return px_neg(x) if x.sign() < 0 else x


def px_max(x: PuiseuxNumber, y: PuiseuxNumber) -> PuiseuxNumber:
    """Ties and order-? cases return the first argument; for norms this
    is sound because both candidates agree on every reliable term."""
    return y if px_compare(x, y) == "<" else x


def px_norm(v) -> PuiseuxNumber:
    """Max norm of a vector of series scalars."""
    v = list(v)
    if not v:
        raise PxError("norm of empty vector")
    out = px_abs(v[0])
    for x in v[1:]:
        out = px_max(out, px_abs(x))
    return out


# ---------------------------------------------------------------------------
# parsing and printing


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def px_print(x: PuiseuxNumber) -> str:
    if not x.terms:
        return "0"
    parts = []
    for i, (e, c) in enumerate(x.terms):
        mag = abs(c)
        if e == 0:
            body = _frac_str(mag)
        else:
            if e == 1:
                tpart = "t"
            elif e.denominator == 1 and e >= 0:
                tpart = f"t^{e.numerator}"
            else:
                tpart = f"t^({_frac_str(e)})"
            body = tpart if mag == 1 else f"{_frac_str(mag)}*{tpart}"
        if i == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append((" + " if c > 0 else " - ") + body)
    return "".join(parts)


_TERM_RE = re.compile(
    r"^(?:(?P<coef>\d+(?:/\d+)?)\*?)?"
    r"(?:t(?:\^(?:(?P<eint>-?\d+)|\((?P<efrac>-?\d+(?:/\d+)?)\)))?)?$"
)


def px_parse(s: str, T=TRUNC_DEFAULT) -> PuiseuxNumber:
    src = s.strip()
    if src in ("0", "-0", "+0"):
        return PuiseuxNumber((), T, False)
    pairs = []
    for sign, chunk in _split_terms(src):
        chunk = chunk.replace(" ", "")
        m = _TERM_RE.match(chunk)
        if not m or not chunk:
            raise PxError(f"cannot parse term {chunk!r} in {s!r}")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if "t" in chunk:
            if m.group("eint") is not None:
                e = Fraction(m.group("eint"))
            elif m.group("efrac") is not None:
                e = Fraction(m.group("efrac"))
            else:
                e = Fraction(1)
        else:
            if m.group("coef") is None:
                raise PxError(f"cannot parse term {chunk!r} in {s!r}")
            e = Fraction(0)
        pairs.append((e, sign * coef))
    return _mk(pairs, T)


def _split_terms(src: str):
    """Yield (sign, chunk) at top-level +/- boundaries (parens protected)."""
    out = []
    depth = 0
    sign = 1
    cur = []
    for ch in src:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and not _inside_exponent(cur):
            if any(c.strip() for c in cur):
                out.append((sign, "".join(cur)))
                cur = []
                sign = 1
            if ch == "-":
                sign = -sign
            continue
        cur.append(ch)
    if any(c.strip() for c in cur):
        out.append((sign, "".join(cur)))
    if not out:
        raise PxError(f"empty literal {src!r}")
    return out


def _inside_exponent(cur) -> bool:
    # a sign directly after '^' belongs to a bare integer exponent
    tail = "".join(cur).rstrip()
    return tail.endswith("^")


# ---------------------------------------------------------------------------
# intervals, polynomials, cells


@dataclass(frozen=True)
class IntervalSubset:
    """{s : 0 <= s <= right_end} (or < when not closed)."""

    right_end: PuiseuxNumber
    closed: bool = True

    def __post_init__(self):
        if self.right_end.sign() < 0:
            raise PxError("interval right end must be >= 0")

    def __str__(self):
        close = "]" if self.closed else ")"
        return f"[0, {px_print(self.right_end)}{close}"


def px_dist_set(A, B) -> IntervalSubset:
    """Distance between finite sets of vectors: every s in the returned
    interval is at most |a - b| for all pairs, so the right end is the
    minimum pair distance under the max norm."""
    A, B = list(A), list(B)
    if not A or not B:
        raise PxError("sets must be nonempty")
    best = None
    for a in A:
        for b in B:
            if len(a) != len(b):
                raise PxError("dimension mismatch")
            d = px_norm([px_sub(ai, bi) for ai, bi in zip(a, b)])
            if best is None or px_compare(d, best) == "<":
                best = d
    return IntervalSubset(best, True)


@dataclass(frozen=True)
class PxPoly:
    """Polynomial in one variable with series coefficients, low power first."""

    coeffs: tuple  # PuiseuxNumber per power of x

    def __post_init__(self):
        for c in self.coeffs:
            if not isinstance(c, PuiseuxNumber):
                raise PxError("coefficients must be series scalars")

    def degree(self) -> int:
        for k in range(len(self.coeffs) - 1, -1, -1):
            if not self.coeffs[k].is_zero():
                return k
        return -1

    def __call__(self, x: PuiseuxNumber) -> PuiseuxNumber:
        out = PX_ZERO
        for c in reversed(self.coeffs):
            out = px_add(px_mul(out, x), c)
        return out

    def __sub__(self, other: "PxPoly") -> "PxPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [PX_ZERO] * (n - len(self.coeffs))
        b = list(other.coeffs) + [PX_ZERO] * (n - len(other.coeffs))
        return PxPoly(tuple(px_sub(x, y) for x, y in zip(a, b)))

    def __add__(self, other: "PxPoly") -> "PxPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [PX_ZERO] * (n - len(self.coeffs))
        b = list(other.coeffs) + [PX_ZERO] * (n - len(other.coeffs))
        return PxPoly(tuple(px_add(x, y) for x, y in zip(a, b)))

    def scale(self, q) -> "PxPoly":
        f = px_const(q) if not isinstance(q, PuiseuxNumber) else q
        return PxPoly(tuple(px_mul(f, c) for c in self.coeffs))

    def antiderivative(self) -> "PxPoly":
        out = [PX_ZERO]
        for k, c in enumerate(self.coeffs):
            out.append(px_mul(c, px_const(Fraction(1, k + 1))))
        return PxPoly(tuple(out))


def pxp_const(q) -> PxPoly:
    return PxPoly((q if isinstance(q, PuiseuxNumber) else px_const(q),))


def pxp_x() -> PxPoly:
    return PxPoly((PX_ZERO, PX_ONE))


def pxp_parse(s: str) -> PxPoly:
    """Polynomial literal in x with series-scalar coefficients, e.g.
    "t + x", "x^2 - 1/2*x", "(3/2*t^(1/2))*x"."""
    coeffs: dict = {}
    for sign, chunk in _split_terms(s.strip()):
        chunk = chunk.strip()
        if "x" in chunk:
            head, _, tail = chunk.partition("x")
            head = head.strip()
            if head.endswith("*"):
                head = head[:-1].strip()
            if head.startswith("(") and head.endswith(")"):
                head = head[1:-1]
            coef = px_parse(head) if head else PX_ONE
            tail = tail.strip()
            if tail.startswith("^"):
                k = int(tail[1:])
            elif tail == "":
                k = 1
            else:
                raise PxError(f"cannot parse power in {chunk!r}")
        else:
            coef = px_parse(chunk)
            k = 0
        if sign < 0:
            coef = px_neg(coef)
        coeffs[k] = px_add(coeffs.get(k, PX_ZERO), coef)
    n = max(coeffs) + 1 if coeffs else 1
    return PxPoly(tuple(coeffs.get(k, PX_ZERO) for k in range(n)))


@dataclass(frozen=True)
class CellForm2D:
    """Planar cell {(x, y): a1 < x < b1, psi(x) < y < phi(x)}.

    The strict lower<upper ordering is certified symbolically at the
    midpoint; the endpoints only need non-strict ordering (cells may
    pinch, like a triangle)."""

    a1: PuiseuxNumber
    b1: PuiseuxNumber
    psi: PxPoly
    phi: PxPoly

    def __post_init__(self):
        if px_compare(self.a1, self.b1) != "<":
            raise PxError("need a1 < b1")
        gap = self.phi - self.psi
        mid = px_mul(px_add(self.a1, self.b1), px_const(Fraction(1, 2)))
        if gap(mid).sign() <= 0:
            raise PxError("upper bound must exceed lower bound at the midpoint")
        for end in (self.a1, self.b1):
            if gap(end).sign() < 0:
                raise PxError("bounds cross at an endpoint")


def cell(a1, psi, b1, phi) -> CellForm2D:
    """Build a cell in the subscript order a1, psi, b1, phi; strings are
    parsed as literals, plain numbers as constants."""

    def scalar(v):
        if isinstance(v, PuiseuxNumber):
            return v
        return px_parse(v) if isinstance(v, str) else px_const(v)

    def poly(p):
        if isinstance(p, PxPoly):
            return p
        return pxp_parse(p) if isinstance(p, str) else pxp_const(p)

    return CellForm2D(scalar(a1), scalar(b1), poly(psi), poly(phi))


def px_vol_cell(c: CellForm2D) -> IntervalSubset:
    """Exact area of the cell as an interval [0, value]: the antiderivative
    of the gap polynomial evaluated between the endpoints."""
    F = (c.phi - c.psi).antiderivative()
    v = px_sub(F(c.b1), F(c.a1))
    if v.sign() < 0:
        raise PxError("negative volume: invalid cell")
    return IntervalSubset(v, True)


def px_vol_scaling_check(c: CellForm2D, factor) -> dict:
    """Scale the width of a constant-gap strip by a positive rational and
    confirm the exact volume ratio equals the factor.

    The strip is re-centered: with gap 2w, the scaled cell spans the
    center plus or minus factor*w. Non-strip cells (gap varies with x)
    are rejected.
    """
    factor = Fraction(factor)
    if factor <= 0:
        raise PxError("scaling factor must be positive")
    gap = c.phi - c.psi
    if gap.degree() > 0:
        raise PxError("scaling check needs a constant-gap strip")
    mid = c.psi + gap.scale(Fraction(1, 2))
    half_scaled = gap.scale(factor / 2)
    scaled = CellForm2D(c.a1, c.b1, mid - half_scaled, mid + half_scaled)
    v1 = px_vol_cell(c)
    v2 = px_vol_cell(scaled)
    expected = px_mul(px_const(factor), v1.right_end)
    exact = expected == v2.right_end
    return {
        "factor": factor,
        "vol_base": v1,
        "vol_scaled": v2,
        "ratio_exact": exact,
        "gap": gap.coeffs[0] if gap.coeffs else PX_ZERO,
    }
