"""Bivariate polynomials and planar ODE systems dw/dz = P(z,w)/Q(z,w).

Supports ramified z-exponents (multiples of 1/nu) directly in the polynomial
type, so the iterated branch substitutions never rewrite z globally.  All
coefficients are exact: Fractions over the trivial tower, tower elements
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .exact import (
    ExtElem,
    Q,
    Tower,
    UniPoly,
    as_fraction,
    ensure_regular,
    f_is_zero,
    f_inv,
    field_one,
    field_zero,
    is_rational_value,
    sort_key,
    transport_elem,
)


class OdeError(Exception):
    """Invalid system or transform request."""


def _binomial(n, k):
    return math.comb(n, k)


class BiPoly:
    """Sparse exact polynomial in z and w; z-exponents are nonnegative
    rationals sharing the denominator ``ram``, w-exponents integers >= 0."""

    __slots__ = ("terms", "ram", "tower")

    def __init__(self, terms=None, ram=1, tower: Optional[Tower] = None):
        clean = {}
        if terms:
            for (ze, we), c in terms.items():
                if f_is_zero(c):
                    continue
                ze = Q(ze)
                clean[(ze, int(we))] = c
                ram = _lcm(ram, ze.denominator)
        self.terms = clean
        self.ram = ram
        self.tower = tower

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, tower=None):
        return cls({}, tower=tower)

    @classmethod
    def const(cls, c, tower=None):
        return cls({(Q(0), 0): c}, tower=tower)

    @classmethod
    def var_z(cls, tower=None):
        return cls({(Q(1), 0): field_one(tower)}, tower=tower)

    @classmethod
    def var_w(cls, tower=None):
        return cls({(Q(0), 1): field_one(tower)}, tower=tower)

    @classmethod
    def monomial(cls, c, ze, we, tower=None):
        return cls({(Q(ze), int(we)): c}, tower=tower)

    # -- queries -------------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def w_degree(self):
        return max((we for (_, we) in self.terms), default=-1)

    def z_degree(self):
        return max((ze for (ze, _) in self.terms), default=Q(-1))

    def total_degree(self):
        return max((ze + we for (ze, we) in self.terms), default=Q(-1))

    def w_parts(self):
        """Mapping w-power -> ascending list of (z-exponent, coefficient)."""
        parts = {}
        for (ze, we), c in self.terms.items():
            parts.setdefault(we, []).append((ze, c))
        for lst in parts.values():
            lst.sort(key=lambda t: t[0])
        return parts

    def coeff(self, ze, we):
        return self.terms.get((Q(ze), int(we)), field_zero(self.tower))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1]))

    # -- ring operations -------------------------------------------------------

    def _merge(self, other, sign):
        out = dict(self.terms)
        for key, c in other.terms.items():
            cur = out.get(key)
            nc = c if sign > 0 else -c
            out[key] = nc if cur is None else cur + nc
        return BiPoly(out, ram=_lcm(self.ram, other.ram), tower=self.tower or other.tower)

    def __add__(self, other):
        return self._merge(other, +1)

    def __sub__(self, other):
        return self._merge(other, -1)

    def __neg__(self):
        return BiPoly({k: -c for k, c in self.terms.items()}, ram=self.ram, tower=self.tower)

    def __mul__(self, other):
        if isinstance(other, BiPoly):
            out = {}
            for (z1, w1), c1 in self.terms.items():
                for (z2, w2), c2 in other.terms.items():
                    key = (z1 + z2, w1 + w2)
                    prod = c1 * c2
                    cur = out.get(key)
                    out[key] = prod if cur is None else cur + prod
            return BiPoly(out, ram=_lcm(self.ram, other.ram), tower=self.tower or other.tower)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c):
        return BiPoly({k: v * c for k, v in self.terms.items()}, ram=self.ram, tower=self.tower)

    def shift_z(self, delta):
        """Multiply by z^delta (delta may be any rational)."""
        delta = Q(delta)
        return BiPoly(
            {(ze + delta, we): c for (ze, we), c in self.terms.items()},
            ram=_lcm(self.ram, delta.denominator),
            tower=self.tower,
        )

    def diff_z(self):
        out = {}
        for (ze, we), c in self.terms.items():
            if ze == 0:
                continue
            out[(ze - 1, we)] = c * ze
        return BiPoly(out, ram=self.ram, tower=self.tower)

    def diff_w(self):
        out = {}
        for (ze, we), c in self.terms.items():
            if we == 0:
                continue
            out[(ze, we - 1)] = c * we
        return BiPoly(out, ram=self.ram, tower=self.tower)

    def z_valuation(self):
        """Lowest z-exponent carried by a unit coefficient; None if zero.

        Over a presumed-irreducible tower a zero-divisor coefficient aborts
        with TowerSplitError rather than returning a wrong valuation.
        """
        best = None
        for (ze, we), c in sorted(self.terms.items(), key=lambda kv: kv[0][0]):
            if best is not None and ze > best:
                break
            if not ensure_regular(c):
                best = ze
        return best

    # -- substitution ----------------------------------------------------------

    def subst_w_series(self, series: "BiPoly", with_remainder: bool):
        """Substitute w -> series(z) + w1 (or just series(z) if no remainder)."""
        tower = self.tower or series.tower
        max_w = self.w_degree()
        pows = [BiPoly.const(field_one(tower), tower=tower)]
        for _ in range(max(max_w, 0)):
            pows.append(pows[-1] * series)
        out = BiPoly.zero(tower)
        for (ze, we), c in self.terms.items():
            base = BiPoly.monomial(c, ze, 0, tower=tower)
            if with_remainder:
                acc = BiPoly.zero(tower)
                for j in range(we + 1):
                    piece = pows[we - j].scale(Q(_binomial(we, j)))
                    piece = BiPoly(
                        {(pze, j): pc for (pze, _), pc in piece.terms.items()},
                        tower=tower,
                    )
                    acc = acc + piece
                out = out + base * acc
            else:
                out = out + base * pows[we]
        return out

    def subst_affine(self, z_expr: "BiPoly", w_expr: "BiPoly"):
        """Substitute z -> z_expr, w -> w_expr (plain polynomials only)."""
        if self.ram != 1:
            raise OdeError("affine substitution requires integer exponents")
        tower = self.tower
        out = BiPoly.zero(tower)
        zpows = {0: BiPoly.const(field_one(tower), tower=tower)}
        wpows = {0: BiPoly.const(field_one(tower), tower=tower)}

        def power(cache, basep, n):
            if n not in cache:
                cache[n] = power(cache, basep, n - 1) * basep
            return cache[n]

        for (ze, we), c in self.terms.items():
            piece = power(zpows, z_expr, int(ze)) * power(wpows, w_expr, we)
            out = out + piece.scale(c)
        return out

    def eval_w_series(self, series: "BiPoly"):
        return self.subst_w_series(series, with_remainder=False)

    def map_tower(self, tower: Tower):
        return BiPoly(
            {k: tower.coerce(c) for k, c in self.terms.items()}, ram=self.ram, tower=tower
        )

    def transport(self, new_tower: Tower):
        return BiPoly(
            {
                k: transport_elem(c, new_tower) if isinstance(c, ExtElem) else c
                for k, c in self.terms.items()
            },
            ram=self.ram,
            tower=new_tower,
        )

    # -- printing / identity -----------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, BiPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda kv: kv[0])))

    def __repr__(self):
        return bipoly_str(self)


def _lcm(a, b):
    return a * b // math.gcd(a, b)


def bipoly_str(p: BiPoly, zvar="z", wvar="w") -> str:
    if p.is_zero():
        return "0"
    terms = sorted(p.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][1]))
    parts = []
    for (ze, we), c in terms:
        factors = []
        cs = str(c)
        neg = False
        if is_rational_value(c):
            cf = as_fraction(c)
            if cf < 0:
                neg = True
                cs = str(-cf)
            if abs(cf) == 1 and (ze, we) != (0, 0):
                cs = ""
        elif any(op in cs[1:] for op in "+-") or "*" in cs:
            cs = "(%s)" % cs
        if cs:
            factors.append(cs)
        if ze != 0:
            factors.append(zvar if ze == 1 else "%s^%s" % (zvar, _exp_str(ze)))
        if we != 0:
            factors.append(wvar if we == 1 else "%s^%d" % (wvar, we))
        if not factors:
            factors.append("1")
        text = "*".join(factors)
        parts.append(("- " if neg else "+ ") + text)
    out = " ".join(parts)
    if out.startswith("+ "):
        out = out[2:]
    elif out.startswith("- "):
        out = "-" + out[2:]
    return out


def _exp_str(e: Fraction) -> str:
    return str(e.numerator) if e.denominator == 1 else "(%s)" % e


# ---------------------------------------------------------------------------
# w-major view and bivariate gcd machinery (plain exponents)
# ---------------------------------------------------------------------------

def bipoly_to_wpoly(p: BiPoly):
    """List of UniPoly-in-z coefficients by ascending w-power (ram must be 1)."""
    if p.ram != 1:
        raise OdeError("w-major view requires integer exponents")
    tower = p.tower
    deg = p.w_degree()
    rows = [[] for _ in range(deg + 1)]
    maxz = {i: -1 for i in range(deg + 1)}
    for (ze, we), _ in p.terms.items():
        maxz[we] = max(maxz[we], int(ze))
    for we in range(deg + 1):
        coeffs = [field_zero(tower)] * (maxz[we] + 1)
        rows[we] = coeffs
    for (ze, we), c in p.terms.items():
        rows[we][int(ze)] = c
    return [UniPoly(r, var="z", tower=tower) for r in rows]


def wpoly_to_bipoly(rows, tower=None):
    terms = {}
    for we, row in enumerate(rows):
        for ze, c in enumerate(row.coeffs):
            if not f_is_zero(c):
                terms[(Q(ze), we)] = c
    return BiPoly(terms, tower=tower)


def _wpoly_degree(rows):
    d = -1
    for i, r in enumerate(rows):
        if not r.is_zero():
            d = i
    return d


def _wpoly_trim(rows):
    while rows and rows[-1].is_zero():
        rows.pop()
    return rows


def _wpoly_content(rows):
    g = None
    for r in rows:
        if r.is_zero():
            continue
        g = r if g is None else g.gcd(r)
        if g.degree() == 0:
            break
    return g


def _wpoly_scale(rows, zpoly):
    return [r * zpoly for r in rows]


def _wpoly_divide_content(rows, content):
    return [r.exact_div(content) if not r.is_zero() else r for r in rows]


def _wpoly_pseudo_divmod(num, den):
    """Pseudo-division in w over the z-polynomial ring: lc^e * num = q*den + r."""
    num = [r for r in num]
    dd = _wpoly_degree(den)
    lc = den[dd]
    q = [UniPoly([], var="z", tower=lc.tower) for _ in range(max(len(num) - dd, 1))]
    e = 0
    while True:
        dn = _wpoly_degree(num)
        if dn < dd or dn < 0:
            break
        head = num[dn]
        num = _wpoly_scale(num, lc)
        q = _wpoly_scale(q, lc)
        e += 1
        q[dn - dd] = q[dn - dd] + head
        for j in range(dd + 1):
            num[dn - dd + j] = num[dn - dd + j] - head * den[j]
        _wpoly_trim(num)
    return q, num, e


def _wpoly_prem_controlled(num, den):
    """A remainder of w-degree < deg(den), equal to the pseudo-remainder up to
    a z-polynomial factor; coefficient growth is held down by cancelling the
    head/leading gcd and stripping the content after every step.  Only valid
    for gcd computations."""
    num = [r for r in num]
    dd = _wpoly_degree(den)
    lc = den[dd]
    while True:
        dn = _wpoly_degree(num)
        if dn < dd or dn < 0:
            break
        head = num[dn]
        g = head.gcd(lc)
        if g.degree() > 0:
            scale_all = lc.exact_div(g)
            scale_head = head.exact_div(g)
        else:
            scale_all = lc
            scale_head = head
        num = [r * scale_all for r in num]
        for j in range(dd + 1):
            num[dn - dd + j] = num[dn - dd + j] - scale_head * den[j]
        _wpoly_trim(num)
        content = _wpoly_content(num)
        if content is not None and content.degree() > 0:
            num = _wpoly_divide_content(num, content)
    return num


def biv_gcd(a: BiPoly, b: BiPoly) -> BiPoly:
    """Primitive-PRS gcd of plain bivariate polynomials (monic-normalized)."""
    if a.is_zero():
        return _normalize_biv(b)
    if b.is_zero():
        return _normalize_biv(a)
    ra, rb = bipoly_to_wpoly(a), bipoly_to_wpoly(b)
    ca, cb = _wpoly_content(ra), _wpoly_content(rb)
    content = ca.gcd(cb)
    pa = _wpoly_divide_content(ra, ca)
    pb = _wpoly_divide_content(rb, cb)
    if _wpoly_degree(pa) < _wpoly_degree(pb):
        pa, pb = pb, pa
    while True:
        if _wpoly_degree(pb) < 0:
            g = pa
            break
        rem = _wpoly_prem_controlled(pa, pb)
        rem = _wpoly_trim(rem)
        if _wpoly_degree(rem) < 0:
            g = pb
            break
        cr = _wpoly_content(rem)
        rem = _wpoly_divide_content(rem, cr)
        pa, pb = pb, rem
    if _wpoly_degree(g) == 0:
        # gcd is a z-polynomial times the content
        result = wpoly_to_bipoly([content], tower=a.tower or b.tower)
    else:
        cg = _wpoly_content(g)
        g = _wpoly_divide_content(g, cg)
        g = [poly * content for poly in g]
        result = wpoly_to_bipoly(g, tower=a.tower or b.tower)
    return _normalize_biv(result)


def _normalize_biv(p: BiPoly) -> BiPoly:
    if p.is_zero():
        return p
    key = max(p.terms, key=lambda k: (k[1], k[0]))
    return p.scale(f_inv(p.terms[key]))


def bipoly_divexact(num: BiPoly, den: BiPoly) -> Optional[BiPoly]:
    """num / den when the division is exact, else None (plain exponents)."""
    if den.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if num.is_zero():
        return BiPoly.zero(num.tower or den.tower)
    rn, rd = bipoly_to_wpoly(num), bipoly_to_wpoly(den)
    dd = _wpoly_degree(rd)
    if dd == 0:
        zq = rd[0]
        out = []
        for r in rn:
            if r.is_zero():
                out.append(r)
                continue
            q, rem = r.divmod(zq)
            if not rem.is_zero():
                return None
            out.append(q)
        return wpoly_to_bipoly(out, tower=num.tower or den.tower)
    q, rem, e = _wpoly_pseudo_divmod(rn, rd)
    if _wpoly_degree(_wpoly_trim(rem)) >= 0:
        return None
    lc = rd[dd]
    scale = UniPoly([field_one(lc.tower)], var="z", tower=lc.tower)
    for _ in range(e):
        scale = scale * lc
    out = []
    for r in q:
        if r.is_zero():
            out.append(r)
            continue
        quo, rr = r.divmod(scale)
        if not rr.is_zero():
            return None
        out.append(quo)
    return wpoly_to_bipoly(out, tower=num.tower or den.tower)


# ---------------------------------------------------------------------------
# ODE systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeSystem:
    """dw/dz = P/Q with exact coefficients; P is the numerator."""

    P: BiPoly
    Q: BiPoly
    tower: Optional[Tower] = None
    axis_factor: Optional[BiPoly] = None  # when Q = z * axis_factor was declared

    def __post_init__(self):
        if self.P.is_zero() and self.Q.is_zero():
            raise OdeError("P and Q cannot both vanish")

    @property
    def ram(self):
        return _lcm(self.P.ram, self.Q.ram)

    def degree(self):
        """max of total degrees (plain systems)."""
        return int(max(self.P.total_degree(), self.Q.total_degree()))

    def w_degrees(self):
        return self.P.w_degree(), self.Q.w_degree()

    def map_tower(self, tower: Tower) -> "OdeSystem":
        return OdeSystem(
            self.P.map_tower(tower),
            self.Q.map_tower(tower),
            tower=tower,
            axis_factor=self.axis_factor.map_tower(tower) if self.axis_factor else None,
        )

    def transport(self, new_tower: Tower) -> "OdeSystem":
        return OdeSystem(
            self.P.transport(new_tower),
            self.Q.transport(new_tower),
            tower=new_tower,
            axis_factor=self.axis_factor.transport(new_tower) if self.axis_factor else None,
        )

    def normalized(self) -> "OdeSystem":
        """Shift both sides by a common z-power so the lowest exponent is 0."""
        vals = [ze for (ze, _) in self.P.terms] + [ze for (ze, _) in self.Q.terms]
        if not vals:
            return self
        low = min(vals)
        if low == 0:
            return self
        return OdeSystem(self.P.shift_z(-low), self.Q.shift_z(-low), tower=self.tower)


def make_system(P: BiPoly, Q: BiPoly, tower=None, check_coprime=True, axis_factor=None):
    """Validate and build a top-level system (plain exponents, coprime P, Q)."""
    if P.is_zero() or Q.is_zero():
        raise OdeError("P and Q must be nonzero")
    if check_coprime and P.ram == 1 and Q.ram == 1 and (tower is None or tower.is_trivial()):
        g = biv_gcd(P, Q)
        if g.total_degree() > 0:
            raise OdeError("P and Q share the common factor %s" % bipoly_str(g))
    return OdeSystem(P, Q, tower=tower, axis_factor=axis_factor)


# ---------------------------------------------------------------------------
# coefficient profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoeffProfile:
    """Leading z-data per w-power: k_i and p_{i,0} for P, l_i and q_{i,0} for Q.

    Absent powers are simply missing from the mappings (conceptually +inf).
    """

    p: dict
    q: dict

    def k(self, i):
        entry = self.p.get(i)
        return entry[0] if entry else None

    def el(self, i):
        entry = self.q.get(i)
        return entry[0] if entry else None


def _leading_entries(poly: BiPoly):
    out = {}
    for we, pairs in poly.w_parts().items():
        for ze, c in pairs:
            if not ensure_regular(c):
                out[we] = (ze, c)
                break
    return out


def coeff_profile(sys: OdeSystem) -> CoeffProfile:
    return CoeffProfile(p=_leading_entries(sys.P), q=_leading_entries(sys.Q))


# ---------------------------------------------------------------------------
# Puiseux branches
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PuiseuxBranch:
    """A partial local solution w = w0 + sum alpha_i (z - z0)^{mu_i}."""

    terms: tuple  # ((mu: Fraction, alpha), ...) strictly increasing mu
    ram: int
    base: tuple  # ("point", z0, w0) or ("inf", z0)
    conj_degree: int = 1
    status: str = "open"
    flags: tuple = ()

    def __post_init__(self):
        mus = [mu for mu, _ in self.terms]
        if any(m2 <= m1 for m1, m2 in zip(mus, mus[1:])):
            raise OdeError("branch exponents must increase strictly")
        if self.terms and f_is_zero(self.terms[0][1]):
            raise OdeError("leading branch coefficient must be nonzero")

    def truncated(self, n_terms: int) -> "PuiseuxBranch":
        return replace(self, terms=self.terms[:n_terms])

    def series(self, tower=None) -> BiPoly:
        t = tower
        return BiPoly({(mu, 0): c for mu, c in self.terms}, ram=self.ram, tower=t)

    def sort_token(self):
        if not self.terms:
            return (Q(0), (), ())
        mu0, a0 = self.terms[0]
        return (mu0,) + sort_key(a0)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mu, c in self.terms:
            cs = str(c)
            if not is_rational_value(c) and (any(op in cs[1:] for op in "+-") or "*" in cs):
                cs = "(%s)" % cs
            parts.append("%s*z^%s" % (cs, _exp_str(mu)))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# point transforms
# ---------------------------------------------------------------------------

def translate_point(sys: OdeSystem, z0, w0) -> OdeSystem:
    """Move the point (z0, w0) to the origin."""
    tower = sys.tower
    one = field_one(tower)
    z_expr = BiPoly({(Q(1), 0): one, (Q(0), 0): _coerce_scalar(tower, z0)}, tower=tower)
    w_expr = BiPoly({(Q(0), 1): one, (Q(0), 0): _coerce_scalar(tower, w0)}, tower=tower)
    return OdeSystem(
        sys.P.subst_affine(z_expr, w_expr), sys.Q.subst_affine(z_expr, w_expr), tower=tower
    )


def invert_at_infinity(sys: OdeSystem, z0=Q(0)) -> OdeSystem:
    """Move (z0, infinity) to the origin via wbar = 1/w.

    dwbar/dz = -wbar^2 F(z, 1/wbar); common monomial content (powers of z and
    wbar) is cancelled afterwards.
    """
    tower = sys.tower
    if not (isinstance(z0, (int, Fraction)) and Q(z0) == 0):
        sys = translate_point(sys, z0, field_zero(tower) if tower else Q(0))
        sys = OdeSystem(sys.P, sys.Q, tower=tower)
    D = max(sys.P.w_degree(), sys.Q.w_degree())
    newP = {}
    for (ze, we), c in sys.P.terms.items():
        key = (ze, D - we + 2)
        cur = newP.get(key)
        newP[key] = -c if cur is None else cur - c
    newQ = {}
    for (ze, we), c in sys.Q.terms.items():
        key = (ze, D - we)
        cur = newQ.get(key)
        newQ[key] = c if cur is None else cur + c
    Pb = BiPoly(newP, tower=tower)
    Qb = BiPoly(newQ, tower=tower)
    dz = min(min((ze for (ze, _) in Pb.terms), default=Q(0)), min((ze for (ze, _) in Qb.terms), default=Q(0)))
    dw = min(min((we for (_, we) in Pb.terms), default=0), min((we for (_, we) in Qb.terms), default=0))
    if dz or dw:
        Pb = BiPoly({(ze - dz, we - dw): c for (ze, we), c in Pb.terms.items()}, tower=tower)
        Qb = BiPoly({(ze - dz, we - dw): c for (ze, we), c in Qb.terms.items()}, tower=tower)
    return OdeSystem(Pb, Qb, tower=tower)


def shear_point(sys: OdeSystem, a, b, c, z0=Q(0), w0=Q(0)) -> OdeSystem:
    """W = a (w - w0) + b (z - z0), Z = c (z - z0); needs a, c nonzero."""
    a, b, c = Q(a), Q(b), Q(c)
    if a == 0 or c == 0:
        raise OdeError("degenerate shear")
    tower = sys.tower
    # inverse substitution: z = z0 + Z/c, w = w0 + W/a - (b/(a c)) Z
    z_expr = BiPoly(
        {(Q(1), 0): _frac_c(tower, Q(1) / c), (Q(0), 0): _coerce_scalar(tower, z0)},
        tower=tower,
    )
    w_expr = BiPoly(
        {
            (Q(0), 1): _frac_c(tower, Q(1) / a),
            (Q(1), 0): _frac_c(tower, -b / (a * c)),
            (Q(0), 0): _coerce_scalar(tower, w0),
        },
        tower=tower,
    )
    Ps = sys.P.subst_affine(z_expr, w_expr)
    Qs = sys.Q.subst_affine(z_expr, w_expr)
    newP = Ps.scale(_frac_c(tower, a)) + Qs.scale(_frac_c(tower, b))
    newQ = Qs.scale(_frac_c(tower, c))
    return OdeSystem(newP, newQ, tower=tower)


def transform_point(sys: OdeSystem, target) -> OdeSystem:
    """Dispatch: ("point", z0, w0), ("inf", z0) or ("shear", a, b, c, z0, w0)."""
    kind = target[0]
    if kind == "point":
        return translate_point(sys, target[1], target[2])
    if kind == "inf":
        return invert_at_infinity(sys, target[1])
    if kind == "shear":
        return shear_point(sys, *target[1:])
    raise OdeError("unknown transform target %r" % (target,))


def _coerce_scalar(tower, x):
    if isinstance(x, ExtElem):
        return x
    if tower is None or tower.is_trivial():
        return Q(x)
    return tower.from_fraction(Q(x))


def _frac_c(tower, q):
    return _coerce_scalar(tower, Q(q))


# ---------------------------------------------------------------------------
# branch substitution and the residual oracle
# ---------------------------------------------------------------------------

def substitute_branch(sys: OdeSystem, lam, alpha, check_acceptable=True) -> OdeSystem:
    """Remainder system for w1 after w = alpha z^lam + w1.

    Implements Q1(z,w1) = Q(z, alpha z^lam + w1) and
    P1(z,w1) = P(z, alpha z^lam + w1) - alpha lam z^(lam-1) Q(z, alpha z^lam + w1),
    then shifts the common z-power so all exponents are nonnegative.
    """
    lam = Q(lam)
    if lam <= 0:
        raise OdeError("branch exponent must be positive")
    if f_is_zero(alpha):
        raise OdeError("branch coefficient must be nonzero")
    tower = sys.tower
    lead = BiPoly({(lam, 0): alpha}, tower=tower)
    Q1 = sys.Q.subst_w_series(lead, with_remainder=True)
    Psub = sys.P.subst_w_series(lead, with_remainder=True)
    deriv_head = BiPoly({(lam - 1, 0): alpha * lam}, tower=tower)
    P1 = Psub - deriv_head * Q1
    if check_acceptable and not _pair_acceptable(sys, lam, alpha):
        raise OdeError("not an acceptable pair")
    out = OdeSystem(P1, Q1, tower=tower).normalized()
    return out


def _pair_acceptable(sys: OdeSystem, lam, alpha) -> bool:
    """(lam, alpha) is acceptable when the lowest supported z-order of
    Q(z, a z^l) a l z^(l-1) - P(z, a z^l) cancels strictly below the support
    minimum min{l_i + (i+1) lam - 1, k_j + j lam}."""
    profile = CoeffProfile(p=_leading_entries(sys.P), q=_leading_entries(sys.Q))
    v0 = None
    for j, (kj, _) in profile.p.items():
        cand = kj + j * lam
        v0 = cand if v0 is None else min(v0, cand)
    for i, (li, _) in profile.q.items():
        cand = li + (i + 1) * lam - 1
        v0 = cand if v0 is None else min(v0, cand)
    if v0 is None:
        return True
    lead = BiPoly({(Q(lam), 0): alpha}, tower=sys.tower)
    deriv_head = BiPoly({(Q(lam) - 1, 0): alpha * Q(lam)}, tower=sys.tower)
    residual = deriv_head * sys.Q.eval_w_series(lead) - sys.P.eval_w_series(lead)
    val = residual.z_valuation()
    return val is None or val > v0


def residual_valuation(sys: OdeSystem, branch: PuiseuxBranch, n_terms=None):
    """Exact valuation of Q(z,b) b' - P(z,b) for the truncated branch; None
    means the residual vanishes identically (an exact solution)."""
    b = branch if n_terms is None else branch.truncated(n_terms)
    if not b.terms:
        raise OdeError("empty branch")
    tower = sys.tower
    series = b.series(tower)
    dseries = BiPoly({(mu - 1, 0): c * mu for mu, c in b.terms}, tower=tower)
    residual = sys.Q.eval_w_series(series) * dseries - sys.P.eval_w_series(series)
    return residual.z_valuation()
