"""Exact arithmetic foundation.

Everything downstream computes over exact fields only: arbitrary-precision
rationals (``fractions.Fraction``), univariate polynomials over such a field,
and algebraic extension towers Q(t0)(t1)... driven by dynamic evaluation: a
modulus is adjoined as if irreducible, and any zero divisor discovered later
splits the tower into the two factor towers so the computation can be replayed
on each.  No floating point is used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

Q = Fraction

FieldElement = Union[Fraction, "ExtElem"]

#: primes used for modular irreducibility certification
_CERT_PRIMES = (7, 11, 13, 17, 19, 23, 29, 31)

DEFAULT_TOWER_CAP = 16
DEFAULT_FACTOR_CAP = 8
DEFAULT_KRONECKER_EFFORT = 20000


class ExactError(Exception):
    """Invalid request at the exact-arithmetic layer (bad adjoin, caps, ...)."""


class _SplitNeeded(Exception):
    """Internal: a presumed-irreducible modulus revealed a zero divisor.

    ``level`` is the 0-based tower level whose modulus factored, and ``g``,
    ``h`` are monic coefficient lists (over the sub-tower) with g*h = modulus.
    """

    def __init__(self, level, g, h):
        super().__init__("zero divisor at tower level %d" % level)
        self.level = level
        self.g = g
        self.h = h


class TowerSplitError(Exception):
    """A tower modulus factored mid-computation; replay on the factor towers.

    Carries the two factor towers plus the level index so callers can decide
    whether the split belongs to them or to an enclosing computation.
    """

    def __init__(self, tower, level, g, h):
        super().__init__("modulus of %s split at level %d" % (tower, level))
        self.tower = tower
        self.level = level
        self.g = g
        self.h = h

    def factor_towers(self):
        return split_tower(self.tower, self.level, self.g, self.h)


# ---------------------------------------------------------------------------
# rational predicates
# ---------------------------------------------------------------------------

def in_q_plus(x) -> bool:
    """Exact membership in Q+ (strictly positive rationals)."""
    if isinstance(x, ExtElem):
        if not x.is_rational():
            return False
        x = x.as_fraction()
    return x > 0


def in_q_minus(x) -> bool:
    """Exact membership in Q- (strictly negative rationals)."""
    if isinstance(x, ExtElem):
        if not x.is_rational():
            return False
        x = x.as_fraction()
    return x < 0


def as_fraction(x) -> Fraction:
    if isinstance(x, ExtElem):
        return x.as_fraction()
    return Fraction(x)


def is_rational_value(x) -> bool:
    return not isinstance(x, ExtElem) or x.is_rational()


# ---------------------------------------------------------------------------
# nested-representation helpers
#
# An element of a tower with levels L1..Lk is a tuple of length deg(Lk) whose
# entries are elements of the sub-tower L1..L(k-1); the base case is Fraction.
# All helpers below work on (levels, rep) pairs so they can recurse.
# ---------------------------------------------------------------------------

def _zero(levels):
    if not levels:
        return Q(0)
    return tuple(_zero(levels[:-1]) for _ in range(levels[-1].degree))


def _const(levels, q: Fraction):
    if not levels:
        return Q(q)
    sub = levels[:-1]
    return (_const(sub, q),) + tuple(_zero(sub) for _ in range(levels[-1].degree - 1))


def _is_zero(levels, a) -> bool:
    if not levels:
        return a == 0
    return all(_is_zero(levels[:-1], c) for c in a)


def _add(levels, a, b):
    if not levels:
        return a + b
    sub = levels[:-1]
    return tuple(_add(sub, x, y) for x, y in zip(a, b))


def _neg(levels, a):
    if not levels:
        return -a
    sub = levels[:-1]
    return tuple(_neg(sub, x) for x in a)


def _sub(levels, a, b):
    return _add(levels, a, _neg(levels, b))


def _scale(levels, a, q: Fraction):
    if not levels:
        return a * q
    sub = levels[:-1]
    return tuple(_scale(sub, x, q) for x in a)


def _mul_sub(sub, a, b):
    if not sub:
        return a * b
    return _mul(sub, a, b)


def _reduce_list(levels, coeffs):
    """Reduce a coefficient list modulo the top-level monic modulus."""
    level = levels[-1]
    sub = levels[:-1]
    d = level.degree
    m = level.minpoly  # monic, length d+1
    work = list(coeffs)
    for i in range(len(work) - 1, d - 1, -1):
        c = work[i]
        if _is_zero(sub, c):
            continue
        for j in range(d):
            work[i - d + j] = _sub(sub, work[i - d + j], _mul_sub(sub, c, m[j]))
        work[i] = _zero(sub)
    work = work[:d]
    while len(work) < d:
        work.append(_zero(sub))
    return tuple(work)


def _mul(levels, a, b):
    if not levels:
        return a * b
    sub = levels[:-1]
    d = levels[-1].degree
    prod = [_zero(sub) for _ in range(2 * d - 1)]
    for i, x in enumerate(a):
        if _is_zero(sub, x):
            continue
        for j, y in enumerate(b):
            if _is_zero(sub, y):
                continue
            prod[i + j] = _add(sub, prod[i + j], _mul_sub(sub, x, y))
    return _reduce_list(levels, prod)


def _polydeg(sub, coeffs):
    for i in range(len(coeffs) - 1, -1, -1):
        if not _is_zero(sub, coeffs[i]):
            return i
    return -1


def _polydivmod(sub, num, den):
    """Division with remainder of coefficient lists over the field below."""
    dd = _polydeg(sub, den)
    if dd < 0:
        raise ZeroDivisionError("polynomial division by zero")
    lead_inv = _inv(sub, den[dd])
    rem = list(num)
    dn = _polydeg(sub, rem)
    quot = [_zero(sub) for _ in range(max(dn - dd + 1, 0))]
    while dn >= dd:
        c = _mul_sub(sub, rem[dn], lead_inv)
        quot[dn - dd] = c
        for j in range(dd + 1):
            rem[dn - dd + j] = _sub(sub, rem[dn - dd + j], _mul_sub(sub, c, den[j]))
        dn = _polydeg(sub, rem)
    return quot, rem


def _inv(levels, a):
    """Exact inverse; raises _SplitNeeded when a zero divisor is found."""
    if not levels:
        if a == 0:
            raise ZeroDivisionError("division by zero")
        return Q(1) / a
    sub = levels[:-1]
    if _is_zero(levels, a):
        raise ZeroDivisionError("division by zero")
    level = levels[-1]
    # extended Euclid between the modulus and a
    r0 = list(level.minpoly)
    r1 = list(a)
    t0 = [_zero(sub)]
    t1 = [_const(sub, Q(1))]
    while _polydeg(sub, r1) >= 0:
        q, r = _polydivmod(sub, r0, r1)
        # t0 - q*t1
        prod = [_zero(sub) for _ in range(len(q) + len(t1) - 1)]
        for i, x in enumerate(q):
            if _is_zero(sub, x):
                continue
            for j, y in enumerate(t1):
                prod[i + j] = _add(sub, prod[i + j], _mul_sub(sub, x, y))
        t2 = [_zero(sub)] * max(len(t0), len(prod))
        for i in range(len(t2)):
            v = t0[i] if i < len(t0) else _zero(sub)
            w = prod[i] if i < len(prod) else _zero(sub)
            t2[i] = _sub(sub, v, w)
        r0, r1 = r1, r
        t0, t1 = t1, t2
    g_deg = _polydeg(sub, r0)
    if g_deg == 0:
        c_inv = _inv(sub, r0[0])
        inv_coeffs = [_mul_sub(sub, c, c_inv) for c in t0]
        return _reduce_list(levels, inv_coeffs)
    # nontrivial gcd: the modulus factors as g * h
    lead_inv = _inv(sub, r0[g_deg])
    g = [_mul_sub(sub, c, lead_inv) for c in r0[: g_deg + 1]]
    h, rem = _polydivmod(sub, list(level.minpoly), g)
    assert _polydeg(sub, rem) < 0
    raise _SplitNeeded(len(levels) - 1, tuple(g), tuple(h))


def _flatten(levels, a, out):
    if not levels:
        out.append(a)
        return
    for c in a:
        _flatten(levels[:-1], c, out)


# ---------------------------------------------------------------------------
# towers and their elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Level:
    name: str
    minpoly: tuple  # monic coefficient list (reps over the sub-tower)
    degree: int
    presumed: bool = False


class Tower:
    """An extension tower over Q; immutable.  The empty tower is Q itself."""

    __slots__ = ("levels", "cap", "_sig", "_hash")

    def __init__(self, levels=(), cap=DEFAULT_TOWER_CAP):
        self.levels = tuple(levels)
        self.cap = cap
        flat = []
        for lv in self.levels:
            part = []
            for c in lv.minpoly:
                _flatten(self.levels[: self.levels.index(lv)], c, part)
            flat.append((lv.name, lv.degree, tuple(part)))
        self._sig = tuple(flat)
        self._hash = hash(self._sig)

    def degree(self) -> int:
        d = 1
        for lv in self.levels:
            d *= lv.degree
        return d

    def is_trivial(self) -> bool:
        return not self.levels

    def signature(self):
        return self._sig

    def __eq__(self, other):
        return isinstance(other, Tower) and self._sig == other._sig

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.levels:
            return "Q"
        return "Q(" + ", ".join(lv.name for lv in self.levels) + ")"

    def zero(self) -> "ExtElem":
        return ExtElem(self, _zero(self.levels))

    def one(self) -> "ExtElem":
        return ExtElem(self, _const(self.levels, Q(1)))

    def from_fraction(self, q) -> "ExtElem":
        return ExtElem(self, _const(self.levels, Q(q)))

    def coerce(self, x) -> "ExtElem":
        if isinstance(x, ExtElem):
            if x.tower == self:
                return ExtElem(self, x.rep)
            n = len(x.tower.levels)
            if n < len(self.levels) and x.tower.signature() == Tower(self.levels[:n]).signature():
                rep = x.rep
                for depth in range(n, len(self.levels)):
                    pad = [_zero(self.levels[:depth])] * self.levels[depth].degree
                    pad[0] = rep
                    rep = tuple(pad)
                return ExtElem(self, rep)
            if x.is_rational():
                return self.from_fraction(x.as_fraction())
            raise ExactError("cannot coerce element of %r into %r" % (x.tower, self))
        return self.from_fraction(Q(x))

    def generator(self, index: int) -> "ExtElem":
        levels = self.levels
        if index < 0 or index >= len(levels):
            raise ExactError("no generator %d" % index)
        if levels[index].degree < 2:
            raise ExactError("generator %d has collapsed to a constant" % index)
        inner = list(_zero(levels[: index + 1]))
        inner[1] = _const(levels[:index], Q(1))
        inner = tuple(inner)
        for up in range(index + 1, len(levels)):
            outer = [_zero(levels[:up])] * levels[up].degree
            outer[0] = inner
            inner = tuple(outer)
        return ExtElem(self, inner)


QQ_TOWER = Tower(())


class ExtElem:
    """An element of an extension tower, in dense nested representation."""

    __slots__ = ("tower", "rep")

    def __init__(self, tower: Tower, rep):
        self.tower = tower
        self.rep = rep

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return _is_zero(self.tower.levels, self.rep)

    def is_rational(self) -> bool:
        def check(levels, a):
            if not levels:
                return True
            sub = levels[:-1]
            if not all(_is_zero(sub, c) for c in a[1:]):
                return False
            return check(sub, a[0])

        return check(self.tower.levels, self.rep)

    def as_fraction(self) -> Fraction:
        levels = self.tower.levels
        a = self.rep
        while levels:
            sub = levels[:-1]
            if not all(_is_zero(sub, c) for c in a[1:]):
                raise ExactError("element is not rational: %s" % self)
            a = a[0]
            levels = sub
        return a

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, ExtElem):
            if other.tower == self.tower:
                return other
            if other.is_rational():
                return self.tower.from_fraction(other.as_fraction())
            raise ExactError("tower mismatch: %r vs %r" % (self.tower, other.tower))
        if isinstance(other, (int, Fraction)):
            return self.tower.from_fraction(Q(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExtElem(self.tower, _add(self.tower.levels, self.rep, o.rep))

    __radd__ = __add__

    def __neg__(self):
        return ExtElem(self.tower, _neg(self.tower.levels, self.rep))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExtElem(self.tower, _sub(self.tower.levels, self.rep, o.rep))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExtElem(self.tower, _mul(self.tower.levels, self.rep, o.rep))

    __rmul__ = __mul__

    def inverse(self) -> "ExtElem":
        try:
            return ExtElem(self.tower, _inv(self.tower.levels, self.rep))
        except _SplitNeeded as exc:
            raise TowerSplitError(self.tower, exc.level, exc.g, exc.h) from None

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.tower.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.as_fraction() == other
        if isinstance(other, ExtElem):
            if other.tower == self.tower:
                return self.rep == other.rep
            if self.is_rational() and other.is_rational():
                return self.as_fraction() == other.as_fraction()
            return False
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.as_fraction())
        return hash((self.tower, self.rep))

    # -- ordering / printing --------------------------------------------------

    def sort_key(self):
        flat = []
        _flatten(self.tower.levels, self.rep, flat)
        return (self.tower.signature(), tuple(flat))

    def __repr__(self):
        return self._str(self.tower.levels, self.rep)

    @staticmethod
    def _str(levels, a):
        if not levels:
            return str(a)
        sub = levels[:-1]
        name = levels[-1].name
        parts = []
        for i, c in enumerate(a):
            if _is_zero(sub, c):
                continue
            cs = ExtElem._str(sub, c)
            if i == 0:
                parts.append(cs)
            else:
                power = name if i == 1 else "%s^%d" % (name, i)
                if cs == "1":
                    parts.append(power)
                elif cs == "-1":
                    parts.append("-" + power)
                elif any(op in cs[1:] for op in "+-") or "*" in cs:
                    parts.append("(%s)*%s" % (cs, power))
                else:
                    parts.append("%s*%s" % (cs, power))
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


def sort_key(x) -> tuple:
    """Deterministic sort key across Fractions and tower elements."""
    if isinstance(x, ExtElem):
        if x.is_rational():
            return ((), (x.as_fraction(),))
        return x.sort_key()
    return ((), (Q(x),))


def field_zero(tower: Optional[Tower]):
    return Q(0) if tower is None or tower.is_trivial() else tower.zero()


def field_one(tower: Optional[Tower]):
    return Q(1) if tower is None or tower.is_trivial() else tower.one()


def f_is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, ExtElem) else x == 0


def f_inv(x):
    if isinstance(x, ExtElem):
        return x.inverse()
    if x == 0:
        raise ZeroDivisionError("division by zero")
    return Q(1) / x


def ensure_regular(x) -> bool:
    """True for zero, False for a unit; raises TowerSplitError for a zero divisor.

    Leading-coefficient tests over a presumed-irreducible tower must go through
    here: a zero divisor means the computation differs between factor towers.
    """
    if f_is_zero(x):
        return True
    if isinstance(x, ExtElem) and not x.tower.is_trivial():
        x.inverse()  # raises TowerSplitError on a zero divisor
    return False


def bareiss_det(mat, divexact, zero, one):
    """Fraction-free determinant over an integral domain."""
    n = len(mat)
    if n == 0:
        return one
    m = [row[:] for row in mat]
    sign = 1
    prev = one
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = None
            for i in range(k + 1, n):
                if not m[i][k].is_zero():
                    swap = i
                    break
            if swap is None:
                return zero
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[k][k] * m[i][j] - m[i][k] * m[k][j]
                m[i][j] = divexact(num, prev)
            m[i][k] = zero
        prev = m[k][k]
    det = m[n - 1][n - 1]
    if sign < 0:
        det = -det
    return det


def value_charpoly(e: ExtElem):
    """Characteristic polynomial (in y over Q) of a single-level tower element;
    its roots with multiplicity are the values of e in the components of the
    modulus.  None when the tower is deeper than one level."""
    tower = e.tower
    if len(tower.levels) != 1:
        return None
    level = tower.levels[0]
    m_coeffs = [Q(c) for c in level.minpoly]
    e_coeffs = list(e.rep)
    # rows for m(x) (constants in y) and for y - e(x)
    zero = UniPoly([], var="y")
    one = UniPoly([Q(1)], var="y")
    c_coeffs = [UniPoly([-Q(c)], var="y") for c in e_coeffs]
    c_coeffs[0] = c_coeffs[0] + UniPoly([Q(0), Q(1)], var="y")
    while len(c_coeffs) > 1 and c_coeffs[-1].is_zero():
        c_coeffs.pop()
    dm = len(m_coeffs) - 1
    dc = len(c_coeffs) - 1
    if dc == 0:
        # e is a rational constant; charpoly is (y - e0)^dm
        out = UniPoly([Q(1)], var="y")
        root = c_coeffs[0]
        for _ in range(dm):
            out = out * root
        return out
    size = dm + dc
    mat = [[zero] * size for _ in range(size)]
    for i in range(dc):
        for j, c in enumerate(m_coeffs):
            mat[i][i + (dm - j)] = UniPoly([c], var="y")
    for i in range(dm):
        for j, c in enumerate(c_coeffs):
            mat[dc + i][i + (dc - j)] = c
    return bareiss_det(mat, lambda a, b: a.exact_div(b), zero, one)


def certified_is_rational(e) -> bool:
    """Rationality decided at the level of component values.

    Over a certified-irreducible tower the representation test is exact.  Over
    a presumed single-level modulus the element's characteristic polynomial is
    consulted: a rational value shared by only part of the components is a
    discovered factorization and raises TowerSplitError so the computation can
    be replayed per factor.
    """
    if not isinstance(e, ExtElem):
        return True
    if e.is_rational():
        return True
    tower = e.tower
    if not any(lv.presumed for lv in tower.levels):
        return False
    charpoly = value_charpoly(e)
    if charpoly is None:
        return False  # deeper presumed towers: representation-based fallback
    roots = rational_roots(charpoly)
    if not roots:
        return False
    # some component carries the rational value r while the element is not
    # uniformly r (moduli are squarefree, so a uniform value would make the
    # representation rational): the modulus factors along gcd(m, e - r)
    shifted = e - roots[0]
    try:
        _inv(tower.levels, shifted.rep)
    except _SplitNeeded as exc:
        raise TowerSplitError(tower, exc.level, exc.g, exc.h) from None
    raise ExactError(
        "characteristic polynomial root %s of %s did not induce a splitting"
        % (roots[0], e)
    )


# ---------------------------------------------------------------------------
# tower construction, splitting and element transport
# ---------------------------------------------------------------------------

def adjoin_root(tower: Tower, m: "UniPoly", name: Optional[str] = None):
    """Adjoin a root of the monic polynomial ``m`` over ``tower``.

    Returns (new tower, root element).  ``m`` must be monic of degree >= 2
    with no rational root; the resulting tower degree must stay under the cap.
    """
    if m.degree() < 2:
        raise ExactError("adjoin requires degree >= 2")
    lead = m.coeffs[-1]
    if not (lead == 1 or (isinstance(lead, ExtElem) and lead.is_rational() and lead.as_fraction() == 1)):
        raise ExactError("minimal polynomial must be monic")
    if all(is_rational_value(c) for c in m.coeffs):
        rat = UniPoly([as_fraction(c) for c in m.coeffs], var=m.var)
        if rational_roots(rat):
            raise ExactError("adjoin of reducible linear part")
    new_degree = tower.degree() * m.degree()
    if new_degree > tower.cap:
        raise ExactError("tower cap exceeded")
    if name is None:
        name = "t%d" % len(tower.levels)
    sub = tower.levels
    min_coeffs = []
    for c in m.coeffs:
        if isinstance(c, ExtElem):
            min_coeffs.append(tower.coerce(c).rep)
        else:
            min_coeffs.append(_const(sub, Q(c)))
    presumed = not getattr(m, "certified_irreducible", False)
    level = Level(name=name, minpoly=tuple(min_coeffs), degree=m.degree(), presumed=presumed)
    new_tower = Tower(sub + (level,), cap=tower.cap)
    root = new_tower.generator(len(sub))
    return new_tower, root


def split_tower(tower: Tower, level: int, g, h):
    """Split ``tower`` at ``level`` whose modulus factors as g * h (monic)."""

    def rebuild(factor):
        fac_deg = _polydeg(tower.levels[:level], list(factor))
        new_levels = list(tower.levels[:level])
        new_levels.append(
            Level(
                name=tower.levels[level].name,
                minpoly=tuple(factor),
                degree=fac_deg,
                presumed=tower.levels[level].presumed,
            )
        )
        for up in range(level + 1, len(tower.levels)):
            old = tower.levels[up]
            mapped = tuple(
                _transport(c, tower.levels[:up], tuple(new_levels)) for c in old.minpoly
            )
            new_levels.append(Level(name=old.name, minpoly=mapped, degree=old.degree, presumed=old.presumed))
        return Tower(tuple(new_levels), cap=tower.cap)

    return rebuild(g), rebuild(h)


def _transport(rep, old_levels, new_levels):
    if not old_levels:
        return rep
    sub_old = old_levels[:-1]
    sub_new = new_levels[:-1]
    coords = [_transport(c, sub_old, sub_new) for c in rep]
    if old_levels[-1].degree != new_levels[-1].degree:
        return _reduce_list(new_levels, coords)
    return tuple(coords)


def transport_elem(e: ExtElem, new_tower: Tower) -> ExtElem:
    """Map an element into a factor tower after a split (coordinate reduction)."""
    if e.tower == new_tower:
        return e
    return ExtElem(new_tower, _transport(e.rep, e.tower.levels, new_tower.levels))


@dataclass
class Inverse:
    value: ExtElem


@dataclass
class Split:
    towers: tuple
    level: int


def try_invert(e: ExtElem):
    """Invert exactly, or report the discovered factorization of a modulus."""
    if f_is_zero(e):
        raise ZeroDivisionError("division by zero")
    try:
        return Inverse(e.inverse())
    except TowerSplitError as exc:
        return Split(exc.factor_towers(), exc.level)


# ---------------------------------------------------------------------------
# univariate polynomials over a field
# ---------------------------------------------------------------------------

class UniPoly:
    """Dense univariate polynomial, ascending coefficients, over Q or a tower."""

    __slots__ = ("coeffs", "var", "tower", "certified_irreducible")

    def __init__(self, coeffs, var="x", tower: Optional[Tower] = None):
        coeffs = list(coeffs)
        while coeffs and f_is_zero(coeffs[-1]):
            coeffs.pop()
        self.coeffs = tuple(coeffs)
        self.var = var
        self.tower = tower
        self.certified_irreducible = False

    # -- constructors ---------------------------------------------------------

    @classmethod
    def const(cls, c, var="x", tower=None):
        return cls([c], var=var, tower=tower)

    @classmethod
    def monomial(cls, c, n, var="x", tower=None):
        return cls([field_zero(tower)] * n + [c], var=var, tower=tower)

    def _zero_c(self):
        return field_zero(self.tower)

    def _one_c(self):
        return field_one(self.tower)

    # -- basic queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    def leading(self):
        if not self.coeffs:
            raise ExactError("zero polynomial")
        return self.coeffs[-1]

    def __getitem__(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self._zero_c()

    def __eq__(self, other):
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(
            [self[i] + other[i] for i in range(n)], var=self.var, tower=self.tower
        )

    def __sub__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(
            [self[i] - other[i] for i in range(n)], var=self.var, tower=self.tower
        )

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs], var=self.var, tower=self.tower)

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            if self.is_zero() or other.is_zero():
                return UniPoly([], var=self.var, tower=self.tower)
            out = [self._zero_c()] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if f_is_zero(a):
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return UniPoly(out, var=self.var, tower=self.tower)
        return UniPoly([c * other for c in self.coeffs], var=self.var, tower=self.tower)

    __rmul__ = __mul__

    def scale(self, c):
        return UniPoly([a * c for a in self.coeffs], var=self.var, tower=self.tower)

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [self._zero_c()] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead_inv = f_inv(other.leading())
        d = other.degree()
        while len(rem) - 1 >= d and rem:
            while rem and f_is_zero(rem[-1]):
                rem.pop()
            if len(rem) - 1 < d:
                break
            c = rem[-1] * lead_inv
            k = len(rem) - 1 - d
            q[k] = c
            for j in range(d + 1):
                rem[k + j] = rem[k + j] - c * other.coeffs[j]
        return (
            UniPoly(q, var=self.var, tower=self.tower),
            UniPoly(rem, var=self.var, tower=self.tower),
        )

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other):
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ExactError("inexact polynomial division")
        return q

    def derivative(self):
        return UniPoly(
            [self.coeffs[i] * i for i in range(1, len(self.coeffs))],
            var=self.var,
            tower=self.tower,
        )

    def monic(self):
        if self.is_zero():
            return self
        return self.scale(f_inv(self.leading()))

    def eval(self, x):
        acc = self._zero_c() if not isinstance(x, ExtElem) else x.tower.zero()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def shift_var(self, a):
        """p(x + a)"""
        out = UniPoly([], var=self.var, tower=self.tower)
        xa = UniPoly([a, self._one_c()], var=self.var, tower=self.tower)
        power = UniPoly([self._one_c()], var=self.var, tower=self.tower)
        for c in self.coeffs:
            out = out + power.scale(c)
            power = power * xa
        return out

    def gcd(self, other):
        if (self.tower is None or self.tower.is_trivial()) and all(
            not isinstance(c, ExtElem) for c in self.coeffs + other.coeffs
        ):
            return _rational_gcd(self, other)
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        if a.is_zero():
            return a
        return a.monic()

    def squarefree_decomposition(self):
        """Yun's algorithm: returns [(monic squarefree factor, multiplicity)]."""
        if self.is_zero():
            raise ExactError("zero polynomial")
        p = self.monic()
        if p.degree() == 0:
            return []
        dp = p.derivative()
        g = p.gcd(dp)
        if g.degree() == 0:
            return [(p, 1)]
        out = []
        c = p.exact_div(g)
        d = dp.exact_div(g) - c.derivative()
        i = 1
        while c.degree() > 0:
            h = c.gcd(d)
            if h.degree() > 0:
                out.append((h.monic(), i))
            c_next = c.exact_div(h) if h.degree() > 0 else c
            d = (d.exact_div(h) if h.degree() > 0 else d) - c_next.derivative()
            c = c_next
            i += 1
        return out

    def squarefree_part(self):
        if self.is_zero():
            raise ExactError("zero polynomial")
        p = self.monic()
        if p.degree() == 0:
            return p
        g = p.gcd(p.derivative())
        if g.degree() == 0:
            return p
        return p.exact_div(g)

    def map_tower(self, tower: Tower) -> "UniPoly":
        return UniPoly([tower.coerce(c) for c in self.coeffs], var=self.var, tower=tower)

    def transport(self, new_tower: Tower) -> "UniPoly":
        return UniPoly(
            [transport_elem(c, new_tower) if isinstance(c, ExtElem) else c for c in self.coeffs],
            var=self.var,
            tower=new_tower,
        )

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if f_is_zero(c):
                continue
            cs = str(c)
            if i == 0:
                parts.append(cs)
                continue
            power = self.var if i == 1 else "%s^%d" % (self.var, i)
            if cs == "1":
                parts.append(power)
            elif cs == "-1":
                parts.append("-" + power)
            elif any(op in cs[1:] for op in "+-") or "*" in cs:
                parts.append("(%s)*%s" % (cs, power))
            else:
                parts.append("%s*%s" % (cs, power))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


def _int_content(ints):
    from math import gcd as igcd

    g = 0
    for v in ints:
        g = igcd(g, v)
        if g == 1:
            return 1
    return g or 1


def _int_primitive(ints):
    g = _int_content(ints)
    return ints if g == 1 else [v // g for v in ints]


def _int_poly_divexact(a, b):
    """Exact division in Z[x]; None when not divisible."""
    r = list(a)
    out = [0] * (len(a) - len(b) + 1)
    while r and len(r) >= len(b):
        if r[-1] == 0:
            r.pop()
            continue
        c, rem = divmod(r[-1], b[-1])
        if rem:
            return None
        off = len(r) - len(b)
        out[off] = c
        for j, bv in enumerate(b):
            r[off + j] -= c * bv
        while r and r[-1] == 0:
            r.pop()
    if r:
        return None
    return out


def _int_eval(ints, x):
    acc = 0
    for c in reversed(ints):
        acc = acc * x + c
    return acc


def _heuristic_int_gcd(a, b):
    """GCDHEU: evaluate at a large point, take the integer gcd, reconstruct
    with balanced digits and verify by exact division; None on failure."""
    from math import gcd as igcd

    bound = 2 * max(max(abs(v) for v in a), max(abs(v) for v in b)) + 2
    xi = bound + 29
    for _ in range(6):
        va, vb = _int_eval(a, xi), _int_eval(b, xi)
        if va and vb:
            g = igcd(va, vb)
            digits = []
            rest = g
            while rest:
                d = rest % xi
                if d > xi // 2:
                    d -= xi
                digits.append(d)
                rest = (rest - d) // xi
            cand = _int_primitive(digits) if digits else [0]
            if digits and _int_poly_divexact(a, cand) is not None and _int_poly_divexact(b, cand) is not None:
                return cand
        xi = xi * 73 // 27 + 17
    return None


def _int_prs_gcd(a, b):
    from math import gcd as igcd

    if len(a) < len(b):
        a, b = b, a
    while b:
        r = list(a)
        lc = b[-1]
        while len(r) >= len(b):
            if r[-1] == 0:
                r.pop()
                continue
            g = igcd(r[-1], lc)
            mul_r = lc // g
            mul_b = r[-1] // g
            off = len(r) - len(b)
            if mul_r != 1:
                r = [v * mul_r for v in r]
            for j, bv in enumerate(b):
                r[off + j] -= mul_b * bv
            while r and r[-1] == 0:
                r.pop()
            r = _int_primitive(r) if r else r
        a, b = b, _int_primitive(r) if r else []
    return a


def _rational_gcd(p: UniPoly, q: UniPoly) -> UniPoly:
    """Monic gcd over Q through primitive integer polynomials."""
    if p.is_zero():
        return q.monic() if not q.is_zero() else q
    if q.is_zero():
        return p.monic()
    a = _primitive_int_coeffs(p)
    b = _primitive_int_coeffs(q)
    g = _heuristic_int_gcd(a, b)
    if g is None:
        g = _int_prs_gcd(a, b)
    out = UniPoly([Q(v) for v in g], var=p.var)
    return out.monic()


# ---------------------------------------------------------------------------
# factorization over Q
# ---------------------------------------------------------------------------

def _primitive_int_coeffs(p: UniPoly):
    """Scale a rational polynomial to primitive integer coefficients."""
    from math import gcd, lcm

    fracs = [as_fraction(c) for c in p.coeffs]
    den = 1
    for f in fracs:
        den = lcm(den, f.denominator)
    ints = [int(f * den) for f in fracs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    if ints and ints[-1] < 0:
        ints = [-v for v in ints]
    return ints


def _int_divisors(n: int):
    n = abs(n)
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    out.sort()
    return out


def rational_roots(p: UniPoly):
    """All rational roots of p over Q (no multiplicities), via the rational
    root theorem on the primitive integer form."""
    if p.is_zero():
        raise ExactError("zero polynomial")
    ints = _primitive_int_coeffs(p)
    roots = []
    # strip x^k content
    k = 0
    while ints and ints[0] == 0:
        ints = ints[1:]
        k += 1
    if k:
        roots.append(Q(0))
    if len(ints) <= 1:
        return roots
    a0, an = ints[0], ints[-1]
    seen = set()
    for num in _int_divisors(a0):
        for den in _int_divisors(an):
            for s in (1, -1):
                cand = Q(s * num, den)
                if cand in seen:
                    continue
                seen.add(cand)
                acc = Q(0)
                for c in reversed(ints):
                    acc = acc * cand + c
                if acc == 0:
                    roots.append(cand)
    roots.sort()
    return roots


def squarefree_and_rational_roots(p: UniPoly):
    """The squarefree part of p plus its rational roots with multiplicities."""
    if p.is_zero():
        raise ExactError("zero polynomial")
    sf = p.squarefree_part()
    roots = []
    for factor, mult in p.squarefree_decomposition():
        for r in rational_roots(factor):
            roots.append((r, mult))
    roots.sort()
    return sf, roots


def _mod_poly(ints, p):
    return [c % p for c in ints]


def _mod_mul(a, b, m, p):
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    return _mod_rem(prod, m, p)


def _mod_rem(a, m, p):
    a = list(a)
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        if a[-1] == 0:
            a.pop()
            continue
        c = a[-1] * inv_lead % p
        off = len(a) - 1 - dm
        for j in range(dm + 1):
            a[off + j] = (a[off + j] - c * m[j]) % p
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return a


def _mod_gcd(a, b, p):
    a = [c % p for c in a]
    b = [c % p for c in b]
    while b:
        a, b = b, _mod_poly_rem(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [c * inv % p for c in a]
    return a


def _mod_poly_rem(a, b, p):
    a = list(a)
    db = len(b) - 1
    inv = pow(b[-1], p - 2, p)
    while len(a) - 1 >= db and a:
        if a[-1] == 0:
            a.pop()
            continue
        c = a[-1] * inv % p
        off = len(a) - 1 - db
        for j in range(db + 1):
            a[off + j] = (a[off + j] - c * b[j]) % p
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return a


def _distinct_degree_pattern(ints, p):
    """Degrees of the distinct-degree factorization of f mod p, or None if
    f mod p degenerates (degree drop or not squarefree)."""
    f = _mod_poly(ints, p)
    while f and f[-1] == 0:
        f.pop()
    if len(f) - 1 != len(ints) - 1:
        return None
    deriv = [(i * f[i]) % p for i in range(1, len(f))]
    while deriv and deriv[-1] == 0:
        deriv.pop()
    if not deriv or len(_mod_gcd(f, deriv, p)) > 1:
        return None
    n = len(f) - 1
    pattern = []
    x = [0, 1]
    h = x[:]
    rem = f[:]
    d = 0
    while len(rem) - 1 >= 1 and d < n:
        d += 1
        # h = h^p mod f
        hp = [1]
        base = h[:]
        e = p
        while e:
            if e & 1:
                hp = _mod_mul(hp, base, f, p)
            base = _mod_mul(base, base, f, p)
            e >>= 1
        h = hp
        diff = h[:]
        while len(diff) < 2:
            diff.append(0)
        diff[1] = (diff[1] - 1) % p
        while diff and diff[-1] == 0:
            diff.pop()
        g = _mod_gcd(rem, diff, p)
        if len(g) > 1:
            deg = len(g) - 1
            for _ in range(deg // d):
                pattern.append(d)
            rem = _mod_poly_rem_exact(rem, g, p)
    if len(rem) > 1:
        pattern.append(len(rem) - 1)
    return pattern


def _mod_poly_rem_exact(a, b, p):
    # exact quotient a // b mod p (b | a)
    a = list(a)
    db = len(b) - 1
    inv = pow(b[-1], p - 2, p)
    q = [0] * (len(a) - db)
    while len(a) - 1 >= db:
        if a[-1] == 0:
            a.pop()
            continue
        c = a[-1] * inv % p
        q[len(a) - 1 - db] = c
        for j in range(db + 1):
            a[len(a) - 1 - db + j] = (a[len(a) - 1 - db + j] - c * b[j]) % p
        a.pop()
    return q


def _subset_sums(pattern):
    sums = {0}
    for d in pattern:
        sums |= {s + d for s in sums}
    return sums


def modular_irreducibility(p: UniPoly):
    """True if certified irreducible over Q by reduction mod small primes,
    False if certified reducible is NOT possible here (returns None when
    inconclusive)."""
    ints = _primitive_int_coeffs(p)
    n = len(ints) - 1
    possible = set(range(n + 1))
    for prime in _CERT_PRIMES:
        if ints[-1] % prime == 0:
            continue
        pattern = _distinct_degree_pattern(ints, prime)
        if pattern is None:
            continue
        possible &= _subset_sums(pattern)
        if possible == {0, n}:
            return True
    return None


def _kronecker_split(ints, effort=DEFAULT_KRONECKER_EFFORT):
    """Search a nontrivial factor of a squarefree primitive integer polynomial
    by divisor interpolation; returns integer coefficient list or None."""
    n = len(ints) - 1

    def evaluate(x):
        acc = 0
        for c in reversed(ints):
            acc = acc * x + c
        return acc

    for d in range(2, n // 2 + 1):
        points = []
        x = 0
        while len(points) < d + 1 and abs(x) <= 40:
            v = evaluate(x)
            if v != 0:
                points.append((x, v))
            x = -x + (1 if x <= 0 else 0)
        if len(points) < d + 1:
            return None
        divisor_lists = []
        total = 1
        for _, v in points:
            divs = _int_divisors(v)
            divs = [s * t for t in divs for s in (1, -1)]
            divisor_lists.append(divs)
            total *= len(divs)
            if total > effort:
                break
        if total > effort:
            continue

        xs = [pt[0] for pt in points]

        def interpolate(values):
            coeffs = [Q(0)] * (d + 1)
            for i, (xi, yi) in enumerate(zip(xs, values)):
                num = [Q(yi)]
                den = Q(1)
                for j, xj in enumerate(xs):
                    if j == i:
                        continue
                    num = [Q(0)] + num
                    for k in range(len(num) - 1):
                        num[k] -= Q(xj) * num[k + 1]
                    den *= Q(xi - xj)
                for k in range(len(num)):
                    coeffs[k] += num[k] / den
            return coeffs

        stack = [[]]
        for divs in divisor_lists:
            stack = [cand + [dv] for cand in stack for dv in divs]
        for values in stack:
            coeffs = interpolate(values)
            if any(c.denominator != 1 for c in coeffs):
                continue
            gi = [int(c) for c in coeffs]
            while gi and gi[-1] == 0:
                gi.pop()
            if len(gi) - 1 < 1 or len(gi) - 1 >= n:
                continue
            gp = UniPoly([Q(c) for c in gi])
            fp = UniPoly([Q(c) for c in ints])
            q, r = fp.divmod(gp)
            if r.is_zero():
                return gi
    return None


@dataclass
class Factor:
    poly: UniPoly
    multiplicity: int
    certified: bool

    @property
    def presumed_irreducible(self):
        return not self.certified


def factor_univariate(p: UniPoly, cap=DEFAULT_FACTOR_CAP, effort=DEFAULT_KRONECKER_EFFORT):
    """Factor a rational univariate polynomial into monic irreducibles.

    Degree <= 3 factors are certified by rational-root exclusion; degree >= 4
    factors are certified by a modular check when possible and otherwise
    flagged presumed irreducible (dynamic evaluation repairs them later).
    """
    if p.is_zero():
        raise ExactError("zero polynomial")
    if p.degree() > cap:
        raise ExactError("factor cap exceeded")
    out = []
    for sf, mult in p.squarefree_decomposition():
        for piece, certified in _factor_squarefree(sf, effort):
            out.append(Factor(piece, mult, certified))
    out.sort(key=lambda f: (f.poly.degree(), [as_fraction(c) for c in f.poly.coeffs]))
    return out


def _factor_squarefree(p: UniPoly, effort):
    if p.degree() == 0:
        return []
    if p.degree() == 1:
        return [(p.monic(), True)]
    pieces = []
    rest = p.monic()
    for r in rational_roots(rest):
        lin = UniPoly([-r, Q(1)], var=p.var)
        while True:
            q, rem = rest.divmod(lin)
            if rem.is_zero():
                pieces.append((lin, True))
                rest = q
            else:
                break
    work = [rest] if rest.degree() >= 1 else []
    while work:
        f = work.pop()
        if f.degree() == 1:
            pieces.append((f.monic(), True))
            continue
        if f.degree() <= 3:
            # no rational root (already stripped): irreducible for degree 2, 3
            g = f.monic()
            g.certified_irreducible = True
            pieces.append((g, True))
            continue
        if modular_irreducibility(f):
            g = f.monic()
            g.certified_irreducible = True
            pieces.append((g, True))
            continue
        ints = _primitive_int_coeffs(f)
        split = _kronecker_split(ints, effort)
        if split is None:
            pieces.append((f.monic(), False))
            continue
        g = UniPoly([Q(c) for c in split], var=p.var)
        h = f.exact_div(g)
        work.append(g)
        work.append(h)
    pieces.sort(key=lambda t: (t[0].degree(), [as_fraction(c) for c in t[0].coeffs]))
    return pieces
