"""Darboux polynomials: verification, strictness, line detection, search.

For the autonomous system (zdot, wdot) = (Q, P) a polynomial f is Darboux when
X(f) = Q f_z + P f_w equals R_f * f exactly; the zero set of f is then an
invariant algebraic curve, strict when it has no component z = z0 or w = w0.

The bounded-degree search builds the extactic determinant of the monomial
basis under X (invariant curves of degree <= n divide it when it is nonzero),
peels its invariant core by iterated gcd with its own derivative along X, and
confirms every candidate factor by exact division.  Degree one additionally
has a direct undetermined-coefficient path used for cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exact import (
    ExactError,
    ExtElem,
    Q,
    Tower,
    UniPoly,
    adjoin_root,
    as_fraction,
    f_inv,
    f_is_zero,
    factor_univariate,
    is_rational_value,
    sort_key,
)
from .polyode import (
    BiPoly,
    OdeSystem,
    _normalize_biv,
    bipoly_divexact,
    bipoly_str,
    bipoly_to_wpoly,
    biv_gcd,
    wpoly_to_bipoly,
)


class DarbouxError(Exception):
    pass


@dataclass
class DarbouxCertificate:
    f: BiPoly
    cofactor: BiPoly
    strict: bool
    offending: tuple  # non-strict components, as strings
    irreducible: bool
    certified: bool  # irreducibility certification strength

    def degree(self):
        return int(self.f.total_degree())

    def w_degree(self):
        return self.f.w_degree()

    def to_report(self):
        return {
            "poly": bipoly_str(self.f),
            "cofactor": bipoly_str(self.cofactor),
            "degree": self.degree(),
            "w_degree": self.w_degree(),
            "strict": self.strict,
            "offending_components": list(self.offending),
            "irreducible": self.irreducible,
            "irreducibility": "certified" if self.certified else "presumed",
        }


@dataclass
class NotDarboux:
    remainder: BiPoly

    def to_report(self):
        return {"darboux": False, "remainder_witness": bipoly_str(self.remainder)}


def derive_along(sys: OdeSystem, f: BiPoly) -> BiPoly:
    """X(f) = zdot f_z + wdot f_w with (zdot, wdot) = (sys.Q, sys.P)."""
    return sys.Q * f.diff_z() + sys.P * f.diff_w()


def verify_darboux(sys: OdeSystem, f: BiPoly):
    """Exact division of X(f) by f: a certificate or the nonzero remainder."""
    if f.is_zero():
        raise DarbouxError("zero candidate")
    if f.total_degree() == 0:
        raise DarbouxError("constant candidate")
    xf = derive_along(sys, f)
    quotient = bipoly_divexact(xf, f)
    if quotient is None:
        return NotDarboux(remainder=_division_witness(xf, f))
    m = sys.degree()
    if not xf.is_zero():
        assert quotient.total_degree() <= m - 1, "cofactor degree bound violated"
    strict, offenders = strictness_check(f)
    irreducible, certified = _irreducibility(f)
    return DarbouxCertificate(
        f=f,
        cofactor=quotient,
        strict=strict,
        offending=offenders,
        irreducible=irreducible,
        certified=certified,
    )


def _division_witness(num: BiPoly, den: BiPoly) -> BiPoly:
    """A nonzero remainder witnessing num not divisible by den."""
    from .polyode import _wpoly_pseudo_divmod, _wpoly_degree

    rn, rd = bipoly_to_wpoly(num), bipoly_to_wpoly(den)
    if _wpoly_degree(rd) == 0:
        # denominator is a z-polynomial: witness the first failing coefficient
        for r in rn:
            if r.is_zero():
                continue
            _, rem = r.divmod(rd[0])
            if not rem.is_zero():
                return wpoly_to_bipoly([rem], tower=num.tower)
        return num
    _, rem, _ = _wpoly_pseudo_divmod(rn, rd)
    return wpoly_to_bipoly(rem, tower=num.tower)


def strictness_check(f: BiPoly):
    """Strict iff f carries no component z = z0 or w = w0 (over C).

    Such a component exists exactly when the monomial content is nontrivial or
    the gcd of the coefficients in one variable is nonconstant, so no root
    isolation is needed.
    """
    if f.is_zero():
        raise DarbouxError("zero candidate")
    if f.total_degree() == 0:
        raise DarbouxError("constant candidate")
    offenders = []
    min_z = min(ze for (ze, _) in f.terms)
    min_w = min(we for (_, we) in f.terms)
    if min_z > 0:
        offenders.append("z")
    if min_w > 0:
        offenders.append("w")
    rows = bipoly_to_wpoly(f)
    zc = None
    for r in rows:
        if r.is_zero():
            continue
        zc = r if zc is None else zc.gcd(r)
        if zc.degree() == 0:
            break
    if zc is not None and zc.degree() > 0:
        stripped = _strip_var_powers(zc)
        if stripped.degree() > 0:
            offenders.append("z-factor %s" % str(stripped))
    cols = bipoly_to_wpoly(_swap_zw(f))
    wc = None
    for r in cols:
        if r.is_zero():
            continue
        wc = r if wc is None else wc.gcd(r)
        if wc.degree() == 0:
            break
    if wc is not None and wc.degree() > 0:
        stripped = _strip_var_powers(wc)
        if stripped.degree() > 0:
            offenders.append("w-factor %s" % str(stripped).replace("z", "w"))
    offenders = sorted(set(offenders))
    return (not offenders), tuple(offenders)


def _strip_var_powers(p: UniPoly) -> UniPoly:
    coeffs = list(p.coeffs)
    while coeffs and f_is_zero(coeffs[0]):
        coeffs.pop(0)
    return UniPoly(coeffs, var=p.var, tower=p.tower)


def _swap_zw(p: BiPoly) -> BiPoly:
    return BiPoly({(Q(we), int(ze)): c for (ze, we), c in p.terms.items()}, tower=p.tower)


def _irreducibility(f: BiPoly):
    """Best-effort irreducibility over Q: (verdict, certified)."""
    if f.total_degree() == 1:
        return True, True
    strict, offenders = strictness_check(f)
    if offenders and f.total_degree() > 1:
        mono = [o for o in offenders if o in ("z", "w")]
        if mono or len(offenders) > 0:
            # a constant component of lower degree certifies reducibility
            if f.total_degree() > max(1, _max_offender_degree(offenders)):
                return False, True
    if f.w_degree() == 0:
        rows = bipoly_to_wpoly(f)
        facs = factor_univariate(rows[0])
        if len(facs) == 1 and facs[0].multiplicity == 1:
            return True, facs[0].certified
        return False, True
    if f.z_degree() == 0:
        cols = bipoly_to_wpoly(_swap_zw(f))
        facs = factor_univariate(cols[0])
        if len(facs) == 1 and facs[0].multiplicity == 1:
            return True, facs[0].certified
        return False, True
    return True, False  # presumed irreducible


def _max_offender_degree(offenders):
    deg = 1
    for o in offenders:
        if "factor" in o:
            deg = max(deg, o.count("^") + 1)
    return deg


# ---------------------------------------------------------------------------
# degree-1 detection by exact elimination
# ---------------------------------------------------------------------------

@dataclass
class LineFamily:
    """Conjugate family of lines given by an irreducible factor."""

    kind: str  # "z", "w" or "sloped"
    factor: UniPoly
    degree: int

    def to_report(self):
        var = {"z": "z", "w": "w", "sloped": "slope"}[self.kind]
        return {
            "kind": self.kind,
            "defining_polynomial": str(self.factor).replace("x", var),
            "conjugates": self.degree,
        }


@dataclass
class LineDetection:
    lines: list  # DarbouxCertificate for rational lines
    families: list  # LineFamily for conjugate (irrational) ones
    dicritical: bool
    notes: tuple = ()

    def to_report(self):
        return {
            "lines": [c.to_report() for c in self.lines],
            "conjugate_families": [f.to_report() for f in self.families],
            "dicritical_line_family": self.dicritical,
            "notes": list(self.notes),
        }


def detect_invariant_lines(sys: OdeSystem, caps=None) -> LineDetection:
    """All degree-1 Darboux polynomials u z + v w + t by undetermined
    coefficients, eliminated exactly; a positive-dimensional solution set is
    reported as a dicritical line family."""
    A, B = sys.Q, sys.P  # zdot, wdot
    lines = []
    families = []
    notes = []
    dicritical = False

    # z-lines: (z - z0) | A
    for fac, is_line in _axis_line_factors(A, "z"):
        if is_line:
            z0 = -as_fraction(fac.coeffs[0])
            cand = BiPoly({(Q(1), 0): Q(1), (Q(0), 0): -z0})
            cert = verify_darboux(sys, cand)
            if isinstance(cert, DarbouxCertificate):
                lines.append(cert)
        else:
            families.append(LineFamily(kind="z", factor=fac, degree=fac.degree()))

    # w-lines: (w - w0) | B
    for fac, is_line in _axis_line_factors(_swap_zw(B), "w"):
        if is_line:
            w0 = -as_fraction(fac.coeffs[0])
            cand = BiPoly({(Q(0), 1): Q(1), (Q(0), 0): -w0})
            cert = verify_darboux(sys, cand)
            if isinstance(cert, DarbouxCertificate):
                lines.append(cert)
        else:
            families.append(LineFamily(kind="w", factor=fac, degree=fac.degree()))

    # sloped lines w = s z + r: (B - s A)(z, s z + r) == 0 identically in z
    conditions = _sloped_line_conditions(A, B)
    status, pairs, extra_notes = _solve_two_var_system(conditions)
    notes.extend(extra_notes)
    if status == "infinite":
        dicritical = True
    else:
        for s_val, r_val in pairs:
            if is_rational_value(s_val) and is_rational_value(r_val):
                s0, r0 = as_fraction(s_val), as_fraction(r_val)
                cand = BiPoly({(Q(0), 1): Q(1), (Q(1), 0): -s0, (Q(0), 0): -r0})
                cert = verify_darboux(sys, cand)
                if isinstance(cert, DarbouxCertificate):
                    lines.append(cert)
            else:
                tower = s_val.tower if isinstance(s_val, ExtElem) else r_val.tower
                deg = tower.degree()
                minpoly = _tower_top_minpoly(tower)
                families.append(LineFamily(kind="sloped", factor=minpoly, degree=deg))

    lines = _dedupe_certs(lines)
    return LineDetection(lines=lines, families=families, dicritical=dicritical, notes=tuple(notes))


def _axis_line_factors(p: BiPoly, var):
    """Irreducible factors of the gcd of the w-major coefficients of p."""
    rows = bipoly_to_wpoly(p)
    g = None
    for r in rows:
        if r.is_zero():
            continue
        g = r if g is None else g.gcd(r)
        if g.degree() == 0:
            break
    out = []
    if g is None or g.degree() == 0:
        return out
    g = _strip_var_powers(g)
    if len(g.coeffs) != 0 and g.degree() > 0:
        for fac in factor_univariate(g):
            if fac.poly.degree() == 1:
                out.append((fac.poly, True))
            else:
                out.append((fac.poly, False))
    # a pure z^k content is the line z = 0 itself
    rows_min = min((min((i for i, c in enumerate(r.coeffs) if not f_is_zero(c)), default=0) for r in rows if not r.is_zero()), default=0)
    if rows_min > 0:
        out.insert(0, (UniPoly([Q(0), Q(1)]), True))
    return out


def _sloped_line_conditions(A: BiPoly, B: BiPoly):
    """Coefficients in z of (B - s A)(z, s z + r) as polynomials in (s, r).

    The unknown pair lives in a helper BiPoly with s on the z-slot and r on
    the w-slot.
    """
    conditions = {}

    def accumulate(poly: BiPoly, extra_s_power: int, sign):
        for (ze, we), c in poly.terms.items():
            for k in range(we + 1):
                koeff = sign * c * math.comb(we, k)
                m = int(ze) + k
                key = (Q(k + extra_s_power), we - k)
                bucket = conditions.setdefault(m, {})
                bucket[key] = bucket.get(key, Q(0)) + koeff

    accumulate(B, 0, Q(1))
    accumulate(A, 1, Q(-1))
    out = []
    for m in sorted(conditions):
        poly = BiPoly(conditions[m])
        if not poly.is_zero():
            out.append(poly)
    return out


def _tower_top_minpoly(tower: Tower) -> UniPoly:
    level = tower.levels[-1]
    sub = tower.levels[:-1]
    coeffs = []
    for rep in level.minpoly:
        coeffs.append(ExtElem(Tower(sub), rep) if sub else rep)
    if sub:
        return UniPoly(coeffs, var=level.name, tower=Tower(sub))
    return UniPoly(coeffs, var=level.name)


def _dedupe_certs(certs):
    seen = {}
    for cert in certs:
        key = tuple(sorted(_normalize_biv(cert.f).terms.items(), key=lambda kv: kv[0]))
        key = tuple((k, sort_key(v)) for k, v in key)
        if key not in seen:
            seen[key] = cert
    return sorted(seen.values(), key=lambda c: (c.degree(), bipoly_str(c.f)))


# -- exact solving of a bivariate polynomial system ---------------------------

def _solve_two_var_system(polys, tower_cap=16):
    """Common zeros of polynomials in (s, r); returns (status, pairs, notes).

    status "infinite" flags a positive-dimensional solution set (a common
    nonconstant factor); "finite" returns all solutions with coordinates in Q
    or in an adjoined tower.
    """
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        return "infinite", [], ("no constraints on lines",)
    g = polys[0]
    for p in polys[1:]:
        g = biv_gcd(g, p)
        if g.total_degree() == 0:
            break
    if g.total_degree() > 0:
        return "infinite", [], ()
    # candidate s-values from r-free conditions and resultants
    s_constraints = []
    r_positive = []
    for p in polys:
        if p.w_degree() == 0:
            s_constraints.append(bipoly_to_wpoly(p)[0])
        else:
            r_positive.append(p)
    notes = []
    if r_positive:
        base = min(r_positive, key=lambda p: p.w_degree())
        for other in r_positive:
            if other is base:
                continue
            res = _resultant_r(base, other)
            if res is not None and not res.is_zero():
                s_constraints.append(res)
        if len(r_positive) == 1:
            # single condition: its r-leading coefficient bounds s
            rows = bipoly_to_wpoly(base)
            s_constraints.append(rows[-1])
    gs = None
    for c in s_constraints:
        if c.is_zero():
            continue
        gs = c if gs is None else gs.gcd(c)
        if gs.degree() == 0:
            break
    if gs is None:
        return "partial", [], ("could not bound line slopes",)
    if gs.degree() == 0:
        return "finite", [], notes
    pairs = []
    for fac in factor_univariate(gs):
        if fac.poly.degree() == 1:
            s_val = -as_fraction(fac.poly.coeffs[0])
            pairs.extend(_solve_r_given_s(polys, s_val, None))
        else:
            try:
                tower, theta = adjoin_root(Tower(cap=tower_cap), fac.poly)
            except ExactError:
                notes.append("slope factor beyond tower cap: %s" % str(fac.poly))
                continue
            pairs.extend(_solve_r_given_s(polys, theta, tower))
    verified = []
    for s_val, r_val in pairs:
        if all(_eval_sr(p, s_val, r_val) for p in polys):
            verified.append((s_val, r_val))
    return "finite", verified, notes


def _solve_r_given_s(polys, s_val, tower):
    out = []
    r_polys = []
    for p in polys:
        u = _substitute_s(p, s_val, tower)
        if u is None:
            continue
        if u.degree() == 0 and not u.is_zero():
            return []  # inconsistent at this s
        if not u.is_zero():
            r_polys.append(u)
    if not r_polys:
        return []
    g = r_polys[0]
    for p in r_polys[1:]:
        g = g.gcd(p)
        if g.degree() == 0:
            return []
    if g.degree() == 0:
        return []
    if tower is None:
        for fac in factor_univariate(g):
            if fac.poly.degree() == 1:
                out.append((s_val, -as_fraction(fac.poly.coeffs[0])))
            else:
                try:
                    t2, theta = adjoin_root(Tower(), fac.poly)
                except ExactError:
                    continue
                out.append((t2.coerce(s_val), theta))
    else:
        for fac, _ in g.squarefree_decomposition():
            if fac.degree() == 1:
                out.append((s_val, -fac.coeffs[0] * f_inv(fac.coeffs[1])))
            else:
                try:
                    t2, theta = adjoin_root(tower, fac.monic())
                except ExactError:
                    continue
                out.append((t2.coerce(s_val), theta))
    return out


def _substitute_s(p: BiPoly, s_val, tower):
    """p(s, r) at s = s_val as a UniPoly in r."""
    deg_r = p.w_degree()
    coeffs = []
    for j in range(deg_r + 1):
        acc = tower.zero() if tower is not None else Q(0)
        for (se, we), c in p.terms.items():
            if we != j:
                continue
            acc = acc + c * (s_val ** int(se))
        coeffs.append(acc)
    return UniPoly(coeffs, var="r", tower=tower)


def _eval_sr(p: BiPoly, s_val, r_val) -> bool:
    total = None
    for (se, we), c in p.terms.items():
        term = c * (s_val ** int(se)) * (r_val**we)
        total = term if total is None else total + term
    return total is None or f_is_zero(total)


def _resultant_r(a: BiPoly, b: BiPoly) -> Optional[UniPoly]:
    """Sylvester resultant eliminating r; a UniPoly in s."""
    ra = bipoly_to_wpoly(a)
    rb = bipoly_to_wpoly(b)
    m, n = len(ra) - 1, len(rb) - 1
    if m < 0 or n < 0:
        return None
    size = m + n
    if size == 0:
        return None
    zero = UniPoly([], var="z")
    mat = [[zero] * size for _ in range(size)]
    for i in range(n):
        for j, c in enumerate(ra):
            mat[i][i + (m - j)] = c
    for i in range(m):
        for j, c in enumerate(rb):
            mat[n + i][i + (n - j)] = c
    return _bareiss_det(mat, lambda x, y: x.exact_div(y), zero, UniPoly([Q(1)], var="z"))


def _bareiss_det(mat, divexact, zero, one):
    """Fraction-free determinant; entries must form an integral domain."""
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


# ---------------------------------------------------------------------------
# extactic search
# ---------------------------------------------------------------------------

@dataclass
class SearchOutcome:
    certificates: list
    dicritical_degrees: tuple
    notes: tuple = ()
    partial: bool = False

    def to_report(self):
        return {
            "certificates": [c.to_report() for c in self.certificates],
            "identically_zero_extactic_degrees": list(self.dicritical_degrees),
            "partial": self.partial,
            "notes": list(self.notes),
        }


def extactic_determinant(sys: OdeSystem, n: int) -> BiPoly:
    """det of (X^i applied to the degree-<=n monomial basis)."""
    basis = [
        BiPoly({(Q(i), j): Q(1)})
        for total in range(n + 1)
        for i in range(total + 1)
        for j in [total - i]
    ]
    size = len(basis)
    rows = [basis]
    for _ in range(size - 1):
        rows.append([derive_along(sys, g) for g in rows[-1]])
    mat = [[rows[i][j] for j in range(size)] for i in range(size)]
    zero = BiPoly.zero()
    one = BiPoly.const(Q(1))

    def div(a, b):
        out = bipoly_divexact(a, b)
        if out is None:
            raise DarbouxError("inexact division in determinant")
        return out

    return _bareiss_det(mat, div, zero, one)


def invariant_core(sys: OdeSystem, e: BiPoly) -> BiPoly:
    """Largest factor of e all of whose irreducible factors are Darboux:
    the stable gcd of e with its derivative along the field."""
    g = _normalize_biv(e)
    while g.total_degree() > 0:
        nxt = biv_gcd(g, derive_along(sys, g))
        if nxt.total_degree() == g.total_degree():
            return nxt
        g = nxt
    return g


def _biv_squarefree(f: BiPoly) -> BiPoly:
    g = biv_gcd(f, f.diff_z())
    g = biv_gcd(g, f.diff_w())
    if g.total_degree() == 0:
        return f
    out = bipoly_divexact(f, g)
    return out if out is not None else f


def search_darboux(
    sys: OdeSystem, max_total_degree: int, dim_cap: int = 10, core_degree_cap: int = 14
) -> SearchOutcome:
    """Invariant algebraic curves of total degree <= max_total_degree."""
    if max_total_degree < 1:
        return SearchOutcome(certificates=[], dicritical_degrees=())
    certs = []
    dicritical = []
    notes = []
    partial = False
    detection = detect_invariant_lines(sys)
    certs.extend(detection.lines)
    if detection.dicritical:
        notes.append("one-parameter family of invariant lines")
    for n in range(1, max_total_degree + 1):
        size = (n + 1) * (n + 2) // 2
        if size > dim_cap:
            notes.append("degree %d skipped: determinant dimension %d exceeds cap %d" % (n, size, dim_cap))
            partial = True
            break
        e = extactic_determinant(sys, n)
        if e.is_zero():
            dicritical.append(n)
            continue
        # peel already-known invariant factors before the expensive gcd
        for known in [c.f for c in certs] + [
            BiPoly({(Q(1), 0): Q(1)}),
            BiPoly({(Q(0), 1): Q(1)}),
        ]:
            while e.total_degree() > 0:
                quotient = bipoly_divexact(e, known)
                if quotient is None:
                    break
                e = quotient
        if e.total_degree() == 0:
            continue
        if e.total_degree() > core_degree_cap:
            notes.append(
                "degree %d: invariant-core extraction skipped on a degree-%d residual"
                % (n, int(e.total_degree()))
            )
            partial = True
            continue
        core = invariant_core(sys, e)
        core = _biv_squarefree(core)
        candidates, leftover = _core_factors(core, n)
        if leftover:
            notes.append("degree %d: %s" % (n, leftover))
        for cand in candidates:
            cert = verify_darboux(sys, cand)
            if isinstance(cert, DarbouxCertificate):
                certs.append(cert)
    certs = _dedupe_certs(certs)
    return SearchOutcome(
        certificates=certs,
        dicritical_degrees=tuple(dicritical),
        notes=tuple(notes),
        partial=partial,
    )


def _core_factors(core: BiPoly, n: int):
    """Split the invariant core into candidate factors of degree <= n."""
    out = []
    work = _normalize_biv(core)
    if work.total_degree() == 0:
        return out, None
    # monomial content
    min_z = min(ze for (ze, _) in work.terms)
    min_w = min(we for (_, we) in work.terms)
    if min_z > 0:
        out.append(BiPoly({(Q(1), 0): Q(1)}))
    if min_w > 0:
        out.append(BiPoly({(Q(0), 1): Q(1)}))
    if min_z > 0 or min_w > 0:
        work = BiPoly(
            {(ze - min_z, we - min_w): c for (ze, we), c in work.terms.items()}
        )
    # univariate contents in each variable peel off axis-parallel factors
    for swap in (False, True):
        probe = _swap_zw(work) if swap else work
        rows = bipoly_to_wpoly(probe)
        g = None
        for r in rows:
            if r.is_zero():
                continue
            g = r if g is None else g.gcd(r)
            if g.degree() == 0:
                break
        if g is None or g.degree() == 0:
            continue
        for fac in factor_univariate(g):
            cand = BiPoly({(Q(i), 0): c for i, c in enumerate(fac.poly.coeffs)})
            if swap:
                cand = _swap_zw(cand)
            out.append(cand)
            for _ in range(fac.multiplicity):
                nxt = bipoly_divexact(work, cand)
                if nxt is None:
                    break
                work = nxt
    work = _normalize_biv(work)
    note = None
    if 0 < work.total_degree() <= n:
        out.append(work)
    elif work.total_degree() > n:
        note = "unsplit invariant factor of degree %d" % int(work.total_degree())
    return [o for o in out if not o.is_zero() and o.total_degree() > 0], note
