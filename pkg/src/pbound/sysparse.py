"""Text input for systems and structured report output.

Grammar (explicit multiplication only, rational literals as a/b):

    system  := eq (";" binding)*
    eq      := "dw/dz" "=" poly "/" poly
             | "dz/dt" "=" poly ";" "dw/dt" "=" poly
    poly    := ["-"] term (("+"|"-") term)*
    term    := factor ("*" factor)*
    factor  := atom ("^" uint)?
    atom    := "z" | "w" | rational | paramname | "(" poly ")"
    binding := paramname "=" ["-"] rational
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from .exact import ExtElem, Q, as_fraction, is_rational_value
from .polyode import BiPoly, OdeSystem, bipoly_str, make_system


class ParseError(Exception):
    def __init__(self, message, line, col):
        super().__init__("%s (line %d, column %d)" % (message, line, col))
        self.line = line
        self.col = col


@dataclass
class SystemSource:
    form: str  # "pq" | "autonomous"
    axis: bool  # denominator divisible by z
    p_text: str
    q_text: str
    bindings: dict


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()=;,]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            skip = len(text[pos:]) - len(stripped)
            _line, _col = _position(text, pos + skip)
            raise ParseError("unexpected character %r" % stripped[0], _line, _col)
        start = m.start(m.lastgroup)
        line, col = _position(text, start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), line, col))
        pos = m.end()
    tokens.append(("eof", "", *_position(text, len(text))))
    return tokens


def _position(text, pos):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text, params):
        self.tokens = _tokenize(text)
        self.i = 0
        self.params = params
        self.used_params = set()

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value, what=None):
        kind, val, line, col = self.peek()
        if val != value:
            raise ParseError(
                "expected %r" % (what or value), line, col
            )
        return self.next()

    def fail(self, message):
        _, _, line, col = self.peek()
        raise ParseError(message, line, col)

    # -- polynomial parsing --------------------------------------------------

    def poly(self) -> BiPoly:
        negate = False
        if self.peek()[1] == "-":
            self.next()
            negate = True
        acc = self.term()
        if negate:
            acc = -acc
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> BiPoly:
        acc = self.factor()
        while self.peek()[1] == "*":
            self.next()
            acc = acc * self.factor()
        return acc

    def factor(self) -> BiPoly:
        base = self.atom()
        if self.peek()[1] == "^":
            self.next()
            kind, val, line, col = self.next()
            if kind != "num" or "/" in val:
                raise ParseError("exponent must be a nonnegative integer", line, col)
            n = int(val)
            out = BiPoly.const(Q(1))
            for _ in range(n):
                out = out * base
            return out
        return base

    def atom(self) -> BiPoly:
        kind, val, line, col = self.peek()
        if val == "(":
            self.next()
            inner = self.poly()
            self.expect(")")
            return inner
        if kind == "num":
            self.next()
            if "/" in val:
                a, b = val.split("/")
                return BiPoly.const(Q(int(a), int(b)))
            return BiPoly.const(Q(int(val)))
        if kind == "name":
            self.next()
            if val == "z":
                return BiPoly.var_z()
            if val == "w":
                return BiPoly.var_w()
            if val in self.params:
                self.used_params.add(val)
                return BiPoly.const(self.params[val])
            raise ParseError("unbound parameter %r" % val, line, col)
        raise ParseError("expected a polynomial atom", line, col)


def _split_bindings(text):
    """Separate the equation part from trailing parameter bindings."""
    parts = [p for p in text.split(";")]
    return parts


_BINDING_RE = re.compile(
    r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(-?\d+(?:/\d+)?)\s*$"
)


def parse_system(text):
    """Parse a system description; returns (OdeSystem, SystemSource)."""
    pieces = _split_bindings(text)
    bindings = {}
    eq_pieces = []
    for piece in pieces:
        m = _BINDING_RE.match(piece)
        if m and m.group(1) not in ("z", "w"):
            name, val = m.group(1), m.group(2)
            if "/" in val:
                a, b = val.split("/")
                bindings[name] = Q(int(a), int(b))
            else:
                bindings[name] = Q(int(val))
        else:
            eq_pieces.append(piece)
    eq_text = ";".join(eq_pieces)
    parser = _Parser(eq_text, bindings)

    kind, val, line, col = parser.peek()
    if kind != "name" or val not in ("dw", "dz"):
        parser.fail("expected 'dw/dz' or 'dz/dt'")
    if val == "dw":
        parser.next()
        parser.expect("/")
        tok = parser.next()
        if tok[1] != "dz":
            raise ParseError("expected 'dw/dz'", tok[2], tok[3])
        parser.expect("=")
        p_poly = parser.poly()
        parser.expect("/", what="'/' between numerator and denominator")
        q_poly = parser.poly()
        form = "pq"
    else:
        parser.next()
        parser.expect("/")
        tok = parser.next()
        if tok[1] != "dt":
            raise ParseError("expected 'dz/dt'", tok[2], tok[3])
        parser.expect("=")
        q_poly = parser.poly()  # dz/dt is the denominator of dw/dz
        parser.expect(";")
        tok = parser.next()
        if tok[1] != "dw":
            raise ParseError("expected 'dw/dt'", tok[2], tok[3])
        parser.expect("/")
        tok = parser.next()
        if tok[1] != "dt":
            raise ParseError("expected 'dw/dt'", tok[2], tok[3])
        parser.expect("=")
        p_poly = parser.poly()
        form = "autonomous"
    kind, val, line, col = parser.peek()
    if kind != "eof":
        raise ParseError("unexpected trailing input", line, col)

    axis = _divisible_by_z(q_poly)
    axis_factor = q_poly.shift_z(-1) if axis else None
    sys = make_system(p_poly, q_poly, axis_factor=axis_factor)
    source = SystemSource(
        form=form,
        axis=axis,
        p_text=bipoly_str(p_poly),
        q_text=bipoly_str(q_poly),
        bindings=bindings,
    )
    return sys, source


def _divisible_by_z(p: BiPoly) -> bool:
    return bool(p.terms) and all(ze >= 1 for (ze, _) in p.terms)


def print_system(sys: OdeSystem) -> str:
    return "dw/dz = (%s) / (%s)" % (bipoly_str(sys.P), bipoly_str(sys.Q))


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def fraction_str(x) -> str:
    return str(x)


def coeff_str(c) -> str:
    if is_rational_value(c):
        return str(as_fraction(c))
    return str(c)


def tower_description(tower):
    if tower is None or tower.is_trivial():
        return []
    from .exact import ExtElem as _E

    out = []
    for depth, level in enumerate(tower.levels):
        sub = tower.levels[:depth]
        coeff_strs = []
        for i, rep in enumerate(level.minpoly):
            s = _E._str(sub, rep)
            coeff_strs.append((i, s))
        terms = []
        for i, s in reversed(coeff_strs):
            if s == "0":
                continue
            if i == 0:
                terms.append(s)
            elif s == "1":
                terms.append(level.name if i == 1 else "%s^%d" % (level.name, i))
            else:
                base = level.name if i == 1 else "%s^%d" % (level.name, i)
                if any(op in s[1:] for op in "+-") or "*" in s:
                    terms.append("(%s)*%s" % (s, base))
                else:
                    terms.append("%s*%s" % (s, base))
        joined = " + ".join(terms).replace("+ -", "- ")
        out.append({"generator": level.name, "minpoly": joined, "presumed_irreducible": level.presumed})
    return out


def branch_report(branch):
    return {
        "exponents": [str(mu) for mu, _ in branch.terms],
        "coefficients": [coeff_str(c) for _, c in branch.terms],
        "tower": tower_description(_branch_tower(branch)),
        "conjugacy_degree": branch.conj_degree,
        "status": branch.status,
        "flags": list(branch.flags),
    }


def _branch_tower(branch):
    for _, c in branch.terms:
        if isinstance(c, ExtElem):
            return c.tower
    return None


def witness_report(witness):
    if witness is None:
        return None
    return {
        "test": witness.kind,
        "lambda": coeff_str(witness.lam_star),
        "depth": witness.depth,
        "prefix_exponents": [str(mu) for mu, _ in witness.prefix],
        "prefix_coefficients": [coeff_str(c) for _, c in witness.prefix],
        "flags": list(witness.flags),
    }


def multiplicity_report(result):
    out = {"status": result.status}
    if result.status == "finite":
        out["mul"] = result.count
    if result.status == "capped":
        out["mul_lower_bound"] = result.lower_bound
        out["cap_diagnostics"] = list(result.diagnostics)
    out["branches"] = [branch_report(b) for b in result.branches]
    out["criticality_witness"] = witness_report(result.witness)
    if result.flags:
        out["flags"] = list(result.flags)
    return out


def build_report(obj):
    """Normalize any analysis outcome into a plain dict."""
    if isinstance(obj, dict):
        return obj
    if hasattr(obj, "to_report"):
        return obj.to_report()
    from .branching import MultiplicityResult

    if isinstance(obj, MultiplicityResult):
        return multiplicity_report(obj)
    raise TypeError("cannot report %r" % type(obj).__name__)


def emit_report(obj, fmt="text") -> bytes:
    report = build_report(obj)
    if fmt == "json":
        return (json.dumps(report, indent=2) + "\n").encode()
    if fmt == "text":
        lines = []
        _render_text(report, lines, 0)
        return ("\n".join(lines) + "\n").encode()
    raise ValueError("unknown report format %r" % fmt)


def _render_text(node, lines, depth):
    pad = "  " * depth
    if isinstance(node, dict):
        for key, value in node.items():
            if isinstance(value, (dict, list)):
                lines.append("%s%s:" % (pad, key))
                _render_text(value, lines, depth + 1)
            else:
                lines.append("%s%s: %s" % (pad, key, _scalar(value)))
    elif isinstance(node, list):
        if not node:
            lines.append("%s(none)" % pad)
        for item in node:
            if isinstance(item, (dict, list)):
                lines.append("%s-" % pad)
                _render_text(item, lines, depth + 1)
            else:
                lines.append("%s- %s" % (pad, _scalar(item)))
    else:
        lines.append("%s%s" % (pad, _scalar(node)))


def _scalar(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
