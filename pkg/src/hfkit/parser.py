"""Model files: tokenizer, recursive-descent parser and canonical printer.

A model file is line oriented::

    dim 6
    mode invariant
    param L = log((3+sqrt(5))/2)
    param r : r^2 = 2, r > 0
    func a(x1) ~ [0, 1, 1/2]
    point 0.1, 0.2, 0.3, 0.4, 0.5, 0.6
    d e1 = -L e13
    form omega = e12 + e45 + e36
    cvform psi = r/2 (1 - i) (e1 + i e2)^(e4 + i e5)^(e3 + i e6)
    endo J = frame x1 -> x2; x2 -> -x1
    dist D = span(x2, x3, x4)
    note free text

In expressions ``^`` is the wedge product (a power when its right operand is
an integer literal), juxtaposition multiplies, ``eNNN`` is a basis form and
``xK`` a frame vector.  ``#`` starts a comment.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .exterior import Endomorphism, ExteriorError, Form
from .lie import Distribution, ModelError, StructureModel
from .scalars import (
    I,
    EvaluationError,
    FunctionSymbol,
    Parameter,
    Scalar,
    ScalarError,
    SymbolTable,
    func,
    param,
    surd,
)

__all__ = ["ParseError", "parse", "parse_expression", "print_model", "model_hash"]

RESERVED = {"i", "exp", "sqrt", "log", "re", "im", "conj", "span", "pi"}
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*'*")
_BASIS_RE = re.compile(r"[ex]\d+$")


class ParseError(ModelError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col, self.msg = line, col, msg
        super().__init__(f"line {line}, col {col}: {msg}" if line else msg)


# --------------------------------------------------------------------------
# tokens

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*'*)|(?P<op>->|[-+*/^(),;\[\]~:=<>]))"
)


@dataclass
class Tok:
    kind: str  # num, name, op, end
    text: str
    col: int


def tokenize(text: str, line: int = 0, offset: int = 0) -> list[Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            col = len(text) - len(text[pos:].lstrip()) + 1 + offset
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", line, col)
        kind = m.lastgroup
        toks.append(Tok(kind, m.group(kind), m.start(kind) + 1 + offset))
        pos = m.end()
    toks.append(Tok("end", "", len(text) + 1 + offset))
    return toks


# --------------------------------------------------------------------------
# expression AST


class _Parser:
    def __init__(self, toks: list[Tok], line: int):
        self.toks = toks
        self.i = 0
        self.line = line

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, self.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        if not (self.tok.kind == "op" and self.tok.text == text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def at_end(self) -> bool:
        return self.tok.kind == "end"

    # expr := term (('+'|'-') term)*
    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            col = self.tok.col
            self.i += 1
            node = (op, node, self.term(), col)
        return node

    def _starts_primary(self) -> bool:
        t = self.tok
        return t.kind in ("num", "name") or (t.kind == "op" and t.text == "(")

    # term := unary (('*'|'/'|juxtaposition) unary)*
    def term(self):
        node = self.unary()
        while True:
            t = self.tok
            if t.kind == "op" and t.text in "*/":
                self.i += 1
                node = (t.text, node, self.unary(), t.col)
            elif self._starts_primary():
                node = ("*", node, self.power(), t.col)
            else:
                return node

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in "+-":
            self.i += 1
            inner = self.unary()
            return inner if t.text == "+" else ("neg", inner, t.col)
        return self.power()

    # power := primary ('^' (integer | unary))?
    def power(self):
        node = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            col = self.tok.col
            self.i += 1
            if self.tok.kind == "num" and self.tok.text.isdigit():
                k = int(self.tok.text)
                self.i += 1
                return ("pow", node, k, col)
            return ("wedge", node, self.unary(), col)
        return node

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return ("num", t.text, t.col)
        if t.kind == "op" and t.text == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "name":
            self.i += 1
            if t.text in ("exp", "sqrt", "log", "re", "im", "conj"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", t.text, arg, t.col)
            return ("name", t.text, t.col)
        self.error("expected a number, name or '('" if t.kind != "end" else "unexpected end of expression")


# --------------------------------------------------------------------------
# evaluation


class _Env:
    def __init__(self, dim: int, symbols: SymbolTable, forms: dict, line: int, vectors: bool = False):
        self.dim = dim
        self.symbols = symbols
        self.forms = forms
        self.line = line
        self.vectors = vectors

    def error(self, msg, col):
        raise ParseError(msg, self.line, col)


def _basis(env: _Env, name: str, col: int) -> Form:
    letter, digits = name[0], name[1:]
    if env.vectors and letter != "x":
        env.error(f"expected a frame vector xK, got {name!r}", col)
    if not env.vectors and letter != "e":
        env.error(f"frame vector {name!r} is not allowed in a form expression", col)
    idx = [int(c) for c in digits]
    if env.vectors and len(idx) != 1:
        env.error(f"frame vector {name!r} must have a single index", col)
    for k in idx:
        if k < 1 or k > env.dim:
            env.error(f"index {k} out of range 1..{env.dim}", col)
    if len(set(idx)) != len(idx):
        return Form.zero(env.dim)
    return Form.basis(env.dim, *idx)


def _as_form(env: _Env, x) -> Form:
    if isinstance(x, Form):
        return x
    return Form.scalar(env.dim, x)


def _scalar_of(env: _Env, f: Form, col: int, what: str):
    if f.degrees() - {0}:
        env.error(f"{what} must be a scalar", col)
    return f.coeff_mask(0)


def _eval(node, env: _Env) -> Form:
    kind = node[0]
    if kind == "num":
        return Form.scalar(env.dim, Scalar.rational(Fraction(node[1])))
    if kind == "name":
        name, col = node[1], node[2]
        if _BASIS_RE.match(name):
            return _basis(env, name, col)
        if name == "i":
            return Form.scalar(env.dim, I)
        if name in env.forms:
            return env.forms[name]
        base = name.rstrip("'")
        order = len(name) - len(base)
        for f in env.symbols.functions:
            if f.name == base:
                return Form.scalar(env.dim, func(f.name, f.coord, order))
        if order:
            env.error(f"undeclared function symbol {base!r}", col)
        s = env.symbols.lookup(name)
        if s is None:
            env.error(f"undeclared symbol {name!r}", col)
        return Form.scalar(env.dim, s)
    if kind == "neg":
        return -_eval(node[1], env)
    if kind in "+-":
        a, b = _eval(node[1], env), _eval(node[2], env)
        return a + b if kind == "+" else a - b
    if kind == "*":
        a, b = _eval(node[1], env), _eval(node[2], env)
        return a * b
    if kind == "/":
        a, b = _eval(node[1], env), _eval(node[2], env)
        den = _scalar_of(env, b, node[3], "divisor")
        try:
            return a / den
        except (ZeroDivisionError, ScalarError) as exc:
            env.error(f"cannot divide: {exc}", node[3])
    if kind == "wedge":
        a, b = _eval(node[1], env), _eval(node[2], env)
        if env.vectors:
            env.error("wedge is not allowed in a vector expression", node[3])
        return a ^ b
    if kind == "pow":
        return _eval(node[1], env) ** node[2]
    if kind == "call":
        fname, arg, col = node[1], node[2], node[3]
        val = _eval(arg, env)
        if fname == "re":
            return val.re
        if fname == "im":
            return val.im
        if fname == "conj":
            return val.conjugate()
        c = _scalar_of(env, val, col, f"argument of {fname}")
        if c.im:
            env.error(f"argument of {fname} must be real", col)
        try:
            if fname == "exp":
                return Form.scalar(env.dim, c.re.exp())
            if fname == "sqrt":
                if c.re.is_rational():
                    return Form.scalar(env.dim, surd(c.re.to_rational()) if c.re.to_rational() >= 0 else _neg_sqrt(env, col))
                return Form.scalar(env.dim, c.re.sqrt())
        except ScalarError as exc:
            env.error(str(exc), col)
        env.error("log is only allowed in numeric parameter values", col)
    raise AssertionError(kind)


def _neg_sqrt(env, col):
    env.error("square root of a negative number", col)


def _num_eval(node, line: int) -> float:
    kind = node[0]
    if kind == "num":
        return float(Fraction(node[1]))
    if kind == "name":
        if node[1] == "pi":
            return math.pi
        raise ParseError(f"numeric value cannot reference {node[1]!r}", line, node[2])
    if kind == "neg":
        return -_num_eval(node[1], line)
    if kind in "+-*/":
        a, b = _num_eval(node[1], line), _num_eval(node[2], line)
        if kind == "/" and b == 0:
            raise ParseError("division by zero", line, node[3])
        return {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b else 0.0}[kind]
    if kind == "pow":
        return _num_eval(node[1], line) ** node[2]
    if kind == "call":
        fn = {"exp": math.exp, "sqrt": math.sqrt, "log": math.log}.get(node[1])
        if fn is None:
            raise ParseError(f"{node[1]} is not numeric", line, node[3])
        try:
            return fn(_num_eval(node[2], line))
        except ValueError:
            raise ParseError(f"{node[1]} outside its domain", line, node[3]) from None
    raise ParseError("unsupported numeric expression", line, node[-1])


def _parse_expr_tokens(toks, line):
    p = _Parser(toks, line)
    node = p.expr()
    if not p.at_end():
        p.error(f"unexpected {p.tok.text!r}")
    return node


def parse_expression(text: str, dim: int, symbols: SymbolTable | None = None, forms: dict | None = None) -> Form:
    """Evaluate a single form expression against a coframe of dimension ``dim``."""
    node = _parse_expr_tokens(tokenize(text), 0)
    return _eval(node, _Env(dim, symbols or SymbolTable(), forms or {}, 0))


# --------------------------------------------------------------------------
# lines


def _split_key(raw: str):
    m = re.match(r"\s*([A-Za-z]+)\b", raw)
    if not m:
        return None, 0
    return m.group(1), m.end()


def _name_at(raw: str, pos: int, line: int) -> tuple[str, int]:
    m = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*)").match(raw, pos)
    if not m:
        raise ParseError("expected a name", line, pos + 1)
    return m.group(1), m.end()


def _check_new_name(name: str, taken: set, line: int, col: int):
    if name in RESERVED or _BASIS_RE.match(name):
        raise ParseError(f"{name!r} is reserved", line, col)
    if name in taken:
        raise ParseError(f"duplicate name {name!r}", line, col)
    taken.add(name)


def _after_equals(raw: str, pos: int, line: int) -> int:
    m = re.compile(r"\s*=").match(raw, pos)
    if not m:
        raise ParseError("expected '='", line, pos + 1)
    return m.end()


def parse(text: str, name: str = "") -> StructureModel:
    """Parse a model file into a :class:`StructureModel`."""
    dim = None
    mode = "invariant"
    symbols = SymbolTable()
    diffs: dict[int, Form] = {}
    forms: dict[str, Form] = {}
    endos: dict[str, Endomorphism] = {}
    dists: dict[str, Distribution] = {}
    points: list[tuple[float, ...]] = []
    notes: list[str] = []
    taken: set[str] = set()
    seen_body = False

    def env(line, vectors=False):
        return _Env(dim, symbols, forms, line, vectors)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0].rstrip()
        if not raw.strip():
            continue
        key, pos = _split_key(raw)
        col0 = len(raw) - len(raw.lstrip()) + 1
        if key is None:
            raise ParseError("expected a keyword", lineno, col0)
        if key == "note":
            notes.append(raw[pos:].strip())
            continue
        if key != "dim" and dim is None:
            raise ParseError("'dim' must come first", lineno, col0)
        if key == "dim":
            if dim is not None:
                raise ParseError("duplicate 'dim'", lineno, col0)
            toks = tokenize(raw[pos:], lineno, pos)
            if toks[0].kind != "num" or not toks[0].text.isdigit() or toks[1].kind != "end":
                raise ParseError("expected an integer dimension", lineno, toks[0].col)
            dim = int(toks[0].text)
            if not 1 <= dim <= 9:
                raise ParseError("dimension must be between 1 and 9", lineno, toks[0].col)
        elif key == "mode":
            word = raw[pos:].strip()
            if word not in ("invariant", "coordinate"):
                raise ParseError(f"unknown mode {word!r}", lineno, pos + 2)
            if seen_body:
                raise ParseError("'mode' must precede declarations", lineno, col0)
            mode = word
        elif key == "param":
            pname, p2 = _name_at(raw, pos, lineno)
            _check_new_name(pname, taken, lineno, pos + 2)
            rest = raw[p2:].strip()
            if rest.startswith(":"):
                m = re.match(
                    r":\s*" + re.escape(pname) + r"\s*\^\s*2\s*=\s*(\d+(?:/\d+)?)\s*(?:,\s*" + re.escape(pname) + r"\s*([<>])\s*0\s*)?$",
                    rest,
                )
                if not m:
                    raise ParseError(f"expected '{pname}^2 = d, {pname} > 0'", lineno, p2 + 1)
                d = Fraction(m.group(1))
                try:
                    symbols.add_parameter(Parameter(pname, relation=d, positive=m.group(2) != "<"))
                except ScalarError as exc:
                    raise ParseError(str(exc), lineno, p2 + 1) from None
            elif rest.startswith("="):
                vt = rest[1:].strip()
                off = raw.index(vt, p2) if vt else p2
                node = _parse_expr_tokens(tokenize(vt, lineno, off), lineno)
                symbols.add_parameter(Parameter(pname, value=_num_eval(node, lineno), value_text=vt))
            elif rest:
                raise ParseError("expected ':' or '='", lineno, p2 + 1)
            else:
                symbols.add_parameter(Parameter(pname))
            try:
                if symbols.parameters[-1].relation is None:
                    param(pname)
            except ScalarError as exc:
                raise ParseError(str(exc), lineno, pos + 2) from None
        elif key == "func":
            m = re.match(r"\s*([A-Za-z_][A-Za-z_0-9]*)\s*\(\s*x(\d)\s*\)\s*(?:~\s*\[(.*)\])?\s*$", raw[pos:])
            if not m:
                raise ParseError("expected 'func name(xK) ~ [c0, c1, ...]'", lineno, pos + 1)
            fname, k = m.group(1), int(m.group(2))
            _check_new_name(fname, taken, lineno, pos + 2)
            if not 1 <= k <= dim:
                raise ParseError(f"index {k} out of range 1..{dim}", lineno, pos + m.start(2))
            coeffs = ()
            if m.group(3) is not None and m.group(3).strip():
                try:
                    coeffs = tuple(float(Fraction(c.strip())) for c in m.group(3).split(","))
                except ValueError:
                    raise ParseError("stand-in coefficients must be numbers", lineno, pos + m.start(3) + 1) from None
            try:
                func(fname, k - 1)
            except ScalarError as exc:
                raise ParseError(str(exc), lineno, pos + 2) from None
            symbols.add_function(FunctionSymbol(fname, k - 1, coeffs))
        elif key == "point":
            try:
                vals = tuple(float(Fraction(c.strip())) for c in raw[pos:].split(","))
            except ValueError:
                raise ParseError("point coordinates must be numbers", lineno, pos + 2) from None
            if len(vals) != dim:
                raise ParseError(f"point needs {dim} coordinates", lineno, pos + 2)
            points.append(vals)
        elif key == "d":
            seen_body = True
            m = re.compile(r"\s*e(\d)\s*=").match(raw, pos)
            if not m:
                raise ParseError("expected 'd eK = <2-form>'", lineno, pos + 1)
            k = int(m.group(1))
            if not 1 <= k <= dim:
                raise ParseError(f"index {k} out of range 1..{dim}", lineno, m.start(1) + 1)
            if k in diffs:
                raise ParseError(f"duplicate differential for e{k}", lineno, m.start(1) + 1)
            toks = tokenize(raw[m.end():], lineno, m.end())
            f = _eval(_parse_expr_tokens(toks, lineno), env(lineno))
            if f and not f.is_homogeneous(2):
                raise ParseError("expected degree-2 form", lineno, toks[0].col)
            diffs[k] = f
        elif key in ("form", "cvform"):
            seen_body = True
            oname, p2 = _name_at(raw, pos, lineno)
            _check_new_name(oname, taken, lineno, pos + 2)
            p3 = _after_equals(raw, p2, lineno)
            toks = tokenize(raw[p3:], lineno, p3)
            f = _eval(_parse_expr_tokens(toks, lineno), env(lineno))
            if key == "form" and not f.is_real():
                raise ParseError(f"form {oname!r} is not real; use cvform", lineno, toks[0].col)
            forms[oname] = f
        elif key == "endo":
            seen_body = True
            oname, p2 = _name_at(raw, pos, lineno)
            _check_new_name(oname, taken, lineno, pos + 2)
            p3 = _after_equals(raw, p2, lineno)
            m = re.compile(r"\s*(frame|coframe)\b").match(raw, p3)
            if not m:
                raise ParseError("expected 'frame' or 'coframe'", lineno, p3 + 1)
            acts = m.group(1)
            vectors = acts == "frame"
            letter = "x" if vectors else "e"
            images: dict[int, Form] = {}
            body_start = m.end()
            for chunk_start, chunk in _chunks(raw, body_start):
                mm = re.compile(r"\s*" + letter + r"(\d)\s*->").match(chunk)
                if not mm:
                    raise ParseError(f"expected '{letter}K -> image'", lineno, chunk_start + 1)
                k = int(mm.group(1))
                if not 1 <= k <= dim:
                    raise ParseError(f"index {k} out of range 1..{dim}", lineno, chunk_start + mm.start(1) + 1)
                if k in images:
                    raise ParseError(f"duplicate image for {letter}{k}", lineno, chunk_start + mm.start(1) + 1)
                toks = tokenize(chunk[mm.end():], lineno, chunk_start + mm.end())
                img = _eval(_parse_expr_tokens(toks, lineno), env(lineno, vectors))
                if img and not img.is_homogeneous(1):
                    raise ParseError("image must be a linear combination of basis elements", lineno, toks[0].col)
                if not img.is_real():
                    raise ParseError("endomorphism entries must be real", lineno, toks[0].col)
                images[k] = img
            cols = [[images[k].coeff(i).re if k in images else Scalar.rational(0) for i in range(1, dim + 1)] for k in range(1, dim + 1)]
            if acts == "frame":
                endos[oname] = Endomorphism.from_images(cols, "frame")
            else:
                # coframe: image of e^k gives column k of the matrix
                endos[oname] = Endomorphism.from_images(cols, "coframe")
        elif key == "dist":
            seen_body = True
            oname, p2 = _name_at(raw, pos, lineno)
            _check_new_name(oname, taken, lineno, pos + 2)
            p3 = _after_equals(raw, p2, lineno)
            m = re.compile(r"\s*span\s*\((.*)\)\s*$").match(raw, p3)
            if not m:
                raise ParseError("expected 'span(...)'", lineno, p3 + 1)
            vecs = []
            for cstart, chunk in _chunks(raw[: m.end(1)], m.start(1), sep=","):
                toks = tokenize(chunk, lineno, cstart)
                v = _eval(_parse_expr_tokens(toks, lineno), env(lineno, True))
                if not v or not v.is_homogeneous(1) or not v.is_real():
                    raise ParseError("span entries must be nonzero real frame vectors", lineno, toks[0].col)
                vecs.append([v.coeff(i).re for i in range(1, dim + 1)])
            try:
                dists[oname] = Distribution(tuple(tuple(v) for v in vecs))
            except ModelError as exc:
                raise ParseError(str(exc), lineno, p3 + 1) from None
        else:
            raise ParseError(f"unknown keyword {key!r}", lineno, col0)
    if dim is None:
        raise ParseError("missing 'dim'")
    table = [diffs.get(k, Form.zero(dim)) for k in range(1, dim + 1)]
    try:
        model = StructureModel(
            dim=dim,
            mode=mode,
            differentials=table,
            symbols=symbols,
            forms=forms,
            endos=endos,
            dists=dists,
            points=points,
            name=name,
            notes=notes,
        )
    except (ModelError, ExteriorError) as exc:
        raise ParseError(str(exc)) from None
    return model


def _chunks(raw: str, start: int, sep: str = ";"):
    """Split ``raw[start:]`` at top-level separators, yielding (offset, text)."""
    depth = 0
    begin = start
    for i in range(start, len(raw)):
        ch = raw[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            if raw[begin:i].strip():
                yield begin, raw[begin:i]
            begin = i + 1
    if raw[begin:].strip():
        yield begin, raw[begin:]


# --------------------------------------------------------------------------
# printing


def _vector_str(components, letter: str) -> str:
    f = Form.one_form(len(components), components)
    s = str(f)
    return re.sub(r"\be(\d)\b", letter + r"\1", s)


def _frac_str(x: float) -> str:
    fr = Fraction(x).limit_denominator(10 ** 9)
    return str(fr) if abs(float(fr) - x) < 1e-15 else repr(x)


def print_model(model: StructureModel) -> str:
    """Canonical text; ``parse(print_model(m))`` rebuilds ``m``."""
    out = [f"dim {model.dim}", f"mode {model.mode}"]
    for p in model.symbols.parameters:
        if p.relation is not None:
            rel = Fraction(int(p.relation.numerator), int(p.relation.denominator))
            out.append(f"param {p.name} : {p.name}^2 = {rel}, {p.name} {'>' if p.positive else '<'} 0")
        elif p.value_text is not None:
            out.append(f"param {p.name} = {p.value_text}")
        elif p.value is not None:
            out.append(f"param {p.name} = {_frac_str(p.value)}")
        else:
            out.append(f"param {p.name}")
    for f in model.symbols.functions:
        line = f"func {f.name}(x{f.coord + 1})"
        if f.standin:
            line += " ~ [" + ", ".join(_frac_str(c) for c in f.standin) + "]"
        out.append(line)
    for pt in model.points:
        out.append("point " + ", ".join(_frac_str(c) for c in pt))
    for note in model.notes:
        out.append(f"note {note}")
    for k, f in enumerate(model.differentials, start=1):
        if f:
            out.append(f"d e{k} = {f}")
    for name, f in model.forms.items():
        out.append(f"{'form' if f.is_real() else 'cvform'} {name} = {f}")
    for name, e in model.endos.items():
        letter = "x" if e.acts_on == "frame" else "e"
        parts = []
        for j in range(e.dim):
            img = e.image(j)
            if any(img):
                parts.append(f"{letter}{j + 1} -> {_vector_str(img, letter)}")
        out.append(f"endo {name} = {e.acts_on} " + "; ".join(parts))
    for name, dist in model.dists.items():
        out.append(f"dist {name} = span(" + ", ".join(_vector_str(v, "x") for v in dist.vectors) + ")")
    return "\n".join(out) + "\n"


def model_hash(model: StructureModel) -> str:
    return hashlib.sha256(print_model(model).encode("utf-8")).hexdigest()
