"""Exact scalars: rational functions with quadratic surds and exponential factors.

A :class:`Scalar` is a finite sum ``sum_u c_u * exp(u)`` where every ``c_u`` is
an element of ``Q(sqrt p, ...)(parameters, function symbols)`` and every ``u``
is a rational linear combination of monomials in parameters and function
symbols.  The representation is canonical, so equality is structural.

Rational coefficients are kept as :class:`gmpy2.mpq`; anything symbolic is a
reduced fraction of two polynomials over ``QQ`` living in a process-wide
polynomial ring whose generators are registered on demand.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from numbers import Rational as _RationalABC
from typing import Callable, Iterable, Mapping

from gmpy2 import mpq, is_square, isqrt
from sympy import Symbol
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing

__all__ = [
    "ScalarError",
    "EvaluationError",
    "Scalar",
    "ComplexScalar",
    "I",
    "ZERO",
    "ONE",
    "SymbolTable",
    "Parameter",
    "FunctionSymbol",
    "as_rational",
    "param",
    "func",
    "surd",
    "exp",
    "sqrt",
    "normalize",
    "derive",
    "evaluate",
    "is_zero",
    "polynomial_assignment",
]


class ScalarError(ArithmeticError):
    """Raised for operations outside the supported scalar class."""


class EvaluationError(ValueError):
    """Raised when a scalar cannot be evaluated numerically."""


# --------------------------------------------------------------------------
# generator registry


@dataclass(frozen=True)
class _Gen:
    name: str
    kind: str  # "param" | "surd" | "func"
    prime: int = 0
    base: str = ""
    coord: int = -1
    order: int = 0


class _Registry:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.gens: list[_Gen] = []
        self.by_name: dict[str, _Gen] = {}
        self.ring = PolyRing([Symbol("_one")], QQ)  # placeholder, replaced on first use
        self._rebuild()

    def _rebuild(self) -> None:
        syms = [Symbol(g.name) for g in self.gens] or [Symbol("_unused")]
        self.ring = PolyRing(syms, QQ)
        self.index = {g.name: i for i, g in enumerate(self.gens)}
        self.surd_slots = [(i, g.prime) for i, g in enumerate(self.gens) if g.kind == "surd"]

    def add(self, gen: _Gen) -> None:
        with self._lock:
            old = self.by_name.get(gen.name)
            if old is not None:
                if old != gen:
                    raise ScalarError(f"symbol {gen.name!r} already registered as {old.kind}")
                return
            self.gens.append(gen)
            self.by_name[gen.name] = gen
            self._rebuild()

    def lift(self, p: PolyElement) -> PolyElement:
        ring = self.ring
        if p.ring is ring:
            return p
        return p.set_ring(ring)


_REG = _Registry()

_FUNC_PRIME = "'"


def _register_param(name: str) -> None:
    _REG.add(_Gen(name, "param"))


def _register_func(name: str, coord: int, order: int = 0) -> str:
    full = name + _FUNC_PRIME * order
    _REG.add(_Gen(full, "func", base=name, coord=coord, order=order))
    return full


def _register_surd(p: int) -> str:
    name = f"sqrt{p}"
    _REG.add(_Gen(name, "surd", prime=p))
    return name


def _factor_small(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# --------------------------------------------------------------------------
# coefficient field K = Q(surds)(symbols)


def as_rational(x) -> mpq:
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, (int, _RationalABC)) or type(x).__name__ == "mpq":
        return mpq(x)
    if isinstance(x, str):
        return mpq(Fraction(x))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _reduce_surds(p: PolyElement) -> PolyElement:
    slots = _REG.surd_slots
    if not slots:
        return p
    ring = p.ring
    out: dict = {}
    for monom, c in p.items():
        m = list(monom)
        for i, prime in slots:
            e = m[i]
            if e > 1:
                c = c * prime ** (e // 2)
                m[i] = e % 2
        key = tuple(m)
        v = out.get(key)
        v = c if v is None else v + c
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return ring.from_dict(out) if out else ring.zero


def _surd_conjugate(p: PolyElement, slot: int) -> PolyElement:
    ring = p.ring
    return ring.from_dict({m: (-c if m[slot] % 2 else c) for m, c in p.items()})


class _Frac:
    """Reduced quotient ``num/den`` of polynomials; never a plain rational."""

    __slots__ = ("num", "den", "_key")

    def __init__(self, num: PolyElement, den: PolyElement):
        self.num = num
        self.den = den
        self._key = None

    def key(self):
        if self._key is None:
            self._key = (_poly_key(self.num), _poly_key(self.den))
        return self._key

    def __eq__(self, other):
        return isinstance(other, _Frac) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def _named_monoms(p: PolyElement):
    names = [str(s) for s in p.ring.symbols]
    for m, c in p.items():
        yield tuple((names[i], e) for i, e in enumerate(m) if e), c


def _poly_key(p: PolyElement):
    return tuple(sorted((mono, (int(c.numerator), int(c.denominator))) for mono, c in _named_monoms(p)))


def _make(num: PolyElement, den: PolyElement):
    """Canonicalize ``num/den`` into an mpq or a :class:`_Frac`."""
    if not den:
        raise ZeroDivisionError("division by zero scalar")
    num = _reduce_surds(_REG.lift(num))
    den = _reduce_surds(_REG.lift(den))
    if not num:
        return mpq(0)
    for slot, _prime in _REG.surd_slots:
        if any(m[slot] for m in den.itermonoms()):
            conj = _surd_conjugate(den, slot)
            num = _reduce_surds(num * conj)
            den = _reduce_surds(den * conj)
            if not den:
                raise ZeroDivisionError("surd norm vanished")
    if den.is_ground:
        c = den.LC
        num = num.quo_ground(c)
        den = den.ring.one
    else:
        num, den = num.cancel(den)
        # leading coefficient chosen by symbol names, not ring order
        c = max(_named_monoms(den), key=lambda mc: mc[0])[1]
        if c != 1:
            num = num.quo_ground(c)
            den = den.quo_ground(c)
    if den == 1 and num.is_ground:
        return mpq(num.LC) if num else mpq(0)
    return _Frac(num, den)


def _to_poly(c):
    ring = _REG.ring
    if isinstance(c, _Frac):
        return _REG.lift(c.num), _REG.lift(c.den)
    return ring.ground_new(c), ring.one


def _k_add(a, b):
    if not isinstance(a, _Frac) and not isinstance(b, _Frac):
        return a + b
    an, ad = _to_poly(a)
    bn, bd = _to_poly(b)
    if ad == bd:
        return _make(an + bn, ad)
    return _make(an * bd + bn * ad, ad * bd)


def _k_neg(a):
    if isinstance(a, _Frac):
        return _Frac(-a.num, a.den)
    return -a


def _k_mul(a, b):
    if not isinstance(a, _Frac):
        if not isinstance(b, _Frac):
            return a * b
        if not a:
            return mpq(0)
        return _Frac(_REG.lift(b.num) * a, _REG.lift(b.den)) if a != 1 else b
    if not isinstance(b, _Frac):
        return _k_mul(b, a)
    an, ad = _to_poly(a)
    bn, bd = _to_poly(b)
    return _make(an * bn, ad * bd)


def _k_inv(a):
    if isinstance(a, _Frac):
        return _make(_REG.lift(a.den), _REG.lift(a.num))
    if not a:
        raise ZeroDivisionError("division by zero scalar")
    return 1 / a


def _k_is_zero(a) -> bool:
    return not isinstance(a, _Frac) and not a


def _k_symbols(a) -> set[str]:
    if not isinstance(a, _Frac):
        return set()
    names = [str(s) for s in a.num.ring.symbols]
    out = set()
    for p in (a.num, a.den):
        for m in p.itermonoms():
            out.update(names[i] for i, e in enumerate(m) if e)
    return out


def _coord_funcs(p: PolyElement, coord: int) -> list[_Gen]:
    out = []
    for mono, _c in _named_monoms(p):
        for n, _e in mono:
            g = _REG.by_name[n]
            if g.kind == "func" and g.coord == coord and g not in out:
                out.append(g)
    return out


def _poly_derive(p: PolyElement, coord: int) -> PolyElement:
    """Formal d/dx_coord of a polynomial (next-order symbols must be registered)."""
    p = _REG.lift(p)
    ring = p.ring
    res = ring.zero
    for g in _coord_funcs(p, coord):
        nxt = g.base + _FUNC_PRIME * (g.order + 1)
        res += p.diff(ring.gens[_REG.index[g.name]]) * ring.gens[_REG.index[nxt]]
    return res


def _k_derive(a, coord: int):
    if not isinstance(a, _Frac):
        return mpq(0)
    for p in (a.num, a.den):
        for g in _coord_funcs(p, coord):
            _register_func(g.base, g.coord, g.order + 1)
    num, den = _to_poly(a)
    dn = _poly_derive(num, coord)
    dd = _poly_derive(den, coord)
    if not dd:
        return _make(dn, den)
    return _make(dn * den - num * dd, den * den)


def _k_eval(a, values: Mapping[str, float]) -> float:
    if not isinstance(a, _Frac):
        return float(a)
    names = [str(s) for s in a.num.ring.symbols]

    def ev(p: PolyElement) -> float:
        total = 0.0
        for m, c in p.items():
            t = float(c)
            for i, e in enumerate(m):
                if e:
                    t *= _gen_value(names[i], values) ** e
            total += t
        return total

    return ev(a.num) / ev(a.den)


def _gen_value(name: str, values: Mapping[str, float]) -> float:
    g = _REG.by_name[name]
    if g.kind == "surd":
        return math.sqrt(g.prime)
    try:
        return float(values[name])
    except KeyError:
        raise EvaluationError(f"no numeric value for symbol {name!r}") from None


# --------------------------------------------------------------------------
# exponent keys: tuple of (monomial, mpq) with monomial = tuple of (name, power)

ExpKey = tuple


def _exp_add(u: ExpKey, v: ExpKey, sign: int = 1) -> ExpKey:
    if not v:
        return u
    d = dict(u)
    for m, c in v:
        x = d.get(m, 0) + sign * c
        if x:
            d[m] = x
        else:
            d.pop(m, None)
    return tuple(sorted(d.items()))


def _exp_scale(u: ExpKey, s) -> ExpKey:
    return tuple((m, c * s) for m, c in u)


def _monomial_coef(m) -> object:
    """The monomial ``m`` as a coefficient-field element."""
    ring = _REG.ring
    p = ring.one
    for name, e in m:
        p = p * ring.gens[_REG.index[name]] ** e
    return _make(p, ring.one)


# --------------------------------------------------------------------------
# Scalar


def _coerce(x) -> "Scalar":
    if isinstance(x, Scalar):
        return x
    if isinstance(x, ComplexScalar):
        if x.im:
            raise TypeError("complex value where a real scalar is required")
        return x.re
    return Scalar.rational(x)


@total_ordering
class Scalar:
    """Immutable canonical exponential-polynomial scalar."""

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Mapping | None = None, *, _trusted: bool = False):
        if _trusted:
            self._t = terms
        else:
            self._t = {k: v for k, v in (terms or {}).items() if not _k_is_zero(v)}
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def rational(cls, x) -> "Scalar":
        q = as_rational(x)
        return cls({(): q}, _trusted=True) if q else ZERO

    @classmethod
    def generator(cls, name: str) -> "Scalar":
        if name not in _REG.by_name:
            raise ScalarError(f"unknown symbol {name!r}")
        ring = _REG.ring
        return cls({(): _make(ring.gens[_REG.index[name]], ring.one)}, _trusted=True)

    # structure ------------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def is_rational(self) -> bool:
        if not self._t:
            return True
        if len(self._t) != 1 or () not in self._t:
            return False
        return not isinstance(self._t[()], _Frac)

    def to_rational(self) -> mpq:
        if not self._t:
            return mpq(0)
        if not self.is_rational():
            raise ScalarError(f"{self} is not rational")
        return self._t[()]

    def has_exponentials(self) -> bool:
        return any(k for k in self._t)

    def symbols(self) -> set[str]:
        """Generator names appearing anywhere (coefficients and exponents)."""
        out: set[str] = set()
        for k, v in self._t.items():
            out |= _k_symbols(v)
            for m, _c in k:
                out.update(n for n, _e in m)
        return out

    def function_symbols(self) -> set[str]:
        return {n for n in self.symbols() if _REG.by_name[n].kind == "func"}

    def key(self):
        items = []
        for k, v in self._t.items():
            ck = v.key() if isinstance(v, _Frac) else (int(v.numerator), int(v.denominator))
            ek = tuple((m, (int(c.numerator), int(c.denominator))) for m, c in k)
            items.append((ek, ck))
        return tuple(sorted(items, key=repr))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = _coerce(other)
            except TypeError:
                return NotImplemented
        if len(self._t) != len(other._t):
            return False
        for k, v in self._t.items():
            w = other._t.get(k)
            if w is None:
                return False
            if isinstance(v, _Frac) or isinstance(w, _Frac):
                if not (isinstance(v, _Frac) and isinstance(w, _Frac) and v == w):
                    return False
            elif v != w:
                return False
        return True

    def __lt__(self, other):
        # only meaningful for rationals; used for sorting deterministic output
        return self.to_rational() < _coerce(other).to_rational()

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        if not other._t:
            return self
        if not self._t:
            return other
        d = dict(self._t)
        for k, v in other._t.items():
            w = d.get(k)
            if w is None:
                d[k] = v
            else:
                s = _k_add(w, v)
                if _k_is_zero(s):
                    del d[k]
                else:
                    d[k] = s
        return Scalar(d, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Scalar({k: _k_neg(v) for k, v in self._t.items()}, _trusted=True)

    def __sub__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, ComplexScalar):
            return NotImplemented
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self._t, other._t
        if not a or not b:
            return ZERO
        if len(a) == 1 and len(b) == 1 and () in a and () in b:
            x, y = a[()], b[()]
            if not isinstance(x, _Frac) and not isinstance(y, _Frac):
                return Scalar({(): x * y}, _trusted=True)
            return Scalar({(): _k_mul(x, y)})
        d: dict = {}
        for k1, v1 in a.items():
            for k2, v2 in b.items():
                k = _exp_add(k1, k2)
                p = _k_mul(v1, v2)
                w = d.get(k)
                d[k] = p if w is None else _k_add(w, p)
        return Scalar(d)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if not self._t:
            raise ZeroDivisionError("division by a scalar that normalizes to zero")
        if len(self._t) != 1:
            raise ScalarError(f"cannot invert multi-exponential scalar {self}")
        (k, v), = self._t.items()
        return Scalar({_exp_scale(k, -1): _k_inv(v)}, _trusted=True)

    def __truediv__(self, other):
        if isinstance(other, ComplexScalar):
            return ComplexScalar(self) / other
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # calculus ---------------------------------------------------------------
    def derive(self, coord: int) -> "Scalar":
        """Formal partial derivative with respect to coordinate ``coord`` (0-based)."""
        out = ZERO
        for k, v in self._t.items():
            dv = _k_derive(v, coord)
            du = mpq(0)
            for m, c in k:
                du = _k_add(du, _k_mul(c, _monomial_derive(m, coord)))
            total = _k_add(dv, _k_mul(v, du))
            if not _k_is_zero(total):
                out = out + Scalar({k: total}, _trusted=True)
        return out

    def subs(self, name: str, value) -> "Scalar":
        """Substitute a rational value for a parameter."""
        q = as_rational(value)
        g = _REG.by_name.get(name)
        if g is None:
            return self
        if g.kind != "param":
            raise ScalarError("only parameters can be substituted")
        out = ZERO
        for k, v in self._t.items():
            if isinstance(v, _Frac):
                num, den = _to_poly(v)
                x = num.ring.gens[_REG.index[name]]
                coef = _make(num.subs(x, QQ(q)), den.subs(x, QQ(q)))
            else:
                coef = v
            newk: ExpKey = ()
            for m, c in k:
                rest = tuple((n, e) for n, e in m if n != name)
                power = sum(e for n, e in m if n == name)
                factor = q ** power if power else 1
                if not factor:
                    continue
                if not rest:
                    raise ScalarError("substitution produces a constant exponent")
                newk = _exp_add(newk, ((rest, c * factor),))
            out = out + Scalar({newk: coef})
        return out

    # numeric ----------------------------------------------------------------
    def evaluate(self, values: Mapping[str, float] | None = None) -> float:
        values = values or {}
        total = 0.0
        for k, v in self._t.items():
            c = _k_eval(v, values)
            if k:
                u = 0.0
                for m, a in k:
                    t = float(a)
                    for n, e in m:
                        t *= _gen_value(n, values) ** e
                    u += t
                c *= math.exp(u)
            total += c
        return total

    def sign(self, samples: Iterable[Mapping[str, float]] = ({},), tol: float = 1e-9) -> int:
        """Sign of the scalar: exact for rationals, otherwise by evaluation.

        Returns 0 if any sample lies within ``tol`` of zero or the samples
        disagree.
        """
        if self.is_rational():
            q = self.to_rational()
            return (q > 0) - (q < 0)
        signs = set()
        for s in samples:
            x = self.evaluate(s)
            signs.add(0 if abs(x) <= tol else (1 if x > 0 else -1))
        return signs.pop() if len(signs) == 1 else 0

    # printing ---------------------------------------------------------------
    def __str__(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for k in sorted(self._t, key=_exp_sort_key):
            parts.append(_term_str(self._t[k], k))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self) -> str:
        return f"Scalar({str(self)!r})"

    # sqrt / exp -----------------------------------------------------------
    def sqrt(self) -> "Scalar":
        """Positive square root for ``q * exp(u)`` with ``q`` a positive rational."""
        if not self._t:
            return ZERO
        if len(self._t) != 1:
            raise ScalarError(f"square root of multi-exponential scalar {self}")
        (k, v), = self._t.items()
        if isinstance(v, _Frac):
            raise ScalarError(f"square root of symbolic coefficient {self}")
        return _rational_sqrt(v) * Scalar({_exp_scale(k, mpq(1, 2)): mpq(1)}, _trusted=True)

    def exp(self) -> "Scalar":
        """``exp`` of a rational combination of non-constant symbol monomials."""
        if not self._t:
            return ONE
        if set(self._t) != {()}:
            raise ScalarError("exponent must not contain exponentials")
        v = self._t[()]
        if not isinstance(v, _Frac) or v.den != 1:
            raise ScalarError(f"exponent {self} is not a non-constant polynomial")
        names = [str(s) for s in v.num.ring.symbols]
        key: ExpKey = ()
        for m, c in v.num.items():
            mono = tuple((names[i], e) for i, e in enumerate(m) if e)
            if not mono:
                raise ScalarError("constant exponent is outside the scalar class")
            if any(_REG.by_name[n].kind == "surd" for n, _ in mono):
                raise ScalarError("surds are not allowed in exponents")
            key = _exp_add(key, ((mono, mpq(c)),))
        return Scalar({key: mpq(1)}, _trusted=True)


def _monomial_derive(m, coord: int):
    """d/dx_coord of a monomial over parameters and function symbols."""
    out = mpq(0)
    for idx, (n, e) in enumerate(m):
        g = _REG.by_name[n]
        if g.kind != "func" or g.coord != coord:
            continue
        nxt = _register_func(g.base, g.coord, g.order + 1)
        rest = list(m)
        if e == 1:
            rest.pop(idx)
        else:
            rest[idx] = (n, e - 1)
        rest.append((nxt, 1))
        term = _k_mul(mpq(e), _monomial_coef(tuple(rest)))
        out = _k_add(out, term)
    return out


def _rational_sqrt(q: mpq) -> Scalar:
    if q < 0:
        raise ScalarError("square root of a negative rational")
    if not q:
        return ZERO
    n, d = int(q.numerator), int(q.denominator)
    # sqrt(n/d) = sqrt(n*d)/d
    m = n * d
    out = Scalar.rational(mpq(1, d))
    sq = 1
    for p, e in _factor_small(m).items():
        sq *= p ** (e // 2)
        if e % 2:
            out = out * Scalar.generator(_register_surd(p))
    return out * sq


# --------------------------------------------------------------------------
# printing helpers

def _gen_str(name: str) -> str:
    g = _REG.by_name.get(name)
    if g is not None and g.kind == "surd":
        return f"sqrt({g.prime})"
    return name


def _mono_category(mono) -> int:
    kinds = {_REG.by_name[n].kind for n, _ in mono}
    if not kinds:
        return 0
    if kinds == {"surd"}:
        return 1
    if "func" not in kinds:
        return 2
    return 3


def _mono_sort_key(mono):
    surds = tuple((n, e) for n, e in mono if _REG.by_name[n].kind == "surd")
    rest = tuple((n, e) for n, e in mono if _REG.by_name[n].kind != "surd")
    return (_mono_category(mono), rest, surds)


def _rat_str(q) -> str:
    q = mpq(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _mono_str(coef, mono) -> str:
    ordered = sorted(mono, key=lambda ne: (_REG.by_name[ne[0]].kind != "surd", ne[0]))
    factors = [_gen_str(n) + (f"^{e}" if e != 1 else "") for n, e in ordered]
    if not factors:
        return _rat_str(coef)
    body = "*".join(factors)
    if coef == 1:
        return body
    if coef == -1:
        return "-" + body
    return _rat_str(coef) + "*" + body


def _poly_str(p: PolyElement) -> str:
    names = [str(s) for s in p.ring.symbols]
    items = []
    for m, c in p.items():
        mono = tuple((names[i], e) for i, e in enumerate(m) if e)
        items.append((mono, c))
    items.sort(key=lambda it: _mono_sort_key(it[0]))
    out = ""
    for i, (mono, c) in enumerate(items):
        s = _mono_str(c, mono)
        if i == 0:
            out = s
        elif s.startswith("-"):
            out += " - " + s[1:]
        else:
            out += " + " + s
    return out or "0"


def _coef_str(v) -> tuple[str, bool]:
    """String for a coefficient and whether it is a single signed factor."""
    if not isinstance(v, _Frac):
        return _rat_str(v), True
    num = _poly_str(v.num)
    if v.den == 1:
        return num, len(v.num) == 1
    den = _poly_str(v.den)
    nums = num if len(v.num) == 1 and not num.startswith("-") else f"({num})"
    dens = den if len(v.den) == 1 and "*" not in den else f"({den})"
    return f"{nums}/{dens}", False


def _exp_str(k: ExpKey) -> str:
    out = ""
    for i, (m, c) in enumerate(sorted(k, key=lambda mc: _mono_sort_key(mc[0]))):
        s = _mono_str(c, m)
        if i == 0:
            out = s
        elif s.startswith("-"):
            out += " - " + s[1:]
        else:
            out += " + " + s
    return f"exp({out})"


def _exp_sort_key(k: ExpKey):
    return (len(k), tuple((_mono_sort_key(m), (int(c.numerator), int(c.denominator))) for m, c in sorted(k, key=lambda mc: _mono_sort_key(mc[0]))))


def _term_str(v, k: ExpKey) -> str:
    cs, single = _coef_str(v)
    if not k:
        return cs
    e = _exp_str(k)
    if cs == "1":
        return e
    if cs == "-1":
        return "-" + e
    if single:
        return f"{cs}*{e}"
    return f"({cs})*{e}"


ZERO = Scalar({}, _trusted=True)
ONE = Scalar({(): mpq(1)}, _trusted=True)


# --------------------------------------------------------------------------
# ComplexScalar


class ComplexScalar:
    """``re + i*im`` with :class:`Scalar` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=ZERO, im=ZERO):
        self.re = _coerce(re)
        self.im = _coerce(im)

    @classmethod
    def of(cls, x) -> "ComplexScalar":
        if isinstance(x, ComplexScalar):
            return x
        return cls(_coerce(x), ZERO)

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> "ComplexScalar":
        return ComplexScalar(self.re, -self.im)

    def __eq__(self, other):
        if not isinstance(other, ComplexScalar):
            try:
                other = ComplexScalar.of(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        try:
            other = ComplexScalar.of(other)
        except TypeError:
            return NotImplemented
        return ComplexScalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexScalar(-self.re, -self.im)

    def __sub__(self, other):
        try:
            other = ComplexScalar.of(other)
        except TypeError:
            return NotImplemented
        return ComplexScalar(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return ComplexScalar.of(other) - self

    def __mul__(self, other):
        try:
            other = ComplexScalar.of(other)
        except TypeError:
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not d:
            return ComplexScalar(a * c, b * c) if b else ComplexScalar(a * c, ZERO)
        if not b:
            return ComplexScalar(a * c, a * d)
        return ComplexScalar(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self) -> "ComplexScalar":
        if not self.im:
            return ComplexScalar(self.re.inverse(), ZERO)
        if not self.re:
            return ComplexScalar(ZERO, -self.im.inverse())
        n = self.re * self.re + self.im * self.im
        return ComplexScalar(self.re / n, -self.im / n)

    def __truediv__(self, other):
        try:
            other = ComplexScalar.of(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ComplexScalar.of(other) * self.inverse()

    def __pow__(self, n: int):
        out = ComplexScalar(ONE)
        for _ in range(abs(n)):
            out = out * self
        return out.inverse() if n < 0 else out

    def derive(self, coord: int) -> "ComplexScalar":
        return ComplexScalar(self.re.derive(coord), self.im.derive(coord))

    def evaluate(self, values=None) -> complex:
        return complex(self.re.evaluate(values), self.im.evaluate(values))

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        ims = str(self.im)
        if ims == "1":
            ip = "i"
        elif ims == "-1":
            ip = "-i"
        elif _is_atomic(self.im):
            ip = f"{ims}*i"
        else:
            ip = f"({ims})*i"
        if not self.re:
            return ip
        return f"{self.re} - {ip[1:]}" if ip.startswith("-") else f"{self.re} + {ip}"

    def __repr__(self):
        return f"ComplexScalar({str(self)!r})"


def _is_atomic(s: Scalar) -> bool:
    if len(s._t) != 1:
        return False
    (k, v), = s._t.items()
    return _coef_str(v)[1]


I = ComplexScalar(ZERO, ONE)


# --------------------------------------------------------------------------
# public constructors


def param(name: str) -> Scalar:
    """Scalar for an indeterminate real parameter (registered on first use)."""
    _register_param(name)
    return Scalar.generator(name)


def func(name: str, coord: int, order: int = 0) -> Scalar:
    """Function symbol ``name(x_{coord+1})`` (or its ``order``-th derivative)."""
    full = _register_func(name, coord, 0)
    if order:
        full = _register_func(name, coord, order)
    return Scalar.generator(full)


def surd(d) -> Scalar:
    """Positive square root of a positive non-square rational."""
    q = as_rational(d)
    if q <= 0:
        raise ScalarError("surd radicand must be positive")
    if is_square(int(q.numerator * q.denominator)):
        raise ScalarError(f"{_rat_str(q)} is a perfect square, not a surd")
    return _rational_sqrt(q)


def sqrt(s) -> Scalar:
    return _coerce(s).sqrt()


def exp(s) -> Scalar:
    return _coerce(s).exp()


def normalize(s) -> Scalar:
    """Canonical form; construction already normalizes, so this is a coercion."""
    return _coerce(s)


def derive(s, coord: int):
    if isinstance(s, ComplexScalar):
        return s.derive(coord)
    return _coerce(s).derive(coord)


def evaluate(s, values: Mapping[str, float] | None = None):
    if isinstance(s, ComplexScalar):
        return s.evaluate(values)
    return _coerce(s).evaluate(values)


def is_zero(s) -> bool:
    if isinstance(s, ComplexScalar):
        return s.is_zero()
    return _coerce(s).is_zero()


def is_function_symbol(name: str) -> bool:
    g = _REG.by_name.get(name)
    return g is not None and g.kind == "func"


def function_info(name: str) -> tuple[str, int, int]:
    g = _REG.by_name[name]
    return g.base, g.coord, g.order


# --------------------------------------------------------------------------
# symbol table


@dataclass
class Parameter:
    name: str
    value: float | None = None
    value_text: str | None = None
    relation: mpq | None = None  # s**2 == relation
    positive: bool = True

    def scalar(self) -> Scalar:
        if self.relation is not None:
            r = surd(self.relation)
            return r if self.positive else -r
        return param(self.name)


@dataclass
class FunctionSymbol:
    name: str
    coord: int  # 0-based
    standin: tuple[float, ...] = ()  # polynomial coefficients, ascending powers

    def scalar(self) -> Scalar:
        return func(self.name, self.coord)


@dataclass
class SymbolTable:
    """Declared parameters, surds and function symbols of a model."""

    parameters: list[Parameter] = field(default_factory=list)
    functions: list[FunctionSymbol] = field(default_factory=list)

    def __post_init__(self) -> None:
        names = [p.name for p in self.parameters] + [f.name for f in self.functions]
        if len(names) != len(set(names)):
            raise ScalarError("duplicate symbol names")
        for p in self.parameters:
            if p.relation is not None:
                surd(p.relation)  # validates radicand

    def names(self) -> list[str]:
        return [p.name for p in self.parameters] + [f.name for f in self.functions]

    def lookup(self, name: str) -> Scalar | None:
        for p in self.parameters:
            if p.name == name:
                return p.scalar()
        for f in self.functions:
            if f.name == name:
                return f.scalar()
        return None

    def add_parameter(self, p: Parameter) -> None:
        if p.name in self.names():
            raise ScalarError(f"duplicate symbol {p.name!r}")
        if p.relation is not None:
            surd(p.relation)
        self.parameters.append(p)

    def add_function(self, f: FunctionSymbol) -> None:
        if f.name in self.names():
            raise ScalarError(f"duplicate symbol {f.name!r}")
        self.functions.append(f)

    def parameter_values(self, overrides: Mapping[str, float] | None = None) -> dict[str, float]:
        overrides = dict(overrides or {})
        vals: dict[str, float] = {}
        for p in self.parameters:
            if p.relation is not None:
                expected = math.sqrt(float(p.relation)) * (1 if p.positive else -1)
                if p.name in overrides and not math.isclose(overrides[p.name], expected, rel_tol=1e-12):
                    raise EvaluationError(f"value {overrides[p.name]} violates {p.name}^2 = {_rat_str(p.relation)}")
                continue
            v = overrides.pop(p.name, p.value)
            if v is not None:
                vals[p.name] = float(v)
        unknown = set(overrides) - set(self.names())
        if unknown:
            raise EvaluationError(f"unknown parameters {sorted(unknown)}")
        return vals

    def assignment(self, point: tuple[float, ...] | None = None, overrides: Mapping[str, float] | None = None, max_order: int = 4) -> dict[str, float]:
        """Numeric values for every declared symbol at a sample point."""
        vals = self.parameter_values(overrides)
        for f in self.functions:
            if point is None:
                continue
            vals.update(polynomial_assignment(f.name, f.standin, point[f.coord], max_order))
        return vals


def polynomial_assignment(name: str, coeffs: tuple[float, ...], x: float, max_order: int = 4) -> dict[str, float]:
    """Values of a polynomial stand-in ``sum c_k x^k`` and its derivatives."""
    out = {}
    cs = list(coeffs)
    for order in range(max_order + 1):
        out[name + _FUNC_PRIME * order] = sum(c * x ** k for k, c in enumerate(cs))
        cs = [k * c for k, c in enumerate(cs)][1:]
    return out
