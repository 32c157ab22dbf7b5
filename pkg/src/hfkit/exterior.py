"""Graded exterior algebra over a fixed coframe ``e1..en``.

Forms are sparse maps from increasing multi-indices (stored as bitmasks) to
:class:`~hfkit.scalars.ComplexScalar`.  The symplectic Hodge star is built
from the pairing that ``omega`` induces on the coframe through the
isomorphism ``X -> i_X omega``, extended to k-forms by Gram determinants.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Iterable, Iterator, Sequence

from . import linalg
from .scalars import I, ONE, ZERO, ComplexScalar, Scalar, ScalarError

__all__ = [
    "ExteriorError",
    "Form",
    "Endomorphism",
    "wedge",
    "interior",
    "evaluate_on",
    "pullback",
    "pairing",
    "symplectic_star",
    "metric_star",
    "volume",
    "bidegree",
    "derivation",
    "automorphism",
    "complex_partner",
    "omega_matrix",
]


class ExteriorError(ValueError):
    pass


# --------------------------------------------------------------------------
# multi-index helpers


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@lru_cache(maxsize=None)
def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@lru_cache(maxsize=None)
def wedge_sign(a: int, b: int) -> int:
    """Sign of ``e^A ^ e^B`` relative to ``e^{A+B}``; 0 when they overlap."""
    if a & b:
        return 0
    inv = 0
    for j in indices_of(b):
        inv += bin(a >> (j + 1)).count("1")
    return -1 if inv & 1 else 1


def sort_sign(seq: Sequence[int]) -> tuple[int, int]:
    """(sign, mask) of ``e^{s1} ^ ... ^ e^{sk}``; sign 0 on repeats."""
    if len(set(seq)) != len(seq):
        return 0, 0
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return (-1 if inv & 1 else 1), mask_of(seq)


def _mask_order(mask: int):
    return (bin(mask).count("1"), indices_of(mask))


@lru_cache(maxsize=None)
def basis_masks(n: int, k: int) -> tuple[int, ...]:
    return tuple(mask_of(c) for c in itertools.combinations(range(n), k))


# --------------------------------------------------------------------------
# Form


def _cs(x) -> ComplexScalar:
    return x if isinstance(x, ComplexScalar) else ComplexScalar.of(x)


class Form:
    """Immutable (possibly mixed-degree) exterior form with complex coefficients."""

    __slots__ = ("dim", "_c", "_hash")

    def __init__(self, dim: int, coeffs: dict | None = None, *, _trusted: bool = False):
        if dim < 1:
            raise ExteriorError("coframe dimension must be positive")
        self.dim = dim
        if _trusted:
            self._c = coeffs
        else:
            c = {}
            for m, v in (coeffs or {}).items():
                if m >> dim:
                    raise ExteriorError(f"index out of range for dimension {dim}")
                v = _cs(v)
                if v:
                    c[m] = v
            self._c = c
        self._hash = None

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "Form":
        return cls(dim, {}, _trusted=True)

    @classmethod
    def scalar(cls, dim: int, value) -> "Form":
        v = _cs(value)
        return cls(dim, {0: v} if v else {}, _trusted=True)

    @classmethod
    def basis(cls, dim: int, *indices: int, coeff=1) -> "Form":
        """``coeff * e^{i1} ^ ... ^ e^{ik}`` with 1-based indices in any order."""
        if any(not 1 <= i <= dim for i in indices):
            raise ExteriorError(f"generator index out of range 1..{dim}")
        sign, mask = sort_sign([i - 1 for i in indices])
        if not sign:
            return cls.zero(dim)
        return cls(dim, {mask: _cs(coeff) * sign})

    @classmethod
    def one_form(cls, dim: int, components: Sequence) -> "Form":
        return cls(dim, {1 << i: c for i, c in enumerate(components)})

    # structure --------------------------------------------------------------
    @property
    def coeffs(self) -> dict[int, ComplexScalar]:
        return dict(self._c)

    def items(self) -> Iterator[tuple[int, ComplexScalar]]:
        for m in sorted(self._c, key=_mask_order):
            yield m, self._c[m]

    def coeff(self, *indices: int) -> ComplexScalar:
        sign, mask = sort_sign([i - 1 for i in indices])
        if not sign:
            return ComplexScalar()
        return self._c.get(mask, ComplexScalar()) * sign

    def coeff_mask(self, mask: int) -> ComplexScalar:
        return self._c.get(mask, ComplexScalar())

    def degrees(self) -> set[int]:
        return {bin(m).count("1") for m in self._c}

    @property
    def degree(self) -> int | None:
        """Degree of a homogeneous form; ``None`` for mixed or zero forms."""
        d = self.degrees()
        return d.pop() if len(d) == 1 else None

    def is_homogeneous(self, k: int | None = None) -> bool:
        d = self.degrees()
        if not d:
            return True
        return len(d) == 1 and (k is None or k in d)

    def part(self, k: int) -> "Form":
        return Form(self.dim, {m: v for m, v in self._c.items() if bin(m).count("1") == k}, _trusted=True)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def is_real(self) -> bool:
        return all(v.is_real() for v in self._c.values())

    @property
    def re(self) -> "Form":
        return Form(self.dim, {m: ComplexScalar(v.re) for m, v in self._c.items() if v.re}, _trusted=True)

    @property
    def im(self) -> "Form":
        return Form(self.dim, {m: ComplexScalar(v.im) for m, v in self._c.items() if v.im}, _trusted=True)

    def conjugate(self) -> "Form":
        return Form(self.dim, {m: v.conjugate() for m, v in self._c.items()}, _trusted=True)

    def map(self, f) -> "Form":
        return Form(self.dim, {m: f(v) for m, v in self._c.items()})

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for v in self._c.values():
            out |= v.re.symbols() | v.im.symbols()
        return out

    def key(self):
        return (self.dim, tuple((m, hash(v)) for m, v in sorted(self._c.items())))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, tuple(sorted((m, hash(v)) for m, v in self._c.items()))))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Form):
            return self.dim == other.dim and self._c == other._c
        if isinstance(other, (int, Scalar, ComplexScalar)):
            return self == Form.scalar(self.dim, other)
        return NotImplemented

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "Form") -> None:
        if self.dim != other.dim:
            raise ExteriorError(f"coframe mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, Form):
            if isinstance(other, (int, Scalar, ComplexScalar)):
                other = Form.scalar(self.dim, other)
            else:
                return NotImplemented
        self._check(other)
        c = dict(self._c)
        for m, v in other._c.items():
            w = c.get(m)
            if w is None:
                c[m] = v
            else:
                s = w + v
                if s:
                    c[m] = s
                else:
                    del c[m]
        return Form(self.dim, c, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Form(self.dim, {m: -v for m, v in self._c.items()}, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, Form):
            if isinstance(other, (int, Scalar, ComplexScalar)):
                other = Form.scalar(self.dim, other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, s):
        if isinstance(s, Form):
            return wedge(self, s)
        if not isinstance(s, (int, Scalar, ComplexScalar)) and type(s).__name__ != "mpq":
            return NotImplemented
        s = _cs(s)
        if not s:
            return Form.zero(self.dim)
        c = {}
        for m, v in self._c.items():
            p = v * s
            if p:
                c[m] = p
        return Form(self.dim, c, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * _cs(s).inverse()

    def __xor__(self, other):
        return wedge(self, other)

    def __pow__(self, k: int):
        out = Form.scalar(self.dim, 1)
        for _ in range(k):
            out = wedge(out, self)
        return out

    # printing -------------------------------------------------------------
    def __str__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for m, v in self.items():
            name = "e" + "".join(str(i + 1) for i in indices_of(m)) if m else ""
            cs = str(v)
            atomic = _atomic(v)
            if not name:
                parts.append(cs if atomic else f"({cs})")
            elif cs == "1":
                parts.append(name)
            elif cs == "-1":
                parts.append("-" + name)
            elif atomic:
                parts.append(f"{cs}*{name}")
            else:
                parts.append(f"({cs})*{name}")
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"Form({self.dim}, {str(self)!r})"


def _atomic(v: ComplexScalar) -> bool:
    s = str(v)
    if v.im and v.re:
        return False
    body = s[1:] if s.startswith("-") else s
    return not any(op in body for op in (" + ", " - "))


# --------------------------------------------------------------------------
# basic operations


def wedge(a: Form, b: Form) -> Form:
    if not isinstance(a, Form) or not isinstance(b, Form):
        raise TypeError("wedge expects forms")
    a._check(b)
    out: dict[int, ComplexScalar] = {}
    for ma, va in a._c.items():
        for mb, vb in b._c.items():
            s = wedge_sign(ma, mb)
            if not s:
                continue
            p = va * vb
            if s < 0:
                p = -p
            m = ma | mb
            w = out.get(m)
            if w is None:
                out[m] = p
            else:
                t = w + p
                if t:
                    out[m] = t
                else:
                    del out[m]
    return Form(a.dim, {m: v for m, v in out.items() if v}, _trusted=True)


def interior(x: Sequence, a: Form) -> Form:
    """Contraction ``i_X a`` with a frame vector given by its components."""
    if len(x) != a.dim:
        raise ExteriorError("vector and form live on different coframes")
    xs = [ComplexScalar.of(c) for c in x]
    out = Form.zero(a.dim)
    acc: dict[int, ComplexScalar] = {}
    for m, v in a._c.items():
        for pos, i in enumerate(indices_of(m)):
            if not xs[i]:
                continue
            t = v * xs[i]
            if pos & 1:
                t = -t
            rest = m & ~(1 << i)
            acc[rest] = acc[rest] + t if rest in acc else t
    return out + Form(a.dim, acc)


def evaluate_on(a: Form, vectors: Sequence[Sequence]) -> ComplexScalar:
    """Value of the degree-k part of ``a`` on k frame vectors (determinant convention)."""
    k = len(vectors)
    total = ComplexScalar()
    for m, v in a._c.items():
        idx = indices_of(m)
        if len(idx) != k:
            continue
        sub = [[Scalar.rational(0) + vec[i] for vec in vectors] for i in idx]
        d = linalg.det(sub) if k else ONE
        if d:
            total = total + v * d
    return total


def pullback(vectors: Sequence[Sequence], a: Form) -> Form:
    """Restriction of ``a`` to the span of ``vectors`` in the induced coframe."""
    vecs = [[Scalar.rational(0) + c for c in v] for v in vectors]
    m = len(vecs)
    if m == 0:
        return Form.scalar(1, a.part(0)._c.get(0, ComplexScalar())) if a.dim else a
    if any(len(v) != a.dim for v in vecs):
        raise ExteriorError("vector length does not match the coframe")
    if linalg.rank(vecs) < m:
        raise ExteriorError("pullback vectors are linearly dependent")
    out: dict[int, ComplexScalar] = {}
    for k in sorted(a.degrees()):
        if k > m:
            continue
        part = a.part(k)
        for combo in itertools.combinations(range(m), k):
            val = evaluate_on(part, [vecs[c] for c in combo]) if k else part._c.get(0, ComplexScalar())
            if val:
                out[mask_of(combo)] = val
    return Form(m, out)


# --------------------------------------------------------------------------
# endomorphisms


@dataclass(frozen=True)
class Endomorphism:
    """Square matrix acting on the frame (columns are images) or the coframe."""

    matrix: tuple[tuple[Scalar, ...], ...]
    acts_on: str = "frame"

    def __post_init__(self):
        if self.acts_on not in ("frame", "coframe"):
            raise ValueError("acts_on must be 'frame' or 'coframe'")
        n = len(self.matrix)
        if any(len(r) != n for r in self.matrix):
            raise ValueError("endomorphism matrix must be square")

    @classmethod
    def from_rows(cls, rows, acts_on: str = "frame") -> "Endomorphism":
        return cls(tuple(tuple(Scalar.rational(0) + x for x in r) for r in rows), acts_on)

    @classmethod
    def from_images(cls, images: Sequence[Sequence], acts_on: str = "frame") -> "Endomorphism":
        """Build from the images of the basis vectors (image j = column j)."""
        n = len(images)
        return cls.from_rows([[images[j][i] for j in range(n)] for i in range(n)], acts_on)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def rows(self) -> list[list[Scalar]]:
        return [list(r) for r in self.matrix]

    def image(self, j: int) -> tuple[Scalar, ...]:
        return tuple(r[j] for r in self.matrix)

    def apply(self, v: Sequence) -> tuple[Scalar, ...]:
        return tuple(linalg.matvec(self.matrix, [Scalar.rational(0) + x for x in v]))

    __call__ = apply

    def compose(self, other: "Endomorphism") -> "Endomorphism":
        return Endomorphism.from_rows(linalg.matmul(self.matrix, other.matrix), self.acts_on)

    def __matmul__(self, other):
        return self.compose(other)

    def scaled(self, s) -> "Endomorphism":
        return Endomorphism.from_rows(linalg.scale(self.matrix, s), self.acts_on)

    def dual(self) -> "Endomorphism":
        """Transpose, moving between frame and coframe."""
        other = "coframe" if self.acts_on == "frame" else "frame"
        return Endomorphism.from_rows(linalg.transpose(self.matrix), other)

    def is_almost_complex(self) -> bool:
        sq = linalg.matmul(self.matrix, self.matrix)
        return all((sq[i][j] + (ONE if i == j else ZERO)).is_zero() for i in range(self.dim) for j in range(self.dim))

    def scalar_square(self) -> Scalar | None:
        """``c`` with ``A^2 = c I``, or ``None``."""
        sq = linalg.matmul(self.matrix, self.matrix)
        c = sq[0][0]
        for i in range(self.dim):
            for j in range(self.dim):
                want = c if i == j else ZERO
                if sq[i][j] != want:
                    return None
        return c

    def determinant(self) -> Scalar:
        return linalg.det(self.rows())

    def __eq__(self, other):
        return isinstance(other, Endomorphism) and self.acts_on == other.acts_on and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.acts_on, self.matrix))

    def __str__(self) -> str:
        rows = ["[" + ", ".join(str(x) for x in r) + "]" for r in self.matrix]
        return f"{self.acts_on}[" + ", ".join(rows) + "]"


def _coframe_action_rows(a: Endomorphism) -> list[list[Scalar]]:
    """Rows ``r_j`` with ``e^j o A = sum_k r_j[k] e^k`` (frame endomorphism)."""
    if a.acts_on == "frame":
        return a.rows()
    # coframe endomorphism: P(e^j) = sum_i M[i][j] e^i
    return linalg.transpose(a.matrix)


def derivation(a: Endomorphism, form: Form) -> Form:
    """Extend the coframe action of ``a`` to forms as a derivation."""
    rows = _coframe_action_rows(a)
    acc: dict[int, ComplexScalar] = {}
    for m, v in form._c.items():
        idx = indices_of(m)
        for p, ip in enumerate(idx):
            rest = m & ~(1 << ip)
            before, after = idx[:p], idx[p + 1:]
            for k, coef in enumerate(rows[ip]):
                if not coef or (rest >> k) & 1:
                    continue
                inv = sum(1 for x in before if x > k) + sum(1 for x in after if x < k)
                t = v * coef
                if inv & 1:
                    t = -t
                nm = rest | (1 << k)
                acc[nm] = acc[nm] + t if nm in acc else t
    return Form(form.dim, acc)


def automorphism(a: Endomorphism, form: Form) -> Form:
    """Extend the coframe action of ``a`` multiplicatively (pullback by ``a``)."""
    rows = _coframe_action_rows(a)
    n = form.dim
    images = [Form.one_form(n, rows[j]) for j in range(n)]
    out = Form.zero(n)
    for m, v in form._c.items():
        t = Form.scalar(n, v)
        for i in indices_of(m):
            t = wedge(t, images[i])
        out = out + t
    return out


def complex_partner(j: Endomorphism, form: Form) -> Form:
    """``-(1/k) D_J form``: the imaginary partner of a real (k,0)+(0,k) form."""
    k = form.degree
    if k is None:
        if not form:
            return form
        raise ExteriorError("complex_partner needs a homogeneous form")
    return derivation(j, form) * Scalar.rational(-1) / k


def bidegree(j: Endomorphism, form: Form) -> list[tuple[tuple[int, int], Form]]:
    """Decompose a homogeneous form into J-(p,q) components."""
    if not j.is_almost_complex():
        raise ExteriorError("J is not almost complex (J^2 != -1)")
    k = form.degree
    if k is None:
        if not form:
            return []
        raise ExteriorError("bidegree needs a homogeneous form")
    eig = {p: I * (2 * p - k) for p in range(k + 1)}
    # powers D^r form once; each projector is a Lagrange polynomial in D
    powers = [form]
    for _ in range(k):
        powers.append(derivation(j, powers[-1]))
    out = []
    for p in range(k + 1):
        poly = [ComplexScalar(ONE)]
        for q, lam in eig.items():
            if q == p:
                continue
            scale = ComplexScalar(ONE) / (eig[p] - lam)
            shifted = [ComplexScalar()] + poly
            poly = [(shifted[r] - (poly[r] * lam if r < len(poly) else ComplexScalar())) * scale for r in range(len(shifted))]
        comp = Form.zero(form.dim)
        for c, f in zip(poly, powers):
            if c:
                comp = comp + f * c
        if comp:
            out.append(((p, k - p), comp))
    return out


# --------------------------------------------------------------------------
# symplectic pairing and star


def omega_matrix(omega: Form) -> list[list[Scalar]]:
    """``W[i][j] = omega(e_i, e_j)`` for a real 2-form."""
    if not omega.is_homogeneous(2) or not omega:
        raise ExteriorError("omega must be a nonzero 2-form")
    if not omega.is_real():
        raise ExteriorError("omega must be real")
    n = omega.dim
    w = linalg.zeros(n, n)
    for m, v in omega._c.items():
        i, j = indices_of(m)
        w[i][j] = v.re
        w[j][i] = -v.re
    return w


@dataclass
class _StarData:
    dim: int
    gram: list  # pairing on 1-forms
    vol: Scalar  # coefficient of the volume form on e^{1..n}
    mats: dict  # degree -> {mask: Form}


_STAR_CACHE: dict = {}
_STAR_LOCK = threading.Lock()


def _symplectic_data(omega: Form) -> _StarData:
    key = ("symp", omega.key())
    data = _STAR_CACHE.get(key)
    if data is not None:
        return data
    w = omega_matrix(omega)
    n = omega.dim
    if n % 2:
        raise ExteriorError("odd dimension carries no symplectic form")
    try:
        winv = linalg.inverse(w)
    except ZeroDivisionError:
        raise ExteriorError("omega is degenerate") from None
    # pairing on 1-forms: omega(a, b) = a^T (W^T)^{-1} b
    gram = linalg.transpose(winv)
    vol = volume(omega).coeff(*range(1, n + 1)).re
    data = _StarData(n, gram, vol, {})
    with _STAR_LOCK:
        _STAR_CACHE[key] = data
    return data


def _metric_data(gram_frame: Sequence[Sequence[Scalar]], vol: Form) -> _StarData:
    n = len(gram_frame)
    key = ("metric", tuple(tuple(r) for r in gram_frame), vol.key())
    data = _STAR_CACHE.get(key)
    if data is not None:
        return data
    cogram = linalg.inverse([list(r) for r in gram_frame])
    data = _StarData(n, cogram, vol.coeff(*range(1, n + 1)).re, {})
    with _STAR_LOCK:
        _STAR_CACHE[key] = data
    return data


def _basis_pairing(data: _StarData, mi: int, mj: int) -> Scalar:
    ii, jj = indices_of(mi), indices_of(mj)
    if not ii:
        return ONE
    return linalg.det([[data.gram[a][b] for b in jj] for a in ii])


def _pair(data: _StarData, a: Form, b: Form) -> ComplexScalar:
    total = ComplexScalar()
    for ma, va in a._c.items():
        for mb, vb in b._c.items():
            g = _basis_pairing(data, ma, mb)
            if g:
                total = total + va * vb * g
    return total


def _star_of_basis(data: _StarData, mj: int) -> Form:
    k = bin(mj).count("1")
    table = data.mats.setdefault(k, {})
    f = table.get(mj)
    if f is None:
        n = data.dim
        full = (1 << n) - 1
        c = {}
        for mi in basis_masks(n, k):
            g = _basis_pairing(data, mi, mj)
            if not g:
                continue
            comp = full & ~mi
            c[comp] = ComplexScalar(g * data.vol * wedge_sign(mi, comp))
        f = Form(n, c)
        table[mj] = f
    return f


def _star(data: _StarData, a: Form) -> Form:
    out = Form.zero(data.dim)
    for m, v in a._c.items():
        out = out + _star_of_basis(data, m) * v
    return out


def volume(omega: Form) -> Form:
    """``omega^n / n!``."""
    n = omega.dim // 2
    return omega ** n / factorial(n)


def pairing(omega: Form, a: Form, b: Form) -> ComplexScalar:
    """Bilinear pairing induced by ``omega`` on forms of equal degree."""
    a._check(b)
    omega._check(a)
    ka, kb = a.degree, b.degree
    if a and b and (ka is None or kb is None or ka != kb):
        raise ExteriorError("pairing needs homogeneous forms of equal degree")
    return _pair(_symplectic_data(omega), a, b)


def symplectic_star(omega: Form, a: Form) -> Form:
    """Unique form with ``b ^ *a = pairing(b, a) omega^n/n!`` for all b."""
    omega._check(a)
    if not a.is_homogeneous():
        raise ExteriorError("symplectic star needs a homogeneous form")
    return _star(_symplectic_data(omega), a)


def metric_star(gram_frame: Sequence[Sequence[Scalar]], vol: Form, a: Form) -> Form:
    """Riemannian Hodge star of the frame Gram matrix, oriented by ``vol``."""
    if not a.is_homogeneous():
        raise ExteriorError("Hodge star needs a homogeneous form")
    return _star(_metric_data(gram_frame, vol), a)


def metric_pairing(gram_frame, vol: Form, a: Form, b: Form) -> ComplexScalar:
    return _pair(_metric_data(gram_frame, vol), a, b)
