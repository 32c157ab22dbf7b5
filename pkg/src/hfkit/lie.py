"""Structure equations, exterior derivative, brackets and invariant cohomology."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from . import linalg
from .exterior import (
    Endomorphism,
    ExteriorError,
    Form,
    basis_masks,
    indices_of,
    wedge,
)
from .report import Check, Report
from .scalars import ONE, ZERO, ComplexScalar, Scalar, SymbolTable

__all__ = [
    "ModelError",
    "StructureModel",
    "Distribution",
    "CohomologyResult",
    "PrimitiveResult",
    "d",
    "check_integrability_of_d",
    "bracket",
    "vector_bracket",
    "structure_constants",
    "is_unimodular",
    "nijenhuis",
    "cohomology",
    "lefschetz",
    "find_primitive",
    "express_in_cohomology",
]

Vector = tuple  # tuple[Scalar, ...]


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Distribution:
    """Span of frame vectors (components in the frame ``x1..xn``)."""

    vectors: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self):
        if self.vectors and linalg.rank([list(v) for v in self.vectors]) < len(self.vectors):
            raise ModelError("distribution vectors are linearly dependent")

    @classmethod
    def span(cls, dim: int, *vectors) -> "Distribution":
        """Accepts 1-based frame indices or explicit component sequences."""
        out = []
        for v in vectors:
            if isinstance(v, int):
                comp = [ZERO] * dim
                comp[v - 1] = ONE
                out.append(tuple(comp))
            else:
                out.append(tuple(Scalar.rational(0) + c for c in v))
        return cls(tuple(out))

    @property
    def rank(self) -> int:
        return len(self.vectors)


@dataclass
class StructureModel:
    """A coframe with its differential table plus declared geometric data.

    ``mode`` is ``"invariant"`` (constant structure constants, constant
    coefficients) or ``"coordinate"`` (closed coframe ``dx_k``, coefficients
    may depend on coordinates through function symbols).
    """

    dim: int
    mode: str = "invariant"
    differentials: list[Form] = field(default_factory=list)
    symbols: SymbolTable = field(default_factory=SymbolTable)
    forms: dict[str, Form] = field(default_factory=dict)
    endos: dict[str, Endomorphism] = field(default_factory=dict)
    dists: dict[str, Distribution] = field(default_factory=dict)
    points: list[tuple[float, ...]] = field(default_factory=list)
    name: str = ""
    notes: list[str] = field(default_factory=list)
    overrides: dict[str, float] = field(default_factory=dict)
    _dmemo: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in ("invariant", "coordinate"):
            raise ModelError(f"unknown mode {self.mode!r}")
        if not self.differentials:
            self.differentials = [Form.zero(self.dim) for _ in range(self.dim)]
        if len(self.differentials) != self.dim:
            raise ModelError("differential table must list one entry per generator")
        for k, f in enumerate(self.differentials):
            if f.dim != self.dim:
                raise ModelError("differential table on the wrong coframe")
            if f and not f.is_homogeneous(2):
                raise ModelError(f"d e{k + 1}: expected degree-2 form")
            if self.mode == "coordinate" and f:
                raise ModelError("coordinate mode requires a closed coframe")
            if f.symbols() & self._function_names():
                raise ModelError("structure constants must not depend on coordinates")

    def _function_names(self) -> set[str]:
        return {f.name for f in self.symbols.functions}

    def gen(self, *indices: int, coeff=1) -> Form:
        return Form.basis(self.dim, *indices, coeff=coeff)

    def frame(self, k: int) -> tuple[Scalar, ...]:
        v = [ZERO] * self.dim
        v[k - 1] = ONE
        return tuple(v)

    def samples(self, overrides: dict | None = None) -> list[dict[str, float]]:
        """Numeric assignments used for sign decisions."""
        overrides = {**self.overrides, **(overrides or {})}
        if self.symbols.functions:
            pts = self.points or [tuple(0.1 * (i + 1) for i in range(self.dim))]
            return [self.symbols.assignment(p, overrides) for p in pts]
        return [self.symbols.assignment(None, overrides)]

    def is_invariant(self) -> bool:
        return self.mode == "invariant"


# --------------------------------------------------------------------------
# exterior derivative


def _d_basis(model: StructureModel, mask: int) -> Form:
    memo = model._dmemo
    f = memo.get(mask)
    if f is not None:
        return f
    idx = indices_of(mask)
    n = model.dim
    if not idx:
        f = Form.zero(n)
    else:
        first = idx[0]
        rest = mask & ~(1 << first)
        head = model.differentials[first]
        tail = Form(n, {rest: ComplexScalar(ONE)}, _trusted=True)
        f = wedge(head, tail) - wedge(Form(n, {1 << first: ComplexScalar(ONE)}, _trusted=True), _d_basis(model, rest))
    memo[mask] = f
    return f


def d(model: StructureModel, a: Form) -> Form:
    """Exterior derivative (antiderivation extending the differential table)."""
    if a.dim != model.dim:
        raise ExteriorError("form lives on a different coframe")
    n = model.dim
    out = Form.zero(n)
    coord = model.mode == "coordinate"
    if not coord:
        funcs = a.symbols() & model._function_names()
        if funcs:
            raise ModelError(f"invariant mode coefficients depend on {sorted(funcs)}")
    for m, v in a._c.items():
        db = _d_basis(model, m)
        if db:
            out = out + db * v
        if coord:
            terms = {}
            for k in range(n):
                if (m >> k) & 1:
                    continue
                dv = v.derive(k)
                if dv:
                    # dx_k ^ e^I
                    sign = -1 if bin(m & ((1 << k) - 1)).count("1") & 1 else 1
                    terms[m | (1 << k)] = dv * sign
            if terms:
                out = out + Form(n, terms)
    return out


def check_integrability_of_d(model: StructureModel) -> Report:
    """Certify ``d(d e_k) = 0`` for every generator (Jacobi identity)."""
    checks = []
    first_failure = None
    for k in range(model.dim):
        dd = d(model, model.differentials[k])
        ok = dd.is_zero()
        if not ok and first_failure is None:
            first_failure = k
        checks.append(Check(f"d(d e{k + 1}) = 0", ok, {} if ok else {"d(d e)": str(dd)}))
    rep = Report("check-d2", checks)
    if first_failure is not None:
        rep.data["first_failure"] = f"e{first_failure + 1}"
    return rep


# --------------------------------------------------------------------------
# brackets


def structure_constants(model: StructureModel) -> dict[tuple[int, int], tuple[Scalar, ...]]:
    """``[e_i, e_j]`` for ``i < j`` (0-based) from ``d a(X, Y) = -a([X, Y])``."""
    n = model.dim
    out = {}
    for i, j in itertools.combinations(range(n), 2):
        mask = (1 << i) | (1 << j)
        comp = []
        for k in range(n):
            c = model.differentials[k]._c.get(mask)
            comp.append(-c.re if c is not None else ZERO)
        out[(i, j)] = tuple(comp)
    return out


def _basis_bracket(model: StructureModel, i: int, j: int) -> tuple[Scalar, ...]:
    if model.mode == "coordinate" or i == j:
        return tuple([ZERO] * model.dim)
    consts = model.__dict__.setdefault("_consts", None) or structure_constants(model)
    model.__dict__["_consts"] = consts
    if i < j:
        return consts[(i, j)]
    return tuple(-x for x in consts[(j, i)])


def vector_bracket(model: StructureModel, x: Sequence, y: Sequence) -> tuple[Scalar, ...]:
    """Lie bracket of vector fields with (possibly non-constant) components."""
    n = model.dim
    xs = [Scalar.rational(0) + c for c in x]
    ys = [Scalar.rational(0) + c for c in y]
    out = [ZERO] * n
    if model.mode == "coordinate":
        for i in range(n):
            if xs[i]:
                for k in range(n):
                    dy = ys[k].derive(i)
                    if dy:
                        out[k] = out[k] + xs[i] * dy
            if ys[i]:
                for k in range(n):
                    dx = xs[k].derive(i)
                    if dx:
                        out[k] = out[k] - ys[i] * dx
        return tuple(out)
    for i in range(n):
        if not xs[i]:
            continue
        for j in range(n):
            if not ys[j] or i == j:
                continue
            c = xs[i] * ys[j]
            br = _basis_bracket(model, i, j)
            for k in range(n):
                if br[k]:
                    out[k] = out[k] + c * br[k]
    return tuple(out)


def bracket(model: StructureModel, x: Sequence, y: Sequence) -> tuple[Scalar, ...]:
    """Bracket of left-invariant frame vectors (invariant mode only)."""
    if model.mode != "invariant":
        raise ModelError("bracket of frame vectors needs invariant mode")
    return vector_bracket(model, x, y)


def is_unimodular(model: StructureModel) -> bool:
    """``trace(ad_X) = 0`` for every frame vector."""
    n = model.dim
    for i in range(n):
        tr = ZERO
        for j in range(n):
            tr = tr + _basis_bracket(model, i, j)[j]
        if tr:
            return False
    return True


def nijenhuis(model: StructureModel, J: Endomorphism) -> dict[tuple[int, int], tuple[Scalar, ...]]:
    """``N_J(e_i, e_j)`` for ``i < j`` (0-based pairs)."""
    if J.acts_on != "frame":
        raise ExteriorError("Nijenhuis tensor needs J acting on the frame")
    if not J.is_almost_complex():
        raise ExteriorError("J is not almost complex")
    n = model.dim
    images = [J.image(j) for j in range(n)]
    out = {}
    for i, j in itertools.combinations(range(n), 2):
        x, y = model.frame(i + 1), model.frame(j + 1)
        jx, jy = images[i], images[j]
        t1 = vector_bracket(model, jx, jy)
        t2 = J.apply(vector_bracket(model, jx, y))
        t3 = J.apply(vector_bracket(model, x, jy))
        t4 = vector_bracket(model, x, y)
        out[(i, j)] = tuple(a - b - c - e for a, b, c, e in zip(t1, t2, t3, t4))
    return out


def nijenhuis_vanishes(table) -> bool:
    return all(not c for v in table.values() for c in v)


# --------------------------------------------------------------------------
# cohomology


@dataclass
class CohomologyResult:
    degree: int
    betti: int
    representatives: list[Form]
    exact_basis: list[Form]
    cocycle_dim: int = 0

    def summary(self) -> dict:
        return {
            "degree": self.degree,
            "betti": self.betti,
            "representatives": [str(f) for f in self.representatives],
        }


def _vector_of(form: Form, k: int) -> list[Scalar]:
    masks = basis_masks(form.dim, k)
    out = []
    for m in masks:
        v = form._c.get(m)
        if v is not None and v.im:
            raise ExteriorError("cohomology works with real forms")
        out.append(v.re if v is not None else ZERO)
    return out


def _form_of(vec: Sequence[Scalar], n: int, k: int) -> Form:
    return Form(n, {m: ComplexScalar(x) for m, x in zip(basis_masks(n, k), vec) if x})


def d_matrix(model: StructureModel, k: int) -> list[list[Scalar]]:
    """Matrix of ``d: L^k -> L^{k+1}`` in lexicographic bases (columns = sources)."""
    n = model.dim
    src = basis_masks(n, k)
    tgt_n = len(basis_masks(n, k + 1)) if k + 1 <= n else 0
    cols = []
    for m in src:
        df = _d_basis(model, m)
        cols.append(_vector_of(df, k + 1) if k + 1 <= n else [])
    if tgt_n == 0:
        return []
    return linalg.transpose(cols)


def _require_invariant(model: StructureModel) -> None:
    for f in model.differentials:
        if f.symbols() & model._function_names():
            raise ModelError("invariant cohomology needs constant structure constants")


def cohomology(model: StructureModel, k: int) -> CohomologyResult:
    """Chevalley-Eilenberg cohomology in degree ``k`` with canonical representatives.

    Representatives are cocycles reduced modulo coboundaries so that they avoid
    the lexicographically largest multi-indices, then put in reduced echelon form.
    """
    _require_invariant(model)
    n = model.dim
    if k < 0 or k > n:
        return CohomologyResult(k, 0, [], [], 0)
    size = len(basis_masks(n, k))
    dk = d_matrix(model, k)
    cocycles = linalg.nullspace(dk, size) if dk else [[ONE if i == j else ZERO for i in range(size)] for j in range(size)]
    if k > 0:
        dprev = d_matrix(model, k - 1)
        exact_rows, _ = linalg.rref(linalg.transpose(dprev), col_order=range(size - 1, -1, -1))
    else:
        exact_rows = []
    # reduce cocycles modulo exact rows (pivots on the largest indices)
    reduced = []
    ex_piv = [max(c for c in range(size) if row[c]) for row in exact_rows]
    for z in cocycles:
        z = list(z)
        for row, p in zip(exact_rows, ex_piv):
            if z[p]:
                f = z[p]
                z = [a - f * b if b else a for a, b in zip(z, row)]
        reduced.append(z)
    reps, _ = linalg.rref(reduced) if reduced else ([], [])
    reps = [r for r in reps if any(r)]
    return CohomologyResult(
        degree=k,
        betti=len(reps),
        representatives=[_form_of(r, n, k) for r in reps],
        exact_basis=[_form_of(r, n, k) for r in exact_rows],
        cocycle_dim=len(cocycles),
    )


def express_in_cohomology(model: StructureModel, form: Form, coh: CohomologyResult) -> list[Scalar] | None:
    """Coordinates of the class of a closed form in the basis of ``coh``."""
    k = coh.degree
    target = _vector_of(form, k)
    cols = [_vector_of(r, k) for r in coh.representatives] + [_vector_of(b, k) for b in coh.exact_basis]
    if not cols:
        return [] if not any(target) else None
    sol = linalg.solve(linalg.transpose(cols), target)
    if sol is None:
        return None
    return sol[: len(coh.representatives)]


def lefschetz(model: StructureModel, omega: Form, k: int) -> Report:
    """Matrix of ``[a] -> [omega^k ^ a]`` from ``H^{m-k}`` to ``H^{m+k}``, ``2m = dim``."""
    domega = d(model, omega)
    if domega:
        raise ModelError("omega is not closed")
    m = model.dim // 2
    src = cohomology(model, m - k)
    tgt = cohomology(model, m + k)
    wk = omega ** k
    cols = []
    for rep in src.representatives:
        coords = express_in_cohomology(model, wedge(wk, rep), tgt)
        if coords is None:
            raise ModelError("image of a cocycle is not closed")
        cols.append(coords)
    matrix = linalg.transpose(cols) if cols and tgt.betti else [[] for _ in range(tgt.betti)]
    r = linalg.rank(matrix) if cols and tgt.betti else 0
    square = src.betti == tgt.betti
    iso = square and r == src.betti
    checks = [
        Check("dimensions agree", square, {"b_source": src.betti, "b_target": tgt.betti}),
        Check("full rank", r == max(src.betti, tgt.betti), {"rank": r, "deficit": max(src.betti, tgt.betti) - r}),
    ]
    rep = Report(f"lefschetz k={k}", checks)
    rep.data.update(
        {
            "k": k,
            "source_degree": m - k,
            "target_degree": m + k,
            "matrix": [[str(x) for x in row] for row in matrix],
            "rank": r,
            "iso": iso,
        }
    )
    return rep


@dataclass
class PrimitiveResult:
    exact: bool
    primitive: Form | None
    certificate: dict

    def __bool__(self):
        return self.exact


def find_primitive(model: StructureModel, b: Form) -> PrimitiveResult:
    """Solve ``d a = b`` over invariant forms; witness the class otherwise."""
    _require_invariant(model)
    if d(model, b):
        raise ModelError("form is not closed")
    n = model.dim
    if not b:
        return PrimitiveResult(True, Form.zero(n), {"d(primitive) == form": True})
    k = b.degree
    if k is None:
        raise ExteriorError("find_primitive needs a homogeneous form")
    if k == 0:
        coh = cohomology(model, 0)
        return PrimitiveResult(False, None, {"class": [str(b)], "betti": coh.betti})
    re_part, im_part = b.re, b.im
    sols = []
    for part in (re_part, im_part):
        if not part:
            sols.append(Form.zero(n))
            continue
        x = linalg.solve(d_matrix(model, k - 1), _vector_of(part, k))
        if x is None:
            sols.append(None)
        else:
            sols.append(_form_of(x, n, k - 1))
    if sols[0] is None or sols[1] is None:
        coh = cohomology(model, k)
        coords = []
        for part in (re_part, im_part):
            c = express_in_cohomology(model, part, coh) if part else [ZERO] * coh.betti
            coords.append([str(x) for x in c] if c is not None else None)
        return PrimitiveResult(False, None, {"class_coordinates_re": coords[0], "class_coordinates_im": coords[1], "betti": coh.betti})
    prim = sols[0] + sols[1] * ComplexScalar(ZERO, ONE)
    ok = d(model, prim) == b
    return PrimitiveResult(True, prim, {"d(primitive) == form": ok, "primitive": str(prim)})
