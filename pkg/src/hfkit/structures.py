"""Stable 3-forms, SU(3)/SU(2) structures, half-flatness and their certificates."""

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
    bidegree,
    complex_partner,
    derivation,
    interior,
    metric_star,
    omega_matrix,
    pairing,
    pullback,
    symplectic_star,
    wedge,
)
from .lie import (
    Distribution,
    ModelError,
    StructureModel,
    cohomology,
    d,
    express_in_cohomology,
    find_primitive,
    nijenhuis,
    vector_bracket,
)
from .report import Report
from .scalars import I, ONE, ZERO, ComplexScalar, Scalar, ScalarError, surd

__all__ = [
    "StabilityError",
    "SU3Structure",
    "SU2Structure",
    "StabilityReport",
    "ConnectionTable",
    "decide_sign",
    "p_operator",
    "stability",
    "induced_volume",
    "metric_matrix",
    "verify_su3",
    "verify_halfflat",
    "lemma23_verdicts",
    "lemma23_crosscheck",
    "connection_tables",
    "slag_check",
    "su2_verify",
    "su2_induced_endo",
    "su2_complex_structure",
    "su2_certify",
    "h2_bound_check",
]

_HALF = Scalar.rational("1/2")


class StabilityError(RuntimeError):
    """The two positivity tests disagree (a convention bug, never user error)."""


def decide_sign(model: StructureModel | None, s: Scalar) -> int:
    """Exact sign for rationals, otherwise agreement over the model's samples."""
    if s.is_rational():
        return s.sign()
    if not s:
        return 0
    samples = model.samples() if model is not None else [{}]
    return s.sign(samples)


def _top(form: Form) -> ComplexScalar:
    return form.coeff(*range(1, form.dim + 1))


def _real(c: ComplexScalar, what: str) -> Scalar:
    if c.im:
        raise ExteriorError(f"{what} must be real")
    return c.re


def _check_real(form: Form, what: str) -> None:
    if not form.is_real():
        raise ExteriorError(f"{what} must be a real form")


def _definite(model, m: list[list[Scalar]], sign: int) -> tuple[bool, list[str]]:
    """Sylvester test for ``sign * m`` positive definite; returns minors too."""
    n = len(m)
    minors = []
    ok = True
    for k in range(1, n + 1):
        sub = [[m[i][j] * sign for j in range(k)] for i in range(k)]
        det = linalg.det(sub)
        minors.append(str(det))
        if decide_sign(model, det) <= 0:
            ok = False
            break
    return ok, minors


def _semidefinite(model, m: list[list[Scalar]]) -> tuple[bool, str | None]:
    """All principal minors nonnegative."""
    n = len(m)
    for k in range(1, n + 1):
        for idx in itertools.combinations(range(n), k):
            det = linalg.det([[m[i][j] for j in idx] for i in idx])
            if decide_sign(model, det) < 0:
                return False, f"minor {list(idx)} = {det}"
    return True, None


# --------------------------------------------------------------------------
# structures


@dataclass
class SU3Structure:
    omega: Form
    J: Endomorphism
    psi: Form
    origin: str = ""

    @property
    def Omega(self) -> Form:
        return self.psi.re

    @property
    def dim(self) -> int:
        return self.omega.dim

    def metric(self) -> list[list[Scalar]]:
        return metric_matrix(self.omega, self.J)

    def exp_sigma(self) -> Scalar:
        """``e^sigma`` with ``psi ^ conj(psi) = -i e^sigma omega^3``."""
        lhs = _top(wedge(self.psi, self.psi.conjugate()))
        rhs = _top(self.omega ** 3) * ComplexScalar(ZERO, -ONE)
        return _real(lhs / rhs, "psi ^ conj(psi) / (-i omega^3)")


@dataclass
class SU2Structure:
    omega: Form
    plus: Form
    minus: Form
    J: Endomorphism | None = None

    @property
    def psi(self) -> Form:
        return self.plus + self.minus * I

    @classmethod
    def from_triple(cls, model, omega, plus, minus) -> "SU2Structure":
        return cls(omega, plus, minus, su2_complex_structure(model, plus, minus))

    def metric(self) -> list[list[Scalar]]:
        if self.J is None:
            raise ExteriorError("no almost complex structure attached")
        return metric_matrix(self.omega, self.J)


def metric_matrix(omega: Form, J: Endomorphism) -> list[list[Scalar]]:
    """``g(e_i, e_j) = omega(e_i, J e_j)``."""
    if J.acts_on != "frame":
        J = J.dual()
    return linalg.matmul(omega_matrix(omega), J.rows())


# --------------------------------------------------------------------------
# stable forms


def p_operator(model: StructureModel | None, Omega: Form, omega: Form) -> Endomorphism:
    """``P(a) = -1/2 * star(Omega ^ star(Omega ^ a))`` on the coframe."""
    n = omega.dim
    if n != 6:
        raise ExteriorError("P is defined in dimension 6")
    _check_real(Omega, "Omega")
    if Omega and not Omega.is_homogeneous(3):
        raise ExteriorError("Omega must be a 3-form")
    cols = []
    for j in range(1, n + 1):
        a = Form.basis(n, j)
        img = symplectic_star(omega, wedge(Omega, symplectic_star(omega, wedge(Omega, a)))) * (-_HALF)
        cols.append([img.coeff(i).re for i in range(1, n + 1)])
    # M[i][j] = coefficient of e^i in P(e^j)
    return Endomorphism.from_rows(linalg.transpose(cols), acts_on="coframe")


@dataclass
class StabilityReport:
    injective: bool
    definiteness: str  # negative, positive, indefinite, degenerate
    P: Endomorphism
    c: Scalar | None
    det: Scalar
    omega_wedge_zero: bool
    orbit_test: bool  # injective and negative definite
    operator_test: bool  # complex type and tamed
    positive: bool
    normalized: bool
    minors: list[str] = field(default_factory=list)
    complex_type: bool = False  # P^2 = cI, c < 0, c^3 = -det P
    tamed: bool = False  # omega(., J_P .) positive definite

    def report(self) -> Report:
        r = Report("stable")
        r.add("Omega ^ omega = 0", self.omega_wedge_zero)
        r.add("F_Omega injective", self.injective)
        r.add("pairing negative definite on Im F_Omega", self.definiteness == "negative", {"definiteness": self.definiteness, "minors": self.minors})
        r.add("P^2 = c I with c < 0", self.complex_type, {"c": self.c if self.c is not None else "none", "det P": self.det})
        r.add("omega(., J_P .) positive definite", self.tamed)
        r.add("normalized (det P = 1)", self.normalized, {"det P": self.det}, informational=True)
        r.data.update({"positive": self.positive, "normalized": self.normalized, "P": str(self.P)})
        return r


def stability(model: StructureModel | None, Omega: Form, omega: Form) -> StabilityReport:
    """Run both positivity tests and cross-validate them."""
    n = omega.dim
    P = p_operator(model, Omega, omega)
    images = [wedge(Omega, Form.basis(n, j)) for j in range(1, n + 1)]
    masks = basis_masks(n, 4)
    fmat = [[img.coeff_mask(m).re for img in images] for m in masks]
    injective = linalg.rank(fmat) == n
    q = [[_real(pairing(omega, a, b), "pairing") for b in images] for a in images]
    neg, minors = _definite(model, q, -1)
    if neg:
        definiteness = "negative"
    elif _definite(model, q, 1)[0]:
        definiteness = "positive"
    elif linalg.rank(q) < n:
        definiteness = "degenerate"
    else:
        definiteness = "indefinite"
    orbit = injective and neg
    c = P.scalar_square()
    det = P.determinant()
    complex_type = c is not None and decide_sign(model, c) < 0 and (c * c * c + det).is_zero()
    # c < 0 alone also admits forms whose induced metric is indefinite; the
    # test is scale invariant, so the unnormalized dual of P suffices
    tamed = complex_type and _definite(model, metric_matrix(omega, P.dual()), 1)[0]
    op = complex_type and tamed
    owz = wedge(Omega, omega).is_zero()
    if owz and orbit != op:
        raise StabilityError(f"orbit test ({orbit}) and operator test ({op}) disagree for {Omega}")
    positive = owz and orbit and op
    normalized = positive and (det - ONE).is_zero()
    return StabilityReport(injective, definiteness, P, c, det, owz, orbit, op, positive, normalized, minors, complex_type, tamed)


def induced_volume(model: StructureModel | None, Omega: Form, omega: Form) -> SU3Structure:
    """``J`` dual to ``P_Omega`` rescaled to square to ``-1``, and ``psi = Omega + i J.Omega``."""
    st = stability(model, Omega, omega)
    if not st.positive:
        raise ExteriorError("Omega is not positive")
    try:
        scale = (-st.c).sqrt()
    except ScalarError as exc:
        raise ExteriorError(f"cannot normalize P: {exc}") from None
    J = st.P.dual().scaled(ONE / scale)
    psi = Omega + complex_partner(J, Omega) * I
    return SU3Structure(omega, J, psi, origin="induced")


# --------------------------------------------------------------------------
# SU(3) verification


def verify_su3(model: StructureModel | None, s: SU3Structure, normalized: bool = True) -> Report:
    """Pointwise SU(3) conditions; with ``normalized=False`` any constant-free e^sigma > 0 is accepted."""
    r = Report("su3")
    omega, J, psi = s.omega, s.J, s.psi
    n = omega.dim
    if n != 6:
        r.add("dimension 6", False, {"dim": n})
        return r
    W = omega_matrix(omega)
    nondeg = bool(linalg.det(W))
    r.add("omega nondegenerate", nondeg)
    acs = J.is_almost_complex()
    r.add("J^2 = -1", acs)
    g = metric_matrix(omega, J)
    sym = all((g[i][j] - g[j][i]).is_zero() for i in range(n) for j in range(i + 1, n))
    r.add("g symmetric", sym)
    posdef, minors = _definite(model, g, 1) if sym else (False, [])
    r.add("g positive definite", posdef, {"leading minors": minors})
    if acs:
        comps = bidegree(J, psi)
        types = [list(pq) for pq, _ in comps]
        r.add("psi of type (3,0)", bool(psi) and types == [[3, 0]], {"types": types})
    else:
        r.add("psi of type (3,0)", False, {"reason": "J not almost complex"})
    r.add("omega ^ psi = 0", wedge(omega, psi).is_zero())
    if nondeg and psi:
        lhs = _top(wedge(psi, psi.conjugate()))
        ref = _top(omega ** 3) * ComplexScalar(ZERO, Scalar.rational("-4/3"))
        ratio = lhs / ref
        if normalized:
            r.add("psi ^ conj(psi) = -(4/3) i omega^3", ratio == ComplexScalar(ONE), {"ratio": ratio})
        else:
            ok = not ratio.im and decide_sign(model, ratio.re) > 0
            r.add("psi ^ conj(psi) = -i e^sigma omega^3", ok, {"e^sigma": ratio * Scalar.rational("4/3")})
    else:
        r.add("psi ^ conj(psi) = -(4/3) i omega^3", False, {"reason": "degenerate data"})
    return r


def verify_halfflat(model: StructureModel, s: SU3Structure) -> Report:
    r = Report("halfflat")
    r.extend(verify_su3(model, s), prefix="su3")
    domega = d(model, s.omega)
    r.add("d omega = 0", not domega, {} if not domega else {"d omega": domega})
    dre = d(model, s.Omega)
    r.add("d Re psi = 0", not dre, {} if not dre else {"d Re psi": dre})
    dim_ = d(model, s.psi.im)
    r.add("d Im psi = 0", not dim_, {} if not dim_ else {"d Im psi": dim_}, informational=True)
    return r


# --------------------------------------------------------------------------
# equivalent characterizations


def _is_constant(x: Scalar) -> bool:
    return not x.function_symbols()


def lemma23_verdicts(model: StructureModel, s: SU3Structure) -> dict:
    """Verdicts a), b), c') and their ingredients."""
    omega, Omega = s.omega, s.Omega
    es = s.exp_sigma()
    const = _is_constant(es)
    closed = d(model, Omega).is_zero()
    owz = wedge(Omega, omega).is_zero()
    # b): (2/3) sqrt3 e^{-sigma/2} Omega
    try:
        rescale = Scalar.rational("2/3") * surd(3) / es.sqrt()
    except ScalarError as exc:
        raise ModelError(f"e^sigma = {es} has no exact square root") from None
    st = stability(model, Omega * rescale, omega) if owz else None
    b_pos = bool(st and st.positive)
    b_norm = bool(st and st.normalized)
    # c'): (3,1)-part of d psi, (2,2)-part of d(psi + conj psi), sigma constant
    dpsi = d(model, s.psi)
    comps = dict((pq, f) for pq, f in bidegree(s.J, dpsi)) if dpsi else {}
    d31 = comps.get((3, 1), Form.zero(s.dim))
    dre2 = d(model, Omega * 2)
    comps_re = dict((pq, f) for pq, f in bidegree(s.J, dre2)) if dre2 else {}
    d22 = comps_re.get((2, 2), Form.zero(s.dim))
    out = {
        "e^sigma": es,
        "sigma constant": const,
        "d Omega = 0": closed,
        "Omega ^ omega = 0": owz,
        "rescaled positive": b_pos,
        "rescaled normalized": b_norm,
        "(3,1) part of d psi": d31,
        "(2,2) part of d(psi + conj psi)": d22,
        "a": closed and const,
        "b": closed and owz and b_pos and b_norm,
    }
    nabla_psi = None
    if model.is_invariant():
        tables = connection_tables(model, s)
        nabla_psi = tables.nabla_psi_zero
        route = const and not d31
        if nabla_psi != route:
            raise ModelError("Chern parallelism of psi disagrees with its bidegree characterization")
    out["nabla psi = 0"] = nabla_psi if nabla_psi is not None else (const and not d31)
    out["c'"] = out["nabla psi = 0"] and not d22
    return out


def lemma23_crosscheck(model: StructureModel, s: SU3Structure) -> Report:
    """Evaluate the three equivalent characterizations; raise if they disagree."""
    v = lemma23_verdicts(model, s)
    r = Report("lemma23")
    r.add("a) d Omega = 0 and sigma constant", v["a"], {"e^sigma": v["e^sigma"]}, informational=True)
    r.add(
        "b) d Omega = 0, Omega ^ omega = 0, rescaled Omega positive and normalized",
        v["b"],
        {k: v[k] for k in ("d Omega = 0", "Omega ^ omega = 0", "rescaled positive", "rescaled normalized")},
        informational=True,
    )
    r.add(
        "c') nabla psi = 0 and A(conj psi) + conj(A)(psi) = 0",
        v["c'"],
        {"nabla psi = 0": v["nabla psi = 0"], "(2,2) part": v["(2,2) part of d(psi + conj psi)"]},
        informational=True,
    )
    agree = v["a"] == v["b"] == v["c'"]
    r.add("verdicts agree", agree)
    r.data["verdicts"] = {"a": v["a"], "b": v["b"], "c'": v["c'"]}
    if not agree:
        raise ModelError(f"equivalent characterizations disagree: {r.data['verdicts']}")
    return r


# --------------------------------------------------------------------------
# connections


@dataclass
class ConnectionTable:
    """``levi_civita[i][j]`` and ``chern[i][j]`` are frame components of ``nabla_{e_i} e_j``."""

    levi_civita: list[list[tuple[Scalar, ...]]]
    chern: list[list[tuple[Scalar, ...]]]
    torsion: dict[tuple[int, int], tuple[Scalar, ...]]
    report: Report
    nabla_psi_zero: bool


def _vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _bilinear(g, x, y) -> Scalar:
    s = ZERO
    for i, xi in enumerate(x):
        if not xi:
            continue
        for j, yj in enumerate(y):
            if yj and g[i][j]:
                s = s + xi * yj * g[i][j]
    return s


def connection_tables(model: StructureModel, s: SU3Structure | SU2Structure) -> ConnectionTable:
    """Levi-Civita (Koszul) and Chern connections of a left-invariant structure."""
    if not model.is_invariant():
        raise ModelError("connection tables need invariant mode")
    n = model.dim
    J = s.J if s.J.acts_on == "frame" else s.J.dual()
    g = metric_matrix(s.omega, J)
    ginv = linalg.inverse(g)
    e = [model.frame(k + 1) for k in range(n)]
    br = [[vector_bracket(model, e[i], e[j]) for j in range(n)] for i in range(n)]

    def gv(x, k):
        return _bilinear(g, x, e[k])

    lc = []
    for i in range(n):
        row = []
        for j in range(n):
            rhs = []
            for k in range(n):
                rhs.append((gv(br[i][j], k) - _bilinear(g, br[j][k], e[i]) + _bilinear(g, br[k][i], e[j])) * _HALF)
            row.append(tuple(linalg.matvec(ginv, rhs)))
        lc.append(row)

    def nabla(table, i, v):
        out = [ZERO] * n
        for j, vj in enumerate(v):
            if vj:
                for k in range(n):
                    if table[i][j][k]:
                        out[k] = out[k] + vj * table[i][j][k]
        return tuple(out)

    jimg = [J.image(j) for j in range(n)]
    # (nabla_X J)(Y) = nabla_X(JY) - J nabla_X Y
    chern = []
    for i in range(n):
        row = []
        for j in range(n):
            dj = _vec_sub(nabla(lc, i, jimg[j]), J.apply(lc[i][j]))
            corr = J.apply(dj)
            row.append(tuple(a - b * _HALF for a, b in zip(lc[i][j], corr)))
        chern.append(row)

    r = Report("connection")
    zero = tuple([ZERO] * n)

    def torsion_of(table):
        return {(i, j): _vec_sub(_vec_sub(table[i][j], table[j][i]), br[i][j]) for i in range(n) for j in range(i + 1, n)}

    def metric_ok(table):
        for i in range(n):
            for j in range(n):
                for k in range(j, n):
                    if (_bilinear(g, table[i][j], e[k]) + _bilinear(g, e[j], table[i][k])):
                        return False
        return True

    lc_t = torsion_of(lc)
    r.add("Levi-Civita torsion-free", all(v == zero for v in lc_t.values()))
    r.add("Levi-Civita metric", metric_ok(lc))
    r.add("Chern nabla g = 0", metric_ok(chern))
    jpar = all(_vec_sub(nabla(chern, i, jimg[j]), J.apply(chern[i][j])) == zero for i in range(n) for j in range(n))
    r.add("Chern nabla J = 0", jpar)
    tors = torsion_of(chern)
    nj = nijenhuis(model, J)
    quarter = Scalar.rational("1/4")
    mismatch = [f"e{i + 1},e{j + 1}" for (i, j), t in tors.items() if t != tuple(x * quarter for x in nj[(i, j)])]
    r.add("T = N_J / 4", not mismatch, {"mismatches": mismatch})
    psi = s.psi
    bad = []
    for i in range(n):
        a = Endomorphism.from_images([chern[i][j] for j in range(n)])
        if derivation(a, psi):
            bad.append(f"e{i + 1}")
    r.add("nabla psi = 0", not bad, {"directions": bad}, informational=True)
    return ConnectionTable(lc, chern, tors, r, not bad)


# --------------------------------------------------------------------------
# special Lagrangian planes


def slag_check(model: StructureModel, D: Distribution, s: SU3Structure | SU2Structure) -> Report:
    n = model.dim
    if D.rank * 2 != n:
        raise ModelError(f"special Lagrangian test needs a rank-{n // 2} distribution, got {D.rank}")
    r = Report("slag")
    vecs = [list(v) for v in D.vectors]
    base = linalg.rank(vecs)
    leaks = []
    for a, b in itertools.combinations(range(D.rank), 2):
        w = vector_bracket(model, vecs[a], vecs[b])
        if any(w) and linalg.rank(vecs + [list(w)]) > base:
            leaks.append(f"[v{a + 1},v{b + 1}]")
    r.add("involutive", not leaks, {"brackets leaving D": leaks})
    pw = pullback(vecs, s.omega)
    r.add("pullback omega = 0", not pw, {} if not pw else {"pullback": pw})
    pim = pullback(vecs, s.psi.im)
    r.add("pullback Im psi = 0", not pim, {} if not pim else {"pullback": pim})
    pre = pullback(vecs, s.psi.re)
    vol = _top(pre) if pre else ComplexScalar()
    r.add("pullback Re psi is a volume form", bool(vol), {"Re psi on D": vol})
    return r


# --------------------------------------------------------------------------
# four dimensions


def su2_induced_endo(model: StructureModel | None, omega: Form, plus: Form) -> Endomorphism:
    """``P(a) = star(omega ^ star(plus ^ a))`` on the coframe; its dual is J."""
    n = omega.dim
    if n != 4:
        raise ExteriorError("the SU(2) operator lives in dimension 4")
    _check_real(plus, "Omega+")
    cols = []
    for j in range(1, n + 1):
        img = symplectic_star(omega, wedge(omega, symplectic_star(omega, wedge(plus, Form.basis(n, j)))))
        cols.append([img.coeff(i).re for i in range(1, n + 1)])
    return Endomorphism.from_rows(linalg.transpose(cols), acts_on="coframe")


def su2_complex_structure(model: StructureModel | None, plus: Form, minus: Form) -> Endomorphism:
    """The J whose graph solves ``i_X Omega+ = i_{JX} Omega-``."""
    Wp, Wm = omega_matrix(plus), omega_matrix(minus)
    try:
        inv = linalg.inverse(linalg.transpose(Wm))
    except ZeroDivisionError:
        raise ExteriorError("Omega- is degenerate") from None
    return Endomorphism.from_rows(linalg.matmul(inv, linalg.transpose(Wp)))


def su2_certify(model: StructureModel | None, omega: Form, plus: Form, minus: Form) -> Report:
    """Compare the operator's dual with the triple's J; test ``Omega- = J.Omega+`` and ``*Omega+ = Omega-``."""
    r = Report("su2-endo")
    P = su2_induced_endo(model, omega, plus)
    K = P.dual()
    J = su2_complex_structure(model, plus, minus)
    acs = J.is_almost_complex()
    r.add("J^2 = -1", acs, {"J": J})
    r.add("operator dual equals J", K == J, {"operator dual": K, "J": J})
    r.add("Omega- = J.Omega+", acs and complex_partner(J, plus) == minus)
    g = metric_matrix(omega, J)
    sym = all((g[i][j] - g[j][i]).is_zero() for i in range(4) for j in range(i + 1, 4))
    posdef = sym and _definite(model, g, 1)[0]
    r.add("g positive definite", posdef)
    if posdef:
        vol = omega ** 2 * _HALF
        star = metric_star(g, vol, plus)
        r.add("*Omega+ = Omega-", star == minus, {"*Omega+": star})
    else:
        r.add("*Omega+ = Omega-", False, {"reason": "no metric"})
    return r


def su2_verify(model: StructureModel, omega: Form, plus: Form, minus: Form) -> Report:
    r = Report("su2")
    if model.dim != 4:
        r.add("dimension 4", False, {"dim": model.dim})
        return r
    w = [wedge(omega, plus), wedge(omega, minus), wedge(plus, minus)]
    r.add("1. omega^O+ = omega^O- = O+^O- = 0", not any(w), {"wedges": [str(x) for x in w]})
    sq = [wedge(plus, plus), wedge(minus, minus), wedge(omega, omega)]
    r.add("2. O+^O+ = O-^O- = omega^omega != 0", sq[0] == sq[2] and sq[1] == sq[2] and bool(sq[2]), {"squares": [str(x) for x in sq]})
    ok3, wit3 = _su2_condition3(model, omega, plus, minus)
    r.add("3. i_X O+ = i_Y O- implies omega(X,Y) >= 0", ok3, wit3)
    dw, dp = d(model, omega), d(model, plus)
    r.add("4. d omega = d O+ = 0", not dw and not dp, {"d omega": dw, "d O+": dp})
    psi = plus + minus * I
    r.add("psi ^ conj(psi) = 2 omega^2", wedge(psi, psi.conjugate()) == sq[2] * 2)
    return r


def _su2_condition3(model, omega, plus, minus):
    n = 4
    Wp, Wm, W = omega_matrix(plus), omega_matrix(minus), omega_matrix(omega)
    # i_X O+ = Wp^T X ; solve Wp^T X - Wm^T Y = 0 on R^8
    sysm = [[Wp[i][k] for i in range(n)] + [-Wm[i][k] for i in range(n)] for k in range(n)]
    sols = linalg.nullspace(sysm, 2 * n)
    q = []
    for a in sols:
        row = []
        for b in sols:
            xa, yb = a[:n], b[n:]
            xb, ya = b[:n], a[n:]
            row.append((_bilinear(W, xa, yb) + _bilinear(W, xb, ya)) * _HALF)
        q.append(row)
    ok, bad = _semidefinite(model, q) if q else (True, None)
    return ok, {"solution dimension": len(sols), "negative minor": bad or "none"}


def h2_bound_check(model: StructureModel, omega: Form, plus: Form) -> Report:
    """Independence of ``[omega]`` and ``[Omega+]`` in invariant H^2."""
    r = Report("h2bound")
    pre = [
        ("omega ^ O+ = 0", not wedge(omega, plus)),
        ("O+^O+ = omega^omega != 0", wedge(plus, plus) == wedge(omega, omega) and bool(wedge(omega, omega))),
        ("d omega = d O+ = 0", not d(model, omega) and not d(model, plus)),
    ]
    for name, ok in pre:
        r.add(f"precondition: {name}", ok)
    if not pre[2][1]:
        r.add("classes independent", False, {"reason": "forms not closed"})
        return r
    coh = cohomology(model, 2)
    cw = express_in_cohomology(model, omega, coh)
    cp = express_in_cohomology(model, plus, coh)
    rank = linalg.rank([cw, cp]) if coh.betti else 0
    top = find_primitive(model, wedge(omega, omega))
    r.add("omega^2 not exact", not top.exact)
    r.add("classes independent", rank == 2, {"class omega": cw, "class O+": cp, "rank": rank})
    r.data.update({"b2": coh.betti, "b2 >= 2": coh.betti >= 2})
    return r
