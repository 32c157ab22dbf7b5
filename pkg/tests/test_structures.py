import itertools
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from hfkit import linalg
from hfkit.exterior import (
    Endomorphism,
    Form,
    bidegree,
    complex_partner,
    metric_star,
    omega_matrix,
    pullback,
    wedge,
)
from hfkit.fixtures import load
from hfkit.lie import Distribution, ModelError, d, nijenhuis, nijenhuis_vanishes
from hfkit.scalars import I, ONE, ZERO, Scalar
from hfkit.structures import (
    SU3Structure,
    connection_tables,
    h2_bound_check,
    induced_volume,
    lemma23_verdicts,
    metric_matrix,
    p_operator,
    slag_check,
    stability,
    su2_certify,
    su2_complex_structure,
    su2_induced_endo,
    su2_verify,
    verify_halfflat,
    verify_su3,
)

OMEGA = Form.basis(6, 1, 4) + Form.basis(6, 2, 5) + Form.basis(6, 3, 6)
PSI0 = wedge(wedge(Form.basis(6, 1) + Form.basis(6, 4) * I, Form.basis(6, 2) + Form.basis(6, 5) * I), Form.basis(6, 3) + Form.basis(6, 6) * I)
OMEGA0 = PSI0.re
small = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@lru_cache(maxsize=None)
def primitive_basis():
    """Basis of real 3-forms with ``a ^ omega = 0``."""
    masks = list(itertools.combinations(range(1, 7), 3))
    cols = [wedge(Form.basis(6, *m), OMEGA) for m in masks]
    five = list(itertools.combinations(range(1, 7), 5))
    mat = [[c.coeff(*f).re for c in cols] for f in five]
    out = []
    for v in linalg.nullspace(mat, len(masks)):
        f = Form.zero(6)
        for c, m in zip(v, masks):
            if c:
                f = f + Form.basis(6, *m) * c
        out.append(f)
    return out


@st.composite
def primitive_forms(draw):
    f = Form.zero(6)
    for b in primitive_basis():
        f = f + b * Scalar.rational(draw(small))
    return f


@st.composite
def transvections(draw):
    """Symplectic ``T x = x + eps * omega(v, x) v`` as a column-image matrix."""
    v = [Scalar.rational(draw(st.integers(-2, 2))) for _ in range(6)]
    eps = Scalar.rational(draw(st.fractions(min_value=-2, max_value=2, max_denominator=3)))
    W = omega_matrix(OMEGA)
    wv = linalg.matvec(linalg.transpose(W), v)  # omega(v, e_j)
    return [[(ONE if i == j else ZERO) + eps * v[i] * wv[j] for j in range(6)] for i in range(6)]


def _pullback_by(T, f):
    return pullback(linalg.transpose(T), f)


# -- stable forms -------------------------------------------------------------


def test_standard_form_is_positive_and_normalized():
    st_ = stability(None, OMEGA0, OMEGA)
    assert st_.positive and st_.normalized
    assert st_.c == -ONE and st_.det == ONE


def test_complex_type_with_indefinite_metric_is_not_positive():
    Om = Form.basis(6, 1, 2, 3) + Form.basis(6, 1, 4, 5) - Form.basis(6, 2, 4, 6) + Form.basis(6, 3, 5, 6)
    rep = stability(None, Om, OMEGA)
    assert rep.complex_type and rep.c == -ONE and rep.det == ONE
    assert not rep.tamed and not rep.positive
    assert rep.definiteness == "indefinite"


def test_degenerate_and_split_forms_are_not_positive():
    e123 = Form.basis(6, 1, 2, 3)
    assert not stability(None, e123, OMEGA).positive
    split = e123 + Form.basis(6, 4, 5, 6)
    rep = stability(None, split, OMEGA)
    assert not rep.positive
    assert rep.c is not None and rep.c.to_rational() > 0


def test_p_operator_squares_to_c():
    P = p_operator(None, OMEGA0, OMEGA)
    assert P.scalar_square() == -ONE


@settings(max_examples=120, deadline=None)
@given(primitive_forms())
def test_p_operator_laws_on_primitive_forms(Om):
    P = p_operator(None, Om, OMEGA)
    c = P.scalar_square()
    assert c is not None
    assert (c * c * c + P.determinant()).is_zero()
    # omega(P a, b) = -omega(a, P b) on 1-forms, via the induced pairing
    W = omega_matrix(OMEGA)
    G = linalg.inverse(linalg.transpose(W))
    M = P.rows()
    lhs = linalg.matmul(linalg.transpose(M), G)
    rhs = linalg.matmul(G, M)
    assert all((lhs[i][j] + rhs[i][j]).is_zero() for i in range(6) for j in range(6))
    stability(None, Om, OMEGA)  # the two positivity tests must agree


@settings(max_examples=40, deadline=None)
@given(transvections())
def test_induced_structure_is_equivariant(T):
    assert _pullback_by(T, OMEGA) == OMEGA
    Om = _pullback_by(T, OMEGA0)
    s = induced_volume(None, Om, OMEGA)
    J0 = induced_volume(None, OMEGA0, OMEGA).J
    want = linalg.matmul(linalg.inverse(T), linalg.matmul(J0.rows(), T))
    assert s.J == Endomorphism.from_rows(want)
    assert s.psi == _pullback_by(T, PSI0)


def test_induced_volume_round_trip():
    s = induced_volume(None, OMEGA0, OMEGA)
    assert s.psi == PSI0
    assert verify_su3(None, s).passed


@pytest.mark.parametrize("t", ["2", "1/3", "5/2"])
def test_scaling_keeps_the_complex_structure(t):
    k = Scalar.rational(t)
    s1 = induced_volume(None, OMEGA0, OMEGA)
    s2 = induced_volume(None, OMEGA0 * k, OMEGA)
    assert s1.J == s2.J
    assert s2.psi == PSI0 * k
    st_ = stability(None, OMEGA0 * k, OMEGA)
    assert st_.positive and st_.normalized == (t == "1")


# -- SU(3) and half-flat -------------------------------------------------------


def _su3(m, psi="psi", J="J"):
    return SU3Structure(m.forms["omega"], m.endos[J], m.forms[psi])


@pytest.mark.parametrize("name", ["standard-R6", "solvmanifold-slag", "torus-family", "nilmanifold", "NxN"])
def test_fixtures_are_half_flat(name):
    m = load(name)
    rep = verify_halfflat(m, _su3(m))
    assert rep.passed, rep.failures()


def test_printed_complex_structure_is_not_almost_complex():
    m = load("solvmanifold-slag")
    assert not m.endos["J_printed"].is_almost_complex()
    assert not verify_su3(m, _su3(m, J="J_printed")).passed
    m = load("NxN")
    assert not m.endos["J_printed"].is_almost_complex()


def test_printed_torus_form_fails():
    m = load("torus-family")
    rep = verify_su3(m, _su3(m, psi="psi_printed"))
    assert not rep.passed


def test_conformal_scaling_breaks_closedness():
    m = load("conformal-torus")
    rep = verify_halfflat(m, _su3(m))
    assert not rep.check("d Re psi = 0").passed
    assert not rep.check("su3: psi ^ conj(psi) = -(4/3) i omega^3").passed
    assert verify_su3(m, _su3(m), normalized=False).passed


def test_induced_structure_on_fixtures_matches_declared():
    for name in ["solvmanifold-slag", "nilmanifold", "NxN"]:
        m = load(name)
        s = induced_volume(m, m.forms["psi"].re, m.forms["omega"])
        assert s.J == m.endos["J"], name
        assert s.psi == m.forms["psi"], name


# -- equivalent characterizations ---------------------------------------------


@pytest.mark.parametrize("name,expect", [
    ("standard-R6", True), ("solvmanifold-slag", True), ("nilmanifold", True),
    ("NxN", True), ("torus-family", True), ("conformal-torus", False),
])
def test_lemma23_verdicts(name, expect):
    m = load(name)
    v = lemma23_verdicts(m, _su3(m))
    assert v["a"] == v["b"] == v["c'"] == expect


# -- connections ---------------------------------------------------------------


@pytest.mark.parametrize("name", ["standard-R6", "nilmanifold", "solvmanifold-slag", "NxN"])
def test_connection_identities(name):
    m = load(name)
    t = connection_tables(m, _su3(m))
    assert t.report.passed, t.report.failures()


def test_nilmanifold_psi_is_chern_parallel():
    m = load("nilmanifold")
    assert connection_tables(m, _su3(m)).nabla_psi_zero


def test_connection_tables_need_invariant_mode():
    m = load("torus-family")
    with pytest.raises(ModelError):
        connection_tables(m, _su3(m))


def test_metric_is_symmetric_positive():
    m = load("solvmanifold-slag")
    g = metric_matrix(m.forms["omega"], m.endos["J"])
    assert g == linalg.transpose(g)
    assert all(linalg.det([row[:k] for row in g[:k]]).to_rational() > 0 for k in range(1, 7))


# -- special Lagrangian ------------------------------------------------------


def test_slag_planes():
    m = load("nilmanifold")
    assert slag_check(m, m.dists["D"], _su3(m)).passed
    bad = slag_check(m, Distribution.span(6, 2, 3, 4), _su3(m))
    assert not bad.passed
    m = load("standard-R6")
    assert not slag_check(m, m.dists["Jplane"], _su3(m)).check("pullback omega = 0").passed
    with pytest.raises(ModelError):
        slag_check(m, Distribution.span(6, 1, 2), _su3(m))


# -- four dimensions ---------------------------------------------------------


def _triple(name):
    m = load(name)
    return m, m.forms["omega"], m.forms["Oplus"], m.forms["Ominus"]


@pytest.mark.parametrize("name", ["standard-R4", "kodaira-thurston"])
def test_su2_conditions(name):
    m, w, p, q = _triple(name)
    assert su2_verify(m, w, p, q).passed
    assert h2_bound_check(m, w, p).passed


def test_su2_condition_three_detects_orientation():
    m, w, p, q = _triple("standard-R4")
    rep = su2_verify(m, w, p, -q)
    assert not rep.check("3. i_X O+ = i_Y O- implies omega(X,Y) >= 0").passed


def test_complex_structure_from_the_pair():
    m, w, p, q = _triple("kodaira-thurston")
    J = su2_complex_structure(m, p, q)
    assert J == m.endos["J"]
    assert complex_partner(J, p) == q


def test_operator_does_not_see_the_second_form():
    # scaling e1, e4 by r and e2, e3 by 1/r fixes omega and Omega+ but moves Omega-
    m, w, p, q = _triple("standard-R4")
    r = Scalar.rational(2)
    T = [[ZERO] * 4 for _ in range(4)]
    for i, s in enumerate([r, ONE / r, ONE / r, r]):
        T[i][i] = s
    assert _pullback_by4(T, w) == w and _pullback_by4(T, p) == p
    q2 = _pullback_by4(T, q)
    assert q2 != q
    assert su2_verify(m, w, p, q2).passed
    P = su2_induced_endo(m, w, p)
    assert su2_complex_structure(m, p, q) != su2_complex_structure(m, p, q2)
    assert P == su2_induced_endo(m, w, p)


def _pullback_by4(T, f):
    return pullback(linalg.transpose(T), f)


def test_omega_plus_is_self_dual():
    m, w, p, q = _triple("standard-R4")
    J = su2_complex_structure(m, p, q)
    g = metric_matrix(w, J)
    vol = w ** 2 * Scalar.rational("1/2")
    for f in (w, p, q):
        assert metric_star(g, vol, f) == f
    rep = su2_certify(m, w, p, q)
    assert rep.check("Omega- = J.Omega+").passed
    assert not rep.check("*Omega+ = Omega-").passed


def test_scaled_psi_reports_ratio_four():
    s = SU3Structure(OMEGA, induced_volume(None, OMEGA0, OMEGA).J, PSI0 * 2)
    chk = verify_su3(None, s).check("psi ^ conj(psi) = -(4/3) i omega^3")
    assert not chk.passed and str(chk.witness["ratio"]) == "4"


@pytest.mark.parametrize("name", ["standard-R4", "kodaira-thurston"])
def test_su2_triples_induce_hermitian_data(name):
    m, w, p, q = _triple(name)
    assert su2_verify(m, w, p, q).passed
    J = su2_complex_structure(m, p, q)
    g = metric_matrix(w, J)
    assert g == linalg.transpose(g)
    assert all(linalg.det([row[:k] for row in g[:k]]).to_rational() > 0 for k in range(1, 5))
    psi = p + q * I
    assert [pq for pq, _ in bidegree(J, psi)] == [(2, 0)]
    assert wedge(psi, psi.conjugate()) == wedge(w, w) * 2


@pytest.mark.parametrize("name", ["standard-R4", "kodaira-thurston"])
def test_closed_real_part_without_mixed_type_forces_integrability(name):
    m, w, p, q = _triple(name)
    J = su2_complex_structure(m, p, q)
    psi = p + q * I
    dpsi = d(m, psi)
    mixed = [pq for pq, _ in bidegree(J, dpsi) if pq in ((1, 2), (2, 1))] if dpsi else []
    if d(m, p) or mixed:
        assert name == "kodaira-thurston" and mixed  # the hypothesis genuinely fails there
        return
    assert d(m, q).is_zero()
    assert nijenhuis_vanishes(nijenhuis(m, J))


def test_h2_bound_flags_degenerate_input():
    m, w, p, q = _triple("kodaira-thurston")
    rep = h2_bound_check(m, w, w)
    assert not rep.passed
    assert not rep.check("precondition: omega ^ O+ = 0").passed
    assert not rep.check("classes independent").passed
