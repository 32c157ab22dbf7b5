import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hfkit import linalg
from hfkit.exterior import Form, wedge
from hfkit.fixtures import load
from hfkit.lie import (
    Distribution,
    ModelError,
    StructureModel,
    bracket,
    check_integrability_of_d,
    cohomology,
    d,
    express_in_cohomology,
    find_primitive,
    is_unimodular,
    lefschetz,
    nijenhuis,
    nijenhuis_vanishes,
    structure_constants,
    vector_bracket,
)
from hfkit.scalars import Scalar, exp

import oracles

INVARIANT = ["standard-R6", "standard-R4", "solvmanifold-slag", "nilmanifold", "NxN", "kodaira-thurston"]
ALL = INVARIANT + ["torus-family", "conformal-torus"]
small = st.fractions(min_value=-3, max_value=3, max_denominator=2)


@st.composite
def forms(draw, n, k):
    f = Form.zero(n)
    for idx in itertools.combinations(range(1, n + 1), k):
        if draw(st.integers(0, 3)) == 0:
            f = f + Form.basis(n, *idx) * Scalar.rational(draw(small))
    return f


def _table(model):
    """Float differential table for the oracle, with parameters at their sample values."""
    vals = model.samples()[0]
    out = {}
    for k, f in enumerate(model.differentials):
        for mask, c in f.items():
            i, j = [b for b in range(model.dim) if mask >> b & 1]
            out.setdefault(k, {})[(i, j)] = c.re.evaluate(vals)
    return out


# -- d ----------------------------------------------------------------------


def test_d_on_generators():
    m = load("nilmanifold")
    assert d(m, m.gen(5)) == m.gen(1, 3)
    assert d(m, m.gen(6)) == m.gen(1, 2)
    assert d(m, Form.scalar(6, 7)) == Form.zero(6)


def test_d_in_coordinate_mode_uses_the_chain_rule():
    m = load("torus-family")
    t, b, c = (m.symbols.lookup(x) for x in "tbc")
    lam1 = t * (b - c)
    f = m.gen(4) * exp(lam1)
    want = wedge(m.gen(2) * (t * b.derive(1)) - m.gen(3) * (t * c.derive(2)), m.gen(4)) * exp(lam1)
    assert d(m, f) == want


@pytest.mark.parametrize("name", ALL)
def test_d_squared_vanishes_on_fixtures(name):
    m = load(name)
    assert check_integrability_of_d(m).passed


def test_inconsistent_table_is_caught():
    n = 4
    diffs = [Form.zero(n), Form.basis(n, 3, 4), Form.zero(n), Form.basis(n, 1, 2)]
    m = StructureModel(n, differentials=diffs)
    rep = check_integrability_of_d(m)
    assert not rep.passed
    assert rep.data["first_failure"]
    # Jacobi fails exactly when d^2 does
    e = [m.frame(k) for k in range(1, 5)]
    jac = [
        tuple(x + y + z for x, y, z in zip(
            bracket(m, e[i], bracket(m, e[j], e[k])),
            bracket(m, e[j], bracket(m, e[k], e[i])),
            bracket(m, e[k], bracket(m, e[i], e[j])),
        ))
        for i, j, k in itertools.combinations(range(4), 3)
    ]
    assert any(any(v) for v in jac)


def test_abelian_table():
    m = StructureModel(4)
    assert check_integrability_of_d(m).passed
    assert cohomology(m, 2).betti == 6


@pytest.mark.parametrize("name", ["solvmanifold-slag", "nilmanifold", "NxN", "kodaira-thurston"])
@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_d_is_an_antiderivation(name, data):
    m = load(name)
    n = m.dim
    p, q = data.draw(st.integers(0, n)), data.draw(st.integers(0, n))
    a, b = data.draw(forms(n, p)), data.draw(forms(n, q))
    assert d(m, wedge(a, b)) == wedge(d(m, a), b) + wedge(a, d(m, b)) * ((-1) ** p)
    assert d(m, d(m, a)).is_zero()


# -- brackets ---------------------------------------------------------------


def test_brackets_of_the_solvable_example():
    m = load("solvmanifold-slag")
    x = [m.frame(k) for k in range(1, 7)]
    assert bracket(m, x[0], x[2]) == x[2]
    assert bracket(m, x[1], x[4]) == x[2]
    assert not any(bracket(m, x[3], x[3]))


def test_bracket_needs_invariant_mode():
    m = load("torus-family")
    with pytest.raises(ModelError):
        bracket(m, m.frame(1), m.frame(2))


@pytest.mark.parametrize("name", INVARIANT)
@settings(max_examples=15, deadline=None)
@given(data=st.data())
def test_jacobi_and_antisymmetry(name, data):
    m = load(name)
    n = m.dim
    vec = st.lists(small.map(Scalar.rational), min_size=n, max_size=n)
    x, y, z = data.draw(vec), data.draw(vec), data.draw(vec)
    assert bracket(m, x, y) == tuple(-c for c in bracket(m, y, x))
    terms = [bracket(m, x, bracket(m, y, z)), bracket(m, y, bracket(m, z, x)), bracket(m, z, bracket(m, x, y))]
    assert all((u + v + w).is_zero() for u, v, w in zip(*terms))


def test_unimodularity():
    for name in INVARIANT:
        assert is_unimodular(load(name)), name
    m = StructureModel(2, differentials=[Form.zero(2), Form.basis(2, 1, 2)])
    assert not is_unimodular(m)


# -- Nijenhuis --------------------------------------------------------------


def _full_nijenhuis(m, J, i, j):
    e_i, e_j = m.frame(i + 1), m.frame(j + 1)
    Ji, Jj = J.apply(e_i), J.apply(e_j)
    parts = [vector_bracket(m, Ji, Jj), J.apply(vector_bracket(m, Ji, e_j)), J.apply(vector_bracket(m, e_i, Jj)), vector_bracket(m, e_i, e_j)]
    return tuple(a - b - c - d_ for a, b, c, d_ in zip(*parts))


@pytest.mark.parametrize("name", ["solvmanifold-slag", "nilmanifold", "NxN", "torus-family"])
def test_nijenhuis_is_antisymmetric(name):
    m = load(name)
    J = m.endos["J"]
    N = nijenhuis(m, J)
    for (i, j), v in N.items():
        assert _full_nijenhuis(m, J, j, i) == tuple(-c for c in v)
        assert _full_nijenhuis(m, J, i, j) == v


def test_solvable_example_structure_is_not_integrable():
    m = load("solvmanifold-slag")
    assert not nijenhuis_vanishes(nijenhuis(m, m.endos["J"]))


def test_torus_family_nijenhuis_matches_finite_differences():
    m = load("torus-family")
    J = m.endos["J"]
    N = nijenhuis(m, J)
    rows = J.rows()

    def Jfun(x):
        vals = m.symbols.assignment(tuple(x))
        return np.array([[c.evaluate(vals) for c in row] for row in rows])

    for p in m.points:
        vals = m.symbols.assignment(p)
        ref = oracles.nijenhuis_coordinate(Jfun, np.array(p))
        for key, v in N.items():
            got = np.array([c.evaluate(vals) for c in v])
            assert np.allclose(got, ref[key], atol=1e-6)
    assert nijenhuis_vanishes(nijenhuis(m, m.endos["J0"]))


def test_closed_complex_volume_implies_integrable():
    hits = []
    for name in ALL:
        m = load(name)
        pairs = [("psi", "J"), ("psi0", "J0")]
        for pn, jn in pairs:
            if pn not in m.forms or jn not in m.endos or m.dim != 6:
                continue
            psi = m.forms[pn]
            if d(m, psi.re) or d(m, psi.im):
                continue
            hits.append(f"{name}:{pn}")
            N = nijenhuis(m, m.endos[jn])
            for s in m.samples():
                assert all(abs(c.evaluate(s)) < 1e-12 for v in N.values() for c in v)
    assert hits == ["standard-R6:psi", "torus-family:psi0"]


# -- cohomology -------------------------------------------------------------


@pytest.mark.parametrize("name", INVARIANT)
def test_betti_numbers_match_the_float_oracle(name):
    m = load(name)
    want = oracles.betti(m.dim, _table(m))
    got = [cohomology(m, k).betti for k in range(m.dim + 1)]
    assert got == want
    assert got == got[::-1]  # Poincare duality on unimodular models


@pytest.mark.parametrize("name", INVARIANT)
def test_representatives_are_closed_and_independent(name):
    m = load(name)
    for k in range(m.dim + 1):
        res = cohomology(m, k)
        for r in res.representatives:
            assert d(m, r).is_zero()
        vecs = [[r.coeff_mask(mask).re for mask in sorted(set().union(*[set(dict(x.items())) for x in res.representatives + res.exact_basis]) or {0})] for r in res.representatives + res.exact_basis]
        if vecs:
            assert linalg.rank(vecs) == len(vecs)


def test_kodaira_thurston_first_cohomology():
    res = cohomology(load("kodaira-thurston"), 1)
    assert res.betti == 3
    m = load("kodaira-thurston")
    assert not d(m, m.gen(3)).is_zero()


def _span_rank(m, coh, forms_):
    coords = [express_in_cohomology(m, f, coh) for f in forms_]
    assert all(c is not None for c in coords)
    return linalg.rank(coords)


def test_solvable_example_second_cohomology_span():
    m = load("solvmanifold-slag")
    coh = cohomology(m, 2)
    assert coh.betti == 3
    assert _span_rank(m, coh, [m.forms["h2a"], m.forms["h2b"], m.forms["h2c"]]) == 3


def test_product_model_second_cohomology_span():
    m = load("NxN")
    coh = cohomology(m, 2)
    assert coh.betti == 3
    assert _span_rank(m, coh, [m.gen(1, 2), m.gen(4, 5), m.gen(3, 6)]) == 3


def test_coordinate_mode_cohomology_uses_constant_coefficients():
    # closed coframe: every constant-coefficient form is a cocycle, none exact
    assert [cohomology(load("torus-family"), k).betti for k in range(7)] == [1, 6, 15, 20, 15, 6, 1]


# -- Lefschetz and primitives -----------------------------------------------


def test_lefschetz_product_model_is_iso():
    m = load("NxN")
    for k in (1, 2):
        rep = lefschetz(m, m.forms["omega"], k)
        assert rep.data["iso"] and rep.passed


def test_lefschetz_flat_model_is_iso():
    m = load("standard-R6")
    for k in (1, 2, 3):
        assert lefschetz(m, m.forms["omega"], k).data["iso"]


def test_lefschetz_kodaira_thurston_fails():
    m = load("kodaira-thurston")
    rep = lefschetz(m, m.forms["omega"], 1)
    assert not rep.data["iso"]
    assert rep.data["rank"] < cohomology(m, 1).betti


def test_lefschetz_requires_closed_omega():
    m = load("nilmanifold")
    with pytest.raises(ModelError):
        lefschetz(m, m.gen(5, 6), 1)


def test_find_primitive_zero_and_nonexact():
    m = load("solvmanifold-slag")
    assert find_primitive(m, Form.zero(6)).exact
    res = find_primitive(m, m.forms["omega"])
    assert not res.exact and res.primitive is None
    with pytest.raises(ModelError):
        find_primitive(m, m.gen(3))


def test_primitive_of_real_part_on_product_model():
    m = load("NxN")
    re_psi = m.forms["psi"].re
    res = find_primitive(m, re_psi)
    assert res.exact
    assert d(m, res.primitive) == re_psi
    assert d(m, res.primitive - m.forms["primitive_printed"]).is_zero()


def test_distribution_rejects_dependent_vectors():
    with pytest.raises(ModelError):
        Distribution.span(4, 1, 1)
    assert Distribution.span(4, 1, 2).rank == 2


def test_structure_constants_dual_to_the_table():
    m = load("solvmanifold-slag")
    c = structure_constants(m)
    # d e^k(e_i, e_j) = -e^k([e_i, e_j])
    for (i, j), v in c.items():
        for k in range(m.dim):
            assert m.differentials[k].coeff(i + 1, j + 1).re == -v[k]
