import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from hfkit.exterior import (
    Endomorphism,
    ExteriorError,
    Form,
    automorphism,
    bidegree,
    complex_partner,
    derivation,
    evaluate_on,
    interior,
    metric_star,
    omega_matrix,
    pairing,
    pullback,
    symplectic_star,
    volume,
    wedge,
)
from hfkit.scalars import I, ONE, ZERO, ComplexScalar, Scalar

import oracles

small = st.fractions(min_value=-4, max_value=4, max_denominator=3)


@st.composite
def forms(draw, n, k, complex_=False):
    f = Form.zero(n)
    for idx in itertools.combinations(range(1, n + 1), k):
        if draw(st.booleans()):
            c = ComplexScalar(Scalar.rational(draw(small)), Scalar.rational(draw(small)) if complex_ else ZERO)
            f = f + Form.basis(n, *idx) * c
    return f


def dense(f: Form, k: int) -> np.ndarray:
    n = f.dim
    comps = {}
    for idx in itertools.combinations(range(n), k):
        c = f.coeff(*[i + 1 for i in idx]).evaluate()
        if c:
            comps[idx] = c
    return oracles.tensor(n, comps, k)


def std_omega(n):
    h = n // 2
    return sum((Form.basis(n, i, i + h) for i in range(2, h + 1)), Form.basis(n, 1, 1 + h))


def std_J(n):
    h = n // 2
    imgs = []
    for j in range(n):
        v = [0] * n
        v[(j + h) % n] = 1 if j < h else -1
        imgs.append(v)
    return Endomorphism.from_images(imgs)


@st.composite
def symplectic(draw, n):
    """Pullback of the standard form by a random invertible rational matrix."""
    while True:
        A = [[draw(st.integers(-2, 2)) for _ in range(n)] for _ in range(n)]
        if round(np.linalg.det(np.array(A, dtype=float))) != 0:
            break
    return pullback([[Scalar.rational(x) for x in row] for row in zip(*A)], std_omega(n))


@settings(max_examples=80, deadline=None)
@given(st.data(), st.integers(0, 3), st.integers(0, 3))
def test_wedge_matches_tensor_oracle(data, p, q):
    n = 5
    a = data.draw(forms(n, p, complex_=True))
    b = data.draw(forms(n, q))
    assert np.allclose(dense(wedge(a, b), p + q), oracles.wedge(dense(a, p), dense(b, q)))


@settings(max_examples=80, deadline=None)
@given(st.data(), st.integers(0, 3), st.integers(0, 3), st.integers(0, 2))
def test_wedge_graded_commutative_and_associative(data, p, q, r):
    n = 6
    a, b, c = data.draw(forms(n, p)), data.draw(forms(n, q)), data.draw(forms(n, r))
    assert wedge(a, b) == wedge(b, a) * ((-1) ** (p * q))
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


@settings(max_examples=80, deadline=None)
@given(st.data(), st.integers(1, 3), st.integers(0, 3))
def test_interior_is_an_antiderivation(data, p, q):
    n = 5
    a, b = data.draw(forms(n, p)), data.draw(forms(n, q))
    x = [Scalar.rational(data.draw(small)) for _ in range(n)]
    lhs = interior(x, wedge(a, b))
    rhs = wedge(interior(x, a), b) + wedge(a, interior(x, b)) * ((-1) ** p)
    assert lhs == rhs
    xv = np.array([float(v.to_rational()) for v in x])
    assert np.allclose(dense(interior(x, a), p - 1), oracles.interior(xv, dense(a, p)))


def test_evaluate_on_basis():
    f = Form.basis(4, 1, 2) * 3
    e1, e2 = [1, 0, 0, 0], [0, 1, 0, 0]
    assert evaluate_on(f, [e1, e2]) == ComplexScalar(Scalar.rational(3))
    assert evaluate_on(f, [e2, e1]) == ComplexScalar(Scalar.rational(-3))


@settings(max_examples=60, deadline=None)
@given(st.data(), st.integers(0, 3), st.integers(0, 3))
def test_pullback_is_an_algebra_map(data, p, q):
    n = 4
    a, b = data.draw(forms(n, p)), data.draw(forms(n, q))
    A = [[Scalar.rational(data.draw(small)) for _ in range(n)] for _ in range(3)]
    assume(np.linalg.matrix_rank(np.array([[float(x.to_rational()) for x in r] for r in A])) == 3)
    assert pullback(A, wedge(a, b)) == wedge(pullback(A, a), pullback(A, b))


def test_volume_and_omega_matrix():
    w = std_omega(6)
    assert volume(w) == w ** 3 * Scalar.rational("1/6")
    W = omega_matrix(w)
    assert W[0][3] == ONE and W[3][0] == -ONE


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.large_base_example])
@given(st.data(), st.sampled_from([4, 6]))
def test_star_is_an_involution_and_defines_the_pairing(data, n):
    w = data.draw(symplectic(n))
    vol = volume(w)
    k = data.draw(st.integers(0, n))
    a, b = data.draw(forms(n, k)), data.draw(forms(n, k))
    sa = symplectic_star(w, a)
    assert symplectic_star(w, sa) == a
    assert wedge(b, sa) == vol * pairing(w, b, a)


def test_star_on_the_standard_model():
    w = std_omega(6)
    assert pairing(w, Form.basis(6, 1), Form.basis(6, 4)) == ComplexScalar(ONE)
    assert symplectic_star(w, Form.scalar(6, 1)) == volume(w)
    assert symplectic_star(w, w) == w ** 2 * Scalar.rational("1/2")


def test_metric_star_on_euclidean_r4():
    n = 4
    g = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    vol = Form.basis(4, 1, 2, 3, 4)
    assert metric_star(g, vol, Form.basis(4, 1, 2)) == Form.basis(4, 3, 4)
    for k in range(n + 1):
        for idx in itertools.combinations(range(1, n + 1), k):
            a = Form.basis(n, *idx)
            assert metric_star(g, vol, metric_star(g, vol, a)) == a * ((-1) ** (k * (n - k)))


@settings(max_examples=40, deadline=None)
@given(st.data(), st.integers(0, 3))
def test_bidegree_decomposition(data, k):
    n = 6
    J = std_J(n)
    f = data.draw(forms(n, k, complex_=True))
    parts = bidegree(J, f)
    total = Form.zero(n)
    for (p, q), c in parts:
        assert p + q == k
        assert derivation(J, c) == c * ComplexScalar(ZERO, Scalar.rational(p - q))
        assert automorphism(J, c) == c * (I ** ((p - q) % 4))
        total = total + c
    assert total == f


def test_complex_partner_of_the_standard_form():
    J = std_J(6)
    psi = wedge(wedge(Form.basis(6, 1) + Form.basis(6, 4) * I, Form.basis(6, 2) + Form.basis(6, 5) * I), Form.basis(6, 3) + Form.basis(6, 6) * I)
    assert bidegree(J, psi)[0][0] == (3, 0)
    assert complex_partner(J, psi.re) == psi.im


def test_almost_complex_and_dual():
    J = std_J(4)
    assert J.is_almost_complex()
    assert J.scalar_square() == -ONE
    assert J.dual().dual() == J
    assert J.determinant() == ONE
    K = Endomorphism.from_rows([[ONE, ZERO], [ZERO, ONE]])
    assert not K.is_almost_complex()


def test_mixed_dimension_rejected():
    with pytest.raises(ExteriorError):
        Form.basis(4, 1) + Form.basis(6, 1)
