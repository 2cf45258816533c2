import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from gcytools.errors import ContractError, ParseError
from gcytools.multivector import (
    ComplexForm,
    GVec,
    TwoForm,
    clifford_act,
    conjugate,
    embed,
    exp_two_form,
    format_form,
    grade_project,
    interior,
    metric,
    mukai_pair,
    parity,
    parse_form,
    pullback,
    reversal,
    wedge,
    wedge_all,
)

E = ComplexForm.basis
I = 1j


def one(n):
    return ComplexForm.scalar(n, 1.0)


# ---------------------------------------------------------------------------
# strategies

coef = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def forms(draw, n=None, grades=None):
    n = draw(st.integers(1, 5)) if n is None else n
    masks = [m for m in range(1 << n) if grades is None or bin(m).count("1") in grades]
    chosen = draw(st.lists(st.sampled_from(masks), max_size=len(masks), unique=True)) if masks else []
    return ComplexForm(n, {m: draw(coef) for m in chosen})


@st.composite
def form_pairs(draw):
    n = draw(st.integers(1, 5))
    return draw(forms(n)), draw(forms(n))


@st.composite
def homogeneous_pair(draw):
    n = draw(st.integers(1, 5))
    p = draw(st.integers(0, n))
    q = draw(st.integers(0, n))
    return p, q, draw(forms(n, {p})), draw(forms(n, {q}))


def close(a: ComplexForm, b: ComplexForm, scale=1.0, tol=1e-12):
    return (a - b).norm() <= tol * max(scale, 1.0)


# ---------------------------------------------------------------------------
# construction and storage


def test_keys_are_canonical_and_signed():
    a = ComplexForm(3, {(2, 1): 1.0, (1, 3): 2.0})
    assert a.coeffs == {(1, 2): -1.0, (1, 3): 2.0}
    assert ComplexForm(3, {(1, 1): 5.0}).is_zero()


def test_exact_zeros_pruned_but_tiny_values_kept():
    a = ComplexForm(2, {(1,): 0.0, (2,): 1e-300})
    assert list(a.coeffs) == [(2,)]
    assert (E(2, 1) - E(2, 1)).masks == {}


def test_out_of_range_blade_rejected():
    with pytest.raises(ContractError):
        ComplexForm(2, {(3,): 1.0})


def test_values_are_immutable():
    a = E(2, 1)
    with pytest.raises(TypeError):
        a.masks[1] = 2.0


def test_array_round_trip():
    rng = np.random.default_rng(0)
    arr = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    a = ComplexForm.from_array(4, arr)
    assert np.array_equal(a.to_array(), arr)


def test_dimension_zero_algebra():
    a = ComplexForm.scalar(0, 2.0)
    assert wedge(a, a) == ComplexForm.scalar(0, 4.0)
    assert mukai_pair(a, a) == 4.0


# ---------------------------------------------------------------------------
# wedge


def test_wedge_basis_cases():
    assert wedge(E(2, 1), E(2, 2)).coeffs == {(1, 2): 1.0}
    assert wedge(E(2, 2), E(2, 1)).coeffs == {(1, 2): -1.0}


def test_wedge_of_exponential_factors():
    a = one(4) + E(4, 1, 2)
    b = one(4) + E(4, 3, 4)
    expected = one(4) + E(4, 1, 2) + E(4, 3, 4) + E(4, 1, 2, 3, 4)
    assert wedge(a, b) == expected
    assert (a ^ b) == expected


def test_wedge_dimension_mismatch():
    with pytest.raises(ContractError):
        wedge(E(2, 1), E(3, 1))


@given(form_pairs())
def test_wedge_matches_permutation_oracle(pair):
    a, b = pair
    ref = ComplexForm(a.dim, oracles.wedge(a.coeffs, b.coeffs))
    assert close(wedge(a, b), ref, a.norm() * b.norm())


@given(homogeneous_pair())
def test_graded_commutativity(data):
    p, q, a, b = data
    assert close(wedge(a, b), wedge(b, a) * (-1) ** (p * q), a.norm() * b.norm())


def test_wedge_of_one_forms_equals_determinant_evaluation():
    rng = np.random.default_rng(3)
    n, k = 5, 3
    alphas = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
    vs = rng.standard_normal((k, n))
    w = wedge_all([ComplexForm.one_form(a) for a in alphas], n)
    direct = np.linalg.det(alphas @ vs.T)
    assert abs(oracles.evaluate(w.coeffs, vs) - direct) < 1e-12


# ---------------------------------------------------------------------------
# interior


def test_interior_leftmost_slot():
    e1, e2 = np.eye(2)
    assert interior(e1, E(2, 1, 2)) == E(2, 2)
    assert interior(e2, E(2, 1, 2)) == E(2, 1) * -1
    assert interior(e1, one(2)).is_zero()


def test_interior_rejects_covector_part():
    with pytest.raises(ContractError):
        interior(GVec((1, 0), (1, 0)), E(2, 1))


@given(forms(), st.data())
def test_interior_matches_oracle(a, data):
    X = np.array(data.draw(st.lists(coef, min_size=a.dim, max_size=a.dim)))
    ref = ComplexForm(a.dim, oracles.interior(X, a.coeffs))
    assert close(interior(X, a), ref, a.norm() * max(1.0, np.abs(X).sum()))


@given(homogeneous_pair(), st.data())
def test_antiderivation(data, d2):
    p, q, a, b = data
    X = np.array(d2.draw(st.lists(coef, min_size=a.dim, max_size=a.dim)))
    lhs = interior(X, wedge(a, b))
    rhs = wedge(interior(X, a), b) + wedge(a, interior(X, b)) * (-1) ** p
    assert close(lhs, rhs, a.norm() * b.norm() * max(1.0, np.abs(X).sum()))


def test_interior_is_evaluation_in_first_slot():
    rng = np.random.default_rng(5)
    a = ComplexForm(4, {I_: rng.standard_normal() for I_ in [(1, 2, 3), (1, 2, 4), (2, 3, 4)]})
    X, v2, v3 = rng.standard_normal((3, 4))
    lhs = oracles.evaluate(interior(X, a).coeffs, [v2, v3])
    assert abs(lhs - oracles.evaluate(a.coeffs, [X, v2, v3])) < 1e-12


# ---------------------------------------------------------------------------
# Clifford action and metric


def test_clifford_examples():
    v = GVec((1, 0), (1, 0))
    assert clifford_act(v, one(2)) == E(2, 1)
    rng = np.random.default_rng(1)
    a = ComplexForm.from_array(2, rng.standard_normal(4) + 1j * rng.standard_normal(4))
    assert close(clifford_act(v, clifford_act(v, a)), a)


def test_symplectic_annihilator_element():
    phi = exp_two_form(TwoForm.from_upper([[0, 1], [0, 0]]) * I)
    assert phi == one(2) + E(2, 1, 2, coeff=I)
    assert clifford_act(GVec((1, 0), (0, -I)), phi).is_zero()


def test_metric_examples():
    assert metric(GVec((1, 0), (1, 0)), GVec((1, 0), (1, 0))) == 1
    assert metric(GVec((1, 0), (0, 0)), GVec((1, 0), (0, 0))) == 0
    assert metric(GVec((1, 0), (0, 0)), GVec((0, 0), (0, 1))) == 0
    assert metric(GVec((1, 0), (0, 0)), GVec((0, 0), (1, 0))) == 0.5


@st.composite
def gvec_and_form(draw):
    n = draw(st.integers(1, 5))
    v = GVec(tuple(draw(st.lists(coef, min_size=n, max_size=n))), tuple(draw(st.lists(coef, min_size=n, max_size=n))))
    return v, draw(forms(n))


@given(gvec_and_form())
def test_clifford_relation(data):
    v, a = data
    lhs = clifford_act(v, clifford_act(v, a))
    assert close(lhs, a * metric(v, v), a.norm() * 4 * v.dim)


# ---------------------------------------------------------------------------
# reversal, pairing, exponential


def test_reversal_examples():
    assert reversal(one(2)) == one(2)
    assert reversal(E(2, 1, 2)) == E(2, 1, 2) * -1
    assert reversal(E(4, 1, 2, 3, 4)) == E(4, 1, 2, 3, 4)


@given(form_pairs())
def test_reversal_anti_automorphism(pair):
    a, b = pair
    assert reversal(reversal(a)) == a
    assert close(reversal(wedge(a, b)), wedge(reversal(b), reversal(a)), a.norm() * b.norm())


def test_pairing_examples():
    assert mukai_pair(one(2), E(2, 1, 2)) == 1
    phi = exp_two_form(TwoForm.from_upper([[0, 1], [0, 0]]) * I)
    assert mukai_pair(phi, phi.conjugate()) == pytest.approx(-2j)
    # direct expansion: sigma(e1 + i e2) ^ (e1 - i e2) = -2i e12
    om = ComplexForm.one_form([1, I])
    assert mukai_pair(om, om.conjugate()) == pytest.approx(-2j)
    assert abs(mukai_pair(om, om.conjugate())) == pytest.approx(2.0)


@given(form_pairs())
def test_pairing_matches_oracle(pair):
    a, b = pair
    ref = oracles.mukai(a.coeffs, b.coeffs, a.dim)
    assert abs(mukai_pair(a, b) - ref) <= 1e-12 * max(1.0, a.norm() * b.norm())


@given(form_pairs(), st.data())
def test_pairing_b_field_invariance(pair, data):
    a, b = pair
    n = a.dim
    upper = np.triu(np.array(data.draw(st.lists(st.floats(-1, 1), min_size=n * n, max_size=n * n))).reshape(n, n), 1)
    eB = exp_two_form(TwoForm.from_upper(upper))
    lhs = mukai_pair(wedge(eB, a), wedge(eB, b))
    scale = max(1.0, wedge(eB, a).norm() * wedge(eB, b).norm())
    assert abs(lhs - mukai_pair(a, b)) <= 1e-12 * scale


def test_exp_examples():
    assert exp_two_form(TwoForm.zero(3)) == one(3)
    assert exp_two_form(TwoForm.from_upper([[0, 1], [0, 0]])) == one(2) + E(2, 1, 2)
    B = TwoForm.from_upper(np.array([[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 0.0]]))
    assert exp_two_form(B) == one(4) + E(4, 1, 2) + E(4, 3, 4) + E(4, 1, 2, 3, 4)


def test_exp_top_term_is_pfaffian():
    rng = np.random.default_rng(11)
    M = rng.standard_normal((6, 6))
    M = M - M.T
    top = exp_two_form(TwoForm(M))[(1, 2, 3, 4, 5, 6)]
    assert top == pytest.approx(oracles.pfaffian(M), rel=1e-12)


def test_two_form_requires_exact_antisymmetry():
    with pytest.raises(ContractError):
        TwoForm([[0, 1], [-1.0000001, 0]])
    B = TwoForm.from_form(E(3, 1, 3) * 2.0)
    assert B.matrix[0, 2] == 2 and B.matrix[2, 0] == -2
    assert B.to_form() == E(3, 1, 3) * 2.0


# ---------------------------------------------------------------------------
# grades, conjugation, embedding, pullback


def test_grade_and_parity():
    assert grade_project(one(2) + E(2, 1, 2), 2) == E(2, 1, 2)
    assert parity(exp_two_form(TwoForm.from_upper([[0, 1], [0, 0]]) * I)) == "even"
    assert parity(E(2, 1) + E(2, 1, 2)) == "mixed"
    assert parity(E(2, 1)) == "odd"
    assert conjugate(E(2, 1, coeff=I)) == E(2, 1, coeff=-I)


def test_embed_shifts_indices():
    assert embed(E(2, 1, 2), 5, 3) == E(5, 4, 5)
    with pytest.raises(ContractError):
        embed(E(2, 1), 2, 1)


def test_pullback_is_functorial_and_matches_evaluation():
    rng = np.random.default_rng(2)
    a = ComplexForm.from_array(4, rng.standard_normal(16) + 1j * rng.standard_normal(16))
    A = rng.standard_normal((4, 3))
    C = rng.standard_normal((3, 2))
    assert close(pullback(pullback(a, A), C), pullback(a, A @ C), a.norm() * 10)
    b = pullback(a, A)
    u, v = rng.standard_normal((2, 3))
    assert abs(oracles.evaluate(b.coeffs, [u, v]) - oracles.evaluate(a.coeffs, [A @ u, A @ v])) < 1e-12
    # wedge commutes with pullback
    c = ComplexForm.from_array(4, rng.standard_normal(16))
    assert close(pullback(wedge(a, c), A), wedge(pullback(a, A), pullback(c, A)), 100)


# ---------------------------------------------------------------------------
# literal syntax


def test_parse_examples():
    assert parse_form("1 + (0,1)*e1^e2") == one(2) + E(2, 1, 2, coeff=I)
    assert parse_form("e2^e1", 3) == E(3, 1, 2) * -1
    assert parse_form("-2.5*e3 + e1") == E(3, 3, coeff=-2.5) + E(3, 1)
    assert parse_form("(1e-3,-2)*e1").coeffs == {(1,): complex(1e-3, -2)}


@given(forms())
def test_format_parse_round_trip(a):
    assert parse_form(format_form(a), a.dim) == a


@pytest.mark.parametrize(
    "text, column",
    [("1 + ", 5), ("2 e1", 3), ("1 + e1 ^", 8), ("1 $ e1", 3), ("(1,2", 5), ("", 1)],
)
def test_parse_errors_report_column(text, column):
    with pytest.raises(ParseError) as info:
        parse_form(text)
    assert info.value.location == f"column {column}"
