from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from orthoforms import jacobi as J
from orthoforms import lifts as Lf
from orthoforms import ortho as O
from orthoforms import series as S


def grit_of(name, q, x):
    return O.grit_form(name, q, x)


# -- additive lift -----------------------------------------------------------------------

def test_first_fj_coefficient_is_input():
    g = grit_of("eta12_phi_0_1", 3, 2)
    Q = 2
    phi = J.form("eta12_phi_0_1", 3)
    lev = g.series.xi_level(F(1, Q))
    assert S.series_equal(lev, phi.series.truncate(q_order=3))


def test_grit_weights_and_target():
    g = grit_of("eta12_phi_0_1", 2, 2)
    assert g.weight == 6 and g.target.name == "A1(2)"
    h = grit_of("eta6_phi_-1_1/2", 2, 2)
    assert h.weight == 2 and h.target.name == "A1(2)"
    assert grit_of("eta4_phi_-1_1/2", 2, 2).target.name == "A1(3)"
    assert grit_of("eta3_phi_-1_1/2", 2, 2).target.name == "A1(4)"


def test_grit_eisenstein_constant_term():
    f = J.form("E_4_A1(2)", 4)
    g = Lf.grit(f, 2, 2)
    assert g.coeff(0, (0,), 0) == F(1, 240)
    assert g.coeff(1, (0,), 0) == 1


def test_grit_preconditions():
    with pytest.raises(Lf.LiftError):
        Lf.grit(J.form("phi_0_1", 4), 2, 2)
    with pytest.raises(Lf.LiftError):
        Lf.grit(J.form("eta3_theta3_A2", 4), 2, 2)   # odd eta power
    with pytest.raises(Lf.LiftError):
        Lf.grit(J.form("E_4_A1(2)", 1), 2, 2)         # input too short for T(2)


@settings(max_examples=8, deadline=None)
@given(st.fractions(-3, 3, max_denominator=3), st.fractions(-3, 3, max_denominator=3))
def test_grit_linearity(a, b):
    p = 4
    phi = J.form("E_4_A1(2)", p)
    psi = J.form("phi_0_2", p).times(J.eisenstein(4, p), 4)
    combo = J.lincomb([a, b], [phi, psi])
    lhs = Lf.grit(combo, 2, 2, check_holomorphic=False)
    rhs = S.add(Lf.grit(phi, 2, 2).series.scale(a),
                Lf.grit(psi, 2, 2, check_holomorphic=False).series.scale(b))
    assert S.series_equal(lhs.series, rhs)


@pytest.mark.parametrize("name", ["E_4_A1(2)", "E_6_A1(2)", "eta12_phi_0_1", "eta6_phi_-1_1/2"])
def test_fj_symmetry_A1_2(name):
    """f_m(n, r) = f_2n(m/2, r): the lift is symmetric under q <-> xi."""
    g = grit_of(name, 3, 3)
    checked = 0
    for n, r, s, c in g.terms():
        if n <= 3 and s <= 3:
            assert S.frac(g.coeff(s, r, n)) == S.frac(c), (n, r, s)
            checked += 1
    assert checked > 10


# -- Borcherds data ------------------------------------------------------------------------

def test_abc_phi_0_2():
    d = Lf.borcherds_abc(J.form("phi_0_2", 1))
    assert (d.A, d.B, d.C, d.weight) == (F(1, 4), (F(1, 2),), F(1, 4), 2)
    assert d.char_order == 4


WEIGHTS = {
    "phi_0_2": 2, "phi1_0_2": 11, "phi_0_3": 1, "phi1_0_3": 7, "phi_0_4": F(1, 2), "phi1_0_4": 5,
    "phi_0_2A1(2)": 1, "phi1_0_2A1(2)": 10, "phi2_0_2A1(2)": 4, "phi_0_A2(2)": 3, "phi1_0_A2(2)": 15,
    "phi_0_A2(3)": 1, "phi1_0_A2(3)": 9, "phi_0_A3(2)": 3, "phi1_0_A3(2)": 18,
    "phi_0_D4(2)": 2, "varphi_0_D4(2)": 6, "phi1_0_D4(2)": 24,
}


@pytest.mark.parametrize("name", sorted(WEIGHTS))
def test_weight_table(name):
    f = J.form(name, 1)
    d = Lf.borcherds_abc(f)
    assert d.weight == WEIGHTS[name]
    assert d.weight == S.frac(f.coeff(0, (F(0),) * f.series.nz)) / 2
    assert 24 % d.char_order == 0


def test_abc_rejects_bad_input():
    with pytest.raises(Lf.LiftError):
        Lf.borcherds_abc(J.form("phi_-2_1", 1))
    half = J.lincomb([F(1, 2)], [J.form("phi_0_2", 1)])
    with pytest.raises(Lf.LiftError):
        Lf.borcherds_abc(half)


def test_product_valuations():
    phi = J.form("phi_0_2", 4)
    d = Lf.borcherds_abc(phi)
    b = Lf.borcherds_product(phi, 2, 2)
    assert b.series.xi_valuation() == d.C
    lead = b.series.xi_level(d.C)
    assert lead.q_valuation() == d.A


@pytest.mark.parametrize("key", sorted(O.ROUTE_INPUTS))
def test_product_equals_exp(key):
    r = O.check_routes(key, 2, 2)
    assert r["product_eq_exp"] and r["leading_is_theta_block"], r


@pytest.mark.parametrize("key", sorted(O.GRIT_EQ_BORCH))
def test_grit_equals_borch(key):
    r = O.check_grit_eq_borch(key, 2, 2)
    assert r["pass"], r


def test_product_rejects_pole_in_leading_block():
    # -phi_0_2 has f(0, l) = -1 at l > 0, a pole of the leading theta block
    bad = J.lincomb([-1], [J.form("phi_0_2", 3)])
    with pytest.raises((Lf.LiftError, S.SeriesError)):
        Lf.borcherds_product(bad, 1, 1)


# -- divisors --------------------------------------------------------------------------------

# (input, norm, div): every class in the list has multiplicity exactly one
REFLECTIVE = [
    ("phi_0_2", -4, 4), ("phi1_0_2", -4, 2), ("phi1_0_2", -4, 4),
    ("phi_0_3", -6, 6), ("phi1_0_3", -6, 3), ("phi1_0_3", -6, 6),
    ("phi_0_4", -8, 8), ("phi1_0_4", -8, 4), ("phi1_0_4", -8, 8),
    ("phi_0_2A1(2)", -4, 4), ("phi1_0_2A1(2)", -4, 2), ("phi1_0_2A1(2)", -4, 4),
    ("phi2_0_2A1(2)", -8, 4),
    ("phi_0_A2(2)", -12, 6), ("phi1_0_A2(2)", -4, 2),
    ("phi_0_A2(3)", -18, 9), ("phi1_0_A2(3)", -6, 3),
    ("phi_0_A3(2)", -8, 4), ("phi1_0_A3(2)", -4, 2),
    ("varphi_0_D4(2)", -8, 4), ("phi1_0_D4(2)", -4, 2),
]


@pytest.mark.parametrize("name,norm,div", REFLECTIVE)
def test_listed_divisors_have_multiplicity_one(name, norm, div):
    m = Lf.class_multiplicities(J.form(name, 2), norm, div)
    assert m and set(m.values()) == {1}


def test_phi_0_D4_2_divisor_is_a_sub_orbit():
    # only the classes with v/2 - (1,0,0,0) in 2U + D4(-1) carry the divisor
    m = Lf.class_multiplicities(J.form("phi_0_D4(2)", 2), -8, 4)
    assert sorted(m.values()) == [0] * 16 + [1] * 8


@pytest.mark.parametrize("name,norm,div", [
    ("phi1_0_3", -6, 1), ("phi1_0_4", -8, 2), ("phi1_0_A2(2)", -12, 2),
])
def test_non_reflective_controls(name, norm, div):
    m = Lf.class_multiplicities(J.form(name, 2), norm, div)
    assert m and set(m.values()) == {0}


def test_divisor_multiplicity_checks_norm():
    f = J.form("phi_0_2", 3)
    with pytest.raises(Lf.LiftError):
        Lf.divisor_multiplicity(f, 0, (F(1),), -4)
    with pytest.raises(Lf.LiftError):
        Lf.divisor_multiplicity(f, 1, (F(0),), 2)


# -- principal parts ----------------------------------------------------------------------------

def test_phi12_input_A1_2():
    p = Lf.phi12_input("A1(2)", 2)
    assert p.coeff(-1, (F(0),)) == 1
    assert p.coeff(0, (F(0),)) == 24
    assert Lf.borcherds_abc(p).weight == 12
    assert set(Lf.class_multiplicities(p, -2, 1).values()) == {1}
    for norm, div in ((-4, 4), (-4, 2), (-4, 1)):
        assert set(Lf.class_multiplicities(p, norm, div).values()) == {0}


@pytest.mark.parametrize("lattice", ["A1(3)", "A1(4)", "2A1(2)", "A2(2)", "A2(3)"])
def test_phi12_weight_and_divisor(lattice):
    p = Lf.phi12_input(lattice, 2)
    assert Lf.borcherds_abc(p).weight == 12
    assert set(Lf.class_multiplicities(p, -2, 1).values()) == {1}


def test_principal_part_rejects_zero_spec():
    with pytest.raises(Lf.LiftError):
        Lf.solve_principal_part("A1", 2, {}, 2)
    with pytest.raises(Lf.LiftError):
        Lf.solve_principal_part("E8", 1, {(F(-2), (F(0),)): 1}, 2)


def test_required_precision():
    need = Lf.required_precision(J.form("phi_0_2", 1), 2, 2)
    b = Lf.borcherds_product(J.form("phi_0_2", need), 2, 2)
    assert b.series.is_known(2)
    with pytest.raises(Lf.LiftError):
        Lf.required_precision(J.form("phi1_0_A3(2)", 1), 2, 1)
