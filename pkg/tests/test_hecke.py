import cmath
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from orthoforms import hecke as H
from orthoforms import jacobi as J
from orthoforms import series as S
from orthoforms.ortho import QUOTIENT_IDS, check_quotient

import oracles

T = ((1, 1), (0, 1))
Smat = ((0, -1), (1, 0))
I = ((1, 0), (0, 1))


def mat_mul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def random_sl2(rng, steps=6):
    A = I
    for _ in range(rng.randint(1, steps)):
        g = T if rng.random() < 0.5 else Smat
        for _ in range(rng.randint(0, 3)):
            A = mat_mul(A, g)
        if rng.random() < 0.3:
            A = mat_mul(A, ((1, -1), (0, 1)))
    return A


def test_multiplier_examples():
    assert H.eta_multiplier(T) == 1
    assert H.eta_multiplier(I) == 0
    assert H.eta_multiplier(Smat) == 21
    assert H.eta_multiplier(((-1, 0), (0, -1))) == oracles.eta_multiplier_numeric(((-1, 0), (0, -1)))
    with pytest.raises(H.HeckeError):
        H.eta_multiplier(((2, 0), (0, 1)))


def test_multiplier_relation_ST_cubed():
    ST = mat_mul(Smat, T)
    ST3 = mat_mul(ST, mat_mul(ST, ST))
    assert ST3 == mat_mul(Smat, Smat)
    assert H.eta_multiplier(ST3) == H.eta_multiplier(mat_mul(Smat, Smat))


def test_multiplier_matches_numeric_oracle():
    rng = random.Random(7)
    mats = {random_sl2(rng) for _ in range(60)}
    mats |= {((2, 1), (1, 1)), ((1, 0), (5, 1)), ((3, -2), (-4, 3)), ((0, 1), (-1, 0))}
    for A in mats:
        if A[1][0] == 0 and A[1][1] == 1 and abs(A[0][1]) > 50:
            continue
        assert H.eta_multiplier(A) == oracles.eta_multiplier_numeric(A), A


def _sqrt_cocycle(A, B, tau):
    """sqrt(j(AB,tau)) / (sqrt(j(A,B tau)) sqrt(j(B,tau))) with principal roots: +-1."""
    def j(M, t):
        return M[1][0] * t + M[1][1]

    def act(M, t):
        return (M[0][0] * t + M[0][1]) / j(M, t)

    r = cmath.sqrt(j(mat_mul(A, B), tau)) / (cmath.sqrt(j(A, act(B, tau))) * cmath.sqrt(j(B, tau)))
    assert abs(abs(r) - 1) < 1e-9 and abs(r.imag) < 1e-9
    return round(r.real)


def test_cocycle_up_to_branch_sign():
    """e(AB) = e(A) + e(B) exactly when the square-root branches agree, else +12."""
    rng = random.Random(11)
    tau = complex(0.123, 0.917)
    for _ in range(100):
        A, B = random_sl2(rng), random_sl2(rng)
        d = (H.eta_multiplier(mat_mul(A, B)) - H.eta_multiplier(A) - H.eta_multiplier(B)) % 24
        assert d in (0, 12)
        assert (d == 12) == (_sqrt_cocycle(A, B, tau) == -1), (A, B)
        # even eta powers never see the branch
        for D in (2, 6, 8, 12, 24):
            assert (D * d) % 24 == 0


def test_dedekind_sum():
    assert H.dedekind_sum(1, 1) == 0
    assert H.dedekind_sum(1, 3) == F(1, 18)
    # reciprocity s(h,k) + s(k,h) = (h/k + k/h + 1/(hk))/12 - 1/4
    for h, k in ((3, 7), (5, 11), (2, 9), (13, 21)):
        lhs = H.dedekind_sum(h, k) + H.dedekind_sum(k, h)
        assert lhs == (F(h, k) + F(k, h) + F(1, h * k)) / 12 - F(1, 4)


def test_hecke_data_matrices():
    for m, Q in ((5, 4), (3, 2), (2, 1), (4, 3), (7, 8)):
        x, y, mats = H.hecke_data(m, Q)
        assert m * x + Q * y == 1
        assert sorted(mats) == [a for a in range(1, m + 1) if m % a == 0]
    with pytest.raises(H.HeckeError):
        H.hecke_data(4, 2)


def test_raise_by_one_is_identity():
    for name in ("phi_0_1", "theta_2A1", "eta3_theta3_A2", "theta4_D4"):
        f = J.form(name, 3)
        assert H.hecke_raise(f, 1) is f


def _V_oracle(f, m, N, R):
    """sum over a | (N, R, m) of a^(k-1) f(N m / a^2, R / a) for a D = 0 form."""
    k = int(f.weight)
    total = F(0)
    for a in range(1, m + 1):
        if m % a or F(N, 1) % a or any(F(r) % a for r in R):
            continue
        total += F(a) ** (k - 1) * S.frac(f.coeff(F(N) * m / (a * a), tuple(F(r) / a for r in R)))
    return total


@pytest.mark.parametrize("name,m", [("phi_0_1", 2), ("phi_0_1", 3), ("phi_-2_1", 2), ("phi_0_2A1", 2)])
def test_raise_matches_divisor_sum(name, m):
    f = J.form(name, 6)
    g = H.hecke_raise(f, m)
    assert g.index == f.index * m and g.weight == f.weight
    nz = f.series.nz
    rng = range(-4, 5) if nz == 1 else [(a, b) for a in range(-3, 4) for b in range(-3, 4)]
    for N in range(0, 3):
        for R in rng:
            R = (R,) if nz == 1 else R
            assert S.frac(g.coeff(N, tuple(F(r) for r in R))) == _V_oracle(f, m, N, R), (N, R)


def test_raised_form_is_jacobi_of_new_index():
    g = H.hecke_raise(J.form("phi_0_1", 8), 2)
    assert J.elliptic_check(g, (1,), (0,))


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["phi_0_1", "phi_-2_1", "phi_0_2A1", "phi_-4_2A1"]), st.integers(1, 4))
def test_weak_input_gives_weak_output(name, m):
    g = H.hecke_raise(J.form(name, 4 * m), m)
    assert all(q >= 0 for q, _, _ in g.terms())


def test_character_bookkeeping():
    f = J.form("theta_2A1", 6)
    assert f.D == 6 and f.Q == 4
    g = H.hecke_raise(f, 5)
    x, _, _ = H.hecke_data(5, 4)
    assert g.D == (6 * x) % 24
    with pytest.raises(H.HeckeError):
        H.hecke_raise(f, 2)
    with pytest.raises(H.HeckeError):
        H.hecke_raise(J.theta(3), 3)
    with pytest.raises(H.HeckeError):
        H.hecke_raise(f, 0)


def test_quotient_moduli_are_one_mod_Q():
    for target, (num, m) in H.QUOTIENTS.items():
        f = J.form(num, 1)
        assert f.Q == 24 // math.gcd(f.D, 24)
        assert (m - 1) % f.Q == 0, (target, f.D, m)


@pytest.mark.parametrize("key", sorted(QUOTIENT_IDS))
def test_printed_quotients(key):
    r = check_quotient(key, 1)
    assert r["pass"], r


def test_quotient_q0_examples():
    q0 = {z: S.frac(c) for z, c in H.hecke_quotient("theta_2A1", 5, 1).q_term(0).items()}
    one = F(1)
    assert q0 == {(one, F(0)): 1, (-one, F(0)): 1, (F(0), one): 1, (F(0), -one): 1, (F(0), F(0)): 2}


def test_weight_half_operator():
    t = J.theta(10)
    # non-square m kills vartheta; square m = 9 keeps the (-4/.) pattern
    assert len(H.hecke_raise_weight_half(t, 3).series) == 0
    g = H.hecke_raise_weight_half(t, 9)
    assert g.index == F(9, 2) and len(g.series) > 0
    for n, r, c in g.terms():
        assert (8 * n).denominator == 1
    with pytest.raises(H.HeckeError):
        H.hecke_raise_weight_half(t, 2)
    with pytest.raises(H.HeckeError):
        H.hecke_raise_weight_half(J.form("phi_0_1", 2), 3)
