"""The eta multiplier on explicit matrices and the index-raising operators T_-^(Q)(m)."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Sequence, Tuple

import sympy

from . import jacobi as J
from . import series as S
from .jacobi import JacobiError, JacobiForm

F = Fraction


class HeckeError(ValueError):
    pass


def dedekind_sum(h: int, k: int) -> Fraction:
    """s(h, k) = sum_{r=1}^{k-1} (r/k)((hr/k)) for k > 0."""
    if k <= 0:
        raise HeckeError("Dedekind sum needs k > 0")

    def saw(x: Fraction) -> Fraction:
        if x.denominator == 1:
            return F(0)
        return x - math.floor(x) - F(1, 2)

    return sum((F(r, k) * saw(F(h * r, k)) for r in range(1, k)), F(0))


def eta_multiplier(A: Sequence[Sequence[int]]) -> int:
    """e mod 24 with eta(A tau) = exp(2 pi i e / 24) (c tau + d)^(1/2) eta(tau), principal root."""
    (a, b), (c, d) = A
    if a * d - b * c != 1:
        raise HeckeError("eta_multiplier needs a matrix of determinant 1")
    if c == 0:
        return b % 24 if d == 1 else (-b - 6) % 24
    if c < 0:
        # A and -A act alike; the square roots of c tau + d differ by the factor -i
        return (eta_multiplier(((-a, -b), (-c, -d))) + 6) % 24
    e = F(a + d, c) - 12 * dedekind_sum(d, c) - 3
    if e.denominator != 1:
        raise HeckeError("non-integral multiplier exponent")  # pragma: no cover
    return int(e) % 24


def _real_root(e: int) -> int:
    """exp(2 pi i e/24) as +-1, or raise if it is not real."""
    e %= 24
    if e == 0:
        return 1
    if e == 12:
        return -1
    raise HeckeError(f"non-real multiplier value exp(2 pi i {e}/24)")


def hecke_data(m: int, Q: int):
    """(x, y) with m x + Q y = 1 and the matrices sigma_a for a | m."""
    if math.gcd(m, Q) != 1:
        raise HeckeError(f"m={m} is not coprime to Q={Q}")
    x, y, _ = sympy.gcdex(m, Q)
    x, y = int(x), int(y)
    assert m * x + Q * y == 1
    mats = {}
    for a in sympy.divisors(m):
        d = m // a
        sig = ((d * x + Q * d * x * y, -Q * y), (Q * y, a))
        if sig[0][0] * sig[1][1] - sig[0][1] * sig[1][0] != 1:
            raise HeckeError(f"sigma_{a} does not have determinant 1")
        mats[a] = sig
    return x, y, mats


def hecke_raise(f: JacobiForm, m: int) -> JacobiForm:
    """phi | T_-^(Q)(m) by the coefficient formula; index m t, character D x."""
    if m < 1:
        raise HeckeError("m must be a positive integer")
    if f.weight.denominator != 1:
        raise HeckeError("hecke_raise needs integral weight")
    D = f.D
    if D % 2:
        raise HeckeError("the eta power D must be even")
    Q = f.Q
    if Q % 2 and f.index.denominator != 1:
        raise HeckeError("odd conductor needs integral index")
    if m == 1:
        return f
    k = int(f.weight)
    x, _, mats = hecke_data(m, Q)
    ups = {a: D * eta_multiplier(sig) for a, sig in mats.items()}
    L = f.lattice
    P = f.prec
    if P in (S.INF, -S.INF):
        raise HeckeError("hecke_raise needs a truncated input")
    top = P / m
    out: Dict[Tuple, Fraction] = {}
    for n, r, c in f.terms():
        # source (n, r) feeds the target (a^2 n / m, a r) through the divisor a
        for a in mats:
            tn = n * a * a / m
            if tn > top:
                continue
            if (tn * Q / a).denominator != 1:
                continue
            tr = tuple(a * v for v in r)
            key = (tn, tr)
            val = F(a) ** (k - 1) * _real_root(ups[a]) * S.frac(c)
            out[key] = out.get(key, 0) + val
    terms = [(n, r, 0, c) for (n, r), c in out.items() if c]
    qo = F(math.floor(top * S.QDEN), S.QDEN)
    res = S.from_terms(L.dim, terms, f.series.dz, 1, q_order=qo)
    return JacobiForm(res, f.weight, f.index * m, L, D * x)


def _half_weight(a: int) -> int:
    """lambda(a) * (-4/a) for odd a."""
    chi = 1 if a % 4 == 1 else -1
    return chi * (-1) ** sympy.primeomega(a)


def hecke_raise_weight_half(f: JacobiForm, m: int) -> JacobiForm:
    """Index-raising operator for vartheta-type inputs of weight 1/2 (D = 3, Q = 8).

    The factor a^(k-1) v(sigma_a) is not rational here.  The divisor a gets the
    weight lambda(a) (-4/a) instead (lambda is Liouville's function).  For the
    input vartheta this makes the coefficient at (n, l, m/8) equal to (-4/2l)
    exactly when 8n and m are both squares.
    """
    if f.weight != F(1, 2) or f.D != 3:
        raise HeckeError("weight-1/2 operator is only defined for vartheta-type inputs")
    Q = 8
    if math.gcd(m, Q) != 1:
        raise HeckeError(f"m={m} is not coprime to Q={Q}")
    L = f.lattice
    P = f.prec
    top = P / m
    x = int(sympy.mod_inverse(m, Q))
    out: Dict[Tuple, Fraction] = {}
    for n, r, c in f.terms():
        for a in sympy.divisors(m):
            tn = n * a * a / m
            if tn > top or (tn * Q / a).denominator != 1:
                continue
            tr = tuple(a * v for v in r)
            key = (tn, tr)
            out[key] = out.get(key, 0) + _half_weight(a) * S.frac(c)
    terms = [(n, r, 0, c) for (n, r), c in out.items() if c]
    qo = F(math.floor(top * S.QDEN), S.QDEN)
    res = S.from_terms(L.dim, terms, f.series.dz, 1, q_order=qo)
    return JacobiForm(res, f.weight, f.index * m, L, 3 * x)


QUOTIENTS = {
    # target name: (numerator id, m)
    "phi_0_2A1(2)": ("theta_2A1", 5),
    "phi_0_A2(2)": ("eta3_theta3_A2", 3),
    "phi_0_A2(3)": ("eta-1_theta3_A2", 4),
    "phi1_0_A2(3)": ("Theta_A2(3)", 2),
    "phi_0_A3(2)": ("eta3_theta3_A3", 3),
    "phi_0_D4(2)": ("theta4_D4", 3),
}


def hecke_quotient(numerator: str, m: int, prec) -> JacobiForm:
    """-(phi | T_-(m)) / phi for a registered numerator phi."""
    prec = F(prec)
    v = J.form(numerator, 2).series.q_valuation()
    if v is None:
        raise HeckeError(f"{numerator} has no terms below q^2")
    # the quotient to q^prec needs phi|T(m) to q^(prec + v), i.e. phi to m (prec + v)
    need = m * (prec + v) + 1
    num = J.form(numerator, need)
    raised = hecke_raise(num, m)
    den = num.truncate(prec + v + 1)
    quo = S.divide(raised.series, den.series)
    quo = quo.truncate(q_order=prec)
    if not quo.is_known(prec):
        raise HeckeError("quotient precision shortfall")
    out = JacobiForm(quo, raised.weight - num.weight, raised.index - num.index, num.lattice,
                     raised.D - num.D, f"-T({m}){numerator}/{numerator}")
    return out * -1
