"""Additive lifts, Borcherds products and the principal-part solver.

An ``OrthoForm`` is a (q, zeta, xi) series on 2U + L(t0)(-1): its coefficient
at xi^s is a Jacobi form of index s * t0 on L.  Both constructions in this
module produce forms in that shape, so they can be compared coefficientwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

from . import jacobi as J
from . import series as S
from .hecke import HeckeError, hecke_raise, hecke_raise_weight_half
from .jacobi import JacobiError, JacobiForm
from .lattice import LatticeModel, enumerate_dual, get_lattice, positive_direction, rescale
from .linalg import SolveError, solve_unique
from .series import INF, QDEN, MultiSeries

F = Fraction


class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class OrthoForm:
    series: MultiSeries
    weight: Fraction
    lattice: LatticeModel   # unscaled L; zeta exponents are pairing vectors for L
    t0: Fraction            # index of the xi^1 coefficient
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "weight", F(self.weight))
        object.__setattr__(self, "t0", F(self.t0))

    @property
    def target(self) -> LatticeModel:
        """L(t0), so that the form lives on 2U + L(t0)(-1)."""
        if self.t0.denominator != 1:
            raise LiftError("non-integral xi index")
        return rescale(self.lattice, int(self.t0))

    @property
    def q_order(self):
        return self.series.q_order

    @property
    def xi_order(self):
        return self.series.xi_order_exp

    def fj(self, s) -> JacobiForm:
        """The Fourier-Jacobi coefficient at xi^s as a Jacobi form of index s * t0."""
        lev = self.series.xi_level(s)
        return JacobiForm(lev, self.weight, F(s) * self.t0, self.lattice, 0)

    def coeff(self, n, r, s) -> S.mpq:
        return self.series.coeff(n, tuple(r), s)

    def terms(self):
        return self.series.terms()

    def truncate(self, q_order=None, xi_order=None) -> "OrthoForm":
        return replace(self, series=self.series.truncate(q_order, xi_order))

    def scale(self, c) -> "OrthoForm":
        return replace(self, series=self.series.scale(c))

    def __repr__(self) -> str:
        return (f"OrthoForm({self.name or '?'}: k={self.weight}, M=2U+{self.lattice.name}({self.t0})(-1), "
                f"q<={self.q_order}, xi<={self.xi_order})")


def _xi_key(s, dx):
    return S.num_over(s, dx, "xi exponent")


def _from_levels(nz: int, dz: int, dx: int, levels: Dict[Fraction, MultiSeries], xi_order) -> MultiSeries:
    """Assemble a xi-series from zeta/q series placed at the given xi exponents."""
    xo = S.num_over(xi_order, dx, "xi order")
    cells: Dict[Tuple[int, int], dict] = {}
    qb = [INF] * (xo + 1)
    for s, lev in levels.items():
        lev = lev.with_denominators(math.lcm(lev.dz, dz), 1)
        if lev.dz != dz:
            raise LiftError("zeta denominator mismatch")
        x = _xi_key(s, dx)
        if x > xo:
            continue
        for (q, _), cell in lev.cells.items():
            cells[(q, x)] = dict(cell)
        qb[x] = lev.qbound(0)
    return S.MultiSeries(nz, dz, dx, cells, xo, qb, _trusted=True)


# -- additive lift ---------------------------------------------------------------------

def grit(phi: JacobiForm, q_order, xi_order, check_holomorphic: bool = True) -> OrthoForm:
    """f(0,0) G_k + sum_{m = 1 mod Q} phi | T_-^(Q)(m) xi^(m/Q), on the box (q_order, xi_order).

    phi must be known to q^(m_max * q_order) where m_max is the largest m used.
    """
    q_order, xi_order = F(q_order), F(xi_order)
    if check_holomorphic and not phi.is_holomorphic():
        raise LiftError("additive lift needs a holomorphic Jacobi form")
    Q = phi.Q
    half = phi.weight == F(1, 2)
    if not half:
        if phi.weight.denominator != 1:
            raise LiftError("additive lift needs integral weight")
        if phi.D % 2:
            raise LiftError("additive lift needs an even eta power")
    if Q % 2 and phi.index.denominator != 1:
        raise LiftError("odd conductor needs integral index")
    L = phi.lattice
    dz = phi.series.dz
    levels: Dict[Fraction, MultiSeries] = {}
    c00 = S.frac(phi.coeff(0))
    if c00:
        k = int(phi.weight)
        g = J.eisenstein(k, q_order, "G")
        levels[F(0)] = J.as_arity(g, L.dim, dz).scale(c00)
    else:
        levels[F(0)] = S.zero(L.dim, dz, 1, q_order)
    m = 1
    while F(m, Q) <= xi_order:
        if m % Q == 1 % Q:
            need = m * q_order
            if phi.prec < need:
                raise LiftError(f"input known to q^{phi.prec}; T({m}) needs q^{need}")
            img = hecke_raise_weight_half(phi, m) if half else hecke_raise(phi, m)
            levels[F(m, Q)] = img.series.truncate(q_order=q_order)
        m += 1
    ser = _from_levels(L.dim, dz, Q, levels, xi_order)
    t0 = Q * phi.index
    return OrthoForm(ser, phi.weight, L, t0, f"Grit({phi.name})" if phi.name else "")


# -- Borcherds products -------------------------------------------------------------------

@dataclass(frozen=True)
class BorcherdsData:
    A: Fraction
    B: Tuple[Fraction, ...]
    C: Fraction
    weight: Fraction
    char_order: int


def _q0_integral_check(phi: JacobiForm) -> None:
    for n, r, c in phi.terms():
        if phi.hyperbolic_norm(n, r) <= 0 and S.frac(c).denominator != 1:
            raise LiftError(f"non-integral singular coefficient at q^{n} zeta^{r}")


def borcherds_abc(phi: JacobiForm) -> BorcherdsData:
    """Weyl vector (A, B, C) and weight f(0,0)/2 from the q^0 term."""
    if phi.weight != 0 or phi.D:
        raise LiftError("Borcherds products need a weight-0 form with trivial character")
    _q0_integral_check(phi)
    L = phi.lattice
    t = phi.index
    q0 = phi.q_term(0)
    A = sum((S.frac(c) for c in q0.values()), F(0)) / 24
    B = [F(0)] * L.dim
    Cs = F(0)
    for r, c in q0.items():
        c = S.frac(c)
        if any(r) and positive_direction(r):
            for i in range(L.dim):
                B[i] += c * r[i] / 2
        Cs += c * L.norm(r) / t
    C = Cs / (2 * L.rank)
    weight = F(q0.get((F(0),) * L.dim, 0)) / 2
    order = 24 // math.gcd(24, int(24 * A)) if (24 * A).denominator == 1 else 0
    return BorcherdsData(A, tuple(B), C, weight, order)


def _pole_order(phi: JacobiForm) -> int:
    v = phi.series.q_valuation()
    return 0 if v is None or v >= 0 else int(math.ceil(-v))


def _binomial_terms(e: int):
    """(j, binom(e, j)) for j = 0, 1, ...; finite when e >= 0."""
    c = F(1)
    j = 0
    while c:
        yield j, c
        j += 1
        c = c * (e - j + 1) / j


@dataclass(frozen=True)
class _Plan:
    """Truncation plan shared by both Borcherds routes.

    Before the shift by q^A zeta^B xi^C, level m (the coefficient of xi^m) is kept to
    q^(T + p (mx - m)) with T = q_order - A: a factor at level m has q-valuation
    >= -p m, so the product stays known to q^T on every level up to mx.
    """
    data: BorcherdsData
    p: int
    mx: int
    T: Fraction

    def bound(self, m: int) -> Fraction:
        return self.T + self.p * (self.mx - m)

    def profile(self) -> Tuple[int, ...]:
        return tuple(math.floor(self.bound(m) * QDEN) for m in range(self.mx + 1))

    def need(self) -> Fraction:
        """Precision of phi needed for the levels 1..mx."""
        return max([F(0)] + [m * self.bound(m) for m in range(1, self.mx + 1)])


def _plan(phi: JacobiForm, q_order, xi_order) -> _Plan:
    data = borcherds_abc(phi)
    mx = math.floor(F(xi_order) - data.C)
    if mx < 0:
        raise LiftError(f"xi order {xi_order} is below the xi-valuation C = {data.C}")
    plan = _Plan(data, _pole_order(phi), mx, F(q_order) - data.A)
    if phi.prec < plan.need():
        raise LiftError(f"input known to q^{phi.prec}; this box needs q^{plan.need()}")
    return plan


def required_precision(phi: JacobiForm, q_order, xi_order) -> Fraction:
    """q-precision of phi that either Borcherds route needs for the given box."""
    data = borcherds_abc(phi)
    mx = math.floor(F(xi_order) - data.C)
    if mx < 0:
        raise LiftError(f"xi order {xi_order} is below the xi-valuation C = {data.C}")
    return _Plan(data, _pole_order(phi), mx, F(q_order) - data.A).need()


def _finish(acc: MultiSeries, plan: _Plan, q_order) -> MultiSeries:
    d = plan.data
    out = acc.shift(q=d.A, zeta=d.B, xi=d.C)
    top = d.C + plan.mx
    out = out.truncate(q_order=q_order, xi_order=top)
    if not out.guaranteed_box(q_order, top):
        raise LiftError("expansion did not reach the requested box")
    return out


def borcherds_product(phi: JacobiForm, q_order, xi_order) -> OrthoForm:
    """q^A zeta^B xi^C prod_{(n,l,m) > 0} (1 - q^n zeta^l xi^m)^f(nm, l).

    (n, l, m) > 0 means m > 0, or m = 0 and n > 0, or m = n = 0 and l < 0.  The
    result is exact on the box q <= q_order, xi <= C + floor(xi_order - C).
    """
    plan = _plan(phi, q_order, xi_order)
    L = phi.lattice
    nz = L.dim
    dz = 2 * phi.series.dz
    prof = plan.profile()
    origin = (0,) * nz

    def bounded(terms) -> MultiSeries:
        s = S.from_terms(nz, terms, dz)
        return MultiSeries(nz, dz, 1, s.cells, plan.mx, prof)

    acc = bounded([(0, origin, 0, 1)])
    for r, c in phi.q_term(0).items():
        if any(r) and not positive_direction(r):
            e = S.frac(c)
            if e < 0 or e.denominator != 1:
                raise LiftError(f"exponent {e} on (1 - zeta^{r}): the product has a pole at the cusp")
            poly = [(0, tuple(j * v for v in r), 0, sympy.binomial(int(e), j) * (-1) ** j)
                    for j in range(int(e) + 1)]
            acc = S.mul(acc, bounded(poly))
    by_level: Dict[Fraction, List] = {}
    for N, r, c in phi.terms():
        if c:
            by_level.setdefault(N, []).append((r, S.frac(c)))
    for m in range(plan.mx + 1):
        n = 1 if m == 0 else -plan.p
        while n <= plan.bound(m):
            for r, e in by_level.get(F(n * m), []):
                if e.denominator != 1:
                    raise LiftError(f"non-integral exponent f({n * m}, {r}) = {e}")
                terms = []
                for j, c in _binomial_terms(int(e)):
                    if j and (j * m > plan.mx or j * n > plan.bound(j * m)):
                        break
                    terms.append((j * n, tuple(j * v for v in r), j * m, c * (-1) ** j))
                if len(terms) > 1:
                    acc = S.mul(acc, bounded(terms))
            n += 1
    out = _finish(acc, plan, q_order)
    return OrthoForm(out, plan.data.weight, L, phi.index, f"Borch({phi.name})" if phi.name else "")


def psi_block(phi: JacobiForm, prec) -> JacobiForm:
    """eta^f(0,0) prod_{l > 0} (vartheta((l, z)) / eta)^f(0,l), the leading FJ coefficient."""
    q0 = phi.q_term(0)
    L = phi.lattice
    lines = [(r, int(c)) for r, c in q0.items() if any(r) and positive_direction(r)]
    f00 = int(q0.get((F(0),) * L.dim, 0))
    if not lines:
        s = J.as_arity(J.eta_power(f00, prec), L.dim, L.d_L)
        return JacobiForm(s, F(f00, 2), 0, L, f00)
    return J.theta_block(L, f00, lines, prec)


def borcherds_via_exp(phi: JacobiForm, q_order, xi_order) -> OrthoForm:
    """psi_{L,C} xi^C exp(-sum_{m >= 1} (phi | T(m)) xi^m), independent of the product route."""
    plan = _plan(phi, q_order, xi_order)
    L = phi.lattice
    psi = psi_block(phi, F(q_order) + plan.p * plan.mx)
    dz = math.lcm(2 * phi.series.dz, psi.series.dz)
    nz = L.dim
    cells: Dict[Tuple[int, int], dict] = {}
    for m in range(1, plan.mx + 1):
        img = hecke_raise(phi.truncate(m * plan.bound(m)), m)
        lev = img.series.truncate(q_order=plan.bound(m)).with_denominators(dz, 1)
        if not lev.is_known(plan.bound(m)):
            raise LiftError(f"T({m}) image short of q^{plan.bound(m)}")
        for (q, _), cell in lev.cells.items():
            cells[(q, m)] = dict(cell)
    prof = (INF,) + plan.profile()[1:]
    g = MultiSeries(nz, dz, 1, cells, plan.mx, prof, _trusted=True)
    ex = S.exp_neg(g)
    ps = psi.series.with_denominators(dz, 1).shift(q=-plan.data.A, zeta=[-b for b in plan.data.B])
    ps = MultiSeries(nz, ps.dz, 1, ps.cells, plan.mx, (ps.qbound(0),), _trusted=True)
    out = _finish(S.mul(ps, ex), plan, q_order)
    return OrthoForm(out, plan.data.weight, L, phi.index, f"Borch({phi.name})" if phi.name else "")


# -- divisors -----------------------------------------------------------------------------

def divisor_multiplicity(phi: JacobiForm, n, r, target_norm) -> int:
    """sum_{d > 0} f(d^2 n, d l) for the vector (n, l) of norm 2n - (l,l) = target_norm."""
    n = F(n)
    r = tuple(F(v) for v in r)
    hn = phi.hyperbolic_norm(n, r)
    if hn != F(target_norm):
        raise LiftError(f"(n, l) has norm {hn}, not {target_norm}")
    if hn >= 0:
        raise LiftError("divisors come from negative-norm vectors")
    # every discriminant class has a vector of norm <= 2, so f(N, l) = 0 once
    # 2N - (l,l) < -2 - 2p for a form with q-valuation -p
    floor_hn = -2 - 2 * _pole_order(phi)
    total = F(0)
    d = 1
    while d * d * hn >= floor_hn:
        dn = d * d * n
        if dn > phi.prec:
            raise LiftError(f"multiplicity needs f at q^{dn}; input known to q^{phi.prec}")
        total += S.frac(phi.coeff(dn, tuple(d * v for v in r)))
        d += 1
    if total.denominator != 1:
        raise LiftError("non-integral multiplicity")
    return int(total)


def _order_in_discriminant(Lt: LatticeModel, r) -> int:
    k = 1
    while not Lt.in_lattice(tuple(k * v for v in r)):
        k += 1
        if k > abs(Lt.det):
            raise LiftError("vector is not in the dual lattice")
    return k


def class_multiplicities(phi: JacobiForm, norm, div) -> Dict[Tuple[Fraction, ...], int]:
    """Multiplicity along D_v for primitive v of the given norm and divisor, per class l' + L(t).

    v / div = (n, l') in M^v with l' of order div modulo L(t) and 2n - (l', l') = norm / div^2.
    """
    norm = F(norm)
    t = phi.index
    Lt = rescale(phi.lattice, int(t))
    target = norm / (div * div)
    out: Dict[Tuple[Fraction, ...], int] = {}
    for r in enumerate_dual(Lt, 4):
        if _order_in_discriminant(Lt, r) != div:
            continue
        n = (target + Lt.norm(r)) / 2
        if n.denominator != 1:
            continue
        key = Lt.discriminant_class(r)
        if key in out:
            continue
        out[key] = divisor_multiplicity(phi, n, r, target)
    return out


# -- principal parts ------------------------------------------------------------------------

def solve_principal_part(lattice_id: str, index: int, spec: Dict[Tuple[Fraction, Tuple], int],
                         prec, window: Sequence[int] = (-1, 0, 1)) -> JacobiForm:
    """The unique Delta^-1 * (weak form of weight 12) with the prescribed singular coefficients.

    ``spec`` maps (2n - (l,l)_{L(t)}, discriminant class of l) to the coefficient;
    every singular coefficient not covered is required to vanish.
    """
    if lattice_id not in J.GENERATORS:
        raise LiftError(f"unknown lattice id {lattice_id!r}")
    monos = J.monomials(lattice_id, 12, index)
    if not monos:
        raise LiftError("no weak forms of weight 12 with this index")
    L = get_lattice(J.LATTICE_OF[lattice_id])
    Lt = rescale(L, index)
    hi = max(window) + 1
    dinv = S.invert(J.delta(hi + 1))
    cands = [J.monomial_form(lattice_id, m, hi + 1).times(dinv, -12) for m in monos]
    rows: Dict[Tuple, Fraction] = {}
    for f in cands:
        for q, z, _ in f.terms():
            if q in window and f.hyperbolic_norm(q, z) < 0:
                key = (f.hyperbolic_norm(q, z), Lt.discriminant_class(z))
                rows[(q, z)] = F(spec.get(key, 0))
    if not any(rows.values()):
        raise LiftError("degenerate principal part: every prescribed coefficient is zero")
    cols = [{k: S.frac(f.coeff(*k)) for k in rows} for f in cands]
    try:
        coeffs = solve_unique(cols, rows)
    except SolveError as exc:
        raise LiftError(f"principal part solve on {lattice_id}({index}): {exc}") from exc
    forms = [J.monomial_form(lattice_id, m, F(prec) + 1).times(S.invert(J.delta(F(prec) + 2)), -12)
             for m, c in zip(monos, coeffs) if c]
    out = J.lincomb([c for c in coeffs if c], forms).truncate(prec)
    return out.named(f"Phi12_input_{lattice_id}({index})")


def phi12_input(lattice_name: str, prec) -> JacobiForm:
    """Input of Phi_12 on 2U + L(-1): principal part q^-1 on the zero class, nothing else."""
    L = get_lattice(lattice_name)
    base = L.base_name or L.name
    lid = "A3" if base == "D3" else base
    zero = tuple(F(0) for _ in range(L.rank))
    return solve_principal_part(lid, L.scale, {(F(-2), zero): 1}, prec)
