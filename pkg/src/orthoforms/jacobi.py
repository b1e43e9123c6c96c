"""Jacobi forms of lattice index: building blocks, named generators, weak-form spaces.

A ``JacobiForm`` stores its Fourier expansion as a xi-free ``MultiSeries`` whose
zeta exponents are the pairing vectors ``r`` described in ``lattice``.  The
index is recorded relative to the unscaled lattice, so a form of index t on L
is at the same time a form of index 1 on L(t) with an identical coefficient
table.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import reduce
from itertools import product as iproduct
from typing import Callable, Dict, List, Sequence, Tuple

import sympy
from gmpy2 import mpq

from . import series as S
from .lattice import LatticeModel, get_lattice, rescale
from .linalg import SolveError, independent_subset, solve_particular, solve_unique
from .series import INF, QDEN, MultiSeries, SeriesError

F = Fraction


class JacobiError(ValueError):
    pass


# -- pure q-series ----------------------------------------------------------------

_eta_cache: Dict[int, List[int]] = {}
_lock = threading.Lock()


def _euler(n: int) -> List[int]:
    """Coefficients of prod_{j>=1}(1 - q^j) up to q^n (pentagonal numbers)."""
    a = [0] * (n + 1)
    k = 0
    while True:
        done = True
        for s in (k, -k) if k else (0,):
            e = s * (3 * s - 1) // 2
            if e <= n:
                a[e] = -1 if k % 2 else 1
                done = False
        if done and k:
            break
        k += 1
    return a


def _series_power(a: List[int], alpha: int, n: int) -> List:
    """Coefficients of f^alpha for f = sum a_i q^i with a_0 = 1 (Miller recurrence)."""
    g = [Fraction(0)] * (n + 1)
    g[0] = Fraction(1)
    nz = [(k, a[k]) for k in range(1, min(len(a), n + 1)) if a[k]]
    for m in range(1, n + 1):
        acc = 0
        for k, ak in nz:
            if k > m:
                break
            acc += ((alpha + 1) * k - m) * ak * g[m - k]
        g[m] = Fraction(acc, m)
    return [int(x) if x.denominator == 1 else x for x in g]


def _eta_product_coeffs(D: int, n: int) -> List:
    with _lock:
        c = _eta_cache.get(D)
        if c is not None and len(c) > n:
            return c[: n + 1]
    c = _series_power(_euler(n), D, n)
    with _lock:
        old = _eta_cache.get(D)
        if old is None or len(old) < len(c):
            _eta_cache[D] = c
    return c


def _qnum(x) -> int:
    return S.num_over(x, QDEN, "q exponent")


def _floor_num(prec) -> int:
    """Largest q numerator not exceeding prec."""
    return math.floor(F(prec) * QDEN)


def qseries(coeffs: Dict[int, object], prec, nz: int = 0, dz: int = 1) -> MultiSeries:
    """Series sum c q^(num/24) from {num: c}, known up to q^prec."""
    cells = {(k, 0): {0: S.to_mpq(S.frac(v))} for k, v in coeffs.items() if v}
    return MultiSeries(nz, dz, 1, cells, INF, (_floor_num(prec),))


def as_arity(s: MultiSeries, nz: int, dz: int = 1) -> MultiSeries:
    """View a zeta-free series as a series in nz zeta variables."""
    if s.nz == nz and s.dz == dz:
        return s
    if any(k for cell in s.cells.values() for k in cell):
        raise JacobiError("series depends on zeta")
    return MultiSeries(nz, dz, s.dx, {key: dict(c) for key, c in s.cells.items()}, s.xi_order, s.qb,
                       _trusted=True)


def eta_power(D: int, prec, nz: int = 0, dz: int = 1) -> MultiSeries:
    """eta(tau)^D = q^(D/24) prod (1-q^j)^D, known up to q^prec."""
    top = _floor_num(prec) - D
    n = top // QDEN
    coeffs = {}
    if n >= 0:
        for i, c in enumerate(_eta_product_coeffs(D, n)):
            if c:
                coeffs[D + QDEN * i] = c
    return qseries(coeffs, prec, nz, dz)


def _sigma(n: int, k: int) -> int:
    return sum(d ** k for d in sympy.divisors(n))


def eisenstein(k: int, prec, normalization: str = "E", nz: int = 0, dz: int = 1) -> MultiSeries:
    """E_k (constant term 1) or G_k (q-coefficient 1); k = 2 gives the quasimodular E_2."""
    if k % 2 or k < 2:
        raise JacobiError("Eisenstein series need even weight k >= 2")
    if k == 2 and normalization != "E":
        raise JacobiError("only E_2 is provided in weight 2")
    bk = sympy.bernoulli(k)
    c0 = -F(int(sympy.fraction(bk)[0]), int(sympy.fraction(bk)[1])) / (2 * k)  # -B_k/2k
    n = math.floor(F(prec))
    coeffs: Dict[int, F] = {0: c0}
    for m in range(1, n + 1):
        coeffs[QDEN * m] = F(_sigma(m, k - 1))
    if normalization == "E":
        coeffs = {key: v / c0 for key, v in coeffs.items()}
    elif normalization != "G":
        raise JacobiError("normalization must be 'E' or 'G'")
    return qseries(coeffs, prec, nz, dz)


def delta(prec, nz: int = 0, dz: int = 1) -> MultiSeries:
    return eta_power(24, prec, nz, dz)


# -- Jacobi forms -------------------------------------------------------------------

@dataclass(frozen=True)
class JacobiForm:
    series: MultiSeries
    weight: Fraction
    index: Fraction
    lattice: LatticeModel
    D: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "weight", F(self.weight))
        object.__setattr__(self, "index", F(self.index))
        object.__setattr__(self, "D", self.D % 24)
        if self.series.nz != self.lattice.dim:
            raise JacobiError("series arity does not match the lattice")

    # -- metadata ------------------------------------------------------------
    @property
    def nu(self) -> int:
        return int(2 * self.index) % 2

    @property
    def Q(self) -> int:
        return 24 // math.gcd(self.D, 24)

    @property
    def prec(self):
        return self.series.q_order

    @property
    def on_lattice(self) -> LatticeModel:
        """The rescaled lattice L(t) on which the form has index 1."""
        t = self.index
        if t.denominator != 1:
            raise JacobiError("half-integral index has no integral rescaling")
        return rescale(self.lattice, int(t))

    def named(self, name: str) -> "JacobiForm":
        return replace(self, name=name)

    def __repr__(self) -> str:
        return (f"JacobiForm({self.name or '?'}: k={self.weight}, t={self.index}, "
                f"L={self.lattice.name}, D={self.D}, q<={self.prec})")

    # -- coefficients --------------------------------------------------------
    def coeff(self, n, r: Sequence = ()) -> mpq:
        return self.series.coeff(n, tuple(r) if r else (0,) * self.lattice.dim)

    def q_term(self, n=0) -> Dict[Tuple[Fraction, ...], mpq]:
        return self.series.cell(n)

    def terms(self):
        for q, z, _, c in self.series.terms():
            yield q, z, c

    def norm(self, r) -> Fraction:
        """(l, l) on the unscaled lattice."""
        return self.lattice.norm(r)

    def hyperbolic_norm(self, n, r) -> Fraction:
        """2n - (l,l)_{L(t)}, the quantity whose sign governs holomorphy."""
        return 2 * F(n) - self.lattice.norm(r) / self.index

    def is_holomorphic(self) -> bool:
        return all(self.hyperbolic_norm(q, z) >= 0 for q, z, _ in self.terms())

    def is_weak(self) -> bool:
        return all(q >= 0 for q, _, _ in self.terms())

    def check_exponents(self) -> None:
        """q-exponents lie in D/24 + Z and zeta exponents in 1/2 L^v."""
        for q, z, _ in self.terms():
            if (q - F(self.D, 24)).denominator != 1:
                raise JacobiError(f"q exponent {q} incompatible with character D={self.D}")
            if not self.lattice.in_dual(z, half=True):
                raise JacobiError(f"zeta exponent {z} not in 1/2 L^v")

    # -- arithmetic ----------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, JacobiForm):
            if other.lattice.name != self.lattice.name:
                raise JacobiError("lattice mismatch")
            return JacobiForm(S.mul(self.series, other.series), self.weight + other.weight,
                              self.index + other.index, self.lattice, self.D + other.D)
        return replace(self, series=self.series.scale(other), name="")

    __rmul__ = __mul__

    def __add__(self, other: "JacobiForm") -> "JacobiForm":
        self._check_same_type(other)
        return replace(self, series=S.add(self.series, other.series), name="")

    def __sub__(self, other: "JacobiForm") -> "JacobiForm":
        self._check_same_type(other)
        return replace(self, series=S.add(self.series, other.series.scale(-1)), name="")

    def __neg__(self):
        return self * -1

    def _check_same_type(self, other: "JacobiForm"):
        if (self.weight, self.index, self.D, self.lattice.name) != (
                other.weight, other.index, other.D, other.lattice.name):
            raise JacobiError("adding Jacobi forms of different type")

    def __pow__(self, e: int):
        if e < 0:
            raise JacobiError("negative powers are not Jacobi forms in general")
        return JacobiForm(S.power(self.series, e), self.weight * e, self.index * e, self.lattice,
                          self.D * e)

    def times(self, f: MultiSeries, weight, D: int = 0) -> "JacobiForm":
        """Multiply by a zeta-free modular form of the given weight and eta-power."""
        s = S.mul(self.series, as_arity(f, self.lattice.dim, self.series.dz))
        return JacobiForm(s, self.weight + F(weight), self.index, self.lattice, self.D + D)

    def truncate(self, prec) -> "JacobiForm":
        return replace(self, series=self.series.truncate(q_order=prec))

    def pullback(self, target: LatticeModel, matrix: Sequence[Sequence[int]], name: str = "") -> "JacobiForm":
        """phi(tau, iota z') for iota mapping target ambient coords into ours.

        ``matrix`` has one row per source coordinate: z_src = matrix . z_target,
        so a source exponent R becomes matrix^T R.
        """
        rows = [[F(v) for v in row] for row in matrix]
        nt = target.dim
        s = self.series

        def fn(rn):
            return tuple(sum(rows[i][j] * rn[i] for i in range(len(rn))) for j in range(nt))

        def fn_int(rn):
            v = fn(rn)
            if any(x.denominator != 1 for x in v):
                raise JacobiError("pullback leaves the exponent grid")
            return tuple(int(x) for x in v)

        out = s.map_zeta(fn_int, nz=nt, dz=s.dz)
        return JacobiForm(out, self.weight, self.index, target, self.D, name)

    def linear_image(self, g: Sequence[Sequence], name: str = "") -> "JacobiForm":
        """phi(tau, g z) for g in O(ambient); exponents transform by g^T."""
        return self.pullback(self.lattice, g, name)


def mul_all(forms: Sequence[JacobiForm]) -> JacobiForm:
    return reduce(lambda a, b: a * b, forms)


def lincomb(coeffs: Sequence, forms: Sequence[JacobiForm], name: str = "") -> JacobiForm:
    pairs = [(c, f) for c, f in zip(coeffs, forms)]
    out = pairs[0][1] * pairs[0][0]
    for c, f in pairs[1:]:
        out = out + f * c
    return out.named(name)


# -- thetas -----------------------------------------------------------------------

def _lcm_den(vals) -> int:
    return reduce(math.lcm, (F(v).denominator for v in vals), 1)


def theta_series(kind: int, r: Sequence, prec, nz: int | None = None, dz: int | None = None) -> MultiSeries:
    """Jacobi theta function vartheta_kind(tau, r.z) as a series, known to q^prec.

    kind 1 is the odd function with leading term q^(1/8)(zeta^(1/2) - zeta^(-1/2));
    kinds 2, 3, 4 are the even companions.
    """
    r = [F(v) for v in r]
    nz = len(r) if nz is None else nz
    half = kind in (1, 2)
    need = _lcm_den([v / 2 for v in r]) if half else _lcm_den(r)
    dz = need if dz is None else math.lcm(dz, need)
    top = F(prec)
    bound = math.isqrt(max(0, math.floor(2 * top))) + 2
    terms = []
    for n in range(-bound - 1, bound + 1):
        e = F(2 * n + 1, 2) if half else F(n)
        qe = e * e / 2
        if qe > top:
            continue
        sign = (-1) ** (n % 2) if kind in (1, 4) else 1
        terms.append((qe, tuple(e * v for v in r), 0, sign))
    out = S.from_terms(nz, terms, dz, 1, q_order=top if top != INF else INF)
    return out


def theta(prec) -> JacobiForm:
    """vartheta(tau, z) on A1: weight 1/2, index 1/2, character eta^3 x nu."""
    A1 = get_lattice("A1")
    return JacobiForm(theta_series(1, [1], prec, 1, A1.d_L), F(1, 2), F(1, 2), A1, 3, "theta")


def theta_constant(kind: int, prec) -> MultiSeries:
    return theta_series(kind, [], prec, 0, 1)


def theta_at(L: LatticeModel, r: Sequence, prec, kind: int = 1) -> JacobiForm:
    """vartheta(tau, (l, z)) on L.

    Alone this has the rank-one index l l^T / 2, which is not a multiple of the
    form of L; the recorded scalar (l,l)/rank is its trace share, so balanced
    products (see ``block_index``) come out with the right index.
    """
    r = tuple(F(v) for v in r)
    s = theta_series(kind, r, prec, L.dim, L.d_L)
    return JacobiForm(s, F(1, 2), L.norm(r) / L.rank, L, 3 if kind == 1 else 0)


def block_index(L: LatticeModel, lines: Sequence[Tuple[Sequence, int]]) -> Fraction:
    """t with sum m r r^T = t S, i.e. the product of thetas is of scalar index t."""
    n = L.dim
    acc = [[F(0)] * n for _ in range(n)]
    for r, m in lines:
        for i in range(n):
            for j in range(n):
                acc[i][j] += m * F(r[i]) * F(r[j])
    amb = L.ambient
    t = None
    for i in range(n):
        for j in range(n):
            if amb[i][j]:
                c = acc[i][j] / amb[i][j] / L.scale
                if t is None:
                    t = c
                elif c != t:
                    raise JacobiError("theta product is not of scalar index")
            elif acc[i][j]:
                raise JacobiError("theta product is not of scalar index")
    return t


def theta_block(L: LatticeModel, eta_exp: int, lines: Sequence[Tuple[Sequence, int]], prec) -> JacobiForm:
    """eta^eta_exp * prod (vartheta(tau, (l, z)) / eta)^mult.

    Negative multiplicities divide exactly; the result's q-valuation is
    (eta_exp + 2 * sum mult) / 24.
    """
    margin = F(abs(eta_exp) + 3 * sum(abs(m) for _, m in lines) + 24, 24)
    work = F(prec) + margin
    eta_total = eta_exp - sum(m for _, m in lines)
    num = JacobiForm(S.constant(1, L.dim, L.d_L), 0, 0, L, 0)
    dens = []
    for r, m in lines:
        t = theta_at(L, r, work)
        if m > 0:
            for _ in range(m):
                num = num * t
        elif m < 0:
            dens.append((t, -m))
    if eta_total:
        num = num.times(eta_power(eta_total, work), F(eta_total, 2), eta_total)
    out = num
    for t, m in dens:
        for _ in range(m):
            s = S.divide(out.series, t.series)
            out = JacobiForm(s, out.weight - t.weight, out.index - t.index, L, out.D - t.D)
    out = replace(out.truncate(prec), index=block_index(L, lines))
    if not out.series.is_known(prec):
        raise JacobiError("theta block precision shortfall")
    return out


# -- generator registry with memo ------------------------------------------------------

_memo: Dict[str, JacobiForm] = {}
_memo_lock = threading.RLock()
_builders: Dict[str, Callable[[Fraction], JacobiForm]] = {}


def _register(name: str):
    def deco(fn):
        _builders[name] = fn
        return fn
    return deco


def form(name: str, prec) -> JacobiForm:
    """Named form truncated to q^prec; reuses any cached higher-precision copy."""
    prec = F(prec)
    with _memo_lock:
        hit = _memo.get(name)
        if hit is not None and hit.series.is_known(prec):
            return hit.truncate(prec)
    if name not in _builders:
        raise KeyError(name)
    built = _builders[name](prec)
    if not built.series.is_known(prec):
        raise JacobiError(f"{name}: construction did not reach q^{prec}")
    built = built.truncate(prec).named(name)
    with _memo_lock:
        old = _memo.get(name)
        if old is None or not old.series.is_known(prec):
            _memo[name] = built
    return built


def known_forms() -> List[str]:
    return sorted(_builders)


def clear_memo() -> None:
    with _memo_lock:
        _memo.clear()


def _on(L: LatticeModel, s: MultiSeries) -> MultiSeries:
    return s.with_denominators(math.lcm(s.dz, L.d_L), 1) if s.dz != L.d_L else s


# -- A1 ---------------------------------------------------------------------------

A1 = get_lattice("A1")


@_register("phi_-1_1/2")
def _phi_m1_half(prec):
    th = theta(prec + 1)
    return th.times(eta_power(-3, prec + 1), F(-3, 2), -3).truncate(prec)


@_register("phi_-2_1")
def _phi_m2_1(prec):
    f = form("phi_-1_1/2", prec)
    return f * f


def _weierstrass_part(prec) -> MultiSeries:
    """1/12 + sum_{n>=1} sum_{d|n} d (zeta^d - 2 + zeta^-d) q^n."""
    terms = [(0, (0,), 0, F(1, 12))]
    for n in range(1, math.floor(prec) + 1):
        for d in sympy.divisors(n):
            terms += [(n, (d,), 0, d), (n, (-d,), 0, d), (n, (0,), 0, -2 * d)]
    return S.from_terms(1, terms, A1.d_L, 1, q_order=prec)


@_register("phi_0_1")
def _phi_0_1(prec):
    # 12 * wp(tau, z) * phi_{-2,1} / (2 pi i)^2, written without the pole:
    # wp * phi_{-2,1} = W * phi_{-2,1} + phi_{-2,1} / (zeta - 2 + zeta^-1)
    m21 = form("phi_-2_1", prec)
    w = _weierstrass_part(prec)
    pole = S.from_terms(1, [(0, (1,), 0, 1), (0, (0,), 0, -2), (0, (-1,), 0, 1)], A1.d_L)
    quot = S.divide(m21.series, pole)
    s = S.add(S.mul(w, m21.series), quot).scale(12)
    return JacobiForm(s, 0, 1, A1, 0)


def _embed_a1(f: JacobiForm, L: LatticeModel, r: Sequence[int]) -> JacobiForm:
    """phi(tau, (l, z)) for an A1 form phi, where zeta^1 on A1 becomes zeta^r."""
    r = [F(v) for v in r]
    s = f.series
    fz = F(1, s.dz)
    dz = L.d_L

    def fn(rn):
        v = [rn[0] * fz * x * dz for x in r]
        if any(x.denominator != 1 for x in v):
            raise JacobiError("embedding leaves the exponent grid")
        return tuple(int(x) for x in v)

    out = s.map_zeta(fn, nz=L.dim, dz=dz)
    # trace share of the rank-one index, as in ``theta_at``
    return JacobiForm(out, f.weight, f.index * L.norm(r) / A1.norm((1,)) / L.rank, L, f.D)


# -- weak-form monomial spaces ------------------------------------------------------

GENERATORS: Dict[str, List[Tuple[str, int, int]]] = {
    "A1": [("phi_0_1", 0, 1), ("phi_-2_1", -2, 1)],
    "2A1": [("phi_0_2A1", 0, 1), ("phi_-2_2A1", -2, 1), ("phi_-4_2A1", -4, 1)],
    "A2": [("phi_0_A2", 0, 1), ("phi_-2_A2", -2, 1), ("phi_-3_A2", -3, 1)],
    "A3": [("phi_0_A3", 0, 1), ("phi_-2_A3", -2, 1), ("phi_-3_A3", -3, 1), ("phi_-4_A3", -4, 1)],
    "D4": [("phi_0_D4", 0, 1), ("phi_-2_D4", -2, 1), ("phi_-4_D4", -4, 1), ("psi_-4_D4", -4, 1),
           ("phi_-6_D4_2", -6, 2)],
}

LATTICE_OF = {"A1": "A1", "2A1": "2A1", "A2": "A2", "A3": "A3", "D4": "D4"}


def _modular_pairs(w: int) -> List[Tuple[int, int]]:
    if w < 0:
        return []
    return [(a, (w - 4 * a) // 6) for a in range(w // 4 + 1) if (w - 4 * a) % 6 == 0]


def monomials(lattice_id: str, weight: int, index: int, exclude: Sequence[str] = ()):
    """(a, b, exps): E4^a E6^b prod g_i^exps_i of the given weight and index."""
    if lattice_id not in GENERATORS:
        raise JacobiError(f"unknown lattice id {lattice_id!r}")
    gens = GENERATORS[lattice_id]
    if index < 0:
        return []
    out = []

    def rec(i, left, exps):
        if i == len(gens):
            if left == 0:
                wmod = weight - sum(e * g[1] for e, g in zip(exps, gens))
                for a, b in _modular_pairs(wmod):
                    out.append((a, b, tuple(exps)))
            return
        name, _, t = gens[i]
        top = left // t
        if name in exclude:
            top = 0
        for e in range(top + 1):
            rec(i + 1, left - e * t, exps + [e])

    rec(0, index, [])
    return out


def dim_weak(lattice_id: str, weight: int, index: int) -> int:
    """Number of generator monomials of the given weight and index."""
    return len(monomials(lattice_id, weight, index))


def monomial_form(lattice_id: str, mono, prec) -> JacobiForm:
    a, b, exps = mono
    gens = GENERATORS[lattice_id]
    L = get_lattice(LATTICE_OF[lattice_id])
    out = JacobiForm(S.constant(1, L.dim, L.d_L), 0, 0, L, 0)
    for (name, _, _), e in zip(gens, exps):
        if e:
            out = out * form(name, prec) ** e
    if a:
        out = out.times(S.power(eisenstein(4, prec), a), 4 * a)
    if b:
        out = out.times(S.power(eisenstein(6, prec), b), 6 * b)
    return out


def _key(z) -> Tuple[Fraction, ...]:
    return tuple(F(v) for v in z)


def solve_q0(lattice_id: str, weight: int, index: int, target: Dict[Tuple, object], prec,
             exclude: Sequence[str] = (), name: str = "") -> JacobiForm:
    """The unique weak form of (weight, index) whose q^0 term is ``target``."""
    monos = monomials(lattice_id, weight, index, exclude)
    if not monos:
        raise JacobiError("no monomials of this weight and index")
    cols = []
    for m in monos:
        f0 = monomial_form(lattice_id, m, 0)
        cols.append({_key(z): S.frac(c) for z, c in f0.q_term(0).items()})
    tgt = {_key(z): S.frac(c) for z, c in target.items()}
    try:
        coeffs = solve_unique(cols, tgt)
    except SolveError as exc:
        raise JacobiError(f"q0 solve failed for {lattice_id} k={weight} t={index}: {exc}") from exc
    forms = [monomial_form(lattice_id, m, prec) for m, c in zip(monos, coeffs) if c]
    used = [c for c in coeffs if c]
    return lincomb(used, forms, name)


def target_from(spec: Dict[Tuple, int]) -> Dict[Tuple[Fraction, ...], Fraction]:
    return {_key(k): F(v) for k, v in spec.items()}


def orbit_sum(vectors, coeff=1) -> Dict[Tuple[Fraction, ...], Fraction]:
    out: Dict[Tuple[Fraction, ...], Fraction] = {}
    for v in vectors:
        k = _key(v)
        out[k] = out.get(k, 0) + F(coeff)
    return out


def combine(*parts) -> Dict[Tuple[Fraction, ...], Fraction]:
    out: Dict[Tuple[Fraction, ...], Fraction] = {}
    for c, d in parts:
        for k, v in d.items():
            out[k] = out.get(k, 0) + S.frac(c) * v
    return {k: v for k, v in out.items() if v}


def const_term(nz: int, c) -> Dict[Tuple[Fraction, ...], Fraction]:
    return {(F(0),) * nz: S.frac(c)}


def sign_orbit(base: Sequence, nz: int, permute: bool = True):
    """All vectors obtained from ``base`` by coordinate permutations and sign changes."""
    from itertools import permutations
    seen = set()
    perms = set(permutations(base)) if permute else {tuple(base)}
    for p in perms:
        for signs in iproduct((1, -1), repeat=nz):
            v = tuple(F(s) * F(x) for s, x in zip(signs, p))
            seen.add(v)
    return sorted(seen)


def half_spinor(nz: int, parity: int):
    """[1/2,...,1/2]_parity: sign patterns with an even (0) or odd (1) number of minus signs."""
    out = []
    for signs in iproduct((1, -1), repeat=nz):
        if sum(s < 0 for s in signs) % 2 == parity:
            out.append(tuple(F(s, 2) for s in signs))
    return out


# -- A1 index 2..4 -----------------------------------------------------------------------

def _a1_target(c1, c0, c2=0):
    t = {(F(1),): F(c1), (F(-1),): F(c1), (F(0),): F(c0)}
    if c2:
        t[(F(2),)] = F(c2)
        t[(F(-2),)] = F(c2)
    return t


for _m, _c in ((2, 4), (3, 2), (4, 1)):
    def _mk(m=_m, c=_c):
        @_register(f"phi_0_{m}")
        def _b(prec):
            return solve_q0("A1", 0, m, _a1_target(1, c), prec)
    _mk()


@_register("phi1_0_2")
def _phi1_0_2(prec):
    return form("phi_0_1", prec) ** 2 - form("phi_0_2", prec) * 20


@_register("phi1_0_3")
def _phi1_0_3(prec):
    return form("phi_0_1", prec) * form("phi_0_2", prec) - form("phi_0_3", prec) * 14


@_register("phi1_0_4")
def _phi1_0_4(prec):
    return form("phi_0_1", prec) * form("phi_0_3", prec) - form("phi_0_4", prec) * 12


# -- 2A1 -------------------------------------------------------------------------------

L2A1 = get_lattice("2A1")


def _on_2a1(name: str, coord: int, prec) -> JacobiForm:
    r = [0, 0]
    r[coord] = 1
    return _embed_a1(form(name, prec), L2A1, r)


@_register("phi_0_2A1")
def _phi_0_2a1(prec):
    a = _on_2a1("phi_0_1", 0, prec) * _on_2a1("phi_0_1", 1, prec)
    b = (_on_2a1("phi_-2_1", 0, prec) * _on_2a1("phi_-2_1", 1, prec)).times(eisenstein(4, prec), 4)
    return (a - b) * F(1, 12)


@_register("phi_-2_2A1")
def _phi_m2_2a1(prec):
    a = _on_2a1("phi_0_1", 0, prec) * _on_2a1("phi_-2_1", 1, prec)
    b = _on_2a1("phi_-2_1", 0, prec) * _on_2a1("phi_0_1", 1, prec)
    return (a + b) * F(1, 2)


@_register("phi_-4_2A1")
def _phi_m4_2a1(prec):
    return _on_2a1("phi_-2_1", 0, prec) * _on_2a1("phi_-2_1", 1, prec)


def _zz(a, b):
    return (F(a), F(b))


@_register("phi_0_2A1(2)")
def _phi_0_2a1_2(prec):
    t = orbit_sum([_zz(1, 0), _zz(-1, 0), _zz(0, 1), _zz(0, -1)])
    t[_zz(0, 0)] = F(2)
    return solve_q0("2A1", 0, 2, t, prec)


@_register("phi1_0_2A1(2)")
def _phi1_0_2a1_2(prec):
    t = orbit_sum([_zz(2, 0), _zz(-2, 0), _zz(0, 2), _zz(0, -2)])
    t[_zz(0, 0)] = F(20)
    return solve_q0("2A1", 0, 2, t, prec)


@_register("phi2_0_2A1(2)")
def _phi2_0_2a1_2(prec):
    t = orbit_sum([_zz(1, 1), _zz(-1, -1), _zz(1, -1), _zz(-1, 1)])
    t[_zz(0, 0)] = F(8)
    return solve_q0("2A1", 0, 2, t, prec)


# -- D4 --------------------------------------------------------------------------------

LD4 = get_lattice("D4")
LD3 = get_lattice("D3")
LA2 = get_lattice("A2")

# Triality: g swaps the vector class with the even half-spin class; conjugating by
# the reflection in the last coordinate gives the element swapping vector and odd.
TRIALITY_G = tuple(tuple(F(x, 2) for x in row) for row in
                   ((1, 1, 1, 1), (1, 1, -1, -1), (1, -1, 1, -1), (1, -1, -1, 1)))
_DLAST = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, -1))


def _matmul(a, b):
    return tuple(tuple(sum(F(a[i][k]) * F(b[k][j]) for k in range(len(b))) for j in range(len(b[0])))
                 for i in range(len(a)))


TRIALITY_G2 = _matmul(_matmul(_DLAST, TRIALITY_G), _DLAST)


def _d4_theta_ratio_product(kind: int, prec) -> MultiSeries:
    """prod_j vartheta_kind(z_j) / vartheta_kind(0) on D4."""
    work = F(prec) + 1
    inv0 = S.invert(theta_constant(kind, work))
    out = None
    for j in range(4):
        r = [0, 0, 0, 0]
        r[j] = 1
        t = theta_series(kind, r, work, 4, LD4.d_L)
        t = S.mul(t, as_arity(inv0, 4, LD4.d_L))
        out = t if out is None else S.mul(out, t)
    return out.truncate(q_order=prec)


@_register("S_D4")
def _s_d4(prec):
    s = S.sum_series(_d4_theta_ratio_product(k, prec) for k in (2, 3, 4))
    return JacobiForm(s, 0, 1, LD4, 0)


@_register("phi_0_D4")
def _phi_0_d4(prec):
    s = form("S_D4", prec)
    return (s.linear_image(TRIALITY_G) + s.linear_image(TRIALITY_G2) - s) * 8


def _unit_lines(n: int):
    return [(tuple(int(i == j) for i in range(n)), 1) for j in range(n)]


@_register("psi_-4_D4")
def _psi_m4_d4(prec):
    return theta_block(LD4, -8, _unit_lines(4), prec)


@_register("phi_-4_D4")
def _phi_m4_d4(prec):
    p = form("psi_-4_D4", prec)
    return p.linear_image(TRIALITY_G2) - p.linear_image(TRIALITY_G)


def heat(f: JacobiForm) -> JacobiForm:
    """q d/dq - Laplacian/(8 pi^2 t): multiplies q^n zeta^l by n - (l,l)/(2t)."""
    L = f.lattice
    dz = f.series.dz
    t = f.index

    def fn(qn, zn, xn, c):
        n = F(qn, QDEN)
        r = [F(v, dz) for v in zn]
        return c * S.to_mpq(n - L.norm(r) / (2 * t))

    return replace(f, series=f.series.map_coeffs(fn), weight=f.weight + 2, name="")


@_register("phi_-2_D4")
def _phi_m2_d4(prec):
    # H phi_0 + E2 phi_0 / 6 = -(1/9) E4 phi_-2 + (1/9) E6 phi_-4 on the q^0 level;
    # the left side is a weight-2 weak form, so this identity holds exactly.
    p0 = form("phi_0_D4", prec)
    p4 = form("phi_-4_D4", prec)
    lhs = heat(p0) + p0.times(eisenstein(2, prec), 2) * F(1, 6)
    rest = lhs - p4.times(eisenstein(6, prec), 6) * F(1, 9)
    e4inv = S.invert(eisenstein(4, prec))
    out = rest.times(e4inv, -4) * -9
    return out


def _restrict_d3(name: str, prec, c=1) -> JacobiForm:
    f = form(name, prec)
    g = f.pullback(LD3, [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]])
    return g * c if c != 1 else g


@_register("phi_0_A3")
def _phi_0_a3(prec):
    return _restrict_d3("phi_0_D4", prec)


@_register("phi_-2_A3")
def _phi_m2_a3(prec):
    return _restrict_d3("phi_-2_D4", prec)


@_register("phi_-4_A3")
def _phi_m4_a3(prec):
    return _restrict_d3("phi_-4_D4", prec, F(1, 2))


@_register("phi_-3_A3")
def _phi_m3_a3(prec):
    return theta_block(LD3, -6, _unit_lines(3), prec)


# A2 sits in D4 via b1 -> e1 - e2, b2 -> e2 - e3.
IOTA_A2 = ((1, 0), (-1, 1), (0, -1), (0, 0))


@_register("phi_0_A2")
def _phi_0_a2(prec):
    return form("phi_0_D4", prec).pullback(LA2, IOTA_A2)


@_register("phi_-2_A2")
def _phi_m2_a2(prec):
    return form("phi_-2_D4", prec).pullback(LA2, IOTA_A2) * F(1, 3)


@_register("phi_-3_A2")
def _phi_m3_a2(prec):
    return theta_block(LA2, -6, [((1, 0), 1), ((0, 1), 1), ((1, -1), 1)], prec) * -1


def index_raise(f: JacobiForm, l: int) -> JacobiForm:
    """V_l: c(n, r) = sum over a | (n, r, l) of a^(k-1) f(n l / a^2, r / a); index becomes l t.

    Integral weight, trivial character; "a | r" means r / a lies in L^v.
    """
    if f.weight.denominator != 1 or f.D or f.nu:
        raise JacobiError("index_raise needs integral weight and trivial character")
    k = int(f.weight)
    s = f.series
    L = f.lattice
    P = f.prec
    top = INF if P == INF else P / l
    if top == INF:
        raise JacobiError("index_raise needs a truncated input")
    divs = sympy.divisors(l)
    out: Dict[Tuple, Fraction] = {}
    for n, r, _ in f.terms():
        # every source term (n, r) feeds the targets (n a^2 / l, a r)
        for a in divs:
            tn = n * a * a / l
            if tn.denominator != 1 or tn > top or tn % a:
                continue
            tr = tuple(a * v for v in r)
            key = (tn, tr)
            out[key] = out.get(key, 0) + F(a) ** (k - 1) * S.frac(f.coeff(n, r))
    terms = [(n, r, 0, c) for (n, r), c in out.items() if c]
    res = S.from_terms(L.dim, terms, s.dz, 1, q_order=F(math.floor(top * QDEN), QDEN))
    return JacobiForm(res, f.weight, f.index * l, L, 0)


def _s3_images(f: JacobiForm) -> List[JacobiForm]:
    g, g2 = TRIALITY_G, TRIALITY_G2
    mats = [g, g2, _matmul(g, g2), _matmul(g2, g)]
    flip = ((-1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))
    return [f.linear_image(m) for m in mats] + [f.linear_image(flip)]


@_register("phi_-6_D4_2")
def _phi_m6_d4_2(prec):
    # Delta * phi_{-6} is a weight 6 index 2 form vanishing at q^0; the products of
    # index-one generators alone do not reach it, the V_2 images do.
    from .linalg import nullspace
    window = 1
    while True:
        P = F(prec) + 1
        work = max(P, F(window))
        prods = [monomial_form("D4", m, work)
                 for m in monomials("D4", 6, 2, exclude=("phi_-6_D4_2",))]
        raised = [index_raise(monomial_form("D4", m, 2 * work), 2)
                  for m in monomials("D4", 6, 1)]
        cands = prods + raised
        full = [{(q, z): S.frac(c) for q, z, c in f.terms()} for f in cands]
        cands = [cands[i] for i in independent_subset(full)]
        cols = []
        for f in cands:
            col: Dict[Tuple, Fraction] = {}
            for z, c in f.q_term(0).items():
                col[("q0", z)] = S.frac(c)
            low = f.truncate(window)
            for i, img in enumerate(_s3_images(low)):
                diff = low - img
                for q, z, c in diff.terms():
                    col[("inv", i, q, z)] = S.frac(c)
            cols.append(col)
        ns = nullspace(cols)
        if len(ns) == 1:
            break
        if not ns or window >= 4:
            raise JacobiError(f"phi_-6 solve: kernel dimension {len(ns)} at window {window}")
        window += 1
    vec = ns[0]
    comb = lincomb([c for c in vec if c], [f for f, c in zip(cands, vec) if c])
    dinv = S.invert(delta(P + 1))
    out = comb.times(dinv, -12)
    out = replace(out, weight=F(-6))
    # scale: coefficient 1 on the norm-3 orbit, which makes the q^0 term primitive integral
    lead = out.coeff(0, (F(3, 2), F(1, 2), F(1, 2), F(1, 2)))
    if lead == 0:
        raise JacobiError("phi_-6 normalization coefficient vanishes")
    return out * (1 / F(lead))


# -- index-2 and index-3 forms on A2, A3, D4 by their q^0 terms --------------------------

def P1():
    return orbit_sum([(-1, 0), (1, -1), (0, 1)])


def P2():
    return orbit_sum([(0, -1), (-1, 1), (1, 0)])


def Q_A2():
    return orbit_sum([(1, 1), (-1, -1), (2, -1), (-2, 1), (1, -2), (-1, 2)])


@_register("phi_0_A2(2)")
def _phi_0_a2_2(prec):
    return solve_q0("A2", 0, 2, combine((1, P1()), (1, P2()), (1, const_term(2, 6))), prec)


@_register("phi1_0_A2(2)")
def _phi1_0_a2_2(prec):
    return solve_q0("A2", 0, 2, combine((1, Q_A2()), (1, const_term(2, 30))), prec)


@_register("phi_0_A2(3)")
def _phi_0_a2_3(prec):
    return solve_q0("A2", 0, 3, combine((1, P1()), (1, P2()), (1, const_term(2, 2))), prec)


@_register("phi1_0_A2(3)")
def _phi1_0_a2_3(prec):
    return solve_q0("A2", 0, 3, combine((1, Q_A2()), (1, const_term(2, 18))), prec)


def V(nz: int):
    """[1,0,...,0]: the 2*nz vectors +-e_i."""
    return orbit_sum(sign_orbit([1] + [0] * (nz - 1), nz))


def VV(nz: int):
    """sum_{i<j} zeta_i^+-1 zeta_j^+-1."""
    return orbit_sum(sign_orbit([1, 1] + [0] * (nz - 2), nz))


@_register("phi_0_A3(2)")
def _phi_0_a3_2(prec):
    return solve_q0("A3", 0, 2, combine((1, V(3)), (1, const_term(3, 6))), prec)


@_register("phi1_0_A3(2)")
def _phi1_0_a3_2(prec):
    return solve_q0("A3", 0, 2, combine((1, VV(3)), (1, const_term(3, 36))), prec)


@_register("phi_0_D4(2)")
def _phi_0_d4_2(prec):
    return solve_q0("D4", 0, 2, combine((1, V(4)), (1, const_term(4, 4))), prec,
                    exclude=("phi_-6_D4_2",))


@_register("varphi_0_D4(2)")
def _varphi_0_d4_2(prec):
    f = form("phi_0_D4(2)", prec)
    return f + f.linear_image(TRIALITY_G) + f.linear_image(TRIALITY_G2)


@_register("phi1_0_D4(2)")
def _phi1_0_d4_2(prec):
    return solve_q0("D4", 0, 2, combine((1, VV(4)), (1, const_term(4, 48))), prec)


# -- Jacobi Eisenstein series --------------------------------------------------------------

def jacobi_eisenstein(lattice_id: str, k: int, index: int, prec, window: int = 2,
                      strict: bool = True) -> JacobiForm:
    """Holomorphic, even, f(0,0)=1, vanishing at the non-trivial isotropic classes.

    Solved inside the weak-form monomial space of weight k.  With ``strict`` a
    non-unique solution is an error; otherwise the particular solution with
    free unknowns set to zero is returned (it differs from the Eisenstein
    series by a cusp form).
    """
    monos = monomials(lattice_id, k, index)
    L = get_lattice(LATTICE_OF[lattice_id])
    Lt = rescale(L, index)
    cand = [monomial_form(lattice_id, m, window) for m in monos]
    rows: Dict[Tuple, Dict[int, Fraction]] = {}
    rhs: Dict[Tuple, Fraction] = {}
    keys = set()
    for f in cand:
        for q, z, _ in f.terms():
            keys.add((q, z))
    for (q, z) in keys:
        hn = 2 * q - L.norm(z) / index
        if hn < 0 or (hn == 0 and not Lt.in_lattice(z)):
            rows[("sing", q, z)] = {}
            rhs[("sing", q, z)] = F(0)
        if z != tuple(-v for v in z):
            rows[("even", q, z)] = {}
            rhs[("even", q, z)] = F(0)
    zero = (F(0),) * L.dim
    rows[("norm",)] = {}
    rhs[("norm",)] = F(1)
    cols = []
    for f in cand:
        col = {}
        for key in rows:
            if key[0] == "sing":
                col[key] = S.frac(f.coeff(key[1], key[2]))
            elif key[0] == "even":
                z = key[2]
                col[key] = S.frac(f.coeff(key[1], z)) - S.frac(f.coeff(key[1], tuple(-v for v in z)))
            else:
                col[key] = S.frac(f.coeff(0, zero))
        cols.append(col)
    try:
        coeffs = solve_unique(cols, rhs) if strict else solve_particular(cols, rhs)
    except SolveError as exc:
        raise JacobiError(f"Jacobi Eisenstein series E_{k} on {lattice_id}({index}): {exc}") from exc
    forms = [monomial_form(lattice_id, m, prec) for m, c in zip(monos, coeffs) if c]
    return lincomb([c for c in coeffs if c], forms, f"E_{k}_{lattice_id}({index})")


def _register_eis():
    for lid, idx in (("A1", 2), ("A1", 3), ("A1", 4), ("2A1", 2), ("A2", 2), ("A2", 3), ("A3", 2),
                     ("D4", 2)):
        for k in (4, 6):
            def mk(lid=lid, idx=idx, k=k):
                @_register(f"E_{k}_{lid}({idx})")
                def _b(prec):
                    # where cusp forms make the solution non-unique any representative
                    # serves as a generator: the difference lies in the subalgebra
                    # generated by the others
                    try:
                        return jacobi_eisenstein(lid, k, idx, prec)
                    except JacobiError:
                        return jacobi_eisenstein(lid, k, idx, prec, strict=False)
            mk()


_register_eis()


# -- theta-block numerators used by the Hecke quotients ---------------------------------------

@_register("theta_2A1")
def _theta_2a1(prec):
    return theta_block(L2A1, 2, [((1, 0), 1), ((0, 1), 1)], prec)  # index 1/2


@_register("eta3_theta3_A2")
def _eta3_theta3_a2(prec):
    return theta_block(LA2, 6, [((1, 0), 1), ((1, -1), 1), ((0, 1), 1)], prec)


@_register("eta-1_theta3_A2")
def _etam1_theta3_a2(prec):
    return theta_block(LA2, 2, [((1, 0), 1), ((1, -1), 1), ((0, 1), 1)], prec)


@_register("Theta_A2(3)")
def _big_theta_a2_3(prec):
    # z1 + z2, 2 z2 - z1, 2 z1 - z2 in basis coordinates of A2
    return theta_block(LA2, 18, [((1, 1), 1), ((-1, 2), 1), ((2, -1), 1)], prec)


@_register("eta3_theta3_A3")
def _eta3_theta3_a3(prec):
    return theta_block(LD3, 6, [((1, 0, 0), 1), ((0, 1, 0), 1), ((0, 0, 1), 1)], prec)


@_register("theta4_D4")
def _theta4_d4(prec):
    return theta_block(LD4, 4, [((1, 0, 0, 0), 1), ((0, 1, 0, 0), 1), ((0, 0, 1, 0), 1),
                                ((0, 0, 0, 1), 1)], prec)


@_register("eta12_phi_0_1")
def _eta12_phi01(prec):
    return form("phi_0_1", prec).times(eta_power(12, prec), 6, 12)


@_register("eta8_phi_0_1")
def _eta8_phi01(prec):
    return form("phi_0_1", prec).times(eta_power(8, prec), 4, 8)


@_register("eta6_phi_0_1")
def _eta6_phi01(prec):
    return form("phi_0_1", prec).times(eta_power(6, prec), 3, 6)


@_register("eta6_phi_-1_1/2")
def _eta6_phim1(prec):
    return form("phi_-1_1/2", prec + 1).times(eta_power(6, prec + 1), 3, 6).truncate(prec)


@_register("eta4_phi_-1_1/2")
def _eta4_phim1(prec):
    return form("phi_-1_1/2", prec + 1).times(eta_power(4, prec + 1), 2, 4).truncate(prec)


@_register("eta3_phi_-1_1/2")
def _eta3_phim1(prec):
    return form("phi_-1_1/2", prec + 1).times(eta_power(3, prec + 1), F(3, 2), 3).truncate(prec)


@_register("theta")
def _theta(prec):
    return theta(prec)


# -- elliptic transformation check ---------------------------------------------------------

def elliptic_check(f: JacobiForm, x: Sequence[int], y: Sequence[int]) -> bool:
    """phi(tau, z + x tau + y) = chi * q^(-t(x,x)/2) zeta^(-t x) phi(tau, z) on the known window.

    ``x`` and ``y`` are lattice vectors in basis coordinates.  Coefficientwise
    this reads f(N - (l,x), l) e((l,y)) = chi f(N + t(x,x)/2, l + t x).
    """
    L = f.lattice
    t = f.index
    xa = [sum(F(x[i]) * L.basis[i][j] for i in range(L.rank)) for j in range(L.dim)]
    ya = [sum(F(y[i]) * L.basis[i][j] for i in range(L.rank)) for j in range(L.dim)]
    amb = L.ambient
    tx_r = tuple(t * sum(amb[j][k] * xa[k] for k in range(L.dim)) for j in range(L.dim))
    xx = sum(xa[i] * amb[i][j] * xa[j] for i in range(L.dim) for j in range(L.dim))
    yy = sum(ya[i] * amb[i][j] * ya[j] for i in range(L.dim) for j in range(L.dim))
    xy = sum(xa[i] * amb[i][j] * ya[j] for i in range(L.dim) for j in range(L.dim))
    chi = (-1) ** int(xx / 2 + yy / 2 + xy) if f.nu else 1
    P = f.prec
    if P == INF:
        raise JacobiError("elliptic_check needs a truncated expansion")
    lhs: Dict[Tuple, Fraction] = {}
    rhs: Dict[Tuple, Fraction] = {}
    for n, r, c in f.terms():
        lx = sum(r[j] * xa[j] for j in range(L.dim))
        ly = sum(r[j] * ya[j] for j in range(L.dim))
        if (2 * ly).denominator != 1:
            raise JacobiError("exponent pairs non-half-integrally with y")
        sign = 1 if ly.denominator == 1 else -1  # e((l,y)) with (l,y) in 1/2 Z
        lhs[(n + lx, r)] = S.frac(c) * sign
        rhs[(n - xx * t / 2, tuple(a - b for a, b in zip(r, tx_r)))] = S.frac(c) * chi
    compared = 0
    for key in set(lhs) | set(rhs):
        N, lam = key
        lx = sum(lam[j] * xa[j] for j in range(L.dim))
        src_l = N - lx
        src_r = N + xx * t / 2
        if src_l > P or src_r > P:
            continue
        compared += 1
        if lhs.get(key, 0) != rhs.get(key, 0):
            return False
    if compared == 0 and any(True for _ in f.terms()):
        raise JacobiError("no overlap between the shifted windows; raise the precision")
    return True
