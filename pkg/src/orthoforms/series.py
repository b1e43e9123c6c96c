"""Exact sparse Fourier-Laurent series in q, zeta_1..zeta_l and xi.

Exponents are integer numerators over fixed denominators: 24 for q, a
per-series ``dz`` for the zeta coordinates and ``dx`` for xi.  Terms are grouped
into cells keyed by ``(q_num, xi_num)``; each cell is a Laurent polynomial in
zeta whose exponent vectors are packed into one Python int, so multiplying two
monomials is a single integer addition.

Truncation is tracked per xi-level: ``qb[j]`` is the largest q numerator known
exactly at xi numerator ``j``.  Levels past the end of ``qb`` reuse ``qb[-1]``
when ``xi_order`` is finite.  When ``xi_order`` is infinite they are known to be
exactly zero, which is how xi-free (Jacobi) series are represented.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

from gmpy2 import mpq

INF = math.inf
QDEN = 24

_SHIFT = 40
_BASE = 1 << _SHIFT
_HALF = _BASE >> 1

Cell = Dict[int, mpq]


class SeriesError(ValueError):
    pass


def pack(coords: Sequence[int]) -> int:
    key = 0
    for c in reversed(coords):
        key = key * _BASE + c
    return key


def unpack(key: int, n: int) -> Tuple[int, ...]:
    out = []
    for _ in range(n):
        d = key % _BASE
        if d >= _HALF:
            d -= _BASE
        out.append(d)
        key = (key - d) >> _SHIFT
    return tuple(out)


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return Fraction(int(x.numerator), int(x.denominator))
    return Fraction(x)


def to_mpq(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def num_over(x, den: int, what: str = "exponent") -> int:
    f = frac(x) * den
    if f.denominator != 1:
        raise SeriesError(f"{what} {frac(x)} is not a multiple of 1/{den}")
    return int(f)


class MultiSeries:
    """Immutable truncated series.  Use the constructors below."""

    __slots__ = ("nz", "dz", "dx", "cells", "xi_order", "qb")

    def __init__(self, nz: int, dz: int, dx: int, cells: Dict[Tuple[int, int], Cell],
                 xi_order=INF, qb: Sequence = (INF,), _trusted: bool = False):
        self.nz = nz
        self.dz = dz
        self.dx = dx
        self.xi_order = xi_order
        self.qb = tuple(qb) or (INF,)
        if _trusted:
            self.cells = cells
            return
        clean: Dict[Tuple[int, int], Cell] = {}
        for (q, x), cell in cells.items():
            if x < 0:
                raise SeriesError("negative xi exponent")
            if x > xi_order or q > self.qbound(x):
                continue
            c = {k: to_mpq(frac(v)) for k, v in cell.items() if v != 0}
            if c:
                clean[(q, x)] = c
        self.cells = clean

    # -- truncation -------------------------------------------------------
    def qbound(self, x: int):
        if x > self.xi_order:
            return -INF
        if x < len(self.qb):
            return self.qb[x]
        return INF if self.xi_order == INF else self.qb[-1]

    def level_span(self) -> int:
        top = max((x for (_, x) in self.cells), default=0)
        return max(top, len(self.qb) - 1)

    def profile(self, top: int) -> List:
        return [self.qbound(x) for x in range(top + 1)]

    @property
    def q_order(self):
        """Smallest q bound over the guaranteed levels, as an exponent."""
        top = int(self.xi_order) if self.xi_order != INF else len(self.qb) - 1
        b = min(self.qbound(x) for x in range(top + 1))
        return b if b in (INF, -INF) else Fraction(b, QDEN)

    @property
    def xi_order_exp(self):
        return self.xi_order if self.xi_order == INF else Fraction(self.xi_order, self.dx)

    def level_valuation(self, x: int):
        qs = [q for (q, xx) in self.cells if xx == x]
        if qs:
            return min(qs)
        return self.qbound(x) + 1

    # -- queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.cells

    def __len__(self) -> int:
        return sum(len(c) for c in self.cells.values())

    def __bool__(self) -> bool:
        return bool(self.cells)

    def terms(self) -> Iterator[Tuple[Fraction, Tuple[Fraction, ...], Fraction, mpq]]:
        for (q, x), cell in self.cells.items():
            for k, c in cell.items():
                z = tuple(Fraction(v, self.dz) for v in unpack(k, self.nz))
                yield Fraction(q, QDEN), z, Fraction(x, self.dx), c

    def raw_terms(self) -> Iterator[Tuple[int, Tuple[int, ...], int, mpq]]:
        for (q, x), cell in self.cells.items():
            for k, c in cell.items():
                yield q, unpack(k, self.nz), x, c

    def coeff(self, q, zeta: Sequence = (), xi=0) -> mpq:
        try:
            qn = num_over(q, QDEN)
            xn = num_over(xi, self.dx)
            zn = [num_over(v, self.dz) for v in zeta] if zeta else [0] * self.nz
        except SeriesError:
            return mpq(0)
        return self.cells.get((qn, xn), {}).get(pack(zn), mpq(0))

    def is_known(self, q, xi=0) -> bool:
        qn = num_over(q, QDEN, "q exponent")
        xn = num_over(xi, self.dx, "xi exponent")
        return xn <= self.xi_order and qn <= self.qbound(xn)

    def q_valuation(self):
        if not self.cells:
            return None
        return Fraction(min(q for (q, _) in self.cells), QDEN)

    def xi_valuation(self):
        if not self.cells:
            return None
        return Fraction(min(x for (_, x) in self.cells), self.dx)

    def cell(self, q, xi=0) -> Dict[Tuple[Fraction, ...], mpq]:
        qn = num_over(q, QDEN, "q exponent")
        xn = num_over(xi, self.dx, "xi exponent")
        return {tuple(Fraction(v, self.dz) for v in unpack(k, self.nz)): c
                for k, c in self.cells.get((qn, xn), {}).items()}

    def q_exponents(self, xi=0) -> List[Fraction]:
        xn = num_over(xi, self.dx, "xi exponent")
        return sorted(Fraction(q, QDEN) for (q, x) in self.cells if x == xn)

    def xi_exponents(self) -> List[Fraction]:
        return sorted({Fraction(x, self.dx) for (_, x) in self.cells})

    def xi_level(self, xi) -> "MultiSeries":
        """Coefficient of xi^xi as a xi-free series."""
        xn = num_over(xi, self.dx, "xi exponent")
        if xn > self.xi_order:
            raise SeriesError("xi level outside the guaranteed region")
        cells = {(q, 0): dict(c) for (q, x), c in self.cells.items() if x == xn}
        return MultiSeries(self.nz, self.dz, 1, cells, INF, (self.qbound(xn),), _trusted=True)

    def __repr__(self) -> str:
        return f"MultiSeries({len(self)} terms, q<={self.q_order}, xi<={self.xi_order_exp})"

    # -- reshaping -----------------------------------------------------------
    def with_denominators(self, dz: int, dx: int) -> "MultiSeries":
        if dz == self.dz and dx == self.dx:
            return self
        if dz % self.dz or dx % self.dx:
            raise SeriesError("denominators can only be refined")
        fz, fx = dz // self.dz, dx // self.dx
        cells = {}
        for (q, x), cell in self.cells.items():
            if fz == 1:
                nc = cell
            else:
                nc = {pack([v * fz for v in unpack(k, self.nz)]): c for k, c in cell.items()}
            cells[(q, x * fx)] = nc
        if fx == 1:
            return MultiSeries(self.nz, dz, dx, cells, self.xi_order, self.qb, _trusted=True)
        # new levels between old ones carry no exponents, so they are exactly zero
        top = self.level_span() if self.xi_order == INF else int(self.xi_order)
        qb = [self.qbound(j // fx) if j % fx == 0 else INF for j in range(top * fx + 1)]
        xo = INF if self.xi_order == INF else self.xi_order * fx
        return MultiSeries(self.nz, dz, dx, cells, xo, qb, _trusted=True)

    def truncate(self, q_order=None, xi_order=None) -> "MultiSeries":
        """Shrink the guaranteed region to the box given (never enlarges it)."""
        xo = self.xi_order
        if xi_order is not None and xi_order != INF:
            xo = min(xo, num_over(xi_order, self.dx, "xi order"))
        top = int(xo) if xo != INF else self.level_span()
        qb = [self.qbound(x) for x in range(top + 1)]
        if q_order is not None:
            qn = num_over(q_order, QDEN, "q order") if q_order != INF else INF
            qb = [min(b, qn) for b in qb]
        cells = {(q, x): c for (q, x), c in self.cells.items() if x <= top and q <= qb[x]}
        return MultiSeries(self.nz, self.dz, self.dx, cells, xo, qb, _trusted=True)

    def guaranteed_box(self, q_order, xi_order) -> bool:
        qn = num_over(q_order, QDEN, "q order")
        xn = num_over(xi_order, self.dx, "xi order")
        if xn > self.xi_order:
            return False
        return all(self.qbound(x) >= qn for x in range(xn + 1))

    # -- arithmetic sugar ----------------------------------------------------
    def __add__(self, other):
        return add(self, _coerce(other, self))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return add(self, _coerce(other, self).scale(-1))

    def __rsub__(self, other):
        return add(_coerce(other, self), self.scale(-1))

    def __mul__(self, other):
        if isinstance(other, MultiSeries):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return power(self, n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return series_equal(self, other)

    __hash__ = None  # type: ignore[assignment]

    def scale(self, c) -> "MultiSeries":
        c = to_mpq(frac(c))
        if c == 0:
            return MultiSeries(self.nz, self.dz, self.dx, {}, self.xi_order, self.qb, _trusted=True)
        cells = {key: {k: v * c for k, v in cell.items()} for key, cell in self.cells.items()}
        return MultiSeries(self.nz, self.dz, self.dx, cells, self.xi_order, self.qb, _trusted=True)

    def shift(self, q=0, zeta: Sequence = (), xi=0) -> "MultiSeries":
        """Multiply by the monomial q^q zeta^zeta xi^xi (xi >= 0)."""
        dz = self.dz
        for v in zeta:
            dz = math.lcm(dz, frac(v).denominator)
        dx = math.lcm(self.dx, frac(xi).denominator)
        s = self.with_denominators(dz, dx)
        qn = num_over(q, QDEN, "q shift")
        xn = num_over(xi, dx, "xi shift")
        if xn < 0:
            raise SeriesError("negative xi shift")
        zk = pack([num_over(v, dz) for v in zeta]) if zeta else 0
        cells = {}
        for (qq, x), cell in s.cells.items():
            cells[(qq + qn, x + xn)] = {k + zk: c for k, c in cell.items()} if zk else dict(cell)
        top = s.level_span() if s.xi_order == INF else int(s.xi_order)
        qb = [INF] * xn + [s.qbound(x) + qn for x in range(top + 1)]
        xo = INF if s.xi_order == INF else s.xi_order + xn
        return MultiSeries(s.nz, dz, dx, cells, xo, qb, _trusted=True)

    def map_zeta(self, fn, nz: int | None = None, dz: int | None = None) -> "MultiSeries":
        """Apply ``fn`` to zeta numerator vectors, merging collisions.

        ``fn`` receives and returns numerator tuples; ``nz``/``dz`` describe the
        target (defaults: unchanged).
        """
        tnz = self.nz if nz is None else nz
        tdz = self.dz if dz is None else dz
        cells = {}
        for key, cell in self.cells.items():
            nc: Cell = {}
            for k, c in cell.items():
                nk = pack(fn(unpack(k, self.nz)))
                v = nc.get(nk, 0) + c
                if v:
                    nc[nk] = v
                else:
                    nc.pop(nk, None)
            if nc:
                cells[key] = nc
        return MultiSeries(tnz, tdz, self.dx, cells, self.xi_order, self.qb, _trusted=True)

    def map_coeffs(self, fn) -> "MultiSeries":
        """Replace each coefficient c by fn(q_num, zeta_nums, xi_num, c)."""
        cells = {}
        for (q, x), cell in self.cells.items():
            nc = {}
            for k, c in cell.items():
                v = fn(q, unpack(k, self.nz), x, c)
                if v:
                    nc[k] = to_mpq(frac(v))
            if nc:
                cells[(q, x)] = nc
        return MultiSeries(self.nz, self.dz, self.dx, cells, self.xi_order, self.qb, _trusted=True)

    def filter(self, pred) -> "MultiSeries":
        """Keep terms where pred(q_num, zeta_nums, xi_num) holds."""
        cells = {}
        for (q, x), cell in self.cells.items():
            nc = {k: c for k, c in cell.items() if pred(q, unpack(k, self.nz), x)}
            if nc:
                cells[(q, x)] = nc
        return MultiSeries(self.nz, self.dz, self.dx, cells, self.xi_order, self.qb, _trusted=True)

    def audit(self) -> None:
        """Raise if any stored coefficient is zero or lies outside the region."""
        for (q, x), cell in self.cells.items():
            if not cell:
                raise SeriesError("empty cell stored")
            if x < 0 or x > self.xi_order or q > self.qbound(x):
                raise SeriesError(f"term outside guaranteed region at q={q}, xi={x}")
            for c in cell.values():
                if c == 0:
                    raise SeriesError("zero coefficient stored")


# -- constructors -------------------------------------------------------------

def _bound_num(q_order):
    return INF if q_order in (None, INF) else num_over(q_order, QDEN, "q order")


def _xi_num(xi_order, dx):
    return INF if xi_order in (None, INF) else num_over(xi_order, dx, "xi order")


def zero(nz: int, dz: int = 1, dx: int = 1, q_order=INF, xi_order=INF) -> MultiSeries:
    return MultiSeries(nz, dz, dx, {}, _xi_num(xi_order, dx), (_bound_num(q_order),), _trusted=True)


def from_terms(nz: int, terms: Iterable[Tuple], dz: int = 1, dx: int = 1,
               q_order=INF, xi_order=INF) -> MultiSeries:
    """Build from (q, zeta-tuple, xi, coeff) with rational exponents."""
    cells: Dict[Tuple[int, int], Cell] = {}
    for q, z, x, c in terms:
        if c == 0:
            continue
        key = (num_over(q, QDEN, "q exponent"), num_over(x, dx, "xi exponent"))
        zk = pack([num_over(v, dz, "zeta exponent") for v in z] if z else [0] * nz)
        cell = cells.setdefault(key, {})
        cell[zk] = cell.get(zk, 0) + to_mpq(frac(c))
    return MultiSeries(nz, dz, dx, cells, _xi_num(xi_order, dx), (_bound_num(q_order),))


def from_raw(nz: int, raw, dz: int, dx: int = 1, xi_order=INF, qb: Sequence = (INF,)) -> MultiSeries:
    """Build from numerator-keyed cells {(q_num, xi_num): {zeta_nums: coeff}}."""
    cells = {}
    for key, cell in raw.items():
        c = {pack(z): to_mpq(frac(v)) for z, v in cell.items() if v != 0}
        if c:
            cells[key] = c
    return MultiSeries(nz, dz, dx, cells, xi_order, qb)


def constant(c, nz: int, dz: int = 1, dx: int = 1) -> MultiSeries:
    return from_terms(nz, [(0, (0,) * nz, 0, c)], dz, dx)


def monomial(nz: int, q=0, zeta: Sequence = (), xi=0, coeff=1, dz: int = 1, dx: int = 1) -> MultiSeries:
    return from_terms(nz, [(q, tuple(zeta) or (0,) * nz, xi, coeff)], dz, dx)


def _coerce(x, like: MultiSeries) -> MultiSeries:
    if isinstance(x, MultiSeries):
        return x
    return constant(frac(x), like.nz, like.dz, like.dx)


def align(a: MultiSeries, b: MultiSeries) -> Tuple[MultiSeries, MultiSeries]:
    if a.nz != b.nz:
        raise SeriesError(f"arity mismatch: {a.nz} vs {b.nz} zeta variables")
    dz = math.lcm(a.dz, b.dz)
    dx = math.lcm(a.dx, b.dx)
    return a.with_denominators(dz, dx), b.with_denominators(dz, dx)


# -- arithmetic -----------------------------------------------------------------

def add(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    a, b = align(a, b)
    xo = min(a.xi_order, b.xi_order)
    top = int(xo) if xo != INF else max(a.level_span(), b.level_span())
    qb = [min(a.qbound(x), b.qbound(x)) for x in range(top + 1)]
    cells: Dict[Tuple[int, int], Cell] = {}
    for src in (a, b):
        for key, cell in src.cells.items():
            q, x = key
            if x > top or q > qb[x]:
                continue
            tgt = cells.get(key)
            if tgt is None:
                cells[key] = dict(cell)
                continue
            for k, c in cell.items():
                v = tgt.get(k, 0) + c
                if v:
                    tgt[k] = v
                else:
                    del tgt[k]
    cells = {k: v for k, v in cells.items() if v}
    return MultiSeries(a.nz, a.dz, a.dx, cells, xo, qb, _trusted=True)


def sum_series(items: Iterable[MultiSeries]) -> MultiSeries:
    items = list(items)
    if not items:
        raise SeriesError("empty sum")
    out = items[0]
    for s in items[1:]:
        out = add(out, s)
    return out


def linear_combination(coeffs: Sequence, series: Sequence[MultiSeries]) -> MultiSeries:
    return sum_series(s.scale(c) for c, s in zip(coeffs, series))


def _product_profile(a: MultiSeries, b: MultiSeries):
    """Per-level q bounds guaranteed for a*b."""
    xo = min(a.xi_order, b.xi_order)
    top = int(xo) if xo != INF else a.level_span() + b.level_span()
    va = [a.level_valuation(x) for x in range(top + 1)]
    vb = [b.level_valuation(x) for x in range(top + 1)]
    na = a.profile(top)
    nb = b.profile(top)
    qb = []
    for X in range(top + 1):
        best = INF
        for x1 in range(X + 1):
            x2 = X - x1
            best = min(best, na[x1] + vb[x2], nb[x2] + va[x1])
        qb.append(best)
    return xo, qb


def mul(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    a, b = align(a, b)
    xo, qb = _product_profile(a, b)
    if not a.cells or not b.cells:
        return MultiSeries(a.nz, a.dz, a.dx, {}, xo, qb, _trusted=True)
    top = len(qb) - 1
    out: Dict[Tuple[int, int], Cell] = {}
    cb = list(b.cells.items())
    for (qa, xa), pa in a.cells.items():
        for (qb_, xb), pb in cb:
            x = xa + xb
            if x > top:
                continue
            q = qa + qb_
            if q > qb[x]:
                continue
            tgt = out.get((q, x))
            if tgt is None:
                tgt = out[(q, x)] = {}
            get = tgt.get
            for ka, va_ in pa.items():
                for kb, vb_ in pb.items():
                    k = ka + kb
                    tgt[k] = get(k, 0) + va_ * vb_
    cells = {}
    for key, cell in out.items():
        c = {k: v for k, v in cell.items() if v != 0}
        if c:
            cells[key] = c
    return MultiSeries(a.nz, a.dz, a.dx, cells, xo, qb, _trusted=True)


def power(a: MultiSeries, n: int) -> MultiSeries:
    if n < 0:
        return power(invert(a), -n)
    result = constant(1, a.nz, a.dz, a.dx)
    base = a
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def product(items: Iterable[MultiSeries]) -> MultiSeries:
    items = list(items)
    if not items:
        raise SeriesError("empty product")
    out = items[0]
    for s in items[1:]:
        out = mul(out, s)
    return out


def series_equal(a: MultiSeries, b: MultiSeries) -> bool:
    """Coefficientwise equality on the common guaranteed region."""
    return add(a, b.scale(-1)).is_zero()


def exp_neg(a: MultiSeries) -> MultiSeries:
    """exp(-a) for a with strictly positive xi-valuation and finite xi order."""
    if any(x <= 0 for (_, x) in a.cells):
        raise SeriesError("exp_neg needs strictly positive xi-valuation")
    one = constant(1, a.nz, a.dz, a.dx)
    if not a.cells:
        return add(one, a)
    if a.xi_order == INF:
        raise SeriesError("exp_neg needs a finite xi order")
    vx = min(x for (_, x) in a.cells)
    neg = a.scale(-1)
    result = add(one, neg)
    term = neg
    j = 1
    while (j + 1) * vx <= a.xi_order:
        j += 1
        term = mul(term, neg).scale(Fraction(1, j))
        result = add(result, term)
    return result


def invert(a: MultiSeries, q_order=None) -> MultiSeries:
    """Inverse of a series whose lowest term is a unique monomial at xi^0."""
    if not a.cells:
        raise SeriesError("cannot invert zero")
    if q_order is not None:
        a = a.truncate(q_order=q_order)
    if min(x for (_, x) in a.cells) != 0:
        raise SeriesError("cannot invert a series with positive xi-valuation")
    if a.qbound(0) == INF:
        raise SeriesError("inverse of an exact series needs an explicit q_order")
    q0 = min(q for (q, x) in a.cells if x == 0)
    lead = a.cells[(q0, 0)]
    if len(lead) != 1:
        raise SeriesError("no unique minimal term: leading cell is not a monomial")
    (k0, c0), = lead.items()
    zf = [Fraction(-v, a.dz) for v in unpack(k0, a.nz)]
    inv_c = Fraction(1) / frac(c0)
    u = a.shift(q=Fraction(-q0, QDEN), zeta=zf).scale(inv_c)
    u = add(u, constant(-1, a.nz, a.dz, a.dx))
    if any(q <= 0 for (q, x) in u.cells if x == 0):
        raise SeriesError("no unique minimal term")
    negu = u.scale(-1)
    result = add(constant(1, a.nz, a.dz, a.dx), u.scale(0))
    term = constant(1, a.nz, a.dz, a.dx)
    top = negu.qbound(0)
    while True:
        # powers of u gain precision as fast as valuation, so stop on valuation
        term = mul(term, negu).truncate(q_order=Fraction(top, QDEN))
        if term.is_zero():
            break
        result = add(result, term)
    result = result.truncate(q_order=Fraction(top, QDEN))
    return result.shift(q=Fraction(-q0, QDEN), zeta=zf).scale(inv_c)


# -- exact division of Laurent polynomials in zeta ---------------------------------

def _poly_divide(num: Cell, den: Cell) -> Cell:
    """Exact quotient in Q[zeta^(+-1)] by leading-term reduction.

    Packed keys compare like reversed coordinate tuples, which is a monomial
    order, so max/min of the keys are leading/trailing monomials.
    """
    if not num:
        return {}
    rem = dict(num)
    lead_d = max(den)
    low_limit = min(num) - min(den)
    cd = den[lead_d]
    quot: Cell = {}
    while rem:
        lr = max(rem)
        k = lr - lead_d
        if k < low_limit:
            raise SeriesError("inexact Laurent polynomial division")
        c = rem[lr] / cd
        quot[k] = c
        for kd, vd in den.items():
            kk = k + kd
            v = rem.get(kk, 0) - c * vd
            if v:
                rem[kk] = v
            else:
                rem.pop(kk, None)
    return quot


def divide(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    """Exact quotient a/b of xi-free series.

    b's lowest q-cell may be any Laurent polynomial in zeta; each q-level of the
    quotient is obtained by exact polynomial division, and an inexact step is an
    error.
    """
    a, b = align(a, b)
    if any(x for (_, x) in a.cells) or any(x for (_, x) in b.cells):
        raise SeriesError("divide supports xi-free series only")
    if not b.cells:
        raise SeriesError("division by zero")
    vb = min(q for (q, _) in b.cells)
    nb = b.qbound(0)
    na = a.qbound(0)
    va = min((q for (q, _) in a.cells), default=na + 1)
    vc = va - vb
    nc = min(na - vb, nb - vb + vc)
    if nc == INF:
        raise SeriesError("quotient of exact series needs a finite truncation")
    bq = sorted((q - vb, cell) for (q, _), cell in b.cells.items() if q > vb)
    b0 = b.cells[(vb, 0)]
    quot: Dict[int, Cell] = {}
    n = vc
    while n <= nc:
        acc: Cell = dict(a.cells.get((n + vb, 0), {}))
        for d, cell in bq:
            if n - d < vc:
                break
            prev = quot.get(n - d)
            if not prev:
                continue
            for k1, c1 in prev.items():
                for k2, c2 in cell.items():
                    k = k1 + k2
                    v = acc.get(k, 0) - c1 * c2
                    if v:
                        acc[k] = v
                    else:
                        acc.pop(k, None)
        if acc:
            quot[n] = _poly_divide(acc, b0)
        n += 1
    cells = {(q, 0): c for q, c in quot.items() if c}
    return MultiSeries(a.nz, a.dz, a.dx, cells, INF, (nc,), _trusted=True)


# -- calculus ------------------------------------------------------------------

def derivative(a: MultiSeries, var) -> MultiSeries:
    """Normalized derivative (2 pi i)^-1 d/d(var).

    ``var`` is ``"q"`` (the tau slot), ``"xi"`` (the omega slot) or the integer
    index of a zeta coordinate.
    """
    cells: Dict[Tuple[int, int], Cell] = {}
    if var in ("q", "tau"):
        for (q, x), cell in a.cells.items():
            if q:
                f = mpq(q, QDEN)
                cells[(q, x)] = {k: c * f for k, c in cell.items()}
    elif var in ("xi", "omega"):
        for (q, x), cell in a.cells.items():
            if x:
                f = mpq(x, a.dx)
                cells[(q, x)] = {k: c * f for k, c in cell.items()}
    elif isinstance(var, int) and not isinstance(var, bool) and 0 <= var < a.nz:
        for key, cell in a.cells.items():
            nc = {}
            for k, c in cell.items():
                e = unpack(k, a.nz)[var]
                if e:
                    nc[k] = c * mpq(e, a.dz)
            if nc:
                cells[key] = nc
    else:
        raise SeriesError(f"unknown coordinate {var!r}")
    return MultiSeries(a.nz, a.dz, a.dx, cells, a.xi_order, a.qb, _trusted=True)


def leading_term(a: MultiSeries):
    """Canonically first stored term: lexicographic on (q, xi, zeta)."""
    if not a.cells:
        return None
    q, x = min(a.cells)
    cell = a.cells[(q, x)]
    k = min(cell, key=lambda kk: unpack(kk, a.nz))
    return q, x, k, cell[k]


def equal_up_to_constant(a: MultiSeries, b: MultiSeries):
    """(True, c) iff a == c*b on the common guaranteed region.

    The candidate c is the ratio of the canonical leading coefficients; it is
    returned even when the comparison fails (None if leading exponents differ).
    """
    a, b = align(a, b)
    ra = add(a, b.scale(0))
    rb = add(b, a.scale(0))
    if ra.is_zero() or rb.is_zero():
        raise SeriesError("one side is identically zero on the compared region")
    la = leading_term(ra)
    lb = leading_term(rb)
    if la[:3] != lb[:3]:
        return False, None
    c = frac(la[3] / lb[3])
    return series_equal(ra, rb.scale(c)), c


def first_difference(a: MultiSeries, b: MultiSeries):
    """Canonically smallest (q, zeta, xi) exponent where a and b differ."""
    d = add(a, b.scale(-1))
    t = leading_term(d)
    if t is None:
        return None
    q, x, k, _ = t
    return Fraction(q, QDEN), tuple(Fraction(v, d.dz) for v in unpack(k, d.nz)), Fraction(x, d.dx)


# -- canonical serialization ------------------------------------------------------

def canonical_terms(a: MultiSeries):
    rows = []
    for (q, x), cell in a.cells.items():
        for k, c in cell.items():
            rows.append((q, x, unpack(k, a.nz), c))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def _bound_json(b):
    return None if b == INF else int(b)


def to_json_obj(a: MultiSeries) -> dict:
    terms = [[q, list(z), x, f"{int(c.numerator)}/{int(c.denominator)}"]
             for q, x, z, c in canonical_terms(a)]
    return {
        "den": [QDEN, a.dz, a.dx],
        "nz": a.nz,
        "trunc": {
            "xi_order": _bound_json(a.xi_order),
            "q_bounds": [_bound_json(b) for b in a.qb],
        },
        "terms": terms,
    }


def from_json_obj(obj: dict) -> MultiSeries:
    qden, dz, dx = obj["den"]
    if qden != QDEN:
        raise SeriesError("unexpected q denominator")
    nz = obj["nz"]
    cells: Dict[Tuple[int, int], Cell] = {}
    for q, z, x, c in obj["terms"]:
        p, s = c.split("/")
        cells.setdefault((q, x), {})[pack(z)] = mpq(int(p), int(s))
    tr = obj["trunc"]
    xo = INF if tr["xi_order"] is None else tr["xi_order"]
    qb = [INF if b is None else b for b in tr["q_bounds"]]
    return MultiSeries(nz, dz, dx, cells, xo, qb)
