"""Even positive-definite lattices, their rescalings, and the hyperbolic model.

A lattice is a basis ``B`` (columns, in ambient coordinates) inside an ambient
space with form ``S``; the Gram matrix of ``L(a)`` is ``a * B^T S B``.  The
elliptic variable z of a Jacobi form is written in the ambient coordinates and
a monomial zeta^r means exp(2 pi i r.z).  Such an ``r`` is the vector of
pairings of the corresponding dual vector with the ambient coordinate axes, so
it does not change under rescaling; only norms do:

    (l, l)_{L(a)} = r^T S^-1 r / a.

Membership in L^v is ``B^T r`` integral.  Those integers ``y = B^T r`` are the
coordinates of ``l`` in the basis dual to ``B``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import sympy


class LatticeError(ValueError):
    pass


Vec = Tuple[Fraction, ...]


def _fmat(rows) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _matmul(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
                 for i in range(len(a)))


def _transpose(a):
    return tuple(zip(*a))


def _inverse(a):
    m = sympy.Matrix(a).inv()
    return tuple(tuple(Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in row)
                 for row in m.tolist())


def _det(a) -> Fraction:
    d = sympy.Matrix(a).det()
    p, q = sympy.fraction(d)
    return Fraction(int(p), int(q))


def _matvec(a, v):
    return tuple(sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a)))


@dataclass(frozen=True)
class LatticeModel:
    name: str
    basis: Tuple[Tuple[Fraction, ...], ...]     # rows are basis vectors (ambient coords)
    ambient: Tuple[Tuple[Fraction, ...], ...]   # ambient form S
    scale: int = 1
    base_name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.scale < 1:
            raise LatticeError("scale must be a positive integer")
        g = self.gram
        for i in range(self.rank):
            if g[i][i] % 2:
                raise LatticeError(f"{self.name} is not even")
        if not sympy.Matrix(g).is_positive_definite:
            raise LatticeError(f"{self.name} is not positive definite")

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return len(self.ambient)

    @cached_property
    def gram(self) -> Tuple[Tuple[Fraction, ...], ...]:
        bs = _matmul(self.basis, self.ambient)
        g = _matmul(bs, _transpose(self.basis))
        return tuple(tuple(x * self.scale for x in row) for row in g)

    @cached_property
    def gram_inv(self):
        return _inverse(self.gram)

    @cached_property
    def ambient_inv(self):
        return _inverse(self.ambient)

    @cached_property
    def det(self) -> int:
        d = _det(self.gram)
        return int(d)

    @cached_property
    def d_L(self) -> int:
        """Denominator containing 1/2 L^v in zeta coordinates."""
        bi = _inverse(self.basis)
        den = 1
        for row in bi:
            for x in row:
                den = math.lcm(den, x.denominator)
        return 2 * den

    def __repr__(self) -> str:
        return f"LatticeModel({self.name})"

    # -- coordinates -------------------------------------------------------------
    def pairing_coords(self, r: Sequence) -> Vec:
        """y = B^T r, the coordinates of l in the dual basis."""
        return tuple(sum(Fraction(b[j]) * Fraction(r[j]) for j in range(self.dim)) for b in self.basis)

    def from_pairing_coords(self, y: Sequence) -> Vec:
        binv = _inverse(self.basis)  # B^-1 with rows = basis vectors => r = (B^T)^-1 y
        # basis is stored row-wise, so B^T r = basis . r and r = basis^-1 y
        return _matvec(binv, [Fraction(v) for v in y])

    def from_basis_coords(self, c: Sequence) -> Vec:
        """zeta exponent of l = sum c_i b_i under the (scaled) form."""
        amb = _matvec(_transpose(self.basis), [Fraction(v) for v in c])
        return tuple(self.scale * v for v in _matvec(self.ambient, amb))

    def norm(self, r: Sequence) -> Fraction:
        r = [Fraction(v) for v in r]
        si = self.ambient_inv
        return sum(r[i] * si[i][j] * r[j] for i in range(self.dim) for j in range(self.dim)) / self.scale

    def pair(self, r1: Sequence, r2: Sequence) -> Fraction:
        si = self.ambient_inv
        return sum(Fraction(r1[i]) * si[i][j] * Fraction(r2[j])
                   for i in range(self.dim) for j in range(self.dim)) / self.scale

    def in_dual(self, r: Sequence, half: bool = False) -> bool:
        f = 2 if half else 1
        return all((y * f).denominator == 1 for y in self.pairing_coords(r))

    def in_lattice(self, r: Sequence) -> bool:
        y = self.pairing_coords(r)
        c = _matvec(self.gram_inv, y)
        return all(x.denominator == 1 for x in c)

    def discriminant_class(self, r: Sequence) -> Tuple[Fraction, ...]:
        """Canonical key of l + L in L^v / L (entries of G^-1 y mod 1)."""
        c = _matvec(self.gram_inv, self.pairing_coords(r))
        return tuple(x - math.floor(x) for x in c)


# -- registry ---------------------------------------------------------------------

def _model(name, basis, ambient) -> LatticeModel:
    return LatticeModel(name, _fmat(basis), _fmat(ambient), 1, name)


BASE_LATTICES: Dict[str, LatticeModel] = {
    "A1": _model("A1", [[1]], [[2]]),
    "2A1": _model("2A1", [[1, 0], [0, 1]], [[2, 0], [0, 2]]),
    "A2": _model("A2", [[1, 0], [0, 1]], [[2, -1], [-1, 2]]),
    "D3": _model("D3", [[1, -1, 0], [0, 1, -1], [0, 1, 1]], [[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
    "D4": _model("D4", [[1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1], [0, 0, 1, 1]],
                 [[1 if i == j else 0 for j in range(4)] for i in range(4)]),
}
BASE_LATTICES["A3"] = BASE_LATTICES["D3"]

PAPER_LATTICES = ("A1(2)", "A1(3)", "A1(4)", "2A1(2)", "A2(2)", "A2(3)", "A3(2)", "D4(2)")


def rescale(L: LatticeModel, a: int) -> LatticeModel:
    if a < 1 or int(a) != a:
        raise LatticeError("rescaling factor must be a positive integer")
    if a == 1:
        return L
    s = L.scale * a
    base = L.base_name or L.name
    return LatticeModel(f"{base}({s})", L.basis, L.ambient, s, base)


def get_lattice(name: str) -> LatticeModel:
    """Look up "A1", "A1(2)", "D4(2)", ..."""
    name = name.strip()
    if "(" in name:
        base, rest = name.split("(", 1)
        if not rest.endswith(")"):
            raise LatticeError(f"unknown lattice {name!r}")
        try:
            a = int(rest[:-1])
        except ValueError as exc:
            raise LatticeError(f"unknown lattice {name!r}") from exc
    else:
        base, a = name, 1
    if base not in BASE_LATTICES:
        raise LatticeError(f"unknown lattice {name!r}")
    return rescale(BASE_LATTICES[base], a)


# -- enumeration ---------------------------------------------------------------------

def enumerate_dual(L: LatticeModel, norm_bound, half: bool = False) -> List[Vec]:
    """All l in L^v (or 1/2 L^v) with (l,l) <= norm_bound, as zeta exponents.

    Box bound per coordinate from Cauchy-Schwarz: y_i^2 <= (l,l) * G_ii.
    """
    bound = Fraction(norm_bound)
    if bound < 0:
        return []
    g = L.gram
    gi = L.gram_inv
    step = Fraction(1, 2) if half else Fraction(1)
    ranges = []
    for i in range(L.rank):
        m = math.isqrt(int(math.floor(bound * g[i][i] / step / step))) + 1
        ranges.append(range(-m, m + 1))
    out = []
    for ys in itertools.product(*ranges):
        y = tuple(step * v for v in ys)
        n = sum(y[i] * gi[i][j] * y[j] for i in range(L.rank) for j in range(L.rank))
        if n <= bound:
            out.append(L.from_pairing_coords(y))
    out.sort(key=lambda r: (L.norm(r), r))
    return out


def coset_minima(L: LatticeModel, search_bound=2) -> Dict[Tuple[Fraction, ...], Fraction]:
    """Minimal norm in each discriminant class that has a vector of norm <= bound."""
    best: Dict[Tuple[Fraction, ...], Fraction] = {}
    for r in enumerate_dual(L, search_bound):
        k = L.discriminant_class(r)
        n = L.norm(r)
        if k not in best or n < best[k]:
            best[k] = n
    return best


def check_norm2(L: LatticeModel) -> bool:
    """Every class of L^v/L contains a vector of norm <= 2."""
    return len(coset_minima(L, 2)) == abs(L.det)


def positive_direction(r: Sequence) -> bool:
    for v in r:
        if v > 0:
            return True
        if v < 0:
            return False
    raise LatticeError("zero vector has no direction")


# -- hyperbolic model 2U + L(-1) ---------------------------------------------------------

@dataclass(frozen=True)
class HyperbolicModel:
    """Gram model of M = U + L(-1) + U with coordinates (e, f, v_1..v_l, e', f')."""

    lattice: LatticeModel

    @cached_property
    def gram(self) -> Tuple[Tuple[int, ...], ...]:
        l = self.lattice.rank
        n = l + 4
        g = [[0] * n for _ in range(n)]
        g[0][1] = g[1][0] = 1
        g[n - 2][n - 1] = g[n - 1][n - 2] = 1
        for i in range(l):
            for j in range(l):
                g[2 + i][2 + j] = -int(self.lattice.gram[i][j])
        return tuple(tuple(r) for r in g)

    @property
    def dim(self) -> int:
        return self.lattice.rank + 4

    def pair(self, x: Sequence, y: Sequence):
        g = self.gram
        return sum(x[i] * g[i][j] * y[j] for i in range(self.dim) for j in range(self.dim) if g[i][j])

    def norm(self, x: Sequence):
        return self.pair(x, x)


def divisor_of(M: HyperbolicModel, v: Sequence[int]) -> int:
    if not any(v):
        raise LatticeError("zero vector")
    g = M.gram
    return math.gcd(*[sum(g[i][j] * v[j] for j in range(M.dim)) for i in range(M.dim)])


def is_primitive(v: Sequence[int]) -> bool:
    return math.gcd(*[int(x) for x in v]) == 1


def is_reflective(M: HyperbolicModel, v: Sequence[int]) -> bool:
    if not is_primitive(v):
        raise LatticeError("vector is not primitive")
    n = M.norm(v)
    if n >= 0:
        raise LatticeError("vector must have negative norm")
    d = -n // 2
    return divisor_of(M, v) in (d, 2 * d)


def reflect(M: HyperbolicModel, r: Sequence, x: Sequence, require_integral: bool = False):
    rr = M.norm(r)
    if rr == 0:
        raise LatticeError("cannot reflect in an isotropic vector")
    c = Fraction(2 * M.pair(r, x), rr)
    out = tuple(Fraction(xi) - c * ri for xi, ri in zip(x, r))
    if require_integral and any(v.denominator != 1 for v in out):
        raise LatticeError("reflection does not preserve the lattice")
    return out


def reflection_is_integral(M: HyperbolicModel, r: Sequence[int]) -> bool:
    """sigma_r maps every basis vector of M into M (brute-force oracle)."""
    for i in range(M.dim):
        e = [0] * M.dim
        e[i] = 1
        if any(v.denominator != 1 for v in reflect(M, r, e)):
            return False
    return True
