"""Exact linear solves over Q (thin wrapper over sympy's DomainMatrix)."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, List, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix


class SolveError(ValueError):
    pass


def _q(x):
    return QQ(int(x.numerator), int(x.denominator))


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    dm = DomainMatrix([[_q(v) for v in r] for r in rows], (len(rows), len(rows[0])), QQ)
    return dm.rank()


def solve_unique(columns: Sequence[Dict[Hashable, object]], target: Dict[Hashable, object]) -> List[Fraction]:
    """Coefficients c with sum c_j columns[j] == target, keyed sparse vectors.

    Raises SolveError when there is no solution or it is not unique.
    """
    keys = set(target)
    for col in columns:
        keys.update(col)
    keys = sorted(keys, key=repr)
    n = len(columns)
    if n == 0:
        if any(target.get(k, 0) for k in keys):
            raise SolveError("no solution: empty candidate set")
        return []
    rows = [[_q(col.get(k, 0)) for col in columns] + [_q(target.get(k, 0))] for k in keys]
    if not rows:
        raise SolveError("no equations")
    aug = DomainMatrix(rows, (len(rows), n + 1), QQ)
    rref, pivots = aug.rref()
    if n in pivots:
        raise SolveError("no solution")
    if len(pivots) < n:
        raise SolveError(f"non-unique solution: rank {len(pivots)} < {n} unknowns")
    mat = rref.to_Matrix()
    sol = [Fraction(0)] * n
    for i, p in enumerate(pivots):
        v = mat[i, n]
        sol[p] = Fraction(int(v.p), int(v.q))
    return sol


def nullspace(columns: Sequence[Dict[Hashable, object]]) -> List[List[Fraction]]:
    """Basis of {c : sum c_j columns[j] == 0}."""
    keys = set()
    for col in columns:
        keys.update(col)
    keys = sorted(keys, key=repr)
    n = len(columns)
    if not keys:
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    dm = DomainMatrix([[_q(col.get(k, 0)) for col in columns] for k in keys], (len(keys), n), QQ)
    ns = dm.nullspace().to_Matrix()
    out = []
    for i in range(ns.rows):
        out.append([Fraction(int(ns[i, j].p), int(ns[i, j].q)) for j in range(n)])
    return out


def independent_subset(columns: Sequence[Dict[Hashable, object]]) -> List[int]:
    """Indices of a maximal linearly independent subset, chosen greedily from the left."""
    keys = set()
    for col in columns:
        keys.update(col)
    keys = sorted(keys, key=repr)
    if not keys or not columns:
        return []
    dm = DomainMatrix([[_q(col.get(k, 0)) for col in columns] for k in keys],
                      (len(keys), len(columns)), QQ)
    _, pivots = dm.rref()
    return list(pivots)


def solve_particular(columns: Sequence[Dict[Hashable, object]], target: Dict[Hashable, object]) -> List[Fraction]:
    """Some solution of sum c_j columns[j] == target: free variables set to zero."""
    keys = set(target)
    for col in columns:
        keys.update(col)
    keys = sorted(keys, key=repr)
    n = len(columns)
    rows = [[_q(col.get(k, 0)) for col in columns] + [_q(target.get(k, 0))] for k in keys]
    if not rows:
        raise SolveError("no equations")
    aug = DomainMatrix(rows, (len(rows), n + 1), QQ)
    rref, pivots = aug.rref()
    if n in pivots:
        raise SolveError("no solution")
    mat = rref.to_Matrix()
    sol = [Fraction(0)] * n
    for i, p in enumerate(pivots):
        v = mat[i, n]
        sol[p] = Fraction(int(v.p), int(v.q))
    return sol
