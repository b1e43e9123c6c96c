"""orthoforms command-line driver.

Exit codes: 0 success, 1 verification failure, 2 unknown id, 3 infeasible request
(precision out of reach or a violated precondition of the construction).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from . import hecke as H
from . import jacobi as J
from . import ortho as O
from . import series as S
from .cache import Cache, canonical_dumps
from .hecke import HeckeError
from .jacobi import JacobiError, JacobiForm
from .lattice import LatticeError
from .lifts import LiftError, OrthoForm, borcherds_product, borcherds_via_exp, phi12_input, required_precision

F = Fraction
EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_INFEASIBLE = 0, 1, 2, 3
DOMAIN_ERRORS = (LiftError, HeckeError, JacobiError, S.SeriesError, LatticeError, O.OrthoError)


class UnknownId(KeyError):
    pass


# -- parsing ---------------------------------------------------------------------------

def parse_prec(text: Optional[str], default_q, default_x=None) -> Tuple[Fraction, Optional[Fraction]]:
    """'q3,x2' -> (3, 2); 'q2' or '2' -> (2, default_x)."""
    q, x = F(default_q), (None if default_x is None else F(default_x))
    if not text:
        return q, x
    for part in text.split(","):
        part = part.strip()
        if part.startswith("q"):
            q = F(part[1:])
        elif part.startswith("x"):
            x = F(part[1:])
        else:
            q = F(part)
    return q, x


def lattice_name(text: str) -> str:
    """'A1-2', 'A1(2)' -> 'A1(2)'."""
    if "(" in text:
        return text
    if "-" in text:
        base, scale = text.rsplit("-", 1)
        return f"{base}({scale})"
    raise UnknownId(text)


def jacobi_input(form_id: str, prec) -> JacobiForm:
    if form_id.startswith("phi12-"):
        return phi12_input(lattice_name(form_id[len("phi12-"):]), prec)
    try:
        return J.form(form_id, prec)
    except KeyError as exc:
        if exc.args and exc.args[0] == form_id:
            raise UnknownId(form_id) from None
        raise


def _check_known(form_id: str) -> None:
    if form_id.startswith("phi12-"):
        try:
            from .lattice import get_lattice
            get_lattice(lattice_name(form_id[len("phi12-"):]))
        except (LatticeError, KeyError):
            raise UnknownId(form_id) from None
    elif form_id not in J.known_forms():
        raise UnknownId(form_id)


# -- serialization and rendering -------------------------------------------------------------

def jacobi_obj(f: JacobiForm, form_id: str) -> dict:
    return {"kind": "jacobi", "id": form_id, "weight": str(f.weight), "index": str(f.index),
            "lattice": f.lattice.name, "eta_power": f.D, "series": S.to_json_obj(f.series)}


def ortho_obj(f: OrthoForm, form_id: str, kind: str) -> dict:
    return {"kind": kind, "id": form_id, "weight": str(f.weight), "lattice": f.lattice.name,
            "xi_index": str(f.t0), "series": S.to_json_obj(f.series)}


def _exp(x: Fraction) -> str:
    return str(x) if x.denominator == 1 and x >= 0 else f"({x})"


def _monomial(var: str, e: Fraction) -> str:
    if e == 0:
        return ""
    return var if e == 1 else f"{var}^{_exp(e)}"


def render_cell(cell: Dict[Tuple[Fraction, ...], object]) -> str:
    parts: List[str] = []
    for z in sorted(cell):
        c = S.frac(cell[z])
        zs = "*".join(m for m in (_monomial(f"z{i + 1}" if len(z) > 1 else "z", e)
                                  for i, e in enumerate(z)) if m)
        mag = abs(c)
        if zs:
            body = zs if mag == 1 else f"{mag}*{zs}"
        else:
            body = str(mag)
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {body}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def render(series: S.MultiSeries, with_xi: bool) -> str:
    lines = []
    for x in series.xi_exponents() if with_xi else [F(0)]:
        for q in series.q_exponents(x):
            head = "*".join(m for m in (_monomial("xi", x) if with_xi else "", _monomial("q", q)) if m) or "1"
            lines.append(f"{head} * ({render_cell(series.cell(q, x))})")
    tr = f"known through q^{series.q_order}" if series.q_order != S.INF else "exact"
    lines.append(f"# {tr}" + (f", xi <= {series.xi_order_exp}" if with_xi else ""))
    return "\n".join(lines)


def _emit(payload: str, as_json: bool, kind: str) -> None:
    obj = json.loads(payload)
    if as_json:
        print(payload)
        return
    series = S.from_json_obj(obj["series"])
    meta = {k: v for k, v in obj.items() if k not in ("series", "kind")}
    print(f"# {kind} " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())))
    print(render(series, kind != "jacobi"))


# -- commands ---------------------------------------------------------------------------

def cmd_expand(args, cache: Cache) -> int:
    _check_known(args.form_id)
    q, _ = parse_prec(args.prec, 1)

    def produce():
        return jacobi_obj(jacobi_input(args.form_id, q), args.form_id)

    _emit(cache.get_or_compute(("expand", args.form_id, q), produce), args.json, "jacobi")
    return EXIT_OK


def cmd_grit(args, cache: Cache) -> int:
    _check_known(args.form_id)
    q, x = parse_prec(args.prec, 2, 2)

    def produce():
        return ortho_obj(O.grit_form(args.form_id, q, x), args.form_id, "grit")

    _emit(cache.get_or_compute(("grit", args.form_id, q, x), produce), args.json, "grit")
    return EXIT_OK


def cmd_borch(args, cache: Cache) -> int:
    _check_known(args.form_id)
    q, x = parse_prec(args.prec, 2, 2)

    def produce():
        phi = jacobi_input(args.form_id, 1)
        need = max(F(1), required_precision(phi, q, x))
        phi = jacobi_input(args.form_id, need)
        route = borcherds_product if args.route == "product" else borcherds_via_exp
        return ortho_obj(route(phi, q, x), args.form_id, "borch")

    _emit(cache.get_or_compute(("borch", args.form_id, q, x, args.route), produce), args.json, "borch")
    return EXIT_OK


def cmd_hecke(args, cache: Cache) -> int:
    _check_known(args.form_id)
    q, _ = parse_prec(args.prec, 1)

    def produce():
        f = jacobi_input(args.form_id, q * args.m)
        if f.weight == F(1, 2):
            out = H.hecke_raise_weight_half(f, args.m)
        else:
            out = H.hecke_raise(f, args.m)
        return jacobi_obj(out.truncate(q), f"{args.form_id}|T({args.m})")

    _emit(cache.get_or_compute(("hecke", args.form_id, args.m, q), produce), args.json, "jacobi")
    return EXIT_OK


def cmd_phi12(args, cache: Cache) -> int:
    name = lattice_name(args.lattice)
    form_id = "phi12-" + args.lattice.replace("(", "-").rstrip(")")
    _check_known(form_id)
    q, _ = parse_prec(args.prec, 1)

    def produce():
        return jacobi_obj(phi12_input(name, q), form_id)

    _emit(cache.get_or_compute(("phi12", name, q), produce), args.json, "jacobi")
    return EXIT_OK


def cmd_dims(args, cache: Cache) -> int:
    lat = lattice_name(args.lattice)
    if lat not in O.DIM_SUMS:
        raise UnknownId(args.lattice)
    case_id = O.HILBERT_CASE[lat]
    ws = O.generator_weights(case_id)
    rows = []
    for k in range(args.kmax + 1):
        if lat in O.EVEN_ONLY and k % 2:
            continue
        rows.append({"k": k, "hilbert": O.hilbert_coeff(ws, k), "fj_sum": O.dim_from_fj_sum(lat, k)})
    ok = all(r["hilbert"] == r["fj_sum"] for r in rows)
    if args.json:
        print(canonical_dumps({"lattice": lat, "case": case_id, "weights": [str(w) for w in ws],
                               "rows": rows, "pass": ok}))
    else:
        print(f"# {case_id}  generator weights {', '.join(str(w) for w in ws)}")
        print(f"{'k':>4} {'hilbert':>8} {'fj_sum':>8}")
        for r in rows:
            flag = "" if r["hilbert"] == r["fj_sum"] else "  MISMATCH"
            print(f"{r['k']:>4} {r['hilbert']:>8} {r['fj_sum']:>8}{flag}")
    return EXIT_OK if ok else EXIT_FAIL


def verify_one(ident: str, prec: Optional[str], kmax: int, deep: bool) -> dict:
    q, x = parse_prec(prec, 0, None) if prec else (None, None)
    q = q or None
    if ident in O.CASES:
        return O.verify_case(ident, q, x, kmax=kmax, deep=deep).as_json()
    out = O.run_identity(ident, q, x, kmax=kmax)
    return {"case": ident, "pass": out["pass"], "checks": {ident: out}}


def _verify_task(job):
    ident, prec, kmax, deep = job
    try:
        return verify_one(ident, prec, kmax, deep), None
    except DOMAIN_ERRORS as exc:
        return None, f"{type(exc).__name__}: {exc}"


def all_ids() -> List[str]:
    return O.identity_ids() + list(O.CASES)


def cmd_verify(args, cache: Cache) -> int:
    if args.all:
        ids = all_ids()
    elif args.id:
        ids = [args.id]
    else:
        print("verify needs an id or --all", file=sys.stderr)
        return EXIT_UNKNOWN
    known = set(O.identity_ids()) | set(O.CASES)
    for i in ids:
        if i not in known:
            raise UnknownId(i)
    jobs = [(i, args.prec, args.kmax, args.deep) for i in ids]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_verify_task, jobs))
    else:
        results = [_verify_task(j) for j in jobs]
    reports, code = [], EXIT_OK
    for ident, (rep, err) in zip(ids, results):
        if err is not None:
            reports.append({"case": ident, "pass": False, "error": err})
            code = max(code, EXIT_INFEASIBLE) if len(ids) == 1 else max(code, EXIT_FAIL)
        else:
            reports.append(rep)
            if not rep["pass"]:
                code = max(code, EXIT_FAIL)
    out = reports[0] if len(reports) == 1 else {"pass": code == EXIT_OK, "reports": reports}
    print(canonical_dumps(out) if args.json else json.dumps(out, indent=2, sort_keys=True))
    return code


# -- entry point ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orthoforms", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--no-cache", action="store_true", help="ignore the on-disk cache")
    p.add_argument("--cache-dir", help="cache directory (default: $ORTHOFORMS_CACHE_DIR)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, prec_help):
        sp.add_argument("--prec", help=prec_help)
        sp.add_argument("--json", action="store_true", help="canonical JSON output")

    sp = sub.add_parser("expand", help="expansion of a registered Jacobi form")
    sp.add_argument("form_id")
    common(sp, "q-order, e.g. q2")
    sp.set_defaults(fn=cmd_expand)

    sp = sub.add_parser("grit", help="additive lift of a registered Jacobi form")
    sp.add_argument("form_id")
    common(sp, "q- and xi-order, e.g. q3,x2")
    sp.set_defaults(fn=cmd_grit)

    sp = sub.add_parser("borch", help="Borcherds product of a weight-0 form (or phi12-<lattice>)")
    sp.add_argument("form_id")
    sp.add_argument("--route", choices=("product", "exp"), default="product")
    common(sp, "q- and xi-order, e.g. q3,x2")
    sp.set_defaults(fn=cmd_borch)

    sp = sub.add_parser("hecke", help="index-raising operator T_-(m)")
    sp.add_argument("form_id")
    sp.add_argument("m", type=int)
    common(sp, "q-order of the result")
    sp.set_defaults(fn=cmd_hecke)

    sp = sub.add_parser("phi12", help="input form of the reflective form of weight 12")
    sp.add_argument("lattice", help="e.g. A1-2 or 'A1(2)'")
    common(sp, "q-order")
    sp.set_defaults(fn=cmd_phi12)

    sp = sub.add_parser("dims", help="Hilbert coefficients against Fourier-Jacobi dimension sums")
    sp.add_argument("lattice")
    sp.add_argument("--kmax", type=int, default=40)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_dims)

    sp = sub.add_parser("verify", help="verify a case or identity; JSON report")
    sp.add_argument("id", nargs="?")
    sp.add_argument("--all", action="store_true")
    sp.add_argument("--deep", action="store_true", help="run the A2/A3/D4 Jacobian checks (slow)")
    sp.add_argument("--kmax", type=int, default=40)
    sp.add_argument("--jobs", type=int, default=1)
    common(sp, "override the default window, e.g. q3,x3")
    sp.set_defaults(fn=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    cache = Cache(args.cache_dir, enabled=not args.no_cache)
    try:
        return args.fn(args, cache)
    except UnknownId as exc:
        print(f"unknown id: {exc.args[0]}", file=sys.stderr)
        return EXIT_UNKNOWN
    except DOMAIN_ERRORS as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
