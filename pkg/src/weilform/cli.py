"""Command-line interface.  Every command prints one JSON document on stdout.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 budget exceeded, 4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

import numpy as np

from . import config as cfg
from .errors import ValidationError, WeilformError
from .exactnum import CyclotomicNumber, fraction_to_str
from .fqm import Fqm, dm_units, fqm_from_matrix, fqm_standard, neg, orth_sum, p_part

log = logging.getLogger("weilform")


# ---------------------------------------------------------------------------
# input parsing


def _read_json_arg(text: str):
    if text.startswith("@"):
        try:
            with open(text[1:]) as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read {text[1:]}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {text!r}") from exc


def read_matrix(text: str) -> list[list[int]]:
    data = _read_json_arg(text)
    if isinstance(data, dict):
        if "twoF" not in data:
            raise ValidationError('matrix file must contain a "twoF" entry')
        data = data["twoF"]
    if not (isinstance(data, list) and data and all(isinstance(r, list) for r in data)):
        raise ValidationError("twoF must be a non-empty list of rows")
    try:
        return [[int(x) for x in row] for row in data]
    except (TypeError, ValueError) as exc:
        raise ValidationError("twoF entries must be integers") from exc


def _split_args(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            raise ValidationError("unbalanced parentheses")
        cur += ch
    if depth:
        raise ValidationError("unbalanced parentheses")
    out.append(cur)
    return [x.strip() for x in out]


def parse_fqm(spec: str) -> tuple[Fqm, list[Fqm]]:
    """Parse the module language; also return the summands of a top-level sum."""
    spec = spec.strip()
    for head in ("neg", "sum", "ppart"):
        if spec.startswith(head + "(") and spec.endswith(")"):
            args = _split_args(spec[len(head) + 1:-1])
            if head == "neg":
                if len(args) != 1:
                    raise ValidationError("neg takes one argument")
                m = neg(parse_fqm(args[0])[0])
                return m, [m]
            if head == "sum":
                parts = [parse_fqm(a)[0] for a in args]
                return orth_sum(*parts), parts
            if len(args) != 2:
                raise ValidationError("ppart takes a module and a prime")
            m = p_part(parse_fqm(args[0])[0], _int(args[1]))
            return m, [m]
    if spec.startswith("matrix:"):
        m = fqm_from_matrix(read_matrix(spec[len("matrix:"):])).module
        return m, [m]
    kind, *params = spec.split(":")
    m = fqm_standard(kind, *[_int(p) for p in params])
    return m, [m]


def _int(s: str) -> int:
    try:
        return int(s)
    except ValueError as exc:
        raise ValidationError(f"expected an integer, got {s!r}") from exc


def _to_plain(x):
    if isinstance(x, Fraction):
        return fraction_to_str(x)
    if isinstance(x, CyclotomicNumber):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _to_plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_plain(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def emit(obj) -> None:
    sys.stdout.write(json.dumps(_to_plain(obj)) + "\n")


# ---------------------------------------------------------------------------
# commands


def _rep_from_args(args):
    from .weilrep import eps_char, ind_gamma0, tensor

    rep = None
    if getattr(args, "char", None) is not None:
        rep = eps_char(args.char)
    if getattr(args, "gamma0", None) is not None:
        g = ind_gamma0(args.gamma0)
        rep = g if rep is None else tensor(g, rep)
    return rep


def cmd_fqm(args):
    m, _ = parse_fqm(args.spec)
    emit(m.info())


def cmd_rep(args):
    from .weilrep import char_twist, weil_rep

    m, _ = parse_fqm(args.spec)
    rep = weil_rep(m)
    if args.char is not None:
        rep = char_twist(rep, args.char)
    verdict = rep.check_relations() if rep.dim <= cfg.get_config().verify_dim else {}
    emit({"dim": rep.dim, "conductor": rep.conductor, "verified": rep.verified, "relations": verdict,
          "ok": all(verdict.values())})


def cmd_inv(args):
    from .weilrep import invariants_from_selfdual, neg_symmetry, weil_rep

    m, parts = parse_fqm(args.spec)
    if args.selfdual_only:
        basis, subs = invariants_from_selfdual(m)
        emit({"dim": len(basis), "subgroups": len(subs), "basis": [[fraction_to_str(c) for c in row] for row in basis]})
        return
    rep = weil_rep(m)
    ops = []
    if args.project:
        first = parts[0]
        rest = m.order // first.order
        if args.project in ("even", "even-first"):
            perm, _ = neg_symmetry([first.order, rest], 0, first.neg_index())
            ops.append((perm, np.zeros(rep.dim, dtype=np.int64)))
        elif args.project in ("odd", "odd-first-factor"):
            perm, _ = neg_symmetry([first.order, rest], 0, first.neg_index())
            ops.append((perm, np.full(rep.dim, rep.conductor // 2, dtype=np.int64)))
        elif args.project == "O-first":
            if first.rank != 1 or first.orders[0] % 2:
                raise ValidationError("O-first needs a first summand of the form D:m")
            l = first.orders[0] // 2
            idx = np.arange(rep.dim)
            hi, lo = np.divmod(idx, rest)
            for u in dm_units(l):
                ops.append(((hi * u) % (2 * l) * rest + lo, np.zeros(rep.dim, dtype=np.int64)))
        else:
            raise ValidationError(f"unknown projection {args.project!r}")
    emit(rep.invariants(ops).to_json())


def cmd_dim(args):
    from .jacobidim import dim_critical, dim_formula, dim_halfweight_theta

    if args.what == "halfweight":
        if args.m is None:
            raise ValidationError("dim halfweight needs --m")
        emit({"m": args.m, "eisenstein": args.eisenstein, "dim": dim_halfweight_theta(args.m, args.eisenstein)})
        return
    if args.matrix is None:
        raise ValidationError(f"dim {args.what} needs --matrix")
    twoF = read_matrix(args.matrix)
    V = _rep_from_args(args) if args.gamma0 is not None else None
    char = args.char if V is None else None
    if args.what == "critical":
        rep = dim_critical(twoF, V, char, eisenstein=args.eisenstein, m=args.m)
        emit(rep.to_json(with_vectors=args.vectors))
        return
    if args.weight is None:
        raise ValidationError("dim formula needs --weight")
    val = dim_formula(twoF, Fraction(args.weight), V, char, cusp=args.cusp)
    emit(val.to_json())


def cmd_qexp(args):
    from . import qseries as qs

    order = Fraction(args.order) if args.order is not None else Fraction(cfg.get_config().default_trunc)
    if args.kind == "eta":
        s = qs.eta_qexp(order)
    elif args.kind == "theta":
        s = qs.theta_odd(args.a, order)
    elif args.kind == "block":
        factors = [_int(x) for x in args.args.split(",")] if args.args else []
        s = qs.theta_block(args.eta, factors, order)
    elif args.kind == "theta-rho":
        if args.N is None or args.rho is None:
            raise ValidationError("theta-rho needs --N and --rho u,v")
        u, v = [_int(x) for x in args.rho.split(",")]
        s = qs.theta_rho(args.N, (u, v), order)
    elif args.kind == "lattice":
        if args.matrix is None or args.coset is None:
            raise ValidationError("lattice needs --matrix and --coset")
        s = qs.theta_lattice(read_matrix(args.matrix), [_int(x) for x in args.coset.split(",")], order)
    else:  # pragma: no cover - argparse restricts the choices
        raise ValidationError(f"unknown series {args.kind!r}")
    emit(s.to_json())


def cmd_verify(args):
    from .verify import SUITES, verify_suite

    names = sorted(SUITES) if args.name == "all" else [args.name]
    reports = [verify_suite(n) for n in names]
    code = max(r.exit_code for r in reports)
    if len(reports) == 1:
        emit(reports[0].to_json())
    else:
        emit({"exit_code": code, "suites": [r.to_json() for r in reports]})
    return code


def _apply_budget(items):
    if not items:
        return
    base = cfg.get_config().to_dict()
    for item in items:
        if "=" not in item:
            raise ValidationError(f"budget override must be key=value, got {item!r}")
        k, v = item.split("=", 1)
        base[k.strip()] = v
    cfg.set_config(cfg.Config.from_dict(base))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weilform", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config file (overrides $WEILFORM_CONFIG)")
    p.add_argument("--budget", action="append", metavar="KEY=VALUE", help="override one budget")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    f = sub.add_parser("fqm")
    f.add_argument("action", choices=["info"])
    f.add_argument("--spec", required=True)
    f.set_defaults(func=cmd_fqm)

    r = sub.add_parser("rep")
    r.add_argument("action", choices=["check"])
    r.add_argument("--spec", required=True)
    r.add_argument("--char", type=int)
    r.set_defaults(func=cmd_rep)

    i = sub.add_parser("inv")
    i.add_argument("--spec", required=True)
    i.add_argument("--project", choices=["even", "even-first", "odd", "odd-first-factor", "O-first"])
    i.add_argument("--selfdual-only", action="store_true")
    i.set_defaults(func=cmd_inv)

    d = sub.add_parser("dim")
    d.add_argument("what", choices=["critical", "formula", "halfweight"])
    d.add_argument("--matrix")
    d.add_argument("--char", type=int)
    d.add_argument("--gamma0", type=int, help="induce from Gamma_0(l)")
    d.add_argument("--eisenstein", action="store_true")
    d.add_argument("--m", type=int)
    d.add_argument("--weight")
    d.add_argument("--cusp", action="store_true")
    d.add_argument("--vectors", action="store_true", help="include invariant bases")
    d.set_defaults(func=cmd_dim)

    q = sub.add_parser("qexp")
    q.add_argument("kind", choices=["eta", "theta", "block", "theta-rho", "lattice"])
    q.add_argument("--order")
    q.add_argument("--a", type=int, default=1)
    q.add_argument("--eta", type=int, default=0)
    q.add_argument("--args", default="")
    q.add_argument("--N", type=int)
    q.add_argument("--rho")
    q.add_argument("--matrix")
    q.add_argument("--coset")
    q.set_defaults(func=cmd_qexp)

    v = sub.add_parser("verify")
    v.add_argument("name")
    v.set_defaults(func=cmd_verify)
    return p


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            cfg.set_config(cfg.load_config(args.config))
        _apply_budget(args.budget)
        code = args.func(args)
        return int(code or 0)
    except WeilformError as exc:
        log.error("%s", exc)
        return exc.exit_code
    finally:
        cfg.set_config(None)


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()

