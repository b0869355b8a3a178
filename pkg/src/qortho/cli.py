"""Command-line front end: evaluation, tabulation, verification sweeps and reports.

Exit status: 0 when every residual check is within tolerance, 1 when a
verification fails, 2 on a usage error (bad flag, unknown id, parameter
outside a domain, unwritable output).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import expansions, verification
from .kernels import densities, kibble, sums
from .polyfam import REQUIRED_PARAMS, Family, FamilySpec, coeffs, sequence
from .qcore import TruncationPolicy, support_radius

COMMANDS = ("eval", "coeffs", "table", "verify", "kernel", "density", "quadrature", "ks")
FORMATS = ("csv", "json")
REPORT_COLUMNS = ("identity_id", "param_json", "lhs", "rhs", "residual", "terms_used", "converged", "pass")


class UsageError(Exception):
    """Bad input: reported on stderr with exit status 2."""


@dataclass
class RunConfig:
    command: str
    target: str | None = None
    params: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output: str | None = None
    fmt: str = "csv"
    truncation: dict = field(default_factory=dict)
    seed: int = 0

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy.from_env(**self.truncation)


# ---------------------------------------------------------------- parsing helpers

def parse_number(text: str) -> Fraction:
    """'0.5', '1/3', '-2' or '1e-3' as an exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_number_list(text: str) -> list[Fraction]:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def parse_param(text: str) -> tuple[str, Fraction]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return name.strip(), parse_number(value)


def _num(v, exact: bool):
    return v if exact else float(v)


# ---------------------------------------------------------------- output

def _records_csv(records: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: _csv_cell(r[k]) for k in columns})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return v


def _records_json(records: list[dict]) -> str:
    return json.dumps(records, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def emit(records: list[dict], columns, cfg: RunConfig) -> None:
    text = _records_csv(records, columns) if cfg.fmt == "csv" else _records_json(records)
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {cfg.output}: {exc}") from None


# ---------------------------------------------------------------- commands

def _family_spec(cfg: RunConfig, exact: bool = False) -> FamilySpec:
    try:
        fam = Family(cfg.target)
    except ValueError:
        raise UsageError(f"unknown family {cfg.target!r}; known: {', '.join(f.value for f in Family)}") from None
    q = _num(cfg.params.pop("q", Fraction(1, 2)), exact)
    need = REQUIRED_PARAMS.get(fam, ())
    params = {k: _num(v, exact) for k, v in cfg.params.items() if k in need}
    extra = sorted(set(cfg.params) - set(need) - {"x", "n"})
    if extra:
        raise UsageError(f"{fam.value} takes parameters {list(need)}; unexpected {extra}")
    return FamilySpec.of(fam, q, **params)


def cmd_eval(cfg: RunConfig) -> int:
    n = int(cfg.params.pop("n"))
    x = float(cfg.params.pop("x"))
    spec = _family_spec(cfg)
    value = sequence(spec, n, x)[n]
    print(repr(float(np.real(value))))
    return 0


def _coeff_str(c) -> str:
    if isinstance(c, (Fraction, int)):
        return str(Fraction(c))
    return repr(float(c))


def cmd_coeffs(cfg: RunConfig) -> int:
    n = int(cfg.params.pop("n"))
    if cfg.target in expansions.REGISTRY:
        q = cfg.params.pop("q", Fraction(1, 2))
        info = expansions.REGISTRY[cfg.target]
        params = {k: v for k, v in cfg.params.items() if k in info.params}
        if info.kind == "connection":
            vec = expansions.connection_coeffs(cfg.target, n, params, q)
        else:
            m = int(cfg.params.get("m", n))
            idx = (n, m) if info.arity == 2 else (n, m, int(cfg.params.get("k", n)))
            vec = list(expansions.linearize(cfg.target, idx, params, q))
        records = [{"index": j, "coefficient": _coeff_str(c)} for j, c in enumerate(vec)]
        print(f"# basis: {info.basis}", file=sys.stderr)
    else:
        spec = _family_spec(cfg, exact=True)
        records = [{"index": j, "coefficient": _coeff_str(c)} for j, c in enumerate(coeffs(spec, n))]
    emit(records, ("index", "coefficient"), cfg)
    return 0


# families whose natural variable is x = cos(theta) in [-1, 1]
LOWER_CASE = {Family.Cheb_T, Family.Cheb_U, Family.qHermite_h, Family.bigqHermite_h, Family.ASC_Q, Family.ASC_p,
              Family.Ultra_C, Family.qInvHermite_b, Family.RogersSzego_s}


def cmd_table(cfg: RunConfig) -> int:
    n_max = int(cfg.sweep.get("n_max") or 5)
    points = int(cfg.sweep.get("points") or 11)
    spec = _family_spec(cfg)
    if spec.family in LOWER_CASE:
        r = 1.0
    elif spec.family is Family.Hermite_H:
        r = 4.0
    elif spec.family is Family.Hermite_h:
        r = 4.0 / 2**0.5
    else:
        r = support_radius(float(spec.q)) if abs(float(spec.q)) < 1 else 4.0
    lo = float(cfg.sweep["x_min"]) if cfg.sweep.get("x_min") is not None else -0.95 * r
    hi = float(cfg.sweep["x_max"]) if cfg.sweep.get("x_max") is not None else 0.95 * r
    xs = np.linspace(lo, hi, points)
    vals = sequence(spec, n_max, xs)
    cols = ["x"] + [f"P{j}" for j in range(n_max + 1)]
    records = [{"x": repr(float(x)), **{f"P{j}": repr(float(np.real(vals[j][i]))) for j in range(n_max + 1)}}
               for i, x in enumerate(xs)]
    emit(records, cols, cfg)
    return 0


KERNEL_TARGETS = ("PM", "PM_diag", *sums.KERNEL_KINDS, *sums.RECIPROCAL_KINDS)


def cmd_kernel(cfg: RunConfig) -> int:
    kind = cfg.target
    args = {k: float(v) for k, v in cfg.params.items()}
    pol = cfg.policy()
    if kind == "PM":
        res = sums.poisson_mehler(args.pop("x"), args.pop("y"), args.pop("rho"), args.pop("q", 0.5), pol)
    elif kind == "PM_diag":
        res = sums.poisson_mehler_diagonal_corollary(args.pop("x"), args.pop("rho"), args.pop("q", 0.5), pol)
    elif kind in sums.KERNEL_KINDS:
        res = sums.kernel_sum(kind, pol, **args)
    elif kind in sums.RECIPROCAL_KINDS:
        res = sums.reciprocal_expansion(kind, pol, **args)
    else:
        raise UsageError(f"unknown kernel {kind!r}; known: {', '.join(KERNEL_TARGETS)}")
    rec = {"kind": kind, "series": repr(float(res.series_value)), "closed": repr(float(res.closed_value)),
           "residual": repr(float(res.relative_residual)), "terms_used": res.terms_used,
           "converged": res.converged}
    emit([rec], list(rec), cfg)
    return 0


def cmd_density(cfg: RunConfig) -> int:
    kind = cfg.target
    if kind not in densities.DENSITY_KINDS:
        raise UsageError(f"unknown density {kind!r}; known: {', '.join(densities.DENSITY_KINDS)}")
    q = float(cfg.params.pop("q", Fraction(1, 2)))
    xs = cfg.sweep.get("x") or []
    spec = densities.DensitySpec.of(kind, q, **{k: float(v) for k, v in cfg.params.items()})
    pol = cfg.policy()
    records = [{"x": repr(float(x)), "density": repr(float(densities.density(spec, float(x), pol)))} for x in xs]
    if not records:
        res = densities.integrate(lambda X, c: np.ones_like(X), spec, pol)
        records = [{"x": "total", "density": repr(float(res.value))}]
    emit(records, ("x", "density"), cfg)
    return 0


def cmd_quadrature(cfg: RunConfig) -> int:
    fam = cfg.target
    if fam not in densities.PAIRINGS:
        raise UsageError(f"no orthogonality pairing for {fam!r}; known: {', '.join(densities.PAIRINGS)}")
    n_max = int(cfg.sweep.get("n_max") or 8)
    q = float(cfg.params.pop("q", Fraction(1, 2)))
    g = densities.gram_matrix(fam, n_max, q, {k: float(v) for k, v in cfg.params.items()} or None, cfg.policy())
    records = [{"n": n, "m": m, "integral": repr(float(g.gram[n, m])), "expected": repr(float(g.expected[n, m]))}
               for n in range(n_max + 1) for m in range(n_max + 1)]
    emit(records, ("n", "m", "integral", "expected"), cfg)
    ok = g.max_offdiag() < 1e-6 and g.max_rel_diag_error() < 1e-6
    return 0 if ok else 1


def cmd_ks(cfg: RunConfig) -> int:
    p = {k: float(v) for k, v in cfg.params.items()}
    q = p.pop("q", 0.5)
    pol = cfg.policy()
    if cfg.target == "search":
        pt = kibble.negativity_search(q=q, policy=pol)
        if pt is None:
            print("no negative value found", file=sys.stderr)
            return 1
        rec = {"value": repr(pt.confirmed.value), "rho12": pt.ks.rho12, "rho13": pt.ks.rho13, "rho23": pt.ks.rho23,
               "x1": pt.x[0], "x2": pt.x[1], "x3": pt.x[2], "gaussian_pd": pt.ks.gaussian_pd,
               "converged": pt.confirmed.converged}
        emit([rec], list(rec), cfg)
        return 0 if pt.confirmed.value < 0 else 1
    try:
        ks = kibble.KSParams(p.pop("rho12"), p.pop("rho13"), p.pop("rho23"))
        x = (p.pop("x1"), p.pop("x2"), p.pop("x3"))
    except KeyError as exc:
        raise UsageError(f"ks needs rho12, rho13, rho23, x1, x2, x3 (missing {exc})") from None
    reps = kibble.REPRESENTATIONS if cfg.target in (None, "all") else (cfg.target,)
    records = []
    for rep in reps:
        if rep not in kibble.REPRESENTATIONS:
            raise UsageError(f"unknown representation {rep!r}; known: {', '.join(kibble.REPRESENTATIONS)}")
        try:
            v = kibble.kibble_slepian(*x, ks, q, pol, rep)
        except sums.ConditioningError as exc:
            print(f"{rep}: {exc}", file=sys.stderr)
            records.append({"representation": rep, "value": "nan", "terms": 0, "converged": False})
            continue
        records.append({"representation": rep, "value": repr(float(v.value)), "terms": v.terms,
                        "converged": v.converged})
    emit(records, ("representation", "value", "terms", "converged"), cfg)
    return 0 if all(r["converged"] for r in records) else 1


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.sweep.get("all"):
        ids = verification.check_ids()
    elif cfg.target:
        ids = [cfg.target]
    else:
        raise UsageError("verify needs --identity ID or --all")
    unknown = [i for i in ids if i not in verification.CHECKS]
    if unknown:
        raise UsageError(f"unknown identity {unknown[0]!r}; known: {', '.join(verification.check_ids())}")
    rho = cfg.params.get("rho")
    sweep = verification.SweepConfig(
        n_max=cfg.sweep.get("n_max"), m_max=cfg.sweep.get("m_max"),
        q=tuple(cfg.sweep["q"]) if cfg.sweep.get("q") else None,
        rho=float(rho) if rho is not None else None, points=cfg.sweep.get("points"), seed=cfg.seed,
        policy=cfg.policy())
    t0 = time.perf_counter()
    rows = verification.run_checks(ids, sweep)
    emit([r.as_record() for r in rows], REPORT_COLUMNS, cfg)
    failed = sum(r.failed for r in rows)
    excluded = sum(r.passed == verification.EXCLUDED for r in rows)
    print(f"{len(rows)} rows, {failed} failed, {excluded} excluded ({time.perf_counter() - t0:.1f}s)",
          file=sys.stderr)
    return 1 if failed else 0


HANDLERS = {"eval": cmd_eval, "coeffs": cmd_coeffs, "table": cmd_table, "verify": cmd_verify, "kernel": cmd_kernel,
            "density": cmd_density, "quadrature": cmd_quadrature, "ks": cmd_ks}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit status."""
    try:
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, KeyError) as exc:
        # parameter outside a domain, missing kernel argument, ...
        print(f"error: {exc}", file=sys.stderr)
        return 2


# ---------------------------------------------------------------- argument parser

def _add_common(p: argparse.ArgumentParser, q_list: bool = False) -> None:
    if q_list:
        p.add_argument("--q", type=parse_number_list, help="comma-separated q values (exact decimals or a/b)")
    else:
        p.add_argument("--q", type=parse_number, help="the base q")
    p.add_argument("--param", "-p", action="append", type=parse_param, default=[], metavar="NAME=VALUE",
                   help="family/kernel parameter (repeatable)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")
    g = p.add_argument_group("truncation")
    g.add_argument("--max-terms", type=int, help="series term cap (overrides QORTHO_MAX_TERMS)")
    g.add_argument("--abs-tol", type=float)
    g.add_argument("--rel-tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qortho", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate P_n(x) of a family")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=parse_number, required=True)
    _add_common(p)

    p = sub.add_parser("coeffs", help="monomial coefficients of a family, or an identity's coefficients")
    t = p.add_mutually_exclusive_group(required=True)
    t.add_argument("--family")
    t.add_argument("--identity")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    _add_common(p)

    p = sub.add_parser("table", help="tabulate P_0..P_n on a grid")
    p.add_argument("--family", required=True)
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    _add_common(p)

    p = sub.add_parser("verify", help="run verification sweeps and write a report")
    t = p.add_mutually_exclusive_group(required=True)
    t.add_argument("--identity")
    t.add_argument("--all", action="store_true")
    p.add_argument("--n-max", type=int)
    p.add_argument("--m-max", type=int)
    p.add_argument("--rho", type=parse_number)
    p.add_argument("--points", type=int, help="random points per sweep case")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, q_list=True)

    p = sub.add_parser("kernel", help="a kernel series against its closed form")
    p.add_argument("--kind", required=True, help=", ".join(KERNEL_TARGETS))
    _add_common(p)

    p = sub.add_parser("density", help="density values, or its total mass when no --x is given")
    p.add_argument("--kind", required=True, help=", ".join(densities.DENSITY_KINDS))
    p.add_argument("--x", type=parse_number, action="append")
    _add_common(p)

    p = sub.add_parser("quadrature", help="Gram matrix of a family against its density")
    p.add_argument("--family", required=True)
    p.add_argument("--n-max", type=int, default=8)
    _add_common(p)

    p = sub.add_parser("ks", help="the q-Kibble-Slepian sum g(x1, x2, x3)")
    p.add_argument("--representation", default="all", help="all, search, " + ", ".join(kibble.REPRESENTATIONS))
    _add_common(p)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = dict(ns.param)
    if ns.q is not None and not isinstance(ns.q, list):
        params["q"] = ns.q
    for name in ("n", "x", "m", "k"):
        v = getattr(ns, name, None)
        if v is not None and not isinstance(v, list):
            params[name] = v
    if getattr(ns, "rho", None) is not None:
        params["rho"] = ns.rho
    target = (getattr(ns, "family", None) or getattr(ns, "identity", None) or getattr(ns, "kind", None)
              or getattr(ns, "representation", None))
    sweep = {k: getattr(ns, k, None) for k in ("n_max", "m_max", "points", "x_min", "x_max", "all")}
    if isinstance(ns.q, list):
        sweep["q"] = ns.q
    if ns.command == "density":
        sweep["x"] = ns.x
    trunc = {"max_terms": ns.max_terms, "abs_tol": ns.abs_tol, "rel_tol": ns.rel_tol}
    return RunConfig(ns.command, target, params, sweep, ns.out, ns.format,
                     {k: v for k, v in trunc.items() if v is not None}, getattr(ns, "seed", 0))


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
