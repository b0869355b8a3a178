"""Verification sweeps: every identity, kernel and integral relation of the
package as a named check producing report rows.

A check is a function ``(config, rng) -> list[Row]``. Rows carry both sides of
the relation, a residual (relative unless the check says otherwise), the
number of series terms and a pass flag against the check's tolerance. Points
that trip a pole guard or a conditioning guard are kept as rows with
``passed = "excluded"`` so that nothing is skipped silently.

Random points are drawn uniformly from the interior 95% of S(q) (of [-1, 1]
for lower-case families; of [-3.8, 3.8] at q = 1). Each check has its own
generator seeded from ``(seed, check id)``, so a sweep is reproducible and
independent of which other checks run alongside it.
"""

from __future__ import annotations

import itertools
import json
import math
import zlib
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from . import expansions
from .kernels import densities, kibble, sums
from .polyfam import RESCALE_PAIRS, FamilySpec, R, T, generating_partial_sum, rescale_check
from .qcore import (DEFAULT_POLICY, TruncationPolicy, aux_product, product_identity_check, q_pochhammer, q_pochhammer_inf,
                    support_radius)
from .qhyper import PhiSpec, PoleError, phi

EXCLUDED = "excluded"


@dataclass(frozen=True)
class Row:
    identity_id: str
    params: dict
    lhs: float
    rhs: float
    residual: float
    terms_used: int
    converged: bool
    passed: bool | str

    @property
    def param_json(self) -> str:
        return json.dumps(_jsonable(self.params), sort_keys=True, separators=(",", ":"))

    @property
    def failed(self) -> bool:
        return self.passed is False

    def as_record(self) -> dict:
        return {"identity_id": self.identity_id, "param_json": self.param_json, "lhs": _fmt(self.lhs),
                "rhs": _fmt(self.rhs), "residual": _fmt(self.residual), "terms_used": int(self.terms_used),
                "converged": bool(self.converged),
                "pass": self.passed if isinstance(self.passed, str) else bool(self.passed)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    return v


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    v = float(v)
    return repr(v) if math.isfinite(v) else str(v)


@dataclass(frozen=True)
class SweepConfig:
    """Overrides for a sweep; ``None`` keeps each check's defaults."""

    n_max: int | None = None
    m_max: int | None = None
    q: tuple | None = None
    rho: float | None = None
    points: int | None = None
    seed: int = 0
    policy: TruncationPolicy = field(default_factory=TruncationPolicy.from_env)

    def qs(self, default) -> tuple:
        return tuple(self.q) if self.q is not None else tuple(default)

    def npts(self, default: int) -> int:
        return self.points if self.points is not None else default


@dataclass(frozen=True)
class Check:
    identity_id: str
    run: Callable[[SweepConfig, np.random.Generator], list]
    tol: float
    description: str


def _rng(cfg: SweepConfig, identity_id: str) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, zlib.crc32(identity_id.encode())])


def interior_points(rng: np.random.Generator, q, count: int, dim: int = 1, lower: bool = False) -> np.ndarray:
    """Uniform points from the interior 95% of S(q) (or of [-1, 1] when ``lower``)."""
    if lower:
        r = 1.0
    elif float(q) == 1:
        r = 4.0
    else:
        r = support_radius(float(q))
    return rng.uniform(-0.95 * r, 0.95 * r, size=(count, dim))


def _row(iid, params, lhs, rhs, residual, terms, converged, tol, require_converged=True) -> Row:
    ok = bool(residual <= tol) and (converged or not require_converged)
    return Row(iid, params, lhs, rhs, float(residual), int(terms), bool(converged), ok)


def _excluded(iid, params, reason: str) -> Row:
    return Row(iid, {**params, "excluded": reason}, math.nan, math.nan, math.nan, 0, False, EXCLUDED)


def _rel(a, b) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _q_list(qs) -> list:
    return [Fraction(q) if isinstance(q, Fraction) else q for q in qs]


# ---------------------------------------------------------------- finite identities

EXACT_Q = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
POINT_Q = (-0.5, 0.9)


def _is_exact(q) -> bool:
    return isinstance(q, (Fraction, int))


def _expansion_check(iid: str) -> Check:
    info = expansions.REGISTRY[iid]

    def run(cfg, rng):
        n_max = cfg.n_max if cfg.n_max is not None else 8
        m_max = cfg.m_max if cfg.m_max is not None else n_max
        ranges = [range(n_max + 1)] + [range(m_max + 1)] * (info.arity - 1)
        grid = list(itertools.product(*ranges))
        rows = []
        for q in cfg.qs(EXACT_Q + POINT_Q):
            if _is_exact(q):
                q = Fraction(q)
                ctx = expansions._Context(q)
                for idx in grid:
                    rep = expansions.verify_exact(iid, idx, None, q, ctx=ctx)
                    # both sides are exact polynomials; report their values at x = 1/3
                    probe = Fraction(1, 3)
                    rows.append(_row(iid, {"indices": list(idx), "q": q, "mode": "exact"},
                                     _poly_at(rep.lhs, probe), _poly_at(rep.rhs, probe), rep.residual,
                                     0, True, 0.0))
            else:
                q = float(q)
                lower = info.variable == "u"
                for x in interior_points(rng, q, 2, lower=lower)[:, 0]:
                    for idx in grid:
                        rep = expansions.verify_point(iid, idx, None, q, float(x))
                        rows.append(_row(iid, {"indices": list(idx), "q": q, "x": float(x), "mode": "point"},
                                         rep.lhs, rep.rhs, rep.residual, 0, True, 1e-9))
        return rows

    return Check(iid, run, 0.0, f"{info.kind} identity {iid} (exact at rational q, pointwise at float q)")


def _poly_at(p, x):
    return float(p(x)) if callable(p) else float(p)


def _annihilation(cfg, rng):
    n_max = cfg.n_max if cfg.n_max is not None else 8
    m_max = cfg.m_max if cfg.m_max is not None else n_max
    rows = []
    for q in cfg.qs(EXACT_Q):
        for x in (Fraction(1, 3), Fraction(-5, 4)) if _is_exact(q) else interior_points(rng, q, 2)[:, 0]:
            q_ = Fraction(q) if _is_exact(q) else float(q)
            x = x if _is_exact(q) else float(x)
            for n in range(n_max + 1):
                for m in range(m_max + 1):
                    lhs = expansions.annihilation_sum(n, m, q_, x)
                    rhs = expansions.annihilation_closed_form(n, m, q_, x)
                    tol = 0.0 if _is_exact(q) else 1e-9
                    rows.append(_row("annihilation", {"n": n, "m": m, "q": q_, "x": x}, lhs, rhs,
                                     _rel(lhs, rhs), 0, True, tol))
    return rows


# ---------------------------------------------------------------- q-primitives and families

def _products(cfg, rng):
    rows = []
    for q in cfg.qs((-0.5, 0.0, 0.3, 0.6, 0.9)):
        q = float(q)
        for x, y in interior_points(rng, q, 5, 2, lower=True):
            a = t = 0.6
            for which, args in (("rozklv", ("v", x, a)), ("rozklw", ("w", x, y, t)), ("rozkll", ("l", x, a))):
                res = product_identity_check(which, float(x), float(y), a=a, t=t, q=q, policy=cfg.policy)
                val = aux_product(args[0], *(float(v) for v in args[1:]), q=q, policy=cfg.policy)
                rows.append(_row("products", {"which": which, "q": q, "x": float(x), "y": float(y), "a": a,
                                              "t": t}, val, val, res / max(1.0, abs(val)), 0, True, 1e-10))
    return rows


def _phi_qbinomial(cfg, rng):
    """1phi0(a; -; q, z) = (az)_inf / (z)_inf."""
    rows = []
    for q in cfg.qs((-0.5, 0.3, 0.6, 0.9)):
        q = float(q)
        for a, z in rng.uniform(-0.8, 0.8, size=(cfg.npts(10), 2)):
            a, z = float(a), float(z)
            res = phi(PhiSpec([a], [], q, z), cfg.policy)
            closed = q_pochhammer_inf(a * z, q, cfg.policy) / q_pochhammer_inf(z, q, cfg.policy)
            rows.append(_row("phi_qbinomial", {"a": a, "z": z, "q": q}, res.value.real, closed,
                             _rel(res.value.real, closed), res.terms, res.converged, 1e-10))
    return rows


def _rescale(cfg, rng):
    params = {"h-H": {}, "b-B": {}, "Q-P": {"y": 0.7, "rho": 0.5}, "p-P": {"y": 0.7, "rho": 0.5}, "C-R": {"beta": 0.3}}
    n_max = cfg.n_max if cfg.n_max is not None else 8
    rows = []
    for q in cfg.qs((-0.5, 0.3, 0.6, 0.9)):
        q = float(q)
        for pair in RESCALE_PAIRS:
            for x in interior_points(rng, q, 2)[:, 0]:
                for n in range(n_max + 1):
                    res = rescale_check(pair, n, float(x), q, **params[pair])
                    rows.append(_row("rescale", {"pair": pair, "n": n, "q": q, "x": float(x), **params[pair]},
                                     res, 0.0, res, 0, True, 1e-9))
    return rows


GENERATING_CASES = (
    ("qHermite_H", {}, False), ("qHermite_h", {}, True), ("bigqHermite_H", {"a": 0.4}, False),
    ("ASC_P", {"y": 0.7, "rho": 0.5}, False), ("Ultra_R", {"beta": 0.3}, False), ("Cheb_U", {}, True),
    ("Cheb_T", {}, True),
)


def _generating(cfg, rng):
    rows = []
    for q in cfg.qs((-0.5, 0.3, 0.6)):
        q = float(q)
        for fam, prm, lower in GENERATING_CASES:
            spec = FamilySpec.of(fam, q, **prm)
            for (x,) in interior_points(rng, q, 3, lower=lower):
                t = 0.3
                g = generating_partial_sum(spec, float(x), t, 200, cfg.policy)
                rows.append(_row("generating", {"family": fam, "q": q, "x": float(x), "t": t, **prm},
                                 g.partial, g.closed, _rel(g.partial, g.closed), 200, not g.diverging, 1e-9))
    return rows


# ---------------------------------------------------------------- densities and orthogonality

ORTHO_Q = (-0.5, 0.0, 0.5, 0.9)


def _orthogonality(cfg, rng):
    n_max = cfg.n_max if cfg.n_max is not None else 8
    rows = []
    for fam in densities.PAIRINGS:
        for q in cfg.qs(ORTHO_Q):
            q = float(q)
            g = densities.gram_matrix(fam, n_max, q, policy=cfg.policy)
            for n in range(n_max + 1):
                for m in range(n_max + 1):
                    got, want = float(g.gram[n, m]), float(g.expected[n, m])
                    res = abs(got - want) / abs(want) if n == m else abs(got)
                    rows.append(_row("orthogonality", {"family": fam, "q": q, "n": n, "m": m}, got, want, res,
                                     g.nodes, g.converged, 1e-6))
    return rows


def _density_norm(cfg, rng):
    cases = (("fN", {}), ("fbN", {"a": 0.4}), ("fCN", {"y": 0.7, "rho": 0.5}), ("fR", {"beta": 0.3}))
    rows = []
    for q in cfg.qs((-0.5, 0.0, 0.5, 0.9, 1)):
        q = float(q)
        for kind, prm in cases:
            if kind == "fR" and q == 1:
                continue
            spec = densities.DensitySpec.of(kind, q, **prm)
            res = densities.integrate(lambda X, c: np.ones_like(X), spec, cfg.policy)
            rows.append(_row("density_norm", {"density": kind, "q": q, **prm}, res.value, 1.0,
                             abs(res.value - 1), res.nodes, res.converged, 1e-10))
    return rows


def _density_q0(cfg, rng):
    xs = np.linspace(-1.9, 1.9, 39)
    f = densities.density(densities.DensitySpec.of("fN", 0.0), xs)
    c = f / np.sqrt(4 - xs * xs)
    want = 1 / (2 * math.pi)
    return [_row("density_q0", {"x": float(x)}, float(ci), want, abs(ci - want) / want, 0, True, 1e-6)
            for x, ci in zip(xs, c)]


def _limit_q(cfg, rng):
    xs = np.linspace(-3, 3, 121)
    pol = replace(cfg.policy, max_terms=max(cfg.policy.max_terms, 100000))
    f = densities.density(densities.DensitySpec.of("fN", 0.999), xs, pol)
    g = np.exp(-xs * xs / 2) / math.sqrt(2 * math.pi)
    i = int(np.argmax(np.abs(f - g)))
    return [_row("limit_q", {"q": 0.999, "x_worst": float(xs[i]), "grid": "[-3,3]x121"}, float(f[i]), float(g[i]),
                 float(np.max(np.abs(f - g))), 0, True, 0.02)]


def ultraspherical_limit_error(n: int, q, beta: float = 1 - 1e-6, points: int = 41) -> tuple[float, float, float]:
    """Relative sup-norm distance on the interior 95% of S(q) between R_n(x|beta,q)/(beta)_n
    and 2 T_n(x sqrt(1-q)/2)/(1-q)^(n/2); returns (error, lhs, rhs) at the worst point."""
    s = math.sqrt(1 - q)
    xs = np.linspace(-0.95, 0.95, points) * 2 / s
    lhs = np.array([R(n, x, beta, q) for x in xs]) / q_pochhammer(beta, q, n)
    rhs = np.array([2 * T(n, x * s / 2) for x in xs]) / (1 - q) ** (n / 2)
    i = int(np.argmax(np.abs(lhs - rhs)))
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))), float(lhs[i]), float(rhs[i])


def _limit_beta(cfg, rng):
    n_max = cfg.n_max if cfg.n_max is not None else 8
    rows = []
    for q in cfg.qs((-0.5, 0.0, 0.5, 0.9)):
        for n in range(1, n_max + 1):
            err, lhs, rhs = ultraspherical_limit_error(n, float(q))
            rows.append(_row("limit_beta", {"n": n, "q": float(q), "beta": 1 - 1e-6}, lhs, rhs, err, 0, True, 1e-4))
    return rows


def _chapman_kolmogorov(cfg, rng):
    rows = []
    for q in cfg.qs((-0.5, 0.0, 0.5, 0.9)):
        q = float(q)
        for x, z in interior_points(rng, q, cfg.npts(3), 2):
            for r1, r2 in ((0.5, 0.6), (-0.4, 0.7)):
                res = densities.chapman_kolmogorov_check(float(x), float(z), r1, r2, q, cfg.policy)
                rows.append(_row("chapman_kolmogorov", {"q": q, "x": float(x), "z": float(z), "rho1": r1,
                                                        "rho2": r2}, res, 0.0, res, 0, True, 1e-8))
    return rows


def _eigen(cfg, rng):
    n_max = min(cfg.n_max if cfg.n_max is not None else 6, 6)
    rows = []
    for q in cfg.qs((-0.5, 0.0, 0.5, 0.9, 1)):
        q = float(q)
        rho = cfg.rho if cfg.rho is not None else 0.4
        for (y,) in interior_points(rng, q, 2):
            for n in range(1, n_max + 1):
                r = densities.eigen_integral_checks(n, float(y), rho, q, cfg.policy)
                for part, res, val, want in (("hermite", r.hermite, r.hermite_value, r.hermite_expected),
                                             ("asc", r.asc, r.asc_value, r.asc_expected)):
                    rows.append(_row("eigen", {"part": part, "n": n, "q": q, "y": float(y), "rho": rho},
                                     val, want, res, 0, True, 1e-5))
    return rows


# ---------------------------------------------------------------- kernels

KERNEL_Q = (-0.5, 0.0, 0.3, 0.6, 0.9)
RHO_GRID = (-0.7, -0.35, 0.35, 0.7)


def _kernel_row(iid, params, res: sums.KernelResult, tol) -> Row:
    return _row(iid, params, res.series_value, res.closed_value, res.relative_residual, res.terms_used,
                res.converged, tol)


def _pm(cfg, rng):
    rows = []
    rhos = (cfg.rho,) if cfg.rho is not None else RHO_GRID
    for q in cfg.qs(KERNEL_Q + (1,)):
        q = float(q)
        tol = 1e-10 if q == 1 else 1e-8
        for rho in rhos:
            for x, y in interior_points(rng, q, cfg.npts(25), 2):
                res = sums.poisson_mehler(float(x), float(y), rho, q, cfg.policy)
                rows.append(_kernel_row("PM", {"q": q, "rho": rho, "x": float(x), "y": float(y)}, res, tol))
    return rows


def _pm_diag(cfg, rng):
    rows = []
    rhos = (cfg.rho,) if cfg.rho is not None else RHO_GRID
    for q in cfg.qs(KERNEL_Q):
        q = float(q)
        for rho in rhos:
            for (x,) in interior_points(rng, q, cfg.npts(10)):
                res = sums.poisson_mehler_diagonal_corollary(float(x), rho, q, cfg.policy)
                rows.append(_kernel_row("PM_diag", {"q": q, "rho": rho, "x": float(x)}, res, 1e-8))
    return rows


def _cheb_i(cfg, rng):
    rows = []
    for t in RHO_GRID:
        for x, y in rng.uniform(-1.9, 1.9, size=(cfg.npts(25), 2)):
            res = sums.kernel_sum("cheb_i", cfg.policy, x=float(x), y=float(y), t=t)
            rows.append(_kernel_row("cheb_i", {"t": t, "x": float(x), "y": float(y)}, res, 1e-7))
    return rows


def _ascP_v(cfg, rng):
    rows = []
    for q in cfg.qs(KERNEL_Q):
        q = float(q)
        for x, y, z in interior_points(rng, q, cfg.npts(25), 3):
            r1, r2 = (float(v) for v in rng.uniform(0.1, 0.7, 2) * rng.choice([-1, 1], 2))
            prm = {"x": float(x), "y": float(y), "z": float(z), "rho1": r1, "rho2": r2, "q": q}
            rows.append(_kernel_row("ascP_v", prm, sums.kernel_sum("ascP_v", cfg.policy, **prm), 1e-7))
    return rows


def _bigH_corollary(cfg, rng):
    rows = []
    for q in cfg.qs(KERNEL_Q):
        q = float(q)
        for x, y in interior_points(rng, q, cfg.npts(25), 2):
            a = float(rng.uniform(0.2, 0.9) * rng.choice([-1, 1]))
            b = float(a * rng.uniform(-0.7, 0.7))
            prm = {"x": float(x), "y": float(y), "a": a, "b": b, "q": q}
            rows.append(_kernel_row("bigH_corollary", prm, sums.kernel_sum("bigH_corollary", cfg.policy, **prm),
                                    1e-7))
    return rows


def _sample_ultra_ii(rng, q):
    x, y = rng.uniform(-0.95, 0.95, 2)
    return {"x": float(x), "y": float(y), "beta": float(rng.uniform(-0.7, 0.7)), "t": float(rng.uniform(-0.7, 0.7)),
            "q": q}


def _sample_bigH_iii(rng, q):
    x, y = rng.uniform(-0.95, 0.95, 2)
    a = float(rng.uniform(0.3, 0.9) * rng.choice([-1, 1]))
    b = float(rng.uniform(-0.7, 0.7))
    t = float(rng.uniform(-0.7, 0.7))
    return {"x": float(x), "y": float(y), "a": a, "b": b, "t": t, "q": q}


def _sample_ascQ(rng, q):
    x, y = rng.uniform(-0.95, 0.95, 2)
    a = float(rng.uniform(0.3, 0.8) * rng.choice([-1, 1]))
    b = float(rng.uniform(-0.7, 0.7))
    alpha = float(rng.uniform(0.3, 0.8) * rng.choice([-1, 1]))
    t = float(rng.uniform(-0.5, 0.5))
    return {"x": float(x), "y": float(y), "a": a, "b": b, "alpha": alpha, "t": t, "q": q}


HYPER_KERNELS = {"ultra_ii": _sample_ultra_ii, "bigH_iii": _sample_bigH_iii, "ascQ_iv_a": _sample_ascQ,
                 "ascQ_iv_b": _sample_ascQ}
HYPER_Q = (-0.5, 0.3, 0.6, 0.9)


def hyper_kernel_rows(kind: str, cfg: SweepConfig, rng, per_q: int) -> list[Row]:
    """``per_q`` convergent points of a phi/W closed form per q; guarded points become excluded rows.

    Sampling stops after 20 * per_q draws per q, whatever the yield.
    """
    sampler = HYPER_KERNELS[kind]
    rows = []
    for q in cfg.qs(HYPER_Q):
        q = float(q)
        good = 0
        for _ in range(20 * per_q):
            if good >= per_q:
                break
            prm = sampler(rng, q)
            try:
                res = sums.kernel_sum(kind, cfg.policy, **prm)
            except ValueError as exc:  # outside the kernel's stated domain: redraw
                if "need" in str(exc):
                    continue
                raise
            except (PoleError, sums.ConditioningError, ArithmeticError) as exc:
                rows.append(_excluded(kind, prm, type(exc).__name__))
                continue
            if not res.converged:
                rows.append(_excluded(kind, prm, "unconverged"))
                continue
            good += 1
            rows.append(_kernel_row(kind, prm, res, 1e-5))
    return rows


def _hyper(kind):
    return lambda cfg, rng: hyper_kernel_rows(kind, cfg, rng, cfg.npts(15))


RECIP_TOL = 1e-6
RECIP_II_RHO = (-0.6, -0.3, 0.3, 0.6)


def _recip_row(kind, prm, policy) -> Row:
    try:
        res = sums.reciprocal_expansion(kind, policy, **prm)
    except sums.ConditioningError:
        return _excluded(kind, prm, "ConditioningError")
    prod = res.series_value / res.closed_value  # kernel series * reciprocal expansion
    return _row(kind, prm, prod, 1.0, abs(prod - 1), res.terms_used, res.converged, RECIP_TOL)


def _recip(kind):
    def run(cfg, rng):
        rows = []
        rhos = (cfg.rho,) if cfg.rho is not None else RHO_GRID
        if kind == "recip_ii_q1":
            # the expansion converges like (rho^2/(1-rho^2))^(n/2): 0.98^n at rho = 0.7, hence |rho| <= 0.6
            pol = replace(cfg.policy, max_terms=max(cfg.policy.max_terms, 5000))
            for rho in ((cfg.rho,) if cfg.rho is not None else RECIP_II_RHO):
                if rho * rho >= 0.5:
                    continue
                for x, y in interior_points(rng, 1, cfg.npts(10), 2):
                    rows.append(_recip_row(kind, {"x": float(x), "y": float(y), "rho": rho}, pol))
            return rows
        for q in cfg.qs(KERNEL_Q):
            q = float(q)
            for rho in rhos:
                for x, y, z in interior_points(rng, q, cfg.npts(10), 3):
                    if kind == "recip_i":
                        prm = {"x": float(x), "y": float(y), "rho": rho, "q": q}
                    elif kind == "recip_iii":
                        b = float(rng.uniform(0.4, 0.9) * rng.choice([-1, 1]))
                        prm = {"x": float(x), "y": float(y), "a": rho * abs(b) * 0.99, "b": b, "q": q}
                    else:
                        r2 = float(rng.uniform(0.1, 0.7) * rng.choice([-1, 1]))
                        prm = {"x": float(x), "y": float(y), "z": float(z), "rho1": rho, "rho2": r2, "q": q}
                    rows.append(_recip_row(kind, prm, cfg.policy))
        return rows

    return run


def _gamma_q(cfg, rng):
    rows = []
    mk = cfg.n_max if cfg.n_max is not None else 4
    rhos = (cfg.rho,) if cfg.rho is not None else (-0.6, 0.5)
    for q in cfg.qs(KERNEL_Q):
        q = float(q)
        for rho in rhos:
            for x, y in interior_points(rng, q, cfg.npts(2), 2):
                x, y = float(x), float(y)
                g00, ok0 = sums.gamma_mk(0, 0, x, y, rho, q, cfg.policy)
                for m in range(mk + 1):
                    for k in range(mk + 1):
                        g, ok = sums.gamma_mk(m, k, x, y, rho, q, cfg.policy)
                        rhs = g00 * sums.Q_mk(m, k, x, y, rho, q)
                        rows.append(_row("gamma_Q", {"m": m, "k": k, "q": q, "rho": rho, "x": x, "y": y}, g, rhs,
                                         _rel(g, rhs), 0, ok and ok0, 1e-7))
    return rows


def _q_symmetry(cfg, rng):
    """Q_{m,k}(x,y) gamma_{0,0}(x,y) = gamma_{m,k}(x,y) = gamma_{k,m}(y,x) = Q_{k,m}(y,x) gamma_{0,0}(y,x)."""
    rows = []
    mk = cfg.n_max if cfg.n_max is not None else 4
    for q in cfg.qs(KERNEL_Q):
        q = float(q)
        rho = cfg.rho if cfg.rho is not None else 0.5
        for x, y in interior_points(rng, q, cfg.npts(2), 2):
            x, y = float(x), float(y)
            for m in range(mk + 1):
                for k in range(mk + 1):
                    a, b = sums.Q_mk(m, k, x, y, rho, q), sums.Q_mk(k, m, y, x, rho, q)
                    rows.append(_row("Q_symmetry", {"m": m, "k": k, "q": q, "rho": rho, "x": x, "y": y}, a, b,
                                     _rel(a, b), 0, True, 1e-9))
    return rows


def _c_n(cfg, rng):
    rows = []
    n_max = cfg.n_max if cfg.n_max is not None else 6
    for q in cfg.qs(KERNEL_Q):
        q = float(q)
        for x, y in interior_points(rng, q, cfg.npts(2), 2):
            r1, r2, r3 = (float(v) for v in rng.uniform(-0.7, 0.7, 3))
            for n in range(n_max + 1):
                a = sums.C_n_aux(n, float(x), float(y), r1, r2, r3, q, form="lemma")
                b = sums.C_n_aux(n, float(x), float(y), r1, r2, r3, q, form="definition")
                rows.append(_row("C_n", {"n": n, "q": q, "x": float(x), "y": float(y), "rho1": r1, "rho2": r2,
                                         "rho3": r3}, a, b, _rel(a, b), 0, True, 1e-9))
    return rows


def _carlitz(cfg, rng):
    rows = []
    mn = cfg.n_max if cfg.n_max is not None else 3
    for q in cfg.qs(KERNEL_Q):
        q = float(q)
        for x, y in interior_points(rng, q, cfg.npts(2), 2, lower=True):
            t = float(rng.uniform(-0.7, 0.7))
            for m in range(mn + 1):
                for n in range(mn + 1):
                    r = sums.carlitz_bilinear_check(m, n, float(x), float(y), t, q, cfg.policy)
                    scale = max(1.0, abs(r.lhs))
                    for part, res in (("suma_h", r.suma_h), ("upr_car", r.upr_car)):
                        rows.append(_row("carlitz", {"part": part, "m": m, "n": n, "q": q, "t": t, "x": float(x),
                                                     "y": float(y)}, res, 0.0, res / scale, 0, True, 1e-7))
    return rows


# ---------------------------------------------------------------- Kibble-Slepian

KS_Q = (0.0, 0.5)


def ks_agreement_rows(cfg: SweepConfig, rng, count: int) -> list[Row]:
    rows = []
    for q in cfg.qs(KS_Q):
        q = float(q)
        for _ in range(count):
            ks = kibble.KSParams(*(float(v) for v in rng.uniform(-0.6, 0.6, 3)))
            x1, x2, x3 = (float(v) for v in interior_points(rng, q, 1, 3)[0])
            vals = {rep: kibble.kibble_slepian(x1, x2, x3, ks, q, cfg.policy, rep) for rep in kibble.REPRESENTATIONS}
            v = [vals[r].value for r in kibble.REPRESENTATIONS]
            scale = max(1.0, *(abs(a) for a in v))
            res = max(abs(a - b) for a, b in itertools.combinations(v, 2)) / scale
            prm = {"q": q, "rho12": ks.rho12, "rho13": ks.rho13, "rho23": ks.rho23, "x": [x1, x2, x3],
                   "theorem_ii": float(v[2])}
            # the direct sum's majorant flag is conservative; the representations must agree regardless
            rows.append(_row("KS", prm, v[0], v[1], res, max(vals[r].terms for r in vals),
                             all(vals[r].converged for r in vals), 1e-5, require_converged=False))
    return rows


def _ks(cfg, rng):
    return ks_agreement_rows(cfg, rng, cfg.npts(8))


def _ks_finite(cfg, rng):
    rows = []
    for q in cfg.qs((0.3, 0.5)):
        q = float(q)
        for m in range(4):
            for r13, r23 in ((0.6, -0.5), (-0.4, 0.7)):
                got = kibble.finite_sum_terms(m, r13, r23, q)
                rows.append(_row("KS_finite", {"m": m, "q": q, "rho13": r13, "rho23": r23}, got, m + 1,
                                 abs(got - (m + 1)), got, True, 0))
    return rows


def _ks_negative(cfg, rng):
    q = float(cfg.qs((0.5,))[0])
    pt = kibble.negativity_search(q=q, policy=cfg.policy)
    if pt is None:
        return [Row("KS_negative", {"q": q}, math.nan, 0.0, math.nan, 0, False, False)]
    v = pt.confirmed.value
    prm = {"q": q, "rho12": pt.ks.rho12, "rho13": pt.ks.rho13, "rho23": pt.ks.rho23, "x": list(pt.x),
           "gaussian_pd": pt.ks.gaussian_pd}
    ok = v < 0 and pt.ks.gaussian_pd and pt.confirmed.converged
    return [Row("KS_negative", prm, v, 0.0, max(v, 0.0), pt.confirmed.terms, pt.confirmed.converged, ok)]


def ks_pm_reduction(x1, x2, rho12, rho13, q, policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[float, float, bool]:
    """int g(x1, x2, x3 | rho12, rho13, 0) f_N(x3) dx3 against the Poisson-Mehler kernel at (x1, x2, rho12)."""
    ks = kibble.KSParams(rho12, rho13, 0.0)
    spec = densities.DensitySpec.of("fN", q)
    r = support_radius(q)

    def g(X, c):
        return np.array([kibble.kibble_slepian(x1, x2, min(max(float(x), -r * 0.999999), r * 0.999999), ks, q,
                                               policy).value for x in X])

    res = densities.integrate(g, spec, policy, tol=1e-9, n_start=16, n_max=256)
    pm = sums.poisson_mehler(x1, x2, rho12, q, policy)
    return float(res.value), pm.series_value, res.converged


def _ks_pm(cfg, rng):
    rows = []
    for q in cfg.qs(KS_Q):
        q = float(q)
        for x1, x2 in interior_points(rng, q, cfg.npts(2), 2):
            r12, r13 = (float(v) for v in rng.uniform(-0.6, 0.6, 2))
            val, pm, ok = ks_pm_reduction(float(x1), float(x2), r12, r13, q, cfg.policy)
            rows.append(_row("KS_PM", {"q": q, "x1": float(x1), "x2": float(x2), "rho12": r12, "rho13": r13,
                                       "rho23": 0.0}, val, pm, _rel(val, pm), 0, ok, 1e-4))
    return rows


# ---------------------------------------------------------------- registry

def _checks() -> dict[str, Check]:
    out = {iid: _expansion_check(iid) for iid in expansions.identity_ids()}
    more = [
        Check("annihilation", _annihilation, 0.0, "sum_k [n,k] B_{n-k} H_{k+m} closed form"),
        Check("products", _products, 1e-10, "q-Pochhammer factorizations of v, w, l"),
        Check("phi_qbinomial", _phi_qbinomial, 1e-10, "1phi0 against the q-binomial theorem"),
        Check("rescale", _rescale, 1e-9, "upper/lower-case rescaling of each family pair"),
        Check("generating", _generating, 1e-9, "generating functions against closed forms"),
        Check("orthogonality", _orthogonality, 1e-6, "Gram matrices against stated norms"),
        Check("density_norm", _density_norm, 1e-10, "densities integrate to one"),
        Check("density_q0", _density_q0, 1e-6, "f_N(x|0) = sqrt(4-x^2)/(2 pi)"),
        Check("limit_q", _limit_q, 0.02, "f_N(x|0.999) against the standard normal density"),
        Check("limit_beta", _limit_beta, 1e-4, "R_n(x|beta,q)/(beta)_n as beta -> 1"),
        Check("chapman_kolmogorov", _chapman_kolmogorov, 1e-8, "f_CN semigroup property"),
        Check("eigen", _eigen, 1e-5, "eigen-integrals of f_CN"),
        Check("PM", _pm, 1e-8, "Poisson-Mehler series against product (Gaussian form at q = 1)"),
        Check("PM_diag", _pm_diag, 1e-8, "diagonal Poisson-Mehler corollary"),
        Check("cheb_i", _cheb_i, 1e-7, "Chebyshev U kernel"),
        Check("ascP_v", _ascP_v, 1e-7, "Al-Salam-Chihara P kernel"),
        Check("bigH_corollary", _bigH_corollary, 1e-7, "big q-Hermite kernel at t = 1"),
        *(Check(k, _hyper(k), 1e-5, f"{k} kernel with 8W7/3phi2 closed form") for k in HYPER_KERNELS),
        *(Check(k, _recip(k), RECIP_TOL, f"reciprocal kernel expansion {k}") for k in sums.RECIPROCAL_KINDS),
        Check("gamma_Q", _gamma_q, 1e-7, "gamma_{m,k} = gamma_{0,0} Q_{m,k}"),
        Check("Q_symmetry", _q_symmetry, 1e-9, "Q_{m,k}(x,y) = Q_{k,m}(y,x)"),
        Check("C_n", _c_n, 1e-9, "C_n lemma form against its definition"),
        Check("carlitz", _carlitz, 1e-7, "shifted Carlitz bilinear sums"),
        Check("KS", _ks, 1e-5, "Kibble-Slepian representations agree"),
        Check("KS_finite", _ks_finite, 0, "finite ASC sum when rho12 = q^m rho13 rho23"),
        Check("KS_negative", _ks_negative, 0, "Kibble-Slepian sum negative at a positive definite point"),
        Check("KS_PM", _ks_pm, 1e-4, "Kibble-Slepian with rho23 = 0 integrated over x3 is Poisson-Mehler"),
    ]
    out.update({c.identity_id: c for c in more})
    return out


CHECKS: dict[str, Check] = _checks()


def check_ids() -> list[str]:
    return sorted(CHECKS)


def run_checks(ids, cfg: SweepConfig) -> list[Row]:
    """Rows of the named checks, sorted by (identity_id, param_json)."""
    rows = []
    for iid in ids:
        if iid not in CHECKS:
            raise KeyError(f"unknown identity {iid!r}")
        rows.extend(CHECKS[iid].run(cfg, _rng(cfg, iid)))
    return sorted(rows, key=lambda r: (r.identity_id, r.param_json))
