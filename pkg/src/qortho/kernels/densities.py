"""Orthogonality densities, the quadrature that integrates against them, and the
integral identities checked with it (orthogonality, Chapman-Kolmogorov,
eigen-integrals).

All densities share the f_N factor. Integrals over S(q) use the substitution
x = (2/sqrt(1-q)) cos u, under which

    f_N(x|q) dx = (q)_inf (2/pi) sin^2(u) prod_{j>=1} L_j(x, 1|q) du,

so the 1/sqrt(L_0) endpoint singularity disappears and Gauss-Legendre on
[0, pi] converges quickly. Lower-case families live on [-1, 1] with x = cos u,
the same u. Infinite products are accumulated as sums of logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from ..polyfam import FamilySpec, asc_ab, sequence
from ..qcore import (DEFAULT_POLICY, TruncationPolicy, _deviation_bound, _QUADRATICS, q_factorial,
                     q_pochhammer, qvalue, support_radius, truncation_length)

DENSITY_KINDS = ("fN", "fbN", "fCN", "fR")


@dataclass(frozen=True)
class DensitySpec:
    kind: str
    q: float = 0.5
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise ValueError(f"unknown density {self.kind!r}; expected one of {DENSITY_KINDS}")
        q = float(qvalue(self.q))
        object.__setattr__(self, "q", q)
        if not (-1 < q <= 1):
            raise ValueError(f"q must satisfy -1 < q <= 1, got {q}")
        need = {"fN": (), "fbN": ("a",), "fCN": ("y", "rho"), "fR": ("beta",)}[self.kind]
        missing = [p for p in need if p not in self.params]
        if missing:
            raise ValueError(f"{self.kind} needs parameters {missing}")
        p = self.params
        if self.kind == "fbN" and not abs(p["a"]) < 1:
            raise ValueError("fbN needs |a| < 1")
        if self.kind == "fCN":
            if not abs(p["rho"]) < 1:
                raise ValueError("fCN needs |rho| < 1")
            if q < 1 and abs(p["y"]) > support_radius(q):
                raise ValueError("fCN needs y in S(q)")
        if self.kind == "fR":
            if not abs(p["beta"]) < 1:
                raise ValueError("fR needs |beta| < 1")
            if q == 1:
                raise ValueError("fR has no q = 1 form")

    @classmethod
    def of(cls, kind, q=0.5, **params) -> "DensitySpec":
        return cls(kind, q, dict(params))


# ---------------------------------------------------------------- log products

def log_qpoch_inf(a: float, q: float, policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[float, bool]:
    """log (a; q)_inf for real a with 1 - a q^j > 0 for all j."""
    if a == 0 or q == 0:
        return math.log1p(-a), True
    n, ok = truncation_length(abs(a), q, policy)
    j = np.arange(n)
    return float(np.sum(np.log1p(-a * q**j))), ok


def log_aux_product(kind: str, *args, q: float, start: int = 0,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[np.ndarray, bool]:
    """sum_{k>=start} log of a (positive) auxiliary quadratic, elementwise in numpy arrays."""
    fn, arity = _QUADRATICS[kind]
    if len(args) != arity:
        raise TypeError(f"{kind} takes {arity} arguments")
    n, ok = truncation_length(_deviation_bound(kind, args, q), q, policy)
    out = 0.0
    for k in range(start, max(n, start)):
        out = out + np.log(fn(k, *args, q))
    return np.asarray(out, dtype=float), ok


def _log_ratio(spec: DensitySpec, X, policy) -> np.ndarray:
    """log of the density's factor relative to f_N at S(q) points X."""
    q, p = spec.q, spec.params
    if spec.kind == "fN":
        return np.zeros_like(X, dtype=float)
    if spec.kind == "fbN":
        lv, _ = log_aux_product("V", X, p["a"], q=q, policy=policy)
        return -lv
    if spec.kind == "fCN":
        rho = p["rho"]
        lw, _ = log_aux_product("W", X, p["y"], rho, q=q, policy=policy)
        return log_qpoch_inf(rho * rho, q, policy)[0] - lw
    beta = p["beta"]
    ll, _ = log_aux_product("L", X, beta, q=q, policy=policy)
    const = (log_qpoch_inf(beta * beta, q, policy)[0] - log_qpoch_inf(beta, q, policy)[0]
             - log_qpoch_inf(beta * q, q, policy)[0])
    return const - ll


def _gaussian_params(spec: DensitySpec) -> tuple[float, float]:
    """(mean, variance) of the q = 1 density."""
    p = spec.params
    if spec.kind == "fN":
        return 0.0, 1.0
    if spec.kind == "fbN":
        return float(p["a"]), 1.0
    if spec.kind == "fCN":
        return float(p["rho"] * p["y"]), float(1 - p["rho"] ** 2)
    raise ValueError(f"{spec.kind} has no q = 1 form")


def density(spec: DensitySpec, x, policy: TruncationPolicy = DEFAULT_POLICY):
    """Density value at x (scalar or array); zero outside S(q).

    Raises ValueError at the endpoints of S(q), where 1/sqrt(L_0) is singular.
    """
    x_arr = np.asarray(x, dtype=float)
    q = spec.q
    if q == 1:
        m, v = _gaussian_params(spec)
        out = np.exp(-(x_arr - m) ** 2 / (2 * v)) / math.sqrt(2 * math.pi * v)
        return out if out.ndim else float(out)
    r = support_radius(q)
    if np.any(np.isclose(np.abs(x_arr), r, rtol=0, atol=1e-14 * r)):
        raise ValueError("density is singular at the endpoints of S(q)")
    inside = np.abs(x_arr) < r
    X = np.where(inside, x_arr, 0.0)
    l0 = 4 - (1 - q) * X * X
    lq, _ = log_qpoch_inf(q, q, policy)
    lL, _ = log_aux_product("L", X, 1.0, q=q, start=1, policy=policy)
    logf = lq + 0.5 * math.log(1 - q) + 0.5 * np.log(l0) + lL - math.log(2 * math.pi) + _log_ratio(spec, X, policy)
    out = np.where(inside, np.exp(logf), 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadratureResult:
    value: object
    nodes: int
    converged: bool
    error_estimate: float


@lru_cache(maxsize=32)
def _leggauss_0pi(n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    return (t + 1) * (math.pi / 2), w * (math.pi / 2)


@lru_cache(maxsize=32)
def _hermegauss(n: int):
    t, w = np.polynomial.hermite_e.hermegauss(n)
    return t, w / math.sqrt(2 * math.pi)


def weighted_nodes(spec: DensitySpec, n: int, policy: TruncationPolicy = DEFAULT_POLICY):
    """(X, cos u, weights): sum_i w_i F(X_i) approximates the integral of F against the density.

    X are S(q) points (upper-case variable), cos u the matching [-1, 1] points.
    At q = 1, X are Gauss-Hermite nodes for the Gaussian density and cos u is None.
    """
    q = spec.q
    if q == 1:
        m, v = _gaussian_params(spec)
        t, w = _hermegauss(n)
        return m + math.sqrt(v) * t, None, w
    u, w = _leggauss_0pi(n)
    c = np.cos(u)
    X = support_radius(q) * c
    lq, _ = log_qpoch_inf(q, q, policy)
    lL, _ = log_aux_product("L", X, 1.0, q=q, start=1, policy=policy)
    wt = w * (2 / math.pi) * np.sin(u) ** 2 * np.exp(lq + lL + _log_ratio(spec, X, policy))
    return X, c, wt


def integrate(func: Callable, spec: DensitySpec, policy: TruncationPolicy = DEFAULT_POLICY,
              tol: float = 1e-12, n_start: int = 32, n_max: int = 4096) -> QuadratureResult:
    """Integrate func(X, cos u) against the density by node doubling until two rules agree.

    ``func`` returns an array whose leading axis runs over the nodes.
    """
    n, prev = n_start, None
    while True:
        X, c, w = weighted_nodes(spec, n, policy)
        val = np.tensordot(w, np.asarray(func(X, c)), axes=(0, 0))
        if prev is not None:
            err = float(np.max(np.abs(val - prev)))
            scale = max(1.0, float(np.max(np.abs(val))))
            if err <= tol * scale:
                return QuadratureResult(val, n, True, err)
            if 2 * n > n_max:
                return QuadratureResult(val, n, False, err)
        prev = val
        n *= 2


# ---------------------------------------------------------------- orthogonality

@dataclass(frozen=True)
class Pairing:
    family: str
    density: str
    lower_case: bool
    norm: Callable
    params: tuple = ()


def _norm_qfact(n, q, p):
    return q_factorial(n, q)


def _norm_qpoch(n, q, p):
    return q_pochhammer(q, q, n)


def _norm_P(n, q, p):
    return q_factorial(n, q) * q_pochhammer(p["rho"] ** 2, q, n)


def _norm_Q(n, q, p):
    return q_pochhammer(q, q, n) * q_pochhammer(p["rho"] ** 2, q, n)


def _norm_R(n, q, p):
    b = p["beta"]
    return (1 - b) * q_pochhammer(b * b, q, n) * q_factorial(n, q) / (1 - b * q**n)


def _norm_C(n, q, p):
    b = p["beta"]
    return (1 - b) * q_pochhammer(b * b, q, n) / ((1 - b * q**n) * q_pochhammer(q, q, n))


def _norm_T(n, q, p):
    return 1.0 if n == 0 else 0.5


def _norm_U(n, q, p):
    return 1.0


PAIRINGS: dict[str, Pairing] = {
    "qHermite_H": Pairing("qHermite_H", "fN", False, _norm_qfact),
    "qHermite_h": Pairing("qHermite_h", "fN", True, _norm_qpoch),
    "bigqHermite_H": Pairing("bigqHermite_H", "fbN", False, _norm_qfact, ("a",)),
    "ASC_P": Pairing("ASC_P", "fCN", False, _norm_P, ("y", "rho")),
    "ASC_Q": Pairing("ASC_Q", "fCN", True, _norm_Q, ("y", "rho")),
    "Ultra_R": Pairing("Ultra_R", "fR", False, _norm_R, ("beta",)),
    "Ultra_C": Pairing("Ultra_C", "fR", True, _norm_C, ("beta",)),
    "Cheb_T": Pairing("Cheb_T", "cheb_T", True, _norm_T),
    "Cheb_U": Pairing("Cheb_U", "cheb_U", True, _norm_U),
}

PAIRING_DEFAULTS = {"a": 0.4, "y": 0.7, "rho": 0.5, "beta": 0.3}


def _cheb_nodes(kind: str, n: int):
    u, w = _leggauss_0pi(n)
    c = np.cos(u)
    if kind == "cheb_T":
        return c, c, w / math.pi
    return c, c, w * (2 / math.pi) * np.sin(u) ** 2


def _family_values(pair: Pairing, nmax: int, X, c, q, p):
    """Rows = nodes, columns = degree 0..nmax."""
    f = pair.family
    if f in ("Cheb_T", "Cheb_U"):
        vals = sequence(FamilySpec.of(f, q), nmax, c)
    elif f == "ASC_Q":
        a, b = asc_ab(p["y"], p["rho"], q)
        vals = sequence(FamilySpec.of(f, q, a=a, b=b), nmax, c.astype(complex))
    elif f in ("qHermite_h", "Ultra_C"):
        vals = sequence(FamilySpec.of(f, q, **{k: p[k] for k in pair.params}), nmax, c)
    else:
        vals = sequence(FamilySpec.of(f, q, **{k: p[k] for k in pair.params}), nmax, X)
    return np.stack([np.broadcast_to(v, np.shape(X)) for v in vals], axis=1)


@dataclass(frozen=True)
class GramResult:
    gram: np.ndarray
    expected: np.ndarray
    nodes: int
    converged: bool

    def max_offdiag(self) -> float:
        g = self.gram.copy()
        np.fill_diagonal(g, 0)
        return float(np.max(np.abs(g)))

    def max_rel_diag_error(self) -> float:
        d, e = np.diag(self.gram), np.diag(self.expected)
        return float(np.max(np.abs(d - e) / np.abs(e)))


def gram_matrix(family: str, nmax: int, q, params: Mapping | None = None,
                policy: TruncationPolicy = DEFAULT_POLICY, tol: float = 1e-13) -> GramResult:
    """All integrals of P_n P_m against the family's density for n, m <= nmax."""
    if family not in PAIRINGS:
        raise ValueError(f"no orthogonality pairing for {family!r}; known: {sorted(PAIRINGS)}")
    pair = PAIRINGS[family]
    q = float(qvalue(q))
    p = {k: (params or {}).get(k, PAIRING_DEFAULTS[k]) for k in pair.params}
    if q == 1 and (pair.lower_case and family not in ("Cheb_T", "Cheb_U") or family == "Ultra_R"):
        raise ValueError(f"{family} has no q = 1 orthogonality pairing")
    if pair.density.startswith("cheb"):
        nodes = lambda n: _cheb_nodes(pair.density, n)
    else:
        dparams = {k: p[k] for k in pair.params}
        dspec = DensitySpec.of(pair.density, q, **dparams)
        nodes = lambda n: weighted_nodes(dspec, n, policy)

    def gram(n):
        X, c, w = nodes(n)
        V = _family_values(pair, nmax, X, c, q, p)
        G = (V.T * w) @ V
        return G.real if np.iscomplexobj(G) else G

    n, prev = 32, None
    while True:
        G = gram(n)
        if prev is not None:
            err = float(np.max(np.abs(G - prev)))
            if err <= tol * max(1.0, float(np.max(np.abs(G)))) or 2 * n > 4096:
                break
        prev, n = G, 2 * n
    expected = np.diag([float(pair.norm(k, q, p)) for k in range(nmax + 1)])
    return GramResult(G, expected, n, err <= tol * max(1.0, float(np.max(np.abs(G)))))


def orthogonality_integral(family: str, n: int, m: int, q, params: Mapping | None = None,
                           policy: TruncationPolicy = DEFAULT_POLICY) -> QuadratureResult:
    """The single integral of P_n P_m against the family's density."""
    g = gram_matrix(family, max(n, m), q, params, policy)
    return QuadratureResult(float(g.gram[n, m]), g.nodes, g.converged, 0.0)


def orthogonality_norm(family: str, n: int, q, params: Mapping | None = None) -> float:
    pair = PAIRINGS[family]
    p = {k: (params or {}).get(k, PAIRING_DEFAULTS[k]) for k in pair.params}
    return float(pair.norm(n, q, p))


# ---------------------------------------------------------------- integral identities

def chapman_kolmogorov_check(x, z, rho1, rho2, q, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """|int f_CN(x|y,rho1) f_CN(y|z,rho2) dy - f_CN(x|z,rho1 rho2)|."""
    if not abs(rho1 * rho2) < 1:
        raise ValueError("need |rho1 rho2| < 1")
    inner = DensitySpec.of("fCN", q, y=z, rho=rho2)
    res = integrate(lambda Y, c: _fcn_in_y(x, Y, rho1, q, policy), inner, policy)
    return abs(float(res.value) - density(DensitySpec.of("fCN", q, y=z, rho=rho1 * rho2), x, policy))


def _fcn_in_y(x, Y, rho, q, policy):
    """f_CN(x|Y, rho, q) for a fixed x and an array of conditioning points Y."""
    if q == 1:
        v = 1 - rho * rho
        return np.exp(-(x - rho * Y) ** 2 / (2 * v)) / math.sqrt(2 * math.pi * v)
    fn = density(DensitySpec.of("fN", q), x, policy)
    lw, _ = log_aux_product("W", x, Y, rho, q=q, policy=policy)
    return fn * np.exp(log_qpoch_inf(rho * rho, q, policy)[0] - lw)


@dataclass(frozen=True)
class EigenResiduals:
    hermite: float
    asc: float
    hermite_value: float
    asc_value: float
    hermite_expected: float
    asc_expected: float


def eigen_integral_checks(n: int, y, rho, q, policy: TruncationPolicy = DEFAULT_POLICY,
                          x=None) -> EigenResiduals:
    """Residuals of int H_n(x) f_CN(x|y,rho) dx = rho^n H_n(y) and
    int P_n(x|y',rho) f_CN(y'|x,rho) dy' = (rho^2)_n H_n(x) (x defaults to y)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = y if x is None else x
    dy = DensitySpec.of("fCN", q, y=y, rho=rho)
    Hq = FamilySpec.of("qHermite_H", q)
    i1 = integrate(lambda X, c: sequence(Hq, n, X)[n], dy, policy)
    t1 = rho**n * sequence(Hq, n, float(y))[n]
    dx = DensitySpec.of("fCN", q, y=x, rho=rho)
    # P_n(x|Y, rho) as a function of the integration variable Y
    i2 = integrate(lambda Y, c: sequence(FamilySpec.of("ASC_P", q, y=Y, rho=rho), n, x)[n], dx, policy)
    poch = q_pochhammer(rho * rho, q, n) if q != 1 else (1 - rho * rho) ** n
    t2 = poch * sequence(Hq, n, float(x))[n]
    return EigenResiduals(abs(float(i1.value) - t1), abs(float(i2.value) - t2), float(i1.value), float(i2.value),
                          float(t1), float(t2))
