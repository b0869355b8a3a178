"""Finite identities between the families: connection coefficients,
linearization formulas and the B/H annihilation sum.

Every identity is written once against a small evaluation context. In
symbolic mode the context hands out exact :class:`CoeffPoly` objects (rational
when ``q`` and the parameters are Fractions); in point mode it hands out
values at a number ``x``. An identity is ``lhs == sum_j coeffs[j] * basis(j)``.

Identities whose published form carries a sqrt(1-q) rescaling (``HnaT``,
``UnaH``, ``HnaU``, ``HpnaHq``) are stated in the rescaled variable
``u = x sqrt(1-q)/2`` (or ``u = x`` with the base-p side rescaled) and divided
by the matching power of sqrt(1-q), so that all coefficients stay rational:

* ``HnaT``:   s^n H_n(2u/s|q) = sum_k [n,k] T_{|n-2k|}(u),          s = sqrt(1-q)
* ``UnaH``:   U_n(u) = sum_j (-1)^j q^(j(j+1)/2) [n-j,j] s^(n-2j) H_{n-2j}(2u/s|q)
* ``HnaU``:   s^n H_n(2u/s|q) = sum_k (q^k - q^(n-k+1))/(1 - q^(n-k+1)) [n,k] U_{n-2k}(u)
* ``HpnaHq``: r^(-n) H_n(r x|p) = sum_k (1-q)^(-k) S_k H_{n-2k}(x|q), r^2 = (1-q)/(1-p)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Callable, Mapping

from .poly import CoeffPoly
from .polyfam import Family, FamilySpec, sequence
from .qcore import q_binomial, q_bracket, q_factorial, q_pochhammer, qvalue


# ---------------------------------------------------------------- context

class _Context:
    """Family values in one variable: symbolic (CoeffPoly) or at a point."""

    def __init__(self, q, x=None):
        self.q = qvalue(q)
        self.symbolic = x is None
        self.x = CoeffPoly.x() if x is None else x
        self._cache: dict = {}

    def _seq(self, family, n, at, q, params):
        key = (family, "x" if at is self.x else at, q, tuple(sorted(params.items())))
        hit = self._cache.get(key)
        if hit is None or len(hit) <= n:
            hit = sequence(FamilySpec.of(family, q, **params), max(n, 2 * len(hit or ())), at)
            self._cache[key] = hit
        return hit

    def fam(self, family, n, *, base=None, **params):
        """P_n(x) of ``family``; zero for negative n (T uses T_{-n} = T_n)."""
        if family == "Cheb_T":
            n = abs(n)
        if n < 0:
            return 0 * self.x
        q = self.q if base is None else base
        return self._seq(family, n, self.x, q, params)[n]

    def at(self, family, n, point, *, base=None, **params):
        """Scalar P_n(point); exact when ``point`` and the parameters are exact."""
        if family == "Cheb_T":
            n = abs(n)
        if n < 0:
            return 0 * point
        q = self.q if base is None else base
        return self._seq(family, n, point, q, params)[n]

    def scaled(self, family, n, s2, factor=1, *, base=None, **params):
        """s^n P_n(factor * x / s) with s^2 = s2, exact in symbolic mode."""
        if n < 0:
            return 0 * self.x
        if self.symbolic:
            p = self.fam(family, n, base=base, **params)
            return p.scale_arg(factor).parity_rescale(n, 1 / s2)
        s = math.sqrt(s2)
        q = self.q if base is None else base
        val = sequence(FamilySpec.of(family, q, **params), n, factor * self.x / s)[n]
        return s**n * val


def _qfac(n, q):
    return q_factorial(n, q)


def _cbin(n, k):
    return n * (n - 1) // 2 if n >= 2 else 0


def shifted_pochhammer(lead, ratio_term, q, n):
    """lead^n (ratio_term/lead; q)_n written as prod_{j<n} (lead - ratio_term q^j).

    Finite even when ``lead`` is zero.
    """
    out = 1 + 0 * q
    for j in range(n):
        out = out * (lead - ratio_term * q**j)
    return out


def B_shifted(m: int, x, b, q, ctx: _Context | None = None):
    """The helper B_m(x|b, q) = sum_j [m, j]_q b^(m-j) B_j(x|q)."""
    ctx = ctx or _Context(q)
    return sum((q_binomial(m, j, q) * b ** (m - j) * ctx.at("qInvHermite_B", j, x)
                for j in range(m + 1)), 0 * q)


# ---------------------------------------------------------------- identities

@dataclass
class _Expansion:
    lhs: object
    coeffs: dict
    basis: Callable[[int], object]
    lhs_scale: float = 0.0  # magnitude of the terms summed into lhs (point mode)

    def rhs(self):
        out = 0
        for j in sorted(self.coeffs):
            c = self.coeffs[j]
            if c == 0:
                continue
            out = out + c * self.basis(j)
        if isinstance(out, int) and out == 0 and isinstance(self.lhs, CoeffPoly):
            return CoeffPoly()
        return out


def _acc(d: dict, key, val):
    d[key] = d.get(key, 0) + val


def _TnaU(c, idx, p):
    (n,) = idx
    co = {0: 1} if n == 0 else {n: Fraction(1, 2)}
    if n >= 2:
        co[n - 2] = Fraction(-1, 2)
    return _Expansion(c.fam("Cheb_T", n), co, lambda j: c.fam("Cheb_U", j))


def _UnaT(c, idx, p):
    (n,) = idx
    co: dict = {}
    for k in range(n // 2 + 1):
        _acc(co, n - 2 * k, 2)
    if n % 2 == 0:
        _acc(co, 0, -1)
    return _Expansion(c.fam("Cheb_U", n), co, lambda j: c.fam("Cheb_T", j))


def _HnaT(c, idx, p):
    (n,) = idx
    q = c.q
    co: dict = {}
    for k in range(n + 1):
        _acc(co, abs(n - 2 * k), q_binomial(n, k, q))
    return _Expansion(c.scaled("qHermite_H", n, 1 - q, 2), co, lambda j: c.fam("Cheb_T", j))


def change_of_base_sum(n: int, k: int, p, q):
    """The rational part S_k of the base-p to base-q q-Hermite coefficient."""
    return sum(((-1) ** j * p ** (k - j) * q ** (j * (j + 1) // 2) * q_binomial(n - 2 * k + j, j, q)
                * (q_binomial(n, k - j, p) - p ** (n - 2 * k + 2 * j + 1) * q_binomial(n, k - j - 1, p))
                for j in range(k + 1)), 0 * q)


def _HpnaHq(c, idx, prm):
    (n,) = idx
    q, pb = c.q, prm["p"]
    co = {n - 2 * k: change_of_base_sum(n, k, pb, q) / (1 - q) ** k for k in range(n // 2 + 1)}
    lhs = c.scaled("qHermite_H", n, (1 - pb) / (1 - q), 1, base=pb)
    return _Expansion(lhs, co, lambda j: c.fam("qHermite_H", j))


def _UnaH(c, idx, p):
    (n,) = idx
    q = c.q
    co = {n - 2 * j: (-1) ** j * q ** (j * (j + 1) // 2) * q_binomial(n - j, j, q) for j in range(n // 2 + 1)}
    return _Expansion(c.fam("Cheb_U", n), co, lambda i: c.scaled("qHermite_H", i, 1 - q, 2))


def _HnaU(c, idx, p):
    (n,) = idx
    q = c.q
    co = {n - 2 * k: (q**k - q ** (n - k + 1)) / (1 - q ** (n - k + 1)) * q_binomial(n, k, q)
          for k in range(n // 2 + 1)}
    return _Expansion(c.scaled("qHermite_H", n, 1 - q, 2), co, lambda j: c.fam("Cheb_U", j))


def _bigh(c, idx, p):
    (n,) = idx
    q, a = c.q, p["a"]
    co = {n - k: q_binomial(n, k, q) * (-1) ** k * q ** _cbin(k, 2) * a**k for k in range(n + 1)}
    return _Expansion(c.fam("bigqHermite_h", n, a=a), co, lambda j: c.fam("qHermite_h", j))


def _bigH(c, idx, p):
    (n,) = idx
    q, a = c.q, p["a"]
    co = {n - k: q_binomial(n, k, q) * (-1) ** k * q ** _cbin(k, 2) * a**k for k in range(n + 1)}
    return _Expansion(c.fam("bigqHermite_H", n, a=a), co, lambda j: c.fam("qHermite_H", j))


def _PnaH(c, idx, p):
    (n,) = idx
    q, y, rho = c.q, p["y"], p["rho"]
    co = {j: q_binomial(n, j, q) * rho ** (n - j) * c.at("qInvHermite_B", n - j, y) for j in range(n + 1)}
    return _Expansion(c.fam("ASC_P", n, y=y, rho=rho), co, lambda j: c.fam("qHermite_H", j))


def _HnaP(c, idx, p):
    (n,) = idx
    q, y, rho = c.q, p["y"], p["rho"]
    co = {j: q_binomial(n, j, q) * rho ** (n - j) * c.at("qHermite_H", n - j, y) for j in range(n + 1)}
    return _Expansion(c.fam("qHermite_H", n), co, lambda j: c.fam("ASC_P", j, y=y, rho=rho))


def _bHnaP(c, idx, p):
    (n,) = idx
    q, a, b, y = c.q, p["a"], p["b"], p["y"]
    if b == 0:
        raise ZeroDivisionError("bHnaP needs b != 0")
    r = a / b
    co = {j: q_binomial(n, j, q) * r ** (n - j) * c.at("bigqHermite_H", n - j, y, a=b) for j in range(n + 1)}
    return _Expansion(c.fam("bigqHermite_H", n, a=a), co, lambda j: c.fam("ASC_P", j, y=y, rho=r))


def _PnabH(c, idx, p):
    (n,) = idx
    q, a, y, rho = c.q, p["a"], p["y"], p["rho"]
    if rho == 0:
        raise ZeroDivisionError("PnabH needs rho != 0")
    co = {k: q_binomial(n, k, q) * rho ** (n - k) * B_shifted(n - k, y, a / rho, q, c) for k in range(n + 1)}
    return _Expansion(c.fam("ASC_P", n, y=y, rho=rho), co, lambda k: c.fam("bigqHermite_H", k, a=a))


def _PnaP(c, idx, p):
    (n,) = idx
    q, y, z, rho, r = c.q, p["y"], p["z"], p["rho"], p["r"]
    if r == 0:
        raise ZeroDivisionError("PnaP needs r != 0")
    co = {j: q_binomial(n, j, q) * r ** (n - j) * c.at("ASC_P", n - j, z, y=y, rho=rho / r) for j in range(n + 1)}
    return _Expansion(c.fam("ASC_P", n, y=y, rho=rho), co, lambda j: c.fam("ASC_P", j, y=z, rho=r))


def _odwrocenie(c, idx, p):
    # variable is y: P_n(y|z,t)/(t^2)_n = sum_j ... H_{n-j}(y) P_j(z|y,t)/(t^2)_j
    (n,) = idx
    q, z, t = c.q, p["z"], p["t"]
    co = {j: (-1) ** j * q ** _cbin(j, 2) * q_binomial(n, j, q) * t**j for j in range(n + 1)}

    def basis(j):
        pj = sequence(FamilySpec.of("ASC_P", q, y=c.x, rho=t), j, z)[j]
        return c.fam("qHermite_H", n - j) * pj / q_pochhammer(t * t, q, j)

    lhs = c.fam("ASC_P", n, y=z, rho=t) / q_pochhammer(t * t, q, n)
    return _Expansion(lhs, co, basis)


def _RnaR(c, idx, p):
    (n,) = idx
    q, beta, gamma = c.q, p["beta"], p["gamma"]
    co = {}
    for k in range(n // 2 + 1):
        co[n - 2 * k] = (_qfac(n, q) * shifted_pochhammer(beta, gamma, q, k) * q_pochhammer(gamma, q, n - k)
                         * (1 - beta * q ** (n - 2 * k))
                         / (_qfac(k, q) * _qfac(n - 2 * k, q) * q_pochhammer(beta * q, q, n - k) * (1 - beta)))
    return _Expansion(c.fam("Ultra_R", n, beta=gamma), co, lambda j: c.fam("Ultra_R", j, beta=beta))


def _RnaH(c, idx, p):
    (n,) = idx
    q, gamma = c.q, p["gamma"]
    co = {n - 2 * k: ((-1) ** k * q ** _cbin(k, 2) * _qfac(n, q) * gamma**k * q_pochhammer(gamma, q, n - k)
                      / (_qfac(k, q) * _qfac(n - 2 * k, q))) for k in range(n // 2 + 1)}
    return _Expansion(c.fam("Ultra_R", n, beta=gamma), co, lambda j: c.fam("qHermite_H", j))


def _HnaR(c, idx, p):
    (n,) = idx
    q, beta = c.q, p["beta"]
    co = {n - 2 * k: (_qfac(n, q) / (_qfac(k, q) * _qfac(n - 2 * k, q)) * beta**k * (1 - beta * q ** (n - 2 * k))
                      / ((1 - beta) * q_pochhammer(beta * q, q, n - k))) for k in range(n // 2 + 1)}
    return _Expansion(c.fam("qHermite_H", n), co, lambda j: c.fam("Ultra_R", j, beta=beta))


def _BnaH(c, idx, p):
    (n,) = idx
    q = c.q
    co = {n - 2 * k: ((-1) ** n * q_binomial(n, k, q) * q_binomial(n - k, k, q) * _qfac(k, q)
                      * q ** (_cbin(n - k, 2) + _cbin(k, 2))) for k in range(n // 2 + 1)}
    return _Expansion(c.fam("qInvHermite_B", n), co, lambda j: c.fam("qHermite_H", j))


def _PnaHH(c, idx, p):
    (n,) = idx
    q, y, rho = c.q, p["y"], p["rho"]
    co: dict = {}
    for k in range(n // 2 + 1):
        outer = (q_binomial(n, k, q) * q_binomial(n - k, k, q) * _qfac(k, q) * q ** (k * (k - 1)) * rho ** (2 * k))
        for s in range(n - 2 * k + 1):
            inner = ((-1) ** s * q_binomial(n - 2 * k, s, q) * q ** _cbin(s, 2) * (q**k * rho) ** s
                     * c.at("qHermite_H", s, y))
            _acc(co, n - 2 * k - s, outer * inner)
    return _Expansion(c.fam("ASC_P", n, y=y, rho=rho), co, lambda j: c.fam("qHermite_H", j))


def _HH(c, idx, p):
    n, m = idx
    q = c.q
    co = {n + m - 2 * j: q_binomial(m, j, q) * q_binomial(n, j, q) * _qfac(j, q) for j in range(min(n, m) + 1)}
    return _Expansion(c.fam("qHermite_H", n) * c.fam("qHermite_H", m), co, lambda j: c.fam("qHermite_H", j))


def _HHH(c, idx, p):
    n, m, k = idx
    q = c.q
    co = {}
    for j in range((k + m + n) // 2 + 1):
        tot = 0 * q
        for r in range(max(j - k, 0), min(m, n, m + n - j) + 1):
            if j < r:
                continue
            tot += (q_binomial(m, r, q) * q_binomial(n, r, q) * q_binomial(k, j - r, q)
                    * q_binomial(m + n - 2 * r, j - r, q) * _qfac(r, q) * _qfac(j - r, q))
        co[n + m + k - 2 * j] = tot
    lhs = c.fam("qHermite_H", n) * c.fam("qHermite_H", m) * c.fam("qHermite_H", k)
    return _Expansion(lhs, co, lambda j: c.fam("qHermite_H", j))


def _HHHrs(c, idx, p):
    n, m, k = idx
    q = c.q
    co: dict = {}
    for r in range(min(n, m) + 1):
        for s in range(k + 1):
            _acc(co, n + m + k - 2 * r - 2 * s,
                 q_binomial(m, r, q) * q_binomial(n, r, q) * q_binomial(k, s, q)
                 * q_binomial(m + n - 2 * r, s, q) * _qfac(s, q) * _qfac(r, q))
    lhs = c.fam("qHermite_H", n) * c.fam("qHermite_H", m) * c.fam("qHermite_H", k)
    return _Expansion(lhs, co, lambda j: c.fam("qHermite_H", j))


def _inverse(c, idx, p):
    n, m = idx
    q = c.q
    co = {k: (-1) ** k * q ** _cbin(k, 2) * q_binomial(m, k, q) * q_binomial(n, k, q) * _qfac(k, q)
          for k in range(min(n, m) + 1)}
    return _Expansion(c.fam("qHermite_H", n + m), co,
                      lambda k: c.fam("qHermite_H", n - k) * c.fam("qHermite_H", m - k))


def _HB(c, idx, p):
    n, m = idx
    q = c.q
    co = {n + m - 2 * k: ((-1) ** n * q_binomial(n, k, q) * q_binomial(n + m - k, k, q) * _qfac(k, q)
                          * q ** (_cbin(n - k, 2) + _cbin(k, 2))) for k in range((n + m) // 2 + 1)}
    return _Expansion(c.fam("qHermite_H", m) * c.fam("qInvHermite_B", n), co, lambda j: c.fam("qHermite_H", j))


def _HR(c, idx, p):
    n, m = idx
    q, beta = c.q, p["beta"]
    co: dict = {}
    for j in range(m + 1):
        for k in range(n - j + 1):
            if n - k - j < k:
                continue
            _acc(co, n + m - 2 * k - 2 * j,
                 q_binomial(m, j, q) * q_binomial(n, k + j, q) * q_binomial(n - k - j, k, q) * _qfac(k + j, q)
                 * (-beta) ** k * q ** _cbin(k, 2) * q_pochhammer(beta, q, n - k))
    lhs = c.fam("qHermite_H", m) * c.fam("Ultra_R", n, beta=beta)
    return _Expansion(lhs, co, lambda j: c.fam("qHermite_H", j))


def _sumaBH(c, idx, p):
    n, m = idx
    q = c.q
    terms = [q_binomial(n, k, q) * c.fam("qInvHermite_B", n - k) * c.fam("qHermite_H", k + m)
             for k in range(n + 1)]
    lhs = sum(terms, 0 * c.x)
    co = {} if n > m else {m - n: (-1) ** n * q ** _cbin(n, 2) * _qfac(m, q) / _qfac(m - n, q)}
    scale = 0.0 if c.symbolic else float(sum(abs(t) for t in terms))
    return _Expansion(lhs, co, lambda j: c.fam("qHermite_H", j), scale)


@dataclass(frozen=True)
class IdentityInfo:
    identity_id: str
    kind: str
    arity: int
    params: tuple = ()
    variable: str = "x"
    basis: str = ""
    build: Callable = field(default=None, repr=False, compare=False)
    rescaled: bool = False


def _info(iid, kind, arity, build, params=(), basis="H_j(x|q)", variable="x", rescaled=False):
    return IdentityInfo(iid, kind, arity, tuple(params), variable, basis, build, rescaled)


REGISTRY: dict[str, IdentityInfo] = {i.identity_id: i for i in [
    _info("TnaU", "connection", 1, _TnaU, basis="U_j(x)"),
    _info("UnaT", "connection", 1, _UnaT, basis="T_j(x)"),
    _info("HnaT", "connection", 1, _HnaT, basis="T_j(u)", variable="u", rescaled=True),
    _info("HpnaHq", "connection", 1, _HpnaHq, params=("p",), rescaled=True),
    _info("UnaH", "connection", 1, _UnaH, basis="s^j H_j(2u/s|q)", variable="u", rescaled=True),
    _info("HnaU", "connection", 1, _HnaU, basis="U_j(u)", variable="u", rescaled=True),
    _info("bigh", "connection", 1, _bigh, params=("a",), basis="h_j(x|q)"),
    _info("bigH", "connection", 1, _bigH, params=("a",)),
    _info("PnaH", "connection", 1, _PnaH, params=("y", "rho")),
    _info("HnaP", "connection", 1, _HnaP, params=("y", "rho"), basis="P_j(x|y,rho,q)"),
    _info("bHnaP", "connection", 1, _bHnaP, params=("a", "b", "y"), basis="P_j(x|y,a/b,q)"),
    _info("PnabH", "connection", 1, _PnabH, params=("a", "y", "rho"), basis="H_j(x|a,q)"),
    _info("PnaP", "connection", 1, _PnaP, params=("y", "z", "rho", "r"), basis="P_j(x|z,r,q)"),
    _info("odwrocenie", "connection", 1, _odwrocenie, params=("z", "t"),
          basis="H_{n-j}(y|q) P_j(z|y,t,q)/(t^2)_j", variable="y"),
    _info("RnaR", "connection", 1, _RnaR, params=("beta", "gamma"), basis="R_j(x|beta,q)"),
    _info("RnaH", "connection", 1, _RnaH, params=("gamma",)),
    _info("HnaR", "connection", 1, _HnaR, params=("beta",), basis="R_j(x|beta,q)"),
    _info("BnaH", "connection", 1, _BnaH),
    _info("PnaHH", "connection", 1, _PnaHH, params=("y", "rho")),
    _info("HH", "linearization", 2, _HH),
    _info("HHH", "linearization", 3, _HHH),
    _info("HHHrs", "linearization", 3, _HHHrs),
    _info("inverse", "linearization", 2, _inverse, basis="H_{n-j}(x|q) H_{m-j}(x|q)"),
    _info("HB", "linearization", 2, _HB),
    _info("HR", "linearization", 2, _HR, params=("beta",)),
    _info("sumaBH", "sum", 2, _sumaBH),
]}

# Rational defaults chosen inside every identity's validity region.
DEFAULT_PARAMS: dict[str, Fraction] = {
    "p": Fraction(1, 3), "a": Fraction(1, 3), "b": Fraction(3, 5), "y": Fraction(1, 3),
    "z": Fraction(-1, 2), "rho": Fraction(2, 5), "r": Fraction(3, 4), "t": Fraction(3, 5),
    "beta": Fraction(1, 5), "gamma": Fraction(-2, 7),
}


def identity_ids() -> list[str]:
    return sorted(REGISTRY)


def _lookup(identity_id: str) -> IdentityInfo:
    try:
        return REGISTRY[identity_id]
    except KeyError:
        raise KeyError(f"unknown identity {identity_id!r}; known: {', '.join(identity_ids())}") from None


def _params(info: IdentityInfo, params: Mapping | None):
    params = dict(params or {})
    unknown = set(params) - set(info.params)
    if unknown:
        raise ValueError(f"{info.identity_id} does not take parameters {sorted(unknown)}")
    return {k: params.get(k, DEFAULT_PARAMS[k]) for k in info.params}


def _indices(info: IdentityInfo, indices):
    if isinstance(indices, int):
        indices = (indices,)
    indices = tuple(int(i) for i in indices)
    if len(indices) != info.arity:
        raise ValueError(f"{info.identity_id} takes {info.arity} indices, got {len(indices)}")
    if any(i < 0 for i in indices):
        raise ValueError("indices must be >= 0")
    return indices


def _check_q(info: IdentityInfo, q):
    if info.rescaled and q == 1:
        raise ValueError(f"{info.identity_id} involves sqrt(1-q) rescaling and needs q != 1")


def _expand(identity_id, indices, params, q, x=None, ctx=None):
    info = _lookup(identity_id)
    idx = _indices(info, indices)
    prm = _params(info, params)
    q = qvalue(q)
    _check_q(info, q)
    ctx = ctx or _Context(q, x)
    return info, idx, prm, info.build(ctx, idx, prm)


# ---------------------------------------------------------------- public API

@dataclass(frozen=True)
class ExpansionReport:
    identity_id: str
    parameters: dict
    lhs: object
    rhs: object
    residual: float

    @property
    def exact(self) -> bool:
        return self.residual == 0


def connection_coeffs(identity_id: str, n, params: Mapping | None = None, q=0.5) -> list:
    """Dense coefficient vector on the identity's target basis (index = basis label).

    For rescaled identities the vector is the rational one of the u-form (see module docstring).
    """
    _, _, _, exp = _expand(identity_id, n, params, q)
    size = max(exp.coeffs, default=-1) + 1
    zero = 0 * qvalue(q)
    return [exp.coeffs.get(j, zero) for j in range(size)]


def linearize(identity_id: str, indices, params: Mapping | None = None, q=0.5) -> CoeffPoly:
    """Basis-coefficient vector of a linearization, packed in a CoeffPoly (entry j multiplies basis j)."""
    info = _lookup(identity_id)
    if info.kind == "connection":
        raise ValueError(f"{identity_id} is a connection formula; use connection_coeffs")
    _, _, _, exp = _expand(identity_id, indices, params, q)
    size = max(exp.coeffs, default=-1) + 1
    return CoeffPoly([exp.coeffs.get(j, 0) for j in range(size)] or [0])


def apply_connection(identity_id: str, n, params: Mapping | None = None, q=0.5, x=0.3):
    """Numerical value of the expansion side at x (in the identity's own variable)."""
    _, _, _, exp = _expand(identity_id, n, params, q, x=x)
    return exp.rhs()


def lhs_value(identity_id: str, n, params: Mapping | None = None, q=0.5, x=0.3):
    _, _, _, exp = _expand(identity_id, n, params, q, x=x)
    return exp.lhs


def verify_exact(identity_id: str, indices, params: Mapping | None = None, q=Fraction(1, 2),
                 ctx: _Context | None = None) -> ExpansionReport:
    """Compare both sides as coefficient vectors; residual is the max abs coefficient difference."""
    info, idx, prm, exp = _expand(identity_id, indices, params, q, ctx=ctx)
    lhs, rhs = exp.lhs, exp.rhs()
    if not isinstance(lhs, CoeffPoly):
        lhs = CoeffPoly((lhs,))
    if not isinstance(rhs, CoeffPoly):
        rhs = CoeffPoly((rhs,))
    res = lhs.max_abs_diff(rhs)
    return ExpansionReport(identity_id, {"indices": idx, "q": q, **prm}, lhs, rhs, float(res))


def verify_point(identity_id: str, indices, params: Mapping | None = None, q=0.5, x=0.3) -> ExpansionReport:
    """Pointwise check in floating point.

    The residual is |lhs - rhs| relative to the size of what was summed,
    max(1, |lhs|, sum_j |c_j basis_j(x)|, magnitude of the lhs terms), so that
    cancellation near the edge of S(q) is not mistaken for a wrong coefficient.
    """
    info, idx, prm, exp = _expand(identity_id, indices, params, q, x=x)
    lhs, rhs = exp.lhs, exp.rhs()
    mag = sum((abs(c * exp.basis(j)) for j, c in exp.coeffs.items()), 0.0)
    res = abs(lhs - rhs) / max(1.0, abs(lhs), float(mag), exp.lhs_scale)
    return ExpansionReport(identity_id, {"indices": idx, "q": q, "x": x, **prm}, lhs, rhs, float(res))


def index_grid(identity_id: str, max_index: int):
    """All index tuples with every entry <= max_index."""
    info = _lookup(identity_id)
    return itertools.product(range(max_index + 1), repeat=info.arity)


def verify_exact_sweep(identity_id: str, max_index: int = 8, params: Mapping | None = None,
                       q=Fraction(1, 2)) -> list[ExpansionReport]:
    """verify_exact over the whole index grid, sharing one symbolic context."""
    info = _lookup(identity_id)
    ctx = _Context(qvalue(q))
    return [verify_exact(identity_id, idx, params, q, ctx=ctx) for idx in index_grid(identity_id, max_index)]


def annihilation_sum(n: int, m: int, q, x):
    """sum_k [n,k]_q B_{n-k}(x|q) H_{k+m}(x|q)."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be >= 0")
    ctx = _Context(q, x)
    return sum((q_binomial(n, k, q) * ctx.fam("qInvHermite_B", n - k) * ctx.fam("qHermite_H", k + m)
                for k in range(n + 1)), 0 * x)


def annihilation_closed_form(n: int, m: int, q, x):
    """0 for n > m, else (-1)^n q^C(n,2) [m]!/[m-n]! H_{m-n}(x|q)."""
    if n > m:
        return 0 * x
    ctx = _Context(q, x)
    return (-1) ** n * q ** _cbin(n, 2) * _qfac(m, q) / _qfac(m - n, q) * ctx.fam("qHermite_H", m - n)
