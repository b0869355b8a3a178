"""The polynomial families: recurrences, coefficients, trigonometric forms,
generating functions and the lower-case/upper-case rescalings.

Upper-case families (H, bH, P, R, B) are orthogonal on S(q); lower-case ones
(h, bh, Q, p, C, b) live on [-1, 1]. Evaluation is by forward three-term
recurrence; ``x`` may be a number, a numpy array or a :class:`CoeffPoly`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .poly import CoeffPoly
from .qcore import (
    DEFAULT_POLICY,
    TrigPoint,
    TruncationPolicy,
    aux_product,
    q_binomial,
    q_bracket,
    q_factorial,
    q_pochhammer,
    q_pochhammer_inf,
    qvalue,
)


class Family(str, Enum):
    Hermite_H = "Hermite_H"
    Hermite_h = "Hermite_h"
    Cheb_T = "Cheb_T"
    Cheb_U = "Cheb_U"
    qHermite_h = "qHermite_h"
    qHermite_H = "qHermite_H"
    bigqHermite_h = "bigqHermite_h"
    bigqHermite_H = "bigqHermite_H"
    ASC_Q = "ASC_Q"
    ASC_P = "ASC_P"
    ASC_p = "ASC_p"
    Ultra_C = "Ultra_C"
    Ultra_R = "Ultra_R"
    RogersSzego_s = "RogersSzego_s"
    qInvHermite_B = "qInvHermite_B"
    qInvHermite_b = "qInvHermite_b"


REQUIRED_PARAMS = {
    Family.bigqHermite_h: ("a",),
    Family.bigqHermite_H: ("a",),
    Family.ASC_Q: ("a", "b"),
    Family.ASC_P: ("y", "rho"),
    Family.ASC_p: ("y", "rho"),
    Family.Ultra_C: ("beta",),
    Family.Ultra_R: ("beta",),
}


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    q: object = 0.5
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "q", qvalue(self.q))
        missing = [p for p in REQUIRED_PARAMS.get(self.family, ()) if p not in self.params]
        if missing:
            raise ValueError(f"{self.family.value} needs parameters {missing}")

    @classmethod
    def of(cls, family, q=0.5, **params) -> "FamilySpec":
        return cls(family, q, dict(params))

    def __getattr__(self, name):
        try:
            return self.__dict__["params"][name]
        except KeyError:
            raise AttributeError(name) from None


def _step(spec: FamilySpec, k: int):
    """(a_k, b_k, c_k, d_k) with d_k P_{k+1} = (a_k x + b_k) P_k - c_k P_{k-1}.

    c_k is only requested for k >= 1, which keeps q^(k-1) finite at q = 0.
    """
    f, q, p = spec.family, spec.q, spec.params
    qk = q**k
    c = None
    if f is Family.Hermite_H:
        a, b, c = 1, 0, k
    elif f is Family.Hermite_h:
        a, b, c = 2, 0, 2 * k
    elif f is Family.Cheb_T:
        a, b, c = (1 if k == 0 else 2), 0, 1
    elif f is Family.Cheb_U:
        a, b, c = 2, 0, 1
    elif f is Family.qHermite_h:
        a, b, c = 2, 0, 1 - qk
    elif f is Family.qHermite_H:
        a, b, c = 1, 0, q_bracket(k, q)
    elif f is Family.bigqHermite_h:
        a, b, c = 2, -p["a"] * qk, 1 - qk
    elif f is Family.bigqHermite_H:
        a, b = 1, -p["a"] * qk
        c = q_bracket(k, q)
    elif f is Family.ASC_Q:
        a, b = 2, -(p["a"] + p["b"]) * qk
        if k:
            c = (1 - p["a"] * p["b"] * q ** (k - 1)) * (1 - qk)
    elif f is Family.ASC_P:
        a, b = 1, -p["rho"] * p["y"] * qk
        if k:
            c = (1 - p["rho"] ** 2 * q ** (k - 1)) * q_bracket(k, q)
    elif f is Family.ASC_p:
        a, b = 2, -2 * p["rho"] * p["y"] * qk
        if k:
            c = (1 - p["rho"] ** 2 * q ** (k - 1)) * (1 - qk)
    elif f is Family.Ultra_C:
        d = 1 - q ** (k + 1)
        if d == 0:
            raise ValueError("Ultra_C is undefined at q = 1")
        beta = p["beta"]
        c = (1 - beta**2 * q ** (k - 1)) if k else 0
        return 2 * (1 - beta * qk), 0, c, d
    elif f is Family.Ultra_R:
        beta = p["beta"]
        a, b = 1 - beta * qk, 0
        if k:
            c = (1 - beta**2 * q ** (k - 1)) * q_bracket(k, q)
    elif f is Family.RogersSzego_s:
        # s_{k+1} = (1 + x) s_k - x (1 - q^k) s_{k-1}; the x in c_k is handled by the caller
        return 1, 1, ("x", 1 - qk), 1
    elif f is Family.qInvHermite_B:
        a, b = -qk, 0
        if k:
            c = -(q ** (k - 1)) * q_bracket(k, q)
    elif f is Family.qInvHermite_b:
        a, b = -2 * qk, 0
        if k:
            c = -(q ** (k - 1)) * (1 - qk)
    else:  # pragma: no cover
        raise ValueError(f"unknown family {f}")
    return a, b, c, 1


def sequence(spec: FamilySpec, n: int, x) -> list:
    """[P_0(x), ..., P_n(x)] by forward recurrence (empty list for n = -1)."""
    if n < -1:
        raise ValueError("n must be >= -1")
    if n == -1:
        return []
    one = 1 + 0 * x
    prev, cur = 0 * x, one
    out = [cur]
    for k in range(n):
        a, b, c, d = _step(spec, k)
        nxt = (a * x + b) * cur
        if k and c is not None:
            if isinstance(c, tuple):
                nxt = nxt - x * c[1] * prev
            else:
                nxt = nxt - c * prev
        if d != 1:
            nxt = nxt / d
        prev, cur = cur, nxt
        out.append(cur)
    return out


def evaluate(spec: FamilySpec, n: int, x):
    """P_n(x) for the family in ``spec``; P_{-1} = 0."""
    if n == -1:
        return 0 * x
    return sequence(spec, n, x)[-1]


def coeffs(spec: FamilySpec, n: int) -> CoeffPoly:
    """Monomial coefficients of P_n; exact when q and parameters are Fractions."""
    if n == -1:
        return CoeffPoly()
    return sequence(spec, n, CoeffPoly.x())[-1]


def horner(poly: CoeffPoly, x):
    return poly(x)


# Convenience evaluators used throughout the package.

def H(n, x, q):
    """Upper-case q-Hermite H_n(x|q), with H_{-1} = 0."""
    if n < 0:
        return 0 * x
    return evaluate(FamilySpec(Family.qHermite_H, q), n, x)


def H_seq(n, x, q):
    return sequence(FamilySpec(Family.qHermite_H, q), n, x)


def h(n, x, q):
    if n < 0:
        return 0 * x
    return evaluate(FamilySpec(Family.qHermite_h, q), n, x)


def P(n, x, y, rho, q):
    if n < 0:
        return 0 * x
    return evaluate(FamilySpec.of(Family.ASC_P, q, y=y, rho=rho), n, x)


def P_seq(n, x, y, rho, q):
    return sequence(FamilySpec.of(Family.ASC_P, q, y=y, rho=rho), n, x)


def B(n, x, q):
    if n < 0:
        return 0 * x
    return evaluate(FamilySpec(Family.qInvHermite_B, q), n, x)


def bigH(n, x, a, q):
    if n < 0:
        return 0 * x
    return evaluate(FamilySpec.of(Family.bigqHermite_H, q, a=a), n, x)


def R(n, x, beta, q):
    if n < 0:
        return 0 * x
    return evaluate(FamilySpec.of(Family.Ultra_R, q, beta=beta), n, x)


def T(n, x):
    """Chebyshev T_n with the extension T_{-n} = T_n."""
    return evaluate(FamilySpec(Family.Cheb_T, 0), abs(n), x)


def U(n, x):
    """Chebyshev U_n with U_{-r} = 0 for r >= 1."""
    if n < 0:
        return 0 * x
    return evaluate(FamilySpec(Family.Cheb_U, 0), n, x)


def rogers_szego(n, x, q):
    return sum(q_binomial(n, k, q) * x**k for k in range(n + 1))


# Trigonometric / explicit-sum representations.

TRIG_FAMILIES = ("Cheb_T", "Cheb_U", "qHermite_h", "bigqHermite_h", "Ultra_C", "RogersSzego_link")


def eval_trig(family, n: int, p, q=0.5, imag_tol: float = 1e-12, **params) -> float:
    """Evaluate through the representation in the angle theta, x = cos(theta).

    ``RogersSzego_link`` returns exp(i n theta) s_n(exp(-2 i theta)|q), which
    equals h_n(x|q).
    """
    if not isinstance(p, TrigPoint):
        p = TrigPoint.from_x(p)
    th = p.theta
    family = family.value if isinstance(family, Family) else family
    q = qvalue(q)
    if family == "Cheb_T":
        return math.cos(n * th)
    if family == "Cheb_U":
        s = math.sin(th)
        if abs(s) < 1e-300:
            return float((n + 1) * (1 if p.x > 0 else (-1) ** n))
        return math.sin((n + 1) * th) / s
    if family == "qHermite_h":
        return float(sum(q_binomial(n, k, q) * math.cos((2 * k - n) * th) for k in range(n + 1)))
    if family == "RogersSzego_link":
        z = cmath.exp(-2j * th)
        val = cmath.exp(1j * n * th) * sum(q_binomial(n, k, q) * z**k for k in range(n + 1))
    elif family == "bigqHermite_h":
        a = params["a"]
        e = cmath.exp(1j * th)
        val = sum(q_binomial(n, k, q) * q_pochhammer(a * e, q, k) * cmath.exp(1j * (n - 2 * k) * th)
                  for k in range(n + 1))
    elif family == "Ultra_C":
        beta = params["beta"]
        val = sum(q_pochhammer(beta, q, k) * q_pochhammer(beta, q, n - k)
                  / (q_pochhammer(q, q, k) * q_pochhammer(q, q, n - k))
                  * cmath.exp(1j * (n - 2 * k) * th) for k in range(n + 1))
    else:
        raise ValueError(f"no trigonometric form for {family!r}")
    scale = max(1.0, abs(val))
    if abs(val.imag) > imag_tol * scale:
        raise ArithmeticError(f"imaginary part {val.imag:.3g} exceeds tolerance")
    return val.real


# Generating functions.

_WEIGHT_FACTORIAL = {Family.Hermite_H, Family.Hermite_h}
_WEIGHT_PLAIN = {Family.Cheb_T, Family.Cheb_U, Family.Ultra_C}
_WEIGHT_QPOCH = {Family.qHermite_h, Family.bigqHermite_h, Family.ASC_Q, Family.ASC_p,
                 Family.RogersSzego_s, Family.qInvHermite_b}
_WEIGHT_QFACT = {Family.qHermite_H, Family.bigqHermite_H, Family.ASC_P, Family.Ultra_R,
                 Family.qInvHermite_B}


def generating_weight(spec: FamilySpec, k: int):
    f, q = spec.family, spec.q
    if f in _WEIGHT_FACTORIAL:
        return 1 / math.factorial(k)
    if f in _WEIGHT_PLAIN:
        return 1
    if f in _WEIGHT_QPOCH:
        return 1 / q_pochhammer(q, q, k)
    return 1 / q_factorial(k, q)


def generating_closed_form(spec: FamilySpec, x, t, policy: TruncationPolicy = DEFAULT_POLICY):
    f, q, p = spec.family, spec.q, spec.params
    if f is Family.Hermite_H:
        return math.exp(x * t - t * t / 2)
    if f is Family.Hermite_h:
        return math.exp(2 * x * t - t * t)
    if f is Family.Cheb_T:
        return (1 - t * x) / (1 - 2 * t * x + t * t)
    if f is Family.Cheb_U:
        return 1 / (1 - 2 * t * x + t * t)
    if q == 1:
        if f is Family.qHermite_H:
            return math.exp(x * t - t * t / 2)
        if f is Family.bigqHermite_H:
            return math.exp((x - p["a"]) * t - t * t / 2)
        if f is Family.ASC_P:
            return math.exp((x - p["rho"] * p["y"]) * t - (1 - p["rho"] ** 2) * t * t / 2)
        if f is Family.Ultra_R:
            b = p["beta"]
            return math.exp((1 - b) * x * t - (1 - b * b) * t * t / 2)
        if f is Family.qInvHermite_B:
            return math.exp(-x * t + t * t / 2)
        if f is Family.RogersSzego_s:
            raise ValueError("no closed generating function for s_n at q = 1")
        raise ValueError(f"{f.value} has no q = 1 generating function")
    prod = lambda kind, *args: aux_product(kind, *args, q=q, policy=policy)
    poch = lambda a: q_pochhammer_inf(a, q, policy)
    if f is Family.qHermite_h:
        return 1 / prod("v", x, t)
    if f is Family.qHermite_H:
        return 1 / prod("V", x, t)
    if f is Family.bigqHermite_h:
        return poch(p["a"] * t) / prod("v", x, t)
    if f is Family.bigqHermite_H:
        return poch((1 - q) * p["a"] * t) / prod("V", x, t)
    if f is Family.ASC_Q:
        return poch(p["a"] * t) * poch(p["b"] * t) / prod("v", x, t)
    if f is Family.ASC_P:
        return prod("V", p["y"], p["rho"] * t) / prod("V", x, t)
    if f is Family.ASC_p:
        return prod("v", p["y"], p["rho"] * t) / prod("v", x, t)
    if f is Family.Ultra_C:
        return prod("v", x, p["beta"] * t) / prod("v", x, t)
    if f is Family.Ultra_R:
        return prod("V", x, p["beta"] * t) / prod("V", x, t)
    if f is Family.RogersSzego_s:
        return 1 / (poch(t) * poch(x * t))
    if f is Family.qInvHermite_B:
        return prod("V", x, t)
    if f is Family.qInvHermite_b:
        return prod("v", x, t)
    raise ValueError(f"no generating function for {f.value}")  # pragma: no cover


@dataclass(frozen=True)
class GeneratingSum:
    partial: complex
    closed: complex
    terms: int
    diverging: bool

    @property
    def residual(self) -> float:
        return abs(self.partial - self.closed)


def generating_partial_sum(spec: FamilySpec, x, t, N: int,
                           policy: TruncationPolicy = DEFAULT_POLICY) -> GeneratingSum:
    """Partial sum of the generating series up to degree N, and its closed form.

    ``diverging`` is set when the term magnitude grew for 10 consecutive k.
    """
    vals = sequence(spec, N, x)
    total, grow, prev, diverging = 0, 0, None, False
    tk = 1
    for k, v in enumerate(vals):
        term = generating_weight(spec, k) * tk * v
        total = total + term
        mag = abs(term)
        if prev is not None and mag > prev and mag > 0:
            grow += 1
            if grow >= 10:
                diverging = True
        else:
            grow = 0
        prev = mag
        tk = tk * t
    return GeneratingSum(total, generating_closed_form(spec, x, t, policy), len(vals), diverging)


# Rescalings between lower-case and upper-case families.

RESCALE_PAIRS = ("h-H", "b-B", "Q-P", "p-P", "C-R")


def asc_ab(y, rho, q):
    """The complex pair (a, b) with a + b = rho y sqrt(1-q), a b = rho^2, for y in S(q)."""
    s = math.sqrt(1 - q)
    r = cmath.sqrt(4 / (1 - q) - y * y)
    return s / 2 * rho * (y - 1j * r), s / 2 * rho * (y + 1j * r)


def rescale_check(pair: str, n: int, x, q, **params) -> float:
    """|upper-case value - rescaled lower-case value| at the S(q) point x.

    Uses the convention lower_n(u) = (1-q)^(n/2) upper_n(2u/sqrt(1-q)).
    """
    q = qvalue(q)
    if abs(q) >= 1:
        raise ValueError("rescaling needs |q| < 1")
    s = math.sqrt(1 - q)
    u = x * s / 2
    if pair == "h-H":
        up = H(n, x, q)
        low = h(n, u, q)
    elif pair == "b-B":
        up = B(n, x, q)
        low = evaluate(FamilySpec(Family.qInvHermite_b, q), n, u)
    elif pair == "Q-P":
        y, rho = params["y"], params["rho"]
        up = P(n, x, y, rho, q)
        a, b = asc_ab(y, rho, q)
        low = evaluate(FamilySpec.of(Family.ASC_Q, q, a=a, b=b), n, u)
    elif pair == "p-P":
        y, rho = params["y"], params["rho"]
        up = P(n, x, y, rho, q)
        low = evaluate(FamilySpec.of(Family.ASC_p, q, y=y * s / 2, rho=rho), n, u)
    elif pair == "C-R":
        beta = params["beta"]
        up = R(n, x, beta, q)
        low = evaluate(FamilySpec.of(Family.Ultra_C, q, beta=beta), n, u) * q_pochhammer(q, q, n)
    else:
        raise ValueError(f"unknown rescale pair {pair!r}")
    return abs(up - low / s**n)


def sup_h_on_grid(n: int, q, points: int = 1000) -> float:
    xs = np.linspace(-1.0, 1.0, points)
    return float(np.max(np.abs(h(n, xs, q))))
