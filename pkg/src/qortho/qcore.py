"""q-arithmetic primitives, auxiliary quadratics and truncated infinite products.

Every function here is written generically: ``q`` and the other arguments may
be Python ints, :class:`fractions.Fraction`, floats, complex numbers or (for
the quadratic families) numpy arrays. Exact inputs give exact outputs.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass, replace
from numbers import Number

import numpy as np


class ConvergenceWarning(UserWarning):
    """A truncated product or series hit its term cap before the tail bound."""


@dataclass(frozen=True)
class QParam:
    q: float

    def __post_init__(self):
        if not (-1 < self.q <= 1):
            raise ValueError(f"q must satisfy -1 < q <= 1, got {self.q}")

    @property
    def allows_infinite_products(self) -> bool:
        return abs(self.q) < 1

    @property
    def support(self) -> tuple[float, float]:
        """The interval S(q); the whole real line when q == 1."""
        if self.q == 1:
            return (-math.inf, math.inf)
        r = 2.0 / math.sqrt(1.0 - float(self.q))
        return (-r, r)


@dataclass(frozen=True)
class TruncationPolicy:
    abs_tol: float = 1e-14
    rel_tol: float = 1e-12
    max_terms: int = 1000

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")

    @classmethod
    def from_env(cls, **overrides) -> "TruncationPolicy":
        """Default policy with ``QORTHO_MAX_TERMS`` and keyword overrides applied."""
        pol = cls()
        env = os.environ.get("QORTHO_MAX_TERMS")
        if env:
            pol = replace(pol, max_terms=int(env))
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(pol, **overrides)


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class TrigPoint:
    x: float
    theta: float

    @classmethod
    def from_x(cls, x: float) -> "TrigPoint":
        if abs(x) > 1:
            raise ValueError(f"trigonometric substitution needs |x| <= 1, got {x}")
        return cls(float(x), math.acos(float(x)))


def qvalue(q) -> Number:
    return q.q if isinstance(q, QParam) else q


def support_radius(q) -> float:
    q = qvalue(q)
    if q == 1:
        return math.inf
    return 2.0 / math.sqrt(1.0 - float(q))


def q_bracket(n: int, q):
    """[n]_q = 1 + q + ... + q^(n-1)."""
    if n < 0:
        raise ValueError(f"q_bracket needs n >= 0, got {n}")
    q = qvalue(q)
    total = 0 * q
    p = 1 + 0 * q
    for _ in range(n):
        total += p
        p *= q
    return total


def q_factorial(n: int, q):
    if n < 0:
        raise ValueError(f"q_factorial needs n >= 0, got {n}")
    q = qvalue(q)
    out = 1 + 0 * q
    for j in range(1, n + 1):
        out *= q_bracket(j, q)
    return out


def q_binomial(n: int, k: int, q):
    """Gaussian binomial coefficient; zero outside 0 <= k <= n.

    Built by the multiplicative recurrence [n, j+1] = [n, j] [n-j]_q / [j+1]_q,
    so no factorial ratio is ever formed.
    """
    q = qvalue(q)
    if k < 0 or n < 0 or k > n:
        return 0 * q
    k = min(k, n - k)
    out = 1 + 0 * q
    for j in range(k):
        out = out * q_bracket(n - j, q) / q_bracket(j + 1, q)
    return out


def q_pochhammer(a, q, n: int):
    """(a; q)_n = prod_{j<n} (1 - a q^j)."""
    if n < 0:
        raise ValueError(f"q_pochhammer needs n >= 0, got {n}")
    q = qvalue(q)
    out = 1 + 0 * a * q
    p = 1 + 0 * q
    for _ in range(n):
        out = out * (1 - a * p)
        p = p * q
    return out


def q_pochhammer_multi(params, q, n: int):
    out = 1
    for a in params:
        out = out * q_pochhammer(a, q, n)
    return out


def truncation_length(c: float, q, policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[int, bool]:
    """Number of factors N with c |q|^N / (1 - |q|) < abs_tol, capped at max_terms.

    ``c`` bounds |factor_k - 1| / |q|^k. Returns ``(N, converged)``.
    """
    aq = abs(float(qvalue(q)))
    if aq >= 1:
        raise ValueError("infinite products need |q| < 1")
    c = float(np.max(np.abs(c)))
    if c == 0 or aq == 0:
        return 1, True
    target = policy.abs_tol * (1 - aq) / c
    if target >= 1:
        return 1, True
    n = int(math.ceil(math.log(target) / math.log(aq)))
    n = max(n, 1)
    if n > policy.max_terms:
        return policy.max_terms, False
    return n, True


def q_pochhammer_inf(a, q, policy: TruncationPolicy = DEFAULT_POLICY, full_output: bool = False):
    """(a; q)_infinity truncated by the geometric tail bound.

    With ``full_output`` returns ``(value, terms_used, converged)``.
    """
    qv = qvalue(q)
    if abs(qv) >= 1:
        raise ValueError("(a; q)_inf is only defined for |q| < 1")
    n, ok = truncation_length(abs(a), qv, policy)
    val = q_pochhammer(a, qv, n)
    if full_output:
        return val, n, ok
    return val


def q_pochhammer_inf_multi(params, q, policy: TruncationPolicy = DEFAULT_POLICY):
    out = 1
    for a in params:
        out = out * q_pochhammer_inf(a, q, policy)
    return out


# Auxiliary quadratics. Lower-case kinds live on [-1, 1], upper-case on S(q).

def _v(k, x, a, q):
    return 1 - 2 * a * x * q**k + a * a * q ** (2 * k)


def _V(k, x, a, q):
    return 1 - (1 - q) * a * x * q**k + (1 - q) * a * a * q ** (2 * k)


def _w(k, x, y, t, q):
    tt = t * t * q ** (2 * k)
    return (1 - tt) ** 2 - 4 * x * y * t * q**k * (1 + tt) + 4 * tt * (x * x + y * y)


def _W(k, x, y, t, q):
    tt = t * t * q ** (2 * k)
    return (1 - tt) ** 2 - (1 - q) * x * y * t * q**k * (1 + tt) + (1 - q) * tt * (x * x + y * y)


def _l(k, x, a, q):
    return (1 + a * q**k) ** 2 - 4 * x * x * a * q**k


def _L(k, x, a, q):
    return (1 + a * q**k) ** 2 - (1 - q) * x * x * a * q**k


_QUADRATICS = {"v": (_v, 2), "V": (_V, 2), "w": (_w, 3), "W": (_W, 3), "l": (_l, 2), "L": (_L, 2)}


def aux_quadratic(kind: str, k: int, *args, q):
    """Evaluate one of v, V, w, W, l, L at index k.

    ``v, V, l, L`` take ``(x, a)``; ``w, W`` take ``(x, y, t)``.
    """
    try:
        fn, arity = _QUADRATICS[kind]
    except KeyError:
        raise ValueError(f"unknown auxiliary quadratic {kind!r}") from None
    if len(args) != arity:
        raise TypeError(f"{kind} takes {arity} arguments, got {len(args)}")
    if k < 0:
        raise ValueError("k must be >= 0")
    return fn(k, *args, qvalue(q))


def _deviation_bound(kind, args, q):
    # |factor_k - 1| <= C |q|^k
    absargs = [np.abs(np.asarray(a, dtype=complex)) for a in args]
    s = abs(1 - q)
    if kind in ("v", "V"):
        x, a = absargs
        f = 2 if kind == "v" else s
        return f * a * x + (1 if kind == "v" else s) * a * a
    if kind in ("w", "W"):
        x, y, t = absargs
        f = 4 if kind == "w" else s
        return 2 * t * t + t**4 + f * x * y * t * (1 + t * t) + f * t * t * (x * x + y * y)
    x, a = absargs
    f = 4 if kind == "l" else s
    return 2 * a + a * a + f * x * x * a


def aux_product(kind: str, *args, q, policy: TruncationPolicy = DEFAULT_POLICY, full_output: bool = False):
    """prod_{k>=0} of an auxiliary quadratic, truncated by the tail bound.

    Arguments may be numpy arrays; the product is taken elementwise.
    """
    fn, arity = _QUADRATICS[kind]
    if len(args) != arity:
        raise TypeError(f"{kind} takes {arity} arguments, got {len(args)}")
    qv = qvalue(q)
    if abs(qv) >= 1:
        raise ValueError("infinite products need |q| < 1")
    n, ok = truncation_length(_deviation_bound(kind, args, qv), qv, policy)
    out = 1
    for k in range(n):
        out = out * fn(k, *args, qv)
    if full_output:
        return out, n, ok
    return out


def product_identity_check(which: str, x, y=0.0, a=0.0, t=0.0, q=0.5,
                           policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """|complex q-Pochhammer side - real quadratic product side| for one identity.

    ``rozklv`` uses (x, a), ``rozklw`` uses (x, y, t), ``rozkll`` uses (x, a);
    x = cos(theta), y = cos(phi) on the principal branch.
    """
    th = TrigPoint.from_x(x).theta
    if which == "rozklv":
        e = cmath.exp(1j * th)
        lhs = q_pochhammer_inf(a * e, q, policy) * q_pochhammer_inf(a / e, q, policy)
        rhs = aux_product("v", x, a, q=q, policy=policy)
    elif which == "rozklw":
        ph = TrigPoint.from_x(y).theta
        lhs = 1
        for z in (th + ph, th - ph, -(th - ph), -(th + ph)):
            lhs = lhs * q_pochhammer_inf(t * cmath.exp(1j * z), q, policy)
        rhs = aux_product("w", x, y, t, q=q, policy=policy)
    elif which == "rozkll":
        e = cmath.exp(2j * th)
        lhs = q_pochhammer_inf(a * e, q, policy) * q_pochhammer_inf(a / e, q, policy)
        rhs = aux_product("l", x, a, q=q, policy=policy)
    else:
        raise ValueError(f"unknown product identity {which!r}")
    return abs(lhs - rhs)


def rogers_szego_at_one(n: int, q):
    """s_n(1|q) = sum_k [n, k]_q, the Carlitz majorant of sup |h_n| on [-1, 1]."""
    return sum(q_binomial(n, k, q) for k in range(n + 1))
