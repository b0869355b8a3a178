"""Bilinear kernel series and their closed forms.

Every check computes the series term by term from the family recurrences and
the closed form from q-products (and phi/W series where they appear), so the
two sides share nothing beyond the qcore primitives.

Where a closed form differs from its usual printed statement the form used
here is the one confirmed numerically against the series; the docstring of
each kernel gives the exact statement implemented.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable

import mpmath

from ..polyfam import FamilySpec, sequence
from ..qcore import (DEFAULT_POLICY, TruncationPolicy, aux_product, q_binomial, q_bracket, q_factorial, q_pochhammer,
                     q_pochhammer_inf, qvalue, support_radius)
from ..qhyper import PhiSpec, phi, very_well_poised_W


class ConditioningError(ArithmeticError):
    """A quantity that must be inverted is numerically zero."""


@dataclass(frozen=True)
class KernelResult:
    series_value: float
    closed_value: float
    residual: float
    terms_used: int
    converged: bool

    @property
    def relative_residual(self) -> float:
        return self.residual / max(1.0, abs(self.closed_value))


def _result(series, closed, terms, converged) -> KernelResult:
    return KernelResult(series, closed, abs(series - closed), terms, converged)


class _Lazy:
    """P_0(x), P_1(x), ... of one family, extended on demand."""

    def __init__(self, family, q, x, **params):
        self.spec = FamilySpec.of(family, q, **params)
        self.x = x
        self.vals: list = []

    def __getitem__(self, n):
        if n < 0:
            return 0 * self.x
        if n >= len(self.vals):
            self.vals = sequence(self.spec, max(2 * n, 64), self.x)
        return self.vals[n]


def series_sum(term: Callable[[int], complex], policy: TruncationPolicy = DEFAULT_POLICY,
               quiet: int = 5, start: int = 0) -> tuple[complex, int, bool]:
    """sum_n term(n) until ``quiet`` consecutive terms fall below the policy tolerance.

    Returns (sum, terms used, converged).
    """
    total, n, ok, _ = series_sum_magnitude(term, policy, quiet, start)
    return total, n, ok


def series_sum_magnitude(term: Callable[[int], complex], policy: TruncationPolicy = DEFAULT_POLICY,
                         quiet: int = 5, start: int = 0) -> tuple[complex, int, bool, float]:
    """As :func:`series_sum`, also returning sum |term|; the ratio sum|t| / |sum t|
    is the condition number of the summation."""
    total, small, mag = 0, 0, 0.0
    for n in range(start, start + policy.max_terms):
        t = term(n)
        total = total + t
        mag += abs(t)
        if abs(t) <= policy.abs_tol + policy.rel_tol * abs(total):
            small += 1
            if small >= quiet:
                return total, n - start + 1, True, mag
        else:
            small = 0
    return total, policy.max_terms, False, mag


def _real(z, tol=1e-8):
    z = complex(z)
    if abs(z.imag) > tol * max(1.0, abs(z.real)):
        raise ArithmeticError(f"closed form has imaginary part {z.imag:.3g}")
    return z.real


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


def _in_support(q, *xs):
    r = support_radius(q)
    for x in xs:
        _require(abs(x) < r, f"point {x} is not inside S(q)")


def _in_unit(*xs):
    for x in xs:
        _require(abs(x) <= 1, f"point {x} is not in [-1, 1]")


def _poch(*zs, q, policy):
    out = 1
    for z in zs:
        out = out * q_pochhammer_inf(z, q, policy)
    return out


# ---------------------------------------------------------------- Poisson-Mehler

def poisson_mehler(x, y, rho, q, policy: TruncationPolicy = DEFAULT_POLICY,
                   series_terms: int | None = None) -> KernelResult:
    """sum rho^n/[n]_q! H_n(x|q) H_n(y|q) against (rho^2)_inf / prod W_k(x, y, rho|q).

    ``series_terms`` caps the bilinear series alone; the infinite products of
    the closed side are still truncated by ``policy``.

    At q = 1 the closed side is the Gaussian Mehler kernel
    exp((x^2+y^2)/2 - (x^2+y^2-2 rho x y)/(2(1-rho^2))) / sqrt(1-rho^2).
    """
    q = qvalue(q)
    _require(abs(rho) < 1, "need |rho| < 1")
    if q == 1:
        fam = "Hermite_H"
        closed = math.exp((x * x + y * y) / 2 - (x * x + y * y - 2 * rho * x * y) / (2 * (1 - rho * rho)))
        closed /= math.sqrt(1 - rho * rho)
    else:
        _in_support(q, x, y)
        fam = "qHermite_H"
        closed = q_pochhammer_inf(rho * rho, q, policy) / aux_product("W", x, y, rho, q=q, policy=policy)
    if series_terms is not None:
        policy = replace(policy, max_terms=min(policy.max_terms, series_terms))
    s, n, ok, _ = _pm_series(x, y, rho, q, fam, policy)
    return _result(s, closed, n, ok)


def _pm_series(x, y, rho, q, fam, policy):
    hx, hy = _Lazy(fam, q, x), _Lazy(fam, q, y)
    state = {"w": 1.0}

    def term(n):
        if n:
            state["w"] *= rho / q_bracket(n, q)
        return state["w"] * hx[n] * hy[n]

    return series_sum_magnitude(term, policy)


def poisson_mehler_diagonal_corollary(x, rho, q, policy: TruncationPolicy = DEFAULT_POLICY) -> KernelResult:
    """sum_k rho^k (rho q^(k+1))_inf / [k]_q! H_2k(x|q) against (rho^2)_inf/(rho)_inf prod 1/L_k(x, rho|q)."""
    q = qvalue(q)
    _require(abs(q) < 1 and abs(rho) < 1, "need |q|, |rho| < 1")
    _in_support(q, x)
    closed = (q_pochhammer_inf(rho * rho, q, policy) / q_pochhammer_inf(rho, q, policy)
              / aux_product("L", x, rho, q=q, policy=policy))
    h = _Lazy("qHermite_H", q, x)
    base = q_pochhammer_inf(rho * q, q, policy)
    state = {"w": base}

    def term(k):
        if k:
            # (rho q^(k+1))_inf = (rho q^k)_inf / (1 - rho q^k); 1/[k]_q! gains 1/[k]_q
            state["w"] *= rho / ((1 - rho * q**k) * (1 - q**k) / (1 - q))
        return state["w"] * h[2 * k]

    s, n, ok = series_sum(term, policy)
    return _result(s, closed, n, ok)


# ---------------------------------------------------------------- kernel closed forms

def _cheb_i(x, y, t, policy):
    """sum t^n U_n(x/2) U_n(y/2) = (1-t^2)/((1-t^2)^2 - t(1+t^2)xy + t^2(x^2+y^2)), |x|, |y| < 2."""
    _require(abs(t) < 1, "need |t| < 1")
    _require(abs(x) < 2 and abs(y) < 2, "need |x|, |y| < 2")
    ux, uy = _Lazy("Cheb_U", 0.0, x / 2), _Lazy("Cheb_U", 0.0, y / 2)
    s, n, ok = series_sum(lambda k: t**k * ux[k] * uy[k], policy)
    closed = (1 - t * t) / ((1 - t * t) ** 2 - t * (1 + t * t) * x * y + t * t * (x * x + y * y))
    return _result(s, closed, n, ok)


def _ultra_ii(x, y, beta, t, q, policy):
    """sum (1-beta q^n)(q)_n / ((1-beta)(beta^2)_n) t^n C_n(x|beta) C_n(y|beta)
    = (beta q, t^2)_inf / (beta^2, beta t^2)_inf prod w_k(x,y,t beta)/w_k(x,y,t)
      * 8W7(beta t^2/q; beta/q, t e^{+-i(theta+phi)}, t e^{+-i(theta-phi)}; q, beta q)."""
    _require(abs(t) < 1 and abs(beta) < 1 and abs(q) < 1, "need |t|, |beta|, |q| < 1")
    _in_unit(x, y)
    cx, cy = _Lazy("Ultra_C", q, x, beta=beta), _Lazy("Ultra_C", q, y, beta=beta)

    def term(n):
        return ((1 - beta * q**n) * q_pochhammer(q, q, n) / ((1 - beta) * q_pochhammer(beta * beta, q, n))
                * t**n * cx[n] * cy[n])

    s, n, ok = series_sum(term, policy)
    if t == 0:
        return _result(s, 1.0, n, ok)
    pre = (_poch(beta * q, t * t, q=q, policy=policy) / _poch(beta * beta, beta * t * t, q=q, policy=policy)
           * aux_product("w", x, y, t * beta, q=q, policy=policy) / aux_product("w", x, y, t, q=q, policy=policy))
    if beta == 0:
        return _result(s, pre, n, ok)
    th, ph = math.acos(x), math.acos(y)
    e = [t * cmath.exp(1j * s_ * a) for a in (th + ph, th - ph) for s_ in (1, -1)]
    W = very_well_poised_W(4, beta * t * t / q, [beta / q, *e], q, beta * q, policy)
    return _result(s, _real(pre * W.value), n, ok and W.converged)


def _bigH_iii(x, y, a, b, t, q, policy):
    """sum (tb/a)^n/(q)_n h_n(x|a) h_n(y|b), with tau = tb/a,
    = (tau^2, b e^{-i phi}, tb e^{i phi})_inf / prod w_k(x,y,tau)
      * 3phi2(t, tau e^{i(phi+theta)}, tau e^{i(phi-theta)}; tau^2, tb e^{i phi}; q, b e^{-i phi})."""
    _require(a != 0, "need a != 0")
    tau = t * b / a
    _require(abs(t) <= 1 and abs(tau) < 1 and abs(b) < 1 and abs(q) < 1, "need |t| <= 1, |tb/a|, |b|, |q| < 1")
    _in_unit(x, y)
    hx, hy = _Lazy("bigqHermite_h", q, x, a=a), _Lazy("bigqHermite_h", q, y, a=b)
    s, n, ok = series_sum(lambda k: tau**k / q_pochhammer(q, q, k) * hx[k] * hy[k], policy)
    th, ph = math.acos(x), math.acos(y)
    E = lambda z: cmath.exp(1j * z)
    pre = _poch(tau * tau, b * E(-ph), t * b * E(ph), q=q, policy=policy) / aux_product("w", x, y, tau, q=q,
                                                                                        policy=policy)
    f = phi(PhiSpec([t, tau * E(ph + th), tau * E(ph - th)], [tau * tau, t * b * E(ph)], q, b * E(-ph)), policy)
    return _result(s, _real(pre * f.value), n, ok and f.converged)


def _asc_series(x, y, a, b, alpha, beta, c, q, policy):
    qx, qy = _Lazy("ASC_Q", q, x, a=a, b=b), _Lazy("ASC_Q", q, y, a=alpha, b=beta)
    return series_sum(lambda k: c**k / (q_pochhammer(q, q, k) * q_pochhammer(a * b, q, k)) * qx[k] * qy[k],
                      policy)


def _ascQ_check(x, y, a, b, alpha, t, q):
    _require(a != 0 and alpha != 0, "need a, alpha != 0")
    _require(abs(t) < 1 and abs(q) < 1 and abs(a * b) < 1, "need |t|, |q|, |ab| < 1")
    _require(abs(b) < 1, "need |b| < 1")
    _in_unit(x, y)
    return a * b / alpha


def _ascQ_iv_a(x, y, a, b, alpha, t, q, policy):
    """sum (t alpha/a)^n/((q)_n (ab)_n) Q_n(x|a,b) Q_n(y|alpha,beta), ab = alpha beta, u = alpha t/a,
    = (alpha^2 t^2/a^2, alpha^2 t e^{i theta}/a, b e^{-i theta}, bt e^{i theta}, alpha t e^{+-i phi})_inf
      / ((ab, alpha^2 t^2 e^{i theta}/a)_inf prod w_k(x,y,u))
      * 8W7(alpha^2 t^2 e^{i theta}/(aq); t, alpha t/beta, a e^{i theta}, u e^{i(theta+-phi)}; q, b e^{-i theta})."""
    beta = _ascQ_check(x, y, a, b, alpha, t, q)
    _require(beta != 0 and abs(alpha * t / a) < 1, "need beta != 0 and |alpha t / a| < 1")
    u = alpha * t / a
    s, n, ok = _asc_series(x, y, a, b, alpha, beta, u, q, policy)
    if t == 0:
        return _result(s, 1.0, n, ok)
    th, ph = math.acos(x), math.acos(y)
    E = lambda z: cmath.exp(1j * z)
    num = _poch(u * u, alpha * alpha * t / a * E(th), b * E(-th), b * t * E(th), alpha * t * E(-ph),
                alpha * t * E(ph), q=q, policy=policy)
    den = _poch(a * b, alpha * alpha * t * t / a * E(th), q=q, policy=policy) * aux_product("w", x, y, u, q=q,
                                                                                           policy=policy)
    W = very_well_poised_W(4, alpha * alpha * t * t * E(th) / (a * q),
                           [t, alpha * t / beta, a * E(th), u * E(th + ph), u * E(th - ph)], q, b * E(-th), policy)
    return _result(s, _real(num / den * W.value), n, ok and W.converged)


def _ascQ_iv_b(x, y, a, b, alpha, t, q, policy):
    """sum t^n/((q)_n (ab)_n) Q_n(x|a,b) Q_n(y|alpha,beta), ab = alpha beta,
    = (beta t/a)_inf/(alpha a t)_inf prod v_k(x, alpha t) v_k(y, a t) / w_k(x,y,t)
      * 8W7(alpha a t/q; alpha t/b, a e^{+-i theta}, alpha e^{+-i phi}; q, beta t/a)."""
    beta = _ascQ_check(x, y, a, b, alpha, t, q)
    _require(b != 0 and abs(beta * t / a) < 1, "need b != 0 and |beta t / a| < 1")
    s, n, ok = _asc_series(x, y, a, b, alpha, beta, t, q, policy)
    if t == 0:
        return _result(s, 1.0, n, ok)
    th, ph = math.acos(x), math.acos(y)
    E = lambda z: cmath.exp(1j * z)
    pre = (q_pochhammer_inf(beta * t / a, q, policy) / q_pochhammer_inf(alpha * a * t, q, policy)
           * aux_product("v", x, alpha * t, q=q, policy=policy) * aux_product("v", y, a * t, q=q, policy=policy)
           / aux_product("w", x, y, t, q=q, policy=policy))
    W = very_well_poised_W(4, alpha * a * t / q, [alpha * t / b, a * E(th), a * E(-th), alpha * E(ph), alpha * E(-ph)],
                           q, beta * t / a, policy)
    return _result(s, _real(pre * W.value), n, ok and W.converged)


def _ascP_v_series(x, y, z, rho1, rho2, q, policy):
    px, py = _Lazy("ASC_P", q, x, y=z, rho=rho2), _Lazy("ASC_P", q, y, y=z, rho=rho2 / rho1)
    return series_sum_magnitude(lambda k: rho1**k / (q_factorial(k, q) * q_pochhammer(rho2 * rho2, q, k)) * px[k] * py[k],
                      policy)


def _ascP_v_closed(x, y, z, rho1, rho2, q, policy):
    return (q_pochhammer_inf(rho1 * rho1, q, policy) / q_pochhammer_inf(rho2 * rho2, q, policy)
            * aux_product("W", x, z, rho2, q=q, policy=policy) / aux_product("W", x, y, rho1, q=q, policy=policy))


def _ascP_v(x, y, z, rho1, rho2, q, policy):
    """sum rho1^n/([n]_q! (rho2^2)_n) P_n(x|z,rho2) P_n(y|z,rho2/rho1)
    = (rho1^2)_inf/(rho2^2)_inf prod W_k(x,z,rho2)/W_k(x,y,rho1) >= 0."""
    _require(rho1 != 0, "need rho1 != 0")
    _require(abs(rho1) < 1 and abs(rho2) < 1 and abs(q) < 1, "need |rho1|, |rho2|, |q| < 1")
    _in_support(q, x, y, z)
    s, n, ok, _ = _ascP_v_series(x, y, z, rho1, rho2, q, policy)
    res = _result(s, _ascP_v_closed(x, y, z, rho1, rho2, q, policy), n, ok)
    _assert_nonnegative(res)
    return res


def _bigH_corollary(x, y, a, b, q, policy):
    """sum b^n/([n]_q! a^n) H_n(x|a) H_n(y|b) = (b^2/a^2)_inf prod V_k(y,b)/W_k(x,y,b/a) >= 0, |a| > |b|."""
    _require(abs(a) > abs(b), "need |a| > |b|")
    _require(abs(q) < 1, "need |q| < 1")
    _in_support(q, x, y)
    r = b / a
    hx, hy = _Lazy("bigqHermite_H", q, x, a=a), _Lazy("bigqHermite_H", q, y, a=b)
    s, n, ok = series_sum(lambda k: r**k / q_factorial(k, q) * hx[k] * hy[k], policy)
    closed = (q_pochhammer_inf(r * r, q, policy) * aux_product("V", y, b, q=q, policy=policy)
              / aux_product("W", x, y, r, q=q, policy=policy))
    res = _result(s, closed, n, ok)
    _assert_nonnegative(res)
    return res


def _assert_nonnegative(res: KernelResult, tol: float = 1e-10):
    if res.series_value < -tol:
        raise ArithmeticError(f"kernel series is negative ({res.series_value:.3g}) where it must be >= 0")


KERNEL_KINDS: dict[str, tuple[Callable, tuple]] = {
    "cheb_i": (_cheb_i, ("x", "y", "t")),
    "ultra_ii": (_ultra_ii, ("x", "y", "beta", "t", "q")),
    "bigH_iii": (_bigH_iii, ("x", "y", "a", "b", "t", "q")),
    "ascQ_iv_a": (_ascQ_iv_a, ("x", "y", "a", "b", "alpha", "t", "q")),
    "ascQ_iv_b": (_ascQ_iv_b, ("x", "y", "a", "b", "alpha", "t", "q")),
    "ascP_v": (_ascP_v, ("x", "y", "z", "rho1", "rho2", "q")),
    "bigH_corollary": (_bigH_corollary, ("x", "y", "a", "b", "q")),
}


def kernel_sum(kind: str, policy: TruncationPolicy = DEFAULT_POLICY, **args) -> KernelResult:
    """Series and closed form of one kernel; see KERNEL_KINDS for the argument names."""
    try:
        fn, names = KERNEL_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown kernel {kind!r}; known: {sorted(KERNEL_KINDS)}") from None
    missing = [n for n in names if n not in args]
    extra = sorted(set(args) - set(names))
    if missing or extra:
        raise TypeError(f"{kind} takes {names}; missing {missing}, unexpected {extra}")
    return fn(*(args[n] for n in names), policy)


# ---------------------------------------------------------------- reciprocal kernels

def _mehler_digits(t, a, b, scale, policy) -> float:
    """Decimal digits lost to cancellation in sum t^n/n! He_n(a) He_n(b), from the majorant
    |t|^n/n! M_n(|a|) M_n(|b|) with M_{n+1} = |z| M_n + n M_{n-1} (which bounds |He_n(z)|)."""
    za, zb = abs(a), abs(b)
    lt = math.log(abs(t)) if t else -math.inf
    # m_n = M_n / sqrt(n!) keeps the recurrence in range; terms are tracked by their logs
    ma, mb = [1.0, za], [1.0, zb]
    logs = []
    for n in range(policy.max_terms):
        if n >= 1:
            ma.append((za * ma[-1] + math.sqrt(n) * ma[-2]) / math.sqrt(n + 1))
            mb.append((zb * mb[-1] + math.sqrt(n) * mb[-2]) / math.sqrt(n + 1))
        lt_n = (n * lt if n else 0.0) + math.log(ma[n] or 1e-300) + math.log(mb[n] or 1e-300)
        logs.append(lt_n)
        if n > 10 and lt_n < max(logs) - 70:
            break
    peak = max(logs)
    log_total = peak + math.log(sum(math.exp(v - peak) for v in logs))
    return max(0.0, (log_total - math.log(scale)) / math.log(10)) if scale > 0 else 0.0


def _mehler_mp(t, a, b, digits, policy):
    """sum t^n/n! He_n(a) He_n(b) in mpmath at 20 + ``digits`` significant digits.

    Returns (sum, sum |term|, terms used, converged) as Python numbers."""
    with mpmath.workdps(int(20 + math.ceil(digits))):
        t, a, b = mpmath.mpmathify(t), mpmath.mpmathify(a), mpmath.mpmathify(b)
        ha0, ha1, hb0, hb1 = mpmath.mpf(1), a, mpmath.mpf(1), b
        w, total, mag, small = mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), 0
        for n in range(policy.max_terms):
            term = w * ha0 * hb0
            total += term
            mag += abs(term)
            if abs(term) <= policy.abs_tol + policy.rel_tol * abs(total):
                small += 1
                if small >= 5:
                    return complex(total), float(mag), n + 1, True
            else:
                small = 0
            w *= t / (n + 1)
            ha0, ha1 = ha1, a * ha1 - (n + 1) * ha0
            hb0, hb1 = hb1, b * hb1 - (n + 1) * hb0
        return complex(total), float(mag), policy.max_terms, False


def _recip_i(x, y, rho, q, policy):
    """1/sum rho^n/[n]! H_n(x) H_n(y) = sum rho^n/([n]! (rho^2)_n) B_n(y) P_n(x|y,rho)."""
    _require(abs(rho) < 1 and abs(q) < 1, "need |rho|, |q| < 1")
    _in_support(q, x, y)
    kern, kn, kok, kmag = _pm_series(x, y, rho, q, "qHermite_H", policy)
    b, p = _Lazy("qInvHermite_B", q, y), _Lazy("ASC_P", q, x, y=y, rho=rho)
    s, n, ok, mag = series_sum_magnitude(
        lambda k: rho**k / (q_factorial(k, q) * q_pochhammer(rho * rho, q, k)) * b[k] * p[k], policy)
    return kern, kmag, s, mag, max(n, kn), ok and kok


def _recip_ii_q1(x, y, rho, policy):
    """1/sum rho^n/n! He_n(x) He_n(y) = sum (i rho)^n/(n! (1-rho^2)^(n/2)) He_n(iy) He_n((x-rho y)/sqrt(1-rho^2)).

    The right side converges like (rho^2/(1-rho^2))^(n/2), so near rho^2 = 1/2 it
    needs thousands of terms that dwarf the sum; both series are therefore summed
    in mpmath with the precision raised by the digits lost to cancellation.
    """
    _require(rho * rho < 0.5, "need rho^2 < 1/2")
    sr = math.sqrt(1 - rho * rho)
    u = (x - rho * y) / sr
    # log of the Gaussian kernel: sets the size both sums should come out at
    logk = (x * x + y * y) / 2 - (x * x + y * y - 2 * rho * x * y) / (2 * (1 - rho * rho)) - math.log(sr)
    kd = _mehler_digits(rho, x, y, math.exp(max(min(logk, 700), -700)), policy)
    kern, kmag, kn, kok = _mehler_mp(rho, x, y, kd, policy)
    rd = _mehler_digits(rho / sr, y, u, math.exp(max(min(-logk, 700), -700)), policy)
    s, mag, n, ok = _mehler_mp(1j * rho / sr, 1j * y, u, rd, policy)
    return kern.real, kmag, _real(s), mag, max(n, kn), ok and kok


def _recip_iii(x, y, a, b, q, policy):
    """1/sum (a/b)^n/[n]! H_n(x|a) H_n(y|b) = sum (a/b)^n/([n]! (a^2/b^2)_n) B_n(y|b) P_n(x|y,a/b), |a| < |b|,
    with B_n(y|b) = sum_j [n,j] b^(n-j) B_j(y)."""
    _require(abs(a) < abs(b), "need |a| < |b|")
    _require(abs(q) < 1, "need |q| < 1")
    _in_support(q, x, y)
    r = a / b
    hx, hy = _Lazy("bigqHermite_H", q, x, a=a), _Lazy("bigqHermite_H", q, y, a=b)
    ks, kn, kok, kmag = series_sum_magnitude(lambda k: r**k / q_factorial(k, q) * hx[k] * hy[k], policy)
    bq, p = _Lazy("qInvHermite_B", q, y), _Lazy("ASC_P", q, x, y=y, rho=r)

    def bshift(m):
        return sum(q_binomial(m, j, q) * b ** (m - j) * bq[j] for j in range(m + 1))

    s, n, ok, mag = series_sum_magnitude(
        lambda k: r**k / (q_factorial(k, q) * q_pochhammer(r * r, q, k)) * bshift(k) * p[k], policy)
    return ks, kmag, s, mag, max(n, kn), ok and kok


def _recip_iv(x, y, z, rho1, rho2, q, policy):
    """1/sum rho1^n/([n]! (rho2^2)_n) P_n(x|z,rho2) P_n(y|z,rho2/rho1)
    = sum rho2^n/([n]! (rho1^2)_n) P_n(x|y,rho1) P_n(z|y,rho1/rho2)."""
    _require(rho1 != 0 and rho2 != 0, "need rho1, rho2 != 0")
    _require(abs(rho1) < 1 and abs(rho2) < 1 and abs(q) < 1, "need |rho1|, |rho2|, |q| < 1")
    _in_support(q, x, y, z)
    ks, kn, kok, kmag = _ascP_v_series(x, y, z, rho1, rho2, q, policy)
    s, n, ok, mag = _ascP_v_series(x, z, y, rho2, rho1, q, policy)
    return ks, kmag, s, mag, max(n, kn), ok and kok


RECIPROCAL_KINDS: dict[str, tuple[Callable, tuple]] = {
    "recip_i": (_recip_i, ("x", "y", "rho", "q")),
    "recip_ii_q1": (_recip_ii_q1, ("x", "y", "rho")),
    "recip_iii": (_recip_iii, ("x", "y", "a", "b", "q")),
    "recip_iv": (_recip_iv, ("x", "y", "z", "rho1", "rho2", "q")),
}

# sums whose condition number sum|t|/|sum t| exceeds this lose more than ~1e-8 to rounding
MAX_CONDITION = 1e8


def reciprocal_expansion(kind: str, policy: TruncationPolicy = DEFAULT_POLICY, **args) -> KernelResult:
    """series_value = the reciprocal expansion, closed_value = 1 / (kernel series).

    Raises ConditioningError when the kernel series is below 1e-8 in size, or when
    either float series has condition number above MAX_CONDITION (recip_ii_q1 is
    summed in extended precision and is exempt from the latter).
    """
    try:
        fn, names = RECIPROCAL_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown reciprocal kernel {kind!r}; known: {sorted(RECIPROCAL_KINDS)}") from None
    missing = [n for n in names if n not in args]
    extra = sorted(set(args) - set(names))
    if missing or extra:
        raise TypeError(f"{kind} takes {names}; missing {missing}, unexpected {extra}")
    kern, kmag, recip, mag, n, ok = fn(*(args[n] for n in names), policy)
    if abs(kern) < 1e-8:
        raise ConditioningError(f"kernel series {kern:.3g} is too close to zero to invert")
    if kind != "recip_ii_q1":
        cond = max(kmag / abs(kern), mag / abs(recip) if recip else math.inf)
        if cond > MAX_CONDITION:
            raise ConditioningError(f"series condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")
    return _result(recip, 1 / kern, n, ok)


# ---------------------------------------------------------------- gamma_{m,k}, Q_{m,k}, C_n

def gamma_mk(m: int, k: int, x, y, rho, q, policy: TruncationPolicy = DEFAULT_POLICY) -> tuple[float, bool]:
    """gamma_{m,k} = sum_j rho^j/[j]! H_{j+m}(x) H_{j+k}(y), returned with a convergence flag."""
    _require(m >= 0 and k >= 0, "need m, k >= 0")
    _require(abs(rho) < 1 and abs(q) < 1, "need |rho|, |q| < 1")
    hx, hy = _Lazy("qHermite_H", q, x), _Lazy("qHermite_H", q, y)
    s, _, ok = series_sum(lambda j: rho**j / q_factorial(j, q) * hx[j + m] * hy[j + k], policy)
    return s, ok


def Q_mk(m: int, k: int, x, y, rho, q):
    """Q_{m,k}(x,y|rho) = sum_{s<=k} (-1)^s q^C(s,2) [k,s] rho^s H_{k-s}(y) P_{m+s}(x|y,rho)/(rho^2)_{m+s}."""
    _require(m >= 0 and k >= 0, "need m, k >= 0")
    hy = sequence(FamilySpec.of("qHermite_H", q), k, y)
    p = sequence(FamilySpec.of("ASC_P", q, y=y, rho=rho), m + k, x)
    out = 0
    for s in range(k + 1):
        d = q_pochhammer(rho * rho, q, m + s)
        if abs(d) < 1e-14:
            raise ConditioningError("(rho^2)_{m+s} vanishes")
        out += (-1) ** s * q ** (s * (s - 1) // 2) * q_binomial(k, s, q) * rho**s * hy[k - s] * p[m + s] / d
    return out


def C_n_aux(n: int, x, y, rho1, rho2, rho3, q, form: str = "lemma"):
    """C_n(x,y|rho1,rho2,rho3) = sum_k [n,k] rho1^(n-k) rho2^k Q_{n-k,k}(x,y|rho3).

    ``form="definition"`` evaluates that sum; ``form="lemma"`` the closed form
    sum_j [n,j] rho2^(n-j) H_{n-j}(y) P_j(x|y,rho3) prod_{i<j}(rho1 - rho2 rho3 q^i) / (rho3^2)_j.
    """
    if form == "definition":
        return sum(q_binomial(n, k, q) * rho1 ** (n - k) * rho2**k * Q_mk(n - k, k, x, y, rho3, q)
                   for k in range(n + 1))
    if form != "lemma":
        raise ValueError("form must be 'lemma' or 'definition'")
    hy = sequence(FamilySpec.of("qHermite_H", q), n, y)
    p = sequence(FamilySpec.of("ASC_P", q, y=y, rho=rho3), n, x)
    out, prod = 0, 1
    for j in range(n + 1):
        out += q_binomial(n, j, q) * rho2 ** (n - j) * hy[n - j] * p[j] * prod / q_pochhammer(rho3 * rho3, q, j)
        prod *= rho1 - rho2 * rho3 * q**j
    return out


@dataclass(frozen=True)
class CarlitzResiduals:
    suma_h: float
    upr_car: float
    lhs: float


def carlitz_bilinear_check(m: int, n: int, x, y, t, q, policy: TruncationPolicy = DEFAULT_POLICY) -> CarlitzResiduals:
    """Residuals of the shifted bilinear h-series:

    sum_k t^k/(q)_k h_{m+k}(x) h_{n+k}(y) = (t^2)_inf / prod w_k(x,y,t) * D_{m,n}, with
    D_{m,n} = sum_{k<=m, l<=n} [m,k][n,l] (t e^{i(phi-theta)})_k (t e^{i(theta-phi)})_l
              (t e^{-i(theta+phi)})_{k+l} / (t^2)_{k+l} e^{-i(m-2k)theta} e^{-i(n-2l)phi},
    and D_{m,n} = sum_j (-1)^j q^C(j,2) [n,j] t^j h_{n-j}(y) p_{m+j}(x|y,t) / (t^2)_{m+j}.
    """
    _require(abs(t) < 1 and abs(q) < 1, "need |t|, |q| < 1")
    _in_unit(x, y)
    hx, hy = _Lazy("qHermite_h", q, x), _Lazy("qHermite_h", q, y)
    lhs, _, ok = series_sum(lambda k: t**k / q_pochhammer(q, q, k) * hx[m + k] * hy[n + k], policy)
    th, ph = math.acos(x), math.acos(y)
    E = lambda z: cmath.exp(1j * z)
    D = 0
    for k in range(m + 1):
        for l in range(n + 1):
            D += (q_binomial(m, k, q) * q_binomial(n, l, q) * q_pochhammer(t * E(ph - th), q, k)
                  * q_pochhammer(t * E(th - ph), q, l) * q_pochhammer(t * E(-th - ph), q, k + l)
                  / q_pochhammer(t * t, q, k + l) * E(-(m - 2 * k) * th) * E(-(n - 2 * l) * ph))
    closed = q_pochhammer_inf(t * t, q, policy) / aux_product("w", x, y, t, q=q, policy=policy) * D
    pl = sequence(FamilySpec.of("ASC_p", q, y=y, rho=t), m + n, x)
    D2 = sum((-1) ** j * q ** (j * (j - 1) // 2) * q_binomial(n, j, q) * t**j * hy[n - j] * pl[m + j]
             / q_pochhammer(t * t, q, m + j) for j in range(n + 1))
    return CarlitzResiduals(abs(lhs - _real(closed)), abs(D - D2), lhs)
