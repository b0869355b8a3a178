"""The q-Kibble-Slepian sum

    g(x1, x2, x3) = sum_{k,m,n >= 0} rho12^k rho13^m rho23^n / ([k]! [m]! [n]!)
                    H_{k+m}(x1) H_{k+n}(x2) H_{m+n}(x3)

in three representations: the direct triple sum, an expansion in q-Hermite
polynomials of x2 with coefficients C_s(x1, x3), and an expansion in pairs of
Al-Salam-Chihara polynomials.
"""

from __future__ import annotations

import functools
import itertools
import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from ..polyfam import FamilySpec, sequence
from ..qcore import (DEFAULT_POLICY, TruncationPolicy, aux_product, q_binomial, q_factorial, q_pochhammer,
                     q_pochhammer_inf, qvalue, support_radius)
from .sums import ConditioningError


@dataclass(frozen=True)
class KSParams:
    rho12: float
    rho13: float
    rho23: float

    def __post_init__(self):
        for r in (self.rho12, self.rho13, self.rho23):
            if not abs(r) < 1:
                raise ValueError("each |rho_ij| must be < 1")

    @property
    def gaussian_pd(self) -> bool:
        """Positive definiteness of the Gaussian correlation matrix (informational only)."""
        r12, r13, r23 = self.rho12, self.rho13, self.rho23
        return 1 + 2 * r12 * r13 * r23 - r12**2 - r13**2 - r23**2 > 0


@dataclass(frozen=True)
class KSValue:
    value: float
    terms: int
    converged: bool
    nonzero_terms: int | None = None


REPRESENTATIONS = ("direct_sum", "theorem_i", "theorem_ii")


def carlitz_bound(n_max: int, q) -> np.ndarray:
    """B_j >= sup_{x in S(q)} |H_j(x|q)|, from |h_j| <= sum_k |[j,k]_q| on [-1, 1]."""
    q = float(q)
    s = np.empty(n_max)
    row = np.array([1.0])
    for j in range(n_max):
        s[j] = np.abs(row).sum()
        # q-Pascal rule: [j+1, k] = [j, k-1] + q^k [j, k]
        nxt = np.zeros(j + 2)
        nxt[1:] += row
        nxt[:-1] += q ** np.arange(j + 1) * row
        row = nxt
    return s / (1 - q) ** (np.arange(n_max) / 2)


@functools.lru_cache(maxsize=256)
def majorant_length(ks: KSParams, q, tol: float, n_cap: int = 160) -> tuple[int, bool]:
    """Smallest M such that the Carlitz majorant of all triple-sum terms with an
    index >= M (within a cube of side n_cap) is below ``tol``.

    The flag is False when the majorant on the cube's outer face is not negligible.
    """
    q = float(q)
    B = carlitz_bound(2 * n_cap, q)
    fact = np.array([q_factorial(k, q) for k in range(n_cap)], dtype=float)
    w = [np.abs(r) ** np.arange(n_cap) / fact for r in (ks.rho12, ks.rho13, ks.rho23)]
    i = np.arange(n_cap)
    Bkm = B[i[:, None] + i[None, :]]
    # T[k, m, n] = w12_k w13_m w23_n B_{k+m} B_{k+n} B_{m+n}
    T = (w[0][:, None, None] * w[1][None, :, None] * w[2][None, None, :]
         * Bkm[:, :, None] * Bkm[:, None, :] * Bkm[None, :, :])
    outer = T[-1].sum() + T[:, -1].sum() + T[:, :, -1].sum()
    total = T.sum()
    inner = T.cumsum(0).cumsum(1).cumsum(2)
    diag = inner[i, i, i]
    tail = total - diag
    ok_idx = np.nonzero(tail[:-1] <= tol)[0]
    if len(ok_idx) == 0:
        return n_cap, False
    return int(ok_idx[0]) + 1, bool(outer <= tol)


def _direct(x1, x2, x3, ks, q, policy):
    tol = policy.abs_tol + policy.rel_tol
    M, ok = majorant_length(ks, float(q), tol, n_cap=min(160, policy.max_terms))
    H = [np.array(sequence(FamilySpec.of("qHermite_H", q), 2 * M, x)) for x in (x1, x2, x3)]
    fact = np.array([q_factorial(k, q) for k in range(M)], dtype=float)
    a, b, c = (np.array([r**k for k in range(M)]) / fact for r in (ks.rho12, ks.rho13, ks.rho23))
    idx = np.add.outer(np.arange(M), np.arange(M))
    A1, A2, A3 = H[0][idx], H[1][idx], H[2][idx]
    # Mkn[k, n] = sum_m b_m H1[k+m] H3[m+n]
    Mkn = (A1 * b) @ A3
    return KSValue(float(a @ (Mkn * A2) @ c), M, ok)


def qbinomial_table(n_max: int, q) -> np.ndarray:
    """T[n, k] = [n, k]_q for n, k <= n_max (floats, q-Pascal rule)."""
    T = np.zeros((n_max + 1, n_max + 1))
    T[0, 0] = 1.0
    for n in range(1, n_max + 1):
        T[n, 1:n + 1] += T[n - 1, :n]
        T[n, :n] += q ** np.arange(n) * T[n - 1, :n]
    return T


def C_display(n: int, x1, x3, ks: KSParams, q, H1=None, H3=None, qb=None) -> float:
    """C_n(x1, x3) as a double sum over q-Hermite pairs H_j(x1) H_{n-2k-j}(x3):

    (rho13^2)_n C_n = sum_k (-1)^k q^C(k,2) [n,2k][2k,k][k]! rho13^k
                      prod_{i<k} (rho23 - rho12 rho13 q^i)(rho12 - rho13 rho23 q^i)
                      sum_j [n-2k,j] prod_{i<j} (rho12 - rho13 rho23 q^(k+i))
                            prod_{i<n-2k-j} (rho23 - rho12 rho13 q^(k+i)) H_j(x1) H_{n-2k-j}(x3).
    """
    r12, r13, r23 = ks.rho12, ks.rho13, ks.rho23
    H1 = H1 if H1 is not None else sequence(FamilySpec.of("qHermite_H", q), n, x1)
    H3 = H3 if H3 is not None else sequence(FamilySpec.of("qHermite_H", q), n, x3)
    qb = qb if qb is not None else qbinomial_table(n, q)
    out, outer = 0.0, 1.0
    for k in range(n // 2 + 1):
        f = (-1) ** k * q ** (k * (k - 1) // 2) * qb[n, 2 * k] * qb[2 * k, k] * q_factorial(k, q)
        f *= r13**k * outer
        L = n - 2 * k
        e1 = np.cumprod([1.0] + [r12 - r13 * r23 * q ** (k + i) for i in range(L)])
        e2 = np.cumprod([1.0] + [r23 - r12 * r13 * q ** (k + i) for i in range(L)])
        j = np.arange(L + 1)
        s = float(np.sum(qb[L, j] * e1[j] * e2[L - j] * np.asarray(H1[:L + 1]) * np.asarray(H3[L::-1])))
        out += f * s
        outer *= (r23 - r12 * r13 * q**k) * (r12 - r13 * r23 * q**k)
    return out / q_pochhammer(r13 * r13, q, n)


def _series(term, policy, quiet=5):
    total, small = 0.0, 0
    for s in range(policy.max_terms):
        t = term(s)
        total += t
        if abs(t) <= policy.abs_tol + policy.rel_tol * abs(total):
            small += 1
            if small >= quiet:
                return total, s + 1, True
        else:
            small = 0
    return total, policy.max_terms, False


def _theorem_i(x1, x2, x3, ks, q, policy):
    r13 = ks.rho13
    cap = policy.max_terms
    Hq = FamilySpec.of("qHermite_H", q)
    n0 = 64
    seqs = {}

    def H(x, n):
        got = seqs.get(x)
        if got is None or len(got) <= n:
            got = seqs[x] = sequence(Hq, max(2 * n, n0), x)
        return got

    pre = q_pochhammer_inf(r13 * r13, q, policy) / aux_product("W", x1, x3, r13, q=q, policy=policy)
    N = min(cap, 400)
    qb = qbinomial_table(N, q)
    term = lambda s: H(x2, s)[s] / q_factorial(s, q) * C_display(s, x1, x3, ks, q, H(x1, s), H(x3, s), qb)
    total, n, ok = _series(term, TruncationPolicy(policy.abs_tol, policy.rel_tol, N))
    return KSValue(pre * total, n, ok)


def asc_weights(ks: KSParams, q, n: int) -> np.ndarray:
    """prod_{i<s} (rho12 - rho13 rho23 q^i) / ([s]! (rho13^2)_s (rho23^2)_s) for s < n.

    The product form stays finite at rho12 = 0."""
    r12, r13, r23 = ks.rho12, ks.rho13, ks.rho23
    out, prod = [], 1.0
    for s in range(n):
        out.append(prod / (q_factorial(s, q) * q_pochhammer(r13 * r13, q, s) * q_pochhammer(r23 * r23, q, s)))
        prod *= r12 - r13 * r23 * q**s
    return np.array(out, dtype=object if isinstance(q, Fraction) else float)


def _theorem_ii(x1, x2, x3, ks, q, policy):
    r12, r13, r23 = ks.rho12, ks.rho13, ks.rho23
    if 0 < abs(r12) < 1e-10 and r13 * r23 != 0:
        # the weights rho12^s (rho13 rho23/rho12)_s are formed by cancellation at this scale
        raise ConditioningError("|rho12| < 1e-10 with rho13 rho23 != 0")
    pre = (q_pochhammer_inf(r13**2, q, policy) * q_pochhammer_inf(r23**2, q, policy)
           / (aux_product("W", x1, x3, r13, q=q, policy=policy) * aux_product("W", x3, x2, r23, q=q, policy=policy)))
    N = min(policy.max_terms, 400)
    w = asc_weights(ks, q, N)
    P1 = sequence(FamilySpec.of("ASC_P", q, y=x3, rho=r13), N - 1, x1)
    P2 = sequence(FamilySpec.of("ASC_P", q, y=x3, rho=r23), N - 1, x2)
    total, n, ok = _series(lambda s: w[s] * P1[s] * P2[s], TruncationPolicy(policy.abs_tol, policy.rel_tol, N))
    return KSValue(pre * total, n, ok, int(np.count_nonzero(w[:n])))


def kibble_slepian(x1, x2, x3, ks: KSParams, q, policy: TruncationPolicy = DEFAULT_POLICY,
                   representation: str = "direct_sum") -> KSValue:
    """Value of g(x1, x2, x3) in the chosen representation."""
    q = float(qvalue(q))
    if not abs(q) < 1:
        raise ValueError("need |q| < 1")
    r = support_radius(q)
    if any(abs(x) >= r for x in (x1, x2, x3)):
        raise ValueError("x1, x2, x3 must lie inside S(q)")
    if representation == "direct_sum":
        return _direct(x1, x2, x3, ks, q, policy)
    if representation == "theorem_i":
        return _theorem_i(x1, x2, x3, ks, q, policy)
    if representation == "theorem_ii":
        return _theorem_ii(x1, x2, x3, ks, q, policy)
    raise ValueError(f"unknown representation {representation!r}; expected one of {REPRESENTATIONS}")


def finite_sum_terms(m: int, rho13, rho23, q) -> int:
    """Number of nonzero ASC weights when rho12 = q^m rho13 rho23."""
    # exact binary values of the floats, so a vanishing weight is exactly zero
    q, rho13, rho23 = (Fraction(float(v)) for v in (q, rho13, rho23))
    ks = KSParams(q**m * rho13 * rho23, rho13, rho23)
    return sum(1 for w in asc_weights(ks, q, m + 12) if w != 0)


@dataclass(frozen=True)
class NegativePoint:
    value: float
    ks: KSParams
    x: tuple
    confirmed: KSValue


def _asc_grid(x1, x2, x3, ks, q, N):
    """theorem_ii on broadcast arrays of points."""
    r13, r23 = ks.rho13, ks.rho23

    def P(xa, xb, r):
        out = [np.ones(np.broadcast(xa, xb).shape), xa - r * xb]
        for k in range(1, N - 1):
            out.append((xa - r * xb * q**k) * out[k] - (1 - r * r * q ** (k - 1)) * (1 - q**k) / (1 - q) * out[k - 1])
        return np.array(out)

    w = asc_weights(ks, q, N)
    s = np.tensordot(w, P(x1, x3, r13) * P(x2, x3, r23), axes=1)
    pre = (q_pochhammer_inf(r13**2, q) * q_pochhammer_inf(r23**2, q)
           / (aux_product("W", x1, x3, r13, q=q) * aux_product("W", x3, x2, r23, q=q)))
    return pre * s


def negativity_search(q=0.5, rho_values=(-0.6, -0.3, 0.0, 0.3, 0.6), x_points: int = 9, terms: int = 80,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> NegativePoint | None:
    """Grid search for g < 0 at correlation triples with a positive definite Gaussian matrix.

    The minimiser is re-evaluated with the convergence-checked direct sum.
    """
    q = float(q)
    r = support_radius(q)
    xs = np.linspace(-0.95 * r, 0.95 * r, x_points)
    X1, X2, X3 = np.meshgrid(xs, xs, xs, indexing="ij")
    best = None
    for r12, r13, r23 in itertools.product(rho_values, repeat=3):
        ks = KSParams(r12, r13, r23)
        if not ks.gaussian_pd:
            continue
        g = _asc_grid(X1, X2, X3, ks, q, terms)
        i = np.unravel_index(np.argmin(g), g.shape)
        if best is None or g[i] < best[0]:
            best = (float(g[i]), ks, (float(X1[i]), float(X2[i]), float(X3[i])))
    if best is None or best[0] >= 0:
        return None
    val, ks, pt = best
    confirmed = kibble_slepian(*pt, ks, q, policy, "direct_sum")
    return NegativePoint(val, ks, pt, confirmed)
