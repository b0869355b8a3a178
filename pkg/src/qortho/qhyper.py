"""Truncated basic hypergeometric series and the very-well-poised W series."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Sequence

from .qcore import DEFAULT_POLICY, TruncationPolicy, q_pochhammer, qvalue


class PoleError(ArithmeticError):
    """A denominator parameter hits q^(-N) inside the truncation range."""


@dataclass(frozen=True)
class PhiSpec:
    numerator_params: Sequence[complex]
    denominator_params: Sequence[complex]
    q: complex
    argument: complex

    def __post_init__(self):
        object.__setattr__(self, "q", qvalue(self.q))
        if abs(self.q) >= 1:
            raise ValueError("basic hypergeometric series need |q| < 1")


@dataclass(frozen=True)
class PhiResult:
    value: complex
    terms: int
    converged: bool
    terminated: bool = False


def phi_term(spec: PhiSpec, n: int) -> complex:
    """The n-th summand computed from scratch (reference for the ratio recursion)."""
    q = spec.q
    j, k = len(spec.numerator_params), len(spec.denominator_params)
    num = 1
    for a in spec.numerator_params:
        num *= q_pochhammer(a, q, n)
    den = q_pochhammer(q, q, n)
    for b in spec.denominator_params:
        den *= q_pochhammer(b, q, n)
    return num / den * ((-1) ** n * q ** (n * (n - 1) // 2)) ** (1 + k - j) * spec.argument**n


def phi(spec: PhiSpec, policy: TruncationPolicy = DEFAULT_POLICY, pole_tol: float = 1e-12) -> PhiResult:
    """Sum the series term by term, each term obtained from the previous by its ratio.

    The summand carries the usual 1/(q;q)_n. Summation stops after three
    consecutive terms below ``abs_tol + rel_tol*|sum|``, when a numerator
    parameter terminates the series, or at ``max_terms`` (unconverged).
    """
    q = spec.q
    j, k = len(spec.numerator_params), len(spec.denominator_params)
    extra = 1 + k - j
    total = term = 1 + 0j
    small = 0
    qn = 1 + 0j
    for n in range(policy.max_terms - 1):
        num = 1 + 0j
        for a in spec.numerator_params:
            num *= 1 - a * qn
        if num == 0:
            return PhiResult(total, n + 1, True, True)
        den = 1 - qn * q
        for b in spec.denominator_params:
            d = 1 - b * qn
            if abs(d) < pole_tol:
                raise PoleError(f"denominator parameter {b} hits a pole at n={n}")
            den *= d
        ratio = num / den * spec.argument
        if extra:
            ratio *= (-qn) ** extra
        term = term * ratio
        total += term
        if abs(term) <= policy.abs_tol + policy.rel_tol * abs(total):
            small += 1
            if small >= 3:
                return PhiResult(total, n + 2, True)
        else:
            small = 0
        qn *= q
    return PhiResult(total, policy.max_terms, False)


def very_well_poised_spec(m: int, a: complex, extra: Sequence[complex], q, argument) -> PhiSpec:
    """The PhiSpec of 2m W 2m-1 (a; a_1..a_{2m-3}; q, argument); sqrt(a) on the principal branch."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if len(extra) != 2 * m - 3:
        raise ValueError(f"{2 * m}W{2 * m - 1} needs {2 * m - 3} extra parameters, got {len(extra)}")
    if a == 0:
        raise ValueError("a = 0 makes the very-well-poised parameter list degenerate")
    q = qvalue(q)
    ra = cmath.sqrt(a)
    num = [a, q * ra, -q * ra, *extra]
    den = [ra, -ra, *(q * a / e for e in extra)]
    return PhiSpec(num, den, q, argument)


def very_well_poised_W(m: int, a: complex, extra: Sequence[complex], q, argument,
                       policy: TruncationPolicy = DEFAULT_POLICY) -> PhiResult:
    return phi(very_well_poised_spec(m, a, extra, q, argument), policy)
