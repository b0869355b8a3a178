"""Dense univariate polynomials over any numeric field (Fraction, float, complex).

Instances behave as ring elements, so the family recurrences can run with
``x = CoeffPoly.x()`` and return exact coefficient vectors.
"""

from __future__ import annotations

from numbers import Number


class CoeffPoly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs=(0,)):
        c = list(coeffs) or [0]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def x(cls) -> "CoeffPoly":
        return cls((0, 1))

    @classmethod
    def const(cls, c) -> "CoeffPoly":
        return cls((c,))

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return self.coeffs[k]
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __repr__(self):
        return f"CoeffPoly({list(self.coeffs)!r})"

    def __eq__(self, other):
        if isinstance(other, Number):
            other = CoeffPoly((other,))
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        n = max(len(self), len(other))
        return all(self[k] == other[k] for k in range(n))

    __hash__ = None

    def __add__(self, other):
        if isinstance(other, CoeffPoly):
            n = max(len(self), len(other))
            return CoeffPoly([self[k] + other[k] for k in range(n)])
        c = list(self.coeffs)
        c[0] = c[0] + other
        return CoeffPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return CoeffPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CoeffPoly):
            out = [0] * (len(self) + len(other) - 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return CoeffPoly(out)
        return CoeffPoly([c * other for c in self.coeffs])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, CoeffPoly):
            raise TypeError("polynomial division is not supported")
        return CoeffPoly([c / other for c in self.coeffs])

    def __pow__(self, n: int):
        out = CoeffPoly((1,))
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def scale_arg(self, c) -> "CoeffPoly":
        """Coefficients of p(c x)."""
        out, p = [], 1
        for a in self.coeffs:
            out.append(a * p)
            p = p * c
        return CoeffPoly(out)

    def parity_rescale(self, n: int, s2) -> "CoeffPoly":
        """Coefficients of s^(-n) p(s x) where s^2 = s2, for p of parity n.

        Only even powers of s survive, so the result stays exact for rational s2.
        """
        out = []
        for k, a in enumerate(self.coeffs):
            if (k - n) % 2:
                if a != 0:
                    raise ValueError("polynomial does not have the parity of n")
                out.append(a)
                continue
            e = (k - n) // 2
            out.append(a * s2**e if e >= 0 else a / s2 ** (-e))
        return CoeffPoly(out)

    def max_abs_diff(self, other) -> float:
        if isinstance(other, Number):
            other = CoeffPoly((other,))
        n = max(len(self), len(other))
        return max(abs(self[k] - other[k]) for k in range(n))

    def to_complex(self) -> list[complex]:
        return [complex(c) for c in self.coeffs]


def combine(coefficients, polys) -> CoeffPoly:
    """sum_j coefficients[j] * polys[j]."""
    out = CoeffPoly()
    for c, p in zip(coefficients, polys):
        if c == 0:
            continue
        out = out + p * c
    return out
