"""Exact real quadratic surds (P + sqrt(D))/Q and the values of periodic words."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .words import EvenWord, UnimodularMatrix, WordLike, as_word, word_length, word_matrix, primitive_exponent

# extra binary digits carried when exporting sqrt(D) to a double
_GUARD_BITS = 80


def log_int(n: int) -> float:
    """Natural log of a positive (arbitrarily large) integer.

    ``math.log`` works from the bit length and leading mantissa of big ints,
    so the result is accurate to a few ulps regardless of size.
    """
    if n <= 0:
        raise ValueError("log of non-positive integer")
    return math.log(n)


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number (P + sqrt(D))/Q with D > 0 non-square and Q | D - P^2."""

    P: int
    Q: int
    D: int

    def __post_init__(self):
        if self.Q == 0:
            raise ValueError("Q must be non-zero")
        if self.D <= 0:
            raise ValueError("D must be positive")
        s = math.isqrt(self.D)
        if s * s == self.D:
            raise ValueError(f"D = {self.D} is a perfect square")
        if (self.D - self.P * self.P) % self.Q:
            raise ValueError("Q must divide D - P^2")

    @classmethod
    def from_parts(cls, X: int, Y: int, Z: int, D: int) -> "QuadraticSurd":
        """Build (X + Y sqrt(D))/Z in canonical form."""
        if Y == 0:
            raise ValueError("rational value")
        if Y < 0:
            X, Y, Z = -X, -Y, -Z
        P, Q, D2 = X, Z, Y * Y * D
        if (D2 - P * P) % Q:
            m = abs(Q)
            P, Q, D2 = P * m, Q * m, D2 * m * m
        return cls(P, Q, D2).reduced()

    def reduced(self) -> "QuadraticSurd":
        g = math.gcd(self.P, self.Q)
        candidates = [g]
        if g < 1 << 12:
            candidates = sorted((x for x in range(2, g + 1) if g % x == 0), reverse=True)
        for h in candidates:
            if h > 1 and self.D % (h * h) == 0:
                P, Q, D = self.P // h, self.Q // h, self.D // (h * h)
                if (D - P * P) % Q == 0:
                    return QuadraticSurd(P, Q, D)
        return self

    # value semantics: equal iff the same real number
    def _key(self):
        return Fraction(self.P, self.Q), Fraction(self.D, self.Q * self.Q), self.Q > 0

    def __eq__(self, other):
        if not isinstance(other, QuadraticSurd):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(-self.P, -self.Q, self.D)

    def __float__(self) -> float:
        P, Q, D = self.P, self.Q, self.D
        scale = _GUARD_BITS + max(0, D.bit_length() // 2)
        root = math.isqrt(D << (2 * scale))  # floor(sqrt(D) * 2^scale)
        if P >= 0:
            return float(Fraction((P << scale) + root, Q << scale))
        # P + sqrt(D) = (D - P^2)/(sqrt(D) - P): avoids cancellation
        return float(Fraction((D - P * P) << scale, Q * (root - (P << scale))))

    def __str__(self) -> str:
        return f"({self.P}+sqrt({self.D}))/{self.Q}"

    @classmethod
    def parse(cls, text: str) -> "QuadraticSurd":
        m = re.fullmatch(r"\s*\(\s*([-+]?\d+)\s*\+\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*/\s*([-+]?\d+)\s*", text)
        if not m:
            raise ValueError(f"cannot parse surd {text!r}; expected (P+sqrt(D))/Q")
        return cls.from_parts(int(m.group(1)), 1, int(m.group(3)), int(m.group(2)))

    def floor(self) -> int:
        s = math.isqrt(self.D)
        if self.Q > 0:
            return (self.P + s) // self.Q
        return (-(self.P + s + 1)) // (-self.Q)

    def mobius(self, g: UnimodularMatrix) -> "QuadraticSurd":
        """Exact image (a w + b)/(c w + d)."""
        a, b, c, d = g.a, g.b, g.c, g.d
        A, B = a * self.P + b * self.Q, a
        C, E = c * self.P + d * self.Q, c
        # (A + B r)/(C + E r), r = sqrt(D); rationalize the denominator
        den = C * C - E * E * self.D
        return QuadraticSurd.from_parts(A * C - B * E * self.D, B * C - A * E, den, self.D)

    def is_reduced(self) -> bool:
        return float(self) > 1 and -1 < float(self.conjugate()) < 0


def galois_conjugate(s: QuadraticSurd) -> QuadraticSurd:
    return s.conjugate()


def purely_periodic_value(w: WordLike) -> QuadraticSurd:
    """The attracting fixed point ``[overline W] > 1`` of gamma_W."""
    w = as_word(w)
    if not w:
        raise ValueError("purely periodic value needs a non-empty word")
    g = word_matrix(w)
    a, b, c, d = g.a, g.b, g.c, g.d
    # c w^2 + (d - a) w - b = 0, larger root
    return QuadraticSurd.from_parts(a - d, 1, 2 * c, (a + d) ** 2 - 4)


def eventually_periodic_value(v: WordLike, w: WordLike) -> QuadraticSurd:
    return purely_periodic_value(w).mobius(word_matrix(v))


def cf_expand(s: QuadraticSurd, n: int) -> list[int]:
    """First ``n`` partial quotients, from the integer recursion on (P, Q, D)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    P, Q, D = s.P, s.Q, s.D
    root = math.isqrt(D)
    out = []
    for _ in range(n):
        if Q > 0:
            k = (P + root) // Q
        else:
            k = (-(P + root + 1)) // (-Q)
        out.append(k)
        P = k * Q - P
        Q = (D - P * P) // Q
    return out


@dataclass(frozen=True)
class UnitData:
    """eps_w^N = c w + d for gamma_W (N = primitive exponent) and its hat scaling."""

    word: EvenWord
    unit: QuadraticSurd  # c w + d, exact
    log_unit: float  # log(c w + d)
    exponent: int  # N(W)
    pairs: int  # |W|

    @property
    def eps(self) -> float:
        """The fundamental unit eps_w."""
        return math.exp(self.log_unit / self.exponent)

    @property
    def eps_hat(self) -> float:
        return math.exp(self.log_unit / self.pairs)

    @property
    def log_eps_hat(self) -> float:
        return self.log_unit / self.pairs


def log_unit_of_matrix(g: UnimodularMatrix) -> float:
    """log of the larger eigenvalue (t + sqrt(t^2 - 4))/2 of a hyperbolic matrix."""
    t = abs(g.trace)
    if t <= 2:
        raise ValueError("matrix is not hyperbolic")
    if t < 1 << 26:
        return math.log((t + math.sqrt(t * t - 4.0)) / 2.0)
    # log t + log((1 + sqrt(1 - 4/t^2))/2); the correction -1/t^2 is below one ulp of log t here
    return log_int(t)


def epsilon_hat_quadratic(w: WordLike) -> UnitData:
    w = as_word(w)
    if not w:
        raise ValueError("empty word")
    g = word_matrix(w)
    sw = purely_periodic_value(w)
    unit = QuadraticSurd.from_parts(g.c * sw.P + g.d * sw.Q, g.c, sw.Q, sw.D)
    return UnitData(w, unit, log_unit_of_matrix(g), primitive_exponent(w), word_length(w))


def cf_value(quotients, tail: Optional[float] = None) -> float:
    """Evaluate [k_1, k_2, ..., k_m (+ 1/tail)] by backward recursion in doubles."""
    x = tail
    for k in reversed(list(quotients)):
        x = k if x is None else k + 1.0 / x
    if x is None:
        raise ValueError("empty continued fraction")
    return float(x)
