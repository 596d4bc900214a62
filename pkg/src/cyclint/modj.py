"""The modular j-function: exact q-expansion and evaluation on the upper half-plane.

Points are first moved into the standard fundamental domain
``|Re z| <= 1/2, |z| >= 1`` where ``|q| <= exp(-pi sqrt 3)``, so a fixed
truncation of the q-series reaches double precision everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .words import UnimodularMatrix

DEFAULT_ORDER = 40
REDUCTION_TOL = 1e-12
Q_MAX = math.exp(-math.pi * math.sqrt(3.0))


def _sigma3(n: int) -> int:
    return sum(d ** 3 for d in range(1, n + 1) if n % d == 0)


def _mul(a: list[int], b: list[int], m: int) -> list[int]:
    out = [0] * m
    for i, x in enumerate(a[:m]):
        if x:
            for j, y in enumerate(b[:m - i]):
                out[i + j] += x * y
    return out


@dataclass(frozen=True)
class JSeries:
    """j = q^-1 + sum_{n>=0} c(n) q^n, truncated at order ``M``.

    ``coefficients[k]`` holds c(k - 1), so ``coefficients[0] == 1``.
    """

    coefficients: tuple[int, ...]
    order: int
    tail_bound: float

    def c(self, n: int) -> int:
        return self.coefficients[n + 1]


@lru_cache(maxsize=None)
def j_coefficients(M: int = DEFAULT_ORDER) -> JSeries:
    """Exact coefficients of j = E4^3 / Delta up to q^M."""
    if M < 0:
        raise ValueError("M must be >= 0")
    if M > 5000:
        raise MemoryError("order too large")
    m = M + 2  # series in q, indices 0..M+1 after dividing Delta by q
    e4 = [1] + [240 * _sigma3(n) for n in range(1, m)]
    e4_cubed = _mul(_mul(e4, e4, m), e4, m)
    # prod (1 - q^n)^24
    eta24 = [1] + [0] * (m - 1)
    for n in range(1, m):
        for _ in range(24):
            for i in range(m - 1, n - 1, -1):
                eta24[i] -= eta24[i - n]
    # invert the unit power series eta24
    inv = [0] * m
    inv[0] = 1
    for i in range(1, m):
        inv[i] = -sum(eta24[k] * inv[i - k] for k in range(1, i + 1))
    coeffs = _mul(e4_cubed, inv, m)
    return JSeries(tuple(coeffs), M, _tail_bound(M))


def _tail_bound(M: int) -> float:
    # c(n) <= exp(4 pi sqrt n) / (sqrt 2 n^{3/4}); sum the remainder at |q| = Q_MAX
    total = 0.0
    log_q = math.log(Q_MAX)
    for n in range(M + 1, M + 400):
        total += math.exp(4 * math.pi * math.sqrt(n) + n * log_q) / (math.sqrt(2) * n ** 0.75)
    return total


def reduce_to_fundamental_domain(z: complex, max_steps: int = 10000) -> tuple[complex, UnimodularMatrix]:
    """Return (z*, g) with g z = z* in the fundamental domain.

    Floats only choose the steps; z* is then recomputed from the exact
    input coordinates, so its accuracy does not degrade with small Im z.
    """
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("point must lie in the upper half-plane")
    g = UnimodularMatrix.identity()
    w = z
    for _ in range(max_steps):
        n = math.floor(w.real + 0.5)
        if n:
            w -= n
            g = UnimodularMatrix(1, -n, 0, 1) @ g
        if abs(w) < 1.0 - REDUCTION_TOL:
            w = -1.0 / w
            g = UnimodularMatrix(0, -1, 1, 0) @ g
        else:
            break
    else:
        raise RuntimeError("reduction did not terminate")
    x, y = Fraction(z.real), Fraction(z.imag)
    u, v = g.a * x + g.b, g.c * x + g.d
    den = v * v + g.c * g.c * y * y
    return complex(float((u * v + g.a * g.c * y * y) / den), float(y / den)), g


_SPLIT = 134217729.0  # 2^27 + 1


def _two_prod(a: np.ndarray, b: np.ndarray):
    """p + e == a * b exactly (Dekker)."""
    p = a * b
    t = _SPLIT * a
    a_hi = t - (t - a)
    a_lo = a - a_hi
    t = _SPLIT * b
    b_hi = t - (t - b)
    b_lo = b - b_hi
    e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, e


def _affine(k: np.ndarray, x: np.ndarray, m: np.ndarray) -> np.ndarray:
    """k x + m for integer-valued k, m, rounded once."""
    p, e = _two_prod(k, x)
    s = p + m
    bb = s - p
    return s + (((p - (s - bb)) + (m - bb)) + e)


def reduce_array(z: np.ndarray, max_steps: int = 10000) -> np.ndarray:
    """Vectorised reduction; the reduced points are recomputed from the input as above."""
    z0 = np.array(z, dtype=complex, copy=True)
    if np.any(~(z0.imag > 0)):
        raise ValueError("points must lie in the upper half-plane")
    w = z0.copy()
    a = np.ones(w.shape, dtype=np.int64)
    b = np.zeros(w.shape, dtype=np.int64)
    c = np.zeros(w.shape, dtype=np.int64)
    d = np.ones(w.shape, dtype=np.int64)
    for _ in range(max_steps):
        n = np.floor(w.real + 0.5)
        w -= n
        ni = n.astype(np.int64)
        a -= ni * c
        b -= ni * d
        inside = np.abs(w) < 1.0 - REDUCTION_TOL
        if not inside.any():
            break
        w[inside] = -1.0 / w[inside]
        a[inside], b[inside], c[inside], d[inside] = -c[inside], -d[inside], a[inside], b[inside]
    else:
        raise RuntimeError("reduction did not terminate")
    if max(np.abs(a).max(initial=0), np.abs(b).max(initial=0), np.abs(c).max(initial=0),
           np.abs(d).max(initial=0)) >= 1 << 26:
        return w  # products would no longer be exact; keep the plain float result
    x, y = z0.real, z0.imag
    af, bf, cf, df = (t.astype(float) for t in (a, b, c, d))
    u = _affine(af, x, bf)
    v = _affine(cf, x, df)
    cy = cf * y
    den = v * v + cy * cy
    return (u * v + af * cy * y) / den + 1j * (y / den)


@lru_cache(maxsize=None)
def _float_coefficients(M: int) -> np.ndarray:
    return np.array([float(c) for c in j_coefficients(M).coefficients[2:]], dtype=float)


def j_array(z, M: int = DEFAULT_ORDER) -> np.ndarray:
    """j at an array of points (reduced first)."""
    z = reduce_array(np.atleast_1d(np.asarray(z, dtype=complex)))
    q = np.exp(2j * np.pi * z)
    coeffs = _float_coefficients(M)  # c(1) .. c(M)
    acc = np.zeros_like(q)
    for c in coeffs[::-1]:
        acc = (acc + c) * q
    return 1.0 / q + 744.0 + acc


def j_eval(z: complex, M: int = DEFAULT_ORDER) -> complex:
    return complex(j_array(np.array([z]), M)[0])
