"""Contour integrals of j against the forms eta_{x', x} and classical cycle integrals.

``eta_{x', x} = (1/(z - x') - 1/(z - x)) dz`` restricts to hyperbolic arc
length on the geodesic from x' to x.  Long paths are never integrated in one
piece: they are cut at the orbit points ``gamma i`` of the word prefixes and
each piece is pulled back to a short segment starting at the base point,
with the endpoints of eta moved by the exact inverse prefix matrix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .modj import j_array
from .quadratic import (QuadraticSurd, cf_value, epsilon_hat_quadratic, purely_periodic_value)
from .quadrature import ZERO, QuadratureError, QuadratureResult, adaptive_gauss_legendre
from .words import (EvenWord, UnimodularMatrix, WordLike, WordStream, as_word, pair_matrix,
                    primitive_exponent, rotate, word_length, word_matrix)

DEFAULT_TOL = 1e-10
Point = Optional[float]  # None is the point at infinity


@dataclass(frozen=True)
class EtaForm:
    """eta_{x', x}; ``None`` stands for infinity (and 1/(z - oo) = 0)."""

    x_prime: Point
    x: Point

    def __post_init__(self):
        if self.x_prime is None and self.x is None:
            raise ValueError("endpoints of eta must be distinct")
        if self.x_prime is not None and self.x is not None and float(self.x_prime) == float(self.x):
            raise ValueError("endpoints of eta must be distinct")

    def __call__(self, z):
        out = 0.0
        if self.x_prime is not None:
            out = out + 1.0 / (z - float(self.x_prime))
        if self.x is not None:
            out = out - 1.0 / (z - float(self.x))
        return out

    def pullback(self, g: UnimodularMatrix) -> "EtaForm":
        """g^* eta_{x', x} = eta_{g^-1 x', g^-1 x}."""
        return EtaForm(_inverse_image(g, self.x_prime), _inverse_image(g, self.x))


def _inverse_image(g: UnimodularMatrix, x: Point) -> Point:
    h = g.inverse()
    if x is None:
        return None if h.c == 0 else h.a / h.c
    if isinstance(x, Fraction):
        den = h.c * x + h.d
        return None if den == 0 else float((h.a * x + h.b) / den)
    den = h.c * x + h.d
    return None if den == 0 else (h.a * x + h.b) / den


def _log_term(z: complex, p: Point) -> complex:
    return cmath.log(z - float(p))


def eta_integral_closed(z0: complex, z1: complex, eta: EtaForm) -> complex:
    """Exact integral of eta from z0 to z1 (any path in the upper half-plane)."""
    z0, z1 = complex(z0), complex(z1)
    if z0.imag <= 0 or z1.imag <= 0:
        raise ValueError("endpoints must lie in the upper half-plane")
    if z0 == z1:
        return 0j
    xp, x = eta.x_prime, eta.x
    if xp is not None and x is not None:
        r0 = (z0 - float(xp)) / (z0 - float(x))
        r1 = (z1 - float(xp)) / (z1 - float(x))
        # (z - x')/(z - x) maps H into one open half-plane, away from the cut
        assert r0.imag * r1.imag > 0, "branch cut crossed"
        return cmath.log(r1) - cmath.log(r0)
    out = 0j
    if xp is not None:
        out += _log_term(z1, xp) - _log_term(z0, xp)
    if x is not None:
        out -= _log_term(z1, x) - _log_term(z0, x)
    return out


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    """cosh d = 1 + |z1 - z2|^2 / (2 Im z1 Im z2), evaluated via asinh."""
    z1, z2 = complex(z1), complex(z2)
    if z1.imag <= 0 or z2.imag <= 0:
        raise ValueError("points must lie in the upper half-plane")
    return 2.0 * math.asinh(abs(z1 - z2) / (2.0 * math.sqrt(z1.imag * z2.imag)))


class GeodesicSegment:
    """Arc-length parametrisation s -> z(s), s in [0, d], of the geodesic from z0 to z1."""

    def __init__(self, z0: complex, z1: complex):
        self.z0, self.z1 = complex(z0), complex(z1)
        self.length = hyperbolic_distance(z0, z1)
        x0, y0 = self.z0.real, self.z0.imag
        u = (self.z1 - x0) / y0  # z0 moved to i
        zeta = (u - 1j) / (u + 1j)  # Cayley image, |zeta| = tanh(d/2)
        self.alpha = cmath.phase(zeta) if zeta != 0 else 0.0
        self._rot = cmath.exp(1j * self.alpha)
        # 1 - e^{i alpha} = -2i sin(alpha/2) e^{i alpha/2}
        self._one_minus_rot = -2j * math.sin(self.alpha / 2) * cmath.exp(0.5j * self.alpha)

    def _one_minus_zeta(self, s):
        # 1 - e^{ia} tanh(s/2) = (1 - e^{ia}) + e^{ia} * 2/(e^s + 1)
        return self._one_minus_rot + self._rot * (2.0 / (np.exp(s) + 1.0))

    def point(self, s):
        s = np.asarray(s, dtype=float)
        zeta = self._rot * np.tanh(s / 2)
        return self.z0.real + self.z0.imag * 1j * (1 + zeta) / self._one_minus_zeta(s)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        return self.z0.imag * 1j * self._rot / (np.cosh(s / 2) ** 2 * self._one_minus_zeta(s) ** 2)


def integrate_j_eta(z0: complex, z1: complex, eta: EtaForm, tol: float = DEFAULT_TOL,
                    path: str = "geodesic",
                    integrand: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> QuadratureResult:
    """Integral of ``integrand(z) * eta`` from z0 to z1 (``integrand`` defaults to j).

    ``path`` is ``"geodesic"`` (hyperbolic segment by arc length) or
    ``"chord"`` (Euclidean straight segment).  Non-convergence is reported
    through ``QuadratureResult.converged``.
    """
    z0, z1 = complex(z0), complex(z1)
    if z0.imag <= 0 or z1.imag <= 0:
        raise ValueError("endpoints must lie in the upper half-plane")
    if z0 == z1:
        return ZERO
    func = j_array if integrand is None else integrand
    if path == "geodesic":
        seg = GeodesicSegment(z0, z1)

        def f(s):
            z = seg.point(s)
            return func(z) * eta(z) * seg.derivative(s)

        return adaptive_gauss_legendre(f, 0.0, seg.length, tol)
    if path == "chord":
        dz = z1 - z0

        def f(t):
            z = z0 + t * dz
            return func(z) * eta(z) * dz

        return adaptive_gauss_legendre(f, 0.0, 1.0, tol)
    raise ValueError(f"unknown path {path!r}")


def _ones(z):
    return np.ones_like(z)


@dataclass(frozen=True)
class CycleIntegrals:
    word: EvenWord
    w: QuadraticSurd
    val_tilde: complex
    one_tilde: float
    one_tilde_quadrature: complex
    val_hat: complex
    one_hat: float
    eps_hat: float
    exponent: int
    pairs: int
    error_estimate: float

    @property
    def val(self) -> complex:
        return self.val_tilde / self.one_tilde

    @property
    def im_diagnostic(self) -> float:
        """|Im val| relative to |val|."""
        v = self.val
        return abs(v.imag) / max(1e-300, abs(v))

    def as_dict(self) -> dict:
        return {
            "word": str(self.word),
            "w": str(self.w),
            "val_tilde_re": self.val_tilde.real, "val_tilde_im": self.val_tilde.imag,
            "one_tilde": self.one_tilde,
            "val_re": self.val.real, "val_im": self.val.imag,
            "val_hat_re": self.val_hat.real, "val_hat_im": self.val_hat.imag,
            "one_hat": self.one_hat,
            "eps_hat": self.eps_hat,
            "im_diagnostic": self.im_diagnostic,
        }


def word_cycle_pieces(word: WordLike) -> list[tuple[UnimodularMatrix, EtaForm]]:
    """Pair matrices and pulled-back forms eta_{w'_m, w_m} along one period.

    Piece m covers gamma_{P_m} z0 -> gamma_{P_{m+1}} z0 (P_m = first m pairs);
    pulled back by gamma_{P_m} the endpoints become the values of the word
    rotated by m pairs and its conjugate.
    """
    word = as_word(word)
    pieces = []
    for m, pair in enumerate(word.pairs()):
        wm = purely_periodic_value(rotate(word, m))
        pieces.append((pair_matrix(*pair), EtaForm(float(wm.conjugate()), float(wm))))
    return pieces


def _integrate_pieces(pieces, z0: complex, tol: float, integrand=None) -> QuadratureResult:
    total = ZERO
    for step, (g, eta) in enumerate(pieces):
        res = integrate_j_eta(z0, g.apply(z0), eta, tol, integrand=integrand)
        if not res.converged:
            raise QuadratureError("subdivision cap exceeded", step)
        total = total + res
    return total


@lru_cache(maxsize=4096)
def _cycle_integrals_cached(word: EvenWord, tol: float, z0: complex) -> CycleIntegrals:
    pieces = word_cycle_pieces(word)
    total = _integrate_pieces(pieces, z0, tol)
    ones = _integrate_pieces(pieces, z0, tol, integrand=_ones)
    unit = epsilon_hat_quadratic(word)
    n, r = primitive_exponent(word), word_length(word)
    # gamma_W = gamma_w^N
    return CycleIntegrals(
        word=word, w=purely_periodic_value(word),
        val_tilde=total.value / n, one_tilde=2.0 * unit.log_unit / n,
        one_tilde_quadrature=ones.value / n,
        val_hat=total.value / r, one_hat=2.0 * unit.log_unit / r, eps_hat=unit.eps_hat,
        exponent=n, pairs=r, error_estimate=total.error_estimate,
    )


def cycle_integrals(word: WordLike, tol: float = DEFAULT_TOL, z0: complex = 1j) -> CycleIntegrals:
    word = as_word(word)
    if not word:
        raise ValueError("cycle integrals need a non-empty word")
    return _cycle_integrals_cached(word, float(tol), complex(z0))


# ---------------------------------------------------------------------------
# Averages of j along a geodesic ray ending at x.

@dataclass(frozen=True)
class GeodesicAverage:
    x: float
    x_prime: float
    t: np.ndarray  # arc lengths at which the average is reported
    values: np.ndarray  # (1/t) * integral of j ds over the first t units
    error_estimate: float

    @property
    def final(self) -> complex:
        return complex(self.values[-1])


def _quotient_source(x, count: int) -> list[int]:
    if isinstance(x, QuadraticSurd):
        from .quadratic import cf_expand
        return cf_expand(x, count)
    if isinstance(x, WordStream):
        return x.take_quotients(count)
    return list(x)[:count]


def geodesic_val(x: Union[QuadraticSurd, WordStream, Sequence[int]], depth: float,
                 tol: float = DEFAULT_TOL, x_prime: Union[int, Fraction, float] = -1,
                 z0: Optional[complex] = None,
                 integrand: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 tail_quotients: int = 60) -> GeodesicAverage:
    """Arc-length averages of j along the geodesic ray towards x.

    The ray starts at ``z0`` if given (its backward endpoint is then computed),
    otherwise at the top point of the geodesic from ``x_prime`` to ``x``.  The
    ray is cut where it crosses successive prefix frames; in frame n the ray is
    pulled back by gamma_n^{-1} (gamma_n the product of the first n pairs),
    where it joins gamma_n^{-1} x' to the tail value [k_{2n+1}, ...].  Averages
    are reported at every frame boundary and at ``depth``.
    """
    if depth <= 0:
        raise ValueError("depth must be positive")
    func = j_array if integrand is None else integrand
    # enough quotients: each pair adds at least 2 log(phi) to the arc length
    n_pairs = int(depth / (2 * math.log((1 + 5 ** 0.5) / 2))) + 4
    quotients = _quotient_source(x, 2 * n_pairs + tail_quotients)
    if quotients[0] < 1:
        raise ValueError("x must be > 1 (translate it first)")
    x0 = cf_value(quotients)
    if z0 is not None:
        z0 = complex(z0)
        centre = (abs(z0) ** 2 - x0 * x0) / (2 * (z0.real - x0)) if z0.real != x0 else None
        if centre is None:
            raise ValueError("vertical rays are not supported; pick z0 off the line Re z = x")
        xp = Fraction(2 * centre - x0)
    else:
        xp = Fraction(x_prime)
    if not xp < 1:
        raise ValueError("backward endpoint must be < 1")
    # sigma = [[x, x'], [1, 1]] sends 0 -> x', oo -> x; ray starts at sigma(i e^{s0})
    s0 = 0.0
    if z0 is not None:
        w = (z0 - float(xp)) / (x0 - z0)
        s0 = math.log(abs(w))
    t_end = s0 + depth

    a, b, c, d = 1, 0, 0, 1
    frames = []  # (S_n, X_n, X'_n)
    n = 0
    while True:
        tail = cf_value(quotients[2 * n:])
        g_inv_xp = Fraction(d * xp - b) / (a - c * xp) if n else xp
        # a - c x = 1/(c X_n + d); S_n = log(c X_n + d) + log(a - c x')
        s_n = (math.log(c) + math.log(tail + d / c) + _log_fraction(a - c * xp)) if n else 0.0
        frames.append((s_n, tail, float(g_inv_xp)))
        if s_n > t_end or 2 * n + 2 + 8 > len(quotients):
            break
        k1, k2 = quotients[2 * n], quotients[2 * n + 1]
        a, b = a * (k1 * k2 + 1) + b * k2, a * k1 + b
        c, d = c * (k1 * k2 + 1) + d * k2, c * k1 + d
        n += 1
    if frames[-1][0] <= t_end:
        raise ValueError("not enough quotients for the requested depth")

    ts, cumulative = [], []
    total = 0j
    err = 0.0
    for i in range(len(frames) - 1):
        s_lo, X, Xp = frames[i]
        s_hi = frames[i + 1][0]
        lo, hi = max(s_lo, s0), min(s_hi, t_end)
        if hi <= lo:
            continue

        def f(u, X=X, Xp=Xp):
            e = 1j * np.exp(u)
            return func((X * e + Xp) / (e + 1.0))

        res = adaptive_gauss_legendre(f, lo - s_lo, hi - s_lo, tol)
        if not res.converged:
            raise QuadratureError("subdivision cap exceeded", i)
        total += res.value
        err += res.error_estimate
        ts.append(hi - s0)
        cumulative.append(total)
    t = np.array(ts)
    return GeodesicAverage(x0, float(xp), t, np.array(cumulative) / t, err)


def _log_fraction(q: Fraction) -> float:
    q = Fraction(q)
    return math.log(q.numerator) - math.log(q.denominator)
