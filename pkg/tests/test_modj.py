import math
import random

import mpmath
import numpy as np
import pytest

from cyclint.modj import (DEFAULT_ORDER, j_array, j_coefficients, j_eval, reduce_array,
                          reduce_to_fundamental_domain)
from cyclint.words import UnimodularMatrix, word_matrix


def _lattice_g(k, tau, rows):
    # sum over the lattice row by row; each row is a pair of Hurwitz zeta values
    total = 2 * mpmath.zeta(k)
    for n in range(1, rows + 1):
        for a in (n * tau, -n * tau):
            total += mpmath.zeta(k, a) + (-1) ** k * mpmath.zeta(k, 1 - a)
    return total


def lattice_j(z: complex) -> complex:
    mpmath.mp.dps = 30
    tau = mpmath.mpc(z.real, z.imag)
    # row n is damped like exp(-2 pi n Im z)
    rows = int(80 / (2 * math.pi * z.imag)) + 2
    g2, g3 = 60 * _lattice_g(4, tau, rows), 140 * _lattice_g(6, tau, rows)
    return complex(1728 * g2 ** 3 / (g2 ** 3 - 27 * g3 ** 2))


def e6_route_coefficients(M):
    """j = 1728 E4^3 / (E4^3 - E6^2), coefficients of q^-1 .. q^M."""
    m = M + 3

    def sigma(n, k):
        return sum(d ** k for d in range(1, n + 1) if n % d == 0)

    def mul(a, b):
        out = [0] * m
        for i in range(m):
            for j in range(m - i):
                out[i + j] += a[i] * b[j]
        return out

    e4 = [1] + [240 * sigma(n, 3) for n in range(1, m)]
    e6 = [1] + [-504 * sigma(n, 5) for n in range(1, m)]
    e43 = mul(mul(e4, e4), e4)
    diff = [x - y for x, y in zip(e43, mul(e6, e6))]  # = 1728 q (1 + ...)
    assert diff[0] == 0 and diff[1] == 1728
    d = [x // 1728 for x in diff[1:]] + [0]  # Delta / q
    inv = [1] + [0] * (m - 1)
    for i in range(1, m):
        inv[i] = -sum(d[k] * inv[i - k] for k in range(1, i + 1))
    return mul(e43, inv)[:M + 2]


def test_coefficients_known_values():
    s = j_coefficients(10)
    assert s.coefficients[0] == 1
    assert s.c(0) == 744
    assert s.c(1) == 196884
    assert s.c(2) == 21493760
    assert all(s.c(n) > 0 for n in range(1, 11))


def test_coefficients_match_e6_route():
    assert list(j_coefficients(DEFAULT_ORDER).coefficients) == e6_route_coefficients(DEFAULT_ORDER)


def test_tail_bound_small():
    assert j_coefficients(DEFAULT_ORDER).tail_bound < 1e-20
    with pytest.raises(ValueError):
        j_coefficients(-1)
    with pytest.raises(MemoryError):
        j_coefficients(10 ** 6)


def test_reduction_examples():
    z, g = reduce_to_fundamental_domain(1j)
    assert z == 1j and g == UnimodularMatrix.identity()
    z, g = reduce_to_fundamental_domain(0.5j)
    assert z == pytest.approx(2j)
    assert g == UnimodularMatrix(0, -1, 1, 0)
    z, g = reduce_to_fundamental_domain(0.3 + 0.1j)
    assert abs(z.real) <= 0.5 + 1e-12 and abs(z) >= 1 - 1e-12
    assert z.imag >= math.sqrt(3) / 2 - 1e-12
    assert g.apply(0.3 + 0.1j) == pytest.approx(z)
    with pytest.raises(ValueError):
        reduce_to_fundamental_domain(0.3 - 0.1j)


def test_reduce_array_agrees():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-3, 3, 50) + 1j * rng.uniform(0.01, 2, 50)
    out = reduce_array(pts)
    ref = np.array([reduce_to_fundamental_domain(p)[0] for p in pts])
    assert np.allclose(out, ref, atol=1e-12)


@pytest.mark.parametrize("z,expected", [(1j, 1728.0), (2j, 287496.0), (complex(0.5, 3 ** 0.5 / 2), 0.0)])
def test_classical_values(z, expected):
    oracle = lattice_j(z)
    assert abs(oracle - expected) <= 1e-10 * max(1.0, abs(expected))
    assert abs(j_eval(z) - expected) <= 1e-8 * max(1.0, abs(expected))


@pytest.mark.parametrize("z", [0.3 + 0.7j, -0.41 + 1.3j, 0.05 + 0.2j, 2.7 + 0.6j])
def test_against_lattice_and_kleinj(z):
    value = j_eval(z)
    assert abs(value - lattice_j(z)) <= 1e-11 * abs(value)
    mpmath.mp.dps = 30
    assert abs(value - complex(1728 * mpmath.kleinj(mpmath.mpc(z.real, z.imag)))) <= 1e-11 * abs(value)


def sl2_pairs(count=100, seed=11):
    """(w, z) with w a double and z = gamma^-1 w computed in high precision.

    Starting from an exactly representable w keeps the comparison about the
    evaluator; rounding gamma z to a double near the real axis would itself
    move the point by far more than 1e-9 in j.
    """
    mpmath.mp.dps = 50
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        z = complex(rng.uniform(-2, 2), rng.uniform(0.05, 10))
        g = word_matrix(tuple(rng.randint(1, 5) for _ in range(2 * rng.randint(1, 3))))
        w = g.apply(z)
        wm = mpmath.mpc(w.real, w.imag)
        out.append((w, complex((g.d * wm - g.b) / (-g.c * wm + g.a))))
    return out


def test_invariance_under_random_matrices():
    worst = max(abs(j_eval(w) - j_eval(z)) / abs(j_eval(z)) for w, z in sl2_pairs())
    assert worst <= 1e-9


def test_reduction_accurate_near_real_axis():
    mpmath.mp.dps = 50
    w = 0.6180339887 + 1e-9j
    z, g = reduce_to_fundamental_domain(w)
    wm = mpmath.mpc(w.real, w.imag)
    exact = (g.a * wm + g.b) / (g.c * wm + g.d)
    assert abs(z - complex(exact)) <= 1e-15
    assert abs(reduce_array(np.array([w]))[0] - complex(exact)) <= 1e-15


def test_reflection_symmetry():
    rng = np.random.default_rng(2)
    z = rng.uniform(-1, 1, 30) + 1j * rng.uniform(0.2, 3, 30)
    assert np.allclose(j_array(-z.conj()), np.conj(j_array(z)), rtol=1e-10, atol=0)


def test_cusp_behaviour():
    y = 6.0
    assert abs(j_eval(1j * y) * math.exp(-2 * math.pi * y) - 1) <= 1e-6
