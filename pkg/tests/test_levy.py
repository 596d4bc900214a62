import math
from fractions import Fraction

import pytest

from cyclint.levy import LEVY_PAIR_CONSTANT, LevyBudgetError, levy_monte_carlo, levy_statistic

# seed-pinned output of the default run (100 trials, depth 500, 2048 bits, seed 1)
PINNED_MEAN = 2.3769035528536033
PINNED_FIRST = (2.351191886379242, 2.4663168572787413, 2.3540634021405014)


def test_constant():
    assert LEVY_PAIR_CONSTANT == pytest.approx(2.3731382, abs=1e-7)


def test_statistic_small_cases():
    # 3/7 = [0; 2, 3] -> q_2 = 7
    assert levy_statistic(3, 7, 1) == pytest.approx(math.log(7))
    assert levy_statistic(5, 16, 1) == pytest.approx(math.log(16))  # [0; 3, 5]
    with pytest.raises(LevyBudgetError):
        levy_statistic(1, 2, 1)
    with pytest.raises(ValueError):
        levy_statistic(5, 3, 1)


def test_statistic_matches_fraction_convergents():
    p, q = 123456789, 2 ** 40
    x = Fraction(p, q)
    quots = []
    for _ in range(12):
        x = 1 / x
        k = int(x)
        quots.append(k)
        x -= k
    qm, qc = 0, 1
    for k in quots:
        qm, qc = qc, k * qc + qm
    assert levy_statistic(p, q, 6) == pytest.approx(math.log(qc) / 6)


def test_pinned_regression():
    res = levy_monte_carlo(100, 500, 2048, 1)
    assert res.mean == pytest.approx(PINNED_MEAN, rel=1e-13)
    assert res.statistics[:3] == pytest.approx(PINNED_FIRST, rel=1e-13)
    assert abs(res.mean / LEVY_PAIR_CONSTANT - 1) < 0.01
    assert 0 < res.stderr < 0.02


def test_determinism_and_threads():
    a = levy_monte_carlo(20, 100, 512, 9)
    b = levy_monte_carlo(20, 100, 512, 9, threads=3)
    assert a.statistics == b.statistics
    assert levy_monte_carlo(20, 100, 512, 10).statistics != a.statistics


def test_budget_and_arguments():
    with pytest.raises(LevyBudgetError):
        levy_monte_carlo(1, 1000, 2048, 1)
    with pytest.raises(ValueError):
        levy_monte_carlo(0, 10, 512, 1)
    assert math.isnan(levy_monte_carlo(1, 10, 512, 1).stderr)
