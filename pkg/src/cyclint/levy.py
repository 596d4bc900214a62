"""Monte Carlo calibration of the per-pair growth rate of convergent denominators.

For Gauss-typical x, (1/n) log q_n -> pi^2 / (12 log 2) per partial
quotient, so over pairs the rate is pi^2 / (6 log 2).  Samples are exact
rationals p / 2^bits expanded by integer Euclid, so every quotient used is
the true quotient of the sample.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .quadratic import log_int

LEVY_PAIR_CONSTANT = math.pi ** 2 / (6 * math.log(2))
# typical bits consumed per partial quotient: pi^2 / (12 log 2) / log 2
BITS_PER_QUOTIENT = 1.72


class LevyBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class LevyResult:
    mean: float
    stderr: float
    statistics: tuple
    trials: int
    depth: int
    bits: int
    seed: int


def levy_statistic(p: int, q: int, depth: int) -> float:
    """(1/depth) log of the denominator of the 2*depth-th convergent of p/q < 1."""
    if not 0 < p < q:
        raise ValueError("need 0 < p < q")
    q_prev, q_cur = 0, 1  # denominators q_{-1}... seeded so q_0 = 1
    num, den = q, p  # 1/x = q/p
    for i in range(2 * depth):
        if den == 0:
            raise LevyBudgetError(f"expansion terminated after {i} quotients; raise bits")
        k, r = divmod(num, den)
        q_prev, q_cur = q_cur, k * q_cur + q_prev
        num, den = den, r
    return log_int(q_cur) / depth


def _trial(seed_seq: np.random.SeedSequence, depth: int, bits: int) -> float:
    rng = random.Random(int(seed_seq.generate_state(1, dtype=np.uint64)[0]))
    q = 1 << bits
    p = 0
    while p == 0:
        p = rng.getrandbits(bits)
    return levy_statistic(p, q, depth)


def levy_monte_carlo(trials: int = 100, depth: int = 500, bits: int = 2048, seed: int = 1,
                     threads: int = 1) -> LevyResult:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if 2 * depth * BITS_PER_QUOTIENT > bits:
        raise LevyBudgetError(f"depth {depth} needs about {math.ceil(2 * depth * BITS_PER_QUOTIENT)} bits, got {bits}")
    children = np.random.SeedSequence(seed).spawn(trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(lambda s: _trial(s, depth, bits), children))
    else:
        stats = [_trial(s, depth, bits) for s in children]
    arr = np.array(stats)
    mean = math.fsum(stats) / trials
    stderr = float(arr.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return LevyResult(mean, stderr, tuple(stats), trials, depth, bits, seed)
