"""Extended limits over word streams: telescoped averages of j and eta, units, reference values.

Every increment lives on a short segment ``z0 -> gamma_{W_m} z0``; the long
geodesic is never integrated directly.  The form eta_{x', x} is pulled back
by the exact prefix matrix, so step m uses the endpoints
``gamma_{m-1}^{-1} x'`` (exact rational, or infinity) and
``gamma_{m-1}^{-1} x = [W_m W_{m+1} ...]`` (from a finite tail window).

Raw partial averages S_n / L_n carry an O(1/n) boundary term.  Final
estimates use the second-half window (S_n - S_m) / (L_n - L_m), with the
window length rounded to whole periods when the stream period is known;
for eventually periodic streams the boundary terms then cancel up to an
exponentially small amount.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .contour import DEFAULT_TOL, EtaForm, cycle_integrals, eta_integral_closed, integrate_j_eta
from .quadratic import cf_value, log_int
from .quadrature import QuadratureError
from .words import (EvenWord, UnimodularMatrix, WordError, WordLike, WordStream, as_word, pair_matrix,
                    theorem1_stream, thue_morse_identities, thue_morse_prefix, word_length,
                    word_matrix)

TAIL_QUOTIENTS = 60
CAUCHY_WINDOW = 10
ONE_HAT_FLOOR = 1e-6
CHUNK_MAX_C = 64
VERDICTS = ("converged", "bounded-oscillation", "undetermined")


def window_start(n: int, period: Optional[int] = None) -> int:
    """Start index m of the estimation window ending at n (second half, whole periods)."""
    if n <= 0:
        return 0
    span = n - n // 2
    if period:
        span = -(-span // period) * period
        if span > n:
            span = (n // period) * period
        if span == 0:
            span = n
    return n - span


def _window(values: np.ndarray, lengths: np.ndarray, period: Optional[int]) -> np.ndarray:
    """Window estimates for cumulative sums ``values`` indexed 0..n (values[0] = 0)."""
    out = np.empty(len(values) - 1, dtype=values.dtype)
    for n in range(1, len(values)):
        m = window_start(n, period)
        out[n - 1] = (values[n] - values[m]) / (lengths[n] - lengths[m])
    return out


@dataclass(frozen=True)
class PartialAverage:
    n: int
    sum_len: int
    val_hat: complex
    one_hat: complex
    eps_hat: float  # raw c_n^(1/sum_len)


@dataclass
class Accumulator:
    """Running state of the telescoped sums."""

    matrix: UnimodularMatrix = field(default_factory=UnimodularMatrix.identity)
    j_sum: complex = 0j
    eta_sum: complex = 0j
    sum_len: int = 0
    history: list = field(default_factory=list)
    max_pullback: float = 0.0

    def push(self, g: UnimodularMatrix, j_inc: complex, eta_inc: complex, pairs: int):
        self.matrix = self.matrix @ g
        self.j_sum += j_inc
        self.eta_sum += eta_inc
        self.sum_len += pairs
        c = self.matrix.c
        eps = math.exp(log_int(c) / self.sum_len) if c > 0 else 1.0
        self.history.append(PartialAverage(len(self.history) + 1, self.sum_len,
                                           self.j_sum / self.sum_len, self.eta_sum / self.sum_len, eps))


@dataclass
class ConvergenceReport:
    input: str
    grouping: str
    partial: list
    val_hat_window: np.ndarray
    one_hat_window: np.ndarray
    log_c_window: np.ndarray  # window estimates of log eps-hat from denominators
    cauchy_width: float
    verdict: str
    window: int
    diagnostics: dict
    error_estimate: float

    @property
    def n(self) -> int:
        return len(self.partial)

    @property
    def val_hat(self) -> complex:
        return complex(self.val_hat_window[-1])

    @property
    def one_hat(self) -> complex:
        return complex(self.one_hat_window[-1])

    @property
    def eps_hat(self) -> float:
        """exp(1-hat / 2)."""
        return math.exp(self.one_hat.real / 2)

    @property
    def eps_hat_denominators(self) -> float:
        return math.exp(float(self.log_c_window[-1]))

    @property
    def val(self) -> Optional[complex]:
        if abs(self.one_hat) <= ONE_HAT_FLOOR:
            return None
        return self.val_hat / self.one_hat

    def raw(self, n: Optional[int] = None) -> PartialAverage:
        return self.partial[(n or self.n) - 1]


def _stream_steps(stream: WordStream, n_max: int, grouping: str, tail: int):
    if grouping not in ("pairs", "words"):
        raise ValueError(f"unknown grouping {grouping!r}")
    steps = stream.take(n_max, grouping)
    total = sum(len(w) for w in steps)
    return steps, stream.take_quotients(total + tail)


def _chunks(w: EvenWord, max_c: int = CHUNK_MAX_C) -> list[EvenWord]:
    """Split a step into runs of pairs whose matrix keeps c <= max_c.

    The segment z0 -> gamma z0 ends at height ~ 1/c^2, so bounded c keeps
    the endpoint and the pulled-back form well conditioned.
    """
    out, cur, g = [], [], UnimodularMatrix.identity()
    for pair in w.pairs():
        h = g @ pair_matrix(*pair)
        if cur and h.c > max_c:
            out.append(EvenWord(tuple(cur)))
            cur, h = [], pair_matrix(*pair)
        cur.extend(pair)
        g = h
    if cur:
        out.append(EvenWord(tuple(cur)))
    return out


def _step_period(stream: WordStream, grouping: str) -> Optional[int]:
    if grouping == "pairs":
        return stream.period
    # words of a periodic stream repeat one by one after the preperiod
    return 1 if "period" in stream.meta else None


def _cauchy_width(values: np.ndarray, k: int) -> float:
    tail = values[-k:]
    scale = max(1.0, float(np.abs(tail.mean())))
    return float(np.max(np.abs(tail[:, None] - tail[None, :]))) / scale


def accumulate_extended(stream: WordStream, n_max: int, tol: float = DEFAULT_TOL, *,
                        grouping: str = "pairs", z0: complex = 1j,
                        x_prime: Union[None, int, Fraction] = None,
                        cauchy_tol: float = 1e-6, window: int = CAUCHY_WINDOW,
                        threads: int = 1, tail_quotients: int = TAIL_QUOTIENTS) -> ConvergenceReport:
    """Telescoped partial averages of j eta_{x', x} and eta_{x', x} along the stream.

    ``x_prime=None`` puts the second endpoint at infinity.  Steps are pairs
    (default) or the stream's own words; ``sum_len`` always counts pairs.
    ``threads > 1`` evaluates the increments concurrently; the merge is in
    step order so the result does not depend on the thread count.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    z0 = complex(z0)
    if z0.imag <= 0:
        raise ValueError("z0 must lie in the upper half-plane")
    steps, quotients = _stream_steps(stream, n_max, grouping, tail_quotients)
    xp = None if x_prime is None else Fraction(x_prime)

    jobs = []  # (step index, chunk matrix, pulled-back form)
    g = UnimodularMatrix.identity()
    pos = 0
    max_pullback = 0.0
    for step, w in enumerate(steps):
        for chunk in _chunks(w):
            if xp is None:
                p = None if g.c == 0 else float(Fraction(-g.d, g.c))
            else:
                den = g.a - g.c * xp
                p = None if den == 0 else float((g.d * xp - g.b) / den)
            q = cf_value(quotients[pos:pos + len(chunk) + tail_quotients])
            max_pullback = max(max_pullback, abs(q), 0.0 if p is None else abs(p))
            m = word_matrix(chunk)
            jobs.append((step, m, EtaForm(p, q)))
            g = g @ m
            pos += len(chunk)

    def run(job):
        _, m, eta = job
        return integrate_j_eta(z0, m.apply(z0), eta, tol)

    threads = max(1, int(threads))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    acc = Accumulator()
    err = 0.0
    j_inc, eta_inc = [0j] * len(steps), [0j] * len(steps)
    for (step, m, eta), res in zip(jobs, results):
        if not res.converged:
            raise QuadratureError("subdivision cap exceeded", step + 1)
        j_inc[step] += res.value
        eta_inc[step] += eta_integral_closed(z0, m.apply(z0), eta)
        err += res.error_estimate
    for step, w in enumerate(steps):
        acc.push(word_matrix(w), j_inc[step], eta_inc[step], word_length(w))
    acc.max_pullback = max_pullback

    lengths = np.array([0] + [p.sum_len for p in acc.history], dtype=float)
    j_cum = np.array([0j] + [p.val_hat * p.sum_len for p in acc.history])
    eta_cum = np.array([0j] + [p.one_hat * p.sum_len for p in acc.history])
    period = _step_period(stream, grouping)
    val_w = _window(j_cum, lengths, period)
    one_w = _window(eta_cum, lengths, period)

    # log c_n from the exact denominators, n = 0 contributes 0
    log_c = [0.0]
    g = UnimodularMatrix.identity()
    for w in steps:
        g = g @ word_matrix(w)
        log_c.append(log_int(g.c))
    log_c_w = _window(np.array(log_c), lengths, period)
    k = min(window, len(val_w))
    width = max(_cauchy_width(val_w, k), _cauchy_width(one_w, k))
    if len(val_w) < 2 * window:
        verdict = "undetermined"
    elif width < cauchy_tol:
        verdict = "converged"
    else:
        verdict = "bounded-oscillation"
    vals = val_w[-k:] / np.where(np.abs(one_w[-k:]) > ONE_HAT_FLOOR, one_w[-k:], np.nan)
    with np.errstate(invalid="ignore"):
        im_part = float(np.nanmax(np.abs(vals.imag) / np.abs(vals))) if np.isfinite(vals).any() else 0.0
    diagnostics = {"max_pullback": max_pullback, "max_im_part": im_part}
    if grouping == "words":
        diagnostics["mean_word_length"] = acc.sum_len / len(steps)
    return ConvergenceReport(stream.description, grouping, acc.history, val_w, one_w,
                             np.asarray(log_c_w), width, verdict, window, diagnostics, err)


# ---------------------------------------------------------------------------
# eps-hat from convergent denominators

@dataclass(frozen=True)
class UnitEstimates:
    n: np.ndarray
    raw: np.ndarray  # c_n^(1/n)
    window: np.ndarray  # exp((log c_n - log c_m)/(n - m))
    denominators: tuple  # exact c_n

    @property
    def final(self) -> float:
        return float(self.window[-1])


def epsilon_hat_denominators(stream: WordStream, n_max: int) -> UnitEstimates:
    """Growth rate of the lower-left entries c_n of the pair-prefix matrices."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    g = UnimodularMatrix.identity()
    cs = []
    log_c = [0.0]
    for pair in stream.take(n_max, "pairs"):
        g = g @ pair_matrix(*pair)
        cs.append(g.c)
        log_c.append(log_int(g.c))
    n = np.arange(1, n_max + 1)
    log_c_arr = np.array(log_c)
    raw = np.exp(log_c_arr[1:] / n)
    win = np.exp(_window(log_c_arr, np.arange(n_max + 1, dtype=float), stream.period))
    return UnitEstimates(n, raw, win, tuple(cs))


# ---------------------------------------------------------------------------
# reference values

@dataclass(frozen=True)
class Theorem1Reference:
    val_hat: complex
    one_hat: float
    val: complex
    weights: tuple
    mean_length: float  # pairs per unit of A_n


def theorem1_reference(vs: Sequence[WordLike], ws: Sequence[WordLike], schedules: Sequence,
                       tol: float = DEFAULT_TOL, weighting: str = "pairs") -> Theorem1Reference:
    """Limit values for the stream U_n = V_1 W_1^{a_1n} ... V_k W_k^{a_kn}.

    ``weighting="pairs"`` weights the per-pair values of w_i by a_i |W_i|,
    which is a_i N(W_i) times the per-period integral.  ``"literal"`` uses
    a_i N(W_i) with the per-pair values, which agrees when N(W_i) = |W_i|.
    """
    fam = theorem1_stream(vs, ws, schedules).meta["family"]
    weights = fam.limit_weights()
    if not any(weights):
        raise ValueError("all weights vanish")
    num, den, length = 0j, 0.0, 0.0
    for a, w in zip(weights, fam.ws):
        if not a:
            continue
        ci = cycle_integrals(w, tol)
        if weighting == "pairs":
            f = a * ci.pairs
        elif weighting == "literal":
            f = a * ci.exponent
        else:
            raise ValueError(f"unknown weighting {weighting!r}")
        num += f * ci.val_hat
        den += f * ci.one_hat
        length += a * ci.pairs
    return Theorem1Reference(num / length, den / length, num / den, tuple(weights), length)


@dataclass(frozen=True)
class ThueMorseRecord:
    n: int
    pairs: int
    val_hat: complex
    one_hat: float
    val: complex
    palindrome: bool
    gap_val_hat: Optional[float]
    gap_one_hat: Optional[float]


def thue_morse_estimates(v: WordLike, w: WordLike, n_max: int = 3, tol: float = DEFAULT_TOL,
                         max_pairs: int = 1 << 14) -> list[ThueMorseRecord]:
    """Hat values of the periodic words h^{2n}(V), n = 0..n_max, and their successive gaps."""
    v, w = as_word(v), as_word(w)
    if not v or not w:
        raise WordError("V and W must be non-empty")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if 4 ** n_max * max(v.r, w.r) > max_pairs:
        raise ValueError(f"h^{2 * n_max}(V) exceeds {max_pairs} pairs")
    out: list[ThueMorseRecord] = []
    for n in range(n_max + 1):
        word = thue_morse_prefix(v, w, 2 * n)
        ci = cycle_integrals(word, tol)
        prev = out[-1] if out else None
        out.append(ThueMorseRecord(
            n, word.r, ci.val_hat, ci.one_hat, ci.val,
            n == 0 or thue_morse_identities(v, w, 2 * n)[1] is True,
            None if prev is None else abs(ci.val_hat - prev.val_hat),
            None if prev is None else abs(ci.one_hat - prev.one_hat)))
    return out


def repetition_residuals(v: WordLike, a_sequence: Sequence[int],
                         tail_spec: tuple = ((2, 2), (2, 2)), tol: float = DEFAULT_TOL,
                         z0: complex = 1j, max_pairs: int = 1 << 14) -> np.ndarray:
    """Residuals I_n = int_{z0}^{gamma_V^{a_n} z0} j eta_{x'_n, x_n} - a_n |V| val-hat(v).

    x_n = [V^{a_n} T T T ...] and -x'_n = [0; S S S ...] for the periodic
    tails ``tail_spec = (T, S)``.  The integral is cut into a_n copies of
    z0 -> gamma_V z0, the i-th pulled back by gamma_V^i.
    """
    v = as_word(v)
    if not v:
        raise WordError("V must be non-empty")
    t_word, s_word = (as_word(t) for t in tail_spec)
    if not t_word or not s_word:
        raise WordError("tail words must be non-empty")
    gv = word_matrix(v)
    ginv = gv.inverse()
    ref = cycle_integrals(v, tol)
    z0 = complex(z0)
    z1 = gv.apply(z0)
    tail_t = list(t_word) * (TAIL_QUOTIENTS // len(t_word) + 1)
    tail_s = list(s_word) * (TAIL_QUOTIENTS // len(s_word) + 1)
    out = []
    for a in a_sequence:
        a = int(a)
        if a < 0:
            raise ValueError("repetition counts must be >= 0")
        if a * v.r > max_pairs:
            raise ValueError(f"V^{a} exceeds {max_pairs} pairs")
        xp = -1.0 / cf_value(tail_s)  # -[0; S S ...]
        total = 0j
        for i in range(a):
            x = cf_value(list(v) * (a - i) + tail_t)
            res = integrate_j_eta(z0, z1, EtaForm(xp, x), tol)
            if not res.converged:
                raise QuadratureError("subdivision cap exceeded", i)
            total += res.value
            xp = (ginv.a * xp + ginv.b) / (ginv.c * xp + ginv.d)
        out.append(total - a * v.r * ref.val_hat)
    return np.array(out)
