"""Even words, their SL2(Z) matrices and the word streams built from them.

An even word is a finite even-length block of continued-fraction partial
quotients.  Its matrix is the product of the elementary factors
``[[k, 1], [1, 0]]``; an even number of factors makes the determinant +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

DEFAULT_ALPHABET_BOUND = 20
DEFAULT_MAX_WORD_LENGTH = 64


class WordError(ValueError):
    """Raised for malformed words, streams and schedules."""


@dataclass(frozen=True)
class EvenWord:
    entries: tuple[int, ...] = ()

    def __post_init__(self):
        entries = tuple(self.entries)
        for k in entries:
            if isinstance(k, bool) or not isinstance(k, int):
                raise WordError(f"word entries must be integers, got {k!r}")
            if k < 1:
                raise WordError(f"word entries must be positive, got {k}")
        if len(entries) % 2:
            raise WordError("word length must be even")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, text: str) -> "EvenWord":
        """Parse a literal such as ``"2,1,2,1"``; the empty string is the empty word."""
        text = text.strip()
        if not text:
            return cls(())
        entries = []
        for token in text.split(","):
            token = token.strip()
            try:
                value = int(token)
            except ValueError:
                raise WordError(f"bad word entry {token!r}") from None
            if value < 1:
                raise WordError(f"bad word entry {token!r}: entries must be positive")
            entries.append(value)
        return cls(tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, item):
        return self.entries[item]

    def __add__(self, other: "EvenWord") -> "EvenWord":
        return concat(self, other)

    def __mul__(self, n: int) -> "EvenWord":
        return power(self, n)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __str__(self) -> str:
        return ",".join(map(str, self.entries))

    @property
    def r(self) -> int:
        return len(self.entries) // 2

    def pairs(self) -> list["EvenWord"]:
        e = self.entries
        return [EvenWord(e[i:i + 2]) for i in range(0, len(e), 2)]


EMPTY = EvenWord(())

WordLike = Union[EvenWord, Sequence[int], str]


def as_word(w: WordLike) -> EvenWord:
    if isinstance(w, EvenWord):
        return w
    if isinstance(w, str):
        return EvenWord.parse(w)
    return EvenWord(tuple(w))


@dataclass(frozen=True)
class UnimodularMatrix:
    """2x2 integer matrix ``[[a, b], [c, d]]`` with ``ad - bc = 1``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self} is not 1")

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def __matmul__(self, o: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def __pow__(self, n: int) -> "UnimodularMatrix":
        if n < 0:
            return self.inverse() ** (-n)
        result, base = UnimodularMatrix.identity(), self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def tolist(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def apply(self, z):
        """Moebius action on a complex/real number; ``None`` stands for infinity."""
        if z is None:
            return None if self.c == 0 else _div(self.a, self.c)
        num = self.a * z + self.b
        den = self.c * z + self.d
        if den == 0:
            return None
        return num / den

    def apply_inverse(self, z):
        return self.inverse().apply(z)

    def inverse_image_of_infinity(self) -> Optional[Fraction]:
        """``gamma^{-1}(oo) = -d/c`` exactly, or ``None`` when ``c == 0``."""
        if self.c == 0:
            return None
        return Fraction(-self.d, self.c)


def _div(p: int, q: int):
    return Fraction(p, q)


def pair_matrix(k1: int, k2: int) -> UnimodularMatrix:
    return UnimodularMatrix(k1 * k2 + 1, k1, k2, 1)


def word_matrix(w: WordLike) -> UnimodularMatrix:
    w = as_word(w)
    a, b, c, d = 1, 0, 0, 1
    e = w.entries
    for i in range(0, len(e), 2):
        k1, k2 = e[i], e[i + 1]
        # right-multiply by [[k1*k2+1, k1], [k2, 1]]
        a, b = a * (k1 * k2 + 1) + b * k2, a * k1 + b
        c, d = c * (k1 * k2 + 1) + d * k2, c * k1 + d
    return UnimodularMatrix(a, b, c, d)


def word_length(w: WordLike) -> int:
    return len(as_word(w)) // 2


def primitive_exponent(w: WordLike) -> int:
    """Largest ``n`` with ``w`` the n-fold power of an even word."""
    e = as_word(w).entries
    if not e:
        raise WordError("primitive exponent is undefined for the empty word")
    size = len(e)
    for period in range(2, size + 1, 2):
        if size % period == 0 and e == e[:period] * (size // period):
            return size // period
    raise AssertionError("unreachable")


def concat(*words: WordLike) -> EvenWord:
    entries: list[int] = []
    for w in words:
        entries.extend(as_word(w).entries)
    return EvenWord(tuple(entries))


def power(w: WordLike, n: int) -> EvenWord:
    if n < 0:
        raise WordError("negative power")
    return EvenWord(as_word(w).entries * n)


def reverse(w: WordLike) -> EvenWord:
    return EvenWord(as_word(w).entries[::-1])


def rotate(w: WordLike, pairs: int = 1) -> EvenWord:
    """Cyclic rotation by whole pairs (keeps the word even)."""
    e = as_word(w).entries
    if not e:
        return EMPTY
    s = (2 * pairs) % len(e)
    return EvenWord(e[s:] + e[:s])


# ---------------------------------------------------------------------------
# Thue-Morse morphism h(V) = VW, h(W) = WV on the two-letter block alphabet.
# Blocks are encoded 0 (for V) and 1 (for W).

def thue_morse_blocks(n: int, start: int = 0) -> tuple[int, ...]:
    """Block sequence of h^n(V) (``start=0``) or h^n(W) (``start=1``)."""
    if n < 0:
        raise WordError("n must be non-negative")
    seq = (start,)
    for _ in range(n):
        seq = tuple(b for x in seq for b in (x, 1 - x))
    return seq


def tau(blocks: Sequence[int]) -> tuple[int, ...]:
    """The letter swap V <-> W."""
    return tuple(1 - b for b in blocks)


def materialize(blocks: Iterable[int], v: WordLike, w: WordLike) -> EvenWord:
    v, w = as_word(v), as_word(w)
    return concat(*(v if b == 0 else w for b in blocks))


def thue_morse_prefix(v: WordLike, w: WordLike, n: int) -> EvenWord:
    """h^n(V) as a concrete even word (2^n blocks)."""
    v, w = as_word(v), as_word(w)
    if not v or not w:
        raise WordError("V and W must be non-empty")
    return materialize(thue_morse_blocks(n), v, w)


def thue_morse_identities(v: WordLike, w: WordLike, n: int) -> tuple[bool, Optional[bool]]:
    """Check the two doubling identities at level ``n`` on materialized words.

    First: h^n(V) = h^{n-1}(V) . tau(h^{n-1}(V)).  Second (even ``n`` only,
    otherwise ``None``): h^n(V) equals its block reversal.
    """
    if n < 1:
        raise WordError("n must be >= 1")
    v, w = as_word(v), as_word(w)
    prev = thue_morse_blocks(n - 1)
    cur = thue_morse_blocks(n)
    split = materialize(cur, v, w) == concat(materialize(prev, v, w), materialize(tau(prev), v, w))
    mirror = None
    if n % 2 == 0:
        mirror = materialize(cur[::-1], v, w) == materialize(cur, v, w)
    return split, mirror


def has_cube(seq: Sequence) -> bool:
    """True if ``seq`` contains a factor UUU with U non-empty."""
    n = len(seq)
    for p in range(1, n // 3 + 1):
        run = 0
        # run counts consecutive positions with seq[i] == seq[i + p]
        for i in range(n - p):
            run = run + 1 if seq[i] == seq[i + p] else 0
            if run >= 2 * p:
                return True
    return False


# ---------------------------------------------------------------------------
# Streams

Schedule = Callable[[int], int]

BUILTIN_SCHEDULES: dict[str, Schedule] = {
    "n": lambda n: n,
    "sqrt": lambda n: math.isqrt(n - 1) + 1,  # ceil(sqrt(n))
    "log": lambda n: n.bit_length(),  # floor(log2 n) + 1
}

# growth class used to compute limiting weights: larger wins
_SCHEDULE_ORDER = {"n": 3, "sqrt": 2, "log": 1}


@dataclass
class WordStream:
    """A replayable producer of even words W_1, W_2, ...

    ``factory`` returns a fresh iterator each call, so a stream can be forked
    by replaying from the start.  ``period`` is the eventual period of the
    pair-chunked view, in pairs, when known.
    """

    factory: Callable[[], Iterator[EvenWord]]
    bound: int = DEFAULT_ALPHABET_BOUND
    max_word_length: Optional[int] = DEFAULT_MAX_WORD_LENGTH
    period: Optional[int] = None
    description: str = ""
    meta: dict = field(default_factory=dict)

    def words(self) -> Iterator[EvenWord]:
        for i, w in enumerate(self.factory()):
            if not w:
                continue
            if any(k > self.bound for k in w):
                raise WordError(f"word {i + 1} ({w}) exceeds the alphabet bound {self.bound}")
            if self.max_word_length is not None and len(w) > self.max_word_length:
                raise WordError(f"word {i + 1} is longer than {self.max_word_length} entries")
            yield w

    def quotients(self) -> Iterator[int]:
        for w in self.words():
            yield from w

    def pairs(self) -> Iterator[EvenWord]:
        it = self.quotients()
        for k1 in it:
            yield EvenWord((k1, next(it)))

    def take(self, n: int, grouping: str = "pairs") -> list[EvenWord]:
        it = self.pairs() if grouping == "pairs" else self.words()
        out = []
        for w in it:
            if len(out) == n:
                break
            out.append(w)
        if len(out) < n:
            raise WordError(f"stream exhausted after {len(out)} words")
        return out

    def take_quotients(self, n: int) -> list[int]:
        out = []
        for k in self.quotients():
            if len(out) == n:
                break
            out.append(k)
        if len(out) < n:
            raise WordError(f"stream exhausted after {len(out)} quotients")
        return out

    def drop_first(self) -> "WordStream":
        """The stream W_2, W_3, ... (an SL2(Z)-translate of the original point)."""
        parent = self.factory

        def factory():
            it = parent()
            next(it, None)
            return it

        return WordStream(factory, self.bound, self.max_word_length, self.period,
                          f"drop1({self.description})", dict(self.meta))

    def mean_word_length(self, n: int) -> float:
        """Running average (|W_1| + ... + |W_n|)/n of the original grouping."""
        words = self.take(n, grouping="words")
        return sum(w.r for w in words) / n


def periodic_stream(preperiod: WordLike, period: WordLike,
                    bound: int = DEFAULT_ALPHABET_BOUND,
                    max_word_length: Optional[int] = DEFAULT_MAX_WORD_LENGTH) -> WordStream:
    """Stream for ``[V overline(W)]``: the preperiod once, then the period forever."""
    pre, per = as_word(preperiod), as_word(period)
    if not per:
        raise WordError("period must be non-empty")

    def factory():
        if pre:
            yield pre
        while True:
            yield per

    return WordStream(factory, bound, max_word_length, period=per.r,
                      description=f"[{pre};({per})*]", meta={"preperiod": pre, "period": per})


def random_stream(seed: int, bound: int = 3, max_pairs: int = 3) -> WordStream:
    """Stream of random even words with entries in 1..bound (for property tests)."""
    import random

    def factory():
        rng = random.Random(seed)
        while True:
            r = rng.randint(1, max_pairs)
            yield EvenWord(tuple(rng.randint(1, bound) for _ in range(2 * r)))

    return WordStream(factory, bound=bound, max_word_length=2 * max_pairs,
                      description=f"random(seed={seed}, bound={bound})")


@dataclass(frozen=True)
class Theorem1Family:
    """Data of the doubly-indexed family U_n = V_1 W_1^{a_1n} ... V_k W_k^{a_kn}."""

    vs: tuple[EvenWord, ...]
    ws: tuple[EvenWord, ...]
    schedules: tuple[Union[str, Schedule], ...]

    @property
    def k(self) -> int:
        return len(self.ws)

    @property
    def k_prime(self) -> int:
        return sum(1 for v in self.vs if v)

    def exponent(self, i: int, n: int) -> int:
        s = self.schedules[i]
        return BUILTIN_SCHEDULES[s](n) if isinstance(s, str) else int(s(n))

    def block(self, n: int) -> EvenWord:
        parts: list[EvenWord] = []
        for i in range(self.k):
            parts.append(self.vs[i])
            parts.append(power(self.ws[i], self.exponent(i, n)))
        return concat(*parts)

    def a_total(self, n: int) -> int:
        """A_n = k' n + sum_i sum_{j<=n} a_{i,j}."""
        return self.k_prime * n + sum(self.exponent(i, j) for i in range(self.k) for j in range(1, n + 1))

    def weights_at(self, n: int) -> list[float]:
        a_n = self.a_total(n)
        return [sum(self.exponent(i, j) for j in range(1, n + 1)) / a_n for i in range(self.k)]

    def limit_weights(self, n_numeric: int = 20000) -> list[float]:
        """Limits a_i = lim (1/A_n) sum_j a_{i,j}.

        Exact for built-in schedules (only the fastest-growing class survives,
        shared equally); custom schedules fall back to the value at ``n_numeric``.
        """
        if all(isinstance(s, str) for s in self.schedules):
            orders = [_SCHEDULE_ORDER[s] for s in self.schedules]
            top = max(orders)
            count = orders.count(top)
            return [1.0 / count if o == top else 0.0 for o in orders]
        return self.weights_at(n_numeric)


def theorem1_stream(vs: Sequence[WordLike], ws: Sequence[WordLike],
                    schedules: Sequence[Union[str, Schedule]],
                    bound: int = DEFAULT_ALPHABET_BOUND,
                    assert_growth: bool = False) -> WordStream:
    """Stream U_1, U_2, ... with U_n = V_1 W_1^{a_{1,n}} ... V_k W_k^{a_{k,n}}.

    Built-in schedules are ``"n"``, ``"sqrt"`` (ceil sqrt n) and ``"log"``
    (floor log2 n + 1); all satisfy a_n -> oo and 2^-n a_n -> 0.  Callables
    are accepted only with ``assert_growth=True``.
    """
    vs_w = tuple(as_word(v) for v in vs)
    ws_w = tuple(as_word(w) for w in ws)
    if not (len(vs_w) == len(ws_w) == len(schedules)):
        raise WordError("V, W and schedule lists must have the same length k")
    if not ws_w or not all(ws_w):
        raise WordError("every W_i must be non-empty")
    for s in schedules:
        if isinstance(s, str):
            if s not in BUILTIN_SCHEDULES:
                raise WordError(f"unknown schedule {s!r}; built-ins are {sorted(BUILTIN_SCHEDULES)}")
        elif not assert_growth:
            raise WordError("custom schedules require assert_growth=True")
    fam = Theorem1Family(vs_w, ws_w, tuple(schedules))

    def factory():
        n = 1
        while True:
            yield fam.block(n)
            n += 1

    desc = ";".join(f"{v}|{w}|{s if isinstance(s, str) else 'custom'}"
                    for v, w, s in zip(vs_w, ws_w, schedules))
    # U_n grows without bound; finiteness holds for the pair-chunked view only
    return WordStream(factory, bound=bound, max_word_length=None,
                      description=f"theorem1({desc})", meta={"family": fam})
