"""Seeded shared randomness and the small combinatorial helpers used by every LCA."""

from __future__ import annotations

import hashlib
import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1


class RandomTape:
    """Keyed pseudorandom function (seed, label, ints) -> 64-bit word.

    Built on keyed BLAKE2b, so equal inputs always replay the same word and
    distinct labels never share a stream.
    """

    __slots__ = ("seed", "_key")

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & MASK64
        self._key = self.seed.to_bytes(8, "little")

    def word(self, label: str, *args: int) -> int:
        msg = (label + "|" + ",".join(map(str, args))).encode()
        return int.from_bytes(hashlib.blake2b(msg, digest_size=8, key=self._key).digest(), "little")

    def words(self, label: str, count: int, *args: int) -> list[int]:
        """`count` independent words for one (label, args) stream."""
        out: list[int] = []
        block = 0
        base = label + "|" + ",".join(map(str, args)) + "|"
        while len(out) < count:
            d = hashlib.blake2b((base + str(block)).encode(), digest_size=64, key=self._key).digest()
            out.extend(int.from_bytes(d[i:i + 8], "little") for i in range(0, 64, 8))
            block += 1
        return out[:count]

    def unit(self, label: str, *args: int) -> float:
        return self.word(label, *args) / 2.0**64

    def coin(self, p: float, label: str, *args: int) -> bool:
        """True with probability p."""
        if p >= 1.0:
            return True
        if p <= 0.0:
            return False
        return self.word(label, *args) < int(p * 2.0**64)


# combinatorial helpers

def edge_rank_less(e1: tuple[int, int], e2: tuple[int, int]) -> bool:
    """Rank order on canonical edges: by smaller endpoint, then larger."""
    return e1[0] < e2[0] or (e1[0] == e2[0] and e1[1] < e2[1])


def class_of(deg: int, delta: int) -> int:
    """The i with deg in [2^(i-1)*delta + 1, 2^i*delta]; needs deg > delta."""
    if deg <= delta:
        raise ValueError(f"degree {deg} is below classed range (threshold {delta})")
    if delta <= 0:
        raise ValueError("threshold must be positive")
    q = -(-deg // delta)  # ceil(deg / delta) >= 2
    return (q - 1).bit_length()


def bucket_of(i: int, delta: int) -> int:
    """The j with i in [(j-1)*delta + 1, j*delta]."""
    if i < 1:
        raise ValueError("index must be >= 1")
    return -(-i // delta)


def icbrt(n: int) -> int:
    """floor(n ** (1/3)) computed exactly."""
    if n < 0:
        raise ValueError("negative")
    r = int(round(n ** (1.0 / 3.0)))
    while r ** 3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def cbrt_sq_ceil(n: int) -> int:
    """ceil(n ** (2/3)): smallest h with h**3 >= n**2."""
    t = n * n
    h = icbrt(t)
    return h if h ** 3 == t else h + 1


def log2n(n: int) -> float:
    return math.log2(n) if n > 1 else 0.0


# center families

@dataclass(frozen=True)
class CenterFamily:
    """Sets S_1..S_t of distinct vertices with halving sizes."""

    label: str
    n: int
    sizes: tuple[int, ...]
    sets: tuple[tuple[int, ...], ...]
    members: tuple[frozenset, ...]

    @property
    def levels(self) -> int:
        return len(self.sets)

    def level(self, i: int) -> tuple[int, ...]:
        """S_i (1-based); levels past t are empty."""
        if 1 <= i <= len(self.sets):
            return self.sets[i - 1]
        return ()

    def contains(self, i: int, v: int) -> bool:
        return 1 <= i <= len(self.sets) and v in self.members[i - 1]

    def contains_sorted(self, i: int, v: int) -> bool:
        """Same as contains, by binary search on the sorted level."""
        s = self.level(i)
        k = bisect_left(s, v)
        return k < len(s) and s[k] == v


def family_sizes(base_size: int, levels: int) -> tuple[int, ...]:
    sizes = [base_size]
    for _ in range(levels - 1):
        sizes.append(-(-sizes[-1] // 2))
    return tuple(sizes)


def sample_center_family(n: int, base_size: int, levels: int, tape: RandomTape,
                         label: str) -> CenterFamily:
    """Each S_i is a uniform x_i-subset of range(n) from the stream (tape, label, i)."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if not 0 <= base_size <= n:
        raise ValueError(f"base size {base_size} not in [0, {n}]")
    sizes = family_sizes(base_size, levels)
    sets = []
    for i, x in enumerate(sizes, start=1):
        rng = np.random.default_rng(tape.word("family:" + label, i))
        # partial Fisher-Yates: first x slots of a seeded shuffle
        pick = rng.permutation(n)[:x] if x * 4 >= n else rng.choice(n, size=x, replace=False)
        sets.append(tuple(sorted(pick.tolist())))
    return CenterFamily(label, n, sizes, tuple(sets), tuple(frozenset(s) for s in sets))


def vertex_sample(v: int, deg: int, count: int, tape: RandomTape, label: str = "R") -> list[int]:
    """`count` neighbor indices in [1, deg], drawn with replacement from (tape, label, v)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if deg <= 0:
        return []
    return [1 + (w % deg) for w in tape.words(label, count, v)]


def cell_rank(center: int, tape: RandomTape) -> tuple[int, int]:
    """Random cell rank; the center id breaks ties so the order is total."""
    return (tape.word("cellrank", center), center)


def is_marked(center: int, tape: RandomTape, p_mark: float) -> bool:
    return tape.coin(p_mark, "mark", center)


# parameters

@dataclass(frozen=True)
class AlgParams:
    """Tunable constants. Multipliers scale the default set and sample sizes."""

    c_centers: float = 1.0
    c_rep_sample: float = 3.0
    c_L: float = 1.0
    k: int = 3
    p_mark: float | None = None  # default n^(-1/3)
    # stop a bucket scan at the first cluster member instead of reading the
    # whole prefix; answers are unchanged, probe counts drop
    early_stop: bool = False

    def __post_init__(self):
        for name in ("c_centers", "c_rep_sample", "c_L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.p_mark is not None and not 0.0 <= self.p_mark <= 1.0:
            raise ValueError("p_mark must lie in [0, 1]")

    def k_for(self, n: int) -> int:
        """k capped at ceil(log2 n)."""
        return max(1, min(self.k, math.ceil(log2n(n)) or 1))

    def mark_prob(self, n: int) -> float:
        if self.p_mark is not None:
            return self.p_mark
        return n ** (-1.0 / 3.0) if n > 0 else 1.0


def scaled_size(n: int, c: float, exponent: float) -> int:
    """min(n, max(1, ceil(c * n^exponent * log2 n)))."""
    if n <= 0:
        return 0
    return min(n, max(1, math.ceil(c * n ** exponent * log2n(n))))
