"""Pairing permutations of collision histories and their momentum matrices.

A pairing of two collision histories of order ``n`` is a permutation
``pi`` of ``{1..n}`` (one-line notation, 1-indexed throughout).  Every
permutation carries:

- an index classification into peaks, valleys, slopes and ladders, read
  off the graph of its extension ``pi~`` (``pi~(0)=0``, ``pi~(n+1)=n+1``);
- a degree ``d(pi) = n - #ladders``, the combinatorial complexity that
  controls how small the associated momentum integral is;
- an ``(n+1) x (n+1)`` totally unimodular matrix ``M(pi)`` with entries in
  ``{-1,0,+1}`` expressing the tree (primed) momenta as signed sums of the
  loop momenta, ``p' = M p``.

The module also provides the inclusion-exclusion coefficients that convert
a distinct-label constrained sum into a linear combination of momentum
delta functions, and the break-up of higher-order "lumps" (blocks of
coinciding labels) into ordinary pairings of maximal degree.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Perm",
    "IndexClassification",
    "classify",
    "degree",
    "degree_temporary",
    "build_matrix",
    "apply_matrix",
    "kirchhoff_residuals",
    "check_unimodular",
    "enumerate_by_degree",
    "counting_constant",
    "connected_graph_coefficients",
    "set_partitions",
    "lump_breakup",
    "LumpBreakup",
]


@dataclass(frozen=True)
class Perm:
    """A permutation of {1..n} in one-line notation (1-indexed).

    ``word[j-1] == pi(j)``.

    >>> p = Perm.from_word((2, 1))
    >>> p(1), p(2), p.n
    (2, 1, 2)
    """

    word: tuple[int, ...]

    def __post_init__(self):
        n = len(self.word)
        if sorted(self.word) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {self.word}")

    @classmethod
    def from_word(cls, word) -> "Perm":
        return cls(tuple(int(w) for w in word))

    @classmethod
    def from_string(cls, text: str) -> "Perm":
        """Parse a one-line integer sequence like ``"1 2 7 6 5 3 4 8"``."""
        return cls.from_word(text.replace(",", " ").split())

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.word)

    def __call__(self, j: int) -> int:
        return self.word[j - 1]

    def extended(self, j: int) -> int:
        """The extension pi~ with pi~(0)=0 and pi~(n+1)=n+1."""
        if j == 0:
            return 0
        if j == self.n + 1:
            return self.n + 1
        return self.word[j - 1]

    def inverse(self) -> "Perm":
        inv = [0] * self.n
        for j, i in enumerate(self.word, start=1):
            inv[i - 1] = j
        return Perm(tuple(inv))

    def is_identity(self) -> bool:
        return all(self.word[j] == j + 1 for j in range(self.n))

    def __str__(self) -> str:
        return " ".join(str(w) for w in self.word)


@dataclass(frozen=True)
class IndexClassification:
    """Partition of the row indices {1..n+1} of M(pi).

    Row ``i <= n`` is classified by the point ``(pi^-1(i), i)`` on the graph
    of the permutation; row ``n+1`` is the distinguished last index.
    """

    n: int
    peaks: frozenset[int]
    valleys: frozenset[int]
    slopes: frozenset[int]
    ladders: frozenset[int]

    @property
    def last(self) -> frozenset[int]:
        return frozenset({self.n + 1})

    @property
    def p(self) -> int:
        return len(self.peaks)

    @property
    def v(self) -> int:
        return len(self.valleys)

    @property
    def s(self) -> int:
        return len(self.slopes)

    @property
    def ell(self) -> int:
        return len(self.ladders)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "peaks": sorted(self.peaks),
            "valleys": sorted(self.valleys),
            "slopes": sorted(self.slopes),
            "ladders": sorted(self.ladders),
            "last": self.n + 1,
            "degree": self.n - self.ell,
        }


def _point_kind(pi: Perm, j: int) -> str:
    """Classify the point (j, pi(j)): peak / valley / ladder / slope."""
    lo, hi = pi.extended(j - 1), pi.extended(j + 1)
    v = pi(j)
    if v < min(lo, hi):
        return "peak"
    if v > max(lo, hi):
        return "valley"
    if v - 1 in (lo, hi):
        return "ladder"
    return "slope"


def classify(pi: Perm) -> IndexClassification:
    """Peak/valley/slope/ladder classification of the row indices of M(pi).

    >>> c = classify(Perm.from_string("1 2 7 6 5 3 4 8"))
    >>> sorted(c.peaks), sorted(c.valleys), sorted(c.slopes), sorted(c.ladders)
    ([3], [7], [5, 8], [1, 2, 4, 6])
    """
    kinds: dict[str, set[int]] = {"peak": set(), "valley": set(), "ladder": set(), "slope": set()}
    for j in range(1, pi.n + 1):
        kinds[_point_kind(pi, j)].add(pi(j))
    return IndexClassification(
        n=pi.n,
        peaks=frozenset(kinds["peak"]),
        valleys=frozenset(kinds["valley"]),
        slopes=frozenset(kinds["slope"]),
        ladders=frozenset(kinds["ladder"]),
    )


def degree(pi: Perm) -> int:
    """d(pi) = n - #ladder indices.  Zero iff pi is the identity.

    >>> degree(Perm.identity(5)), degree(Perm.from_word((2, 1)))
    (0, 2)
    """
    return pi.n - classify(pi).ell


def degree_temporary(pi: Perm) -> int:
    """Preliminary degree variant: counts indices not adjacent to a ladder step.

    An index i is a ladder index here when |pi(i)-pi(i-1)| = 1 or
    |pi(i)-pi(i+1)| = 1, with the extension supplying the boundary values.
    Kept only for comparison; `degree` is the operative definition.
    """
    n = pi.n
    ladder = 0
    for i in range(1, n + 1):
        if abs(pi(i) - pi.extended(i - 1)) == 1 or abs(pi(i) - pi.extended(i + 1)) == 1:
            ladder += 1
    return n - ladder


def build_matrix(pi: Perm) -> np.ndarray:
    """The (n+1) x (n+1) momentum matrix M(pi) with entries in {-1,0,+1}.

    Column j carries +1 on rows pi~(j-1) < i <= pi~(j) and -1 on rows
    pi~(j) < i <= pi~(j-1); the primed momenta are p' = M p.

    >>> build_matrix(Perm.identity(2))
    array([[1, 0, 0],
           [0, 1, 0],
           [0, 0, 1]])
    """
    n = pi.n
    M = np.zeros((n + 1, n + 1), dtype=np.int64)
    for j in range(1, n + 2):
        a, b = pi.extended(j - 1), pi.extended(j)
        if a < b:
            M[a: b, j - 1] = 1       # rows a+1..b (0-indexed a..b-1)
        else:
            M[b: a, j - 1] = -1      # rows b+1..a
    return M


def apply_matrix(M: np.ndarray, momenta: np.ndarray) -> np.ndarray:
    """p' = M p for a stack of n+1 momenta (scalars or d-vectors)."""
    momenta = np.asarray(momenta)
    if momenta.shape[0] != M.shape[1]:
        raise ValueError(f"expected {M.shape[1]} momenta, got {momenta.shape[0]}")
    return np.tensordot(M, momenta, axes=(1, 0))


def kirchhoff_residuals(pi: Perm, p: np.ndarray, p_prime: np.ndarray) -> np.ndarray:
    """Residuals of the n+1 delta-function constraints tying p to p'.

    Built directly from the pairing rule (momentum transfer at vertex j of
    the unprimed line equals the transfer at vertex pi(j) of the primed
    line, plus equality of the final momenta), independently of M(pi).
    Returns an array of n+1 residual momenta; all must vanish when
    ``p_prime = M(pi) p``.
    """
    p = np.asarray(p, dtype=float)
    pp = np.asarray(p_prime, dtype=float)
    n = pi.n
    res = []
    for j in range(1, n + 1):
        k = pi(j)
        res.append((p[j] - p[j - 1]) - (pp[k] - pp[k - 1]))
    res.append(p[n] - pp[n])
    return np.asarray(res)


def _batched_int_dets(mats: np.ndarray) -> np.ndarray:
    """Rounded determinants of a stack of small integer matrices."""
    dets = np.linalg.det(mats.astype(float))
    rounded = np.rint(dets)
    if not np.allclose(dets, rounded, atol=1e-6):
        raise ArithmeticError("determinant not numerically integral")
    return rounded.astype(np.int64)


def check_unimodular(M: np.ndarray, max_minor: int | None = None,
                     samples: int = 10_000, seed: int = 0,
                     exhaustive_limit: int = 7) -> bool:
    """True iff all checked square subdeterminants of M lie in {-1,0,+1}.

    Exhaustive over all minors up to size ``max_minor`` when the matrix is
    small (side <= ``exhaustive_limit``); otherwise ``samples`` random
    square submatrices per size are tested.
    """
    M = np.asarray(M)
    side = M.shape[0]
    if max_minor is None:
        max_minor = side
    if max_minor > side:
        raise ValueError("max_minor exceeds matrix size")
    rng = np.random.default_rng(seed)
    for k in range(1, max_minor + 1):
        if side <= exhaustive_limit or math.comb(side, k) ** 2 <= samples:
            rows_iter = list(itertools.combinations(range(side), k))
            subs = np.array([M[np.ix_(r, c)] for r in rows_iter for c in rows_iter])
        else:
            rows = np.array([rng.choice(side, size=k, replace=False) for _ in range(samples)])
            cols = np.array([rng.choice(side, size=k, replace=False) for _ in range(samples)])
            subs = M[rows[:, :, None], cols[:, None, :]]
        if np.abs(_batched_int_dets(subs)).max() > 1:
            return False
    return True


def enumerate_by_degree(n: int) -> dict[int, int]:
    """Histogram {degree: count} over all of S_n.  Exhaustive; n <= 9.

    >>> enumerate_by_degree(3)
    {0: 1, 2: 3, 3: 2}
    """
    if n > 9:
        raise ValueError("exhaustive enumeration capped at n = 9")
    hist: dict[int, int] = {}
    for word in itertools.permutations(range(1, n + 1)):
        d = degree(Perm(word))
        hist[d] = hist.get(d, 0) + 1
    return dict(sorted(hist.items()))


def counting_constant(hist: dict[int, int], n: int) -> float:
    """Smallest C with count(d) <= (C n)^d for every degree d >= 1."""
    cs = [count ** (1.0 / d) / n for d, count in hist.items() if d >= 1]
    return max(cs, default=0.0)


def set_partitions(items: list):
    """Yield all partitions of ``items`` as lists of blocks (lists)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def connected_graph_coefficients(m: int) -> list[int]:
    """Coefficients c(1..m) of the distinct-label expansion.

    The sum over pairwise-distinct labels of prod_j exp(i q_j a_j) equals
    the sum over set partitions of prod_blocks c(|B|) delta(sum_B q).  The
    c(k) are computed by inclusion-exclusion on the partition lattice:
    with A the alphabet size, the falling factorial A(A-1)...(A-k+1) must
    equal sum over partitions of prod c(|B|) * A^{#blocks}, which
    determines c(k) recursively from the linear coefficient.

    >>> connected_graph_coefficients(4)
    [1, -1, 2, -6]
    """
    if not 1 <= m <= 8:
        raise ValueError("m must be between 1 and 8")
    c: dict[int, int] = {}
    for k in range(1, m + 1):
        # falling factorial A^(k) as integer polynomial coefficients in A
        ff = [1]
        for r in range(k):
            # multiply by (A - r)
            ff = [0] + ff
            ff = [ff[i] - (r * ff[i + 1] if i + 1 < len(ff) else 0) for i in range(len(ff))]
        rhs = ff[:]  # rhs := A^(k) - sum over partitions with >= 2 blocks
        for part in set_partitions(list(range(k))):
            if len(part) < 2:
                continue
            coeff = 1
            for block in part:
                coeff *= c[len(block)]
            deg = len(part)
            while len(rhs) <= deg:
                rhs.append(0)
            rhs[deg] -= coeff
        # remaining polynomial must be exactly c(k) * A
        if rhs[0] != 0 or any(x != 0 for x in rhs[2:]):
            raise ArithmeticError("partition-lattice inversion produced a non-linear remainder")
        c[k] = rhs[1]
    return [c[k] for k in range(1, m + 1)]


def _pairings(items: tuple[int, ...]):
    """All perfect matchings of an even-sized tuple."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for sub in _pairings(remaining):
            yield ((first, partner),) + sub


@dataclass(frozen=True)
class LumpBreakup:
    permutation: Perm
    degree: int
    bound: float          # s(B)/2 from the lump sizes
    searched: int = field(default=0)


def lump_breakup(blocks: list[list[int]]) -> LumpBreakup:
    """Break a lump partition into the pairing of maximal degree.

    ``blocks`` must partition {1..n} (n = total size <= 10) into blocks of
    even size.  Each block is split into pairs in every possible way; every
    complete matching is read as an involution of {1..n} and the one with
    the largest degree is returned, together with the lower bound
    s(B)/2 = (1/4) * sum of block sizes >= 4 that the search must meet.
    """
    flat = sorted(x for b in blocks for x in b)
    n = len(flat)
    if flat != list(range(1, n + 1)):
        raise ValueError("blocks must partition {1..n}")
    if n > 10:
        raise ValueError("exhaustive pairing search capped at n = 10")
    for b in blocks:
        if len(b) % 2 != 0:
            raise ValueError(f"odd block size {len(b)}: no pairing-compatible break-up")
    s_b = 0.5 * sum(len(b) for b in blocks if len(b) >= 4)
    best: tuple[int, Perm] | None = None
    searched = 0
    for combo in itertools.product(*(_pairings(tuple(sorted(b))) for b in blocks)):
        word = list(range(1, n + 1))
        for pairs in combo:
            for a, b in pairs:
                word[a - 1], word[b - 1] = b, a
        perm = Perm(tuple(word))
        searched += 1
        d = degree(perm)
        if best is None or d > best[0]:
            best = (d, perm)
    assert best is not None
    return LumpBreakup(permutation=best[1], degree=best[0], bound=0.5 * s_b, searched=searched)
