"""Exact combinatorics: permutations, partitions, irrep dimensions, Haar moments.

Everything here is integer arithmetic (Python ints, so arbitrary precision).
Permutations are 0-based one-line tuples; composition is (p o q)(x) = p(q(x))
throughout the package.  Partitions are weakly decreasing tuples of positive
integers, with the empty tuple as the empty partition.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial
from typing import Iterable, Sequence

Permutation = tuple[int, ...]
Partition = tuple[int, ...]


# ---------------------------------------------------------------------------
# permutations
# ---------------------------------------------------------------------------

def is_permutation(word: Sequence[int]) -> bool:
    """True if ``word`` is a bijection of {0, ..., len(word)-1}."""
    return sorted(word) == list(range(len(word)))


def identity_perm(k: int) -> Permutation:
    return tuple(range(k))


def compose_perms(p: Sequence[int], q: Sequence[int]) -> Permutation:
    """(p o q)(x) = p(q(x))."""
    if len(p) != len(q):
        raise ValueError("permutations act on different sets")
    return tuple(p[q[x]] for x in range(len(q)))


def inverse_perm(p: Sequence[int]) -> Permutation:
    inv = [0] * len(p)
    for x, px in enumerate(p):
        inv[px] = x
    return tuple(inv)


def all_perms(k: int) -> list[Permutation]:
    return [tuple(p) for p in itertools.permutations(range(k))]


def cycle_type(p: Sequence[int]) -> Partition:
    """Cycle lengths of ``p`` as a partition of len(p)."""
    if not is_permutation(p):
        raise ValueError(f"not a permutation: {p!r}")
    seen = [False] * len(p)
    lengths = []
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = p[x]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def cycle_count(p: Sequence[int]) -> int:
    return len(cycle_type(p))


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def as_partition(parts: Iterable[int]) -> Partition:
    """Normalise to a partition: drop trailing zeros, validate monotonicity."""
    t = tuple(int(x) for x in parts)
    while t and t[-1] == 0:
        t = t[:-1]
    if any(x <= 0 for x in t):
        raise ValueError(f"partition parts must be positive: {t}")
    if any(t[i] < t[i + 1] for i in range(len(t) - 1)):
        raise ValueError(f"partition parts must be weakly decreasing: {t}")
    return t


def partitions_of(m: int, max_rows: int) -> list[Partition]:
    """All partitions of ``m`` with at most ``max_rows`` rows.

    Ordered lexicographically decreasing, e.g. partitions_of(3, 2) is
    [(3,), (2, 1)].  partitions_of(0, r) is [()].
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if max_rows < 1:
        raise ValueError("max_rows must be positive")

    out: list[Partition] = []

    def rec(remaining: int, largest: int, prefix: tuple[int, ...]) -> None:
        if remaining == 0:
            out.append(prefix)
            return
        if len(prefix) == max_rows:
            return
        for part in range(min(largest, remaining), 0, -1):
            rec(remaining - part, part, prefix + (part,))

    rec(m, m, ())
    return out


def hook_lengths(lam: Partition) -> list[int]:
    """Hook lengths of every cell of the Young diagram, row by row."""
    lam = as_partition(lam)
    cols = [0] * (lam[0] if lam else 0)
    for row_len in lam:
        for j in range(row_len):
            cols[j] += 1
    hooks = []
    for i, row_len in enumerate(lam):
        for j in range(row_len):
            hooks.append((row_len - j) + (cols[j] - i) - 1)
    return hooks


def sym_group_irrep_dim(lam: Partition) -> int:
    """Dimension of the S_m irrep labelled by ``lam`` (hook length formula)."""
    lam = as_partition(lam)
    m = sum(lam)
    prod = 1
    for h in hook_lengths(lam):
        prod *= h
    num = factorial(m)
    if num % prod:
        raise ArithmeticError("hook product does not divide m!")
    return num // prod


def su_irrep_dim(lam: Sequence[int], d: int) -> int:
    """Dimension of the SU(d) irrep with highest weight ``lam``.

    ``lam`` may carry trailing zeros (as produced by :func:`mixed_to_standard`);
    its positive parts must fit in ``d`` rows.  Computed by the hook content
    formula:  prod over cells (d + j - i) / hook(i, j).
    """
    lam = as_partition(lam)
    if len(lam) > d:
        raise ValueError(f"partition {lam} has more than d={d} rows")
    num = 1
    for i, row_len in enumerate(lam):
        for j in range(row_len):
            num *= d + j - i
    den = 1
    for h in hook_lengths(lam):
        den *= h
    if num % den:
        raise ArithmeticError("content product does not divide hook product")
    return num // den


# ---------------------------------------------------------------------------
# mixed (walled) irrep labels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixedIrrepLabel:
    """A pair of partitions labelling an irrep of the mixed unitary action.

    ``left`` grows with the ordinary tensor factors, ``right`` with the
    conjugated ones; validity requires rows(left) + rows(right) <= local_dim.
    """

    left: Partition
    right: Partition
    local_dim: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", as_partition(self.left))
        object.__setattr__(self, "right", as_partition(self.right))
        if self.local_dim < 2:
            raise ValueError("local_dim must be at least 2")
        if len(self.left) + len(self.right) > self.local_dim:
            raise ValueError(
                f"row cap violated: {len(self.left)} + {len(self.right)} rows "
                f"exceeds d={self.local_dim}"
            )


def mixed_to_standard(label: MixedIrrepLabel) -> tuple[int, ...]:
    """Unify a mixed label into a single SU(d) highest weight of length d.

    Entry i (1-based) is lamR_1 + lamL_i - lamR_{d+1-i}, absent parts read
    as zero: the left diagram is concatenated with the complement of the
    right diagram in its bounding rectangle.
    """
    d = label.local_dim

    def part(p: Partition, i: int) -> int:  # 1-based, 0 outside
        return p[i - 1] if 1 <= i <= len(p) else 0

    r1 = part(label.right, 1)
    lam = tuple(r1 + part(label.left, i) - part(label.right, d + 1 - i) for i in range(1, d + 1))
    if any(lam[i] < lam[i + 1] for i in range(d - 1)) or (lam and lam[-1] < 0):
        raise AssertionError(f"unified weight not weakly decreasing: {lam}")
    return lam


# ---------------------------------------------------------------------------
# Haar moments of |tr U|^2
# ---------------------------------------------------------------------------

def f_coeff(m: int, d: int) -> int:
    """The 2m-th Haar moment of |tr U| over U(d), an exact integer.

    Equals the number of permutations of S_m whose longest increasing
    subsequence has length at most d, i.e. the sum of squared S_m irrep
    dimensions over partitions with at most d rows.  For d >= m this is m!,
    and for d = 2 it is the m-th Catalan number.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if d < 1:
        raise ValueError("d must be positive")
    return sum(sym_group_irrep_dim(lam) ** 2 for lam in partitions_of(m, d))


def catalan(m: int) -> int:
    """C_m = binom(2m+1, m) / (2m+1), exactly."""
    if m < 0:
        raise ValueError("m must be non-negative")
    num = comb(2 * m + 1, m)
    if num % (2 * m + 1):
        raise ArithmeticError("Catalan division not exact")
    return num // (2 * m + 1)
