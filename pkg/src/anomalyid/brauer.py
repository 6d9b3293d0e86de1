"""The walled Brauer diagram algebra and its operator realisation.

A diagram for the algebra A_{n,m}^d has n + m dots on a top row and the
same on a bottom row, with a wall after position n.  Every dot is paired
with exactly one other dot; a top-bottom strand must stay on its side of
the wall, while a same-row arc must cross it.  Multiplication stacks one
diagram on top of another and removes closed middle loops, each worth a
factor d:

    A1 A2 = d^l A3.

Transpositions map to SWAP operators, the contraction maps to the
vectorised identity |1>><<1|, and every diagram operator commutes with the
mixed unitary action U^(x n) (x) conj(U)^(x m).  The Bratteli lattice of
mixed irrep labels along A_{0,0} -> A_{n,0} -> A_{n,m} supplies path counts
whose dimension-weighted sum recovers d^(n+m).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .combinatorics import MixedIrrepLabel, Partition, mixed_to_standard, su_irrep_dim
from .operators import check_dim

Endpoint = tuple[str, int]  # ("top" | "bottom", 1-based position)


# ---------------------------------------------------------------------------
# diagrams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WalledBrauerDiagram:
    """A perfect matching of the 2(n_left + n_right) dots, wall rules enforced.

    Endpoints are encoded internally as integers: top positions p = 1..L map
    to p - 1, bottom positions to L + p - 1, with L = n_left + n_right.
    ``pairs`` is the canonical sorted tuple of sorted endpoint pairs, so
    structural equality and hashing work out of the box.
    """

    n_left: int
    n_right: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.n_left < 0 or self.n_right < 0:
            raise ValueError("n_left and n_right must be non-negative")
        L = self.total
        canon = tuple(sorted(tuple(sorted(p)) for p in self.pairs))
        object.__setattr__(self, "pairs", canon)
        seen = [e for p in canon for e in p]
        if sorted(seen) != list(range(2 * L)):
            raise ValueError("pairs are not a perfect matching of the endpoints")
        for e, f in canon:
            same_row = (e < L) == (f < L)
            crosses = self._is_left(e) != self._is_left(f)
            if same_row and not crosses:
                raise ValueError(
                    f"same-row pair {self._decode(e)}--{self._decode(f)} must cross the wall"
                )
            if not same_row and crosses:
                raise ValueError(
                    f"top-bottom pair {self._decode(e)}--{self._decode(f)} may not cross the wall"
                )

    @property
    def total(self) -> int:
        return self.n_left + self.n_right

    def _is_left(self, e: int) -> bool:
        return (e % self.total) < self.n_left

    def _decode(self, e: int) -> Endpoint:
        L = self.total
        return ("top", e + 1) if e < L else ("bottom", e - L + 1)

    def match_array(self) -> list[int]:
        L = self.total
        match = [-1] * (2 * L)
        for e, f in self.pairs:
            match[e] = f
            match[f] = e
        return match

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_endpoints(
        cls, n_left: int, n_right: int, pairs: Iterable[tuple[Endpoint, Endpoint]]
    ) -> "WalledBrauerDiagram":
        L = n_left + n_right
        enc = []
        for a, b in pairs:
            enc.append((_encode(a, L), _encode(b, L)))
        return cls(n_left=n_left, n_right=n_right, pairs=tuple(enc))

    def to_endpoint_pairs(self) -> list[tuple[Endpoint, Endpoint]]:
        return [(self._decode(e), self._decode(f)) for e, f in self.pairs]

    # -- JSON wire format ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n_left": self.n_left,
            "n_right": self.n_right,
            "pairs": [[list(a), list(b)] for a, b in self.to_endpoint_pairs()],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "WalledBrauerDiagram":
        try:
            n_left = int(data["n_left"])
            n_right = int(data["n_right"])
            raw_pairs = data["pairs"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed diagram JSON: {exc}") from exc
        pairs = []
        for raw in raw_pairs:
            try:
                (row_a, pos_a), (row_b, pos_b) = raw
                pairs.append(((str(row_a), int(pos_a)), (str(row_b), int(pos_b))))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"malformed diagram pair {raw!r}: {exc}") from exc
        return cls.from_endpoints(n_left, n_right, pairs)


def _encode(endpoint: Endpoint, L: int) -> int:
    row, pos = endpoint
    if row not in ("top", "bottom"):
        raise ValueError(f"endpoint row must be 'top' or 'bottom', got {row!r}")
    if not 1 <= pos <= L:
        raise ValueError(f"endpoint position {pos} outside 1..{L}")
    return pos - 1 if row == "top" else L + pos - 1


@dataclass(frozen=True)
class ScaledDiagram:
    """A diagram together with the loop count collected in a composition."""

    diagram: WalledBrauerDiagram
    loop_count: int


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def identity_diagram(n: int, m: int) -> WalledBrauerDiagram:
    L = n + m
    return WalledBrauerDiagram(n, m, tuple((p, L + p) for p in range(L)))


def transposition(i: int, n: int, m: int) -> WalledBrauerDiagram:
    """s_i, swapping columns i and i+1; i = n is rejected (it would cross the wall)."""
    L = n + m
    valid = (1 <= i <= n - 1) or (n + 1 <= i <= n + m - 1)
    if not valid:
        raise ValueError(f"transposition index {i} invalid for (n, m) = ({n}, {m})")
    pairs = [(p, L + p) for p in range(L) if p not in (i - 1, i)]
    pairs += [(i - 1, L + i), (i, L + i - 1)]
    return WalledBrauerDiagram(n, m, tuple(pairs))


def contraction(n: int, m: int) -> WalledBrauerDiagram:
    """e_n, joining columns n and n+1 across the wall on both rows."""
    if n < 1 or m < 1:
        raise ValueError("contraction needs at least one column on each side")
    L = n + m
    pairs = [(p, L + p) for p in range(L) if p not in (n - 1, n)]
    pairs += [(n - 1, n), (L + n - 1, L + n)]
    return WalledBrauerDiagram(n, m, tuple(pairs))


def generator(kind: str, n: int, m: int, i: int | None = None) -> WalledBrauerDiagram:
    """Dispatch on "left-transposition" | "contraction" | "right-transposition"."""
    if kind == "contraction":
        return contraction(n, m)
    if i is None:
        raise ValueError(f"generator kind {kind!r} needs an index")
    if kind == "left-transposition":
        if not 1 <= i <= n - 1:
            raise ValueError(f"left transposition index {i} outside 1..{n - 1}")
        return transposition(i, n, m)
    if kind == "right-transposition":
        if not n + 1 <= i <= n + m - 1:
            raise ValueError(f"right transposition index {i} outside {n + 1}..{n + m - 1}")
        return transposition(i, n, m)
    raise ValueError(f"unknown generator kind {kind!r}")


# ---------------------------------------------------------------------------
# composition with loop counting
# ---------------------------------------------------------------------------

def compose(a: WalledBrauerDiagram, b: WalledBrauerDiagram) -> ScaledDiagram:
    """Stack ``a`` on top of ``b`` (a's bottom glued to b's top): a b = d^l c.

    Returns the traced-through diagram c and the number l of closed loops
    formed in the middle row.
    """
    if (a.n_left, a.n_right) != (b.n_left, b.n_right):
        raise ValueError(
            f"shape mismatch: ({a.n_left},{a.n_right}) vs ({b.n_left},{b.n_right})"
        )
    L = a.total
    am, bm = a.match_array(), b.match_array()
    visited_mid = [False] * L
    assigned = [False] * (2 * L)
    result_pairs = []

    def trace(diagram: str, x: int) -> int:
        """Follow a strand to its external end; returns a result endpoint."""
        d_, cur = diagram, x
        while True:
            y = (am if d_ == "a" else bm)[cur]
            if d_ == "a":
                if y < L:
                    return y  # result top
                mid = y - L
                visited_mid[mid] = True
                d_, cur = "b", mid
            else:
                if y >= L:
                    return y  # result bottom
                visited_mid[y] = True
                d_, cur = "a", L + y

    for e in range(2 * L):
        if assigned[e]:
            continue
        end = trace("a", e) if e < L else trace("b", e)
        assigned[e] = assigned[end] = True
        result_pairs.append((e, end))

    loops = 0
    for p0 in range(L):
        if visited_mid[p0]:
            continue
        loops += 1
        cur = p0
        while not visited_mid[cur]:
            visited_mid[cur] = True
            via_a = am[L + cur]
            if via_a < L:
                raise AssertionError("loop strand escaped through the top")
            nxt = via_a - L
            visited_mid[nxt] = True
            via_b = bm[nxt]
            if via_b >= L:
                raise AssertionError("loop strand escaped through the bottom")
            cur = via_b

    diagram = WalledBrauerDiagram(a.n_left, a.n_right, tuple(result_pairs))
    return ScaledDiagram(diagram=diagram, loop_count=loops)


# ---------------------------------------------------------------------------
# operator realisation
# ---------------------------------------------------------------------------

def diagram_to_operator(a: WalledBrauerDiagram, d: int) -> np.ndarray:
    """The matrix on (C^d)^(x (n+m)) whose entries are the diagram's deltas.

    Top endpoints index rows, bottom endpoints index columns; every pair
    forces its two endpoint indices equal.  A transposition gives the SWAP
    matrix, the contraction gives sum_ij |ii><jj|.
    """
    L = a.total
    dim = d**L
    check_dim(dim, "diagram operator")
    if L == 0:
        return np.eye(1)
    # one free index per pair; endpoint digits follow their pair's index
    pair_of = {}
    for q, (e, f) in enumerate(a.pairs):
        pair_of[e] = q
        pair_of[f] = q
    values = np.indices((d,) * L).reshape(L, -1)  # pair index q -> its digit row
    rows = np.zeros(values.shape[1], dtype=np.int64)
    cols = np.zeros(values.shape[1], dtype=np.int64)
    for pos in range(L):
        rows = rows * d + values[pair_of[pos]]
        cols = cols * d + values[pair_of[L + pos]]
    mat = np.zeros((dim, dim))
    mat[rows, cols] = 1.0
    return mat


def mixed_unitary_action(u: np.ndarray, n: int, m: int) -> np.ndarray:
    """U^(x n) (x) conj(U)^(x m)."""
    out = np.eye(1, dtype=complex)
    for _ in range(n):
        out = np.kron(out, u)
    for _ in range(m):
        out = np.kron(out, u.conj())
    return out


def check_commutant(
    a: WalledBrauerDiagram, d: int, trials: int, rng: np.random.Generator
) -> float:
    """max over Haar samples of || [op(a), U^(x n) (x) conj(U)^(x m)] ||_max."""
    from .operators import haar_unitary

    op = diagram_to_operator(a, d)
    worst = 0.0
    for _ in range(trials):
        u = haar_unitary(d, rng)
        w = mixed_unitary_action(u, a.n_left, a.n_right)
        worst = max(worst, float(np.abs(op @ w - w @ op).max()))
    return worst


def homomorphism_check(a: WalledBrauerDiagram, b: WalledBrauerDiagram, d: int) -> float:
    """|| op(a) op(b) - d^l op(c) ||_max with (c, l) = compose(a, b)."""
    scaled = compose(a, b)
    lhs = diagram_to_operator(a, d) @ diagram_to_operator(b, d)
    rhs = float(d) ** scaled.loop_count * diagram_to_operator(scaled.diagram, d)
    return float(np.abs(lhs - rhs).max())


def check_generator_relations(n: int, m: int, d: int) -> dict[str, float]:
    """Residuals of every defining relation, evaluated as operator identities.

    Includes the symmetric-group relations on each side of the wall, the
    pseudo-idempotent relation e^2 = d e, the distant commutations, the
    absorption relations e s_{n +- 1} e = e, and the two mixed relations
    coupling the sides.  All residuals should vanish to machine precision.
    """
    ops: dict[int, np.ndarray] = {}
    left = list(range(1, n))
    right = list(range(n + 1, n + m))
    for i in left + right:
        ops[i] = diagram_to_operator(transposition(i, n, m), d)
    e = diagram_to_operator(contraction(n, m), d) if (n >= 1 and m >= 1) else None
    eye = np.eye(d ** (n + m))
    res: dict[str, float] = {}

    def record(name: str, lhs: np.ndarray, rhs: np.ndarray) -> None:
        res[name] = float(np.abs(lhs - rhs).max())

    for i in left + right:
        record(f"s{i}^2 = 1", ops[i] @ ops[i], eye)
    for i, j in itertools.combinations(left + right, 2):
        if abs(i - j) > 1:
            record(f"s{i} s{j} = s{j} s{i}", ops[i] @ ops[j], ops[j] @ ops[i])
    for pair in (left, right):
        for i in pair:
            if i + 1 in pair:
                record(
                    f"braid s{i} s{i + 1}",
                    ops[i] @ ops[i + 1] @ ops[i],
                    ops[i + 1] @ ops[i] @ ops[i + 1],
                )
    if e is not None:
        record("e^2 = d e", e @ e, d * e)
        for i in left + right:
            if i not in (n - 1, n + 1):
                record(f"e s{i} = s{i} e", e @ ops[i], ops[i] @ e)
        for i in (n - 1, n + 1):
            if i in ops:
                record(f"e s{i} e = e", e @ ops[i] @ e, e)
        if n >= 2 and m >= 2:
            sl, sr = ops[n - 1], ops[n + 1]
            record(
                "e sr sl e sl = e sr sl e sr",
                e @ sr @ sl @ e @ sl,
                e @ sr @ sl @ e @ sr,
            )
            record(
                "sl e sr sl e = sr e sr sl e",
                sl @ e @ sr @ sl @ e,
                sr @ e @ sr @ sl @ e,
            )
    return res


# ---------------------------------------------------------------------------
# enumeration (used for faithfulness and property tests)
# ---------------------------------------------------------------------------

def enumerate_diagrams(n: int, m: int) -> list[WalledBrauerDiagram]:
    """All diagrams of A_{n,m}; there are (n + m)! of them."""
    L = n + m
    out = []
    lefts = list(range(n))
    rights = list(range(n, L))
    for j in range(min(n, m) + 1):
        for top_l in itertools.combinations(lefts, j):
            for top_r in itertools.permutations(rights, j):
                for bot_l in itertools.combinations(lefts, j):
                    for bot_r in itertools.permutations(rights, j):
                        arcs = [(a, b) for a, b in zip(top_l, top_r)]
                        arcs += [(L + a, L + b) for a, b in zip(bot_l, bot_r)]
                        rem_tl = [p for p in lefts if p not in top_l]
                        rem_bl = [p for p in lefts if p not in bot_l]
                        rem_tr = [p for p in rights if p not in top_r]
                        rem_br = [p for p in rights if p not in bot_r]
                        for perm_l in itertools.permutations(rem_bl):
                            for perm_r in itertools.permutations(rem_br):
                                verts = [(t, L + b) for t, b in zip(rem_tl, perm_l)]
                                verts += [(t, L + b) for t, b in zip(rem_tr, perm_r)]
                                out.append(
                                    WalledBrauerDiagram(n, m, tuple(arcs + verts))
                                )
    return out


def random_diagram(n: int, m: int, rng: np.random.Generator) -> WalledBrauerDiagram:
    """Uniformly random diagram (by enumeration; intended for small n, m)."""
    diagrams = enumerate_diagrams(n, m)
    return diagrams[int(rng.integers(len(diagrams)))]


# ---------------------------------------------------------------------------
# Bratteli lattice of mixed irrep labels
# ---------------------------------------------------------------------------

def _add_one_box(lam: Partition) -> list[Partition]:
    out = []
    for i in range(len(lam) + 1):
        above = lam[i - 1] if i > 0 else None
        current = lam[i] if i < len(lam) else 0
        if above is None or above > current:
            new = list(lam)
            if i < len(lam):
                new[i] += 1
            else:
                new.append(1)
            out.append(tuple(new))
    return out


def _remove_one_box(lam: Partition) -> list[Partition]:
    out = []
    for i in range(len(lam)):
        below = lam[i + 1] if i + 1 < len(lam) else 0
        if lam[i] > below:
            new = list(lam)
            new[i] -= 1
            if new[i] == 0:
                new.pop()
            out.append(tuple(new))
    return out


@dataclass
class BrattelLattice:
    """Levels of mixed irrep labels along A_{0,0} -> A_{n,0} -> A_{n,m}.

    Level t maps each reachable label to its path count; the path count of a
    vertex is the sum over its parents.  At the final level the path counts
    are the algebra irrep dimensions, so

        sum_labels path_count * su_dim(unified label) = d^(n + m).
    """

    n: int
    m: int
    d: int
    levels: list[dict[MixedIrrepLabel, int]]

    @property
    def final_level(self) -> dict[MixedIrrepLabel, int]:
        return self.levels[-1]

    def dimension_sum(self) -> int:
        return sum(
            count * su_irrep_dim(mixed_to_standard(label), self.d)
            for label, count in self.final_level.items()
        )


def bratteli_lattice(n: int, m: int, d: int) -> BrattelLattice:
    """Grow the lattice: n left-box additions, then m right steps.

    A right step either adds one box to the right partition or removes one
    box from the left partition; every vertex obeys the row cap
    rows(left) + rows(right) <= d.
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    if d < 2:
        raise ValueError("d must be at least 2")
    levels = [{MixedIrrepLabel((), (), d): 1}]
    for _ in range(n):
        nxt: dict[MixedIrrepLabel, int] = {}
        for label, count in levels[-1].items():
            for new_left in _add_one_box(label.left):
                if len(new_left) + len(label.right) > d:
                    continue
                child = MixedIrrepLabel(new_left, label.right, d)
                nxt[child] = nxt.get(child, 0) + count
        levels.append(nxt)
    for _ in range(m):
        nxt = {}
        for label, count in levels[-1].items():
            for new_right in _add_one_box(label.right):
                if len(label.left) + len(new_right) > d:
                    continue
                child = MixedIrrepLabel(label.left, new_right, d)
                nxt[child] = nxt.get(child, 0) + count
            for new_left in _remove_one_box(label.left):
                child = MixedIrrepLabel(new_left, label.right, d)
                nxt[child] = nxt.get(child, 0) + count
        levels.append(nxt)
    return BrattelLattice(n=n, m=m, d=d, levels=levels)
