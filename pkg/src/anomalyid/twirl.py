"""Weingarten calculus and the Haar-averaged hypothesis operators.

The k-anomaly hypothesis for pattern r is the effective Choi matrix

    F_r = |1>><<1|^(n-k) on the healthy devices  (x)  C^(k) on the devices in r,

where |1>><<1| is the (unnormalised, trace d) Choi matrix of the identity
channel and C^(k) is the Haar average of k copies of an unknown unitary's
Choi matrix.  C^(k) is evaluated by the Weingarten expansion

    C^(k) = sum_{sigma, pi in S_k} Wg(sigma pi^-1, d) U(sigma)_in (x) U(pi)_out,

with Wg the (pseudo-)inverse of the symmetric-group Gram matrix
G[sigma, pi] = d^{#cycles(sigma pi^-1)}.  :func:`choi_average` produces the
(all-in, all-out) factor ordering; :func:`hypothesis_choi` reorders factors
explicitly into the device-major layout of :mod:`anomalyid.operators`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .combinatorics import (
    Partition,
    Permutation,
    all_perms,
    compose_perms,
    cycle_type,
    inverse_perm,
)
from .operators import (
    SubsystemLayout,
    check_dim,
    haar_unitaries,
    kron_all,
    reorder_subsystems,
)

WEINGARTEN_CLASS_TOL = 1e-9


# ---------------------------------------------------------------------------
# anomaly patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class AnomalyPattern:
    """A sorted subset of the 1-based device indices {1, ..., n}."""

    n: int
    members: tuple[int, ...]

    def __post_init__(self) -> None:
        members = tuple(sorted(int(x) for x in self.members))
        object.__setattr__(self, "members", members)
        if len(set(members)) != len(members):
            raise ValueError(f"duplicate members in {members}")
        if members and not (1 <= members[0] and members[-1] <= self.n):
            raise ValueError(f"members {members} outside 1..{self.n}")

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def complement(self) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.n + 1) if j not in self.members)


def all_patterns(n: int, k: int) -> list[AnomalyPattern]:
    """The binom(n, k) anomaly patterns, lexicographically by members."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return [AnomalyPattern(n, c) for c in itertools.combinations(range(1, n + 1), k)]


# ---------------------------------------------------------------------------
# Weingarten table
# ---------------------------------------------------------------------------

@dataclass
class WeingartenTable:
    """Wg(., d) on S_k, keyed by cycle type (Wg is a class function)."""

    k: int
    d: int
    values: dict[Partition, float]
    pseudo_inverse: bool = field(default=False)

    def __call__(self, sigma: Permutation) -> float:
        return self.values[cycle_type(sigma)]


def weingarten_table(k: int, d: int) -> WeingartenTable:
    """Invert the Gram matrix G[s, p] = d^{#cycles(s p^-1)} on S_k.

    For k <= d the Gram matrix is invertible; for k > d it is singular and
    the Moore-Penrose pseudo-inverse is used instead (flagged in the result).
    Either way the table reproduces the Haar integrals of the operators this
    package builds, which is cross-checked against Monte Carlo elsewhere.
    """
    if k < 1 or d < 1:
        raise ValueError("k and d must be positive")
    perms = all_perms(k)
    ncyc = {}
    for p in perms:
        ncyc[p] = len(cycle_type(p))
    gram = np.empty((len(perms), len(perms)))
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            gram[i, j] = float(d) ** ncyc[compose_perms(p, inverse_perm(q))]
    pseudo = k > d
    inv = np.linalg.pinv(gram) if pseudo else np.linalg.inv(gram)
    # first column (against the identity) gives Wg(p); fold into classes
    values: dict[Partition, float] = {}
    for i, p in enumerate(perms):
        ct = cycle_type(p)
        val = float(inv[i, 0])
        if ct in values and abs(values[ct] - val) > WEINGARTEN_CLASS_TOL * (1 + abs(val)):
            raise ArithmeticError(f"Weingarten table not constant on class {ct}")
        values.setdefault(ct, val)
    return WeingartenTable(k=k, d=d, values=values, pseudo_inverse=pseudo)


# ---------------------------------------------------------------------------
# permutation operators and projectors
# ---------------------------------------------------------------------------

def perm_operator(p: Permutation, d: int) -> np.ndarray:
    """The d^k-dimensional matrix sending |i_1 ... i_k> to |i_{p^-1(1)} ...>."""
    k = len(p)
    dim = d**k
    check_dim(dim, "permutation operator")
    if k == 0:
        return np.eye(1)
    cols = np.arange(dim)
    digits = np.empty((k, dim), dtype=np.int64)
    rest = cols.copy()
    for axis in range(k - 1, -1, -1):
        digits[axis] = rest % d
        rest //= d
    pinv = inverse_perm(p)
    rows = np.zeros(dim, dtype=np.int64)
    for axis in range(k):
        rows = rows * d + digits[pinv[axis]]
    mat = np.zeros((dim, dim))
    mat[rows, cols] = 1.0
    return mat


def choi_identity(d: int) -> np.ndarray:
    """|1>><<1| = sum_ij |ii><jj| on one (in, out) pair; trace d, unnormalised."""
    vec = np.eye(d).reshape(-1)  # component (i*d + a) = delta_{ia}
    return np.outer(vec, vec)


def projectors(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Pi_0 = |1>><<1| / d (rank one) and its complement Pi_1 = 1 - Pi_0."""
    if d < 2:
        raise ValueError("d must be at least 2")
    pi0 = choi_identity(d) / d
    pi1 = np.eye(d * d) - pi0
    return pi0, pi1


# ---------------------------------------------------------------------------
# averaged Choi matrices
# ---------------------------------------------------------------------------

def choi_average(k: int, d: int) -> np.ndarray:
    """The Haar average of k Choi-matrix copies, C^(k), as a real matrix.

    Factor ordering is (in_1 ... in_k, out_1 ... out_k), each factor of
    dimension d.  The trace is d^k.
    """
    if k < 1 or d < 1:
        raise ValueError("k and d must be positive")
    dim = d ** (2 * k)
    check_dim(dim, "averaged Choi matrix")
    wg = weingarten_table(k, d)
    perms = all_perms(k)
    ops = {p: perm_operator(p, d) for p in perms}
    out = np.zeros((dim, dim))
    for sigma in perms:
        # inner sum over pi at fixed sigma keeps the memory footprint at d^k
        inner = np.zeros((d**k, d**k))
        for pi in perms:
            inner += wg(compose_perms(sigma, inverse_perm(pi))) * ops[pi]
        out += np.kron(ops[sigma], inner)
    return out


def choi_two_anomalies_closed_form(d: int) -> np.ndarray:
    """C^(2) in closed form, on the same (in, in, out, out) ordering.

    (1 (x) 1 - 1 (x) P/d - P/d (x) 1 + P (x) P) / (d^2 - 1), with P the SWAP
    of the two in (resp. out) legs.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    swap = perm_operator((1, 0), d)
    eye = np.eye(d * d)
    return (
        np.kron(eye, eye)
        - np.kron(eye, swap) / d
        - np.kron(swap, eye) / d
        + np.kron(swap, swap)
    ) / (d * d - 1)


def pair_major_choi_average(k: int, d: int) -> np.ndarray:
    """C^(k) reordered to (in_1, out_1, in_2, out_2, ...) device pairs."""
    c = choi_average(k, d)
    # target slot 2j holds in_j (source j), slot 2j+1 holds out_j (source k+j)
    perm = []
    for j in range(k):
        perm.extend((j, k + j))
    return reorder_subsystems(c, (d,) * (2 * k), perm)


def choi_average_monte_carlo(
    k: int, d: int, trials: int, seed: int, batch: int = 2000
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of C^(k) with per-entry standard errors.

    Returns (mean, se) in the (all-in, all-out) ordering of
    :func:`choi_average`; ``se`` combines the real and imaginary parts,
    se^2 = Var(Re)/T + Var(Im)/T.  Used as the sampling oracle for the
    Weingarten construction.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    dim = d ** (2 * k)
    check_dim(dim, "averaged Choi matrix")
    rng = np.random.default_rng(seed)
    # |U>>^(x k) reordered from pair-major to block-major as a dim-vector
    perm = [2 * j for j in range(k)] + [2 * j + 1 for j in range(k)]
    sum_outer = np.zeros((dim, dim), dtype=complex)
    sum_sq_re = np.zeros((dim, dim))
    sum_sq_im = np.zeros((dim, dim))
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        us = haar_unitaries(d, b, rng)
        # |U>> on one pair has component (i*d + a) = U[a, i]
        vecs = np.transpose(us, (0, 2, 1)).reshape(b, d * d)
        stacked = vecs
        for _ in range(k - 1):
            stacked = np.einsum("bi,bj->bij", stacked, vecs).reshape(b, -1)
        stacked = stacked.reshape([b] + [d] * (2 * k)).transpose([0] + [1 + p for p in perm])
        v = stacked.reshape(b, dim).T  # dim x b, columns are samples
        a, im = np.ascontiguousarray(v.real), np.ascontiguousarray(v.imag)
        sum_outer += v @ v.conj().T
        # E[Re(v_i v_j*)^2] and E[Im(v_i v_j*)^2] via real Gram matrices
        a2, b2, ab = a * a, im * im, a * im
        sum_sq_re += a2 @ a2.T + 2.0 * (ab @ ab.T) + b2 @ b2.T
        sum_sq_im += b2 @ a2.T - 2.0 * (ab @ ab.T) + a2 @ b2.T
        done += b
    mean = sum_outer / trials
    var_re = np.maximum(sum_sq_re / trials - mean.real**2, 0.0)
    var_im = np.maximum(sum_sq_im / trials - mean.imag**2, 0.0)
    se = np.sqrt((var_re + var_im) / trials)
    return mean, se


# ---------------------------------------------------------------------------
# the E basis and the hypotheses
# ---------------------------------------------------------------------------

def basis_operator_E(s: AnomalyPattern, layout: SubsystemLayout) -> np.ndarray:
    """E_s: tensor product with Pi_1 on the devices in s, Pi_0 elsewhere.

    An orthogonal projector; E_s E_t = 0 for s != t, and the 2^n of them
    resolve the identity.
    """
    if s.n != layout.n_devices:
        raise ValueError(f"pattern on {s.n} devices, layout has {layout.n_devices}")
    check_dim(layout.dim, "E basis operator")
    pi0, pi1 = projectors(layout.local_dim)
    members = set(s.members)
    return kron_all([pi1 if j in members else pi0 for j in range(1, layout.n_devices + 1)])


def hypothesis_choi(r: AnomalyPattern, layout: SubsystemLayout) -> np.ndarray:
    """The effective Choi matrix F_r in the device-major layout.

    |1>><<1| sits on every device outside r and C^(|r|) is spread over the
    devices in r; trace d^n.  The tensor factors are assembled healthy-first
    and then explicitly permuted into device-major order.
    """
    if r.n != layout.n_devices:
        raise ValueError(f"pattern on {r.n} devices, layout has {layout.n_devices}")
    if r.k < 1:
        raise ValueError("hypothesis needs at least one anomalous device")
    d = layout.local_dim
    n = layout.n_devices
    check_dim(layout.dim, "hypothesis Choi matrix")
    c_block = choi_average(r.k, d)
    healthy = list(r.complement)
    mat = kron_all([choi_identity(d)] * len(healthy) + [c_block])
    # current factor labels: (j, in/out) pairs for healthy devices, then the
    # in block and out block of the anomalous ones
    labels: list[tuple[int, int]] = []
    for j in healthy:
        labels.extend(((j, 0), (j, 1)))
    labels.extend((j, 0) for j in r.members)
    labels.extend((j, 1) for j in r.members)
    where = {lab: pos for pos, lab in enumerate(labels)}
    perm = [where[(j, io)] for j in range(1, n + 1) for io in (0, 1)]
    out = reorder_subsystems(mat, (d,) * (2 * n), perm)
    # the Born rule transposes testers in the computational basis; every
    # hypothesis built here is symmetric, so the transpose is inert
    if np.abs(out - out.T).max() > 1e-12 * (1.0 + np.abs(out).max()):
        raise AssertionError("hypothesis Choi matrix lost its symmetry")
    return out


def all_hypotheses(n: int, k: int, d: int) -> dict[AnomalyPattern, np.ndarray]:
    """F_r for every pattern, in lexicographic pattern order."""
    layout = SubsystemLayout(n_devices=n, local_dim=d)
    return {r: hypothesis_choi(r, layout) for r in all_patterns(n, k)}
