"""SDPA sparse (.dat-s) export of the parallel tester SDP, plus a solver bridge.

The exported file encodes, on the standard SDPA dual side

    maximise  tr(F_0 Y)   s.t.   tr(F_i Y) = c_i  (i = 1..m),   Y >= 0,

the parallel zero-error tester search

    maximise (1/N) sum_r tr(T_r^T F_r)
    s.t.     tr(T_r^T F_s) = 0  for r != s,
             sum_r T_r + T_? = 1_out (x) sigma_in,  tr sigma = 1,
             T_r, T_?, sigma >= 0,

with Y = blockdiag(T_(r1), ..., T_(rN), T_?, sigma), tester blocks in
lexicographic pattern order.  All data matrices here are real symmetric
(asserted); genuinely complex Hermitian data would be embedded block-wise
via :func:`embed_hermitian` with the objective halved and the constraint
values doubled, which leaves the optimum unchanged.

:func:`solve_sdpa` hands any parsed instance to the SCS conic solver and is
used as the external oracle on exported files.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .certification import success_probability_formula
from .operators import SubsystemLayout, check_dim
from .twirl import all_hypotheses, all_patterns

Entry = tuple[int, int, float]  # 0-based upper-triangle (i <= j) entry
BlockEntries = dict[int, list[Entry]]  # 0-based block index -> entries

REALNESS_TOL = 1e-12


@dataclass
class SdpaInstance:
    """An SDPA sparse-format problem: block sizes, RHS vector, entry lists.

    ``matrices[0]`` is the objective F_0 and ``matrices[i]`` the i-th
    constraint matrix; every matrix is symmetric and stored by its upper
    triangle.  Only dense (positive-size) blocks are supported.
    """

    block_sizes: list[int]
    rhs: list[float]
    matrices: list[BlockEntries]
    comments: list[str] = field(default_factory=list)

    @property
    def n_constraints(self) -> int:
        return len(self.rhs)

    def __post_init__(self) -> None:
        if len(self.matrices) != len(self.rhs) + 1:
            raise ValueError("need exactly one matrix per constraint plus the objective")
        for mat in self.matrices:
            for blk, entries in mat.items():
                if not 0 <= blk < len(self.block_sizes):
                    raise ValueError(f"block index {blk} out of range")
                size = self.block_sizes[blk]
                for i, j, _ in entries:
                    if not 0 <= i <= j < size:
                        raise ValueError(f"entry ({i},{j}) outside upper triangle of size {size}")


# ---------------------------------------------------------------------------
# complex-to-real embedding
# ---------------------------------------------------------------------------

def embed_hermitian(mat: np.ndarray) -> np.ndarray:
    """The 2S-dimensional real symmetric embedding [[Re, -Im], [Im, Re]].

    A Hermitian H is PSD iff its embedding is, and for Hermitian A, B
    tr(embed(A) embed(B)) = 2 tr(A B); solving an embedded instance with the
    objective halved therefore reproduces the complex optimum.
    """
    re, im = mat.real, mat.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    out = np.vstack([top, bot])
    if np.abs(out - out.T).max() > 1e-12 * (1.0 + np.abs(out).max()):
        raise ValueError("input is not Hermitian; embedding would not be symmetric")
    return out


def upper_entries(mat: np.ndarray, tol: float = 0.0) -> list[Entry]:
    """Upper-triangle (i <= j) nonzero entries of a real symmetric matrix."""
    if np.iscomplexobj(mat) and np.abs(mat.imag).max() > REALNESS_TOL:
        raise ValueError("matrix has a complex part; embed it first")
    real = np.asarray(mat.real, dtype=float)
    if np.abs(real - real.T).max() > 1e-12 * (1.0 + np.abs(real).max()):
        raise ValueError("matrix is not symmetric")
    iu, ju = np.triu_indices(real.shape[0])
    vals = real[iu, ju]
    keep = np.abs(vals) > tol
    return [(int(i), int(j), float(v)) for i, j, v in zip(iu[keep], ju[keep], vals[keep])]


# ---------------------------------------------------------------------------
# the parallel tester instance
# ---------------------------------------------------------------------------

def build_parallel_tester_instance(n: int, k: int, d: int) -> tuple[SdpaInstance, dict]:
    """Assemble the parallel tester SDP at (n, k, d) in SDPA dual form.

    Constraint order: [tr(sigma) = 1], then the zero-error equalities
    (r outer, s inner, both lexicographic, r != s), then one completeness
    entry per upper-triangle position (i <= j, row-major) of the full space.
    """
    layout = SubsystemLayout(n_devices=n, local_dim=d)
    check_dim(layout.dim, "exported SDP block")
    hypotheses = all_hypotheses(n, k, d)
    patterns = all_patterns(n, k)
    big_n = len(patterns)
    dim = layout.dim
    din = d**n
    sigma_blk = big_n + 1  # 0-based: testers 0..N-1, T_? = N, sigma = N+1

    for f in hypotheses.values():
        if np.iscomplexobj(f) and np.abs(f.imag).max() > REALNESS_TOL:
            raise ValueError("hypothesis matrices must be real; embed complex data first")
        if np.abs(f - f.T).max() > REALNESS_TOL * (1.0 + np.abs(f).max()):
            raise ValueError("hypothesis matrices must be symmetric")

    entries_of = {r: upper_entries(hypotheses[r]) for r in patterns}

    matrices: list[BlockEntries] = []
    rhs: list[float] = []
    # objective: (1/N) F_r on each tester block
    matrices.append(
        {idx: [(i, j, v / big_n) for i, j, v in entries_of[r]] for idx, r in enumerate(patterns)}
    )
    # [1] normalisation of the input state
    matrices.append({sigma_blk: [(p, p, 1.0) for p in range(din)]})
    rhs.append(1.0)
    # [2..] zero-error equalities
    for idx, r in enumerate(patterns):
        for s in patterns:
            if s == r:
                continue
            matrices.append({idx: list(entries_of[s])})
            rhs.append(0.0)
    # completeness: sum_r T_r + T_? - 1_out (x) sigma_in = 0, entry by entry
    weights = tuple(d ** (2 * n - 1 - t) for t in range(2 * n))
    in_weights = tuple(d ** (n - 1 - t) for t in range(n))

    def split(full_index: int) -> tuple[int, int]:
        digits = [(full_index // w) % d for w in weights]
        a_in = sum(dig * w for dig, w in zip(digits[0::2], in_weights))
        a_out = sum(dig * w for dig, w in zip(digits[1::2], in_weights))
        return a_in, a_out

    for i in range(dim):
        ai, ao = split(i)
        for j in range(i, dim):
            bi, bo = split(j)
            mat: BlockEntries = {blk: [(i, j, 1.0)] for blk in range(big_n + 1)}
            if ao == bo:
                p, q = sorted((ai, bi))
                # keep every term of the row at the same x2 off-diagonal
                # weight that the symmetric file convention implies
                if i == j:
                    sigma_val = -1.0
                elif p == q:
                    sigma_val = -2.0
                else:
                    sigma_val = -1.0
                mat[sigma_blk] = [(p, q, sigma_val)]
            matrices.append(mat)
            rhs.append(0.0)

    expected = success_probability_formula(k, d)
    if big_n > 1:
        zero_error_note = f"[2..{1 + big_n * (big_n - 1)}] zero-error tr(Fs^T Tr)=0; "
    else:
        zero_error_note = "no zero-error rows (single hypothesis); "
    comments = [
        f"anomalyid parallel tester SDP: n={n} k={k} d={d}",
        "dual side: maximize tr(F0 Y) s.t. tr(Fi Y) = ci, Y >= 0 block diagonal",
        f"blocks: 1..{big_n} testers T_r, lexicographic patterns "
        + " ".join(str(tuple(r.members)) for r in patterns)
        + f"; {big_n + 1}: inconclusive T_?; {big_n + 2}: input state sigma ({din}x{din})",
        "constraints: [1] tr(sigma)=1; "
        + zero_error_note
        + "then completeness (sum_r Tr + T_? - 1_out x sigma_in)_ij = 0 "
        "for i<=j row-major on the device-major layout (1in,1out,...,nin,nout)",
        f"local parallel protocol value (expected optimum for n >= 2k): {float(expected):.15g}",
    ]
    instance = SdpaInstance(
        block_sizes=[dim] * (big_n + 1) + [din],
        rhs=rhs,
        matrices=matrices,
        comments=comments,
    )
    meta = {
        "n": n,
        "k": k,
        "d": d,
        "patterns": [tuple(r.members) for r in patterns],
        "expected_optimum": expected,
        "n_constraints": instance.n_constraints,
        "block_sizes": list(instance.block_sizes),
    }
    return instance, meta


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def write_sdpa(instance: SdpaInstance, path: str) -> None:
    """Write ``instance`` in SDPA sparse format; atomic (no partial files)."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".dat-s.part")
    try:
        with os.fdopen(fd, "w") as fh:
            for comment in instance.comments:
                fh.write(f"* {comment}\n")
            fh.write(f"{instance.n_constraints}\n")
            fh.write(f"{len(instance.block_sizes)}\n")
            fh.write(" ".join(str(s) for s in instance.block_sizes) + "\n")
            fh.write(" ".join(f"{v:.17g}" for v in instance.rhs) + "\n")
            for mat_no, mat in enumerate(instance.matrices):
                for blk in sorted(mat):
                    for i, j, v in mat[blk]:
                        if v == 0.0:
                            continue
                        fh.write(f"{mat_no} {blk + 1} {i + 1} {j + 1} {v:.17g}\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def read_sdpa(path: str) -> SdpaInstance:
    """Parse an SDPA sparse file (dense blocks only)."""
    comments = []
    header: list[str] = []
    entries: list[tuple[int, int, int, int, float]] = []
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line[0] in "*\"":
                comments.append(line.lstrip("*\" ").rstrip())
                continue
            if len(header) < 4:
                header.append(line)
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{line_no}: expected 5 fields, got {len(parts)}")
            mat_no, blk, i, j = (int(x) for x in parts[:4])
            entries.append((mat_no, blk, i, j, float(parts[4])))
    if len(header) < 4:
        raise ValueError(f"{path}: truncated header")

    def ints(text: str) -> list[int]:
        cleaned = text.replace(",", " ").replace("{", " ").replace("}", " ")
        cleaned = cleaned.replace("(", " ").replace(")", " ")
        return [int(round(float(tok))) for tok in cleaned.split() if tok]

    m = ints(header[0])[0]
    n_blocks = ints(header[1])[0]
    sizes = ints(header[2])
    if len(sizes) != n_blocks:
        raise ValueError(f"{path}: block structure lists {len(sizes)} sizes, expected {n_blocks}")
    if any(s <= 0 for s in sizes):
        raise ValueError(f"{path}: diagonal (negative-size) blocks are not supported")
    rhs = [float(tok) for tok in header[3].replace(",", " ").split() if tok]
    if len(rhs) != m:
        raise ValueError(f"{path}: RHS lists {len(rhs)} values, expected {m}")
    matrices: list[BlockEntries] = [dict() for _ in range(m + 1)]
    for mat_no, blk, i, j, v in entries:
        if not 0 <= mat_no <= m:
            raise ValueError(f"{path}: matrix index {mat_no} outside 0..{m}")
        if not 1 <= blk <= n_blocks:
            raise ValueError(f"{path}: block index {blk} outside 1..{n_blocks}")
        ii, jj = min(i, j) - 1, max(i, j) - 1
        matrices[mat_no].setdefault(blk - 1, []).append((ii, jj, v))
    return SdpaInstance(block_sizes=sizes, rhs=rhs, matrices=matrices, comments=comments)


def export_sdp(n: int, k: int, d: int, path: str) -> dict:
    """Build and write the (n, k, d) instance; returns the metadata record."""
    instance, meta = build_parallel_tester_instance(n, k, d)
    write_sdpa(instance, path)
    meta["path"] = path
    return meta


def parallel_warm_start(
    n: int, k: int, d: int, nu: float = 1.0e7
) -> tuple[list[np.ndarray], np.ndarray]:
    """Primal/dual warm start for the instance built by this module.

    Primal: the protocol testers T_r = d^{-n} E_r with sigma = 1/d^n.  Dual:
    the certificate family at multiplier nu, laid out against the documented
    constraint order (normalisation, zero-error, completeness entries): the
    completeness multipliers carry the matrix (Y + eps 1)/d^n, the zero-error
    rows nu/d^n, and the normalisation row the dual value P* + eps(nu).
    Large nu makes the initial duality gap eps(nu) ~ 1/nu.
    """
    from .certification import dual_certificate, optimal_testers

    testers = optimal_testers(n, k, d)
    patterns = sorted(testers.elements)
    dim = testers.layout.dim
    din = d**n
    blocks = [testers.elements[r] for r in patterns]
    blocks.append(testers.inconclusive)
    blocks.append(np.eye(din) / din)

    cert, _ = dual_certificate(nu, n=n, k=k, d=d)
    y_hat = (cert.Y + cert.epsilon * np.eye(dim)) / float(d) ** n
    big_n = len(patterns)
    y_eq = np.empty(1 + big_n * (big_n - 1) + dim * (dim + 1) // 2)
    y_eq[0] = cert.y
    y_eq[1 : 1 + big_n * (big_n - 1)] = nu / float(d) ** n
    iu, ju = np.triu_indices(dim)
    y_eq[1 + big_n * (big_n - 1) :] = y_hat[iu, ju]
    return blocks, y_eq


# ---------------------------------------------------------------------------
# solver bridge (SCS)
# ---------------------------------------------------------------------------

@dataclass
class SolveResult:
    value: float
    status: str
    iterations: int
    solve_time: float


def _svec_offsets(sizes: Sequence[int]) -> tuple[list[int], int]:
    offsets = [0]
    for s in sizes:
        offsets.append(offsets[-1] + s * (s + 1) // 2)
    return offsets, offsets[-1]


def _svec_pos(size: int, i: int, j: int) -> int:
    # column-major lower triangle: (j, j), (j+1, j), ..., then column j+1
    r, c = max(i, j), min(i, j)
    return c * size - c * (c - 1) // 2 + (r - c)


def _svec(mat: np.ndarray) -> np.ndarray:
    """Scaled lower-triangle column-major vectorisation (the SCS layout)."""
    size = mat.shape[0]
    cols = []
    sqrt2 = math.sqrt(2.0)
    for j in range(size):
        col = mat[j:, j].copy()
        col[1:] *= sqrt2
        cols.append(col)
    return np.concatenate(cols) if cols else np.zeros(0)


def solve_sdpa(
    instance: SdpaInstance,
    eps: float = 1e-8,
    max_iters: int = 200_000,
    verbose: bool = False,
    warm_primal: Sequence[np.ndarray] | None = None,
    warm_dual_eq: np.ndarray | None = None,
) -> SolveResult:
    """Solve the dual side of an SDPA instance with SCS.

    Variables are the scaled triangular vectorisations of the PSD blocks;
    each constraint tr(F_i Y) = c_i becomes one zero-cone row and the
    objective is -svec(F_0).  Returns max tr(F_0 Y).

    ``warm_primal`` (one symmetric matrix per block) and ``warm_dual_eq``
    (one multiplier per constraint) optionally initialise the solver; the
    conic dual slacks are completed mechanically as
    Z_b = sum_i y_i F_i,b - F_0,b.  SCS still iterates to its own
    termination criteria, so a wrong warm start cannot fake convergence.
    """
    import scs

    sizes = instance.block_sizes
    offsets, nx = _svec_offsets(sizes)
    sqrt2 = math.sqrt(2.0)

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for row, mat in enumerate(instance.matrices[1:]):
        for blk, entry_list in mat.items():
            size = sizes[blk]
            for i, j, v in entry_list:
                rows.append(row)
                cols.append(offsets[blk] + _svec_pos(size, i, j))
                vals.append(v * (sqrt2 if i != j else 1.0))
    n_eq = instance.n_constraints
    row = n_eq
    for blk, size in enumerate(sizes):
        span = offsets[blk + 1] - offsets[blk]
        rows.extend(range(row, row + span))
        cols.extend(range(offsets[blk], offsets[blk + 1]))
        vals.extend([-1.0] * span)
        row += span
    a_mat = sp.csc_matrix(
        (np.array(vals), (np.array(rows), np.array(cols))), shape=(row, nx)
    )
    b_vec = np.zeros(row)
    b_vec[:n_eq] = instance.rhs
    c_vec = np.zeros(nx)
    for blk, entry_list in instance.matrices[0].items():
        size = sizes[blk]
        for i, j, v in entry_list:
            c_vec[offsets[blk] + _svec_pos(size, i, j)] -= v * (sqrt2 if i != j else 1.0)

    cone = {"z": int(n_eq), "s": [int(s) for s in sizes]}
    solver = scs.SCS(
        {"A": a_mat, "b": b_vec, "c": c_vec},
        cone,
        eps_abs=eps,
        eps_rel=eps,
        max_iters=max_iters,
        verbose=verbose,
    )
    if warm_primal is not None or warm_dual_eq is not None:
        if warm_primal is None or warm_dual_eq is None:
            raise ValueError("warm start needs both the primal blocks and the multipliers")
        if len(warm_primal) != len(sizes):
            raise ValueError("one warm-start matrix per block required")
        if len(warm_dual_eq) != n_eq:
            raise ValueError("one warm-start multiplier per constraint required")
        x0 = np.concatenate([_svec(np.asarray(blk, dtype=float)) for blk in warm_primal])
        s0 = np.concatenate([np.zeros(n_eq), x0])
        y_cone = []
        for blk, size in enumerate(sizes):
            z_blk = np.zeros((size, size))
            for mat_no, mat in enumerate(instance.matrices):
                for i, j, v in mat.get(blk, []):
                    coeff = -v if mat_no == 0 else warm_dual_eq[mat_no - 1] * v
                    z_blk[i, j] += coeff
                    if i != j:
                        z_blk[j, i] += coeff
            y_cone.append(_svec(z_blk))
        y0 = np.concatenate([np.asarray(warm_dual_eq, dtype=float)] + y_cone)
        sol = solver.solve(warm_start=True, x=x0, y=y0, s=s0)
    else:
        sol = solver.solve()
    info = sol["info"]
    return SolveResult(
        value=-float(info["pobj"]),
        status=str(info["status"]),
        iterations=int(info["iter"]),
        solve_time=float(info["solve_time"]) / 1e3,
    )
