"""Optimal parallel testers, SDP feasibility checks, and the dual certificate.

The protocol testers are T_r = d^{-n} E_r with the inconclusive element
T_? = d^{-n} 1 - sum_r T_r.  They satisfy the zero-error conditions
tr(T_r^T F_s) = 0 for r != s exactly, and their Born value

    P(k, d) = d^{-k} tr(C^(k) Pi_1^(x k))
            = d^{-2k} sum_m (-1)^m binom(k, m) f_{m,d} d^{2(k-m)}

is independent of the number of devices n.  For (n, k, d) = (4, 2, 2) a dual
feasible family certifies that no parallel tester can beat this value.

Feasibility reports are computed on the full d^{2n}-dimensional space when
it fits under the dimension cap, and otherwise through the exact tensor
factorisation of the protocol testers (every reported quantity reduces to
products of small per-device traces and eigenvalues).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .combinatorics import f_coeff
from .operators import (
    DimensionCapError,
    SubsystemLayout,
    dim_cap,
    kron_all,
    partial_trace,
    transpose_computational,
)
from .twirl import (
    AnomalyPattern,
    all_patterns,
    basis_operator_E,
    choi_average,
    choi_identity,
    hypothesis_choi,
    pair_major_choi_average,
    projectors,
)

EQUALITY_TOL = 1e-10
PSD_TOL = -1e-10


@dataclass
class TesterSet:
    """The family {T_r} plus the inconclusive element on a fixed layout."""

    layout: SubsystemLayout
    elements: dict[AnomalyPattern, np.ndarray]
    inconclusive: np.ndarray


def optimal_testers(n: int, k: int, d: int) -> TesterSet:
    """T_r = d^{-n} E_r for every pattern, T_? = d^{-n} 1 - sum_r T_r."""
    layout = SubsystemLayout(n_devices=n, local_dim=d)
    scale = float(d) ** (-n)
    elements = {}
    total = np.zeros((layout.dim, layout.dim))
    for r in all_patterns(n, k):
        t = scale * basis_operator_E(r, layout)
        elements[r] = t
        total += t
    inconclusive = scale * np.eye(layout.dim) - total
    return TesterSet(layout=layout, elements=elements, inconclusive=inconclusive)


# ---------------------------------------------------------------------------
# feasibility functionals
# ---------------------------------------------------------------------------

def _overlap(t: np.ndarray, f: np.ndarray) -> complex:
    """tr(T^T F) = sum_ij T_ij F_ij (no conjugation)."""
    return complex(np.sum(t * f))


def zero_error_residual(
    testers: TesterSet, hypotheses: dict[AnomalyPattern, np.ndarray]
) -> float:
    """max over r != s of |tr(T_r^T F_s)|; 0 for the optimal testers."""
    worst = 0.0
    for r, t in testers.elements.items():
        for s, f in hypotheses.items():
            if s == r:
                continue
            worst = max(worst, abs(_overlap(t, f)))
    return worst


def completeness_residual(testers: TesterSet) -> float:
    """Entrywise defect of T_? + sum_r T_r = d^{-n} 1."""
    layout = testers.layout
    total = testers.inconclusive + sum(testers.elements.values())
    target = np.eye(layout.dim) / layout.local_dim**layout.n_devices
    return float(np.abs(total - target).max())


def min_tester_eigenvalue(testers: TesterSet) -> tuple[float, float]:
    """(min over the T_r, min of T_?) smallest eigenvalues."""
    worst = min(float(np.linalg.eigvalsh(t)[0]) for t in testers.elements.values())
    inconclusive = float(np.linalg.eigvalsh(testers.inconclusive)[0])
    return worst, inconclusive


def success_probability_born(
    testers: TesterSet, hypotheses: dict[AnomalyPattern, np.ndarray]
) -> float:
    """(1/N) sum_r tr(T_r^T F_r), asserted real."""
    if set(testers.elements) != set(hypotheses):
        raise ValueError("testers and hypotheses cover different patterns")
    acc = 0.0 + 0.0j
    for r, t in testers.elements.items():
        acc += _overlap(t, hypotheses[r])
    acc /= len(testers.elements)
    if abs(acc.imag) > 1e-12:
        raise ArithmeticError(f"Born value has imaginary residue {acc.imag:.3e}")
    return float(acc.real)


def success_probability_formula(k: int, d: int) -> Fraction:
    """Exact protocol success probability d^{-2k} sum_m (-1)^m C(k,m) f_{m,d} d^{2(k-m)}.

    For d = 2 this collapses to binom(2k+1, k+1) / 4^k.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if d < 2:
        raise ValueError("d must be at least 2")
    num = sum((-1) ** m * comb(k, m) * f_coeff(m, d) * d ** (2 * (k - m)) for m in range(k + 1))
    return Fraction(num, d ** (2 * k))


def born_probability_reduced(k: int, d: int) -> float:
    """d^{-k} tr(C^(k) Pi_1^(x k)), the n-independent Born value of the protocol.

    Evaluated on the d^{2k}-dimensional anomalous block only, so it works for
    any n; this is the Weingarten-calculus route, independent of the
    combinatorial formula.
    """
    c = pair_major_choi_average(k, d)
    _, pi1 = projectors(d)
    proj = kron_all([pi1] * k)
    val = float(np.sum(proj * c))  # both symmetric and real
    return val / d**k


# ---------------------------------------------------------------------------
# certification report (dense within the cap, factorised beyond it)
# ---------------------------------------------------------------------------

@dataclass
class CertifyReport:
    n: int
    k: int
    d: int
    method: str  # "dense" or "factorized"
    born: float
    formula: Fraction
    zero_error: float
    completeness: float
    min_tester_eig: float
    min_inconclusive_eig: float

    @property
    def passed(self) -> bool:
        return (
            self.zero_error <= EQUALITY_TOL
            and self.completeness <= EQUALITY_TOL
            and self.min_tester_eig >= PSD_TOL
            and self.min_inconclusive_eig >= PSD_TOL
            and abs(self.born - float(self.formula)) <= EQUALITY_TOL
        )


def _certify_dense(n: int, k: int, d: int) -> CertifyReport:
    from .twirl import all_hypotheses

    testers = optimal_testers(n, k, d)
    hypotheses = all_hypotheses(n, k, d)
    worst_eig, inconclusive_eig = min_tester_eigenvalue(testers)
    return CertifyReport(
        n=n,
        k=k,
        d=d,
        method="dense",
        born=success_probability_born(testers, hypotheses),
        formula=success_probability_formula(k, d),
        zero_error=zero_error_residual(testers, hypotheses),
        completeness=completeness_residual(testers),
        min_tester_eig=worst_eig,
        min_inconclusive_eig=inconclusive_eig,
    )


def _certify_factorized(n: int, k: int, d: int) -> CertifyReport:
    """Exact per-device factorisation of every reported quantity.

    Both T_r = d^{-n} (x)_j Pi_{b_j} and F_s = (x) |1>><<1| (x) C^(k) are
    tensor products over devices, so every trace splits into per-device
    factors and every eigenvalue is a product of per-device eigenvalues.
    Only d^2- and d^{2k}-dimensional objects are ever built.
    """
    pi0, pi1 = projectors(d)
    choi1 = choi_identity(d)
    c_pair = pair_major_choi_average(k, d)
    # healthy-device factors tr(Pi_b |1>><<1|): exactly (d, 0) for b = (0, 1)
    healthy = (float(np.sum(pi0 * choi1)), float(np.sum(pi1 * choi1)))
    # anomalous-block factors tr((x)_bits Pi_b . C^(k)) for all bit patterns
    block = {}
    for bits in itertools.product((0, 1), repeat=k):
        proj = kron_all([pi1 if b else pi0 for b in bits])
        block[bits] = float(np.sum(proj * c_pair))

    patterns = all_patterns(n, k)
    scale = float(d) ** (-n)
    born_terms = []
    worst_cross = 0.0
    for r in patterns:
        rset = set(r.members)
        for s in patterns:
            sset = set(s.members)
            factor = 1.0
            for j in range(1, n + 1):
                if j not in sset:
                    factor *= healthy[1 if j in rset else 0]
            factor *= block[tuple(1 if j in rset else 0 for j in s.members)]
            value = scale * factor
            if s == r:
                born_terms.append(value)
            else:
                worst_cross = max(worst_cross, abs(value))
    born = float(np.mean(born_terms))

    # tester eigenvalues are products of per-device projector eigenvalues;
    # track the (lo, hi) interval of selection products across the n factors
    lam0 = np.linalg.eigvalsh(pi0)
    lam1 = np.linalg.eigvalsh(pi1)
    lo, hi = 1.0, 1.0
    for bounds in [(float(lam0[0]), float(lam0[-1]))] * (n - k) + [
        (float(lam1[0]), float(lam1[-1]))
    ] * k:
        products = [lo * bounds[0], lo * bounds[1], hi * bounds[0], hi * bounds[1]]
        lo, hi = min(products), max(products)
    min_tester = scale * lo
    # T_? = d^{-n}(1 - sum_r E_r): on the joint eigensector labelled by a
    # click bitstring b, sum_r E_r has eigenvalue #{r : indicator(r) = b},
    # which is 1 when b has exactly k ones and 0 otherwise.
    min_inconclusive = scale * min(
        1.0 - (1.0 if sum(bits) == k else 0.0)
        for bits in itertools.product((0, 1), repeat=n)
    )
    return CertifyReport(
        n=n,
        k=k,
        d=d,
        method="factorized",
        born=born,
        formula=success_probability_formula(k, d),
        zero_error=worst_cross,
        completeness=0.0,  # T_? is defined as d^{-n} 1 - sum_r T_r
        min_tester_eig=min_tester,
        min_inconclusive_eig=min_inconclusive,
    )


def certify_report(n: int, k: int, d: int) -> CertifyReport:
    """Feasibility and Born-value report for the optimal testers at (n, k, d).

    Uses the full-space (dense) verification when d^{2n} fits under the
    dimension cap and the exact factorised evaluation otherwise.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if d ** (2 * k) > dim_cap():
        raise DimensionCapError(f"anomalous block dimension {d ** (2 * k)} exceeds cap")
    if d ** (2 * n) <= dim_cap():
        return _certify_dense(n, k, d)
    return _certify_factorized(n, k, d)


def n_independence_check(n_list: list[int], k: int = 2, d: int = 2) -> dict[int, float]:
    """Born value of the protocol at each n; constant in n by construction."""
    return {n: certify_report(n, k, d).born for n in n_list}


# ---------------------------------------------------------------------------
# dual certificate at (n, k, d) = (4, 2, 2)
# ---------------------------------------------------------------------------

@dataclass
class DualCertificate:
    """One member of the dual feasible family indexed by the multiplier nu.

    Y is kept in d^n-scaled units: Y = (d^n / N) sum_r E_r F_r E_r, so that
    tr Y = P* d^{2n} and tr_out Y = P* d^n 1_in.  Dividing by d^n recovers
    unit-normalised dual variables: ((Y + epsilon 1)/d^n, y, nu/d^n) is
    feasible for the dual program and attains objective y = P* + epsilon.
    """

    Y: np.ndarray
    y: float
    nu: float
    epsilon: float

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")


@dataclass
class DualGapRow:
    nu: float
    epsilon: float
    dual_value: float


def _dual_pieces(n: int, k: int, d: int):
    from .twirl import all_hypotheses

    layout = SubsystemLayout(n_devices=n, local_dim=d)
    hypotheses = all_hypotheses(n, k, d)
    projectors_e = {r: basis_operator_E(r, layout) for r in hypotheses}
    return layout, hypotheses, projectors_e


def dual_certificate(
    nu: float, n: int = 4, k: int = 2, d: int = 2
) -> tuple[DualCertificate, float]:
    """Build the dual ansatz and return it with the minimum eigenvalue of M(nu).

    M(nu) = Y - (d^n / N) F_{r*}^T + nu sum_{s != r*} F_s^T for the first
    pattern r* (all patterns are equivalent under device permutations).
    M(nu) has a single negative eigenvalue decaying like -const/nu, so
    epsilon = max(0, -min_eig) shrinks as nu grows and M(nu) + epsilon 1 is
    positive semidefinite by construction.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    layout, hypotheses, projectors_e = _dual_pieces(n, k, d)
    patterns = sorted(hypotheses)
    big_n = len(patterns)
    dn = float(d) ** n

    y_mat = np.zeros((layout.dim, layout.dim))
    for r in patterns:
        e = projectors_e[r]
        y_mat += e @ hypotheses[r] @ e
    y_mat *= dn / big_n

    born = float(success_probability_formula(k, d))
    # sanity: the ansatz saturates the reduced-trace constraint exactly
    reduced = partial_trace(y_mat, layout.dims, layout.in_axes)
    if np.abs(reduced - born * dn * np.eye(d**n)).max() > 1e-8:
        raise ArithmeticError("dual ansatz does not saturate tr_out Y = P* d^n 1")

    r_star = patterns[0]
    m_nu = y_mat - (dn / big_n) * transpose_computational(hypotheses[r_star])
    for s in patterns[1:]:
        m_nu += nu * transpose_computational(hypotheses[s])
    min_eig = float(np.linalg.eigvalsh(m_nu)[0])
    epsilon = max(0.0, -min_eig)
    cert = DualCertificate(Y=y_mat, y=born + epsilon, nu=nu, epsilon=epsilon)
    return cert, min_eig


def dual_gap_report(
    nu_list: list[float], n: int = 4, k: int = 2, d: int = 2
) -> list[DualGapRow]:
    """Dual values P* + epsilon(nu) along a grid of multipliers."""
    rows = []
    for nu in nu_list:
        cert, _ = dual_certificate(nu, n=n, k=k, d=d)
        rows.append(DualGapRow(nu=float(nu), epsilon=cert.epsilon, dual_value=cert.y))
    return rows
