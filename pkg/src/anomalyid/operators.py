"""Dense complex linear algebra on multi-device tester spaces.

Operators are plain complex (or real) numpy arrays.  A tester space for n
devices of local dimension d has 2n tensor factors of dimension d each,
ordered device-major with an (in, out) pair per device:

    (1_in, 1_out, 2_in, 2_out, ..., n_in, n_out)

All index gymnastics go through :func:`reorder_subsystems` and
:func:`partial_trace`; no module is allowed to do silent stride arithmetic.
Total dimensions are bounded by a global cap (default 4096, overridable via
the ANOMALYID_DIM_CAP environment variable) so that every construction here
stays comfortably dense.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_DIM_CAP = 4096
DIM_CAP_ENV = "ANOMALYID_DIM_CAP"

HERMITICITY_RTOL = 1e-10
EIG_RESIDUAL_RTOL = 1e-8


class DimensionCapError(ValueError):
    """Raised when a construction would exceed the configured dimension cap."""


def dim_cap() -> int:
    """The active global dimension cap."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None:
        return DEFAULT_DIM_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError(f"{DIM_CAP_ENV} must be positive, got {raw}")
    return cap


def check_dim(dim: int, what: str = "operator") -> None:
    cap = dim_cap()
    if dim > cap:
        raise DimensionCapError(f"{what} dimension {dim} exceeds cap {cap}")


@dataclass(frozen=True)
class SubsystemLayout:
    """Device-major layout of the 2n legs of an n-device tester space."""

    n_devices: int
    local_dim: int

    def __post_init__(self) -> None:
        if self.n_devices < 1:
            raise ValueError("need at least one device")
        if self.local_dim < 2:
            raise ValueError("local dimension must be at least 2")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.local_dim,) * (2 * self.n_devices)

    @property
    def dim(self) -> int:
        return self.local_dim ** (2 * self.n_devices)

    @property
    def in_axes(self) -> tuple[int, ...]:
        return tuple(2 * j for j in range(self.n_devices))

    @property
    def out_axes(self) -> tuple[int, ...]:
        return tuple(2 * j + 1 for j in range(self.n_devices))

    def device_axes(self, device: int) -> tuple[int, int]:
        """(in, out) leg positions of a 1-based device index."""
        if not 1 <= device <= self.n_devices:
            raise ValueError(f"device {device} outside 1..{self.n_devices}")
        return (2 * (device - 1), 2 * (device - 1) + 1)


# ---------------------------------------------------------------------------
# elementary constructions
# ---------------------------------------------------------------------------

def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the global dimension cap enforced."""
    check_dim(a.shape[0] * b.shape[0], "kron result")
    return np.kron(a, b)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1)
    for m in mats:
        out = kron(out, m)
    return out


def reorder_subsystems(mat: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Rearrange the tensor factors of a square operator.

    ``dims`` are the current factor dimensions and ``perm[t]`` is the index
    of the current factor that ends up at position t of the result, so that
    reorder_subsystems(kron(A, B), (dA, dB), (1, 0)) == kron(B, A).
    """
    dims = tuple(int(x) for x in dims)
    nf = len(dims)
    if sorted(perm) != list(range(nf)):
        raise ValueError(f"perm {perm} is not a permutation of 0..{nf - 1}")
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
    tens = mat.reshape(dims + dims)
    axes = list(perm) + [p + nf for p in perm]
    return np.ascontiguousarray(tens.transpose(axes)).reshape(total, total)


def partial_trace(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not in ``keep`` (kept factors keep their order).

    keep = all factors is the identity map; keep = () yields the 1x1 matrix
    [tr mat].  The trace of the output always equals the trace of the input.
    """
    dims = tuple(int(x) for x in dims)
    nf = len(dims)
    keep = tuple(sorted(set(int(x) for x in keep)))
    if any(not 0 <= x < nf for x in keep):
        raise ValueError(f"keep {keep} outside factor range 0..{nf - 1}")
    traced = tuple(x for x in range(nf) if x not in keep)
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
    dk = int(np.prod([dims[x] for x in keep])) if keep else 1
    dt = total // dk
    tens = mat.reshape(dims + dims)
    order = list(keep) + list(traced)
    axes = order + [x + nf for x in order]
    tens = tens.transpose(axes).reshape(dk, dt, dk, dt)
    return np.einsum("itjt->ij", tens)


def transpose_computational(mat: np.ndarray) -> np.ndarray:
    """Entrywise transpose in the computational basis (no conjugation)."""
    return mat.T.copy()


# ---------------------------------------------------------------------------
# hermiticity and spectra
# ---------------------------------------------------------------------------

def hermiticity_defect(mat: np.ndarray) -> float:
    return float(np.abs(mat - mat.conj().T).max())


def is_hermitian(mat: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    scale = 1.0 + float(np.abs(mat).max())
    return hermiticity_defect(mat) <= rtol * scale


def assert_hermitian(mat: np.ndarray, rtol: float = HERMITICITY_RTOL) -> None:
    if not is_hermitian(mat, rtol):
        raise ValueError(
            f"matrix is not Hermitian within tolerance (defect {hermiticity_defect(mat):.3e})"
        )


def hermitian_eig(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Input hermiticity is checked first; the returned pairs satisfy
    ||A v - w v|| <= 1e-8 ||A||_2, which is asserted.
    """
    assert_hermitian(mat)
    w, v = np.linalg.eigh(mat)
    norm = max(np.abs(w).max(), 1e-300) if len(w) else 1.0
    residual = np.abs(mat @ v - v * w).max()
    if residual > EIG_RESIDUAL_RTOL * max(norm, 1.0):
        raise ArithmeticError(f"eigendecomposition residual {residual:.3e} too large")
    return w, v


def min_eigenvalue(mat: np.ndarray) -> float:
    assert_hermitian(mat)
    return float(np.linalg.eigvalsh(mat)[0])


# ---------------------------------------------------------------------------
# Haar sampling
# ---------------------------------------------------------------------------

def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed unitary, by QR of a complex Ginibre matrix.

    The R-diagonal phases are divided out (Mezzadri's correction), which
    makes the QR sample exactly Haar rather than merely column-orthonormal.
    """
    return haar_unitaries(d, 1, rng)[0]


def haar_unitaries(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """A (count, d, d) stack of independent Haar unitaries."""
    if d < 1:
        raise ValueError("d must be positive")
    z = rng.standard_normal((count, d, d)) + 1j * rng.standard_normal((count, d, d))
    z /= np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1).copy()
    diag /= np.abs(diag)
    return q * diag[:, None, :]


def is_unitary(u: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    d = u.shape[0]
    return bool(np.abs(u.conj().T @ u - np.eye(d)).max() <= rtol)
