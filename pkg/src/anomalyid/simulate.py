"""Monte Carlo simulation of the local parallel identification protocol.

Each device is probed with half of a maximally entangled pair and measured
with {Pi_0, Pi_1}.  A healthy device never clicks; a device applying the
unknown unitary U clicks with probability 1 - |tr U|^2 / d^2, and all
anomalous devices share the same U per run.  The protocol identifies the
anomaly pattern exactly when all k anomalous devices click, so

    P(success | U) = (1 - |tr U|^2 / d^2)^k,

whose Haar average is the exact protocol value.  Two estimators are
provided: the physical per-device Bernoulli process and its conditional
expectation ("rao-blackwell"), which averages P(success | U) directly and
never has larger variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .certification import success_probability_formula
from .combinatorics import f_coeff
from .operators import haar_unitaries

MODES = ("rao-blackwell", "bernoulli")
_BATCH = 20_000


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    k: int
    d: int
    trials: int
    seed: int
    mode: str = "rao-blackwell"

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class SimulationResult:
    estimate: float
    stderr: float
    analytic: Fraction
    z_score: float

    @classmethod
    def from_samples(cls, samples: np.ndarray, analytic: Fraction) -> "SimulationResult":
        estimate = float(samples.mean())
        stderr = float(samples.std(ddof=1) / np.sqrt(len(samples))) if len(samples) > 1 else 0.0
        if stderr > 0:
            z = (estimate - float(analytic)) / stderr
        else:
            z = 0.0 if estimate == float(analytic) else float("inf")
        return cls(estimate=estimate, stderr=stderr, analytic=analytic, z_score=z)


def click_probability(u: np.ndarray) -> float:
    """1 - |tr U|^2 / d^2: the chance that an anomalous device clicks.

    Follows from <phi+| (1 (x) U) |phi+> = tr(U) / d.
    """
    d = u.shape[0]
    if np.abs(u.conj().T @ u - np.eye(d)).max() > 1e-10:
        raise ValueError("input is not unitary within tolerance")
    p = 1.0 - abs(np.trace(u)) ** 2 / d**2
    return float(min(max(p, 0.0), 1.0))


def simulate(config: SimulationConfig) -> SimulationResult:
    """Estimate the protocol success probability at ``config``.

    Both modes draw one Haar unitary per trial and are unbiased for the
    exact value; neither consumes randomness for the healthy devices (they
    never click), so results are independent of n given the seed.
    """
    rng = np.random.default_rng(config.seed)
    analytic = success_probability_formula(config.k, config.d)
    samples = np.empty(config.trials)
    done = 0
    while done < config.trials:
        b = min(_BATCH, config.trials - done)
        us = haar_unitaries(config.d, b, rng)
        traces = np.einsum("bii->b", us)
        p_click = 1.0 - np.abs(traces) ** 2 / config.d**2
        np.clip(p_click, 0.0, 1.0, out=p_click)
        if config.mode == "rao-blackwell":
            samples[done : done + b] = p_click**config.k
        else:
            clicks = rng.random((b, config.k)) < p_click[:, None]
            samples[done : done + b] = clicks.all(axis=1).astype(float)
        done += b
    return SimulationResult.from_samples(samples, analytic)


def moment_estimate(m: int, d: int, trials: int, seed: int) -> SimulationResult:
    """Monte Carlo mean of |tr U|^(2m) against the exact integer moment.

    The sample variance grows steeply with m; meant for m <= 6 at 1e4+
    trials, where the 4-sigma band is informative.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    analytic = Fraction(f_coeff(m, d))
    samples = np.empty(trials)
    done = 0
    while done < trials:
        b = min(_BATCH, trials - done)
        us = haar_unitaries(d, b, rng)
        traces = np.einsum("bii->b", us)
        samples[done : done + b] = np.abs(traces) ** (2 * m)
        done += b
    return SimulationResult.from_samples(samples, analytic)
