"""Zero-error identification of anomalous unitary devices.

A collection of n devices is supposed to implement a known unitary; k of
them secretly apply a common unknown unitary U instead.  Averaging over U
with the Haar measure turns each anomaly pattern into a fixed hypothesis
operator, and the optimal zero-error strategy becomes a semidefinite
program over quantum testers.  This package builds the hypothesis
operators by Weingarten calculus, evaluates and certifies the optimal
local parallel protocol (including the dual SDP certificate for the
two-anomaly qubit case), simulates the protocol by Monte Carlo, exports
SDP instances in SDPA sparse format, and implements the walled Brauer
diagram algebra that organises the underlying symmetry.
"""

__version__ = "0.1.0"

from . import brauer, certification, combinatorics, operators, sdpa, simulate, twirl

__all__ = [
    "__version__",
    "brauer",
    "certification",
    "combinatorics",
    "operators",
    "sdpa",
    "simulate",
    "twirl",
]
