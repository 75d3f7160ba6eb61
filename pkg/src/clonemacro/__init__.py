"""Symmetric multi-qubit states from optimal phase-covariant cloning.

Submodules
----------
symcore
    Dicke-basis states, basis changes, bipartite splits and reduced states.
macromeasures
    Effective-size measures, subgroup discrimination, covariance method.
distinguish
    Distinguishability of the two cloner outputs under imperfect read-out.
metrology
    Fisher information and Cramer-Rao bounds for a noisy Dicke probe.
oracle
    Brute-force full Hilbert space simulation used for validation.
crosscheck
    Formula-versus-oracle comparisons, including a mutation canary.
cli
    Command-line front end producing CSV/JSON tables.
"""

from . import distinguish, macromeasures, metrology, oracle, symcore
from .errors import CapacityError, ConsistencyError, NumericalHealthError, UnsupportedInputError
from .symcore import (
    Axis,
    CollectiveObservable,
    DickeBasisLabel,
    MicroMacroState,
    ReducedState,
    SymmetricPureState,
    cloner_state,
    micro_macro_state,
)

__version__ = "0.1.0"

__all__ = [
    "symcore",
    "macromeasures",
    "distinguish",
    "metrology",
    "oracle",
    "Axis",
    "CollectiveObservable",
    "DickeBasisLabel",
    "MicroMacroState",
    "ReducedState",
    "SymmetricPureState",
    "cloner_state",
    "micro_macro_state",
    "UnsupportedInputError",
    "CapacityError",
    "NumericalHealthError",
    "ConsistencyError",
]
