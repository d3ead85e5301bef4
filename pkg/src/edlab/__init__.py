"""Error-disturbance uncertainty relations on finite-dimensional block algebras.

The package models an observable algebra as a direct sum of matrix blocks
with multiplicities, realizes its standard form, builds CP instruments,
measuring processes and minimal dilations, and evaluates error, disturbance
and the commutator bounds ``C`` and ``D`` that enter the uncertainty
relations.
"""

from . import builders, operator_core
from .algebra import AlgebraElement, NormalState, VonNeumannAlgebra, state_expectation
from .exceptions import (
    AlgebraMismatchError,
    DimensionError,
    EdlabError,
    MembershipError,
    NotHermitianError,
    NotPositiveError,
    OutcomeSpaceError,
    ScenarioError,
)
from .instrument import (
    KrausInstrument,
    Marginals,
    MeasuringProcess,
    MinimalDilation,
    OutcomeSpace,
    choi_matrix,
    instrument_from_measuring_process,
    marginal_structures,
    measuring_process_from_instrument,
    minimal_dilation,
    spectral_projection,
    statistically_equivalent,
)
from .scenario import (
    Scenario,
    SweepConfig,
    SweepResult,
    emit,
    load_scenarios,
    run_scenario,
    run_sweep,
)
from .standard_form import (
    GnsVector,
    NormalFunctional,
    PolarDecomposition,
    StandardFormSpace,
    c_bound,
    commutator_functional,
    d_bound,
    d_bound_trace_oracle,
    functional_norm,
    gns_vector,
    polar_decompose,
)
from .uncertainty import (
    ProofVectors,
    UncertaintyReport,
    appleby_error,
    branciard_geometric,
    check_branciard,
    check_ozawa,
    check_simultaneous,
    check_strengthened,
    disturbance,
    error,
    evaluate,
    heisenberg_product_deficit,
    proof_vectors,
    simultaneous_errors,
    std_dev,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
