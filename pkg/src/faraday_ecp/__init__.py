"""Entanglement concentration via photonic Faraday rotation in low-Q cavities."""
from .analysis import (
    DeviationSpec,
    MismatchFidelity,
    MonteCarloResult,
    SweepResult,
    deviation_fidelity_analytic,
    deviation_fidelity_simulated,
    mismatch_fidelity_analytic,
    mismatch_fidelity_simulated,
    monte_carlo_protocol,
    sweep,
)
from .core import (
    HADAMARD,
    PAULI_Z,
    Branch,
    Gate,
    QubitLabel,
    StateVector,
    apply_gate,
    atom,
    concurrence,
    enumerate_branches,
    fidelity,
    make_state,
    photon,
    sample_branch,
    sample_branches,
    superpose,
    tensor,
)
from .faraday import (
    IDEAL_PHASES,
    CavityParams,
    FaradayGateSpec,
    LossyGateError,
    PhasePair,
    SingularParametersError,
    cavity_q_factor,
    coupling_from_position,
    faraday_gate,
    phase_pair,
    reflection_coupled,
    reflection_empty,
)
from .protocols import (
    GhzSpec,
    PairSpec,
    ProtocolResult,
    atomic_ecp,
    atomic_ghz_ecp,
    photonic_ecp,
    photonic_ghz_ecp,
    run_protocol,
    success_probability_analytic,
)

__version__ = "0.1.0"
