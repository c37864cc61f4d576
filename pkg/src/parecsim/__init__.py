"""State-vector simulation of the quantum tent map under static inter-qubit
imperfections, with Pauli-frame randomization and fidelity-decay analysis."""

from .statecore import (
    StateVector,
    basis_state,
    random_state,
    fidelity,
    apply_one_qubit,
    apply_two_qubit,
    apply_diagonal_phase,
    fourier_transform,
)
from .gateset import (
    HamiltonianGate,
    Circuit,
    Hadamard,
    Phase,
    ControlledPhase,
    CNOT,
    gate_matrix,
    apply,
    lower_standard,
    circuit_to_text,
    circuit_from_text,
)
from .tentmap import (
    TentMapParams,
    kick_profile,
    kick_phase,
    apply_exact_map,
    build_circuit,
    standard_gate_count_formula,
)
from .staticnoise import (
    StaticImperfection,
    sample,
    apply_propagator,
    noisy_apply,
    dump_imperfection,
    load_imperfection,
)
from .parec import (
    PauliFrame,
    ParecSchedule,
    sample_frame,
    frame_transition,
    conjugate_gate,
    run_parec,
)
from .analysis import (
    CoherentStateSpec,
    coherent_state,
    HusimiGrid,
    husimi,
    FidelityTrace,
    run_fidelity_trace,
    DecayFit,
    fit_decay,
    rate_sweep,
)

__version__ = "0.1.0"
