"""Analysis toolkit for k-nearest-neighbour vehicle platoons.

Covers structural connectivity and robustness measures, fault-tolerant
initial-state recovery, resilient trimmed-average consensus, and
double-integrator formation control with worst-case disturbance gains.
"""

from .connectivity import (
    ConnectivityReport,
    ExhaustiveLimitError,
    algebraic_connectivity,
    connectivity_report,
    edge_connectivity,
    is_connected,
    isoperimetric_constant,
    knn_closed_forms,
    lambda2_bounds,
    robustness,
    vertex_connectivity,
)
from .consensus import (
    Adversary,
    Constant,
    ConsensusTrace,
    Ramp,
    SeededRandom,
    Sinusoid,
    is_f_local,
    run_wmsr,
    wmsr_update,
)
from .estimation import (
    FaultScenario,
    MeasurementTrace,
    ModelMismatchError,
    RecoveryResult,
    WeightMatrix,
    max_tolerable_faults,
    observation_model,
    observe,
    packet_drop_scenario,
    random_weights,
    recover_initial_state,
    simulate_faulty,
)
from .formation import (
    FormationSystem,
    FormationTrace,
    HinfReport,
    build_formation,
    hinf_closed_form,
    hinf_grid,
    hinf_report,
    hinf_sweep,
    simulate_formation,
)
from .graph import (
    Graph,
    GraphFormatError,
    PlatoonSpec,
    build_knn_platoon,
    incidence,
    laplacian,
    load_graph,
    save_graph,
)

__version__ = "0.1.0"

__all__ = [
    "Adversary",
    "ConnectivityReport",
    "ConsensusTrace",
    "Constant",
    "ExhaustiveLimitError",
    "FaultScenario",
    "FormationSystem",
    "FormationTrace",
    "Graph",
    "GraphFormatError",
    "HinfReport",
    "MeasurementTrace",
    "ModelMismatchError",
    "PlatoonSpec",
    "Ramp",
    "RecoveryResult",
    "SeededRandom",
    "Sinusoid",
    "WeightMatrix",
    "algebraic_connectivity",
    "build_formation",
    "build_knn_platoon",
    "connectivity_report",
    "edge_connectivity",
    "hinf_closed_form",
    "hinf_grid",
    "hinf_report",
    "hinf_sweep",
    "incidence",
    "is_connected",
    "is_f_local",
    "isoperimetric_constant",
    "knn_closed_forms",
    "lambda2_bounds",
    "laplacian",
    "load_graph",
    "max_tolerable_faults",
    "observation_model",
    "observe",
    "packet_drop_scenario",
    "random_weights",
    "recover_initial_state",
    "robustness",
    "run_wmsr",
    "save_graph",
    "simulate_faulty",
    "simulate_formation",
    "vertex_connectivity",
    "wmsr_update",
]
