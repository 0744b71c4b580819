"""Fisher information of frequency estimation for a driven qubit."""

__version__ = "0.1.0"

from .su2 import InvalidArgument, pauli_exp, phase_invariant_distance  # noqa: E402
from .dynamics import (  # noqa: E402
    HamiltonianSpec,
    Kind,
    ResolutionError,
    TimeGrid,
    analytic_slot_unitary,
    evolve_trace,
    evolve_with_pulses,
    propagate_piecewise,
)
from .control import (  # noqa: E402
    ControlSequence,
    PulseEvent,
    build_h2_pulse_train,
    build_method1,
    build_method2,
    build_pang_control,
    transition_probability,
)
from .fisher import (  # noqa: E402
    SINGULAR,
    FIMatrix2,
    FisherResult,
    SegmentationPlan,
    classical_fi,
    closed_form_fi,
    crb_variance,
    fi_matrix_2,
    qfi_generator,
    qfi_max,
    qfi_state,
    qfi_upper_bound,
    segmented_total_fi,
)

__all__ = [
    "InvalidArgument", "pauli_exp", "phase_invariant_distance",
    "HamiltonianSpec", "Kind", "ResolutionError", "TimeGrid", "analytic_slot_unitary",
    "evolve_trace", "evolve_with_pulses", "propagate_piecewise",
    "ControlSequence", "PulseEvent", "build_h2_pulse_train", "build_method1", "build_method2",
    "build_pang_control", "transition_probability",
    "SINGULAR", "FIMatrix2", "FisherResult", "SegmentationPlan", "classical_fi", "closed_form_fi",
    "crb_variance", "fi_matrix_2", "qfi_generator", "qfi_max", "qfi_state", "qfi_upper_bound",
    "segmented_total_fi",
]
