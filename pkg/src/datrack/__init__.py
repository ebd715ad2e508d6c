"""Distributed average tracking for Lipschitz nonlinear multi-agent networks.

Gain synthesis through algebraic Riccati equations, a deterministic
multi-agent simulator for the robust / adaptive / continuous tracking
algorithm families, and analysis tools that turn the convergence
certificates into checkable numbers.
"""

from .graph import (
    DisconnectedGraphError,
    GraphSpectrum,
    UndirectedGraph,
    averaging_projector,
    complete_graph,
    cycle_graph,
    incidence,
    is_connected,
    lambda2,
    laplacian,
    path_graph,
    spectrum,
)
from .care import CareProblem, CareSolution, CareSolverError, is_hurwitz, is_stabilizable, solve_care
from .dynamics import (
    BoundaryLayer,
    NonlinearField,
    SystemMatrices,
    eval_field,
    lipschitz_margin,
    reference_rhs,
    smoothed_direction,
    unit_direction,
    verify_lipschitz,
)
from .controller import (
    AdaptiveParams,
    ControllerVariant,
    RobustGains,
    adaptive_gain_rates,
    consensus_argument,
    control_input,
    design_gains,
    filter_rhs,
    reference_scale,
    tracking_scale,
)
from .sim import (
    HAVE_SPEEDUP,
    Scenario,
    ScenarioError,
    SimulationAborted,
    Trajectory,
    available_kernels,
    average_tracking_error,
    consensus_energy,
    consensus_error,
    default_kernel,
    simulate,
    tracking_energy,
    validate_scenario,
)
from .analysis import (
    ChatteringReport,
    DecayFit,
    comparison_envelope,
    fit_decay_rate,
    gains_converged,
    monotonicity_violations,
    predicted_decay_rate,
    total_variation,
)

__version__ = "0.1.0"
