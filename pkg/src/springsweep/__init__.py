"""Periodic regimes of elastoplastic spring networks via the sweeping process.

The network (springs with stiffness and elastic stress bounds between
one-dimensional nodes) is reduced to a sweeping process on a subspace V,
integrated by the catching-up scheme, and analysed for convergence to and
uniqueness of its T-periodic attractor.
"""

from .attractor import (ConvergenceReport, UniquenessReport, active_set_trace_compare,
                        find_periodic_orbit, poincare_residuals, stress_attractor,
                        uniqueness_study)
from .conditions import (ExtremalCorners, extremal_corners, nonconstancy_check,
                         sufficient_interval, safe_load_general, safe_load_interval,
                         safe_load_report, safe_load_sufficient, simplex_condition,
                         simplex_vertices)
from .errors import *  # noqa: F401,F403
from .network import (DisplacementLoading, NetworkTopology, NodalStress, SpringSpec,
                      UCoordinateStress, build_kinematic_matrix, detect_blocked_springs,
                      incidence_vector, validate_network)
from .polytope import enumerate_vertices, snapshot_vertices
from .projection import SlabProjector, project_A
from .reduction import (MovingSetSnapshot, ReducedSystem, build_reduced_system,
                        effective_displacement, effective_stress, snapshot)
from .scenario import Scenario, emit_scenario, load_scenario, parse_scenario
from .signals import PeriodicSignal
from .solver import (SolverConfig, StepRecord, Trajectory, active_set, catch_up,
                     lambda_decomposition, recover_state)

__version__ = "0.1.0"
