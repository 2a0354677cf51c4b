"""Single-track vehicle dynamics with distributed tire friction.

A numerical toolkit for a two-state lateral vehicle model coupled with
hyperbolic transport PDEs describing bristle deflection in the tire
contact patches: steady-state force maps, reduced (quasi-static-tire)
and full ODE-PDE simulation, spectral stability charts, and stabilizing
state/output-feedback control with observer, input delay and measurement
noise.
"""

from .chart import (ChartCell, LinearGenerator, assemble_generator,
                    boundary_layer_operator, front_stiffness_for_index,
                    max_real_part, spectrum, sweep_chart)
from .config import (RunRecord, Scenario, emit_csv, parse_scenario,
                     parse_scenario_text)
from .control import (ClosedLoopConfig, ClosedLoopResult, Gains, NormFit,
                      closed_loop_simulate, default_poles, design_observer,
                      design_state_feedback, lyapunov_solve, norm_trajectory,
                      observer_step)
from .errors import ConfigurationError, NumericalError, SemitrackError
from .experiments import (EpsilonSweepResult, benchmark_closed_loop,
                          epsilon_sweep, k_sweep, noise_floor, benchmark_gains,
                          vx_sweep)
from .grid import grid_l2_norm, quad_weights, uniform_grid
from .model import (ModelForm, assemble, assemble_flexible, assemble_rigid,
                    reg_abs, slip_angles)
from .noise import GaussianNoise, SplitMix64
from .params import PressureProfile, VehicleParams
from .pde import (DecayRecord, Discretization, FullState, FullTrajectory,
                  discrete_equilibrium, discrete_steady_profile,
                  fit_decay_rate, max_stable_dt, simulate_boundary_layer,
                  simulate_full, step_full, tire_forces)
from .reduced import (ReducedTrajectory, StabilityVerdict, critical_speed,
                      reduced_stability, simulate_reduced,
                      stability_from_stiffness)
from .steady_state import (BristleProfile, Equilibrium, ForceMapEvaluator,
                           cornering_stiffness, equilibrium_residual,
                           find_equilibrium, force_map, phi_slip_derivative,
                           solve_phi)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
