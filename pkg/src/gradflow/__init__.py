"""Pseudo-spectral energy-stable solvers for dissipative gradient flows."""

from .diagnostics import (ConvergenceRow, TraceRow, converge, mass, observe,
                          roughness, run_trace)
from .linsolve import ConvergenceError, LinearProblem, solve
from .models import (ModelSpec, NegativeRadicandError, allen_cahn,
                     cahn_hilliard, coupling, epitaxy, make_model,
                     modified_energy, original_energy, phase_field_crystal,
                     quadratize)
from .spectral import Grid2D, GridMismatchError, make_grid
from .timestep import (CorrectionRecord, SchemeConfig, StepState, advance,
                       correct_eop, correct_relax, init_state, lyapunov,
                       run_steps, step_baseline)

__version__ = "0.1.0"
