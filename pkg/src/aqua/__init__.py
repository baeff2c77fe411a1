"""Efficient exact experimental designs by quadratic approximation of Kiefer's criteria."""

from .approx import AdOptions, equivalence_gap, solve_ad, solve_relaxed_qp
from .criteria import Criterion, efficiency, phi, phi_gradient
from .errors import *  # noqa: F401,F403
from .export import export_micqp
from .integer import BnbOptions, KlOptions, SolveReport, branch_and_bound, kl_exchange, round_incumbent
from .model import Design, DesignProblem, from_regressors, i_to_a, info_matrix, moment_matrix
from .pipeline import AquaOptions, AquaResult, IterOptions, aqua_solve, iterative_aqua
from .polytope import ConstraintSet, add_symmetry_orbits, feasible, lp_max
from .quadmodel import QuadModel, build, exchange_delta, gamma_d, phi_quad, q_entry
from .rounding import efficient_rounding

__version__ = "0.1.0"
