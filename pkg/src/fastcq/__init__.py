"""Fast and memory-oblivious Runge--Kutta convolution quadrature."""
from .cq import (WeightTable, bdf1_weights_analytic, direct_convolution, local_weights,
                 weight_oracle_adaptive, weights_fft)
from .fast_conv import HistoryState
from .fde import FDEProblem, assemble_p1, fde_error_report, fde_solve, manufactured, stage_matrices
from .frac_integral import FracIntJob, convergence_table, profile, run
from .gauss import QuadRule, gauss_jacobi, gauss_legendre
from .kernel_quad import KernelParams, KernelRule, build_kernel_rule
from .rk import METHOD_NAMES, RKMethod, get_method
from .weight_quad import (WeightParams, WeightRule, build_weight_rule, select_parameters,
                          weight_matrix_from_rule, weights_from_rule)

__version__ = "0.1.0"
