"""Adaptive Bayesian regression with tensor-product B-spline bases.

The regression function is a random finite sum of tensor-product B-spline
atoms whose count, interaction structure, degrees, knots and coefficients
are all inferred by a trans-dimensional MCMC sampler; a probit extension
handles binary classification.
"""

from .atoms import BasisAtom, design_column, eval_atom
from .benchmarks import (SyntheticSpec, auc, eval_test_function,
                         generate_dataset, make_two_moons, rmse, rsnr_sigma)
from .bspline import KnotSequence, bspline_support, eval_bspline
from .errors import ConfigError, EmptyChainError, ProposalError
from .evaluate import cross_validate, default_grid, grid_search, run_benchmark
from .model import (Dataset, Hyperparams, ModelState, fit_defaults,
                    fitted_values, log_likelihood, log_posterior, log_prior,
                    mean_function, predict)
from .probit import (PrecisionParam, gibbs_precision, predict_prob,
                     probability_grid, run_probit_chain, sample_latent)
from .proposals import (atom_structural_log_density, expanded_bounds,
                        knot_log_density, propose_atom, propose_knots,
                        propose_structure)
from .sampler import (Chain, MoveOutcome, SamplerState, birth_move,
                      death_move, gibbs_coefficients, gibbs_mass,
                      gibbs_noise_variance, load_chain, relocate_move,
                      run_chain, save_chain)

__version__ = "0.1.0"
