"""inls_lab: radial numerics for i u_t - L_a u + lam |x|^{-b} |u|^alpha u = 0."""
from .model import (ModelParams, DerivedIndices, Regime, HardyViolation, HypothesisViolation,
                    RegimeMismatch, derive_indices, check_hypotheses)
from .radial import RadialGrid, RadialField
from .groundstate import (SolverOpts, GroundState, NoConvergence, Prediction, solve_ground_state,
                          thresholds, classify_initial_data)
from .dynamics import EvolutionConfig, Evolution, Status, evolve

__version__ = "0.1.0"
