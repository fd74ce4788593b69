"""Exact laws, limit theorems and maximum likelihood for mean-field spin models."""
from .exceptions import (ClassificationError, DomainError, EmptyWindowError, HypothesisViolation,
                         KinkDiagnostic, KinkError, MeanFieldError, OrderError,
                         UnbracketableError)
from .smoothfn import (AnnealedG, BinaryEntropyT, Combination, Constant, Entropy, Polynomial,
                       SmoothFunction, SpinPolynomial, combine)
from .landscape import Landscape, Maximizer, build_A, find_maximizers, landscape_of, perturbation_sets
from .gibbs import FiniteGibbs, build, make_window, sample, scaled_conditional_law
from .limitlaw import MleLimit, NormalLaw, TiltedLaw, mle_limit, theorem1_weights
from .metrics import ContinuousLaw, DiscreteLaw, d_K, d_W, rate_fit
from .mle import MeanFieldMLE, MleProblem, estimate, mc_experiment
from .catalog import MODEL_NAMES, ModelSpec, get_model

__version__ = "0.1.0"
