"""Second-order tail expansions for convolutions of light-tailed distributions.

The package pairs asymptotic predictions (:mod:`lighttail.expansion`) with a
high-precision numerical convolution oracle (:mod:`lighttail.oracle`) so the
expansions can be checked empirically.
"""

from .expansion import (
    ExpansionResult,
    ShapeKind,
    compute_shape_integral,
    m1_predict,
    m2_predict,
    thm1_predict,
    thm4_predict,
)
from .models import (
    CATALOG,
    BranchLabel,
    HypothesisError,
    LightTailModel,
    ModelSpecError,
    classify_branch,
    exp_moment,
    first_exp_moment,
    parse_model,
    truncated_exp_moment,
)
from .oracle import ConvTailResult, conv_tail, partial_conv_integral
from .rv import SecondOrderRVFunction, hua_joe_construct

__version__ = "0.1.0"

__all__ = [
    "BranchLabel",
    "CATALOG",
    "ConvTailResult",
    "ExpansionResult",
    "HypothesisError",
    "LightTailModel",
    "ModelSpecError",
    "SecondOrderRVFunction",
    "ShapeKind",
    "classify_branch",
    "compute_shape_integral",
    "conv_tail",
    "exp_moment",
    "first_exp_moment",
    "hua_joe_construct",
    "m1_predict",
    "m2_predict",
    "parse_model",
    "partial_conv_integral",
    "thm1_predict",
    "thm4_predict",
    "truncated_exp_moment",
]
