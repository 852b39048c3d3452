"""Angular and skew-angular distances in finite-dimensional normed spaces.

Computes the distances, the triangle-inequality refinements built on them,
and searches numerically for evidence that a norm does not come from an
inner product.
"""

from .detector import (
    DetectionResult,
    LorchResult,
    SearchConfig,
    classify_space,
    lorch_scan,
    parallelogram_defect,
    search_counterexample,
    violation_objective,
)
from .functionals import (
    BoundReport,
    PairGeometry,
    angular_bounds,
    dehghan_gap,
    dunkl_williams_2,
    euclidean_identity_defect,
    maligranda_gap,
    pair_geometry,
    sharpness_ratio,
    skew_angular_bounds,
    triangle_bounds,
)
from .norm_core import (
    Gram,
    Lp,
    WeightedLp,
    as_vector,
    norm,
    parse_norm_spec,
    parse_vector,
    sample_vector,
    validate_spec,
)

__version__ = "0.1.0"
