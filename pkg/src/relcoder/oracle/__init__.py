"""Independent sampling and search routes used to cross-check the exact constructions."""
from .demos import Ell2Report, LpReport, ell2_psnc_demo, lp43_projectional_demo
from .instances import (
    ExtremalInstance,
    Instance,
    IntersectionInstance,
    chain_instances,
    corpus,
    extremal_pairs,
    intersection_instances,
    is_linear,
    random_multimap,
    sum_instances,
)
from .sampling import (
    OracleEstimate,
    SampleConfig,
    SampledCoderivative,
    classify_trend,
    grid_linear_openness,
    grid_metric_regularity,
    sample_coderivative,
    sample_lip,
)
from .witness import (
    WitnessResult,
    check_relative_extremality,
    extremal_witness_search,
    fuzzy_witness_search,
)
from .equivalence import EquivalenceReport, regularity_equivalence
