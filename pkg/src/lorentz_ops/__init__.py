"""Exact-arithmetic analysis of multiplication and weighted composition
operators on Lorentz spaces over concrete measure spaces.

The package decides (or bounds) the ascent and descent of multiplication
operators, composition operators, and weighted compositions in both the
outer form f -> (u . T) * (f . T) and the inner form f -> u * (f . T),
and computes Lorentz quasi-norms and norms of simple functions exactly
where closed forms exist.  Every structural claim ships with a
certificate that can be replayed against the measure-space primitives,
and every finite instance is cross-checked against brute-force linear
algebra on the operator matrix.
"""

from .chains import (
    HorizonReport,
    KernelSeparation,
    OrderVerdict,
    finite_ascent_descent,
    horizon_chain,
    kernel_basis_functions,
    kernel_dimension,
    kernel_membership,
    probe_horizon,
    surviving_weight_set,
)
from .criteria import (
    CriteriaError,
    CriterionReport,
    HypothesisReport,
    ascent_geometric,
    ascent_via_measures,
    descent_injectivity_bound,
    hat_operator_analysis,
    hypothesis_report,
    infinite_ascent_witnesses,
    infinite_descent_paired,
    infinite_descent_separable,
    kernel_identification,
    mult_ascent,
    mult_descent,
    range_exclusion_witness,
    range_membership_witness,
    set_family,
)
from .config import ConfigError, InstanceConfig, load_config, parse_config, serialize
from .lorentz import (
    LorentzError,
    LorentzIndex,
    NormResult,
    SimpleFunction,
    StepFunction,
    char_norm_closed_form,
    distribution,
    is_zero_ae,
    norm,
    quasi_norm,
    rearrangement,
)
from .operators import (
    AffineWeight,
    BoundednessReport,
    FiniteWeight,
    OperatorError,
    OperatorSpec,
    TailWeight,
    apply_operator,
    boundedness_report,
)
from .rational import INF, QQi, as_fraction, is_inf
from .report import AnalysisReport, analyze, render_json, render_text
from .sets import AtomSet, IntervalUnion, StructuredSet
from .spaces import (
    AtomMap,
    CountableAtomicSpace,
    FiniteAtomicSpace,
    IntervalSpace,
    PiecewiseAffineMap,
    PiecewiseConstant,
    TailResidueMap,
    forward_image,
    measure_of,
    preimage,
    radon_nikodym,
    zero_set,
)

__version__ = "0.1.0"

__all__ = [
    "AffineWeight",
    "AnalysisReport",
    "AtomMap",
    "AtomSet",
    "BoundednessReport",
    "ConfigError",
    "CountableAtomicSpace",
    "CriteriaError",
    "CriterionReport",
    "FiniteAtomicSpace",
    "FiniteWeight",
    "HorizonReport",
    "HypothesisReport",
    "INF",
    "InstanceConfig",
    "IntervalSpace",
    "IntervalUnion",
    "KernelSeparation",
    "LorentzError",
    "LorentzIndex",
    "NormResult",
    "OperatorError",
    "OperatorSpec",
    "OrderVerdict",
    "PiecewiseAffineMap",
    "PiecewiseConstant",
    "QQi",
    "SimpleFunction",
    "StepFunction",
    "StructuredSet",
    "TailResidueMap",
    "TailWeight",
    "analyze",
    "apply_operator",
    "as_fraction",
    "ascent_geometric",
    "ascent_via_measures",
    "boundedness_report",
    "char_norm_closed_form",
    "descent_injectivity_bound",
    "distribution",
    "finite_ascent_descent",
    "forward_image",
    "hat_operator_analysis",
    "horizon_chain",
    "hypothesis_report",
    "infinite_ascent_witnesses",
    "infinite_descent_paired",
    "infinite_descent_separable",
    "is_inf",
    "is_zero_ae",
    "kernel_basis_functions",
    "kernel_dimension",
    "kernel_identification",
    "kernel_membership",
    "load_config",
    "measure_of",
    "mult_ascent",
    "mult_descent",
    "norm",
    "parse_config",
    "preimage",
    "probe_horizon",
    "quasi_norm",
    "radon_nikodym",
    "range_exclusion_witness",
    "range_membership_witness",
    "rearrangement",
    "render_json",
    "render_text",
    "serialize",
    "set_family",
    "surviving_weight_set",
    "zero_set",
]
