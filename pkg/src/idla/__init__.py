"""Concentration functions, compound-Poisson approximants, and polyhedral
Levy-type distances for finite discrete laws, plus the constructive
polyhedron augmentation that traps slab expansions inside metric
neighborhoods."""

__version__ = "0.1.0"

from .distributions import (  # noqa: F401
    DimensionMismatch,
    DiscreteDistribution,
    FormatError,
    SubProbabilityDistribution,
    characteristic_function,
    convolve,
    delta,
    empirical,
    pushforward,
    sample,
    shift,
    total_variation,
)
from .concentration import (  # noqa: F401
    ConcentrationResult,
    Decomposition,
    concentration_ball,
    concentration_interval_1d,
    decompose,
    max_contamination,
)
from .compound_poisson import (  # noqa: F401
    Approximant,
    SupportOverflow,
    build_eta0,
    compound_poisson_exact,
    compound_poisson_sample,
)
from .polyhedra import (  # noqa: F401
    Cone,
    EmptyPolyhedron,
    Face,
    NetConstructionFailure,
    NonConvergence,
    Polyhedron,
    augment,
    delta_net,
    embed_operator,
    enumerate_faces,
    neighborhood_contains,
    normal_cone,
    project,
    slab_expand,
)
from .metrics import (  # noqa: F401
    InfResult,
    MetricEstimate,
    PolyhedronFamily,
    bisect_inf,
    levy_orthant_lambda,
    neighborhood_metric_lambda,
    random_family,
    rho_m,
    slab_metric_lambda,
)
from .harness import (  # noqa: F401
    BoundReport,
    ExperimentConfig,
    RogozinConfig,
    RogozinReport,
    emit_report,
    run_bound_experiment,
    run_rogozin_experiment,
)
