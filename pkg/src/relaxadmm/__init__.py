"""Over-relaxed ADMM with closed-form linear-rate certificates.

``rate_theory`` holds the rate formulas and tuning rules, ``engine`` the
iteration and rate measurement, ``problems`` the test problems, and
``experiments`` the sweeps behind the ``relaxadmm`` command.
"""

from .engine import (
    EstimationError,
    IterateState,
    ProblemInstance,
    RunTrace,
    SolverError,
    StoppingRule,
    StructuralError,
    TraceRecord,
    default_init,
    envelope_holds,
    estimate_rate,
    fixed_point_of,
    run,
    step,
    tail_burn_in,
)
from .problems import (
    ClassificationDataset,
    LogisticL1Instance,
    QuadraticInstance,
    estimate_kappa_f,
    generate_classification_data,
    make_attainability_instance,
    make_random_quadratic,
    project_l1_ball,
)
from .rate_theory import (
    UNBOUNDED,
    AdmmParams,
    ComparisonRates,
    ConditioningInfo,
    DomainError,
    NormalizedConstants,
    RateCertificate,
    best_alpha,
    bound_at,
    certificate,
    chi,
    comparison_rates,
    eta,
    inf_rate,
    normalize,
    optimal_params,
    optimal_rho,
    tau_a,
)

__version__ = "0.1.0"
