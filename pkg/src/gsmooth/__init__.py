"""gsmooth: normalized gradient methods for generalized-smooth problems.

A numerical-optimization library plus benchmark harness: membership
checkers for gradient-growth smoothness classes, descent-lemma and
constant-formula verifiers, normalized/clipped descent, the SGD family,
SPIDER variance reduction with theoretical hyperparameter calculators,
and seeded, replayable experiment presets.
"""

__version__ = "0.1.0"

from .core import (
    DerivedDetConstants,
    DerivedStochConstants,
    NoiseSpec,
    SmoothnessSpec,
    derive_det_constants,
    derive_stoch_constants,
    param_point,
    rng_stream,
    young_bound_holds,
)
from .objectives import (
    DROInstance,
    IngestionError,
    Objective,
    PhaseRetrievalInstance,
    chi2_conjugate,
    dro_min_eta,
    dro_objective,
    generate_phase_retrieval,
    generate_synthetic_regression,
    instance_from_json,
    instance_to_json,
    load_regression_csv,
    make_exponential_witness,
    make_polynomial_witness,
    make_quadratic,
    phase_retrieval_objective,
    phase_retrieval_smoothness,
)
from .smoothness import (
    CheckReport,
    SegmentGrid,
    ball_pairs,
    ball_points,
    check_asym_membership,
    check_descent_lemma,
    check_expected_sym,
    check_hessian_membership,
    check_prop2_bound,
    check_sym_membership,
    estimate_noise,
    fit_smoothness,
    local_pairs,
    moment_bound_margin,
    ray_pairs,
    segment_grad_integral,
    segment_grad_max,
)
from .optimizers import (
    CertificateResult,
    DetPlan,
    DivergenceSignal,
    RunTrace,
    SpiderConfig,
    beta_gd,
    clipped_gd,
    divergence_certificate,
    sgd_family,
    spider,
    theoretical_gamma_det,
    theoretical_spider_hyperparams,
)
from .harness import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    ResultRow,
    emit_csv,
    read_result_rows,
    run_checks,
    run_experiment,
    write_manifest,
)
from .presets import PRESET_NAMES, preset
