"""Empirical verification of normal distribution laws for polynomials in
strongly additive functions, with exact rational oracles for the underlying
sieve and pairing identities."""

from .additive import (
    PrimeWindow,
    StronglyAdditive,
    builtin_omega,
    builtin_omega_class,
    centered_value,
    centered_value_by_weights,
    eval_full,
    eval_truncated,
    omega_residue_class,
    window_from_primes,
    window_up_to,
)
from .errors import (
    CapabilityError,
    ConfigError,
    EkacError,
    EmptyRangeError,
    SizeGuardError,
    ZeroVarianceError,
)
from .experiment import (
    ExperimentConfig,
    load_config,
    parse_config,
    preset_config,
    run_experiment,
    serialize_config,
    stats_dict,
)
from .gaussian import (
    Ecdf,
    FitReport,
    fit_normalized,
    ks_distance,
    make_ecdf,
    normalize_and_fit,
    phi,
)
from .inputs import (
    AllIntegers,
    DensityModel,
    InputSet,
    Remainder,
    ShiftedPrimes,
    big_x,
    density_h,
    empirical_remainder,
    enumerate_records,
    log_integral,
    model_for,
    shifted_model,
    unit_model,
)
from .moments import (
    MomentAccumulator,
    MomentReport,
    gaussian_moment_C,
    merge,
    report,
)
from .oracle import (
    CheckResult,
    TwoToOneMap,
    enumerate_D_k,
    enumerate_two_to_one,
    f_r,
    main_term_weight,
    remainder_coeff,
    run_suite,
    verify_divisor_identities,
    verify_f_product_identity,
    verify_pairing_rewrite,
    verify_phi_identity,
    verify_remainder_identity,
)
from .poly import PolyQ, RmExpansion, expand_R_m, make_poly, parse_poly
from .sieve import (
    FactorRecord,
    FactorStream,
    PrimeTable,
    distinct_prime_factors,
    factor_stream,
    primes_up_to,
)
from .stats import (
    StatBundle,
    build_bundle,
    choose_z,
    covariance_kappa,
    frak_bounds,
    mean_mu,
    a_q,
    b_q,
    b_q_squared,
)

__version__ = "0.1.0"
