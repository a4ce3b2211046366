"""sigmachain: exact divisor-sum arithmetic, cyclotomic smoothness sieves,
effective diophantine bounds, and exhaustive sigma-iteration searches."""

from .arith import (
    Factorization,
    abundancy,
    factorize,
    is_prime,
    omega,
    omega_s,
    primes_in_range,
    primes_upto,
    repunit,
    sigma,
    sigma_of,
)
from .bounds import (
    BoundReport,
    DeltaQuery,
    LinearFormInstance,
    build_linear_form,
    delta_lower_bound,
    delta_oracle,
    delta_recurrence_constant,
    exhaustive_relation_search,
    find_multiplicative_relation,
    linear_form_is_zero,
    matveev_c1,
    matveev_lower_bound,
    siegel_bound,
    threshold_small_prime,
    uniform_gap_bound,
)
from .search import (
    SearchRecord,
    SearchTask,
    pairs_task,
    pomerance_task,
    search_pairs,
    search_pomerance_divisor,
    search_sigma_prime_power,
    search_smp,
    search_superperfect,
    sigma_prime_power_task,
    smp_task,
    superperfect_task,
    verify_structure,
)
from .sieve import (
    ClassifiedFactor,
    SievePrime,
    SieveSpec,
    check_prime_gaps,
    check_repunit_factor_count,
    check_residue_count,
    classify_factors,
    cyclotomic_value,
    enumerate_s_union,
    enumerate_sie,
    enumerate_sie_products,
    factor_cyclotomic,
    factor_repunit,
    partition_by_dominant_divisor,
    sweep_residue_counts,
    zsigmondy_primitive,
)

__version__ = "0.1.0"
