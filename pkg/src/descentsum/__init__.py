"""Weighted enumeration of permutations by consecutive descent patterns.

The package computes alpha_n, the sum over all permutations of length n of a
product of rational weights read off length-m windows of the descent word,
by three independent exact routes (brute force, insertion DP, operator
iteration) and analyzes the n -> infinity behavior through the spectrum of a
small transfer-matrix pair: alpha_n / n! is a finite combination of
lambda^(n-m) terms whose coefficients come from eigenfunction pairings.
"""

from .exact import (
    BRUTE_FORCE_CAP,
    WeightedCount,
    brute_force_alpha,
    brute_force_alpha_direct,
    count_barred,
    derangements,
    double_descents,
    dp_alpha,
    genfun_coeffs,
    nearest_integer_formula,
    section6_recursion,
    verify_genfun_equation,
    wt_of_permutation,
)
from .expfun import (
    ExpPoly,
    PiecewiseFn,
    adjoint_eigenfunction,
    alpha_by_operator_iteration,
    apply_J,
    apply_operator,
    asymptotic_constant,
    constant_piecewise,
    eigenfunction_pieces,
    inner_products,
    kappa_piecewise,
    letter_indicator,
    mu_piecewise,
    polytope_integral,
    predict_alpha,
    scheme_constant,
)
from .linalg import det, gamma, mat_exp, nullspace_vector
from .presets import PRESETS, preset_scheme
from .spectral import (
    SpectralPoint,
    TransferPair,
    build_transfer,
    det_M_product_check,
    det_P,
    find_complex_roots,
    find_real_roots,
    is_simple,
)
from .words import (
    SchemeParseError,
    WeightScheme,
    all_words,
    descent_word,
    dump_scheme,
    is_symmetric,
    load_scheme,
    pattern_set,
    reverse_complement,
    standardize,
    symmetry_defect,
)

__version__ = "0.1.0"

__all__ = [
    "BRUTE_FORCE_CAP",
    "ExpPoly",
    "PRESETS",
    "PiecewiseFn",
    "SchemeParseError",
    "SpectralPoint",
    "TransferPair",
    "WeightScheme",
    "WeightedCount",
    "adjoint_eigenfunction",
    "all_words",
    "alpha_by_operator_iteration",
    "apply_J",
    "apply_operator",
    "asymptotic_constant",
    "brute_force_alpha",
    "brute_force_alpha_direct",
    "build_transfer",
    "constant_piecewise",
    "count_barred",
    "derangements",
    "descent_word",
    "det",
    "det_M_product_check",
    "det_P",
    "double_descents",
    "dp_alpha",
    "dump_scheme",
    "eigenfunction_pieces",
    "find_complex_roots",
    "find_real_roots",
    "gamma",
    "genfun_coeffs",
    "inner_products",
    "is_simple",
    "is_symmetric",
    "kappa_piecewise",
    "letter_indicator",
    "load_scheme",
    "mat_exp",
    "mu_piecewise",
    "nearest_integer_formula",
    "nullspace_vector",
    "pattern_set",
    "polytope_integral",
    "predict_alpha",
    "preset_scheme",
    "reverse_complement",
    "scheme_constant",
    "section6_recursion",
    "standardize",
    "symmetry_defect",
    "verify_genfun_equation",
    "wt_of_permutation",
]
