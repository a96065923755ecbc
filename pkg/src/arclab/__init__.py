"""Convex-subgroup classification and definable-coarsening analysis for
lexicographic ordered abelian groups, with a Hahn-series test bench."""

from .convex import (
    ConvexCut,
    Certificate,
    bottom_cut,
    chain_cuts,
    convex_cuts,
    cut_labels,
    cut_name,
    cuts_cmp,
    g_pn,
    labels_at,
    max_divisible,
    max_p_divisible,
    non_definability_certificate,
    np_map,
    parse_cut,
    suffix_divisible_primes,
    thm_condition_prime,
    top_cut,
)
from .errors import (
    ArclabError,
    DslSyntaxError,
    NonEffectiveError,
    ParameterError,
    RootError,
    ShapeError,
    TruncationError,
    UnboundVariableError,
    UnsupportedQuantifierPattern,
    ZeroInputError,
)
from .formulas import (
    build_phi_p,
    build_phi_pn,
    build_psi_p,
    choose_params,
    eval_decidable,
    eval_sampled,
    parse_formula,
    print_formula,
)
from .groups import LexWord, parse_group, print_group
from .hahn import (
    HahnSeries,
    monomial,
    parse_series,
    print_series,
    pth_root,
    root_exists,
    sample_series,
)
from .primes import INF, PartitionMap, PrimeSet
from .valuations import (
    ValuationDescriptor,
    classification_report,
    differential_verify,
    enumerate_definable,
    ring_member,
    v0_descriptor,
    v_p_descriptor,
    v_pn_descriptor,
    verify_thm_defblRCF,
)

__all__ = [
    "ArclabError",
    "Certificate",
    "ConvexCut",
    "DslSyntaxError",
    "HahnSeries",
    "INF",
    "LexWord",
    "NonEffectiveError",
    "ParameterError",
    "PartitionMap",
    "PrimeSet",
    "RootError",
    "ShapeError",
    "TruncationError",
    "UnboundVariableError",
    "UnsupportedQuantifierPattern",
    "ValuationDescriptor",
    "ZeroInputError",
    "bottom_cut",
    "build_phi_p",
    "build_phi_pn",
    "build_psi_p",
    "chain_cuts",
    "choose_params",
    "classification_report",
    "convex_cuts",
    "cut_labels",
    "cut_name",
    "cuts_cmp",
    "differential_verify",
    "enumerate_definable",
    "eval_decidable",
    "eval_sampled",
    "g_pn",
    "labels_at",
    "max_divisible",
    "max_p_divisible",
    "monomial",
    "non_definability_certificate",
    "np_map",
    "parse_cut",
    "parse_formula",
    "parse_group",
    "parse_series",
    "print_formula",
    "print_group",
    "print_series",
    "pth_root",
    "ring_member",
    "root_exists",
    "sample_series",
    "suffix_divisible_primes",
    "thm_condition_prime",
    "top_cut",
    "v0_descriptor",
    "v_p_descriptor",
    "v_pn_descriptor",
    "verify_thm_defblRCF",
]

__version__ = "0.1.0"
