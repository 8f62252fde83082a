"""Cumulants of multiple Wiener-Ito integrals over R^d.

Four independent routes compute the same numbers: the recursive contraction
formula (:mod:`chaoscum.recursive`), the Gamma-operator algebra on chaos
expansions (:mod:`chaoscum.chaos`), connected-diagram enumeration
(:mod:`chaoscum.diagrams`) and Monte Carlo sampling (:mod:`chaoscum.montecarlo`).
"""
from .chaos import (
    ChaosExpansion,
    cumulant_via_gamma,
    cumulants_to_moments,
    expectation,
    gamma,
    gamma_pair,
    moments,
    moments_to_cumulants,
    multiply,
)
from .diagrams import Multigraph, enumerate_K, kappa_diagram, moment_via_matchings, weight
from .errors import (
    ChaosCumError,
    ContractionOrderError,
    InadmissiblePrefixError,
    KernelFormatError,
    OrderCapError,
    ShapeMismatchError,
)
from .montecarlo import estimate_cumulants, evaluate, hermite
from .recursive import (
    cq,
    enumerate_rvectors,
    gamma_expansion_chaos,
    kappa4_contraction_form,
    kappa4_nunugio_form,
    kappa_recursive,
)
from .symtensor import BlockTensor, SymTensor, contract, inner_product, norm, sym_contract, symmetrize

__version__ = "0.1.0"
