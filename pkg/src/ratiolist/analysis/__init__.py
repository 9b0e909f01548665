"""Exact and Monte Carlo error probabilities, spectra, and bound evaluators."""

from .bounds import (
    BoundReport,
    ErasuresOnlyEstimate,
    RCBound,
    ConverseCheck,
    converse_check,
    erasures_only_capacity_estimate,
    fano_floor_bits,
    fano_lower_bound,
    lemma_monotonicity_check,
    rc_upper_bound,
)
from .core import Decoder, ErrorEstimate, SpectrumSample, list_stats, wilson_halfwidth
from .enumeration import (
    ENUMERATION_CAP,
    EnumerationTooLarge,
    SpectrumInequality,
    block_mutual_information,
    exact_counting_error,
    exact_error_via_phi,
    exact_list_error,
    exact_phi_spectrum,
    expected_phi_exponent,
    info_spectrum_inequality,
)
from .montecarlo import info_density_spectrum, list_capacity_estimate, mc_list_error, phi_spectrum
