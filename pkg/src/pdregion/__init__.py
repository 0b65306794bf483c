"""Positive-damping regions, frequency bands and passivization checks for rational systems."""

from pdregion.ratpoly import Polynomial, RationalFunction, RationalMatrix
from pdregion.tfparse import parse_expression, parse_system, load_system
from pdregion.pdcore import PassivityIndex, pd_region, pd_check_siso, pd_check_mimo_exact
from pdregion.bands import FrequencyBand, pd_band

__all__ = [
    "Polynomial", "RationalFunction", "RationalMatrix",
    "parse_expression", "parse_system", "load_system",
    "PassivityIndex", "pd_region", "pd_check_siso", "pd_check_mimo_exact",
    "FrequencyBand", "pd_band",
]
